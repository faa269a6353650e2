use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::automata::{FiniteRewardAutomaton, Label, RewardValue};

use super::{EnvError, EnvState, Environment, LabeledMdp, StepOutcome};

/// `(row, col)`, row 0 at the top.
pub type Cell = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    North,
    South,
    East,
    West,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::North, Action::South, Action::East, Action::West];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    /// The two directions an agent may slip into.
    pub fn lateral(self) -> [Action; 2] {
        match self {
            Action::North | Action::South => [Action::East, Action::West],
            Action::East | Action::West => [Action::North, Action::South],
        }
    }

    fn offset(self) -> (isize, isize) {
        match self {
            Action::North => (-1, 0),
            Action::South => (1, 0),
            Action::East => (0, 1),
            Action::West => (0, -1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Landmark {
    pub cell: [usize; 2],
    pub prop: char,
}

/// Grid layout as stored in config documents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub initial: [usize; 2],
    pub slip: f64,
    #[serde(default)]
    pub landmarks: Vec<Landmark>,
    #[serde(default)]
    pub walls: Vec<[[usize; 2]; 2]>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.width == 0 || self.height == 0 {
            return Err(EnvError::Config(format!("grid must be non-empty, got {}x{}", self.height, self.width)));
        }
        if !(0.0..0.5).contains(&self.slip) {
            return Err(EnvError::Config(format!("slip must lie in [0, 0.5), got {}", self.slip)));
        }
        let in_bounds = |c: [usize; 2]| c[0] < self.height && c[1] < self.width;
        if !in_bounds(self.initial) {
            return Err(EnvError::Config(format!("initial cell {:?} out of bounds", self.initial)));
        }
        let mut seen = HashSet::new();
        for lm in &self.landmarks {
            if !in_bounds(lm.cell) {
                return Err(EnvError::Config(format!("landmark `{}` at {:?} out of bounds", lm.prop, lm.cell)));
            }
            if !lm.prop.is_ascii_lowercase() {
                return Err(EnvError::Config(format!("landmark proposition `{}` is not in a..=z", lm.prop)));
            }
            if !seen.insert(lm.cell) {
                return Err(EnvError::Config(format!("two landmarks share cell {:?}", lm.cell)));
            }
        }
        for [a, b] in &self.walls {
            if !in_bounds(*a) || !in_bounds(*b) {
                return Err(EnvError::Config(format!("wall {a:?}-{b:?} out of bounds")));
            }
            if a[0].abs_diff(b[0]) + a[1].abs_diff(b[1]) != 1 {
                return Err(EnvError::Config(format!("wall {a:?}-{b:?} does not separate adjacent cells")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        let spec: GridSpec = serde_json::from_str(text).map_err(|e| EnvError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid spec serializes")
    }
}

/// Parses and validates a grid config document.
pub fn load_grid_config(document: &str) -> Result<GridSpec, EnvError> {
    GridSpec::from_json(document)
}

/// A slippery grid world whose rewards come from a hidden task automaton.
#[derive(Clone, Debug)]
pub struct GridWorld {
    spec: GridSpec,
    // blocked[cell * 4 + action]
    blocked: Vec<bool>,
    labels: Vec<Label>,
    label_alphabet: Vec<Label>,
    task: FiniteRewardAutomaton,
    state: EnvState,
}

impl GridWorld {
    pub fn new(spec: GridSpec, task: FiniteRewardAutomaton) -> Result<Self, EnvError> {
        spec.validate()?;
        let n = spec.width * spec.height;
        let idx = |c: [usize; 2]| c[0] * spec.width + c[1];
        let mut labels = vec![Label::EMPTY; n];
        for lm in &spec.landmarks {
            labels[idx(lm.cell)] = Label::single(lm.prop).map_err(|e| EnvError::Config(e.to_string()))?;
        }
        let mut label_alphabet: Vec<Label> = labels.clone();
        label_alphabet.push(Label::EMPTY);
        label_alphabet.sort();
        label_alphabet.dedup();
        for &l in &label_alphabet {
            if task.label_index(l).is_none() {
                return Err(EnvError::Config(format!("task automaton has no transition for label {l}")));
            }
        }

        let mut blocked = vec![false; n * 4];
        for cell in 0..n {
            let (r, c) = (cell / spec.width, cell % spec.width);
            for a in Action::ALL {
                let (dr, dc) = a.offset();
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr as usize >= spec.height || nc as usize >= spec.width {
                    blocked[cell * 4 + a.index()] = true;
                }
            }
        }
        for [a, b] in &spec.walls {
            let (ca, cb) = (idx(*a), idx(*b));
            for act in Action::ALL {
                if neighbor_raw(&spec, ca, act) == Some(cb) {
                    blocked[ca * 4 + act.index()] = true;
                }
                if neighbor_raw(&spec, cb, act) == Some(ca) {
                    blocked[cb * 4 + act.index()] = true;
                }
            }
        }
        let initial = idx(spec.initial);
        let state = EnvState { cell: initial, task_state: task.initial() };
        Ok(GridWorld { spec, blocked, labels, label_alphabet, task, state })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn task(&self) -> &FiniteRewardAutomaton {
        &self.task
    }

    pub fn state(&self) -> EnvState {
        self.state
    }

    pub fn cell_index(&self, cell: Cell) -> usize {
        cell.0 * self.spec.width + cell.1
    }

    pub fn cell_of(&self, index: usize) -> Cell {
        (index / self.spec.width, index % self.spec.width)
    }

    pub fn cell_label(&self, index: usize) -> Label {
        self.labels[index]
    }

    /// Destination when moving `action` from `cell` without slipping.
    pub fn neighbor(&self, cell: usize, action: Action) -> usize {
        if self.blocked[cell * 4 + action.index()] {
            cell
        } else {
            neighbor_raw(&self.spec, cell, action).expect("unblocked move stays in bounds")
        }
    }

    /// Outcome directions with their probabilities, before wall resolution.
    fn outcomes(&self, action: Action) -> [(Action, f64); 3] {
        let s = self.spec.slip;
        let [l1, l2] = action.lateral();
        [(action, 1.0 - 2.0 * s), (l1, s), (l2, s)]
    }
}

fn neighbor_raw(spec: &GridSpec, cell: usize, action: Action) -> Option<usize> {
    let (r, c) = (cell / spec.width, cell % spec.width);
    let (dr, dc) = action.offset();
    let (nr, nc) = (r as isize + dr, c as isize + dc);
    if nr < 0 || nc < 0 || nr as usize >= spec.height || nc as usize >= spec.width {
        None
    } else {
        Some(nr as usize * spec.width + nc as usize)
    }
}

impl LabeledMdp for GridWorld {
    fn num_states(&self) -> usize {
        self.spec.width * self.spec.height
    }

    fn num_actions(&self) -> usize {
        4
    }

    fn initial_state(&self) -> usize {
        self.cell_index((self.spec.initial[0], self.spec.initial[1]))
    }

    fn transitions(&self, x: usize, a: usize) -> Vec<(usize, f64)> {
        let action = Action::from_index(a).expect("action index in 0..4");
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(3);
        for (dir, p) in self.outcomes(action) {
            if p <= 0.0 {
                continue;
            }
            let dest = self.neighbor(x, dir);
            match out.iter_mut().find(|(d, _)| *d == dest) {
                Some(entry) => entry.1 += p,
                None => out.push((dest, p)),
            }
        }
        out.sort_by_key(|&(d, _)| d);
        out
    }

    fn label(&self, _x: usize, _a: usize, next: usize) -> Label {
        self.labels[next]
    }

    fn label_alphabet(&self) -> Vec<Label> {
        self.label_alphabet.clone()
    }
}

impl Environment for GridWorld {
    fn reset(&mut self) -> usize {
        self.state = EnvState { cell: self.initial_state(), task_state: self.task.initial() };
        self.state.cell
    }

    fn step<R: Rng + ?Sized>(&mut self, action: usize, rng: &mut R) -> StepOutcome {
        let action = Action::from_index(action).expect("action index in 0..4");
        let u: f64 = rng.gen();
        let s = self.spec.slip;
        let [l1, l2] = action.lateral();
        let dir = if u < 1.0 - 2.0 * s {
            action
        } else if u < 1.0 - s {
            l1
        } else {
            l2
        };
        let next = self.neighbor(self.state.cell, dir);
        let label = self.labels[next];
        let (task_state, reward) = match self.task.label_index(label) {
            Some(li) => self.task.step_index(self.state.task_state, li),
            None => (self.state.task_state, RewardValue::ZERO),
        };
        self.state = EnvState { cell: next, task_state };
        StepOutcome { next_state: self.state, label, reward }
    }
}
