//! Labeled grid-world MDPs whose rewards come from hidden task automata.

mod grid;

pub use grid::{load_grid_config, Action, Cell, GridSpec, GridWorld, Landmark};

use rand::Rng;
use thiserror::Error;

use crate::automata::{FiniteRewardAutomaton, Label, RewardValue};

pub const OFFICE_DEFAULT: &str = include_str!("../../assets/office_default.json");
pub const CRAFT_DEFAULT: &str = include_str!("../../assets/craft_default.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("invalid grid config: {0}")]
    Config(String),
    #[error("unknown task {task} for the {world} world")]
    UnknownTask { world: &'static str, task: u32 },
}

/// Agent cell plus the hidden task-automaton state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EnvState {
    pub cell: usize,
    pub task_state: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub next_state: EnvState,
    pub label: Label,
    pub reward: RewardValue,
}

/// The analytic model of a labeled MDP over observable states `0..num_states`.
pub trait LabeledMdp {
    fn num_states(&self) -> usize;
    fn num_actions(&self) -> usize;
    fn initial_state(&self) -> usize;
    /// Successors of `(x, a)` with positive probability, summing to 1.
    fn transitions(&self, x: usize, a: usize) -> Vec<(usize, f64)>;
    fn label(&self, x: usize, a: usize, next: usize) -> Label;
    /// Every label the labeling function can emit, sorted.
    fn label_alphabet(&self) -> Vec<Label>;
}

/// A sampled labeled MDP with a hidden reward function.
pub trait Environment: LabeledMdp {
    /// Returns the observable initial state.
    fn reset(&mut self) -> usize;
    fn step<R: Rng + ?Sized>(&mut self, action: usize, rng: &mut R) -> StepOutcome;
}

/// Task automaton that pays 1 after seeing `props` in order.
///
/// Labels other than the next expected one are ignored. Without `repeat` the
/// machine absorbs after the last proposition; with it, it restarts.
pub fn sequence_task(props: &[char], inputs: &[Label], repeat: bool) -> Result<FiniteRewardAutomaton, EnvError> {
    let targets: Vec<Label> = props
        .iter()
        .map(|&p| Label::single(p).map_err(|e| EnvError::Config(e.to_string())))
        .collect::<Result<_, _>>()?;
    let k = targets.len();
    let num_states = if repeat { k.max(1) } else { k + 1 };
    FiniteRewardAutomaton::from_fn(
        num_states,
        0,
        inputs.iter().copied().chain(targets.iter().copied()),
        [RewardValue::ZERO, RewardValue::ONE],
        |w, l| {
            if w < k && targets[w] == l {
                if w + 1 == k {
                    (if repeat { 0 } else { k }, RewardValue::ONE)
                } else {
                    (w + 1, RewardValue::ZERO)
                }
            } else {
                (w, RewardValue::ZERO)
            }
        },
    )
    .map_err(|e| EnvError::Config(e.to_string()))
}

fn spec_labels(spec: &GridSpec) -> Vec<Label> {
    let mut labels: Vec<Label> = spec.landmarks.iter().filter_map(|lm| Label::single(lm.prop).ok()).collect();
    labels.push(Label::EMPTY);
    labels.sort();
    labels.dedup();
    labels
}

/// Office world, 9×12 rooms with landmarks `a`, `b`, `c`.
///
/// Task 1 visits a, b, a, c; task 2 repeats b, c, a and pays once per cycle;
/// task 3 visits c, b, a, b, c, a.
pub fn make_office_world(task: u32, spec_override: Option<GridSpec>) -> Result<GridWorld, EnvError> {
    let spec = match spec_override {
        Some(s) => s,
        None => GridSpec::from_json(OFFICE_DEFAULT)?,
    };
    let inputs = spec_labels(&spec);
    let fra = match task {
        1 => sequence_task(&['a', 'b', 'a', 'c'], &inputs, false)?,
        2 => sequence_task(&['b', 'c', 'a'], &inputs, true)?,
        3 => sequence_task(&['c', 'b', 'a', 'b', 'c', 'a'], &inputs, false)?,
        _ => return Err(EnvError::UnknownTask { world: "office", task }),
    };
    GridWorld::new(spec, fra)
}

/// Minecraft-style 21×21 world with wood `a`, string `b`, workbench `c`,
/// stone `e` and iron `f`.
///
/// Task 1 (hammer) collects b, e, f, e then reaches c; task 2 (spear)
/// collects b, e, a, b then reaches c.
pub fn make_minecraft_world(task: u32, spec_override: Option<GridSpec>) -> Result<GridWorld, EnvError> {
    let spec = match spec_override {
        Some(s) => s,
        None => GridSpec::from_json(CRAFT_DEFAULT)?,
    };
    let inputs = spec_labels(&spec);
    let fra = match task {
        1 => sequence_task(&['b', 'e', 'f', 'e', 'c'], &inputs, false)?,
        2 => sequence_task(&['b', 'e', 'a', 'b', 'c'], &inputs, false)?,
        _ => return Err(EnvError::UnknownTask { world: "craft", task }),
    };
    GridWorld::new(spec, fra)
}

/// Deterministic 1×2 corridor: start on the left, landmark `a` on the right,
/// reward 1 the first time `a` is seen.
pub fn make_corridor_world() -> GridWorld {
    let spec = GridSpec {
        width: 2,
        height: 1,
        initial: [0, 0],
        slip: 0.0,
        landmarks: vec![Landmark { cell: [0, 1], prop: 'a' }],
        walls: vec![],
    };
    let inputs = spec_labels(&spec);
    let fra = sequence_task(&['a'], &inputs, false).expect("corridor task");
    GridWorld::new(spec, fra).expect("corridor spec is valid")
}
