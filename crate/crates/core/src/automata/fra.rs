use super::{AutomatonError, Label, RewardValue};

/// A Mealy machine whose outputs are rewards.
///
/// Transitions are stored densely, indexed by `state * |inputs| + label_index`,
/// and both alphabets are kept sorted so every iteration order is stable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteRewardAutomaton {
    num_states: usize,
    initial: usize,
    inputs: Vec<Label>,
    rewards: Vec<RewardValue>,
    next: Vec<usize>,
    output: Vec<RewardValue>,
}

impl FiniteRewardAutomaton {
    /// Builds an automaton from a total transition function.
    ///
    /// `transition(state, label)` returns `(next_state, reward)`. The reward
    /// alphabet is the union of `rewards` and every reward the function emits.
    pub fn from_fn<F>(
        num_states: usize,
        initial: usize,
        inputs: impl IntoIterator<Item = Label>,
        rewards: impl IntoIterator<Item = RewardValue>,
        mut transition: F,
    ) -> Result<Self, AutomatonError>
    where
        F: FnMut(usize, Label) -> (usize, RewardValue),
    {
        if num_states == 0 {
            return Err(AutomatonError::NoStates);
        }
        if initial >= num_states {
            return Err(AutomatonError::StateOutOfRange { state: initial, num_states });
        }
        let mut inputs: Vec<Label> = inputs.into_iter().collect();
        inputs.sort();
        inputs.dedup();
        let mut reward_set: Vec<RewardValue> = rewards.into_iter().collect();
        let mut next = Vec::with_capacity(num_states * inputs.len());
        let mut output = Vec::with_capacity(num_states * inputs.len());
        for w in 0..num_states {
            for &l in &inputs {
                let (n, r) = transition(w, l);
                if n >= num_states {
                    return Err(AutomatonError::StateOutOfRange { state: n, num_states });
                }
                next.push(n);
                output.push(r);
                reward_set.push(r);
            }
        }
        reward_set.sort();
        reward_set.dedup();
        Ok(FiniteRewardAutomaton { num_states, initial, inputs, rewards: reward_set, next, output })
    }

    /// The 1-state automaton emitting zero on every label.
    pub fn constant_zero(inputs: impl IntoIterator<Item = Label>) -> Self {
        Self::from_fn(1, 0, inputs, [RewardValue::ZERO], |_, _| (0, RewardValue::ZERO))
            .expect("one state is always well-formed")
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn input_alphabet(&self) -> &[Label] {
        &self.inputs
    }

    pub fn reward_alphabet(&self) -> &[RewardValue] {
        &self.rewards
    }

    pub fn label_index(&self, label: Label) -> Option<usize> {
        self.inputs.binary_search(&label).ok()
    }

    /// Transition by label index; panics on out-of-range indices.
    #[inline]
    pub fn step_index(&self, state: usize, label_index: usize) -> (usize, RewardValue) {
        let k = state * self.inputs.len() + label_index;
        (self.next[k], self.output[k])
    }

    pub fn step(&self, state: usize, label: Label) -> Result<(usize, RewardValue), AutomatonError> {
        if state >= self.num_states {
            return Err(AutomatonError::StateOutOfRange { state, num_states: self.num_states });
        }
        let li = self.label_index(label).ok_or(AutomatonError::UnknownLabel(label))?;
        Ok(self.step_index(state, li))
    }

    /// Output sequence on `labels`, starting from the initial state.
    pub fn run(&self, labels: &[Label]) -> Result<Vec<RewardValue>, AutomatonError> {
        let mut w = self.initial;
        let mut out = Vec::with_capacity(labels.len());
        for &l in labels {
            let (n, r) = self.step(w, l)?;
            out.push(r);
            w = n;
        }
        Ok(out)
    }

    /// State reached after reading `labels`.
    pub fn state_after(&self, labels: &[Label]) -> Result<usize, AutomatonError> {
        let mut w = self.initial;
        for &l in labels {
            w = self.step(w, l)?.0;
        }
        Ok(w)
    }

    /// All quadruples `(state, label, next, reward)` in state-major, label-minor order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, Label, usize, RewardValue)> + '_ {
        (0..self.num_states).flat_map(move |w| {
            self.inputs.iter().enumerate().map(move |(i, &l)| {
                let (n, r) = self.step_index(w, i);
                (w, l, n, r)
            })
        })
    }

    /// Same machine over a larger input alphabet; new labels self-loop with reward zero.
    pub fn with_inputs(&self, extra: impl IntoIterator<Item = Label>) -> Self {
        let mut inputs = self.inputs.clone();
        inputs.extend(extra);
        Self::from_fn(self.num_states, self.initial, inputs, self.rewards.iter().copied(), |w, l| {
            match self.label_index(l) {
                Some(i) => self.step_index(w, i),
                None => (w, RewardValue::ZERO),
            }
        })
        .expect("extension of a well-formed automaton")
    }
}
