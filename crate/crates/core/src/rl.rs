//! Tabular Q-learning on the product of environment and reward automaton.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::automata::{FiniteRewardAutomaton, Label, RewardValue, Trace};
use crate::env::Environment;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RlError {
    #[error("action set is empty")]
    NoActions,
    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub eplength: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { alpha: 0.1, gamma: 0.9, epsilon: 0.1, eplength: 200 }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), RlError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(RlError::Hyperparameter(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(RlError::Hyperparameter(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(RlError::Hyperparameter(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        if self.eplength == 0 {
            return Err(RlError::Hyperparameter("eplength must be positive".into()));
        }
        Ok(())
    }
}

/// Episode length above which every attainable trace is seen almost surely:
/// `2^(env_states + 1) · (automaton_states + 1) − 1`. `None` on overflow.
pub fn sufficient_episode_length(env_states: usize, automaton_states: usize) -> Option<u128> {
    let exp = u32::try_from(env_states.checked_add(1)?).ok()?;
    let pow = 2u128.checked_pow(exp)?;
    pow.checked_mul(automaton_states as u128 + 1)?.checked_sub(1)
}

/// Dense q-values over `(env state, automaton state, action)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    num_env: usize,
    num_automaton: usize,
    num_actions: usize,
    default_value: f64,
    values: Vec<f64>,
    updates: u64,
}

impl QTable {
    pub fn new(num_env: usize, num_automaton: usize, num_actions: usize, default_value: f64) -> Self {
        QTable {
            num_env,
            num_automaton,
            num_actions,
            default_value,
            values: vec![default_value; num_env * num_automaton * num_actions],
            updates: 0,
        }
    }

    pub fn num_env_states(&self) -> usize {
        self.num_env
    }

    pub fn num_automaton_states(&self) -> usize {
        self.num_automaton
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn default_value(&self) -> f64 {
        self.default_value
    }

    /// Total number of [`q_update`] calls applied to this table.
    pub fn update_count(&self) -> u64 {
        self.updates
    }

    #[inline]
    fn index(&self, x: usize, w: usize, a: usize) -> usize {
        debug_assert!(x < self.num_env && w < self.num_automaton && a < self.num_actions);
        (x * self.num_automaton + w) * self.num_actions + a
    }

    #[inline]
    pub fn get(&self, x: usize, w: usize, a: usize) -> f64 {
        self.values[self.index(x, w, a)]
    }

    pub fn set(&mut self, x: usize, w: usize, a: usize, v: f64) {
        let i = self.index(x, w, a);
        self.values[i] = v;
    }

    pub fn action_values(&self, x: usize, w: usize) -> &[f64] {
        let i = self.index(x, w, 0);
        &self.values[i..i + self.num_actions]
    }

    pub fn max_value(&self, x: usize, w: usize) -> f64 {
        self.action_values(x, w).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest-index argmax.
    pub fn greedy_action(&self, x: usize, w: usize) -> usize {
        let vals = self.action_values(x, w);
        let mut best = 0;
        for (a, &v) in vals.iter().enumerate() {
            if v > vals[best] {
                best = a;
            }
        }
        best
    }

    /// `x\tw\ta\tvalue` rows for every cell that differs from the default.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("x\tw\ta\tvalue\n");
        for x in 0..self.num_env {
            for w in 0..self.num_automaton {
                for a in 0..self.num_actions {
                    let v = self.get(x, w, a);
                    if v != self.default_value {
                        let _ = writeln!(out, "{x}\t{w}\t{a}\t{v}");
                    }
                }
            }
        }
        out
    }
}

/// With probability `eps` a uniform action, otherwise an argmax with random tie-breaking.
pub fn epsilon_greedy_action<R: Rng + ?Sized>(
    q: &QTable,
    x: usize,
    w: usize,
    eps: f64,
    rng: &mut R,
) -> Result<usize, RlError> {
    let n = q.num_actions();
    if n == 0 {
        return Err(RlError::NoActions);
    }
    if rng.gen::<f64>() < eps {
        return Ok(rng.gen_range(0..n));
    }
    let vals = q.action_values(x, w);
    let best = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = vals.iter().filter(|&&v| v == best).count();
    let mut pick = if ties > 1 { rng.gen_range(0..ties) } else { 0 };
    for (a, &v) in vals.iter().enumerate() {
        if v == best {
            if pick == 0 {
                return Ok(a);
            }
            pick -= 1;
        }
    }
    unreachable!("at least one action attains the maximum")
}

/// `q(x,w,a) ← (1−α)·q(x,w,a) + α·(r + γ·max_a' q(x',w',a'))`.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn q_update(q: &mut QTable, x: usize, w: usize, a: usize, r: f64, x2: usize, w2: usize, alpha: f64, gamma: f64) {
    let target = r + gamma * q.max_value(x2, w2);
    let i = q.index(x, w, a);
    q.values[i] = (1.0 - alpha) * q.values[i] + alpha * target;
    q.updates += 1;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryKind {
    Membership,
    Equivalence,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepResult {
    pub action: usize,
    pub next_x: usize,
    pub next_w: usize,
    pub label: Label,
    /// Reward the environment emitted, whatever the query kind.
    pub env_reward: RewardValue,
    /// Reward used for the update of the current automaton state.
    pub learning_reward: RewardValue,
}

#[inline]
fn automaton_step(fra: &FiniteRewardAutomaton, w: usize, label: Label) -> (usize, RewardValue) {
    match fra.label_index(label) {
        Some(li) => fra.step_index(w, li),
        None => (w, RewardValue::ZERO),
    }
}

/// One environment step with the current-state update and the counterfactual
/// updates for every other automaton state.
///
/// Membership steps learn from the automaton's reward; equivalence steps
/// learn from the observed reward for the current state. Counterfactual
/// rewards always come from the automaton.
#[allow(clippy::too_many_arguments)]
pub fn step<E: Environment, R: Rng + ?Sized>(
    kind: QueryKind,
    fra: &FiniteRewardAutomaton,
    q: &mut QTable,
    x: usize,
    w: usize,
    env: &mut E,
    hp: &Hyperparams,
    rng: &mut R,
) -> StepResult {
    let a = epsilon_greedy_action(q, x, w, hp.epsilon, rng).expect("environments expose at least one action");
    let outcome = env.step(a, rng);
    let x2 = outcome.next_state.cell;
    let label = outcome.label;
    let (w2, fra_reward) = automaton_step(fra, w, label);
    let r = match kind {
        QueryKind::Membership => fra_reward,
        QueryKind::Equivalence => outcome.reward,
    };
    q_update(q, x, w, a, r.to_f64(), x2, w2, hp.alpha, hp.gamma);
    for w_hat in (0..fra.num_states()).filter(|&v| v != w) {
        let (w_hat2, r_hat) = automaton_step(fra, w_hat, label);
        q_update(q, x, w_hat, a, r_hat.to_f64(), x2, w_hat2, hp.alpha, hp.gamma);
    }
    StepResult { action: a, next_x: x2, next_w: w2, label, env_reward: outcome.reward, learning_reward: r }
}

/// Runs exactly `hp.eplength` steps from a fresh environment and returns the
/// observed trace; rewards in the trace are always the environment's.
pub fn run_episode<E: Environment, R: Rng + ?Sized>(
    kind: QueryKind,
    fra: &FiniteRewardAutomaton,
    q: &mut QTable,
    env: &mut E,
    hp: &Hyperparams,
    rng: &mut R,
) -> Trace {
    let mut x = env.reset();
    let mut w = fra.initial();
    let mut trace = Trace::default();
    for _ in 0..hp.eplength {
        let s = step(kind, fra, q, x, w, env, hp, rng);
        trace.push(s.label, s.env_reward);
        x = s.next_x;
        w = s.next_w;
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::build_query_fra;
    use crate::env::{make_corridor_world, make_office_world, Action, LabeledMdp};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn uniform_when_fully_exploring() {
        let q = QTable::new(1, 1, 4, 0.0);
        let mut q2 = q.clone();
        q2.set(0, 0, 2, 5.0);
        let mut r = rng(1);
        let n = 10_000;
        let mut counts = [0f64; 4];
        for _ in 0..n {
            counts[epsilon_greedy_action(&q2, 0, 0, 1.0, &mut r).unwrap()] += 1.0;
        }
        // chi-square with 3 dof, 0.1% critical value 16.27
        let expected = n as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn greedy_picks_strict_maximum() {
        let mut q = QTable::new(1, 1, 4, 0.0);
        q.set(0, 0, 1, 1.0);
        let mut r = rng(2);
        for _ in 0..1000 {
            assert_eq!(epsilon_greedy_action(&q, 0, 0, 0.0, &mut r).unwrap(), 1);
        }
    }

    #[test]
    fn greedy_ties_are_uniform() {
        let q = QTable::new(1, 1, 4, 0.0);
        let mut r = rng(3);
        let n = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[epsilon_greedy_action(&q, 0, 0, 0.0, &mut r).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn empty_action_set() {
        let q = QTable::new(1, 1, 0, 0.0);
        assert_eq!(epsilon_greedy_action(&q, 0, 0, 0.5, &mut rng(0)), Err(RlError::NoActions));
    }

    #[test]
    fn single_update_arithmetic() {
        let mut q = QTable::new(2, 1, 2, 0.0);
        q_update(&mut q, 0, 0, 1, 1.0, 1, 0, 0.5, 0.9);
        assert_eq!(q.get(0, 0, 1), 0.5);
        assert_eq!(q.get(0, 0, 0), 0.0);
        assert_eq!(q.to_tsv(), "x\tw\ta\tvalue\n0\t0\t1\t0.5\n");

        let before = q.clone();
        q_update(&mut q, 0, 0, 1, 1.0, 1, 0, 0.0, 0.9);
        assert_eq!(q.get(0, 0, 1), before.get(0, 0, 1));
    }

    #[test]
    fn self_loop_converges_to_geometric_sum() {
        let mut q = QTable::new(1, 1, 1, 0.0);
        for _ in 0..1000 {
            q_update(&mut q, 0, 0, 0, 1.0, 0, 0, 0.5, 0.9);
        }
        assert!((q.get(0, 0, 0) - 10.0).abs() < 1e-3);
    }

    #[test]
    fn membership_step_advances_query_automaton() {
        let mut env = make_corridor_world();
        let a = crate::automata::Label::single('a').unwrap();
        let zeta = Trace::new(vec![a], vec![RewardValue::ZERO]).unwrap();
        let fra = build_query_fra(&zeta, &env.label_alphabet());
        let mut q = QTable::new(2, fra.num_states(), 4, 0.0);
        // steer east deterministically
        for w in 0..fra.num_states() {
            q.set(0, w, Action::East.index(), 1.0);
        }
        let hp = Hyperparams { epsilon: 0.0, eplength: 1, ..Hyperparams::default() };
        let x = env.reset();
        let s = step(QueryKind::Membership, &fra, &mut q, x, 0, &mut env, &hp, &mut rng(4));
        assert_eq!(s.learning_reward, RewardValue::ONE);
        assert_ne!(s.next_w, 0);
        // |W| = 2 -> two updates
        assert_eq!(q.update_count(), 2);
    }

    #[test]
    fn update_count_matches_automaton_size() {
        let mut env = make_corridor_world();
        let hp = Hyperparams { eplength: 1, ..Hyperparams::default() };
        let one = FiniteRewardAutomaton::constant_zero(env.label_alphabet());
        let mut q = QTable::new(2, 1, 4, 0.0);
        let x = env.reset();
        step(QueryKind::Equivalence, &one, &mut q, x, 0, &mut env, &hp, &mut rng(5));
        assert_eq!(q.update_count(), 1);

        let a = crate::automata::Label::single('a').unwrap();
        let zeta = Trace::new(vec![a, a], vec![RewardValue::ZERO; 2]).unwrap();
        let three = build_query_fra(&zeta, &env.label_alphabet());
        let mut q = QTable::new(2, 3, 4, 0.0);
        let x = env.reset();
        step(QueryKind::Equivalence, &three, &mut q, x, 1, &mut env, &hp, &mut rng(5));
        assert_eq!(q.update_count(), 3);
    }

    #[test]
    fn episode_length_and_env_rewards() {
        let mut env = make_office_world(1, None).unwrap();
        let fra = FiniteRewardAutomaton::constant_zero(env.label_alphabet());
        let mut q = QTable::new(env.num_states(), 1, 4, 0.0);
        let hp = Hyperparams { eplength: 5, ..Hyperparams::default() };
        let t = run_episode(QueryKind::Equivalence, &fra, &mut q, &mut env, &hp, &mut rng(6));
        assert_eq!(t.len(), 5);

        let hp = Hyperparams { eplength: 200, epsilon: 1.0, ..Hyperparams::default() };
        let mut r = rng(7);
        for _ in 0..50 {
            let t = run_episode(QueryKind::Equivalence, &fra, &mut q, &mut env, &hp, &mut r);
            assert_eq!(env.task().run(t.labels()).unwrap(), t.rewards());
        }
    }

    #[test]
    fn pretrained_corridor_reaches_landmark_first_step() {
        let mut env = make_corridor_world();
        let fra = FiniteRewardAutomaton::constant_zero(env.label_alphabet());
        let mut q = QTable::new(2, 1, 4, 0.0);
        q.set(0, 0, Action::East.index(), 10.0);
        q.set(1, 0, Action::West.index(), 10.0);
        let hp = Hyperparams { epsilon: 0.0, eplength: 3, alpha: 0.1, gamma: 0.9 };
        let t = run_episode(QueryKind::Equivalence, &fra, &mut q, &mut env, &hp, &mut rng(8));
        assert_eq!(t.labels()[0], crate::automata::Label::single('a').unwrap());
        assert_eq!(t.rewards()[0], RewardValue::ONE);
    }

    #[test]
    fn membership_trace_records_environment_rewards() {
        let mut env = make_corridor_world();
        let a = crate::automata::Label::single('a').unwrap();
        let zeta = Trace::new(vec![a, a], vec![RewardValue::ZERO; 2]).unwrap();
        let fra = build_query_fra(&zeta, &env.label_alphabet());
        let mut q = QTable::new(2, fra.num_states(), 4, 0.0);
        let hp = Hyperparams { eplength: 30, epsilon: 1.0, ..Hyperparams::default() };
        let t = run_episode(QueryKind::Membership, &fra, &mut q, &mut env, &hp, &mut rng(9));
        assert_eq!(env.task().run(t.labels()).unwrap(), t.rewards());
    }

    #[test]
    fn sufficient_length_formula() {
        assert_eq!(sufficient_episode_length(2, 2), Some(23));
        assert_eq!(sufficient_episode_length(1, 1), Some(7));
        assert_eq!(sufficient_episode_length(200, 2), None);
    }

    #[test]
    fn hyperparameter_ranges() {
        assert!(Hyperparams::default().validate().is_ok());
        assert!(Hyperparams { alpha: 0.0, ..Hyperparams::default() }.validate().is_err());
        assert!(Hyperparams { gamma: 1.0, ..Hyperparams::default() }.validate().is_err());
        assert!(Hyperparams { epsilon: 1.5, ..Hyperparams::default() }.validate().is_err());
        assert!(Hyperparams { eplength: 0, ..Hyperparams::default() }.validate().is_err());
    }
}
