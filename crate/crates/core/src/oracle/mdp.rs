use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{FiniteRewardAutomaton, Label, RewardValue, Symbol, Trace, Word};
use crate::env::LabeledMdp;

use super::OracleError;

/// A finite MDP with rewards on transitions, stored as explicit successor lists.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitMdp {
    num_states: usize,
    num_actions: usize,
    initial: usize,
    /// `(next, probability, reward)` per `state * num_actions + action`.
    successors: Vec<Vec<(usize, f64, f64)>>,
}

impl ExplicitMdp {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        initial: usize,
        successors: Vec<Vec<(usize, f64, f64)>>,
    ) -> Result<Self, OracleError> {
        if num_states == 0 || num_actions == 0 {
            return Err(OracleError::Invalid("MDP needs at least one state and one action".into()));
        }
        if initial >= num_states {
            return Err(OracleError::Invalid(format!("initial state {initial} out of range")));
        }
        if successors.len() != num_states * num_actions {
            return Err(OracleError::Invalid(format!(
                "expected {} successor lists, got {}",
                num_states * num_actions,
                successors.len()
            )));
        }
        for (i, list) in successors.iter().enumerate() {
            let total: f64 = list.iter().map(|&(_, p, _)| p).sum();
            if (total - 1.0).abs() > 1e-9 || list.iter().any(|&(n, p, _)| n >= num_states || p < 0.0) {
                return Err(OracleError::Invalid(format!(
                    "bad distribution for state {} action {}",
                    i / num_actions,
                    i % num_actions
                )));
            }
        }
        Ok(ExplicitMdp { num_states, num_actions, initial, successors })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn successors(&self, s: usize, a: usize) -> &[(usize, f64, f64)] {
        &self.successors[s * self.num_actions + a]
    }

    fn backup(&self, values: &[f64], s: usize, a: usize, gamma: f64) -> f64 {
        self.successors(s, a).iter().map(|&(n, p, r)| p * (r + gamma * values[n])).sum()
    }

    fn best(&self, values: &[f64], s: usize, gamma: f64) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for a in 0..self.num_actions {
            let q = self.backup(values, s, a, gamma);
            if q > best.1 {
                best = (a, q);
            }
        }
        best
    }
}

fn automaton_step(fra: &FiniteRewardAutomaton, w: usize, label: Label) -> (usize, RewardValue) {
    match fra.label_index(label) {
        Some(li) => fra.step_index(w, li),
        None => (w, RewardValue::ZERO),
    }
}

/// Product of a labeled MDP with a reward automaton; state `x * |W| + w`.
///
/// Labels outside the automaton's alphabet self-loop with reward 0.
pub fn product_mdp<M: LabeledMdp + ?Sized>(env: &M, fra: &FiniteRewardAutomaton) -> ExplicitMdp {
    let nw = fra.num_states();
    let na = env.num_actions();
    let mut successors = Vec::with_capacity(env.num_states() * nw * na);
    for x in 0..env.num_states() {
        let moves: Vec<Vec<(usize, f64, Label)>> = (0..na)
            .map(|a| env.transitions(x, a).into_iter().map(|(n, p)| (n, p, env.label(x, a, n))).collect())
            .collect();
        for w in 0..nw {
            for m in &moves {
                successors.push(
                    m.iter()
                        .map(|&(n, p, l)| {
                            let (w2, r) = automaton_step(fra, w, l);
                            (n * nw + w2, p, r.to_f64())
                        })
                        .collect(),
                );
            }
        }
    }
    let initial = env.initial_state() * nw + fra.initial();
    ExplicitMdp::new(env.num_states() * nw, na, initial, successors).expect("product of well-formed models")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueIteration {
    pub values: Vec<f64>,
    /// Greedy action per state, smallest index on ties.
    pub policy: Vec<usize>,
    /// Sup-norm change of each sweep.
    pub residuals: Vec<f64>,
}

/// Synchronous value iteration until the sweep residual drops below `tol`.
pub fn value_iteration(mdp: &ExplicitMdp, gamma: f64, tol: f64, max_sweeps: usize) -> Result<ValueIteration, OracleError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(OracleError::Invalid(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let mut values = vec![0.0; mdp.num_states];
    let mut residuals = Vec::new();
    for _ in 0..max_sweeps {
        let next: Vec<f64> = (0..mdp.num_states).map(|s| mdp.best(&values, s, gamma).1).collect();
        let res = next.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        values = next;
        residuals.push(res);
        if res < tol {
            let policy = (0..mdp.num_states).map(|s| mdp.best(&values, s, gamma).0).collect();
            return Ok(ValueIteration { values, policy, residuals });
        }
    }
    Err(OracleError::NoConvergence(max_sweeps))
}

/// Discounted value of a fixed deterministic policy.
pub fn policy_evaluation(
    mdp: &ExplicitMdp,
    policy: &[usize],
    gamma: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>, OracleError> {
    if policy.len() != mdp.num_states || policy.iter().any(|&a| a >= mdp.num_actions) {
        return Err(OracleError::Invalid("policy does not match the MDP".into()));
    }
    let mut values = vec![0.0; mdp.num_states];
    for _ in 0..max_sweeps {
        let next: Vec<f64> = (0..mdp.num_states).map(|s| mdp.backup(&values, s, policy[s], gamma)).collect();
        let res = next.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        values = next;
        if res < tol {
            return Ok(values);
        }
    }
    Err(OracleError::NoConvergence(max_sweeps))
}

/// Largest expected undiscounted reward collectable in `horizon` steps from the initial state.
pub fn finite_horizon_optimum(mdp: &ExplicitMdp, horizon: usize) -> f64 {
    let mut values = vec![0.0; mdp.num_states];
    for _ in 0..horizon {
        values = (0..mdp.num_states).map(|s| mdp.best(&values, s, 1.0).1).collect();
    }
    values[mdp.initial]
}

/// Every trace of length at most `max_len` that the environment paired with
/// `fra` can produce with positive probability, including the empty trace.
///
/// Fails once more than `limit` distinct traces have been found.
pub fn enumerate_attainable_traces<M: LabeledMdp + ?Sized>(
    env: &M,
    fra: &FiniteRewardAutomaton,
    max_len: usize,
    limit: usize,
) -> Result<Vec<Trace>, OracleError> {
    let mut out = vec![Trace::default()];
    let mut frontier: BTreeMap<Word, BTreeSet<(usize, usize)>> = BTreeMap::new();
    frontier.insert(Vec::new(), BTreeSet::from([(env.initial_state(), fra.initial())]));
    for _ in 0..max_len {
        let mut next: BTreeMap<Word, BTreeSet<(usize, usize)>> = BTreeMap::new();
        for (word, configs) in &frontier {
            for &(x, w) in configs {
                for a in 0..env.num_actions() {
                    for (x2, _) in env.transitions(x, a) {
                        let l = env.label(x, a, x2);
                        let (w2, r) = automaton_step(fra, w, l);
                        let mut longer = word.clone();
                        longer.push(Symbol::new(l, r));
                        next.entry(longer).or_default().insert((x2, w2));
                    }
                }
            }
        }
        if out.len() + next.len() > limit {
            return Err(OracleError::TooManyTraces(limit));
        }
        out.extend(next.keys().map(|w| Trace::from_symbols(w.iter().copied())));
        frontier = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::make_corridor_world;

    fn chain() -> ExplicitMdp {
        // 0 -a0-> 1 (reward 1), 0 -a1-> 0 (reward 0); 1 absorbing with reward 0
        ExplicitMdp::new(2, 2, 0, vec![vec![(1, 1.0, 1.0)], vec![(0, 1.0, 0.0)], vec![(1, 1.0, 0.0)], vec![(1, 1.0, 0.0)]])
            .unwrap()
    }

    #[test]
    fn two_state_chain() {
        let vi = value_iteration(&chain(), 0.9, 1e-12, 10_000).unwrap();
        assert!((vi.values[0] - 1.0).abs() < 1e-9);
        assert_eq!(vi.policy[0], 0);
        assert_eq!(vi.policy[1], 0);
        let v = policy_evaluation(&chain(), &[1, 0], 0.9, 1e-12, 10_000).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(finite_horizon_optimum(&chain(), 5), 1.0);
        assert_eq!(finite_horizon_optimum(&chain(), 0), 0.0);
    }

    #[test]
    fn residuals_contract() {
        let m = ExplicitMdp::new(1, 1, 0, vec![vec![(0, 1.0, 1.0)]]).unwrap();
        let vi = value_iteration(&m, 0.9, 1e-10, 10_000).unwrap();
        assert!((vi.values[0] - 10.0).abs() < 1e-8);
        for w in vi.residuals.windows(2) {
            assert!(w[1] <= 0.9 * w[0] + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(ExplicitMdp::new(1, 1, 0, vec![vec![(0, 0.5, 0.0)]]).is_err());
        assert!(ExplicitMdp::new(1, 1, 1, vec![vec![(0, 1.0, 0.0)]]).is_err());
        assert!(value_iteration(&chain(), 1.0, 1e-9, 10).is_err());
    }

    #[test]
    fn corridor_product() {
        let env = make_corridor_world();
        let p = product_mdp(&env, env.task());
        assert_eq!(p.num_states(), 2 * env.task().num_states());
        // one step east collects the only reward
        assert_eq!(finite_horizon_optimum(&p, 1), 1.0);
        assert_eq!(finite_horizon_optimum(&p, 10), 1.0);
    }

    #[test]
    fn corridor_traces() {
        let env = make_corridor_world();
        let traces = enumerate_attainable_traces(&env, env.task(), 2, 1000).unwrap();
        // ε; ∅/0 and a/1; then four length-2 traces
        assert_eq!(traces.len(), 1 + 2 + 4);
        assert!(traces.iter().all(|t| env.task().run(t.labels()).unwrap() == t.rewards()));
        assert!(enumerate_attainable_traces(&env, env.task(), 4, 5).is_err());
    }
}
