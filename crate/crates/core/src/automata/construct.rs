use std::collections::BTreeMap;

use super::{AutomatonError, FiniteRewardAutomaton, Label, RewardValue, Trace};

/// Automaton paying 1 each time the next label of `zeta` is seen, in order.
///
/// State `i` waits for `zeta.labels()[i]`; any other label self-loops with
/// reward 0. The last state absorbs with reward 0. Rewards recorded in `zeta`
/// are ignored; only its label sequence steers the machine.
pub fn build_query_fra(zeta: &Trace, inputs: &[Label]) -> FiniteRewardAutomaton {
    let labels = zeta.labels();
    let k = labels.len();
    FiniteRewardAutomaton::from_fn(
        k + 1,
        0,
        inputs.iter().copied().chain(labels.iter().copied()),
        [RewardValue::ZERO, RewardValue::ONE],
        |w, l| {
            if w < k && labels[w] == l {
                (w + 1, RewardValue::ONE)
            } else {
                (w, RewardValue::ZERO)
            }
        },
    )
    .expect("query automaton is well-formed")
}

/// Tree-shaped automaton reproducing every trace in `traces`.
///
/// One state per distinct label prefix; labels never observed after a prefix
/// self-loop with reward 0. Fails if two traces share a label prefix but
/// disagree on a reward along it.
pub fn build_prefix_tree_fra(
    traces: &[Trace],
    inputs: &[Label],
) -> Result<FiniteRewardAutomaton, AutomatonError> {
    // (node, label) -> (child, reward, index of the trace that created the edge)
    let mut edges: BTreeMap<(usize, Label), (usize, RewardValue, usize)> = BTreeMap::new();
    let mut num_nodes = 1;
    let mut alphabet: Vec<Label> = inputs.to_vec();
    for (ti, trace) in traces.iter().enumerate() {
        let mut node = 0;
        for sym in trace.symbols() {
            alphabet.push(sym.label);
            match edges.get(&(node, sym.label)) {
                Some(&(child, r, owner)) => {
                    if r != sym.reward {
                        return Err(AutomatonError::InconsistentTraces { first: owner, second: ti });
                    }
                    node = child;
                }
                None => {
                    let child = num_nodes;
                    num_nodes += 1;
                    edges.insert((node, sym.label), (child, sym.reward, ti));
                    node = child;
                }
            }
        }
    }
    FiniteRewardAutomaton::from_fn(num_nodes, 0, alphabet, [RewardValue::ZERO], |w, l| {
        match edges.get(&(w, l)) {
            Some(&(child, r, _)) => (child, r),
            None => (w, RewardValue::ZERO),
        }
    })
}

/// Upper bound on the size of a quantized reward set.
pub const MAX_QUANTIZATION_LEVELS: usize = 10_000_000;

/// The grid `{r_min + n·eps : 0 <= n <= n_max}` covering `[r_min, r_max]`.
pub fn quantize_rewards(r_min: f64, r_max: f64, eps: f64) -> Result<Vec<RewardValue>, AutomatonError> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(AutomatonError::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    if !r_min.is_finite() || !r_max.is_finite() || r_min > r_max {
        return Err(AutomatonError::InvalidArgument(format!("need r_min <= r_max, got [{r_min}, {r_max}]")));
    }
    // Relative slack so that e.g. (0, 1, 0.1) keeps the endpoint 1.0.
    let ratio = (r_max - r_min) / eps;
    let n_max = (ratio + ratio.abs() * 1e-12 + 1e-12).floor();
    if n_max >= MAX_QUANTIZATION_LEVELS as f64 {
        return Err(AutomatonError::InvalidArgument(format!("{n_max} quantization levels exceed the limit")));
    }
    Ok((0..=n_max as usize).map(|n| RewardValue::from_f64(r_min + n as f64 * eps)).collect())
}

/// Closest member of `levels` to `r`; ties go to the smaller value.
pub fn nearest_reward(levels: &[RewardValue], r: f64) -> Result<RewardValue, AutomatonError> {
    let mut sorted: Vec<RewardValue> = levels.to_vec();
    sorted.sort();
    let mut best: Option<(f64, RewardValue)> = None;
    for v in sorted {
        let d = (v.to_f64() - r).abs();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, v));
        }
    }
    best.map(|(_, v)| v)
        .ok_or_else(|| AutomatonError::InvalidArgument("empty reward set".into()))
}
