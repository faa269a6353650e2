//! DOT export and a line-oriented text format for reward automata.
//!
//! The text format is
//!
//! ```text
//! fra 1
//! states 3
//! initial 0
//! inputs {} {a} {b}
//! rewards 0 1
//! 0 {} 0 0
//! 0 {a} 1 1
//! ...
//! ```
//!
//! with one `state label next reward` line per transition, in state-major,
//! label-minor order. Blank lines and `#` comments are ignored on input.

use std::fmt::Write as _;

use super::{AutomatonError, FiniteRewardAutomaton, Label, RewardValue};

pub fn fra_to_dot(fra: &FiniteRewardAutomaton) -> String {
    let mut out = String::from("digraph fra {\n  rankdir=LR;\n  __start [shape=point];\n");
    for w in 0..fra.num_states() {
        let _ = writeln!(out, "  w{w} [shape=circle,label=\"w{w}\"];");
    }
    let _ = writeln!(out, "  __start -> w{};", fra.initial());
    for (w, l, n, r) in fra.transitions() {
        let _ = writeln!(out, "  w{w} -> w{n} [label=\"{l}/{r}\"];");
    }
    out.push_str("}\n");
    out
}

pub fn fra_to_text(fra: &FiniteRewardAutomaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "fra 1");
    let _ = writeln!(out, "states {}", fra.num_states());
    let _ = writeln!(out, "initial {}", fra.initial());
    let inputs: Vec<String> = fra.input_alphabet().iter().map(|l| l.to_string()).collect();
    let _ = writeln!(out, "inputs {}", inputs.join(" "));
    let rewards: Vec<String> = fra.reward_alphabet().iter().map(|r| r.to_string()).collect();
    let _ = writeln!(out, "rewards {}", rewards.join(" "));
    for (w, l, n, r) in fra.transitions() {
        let _ = writeln!(out, "{w} {l} {n} {r}");
    }
    out
}

pub fn fra_from_text(text: &str) -> Result<FiniteRewardAutomaton, AutomatonError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, s)| (i + 1, s.trim()))
        .filter(|(_, s)| !s.is_empty() && !s.starts_with('#'));

    let mut header = |key: &str| -> Result<(usize, String), AutomatonError> {
        let (n, line) = lines.next().ok_or_else(|| AutomatonError::ParseAt {
            line: 0,
            message: format!("missing `{key}` line"),
        })?;
        let rest = line.strip_prefix(key).filter(|r| r.is_empty() || r.starts_with(' ')).ok_or_else(|| {
            AutomatonError::ParseAt { line: n, message: format!("expected `{key}`, found `{line}`") }
        })?;
        Ok((n, rest.trim().to_string()))
    };

    let (n, version) = header("fra")?;
    if version != "1" {
        return Err(AutomatonError::ParseAt { line: n, message: format!("unsupported version `{version}`") });
    }
    let (n, states) = header("states")?;
    let num_states: usize = states.parse().map_err(|_| at(n, format!("bad state count `{states}`")))?;
    let (n, init) = header("initial")?;
    let initial: usize = init.parse().map_err(|_| at(n, format!("bad initial state `{init}`")))?;
    let (n, inputs_line) = header("inputs")?;
    let inputs = split_labels(&inputs_line).map_err(|e| at(n, e.to_string()))?;
    let (n, rewards_line) = header("rewards")?;
    let rewards = rewards_line
        .split_whitespace()
        .map(|t| t.parse::<RewardValue>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| at(n, e.to_string()))?;

    let mut table: Vec<Option<(usize, RewardValue)>> = vec![None; num_states * inputs.len()];
    let mut sorted_inputs = inputs.clone();
    sorted_inputs.sort();
    sorted_inputs.dedup();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(at(n, format!("expected `state label next reward`, found `{line}`")));
        }
        let w: usize = fields[0].parse().map_err(|_| at(n, format!("bad state `{}`", fields[0])))?;
        let l: Label = fields[1].parse().map_err(|e: AutomatonError| at(n, e.to_string()))?;
        let next: usize = fields[2].parse().map_err(|_| at(n, format!("bad state `{}`", fields[2])))?;
        let r: RewardValue = fields[3].parse().map_err(|e: AutomatonError| at(n, e.to_string()))?;
        if w >= num_states || next >= num_states {
            return Err(at(n, format!("state out of range 0..{num_states}")));
        }
        if !rewards.contains(&r) {
            return Err(at(n, format!("reward {r} not in the declared reward alphabet")));
        }
        let li = sorted_inputs.binary_search(&l).map_err(|_| at(n, format!("label {l} not declared")))?;
        let slot = &mut table[w * sorted_inputs.len() + li];
        if slot.is_some() {
            return Err(at(n, format!("duplicate transition for ({w}, {l})")));
        }
        *slot = Some((next, r));
    }
    if let Some(k) = table.iter().position(Option::is_none) {
        let (w, li) = (k / sorted_inputs.len(), k % sorted_inputs.len());
        return Err(AutomatonError::Malformed(format!(
            "missing transition for ({w}, {})",
            sorted_inputs[li]
        )));
    }
    let fra = FiniteRewardAutomaton::from_fn(num_states, initial, sorted_inputs.clone(), rewards, |w, l| {
        let li = sorted_inputs.binary_search(&l).expect("declared label");
        table[w * sorted_inputs.len() + li].expect("checked above")
    })?;
    Ok(fra)
}

fn split_labels(s: &str) -> Result<Vec<Label>, AutomatonError> {
    // labels may contain ", " so split on the closing brace
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let end = rest.find('}').ok_or_else(|| AutomatonError::Parse(format!("unterminated label in `{s}`")))?;
        out.push(rest[..=end].parse()?);
        rest = rest[end + 1..].trim_start();
    }
    Ok(out)
}

fn at(line: usize, message: String) -> AutomatonError {
    AutomatonError::ParseAt { line, message }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{build_query_fra, Trace};

    fn l(c: char) -> Label {
        Label::single(c).unwrap()
    }

    #[test]
    fn dot_for_single_state() {
        let a = FiniteRewardAutomaton::constant_zero([Label::EMPTY, l('a'), l('b')]);
        let dot = fra_to_dot(&a);
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("[shape=circle").count(), 1);
        assert_eq!(dot.matches("w0 -> w0").count(), 3);
        assert!(dot.contains("label=\"{a}/0\""));
    }

    #[test]
    fn dot_counts_for_query_automaton() {
        let zeta = Trace::new(vec![l('a'), l('b')], vec![RewardValue::ONE, RewardValue::ONE]).unwrap();
        let q = build_query_fra(&zeta, &[l('a'), l('b')]);
        let dot = fra_to_dot(&q);
        assert_eq!(dot.matches("[shape=circle").count(), 3);
        assert_eq!(dot.matches(" -> w").count() - 1, 3 * 2);
    }

    #[test]
    fn text_round_trip_is_byte_identical() {
        let zeta = Trace::new(vec![l('a'), Label::from_props(['a', 'b']).unwrap()], vec![RewardValue::ONE; 2]).unwrap();
        let q = build_query_fra(&zeta, &[Label::EMPTY]);
        let text = fra_to_text(&q);
        let parsed = fra_from_text(&text).unwrap();
        assert_eq!(parsed, q);
        assert_eq!(fra_to_text(&parsed), text);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "fra 1\nstates 1\ninitial 0\ninputs {a}\nrewards 0\n0 {a} 3 0\n";
        match fra_from_text(text) {
            Err(AutomatonError::ParseAt { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        match fra_from_text("fra 1\nstates x\n") {
            Err(AutomatonError::ParseAt { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            fra_from_text("fra 1\nstates 1\ninitial 0\ninputs {a} {b}\nrewards 0\n0 {a} 0 0\n"),
            Err(AutomatonError::Malformed(_))
        ));
    }
}
