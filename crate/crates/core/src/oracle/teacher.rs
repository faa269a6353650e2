use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::automata::{mealy_to_dfa, Dfa, FiniteRewardAutomaton, Label, RewardValue, Symbol, Word};
use crate::lstar::Teacher;

/// `None` stands for the rejecting sink entered on a label outside the alphabet.
fn step_or_sink(fra: &FiniteRewardAutomaton, w: Option<usize>, l: Label) -> Option<(usize, RewardValue)> {
    let w = w?;
    fra.label_index(l).map(|li| fra.step_index(w, li))
}

/// Shortest word accepted by exactly one of the two automata, if any.
///
/// Breadth-first search over the product, with labels drawn from the union of
/// both input alphabets in sorted order.
pub fn distinguishing_word(left: &FiniteRewardAutomaton, right: &FiniteRewardAutomaton) -> Option<Word> {
    let mut labels: Vec<Label> = left.input_alphabet().iter().chain(right.input_alphabet()).copied().collect();
    labels.sort();
    labels.dedup();
    let nl = left.num_states() + 1;
    let key = |a: Option<usize>, b: Option<usize>| a.unwrap_or(nl - 1) * (right.num_states() + 1) + b.unwrap_or(right.num_states());
    let mut parent: Vec<Option<(usize, Symbol)>> = vec![None; nl * (right.num_states() + 1)];
    let mut seen = vec![false; parent.len()];
    let start = (Some(left.initial()), Some(right.initial()));
    seen[key(start.0, start.1)] = true;
    let mut queue = VecDeque::from([start]);
    let rebuild = |parent: &[Option<(usize, Symbol)>], mut k: usize, last: Symbol| {
        let mut word = vec![last];
        while let Some((p, s)) = parent[k] {
            word.push(s);
            k = p;
        }
        word.reverse();
        word
    };
    while let Some((a, b)) = queue.pop_front() {
        let k = key(a, b);
        for &l in &labels {
            let sa = step_or_sink(left, a, l);
            let sb = step_or_sink(right, b, l);
            let witness = match (sa, sb) {
                (Some((_, ra)), Some((_, rb))) if ra != rb => Some(ra),
                (Some((_, ra)), None) => Some(ra),
                (None, Some((_, rb))) => Some(rb),
                _ => None,
            };
            if let Some(r) = witness {
                return Some(rebuild(&parent, k, Symbol::new(l, r)));
            }
            if let (Some((na, ra)), Some((nb, _))) = (sa, sb) {
                let nk = key(Some(na), Some(nb));
                if !seen[nk] {
                    seen[nk] = true;
                    parent[nk] = Some((k, Symbol::new(l, ra)));
                    queue.push_back((Some(na), Some(nb)));
                }
            }
        }
    }
    None
}

/// Answers queries exactly from a known automaton.
#[derive(Clone, Debug)]
pub struct ExactTeacher {
    target: FiniteRewardAutomaton,
    dfa: Dfa,
}

impl ExactTeacher {
    pub fn new(target: FiniteRewardAutomaton) -> Self {
        let dfa = mealy_to_dfa(&target);
        ExactTeacher { target, dfa }
    }

    pub fn target(&self) -> &FiniteRewardAutomaton {
        &self.target
    }
}

impl Teacher for ExactTeacher {
    fn membership(&mut self, word: &[Symbol]) -> bool {
        self.dfa.accepts(word).unwrap_or(false)
    }

    fn equivalence(&mut self, hypothesis: &FiniteRewardAutomaton) -> Option<Word> {
        distinguishing_word(&self.target, hypothesis)
    }
}

/// Partition refinement on reachable states; returns the number of blocks.
fn refine(num_states: usize, initial: usize, num_symbols: usize, next: impl Fn(usize, usize) -> usize, class0: impl Fn(usize) -> Vec<u64>) -> usize {
    let mut reachable = vec![false; num_states];
    reachable[initial] = true;
    let mut stack = vec![initial];
    while let Some(v) = stack.pop() {
        for s in 0..num_symbols {
            let n = next(v, s);
            if !reachable[n] {
                reachable[n] = true;
                stack.push(n);
            }
        }
    }
    let states: Vec<usize> = (0..num_states).filter(|&v| reachable[v]).collect();
    let mut block = vec![0usize; num_states];
    let assign = |sigs: Vec<(usize, Vec<u64>)>, block: &mut Vec<usize>| {
        let mut keys: Vec<Vec<u64>> = sigs.iter().map(|(_, k)| k.clone()).collect();
        keys.sort();
        keys.dedup();
        for (v, k) in sigs {
            block[v] = keys.binary_search(&k).unwrap();
        }
        keys.len()
    };
    let mut count = assign(states.iter().map(|&v| (v, class0(v))).collect(), &mut block);
    loop {
        let sigs: Vec<(usize, Vec<u64>)> = states
            .iter()
            .map(|&v| {
                let mut k = vec![block[v] as u64];
                k.extend((0..num_symbols).map(|s| block[next(v, s)] as u64));
                (v, k)
            })
            .collect();
        let new_count = assign(sigs, &mut block);
        if new_count == count {
            return count;
        }
        count = new_count;
    }
}

/// Number of states of the minimal DFA for the language of `dfa`.
pub fn minimal_dfa_size(dfa: &Dfa) -> usize {
    let alphabet = dfa.alphabet().to_vec();
    refine(
        dfa.num_states(),
        dfa.initial(),
        alphabet.len(),
        |v, s| dfa.next(v, alphabet[s]).expect("symbol in alphabet"),
        |v| vec![dfa.is_accepting(v) as u64],
    )
}

/// Number of states of the minimal automaton with the same reward behaviour.
pub fn minimal_fra_size(fra: &FiniteRewardAutomaton) -> usize {
    let n = fra.input_alphabet().len();
    refine(
        fra.num_states(),
        fra.initial(),
        n,
        |v, li| fra.step_index(v, li).0,
        |v| (0..n).map(|li| fra.reward_alphabet().binary_search(&fra.step_index(v, li).1).unwrap_or(0) as u64).collect(),
    )
}

/// Uniformly random total automaton with `num_states` states.
pub fn random_fra<R: Rng + ?Sized>(
    num_states: usize,
    inputs: &[Label],
    rewards: &[RewardValue],
    rng: &mut R,
) -> FiniteRewardAutomaton {
    FiniteRewardAutomaton::from_fn(num_states, 0, inputs.iter().copied(), rewards.iter().copied(), |_, _| {
        (rng.gen_range(0..num_states), *rewards.choose(rng).expect("nonempty reward set"))
    })
    .expect("random automaton parameters are valid")
}
