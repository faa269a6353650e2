use std::collections::{HashMap, HashSet};

use crate::automata::{Label, RewardValue, Symbol, Trace, Word};

use super::{ObservationTable, TableError};

/// True iff the two traces agree on a label prefix `1..=j` but differ in reward at `j`.
pub fn traces_inconsistent(zeta: &Trace, tau: &Trace) -> bool {
    let n = zeta.len().min(tau.len());
    for j in 0..n {
        if zeta.labels()[j] != tau.labels()[j] {
            return false;
        }
        if zeta.rewards()[j] != tau.rewards()[j] {
            return true;
        }
    }
    false
}

/// Answers a membership query from a list of observed traces, scanning in order.
///
/// `Some(true)` if `zeta` is a prefix of some trace, `Some(false)` if it is
/// inconsistent with one, `None` if the traces say nothing about it.
pub fn check_sample(zeta: &Trace, sample: &[Trace]) -> Option<bool> {
    for tau in sample {
        if zeta.is_prefix_of(tau) {
            return Some(true);
        }
        if traces_inconsistent(zeta, tau) {
            return Some(false);
        }
    }
    None
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    children: HashMap<Label, (RewardValue, usize)>,
}

/// The `sample` and `Nsample` caches.
///
/// `sample` holds ground-truth environment traces and is indexed by a prefix
/// tree over labels, so queries cost `O(|ζ|)` instead of a scan. Because
/// environment rewards are deterministic the tree answers exactly like
/// [`check_sample`] over the insertion-ordered list.
#[derive(Clone, Debug)]
pub struct SampleStore {
    traces: Vec<Trace>,
    seen: HashSet<Trace>,
    trie: Vec<TrieNode>,
    nsample: Vec<Word>,
}

impl Default for SampleStore {
    fn default() -> Self {
        SampleStore { traces: Vec::new(), seen: HashSet::new(), trie: vec![TrieNode::default()], nsample: Vec::new() }
    }
}

impl SampleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample(&self) -> &[Trace] {
        &self.traces
    }

    pub fn nsample(&self) -> &[Word] {
        &self.nsample
    }

    /// Adds an observed trace. Fails without modifying the store if it
    /// contradicts a trace already present.
    pub fn add_sample(&mut self, trace: Trace) -> Result<(), TableError> {
        if self.seen.contains(&trace) {
            return Ok(());
        }
        let mut node = 0;
        let mut walked = 0;
        for sym in trace.symbols() {
            match self.trie[node].children.get(&sym.label) {
                Some(&(r, child)) if r == sym.reward => {
                    node = child;
                    walked += 1;
                }
                Some(_) => {
                    return Err(TableError::InconsistentSample(format!("{trace:?}")));
                }
                None => break,
            }
        }
        for sym in trace.symbols().skip(walked) {
            let child = self.trie.len();
            self.trie.push(TrieNode::default());
            self.trie[node].children.insert(sym.label, (sym.reward, child));
            node = child;
        }
        self.seen.insert(trace.clone());
        self.traces.push(trace);
        Ok(())
    }

    /// Same answer as [`check_sample`] over [`Self::sample`].
    pub fn check(&self, zeta: &[Symbol]) -> Option<bool> {
        if self.traces.is_empty() {
            return None;
        }
        let mut node = 0;
        for sym in zeta {
            match self.trie[node].children.get(&sym.label) {
                Some(&(r, child)) if r == sym.reward => node = child,
                Some(_) => return Some(false),
                None => return None,
            }
        }
        Some(true)
    }

    pub fn add_nsample(&mut self, zeta: Word) {
        if !self.nsample.contains(&zeta) {
            self.nsample.push(zeta);
        }
    }

    pub fn in_nsample(&self, zeta: &[Symbol]) -> bool {
        self.nsample.iter().any(|w| w.as_slice() == zeta)
    }

    /// Flips to 1 every `Nsample` entry that is a prefix of `trace`.
    ///
    /// Flipped entries leave `Nsample`. Returns whether any cell changed.
    pub fn check_nsample(&mut self, trace: &Trace, table: &mut ObservationTable) -> bool {
        let mut changed = false;
        self.nsample.retain(|zeta| {
            let is_prefix = zeta.len() <= trace.len() && zeta.iter().enumerate().all(|(i, s)| trace.symbol(i) == *s);
            if is_prefix {
                table.set(zeta.clone(), true);
                changed = true;
            }
            !is_prefix
        });
        changed
    }
}
