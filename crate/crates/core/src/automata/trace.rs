use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AutomatonError, Label, RewardValue};

/// One letter of the combined input/output alphabet.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub label: Label,
    pub reward: RewardValue,
}

impl Symbol {
    pub fn new(label: Label, reward: RewardValue) -> Self {
        Symbol { label, reward }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.label, self.reward)
    }
}

/// A word over the combined alphabet.
pub type Word = Vec<Symbol>;

pub fn word_to_string(word: &[Symbol]) -> String {
    if word.is_empty() {
        return "ε".to_string();
    }
    word.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join("")
}

/// A label sequence paired with the reward sequence observed along it.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Trace {
    labels: Vec<Label>,
    rewards: Vec<RewardValue>,
}

impl Trace {
    pub fn new(labels: Vec<Label>, rewards: Vec<RewardValue>) -> Result<Self, AutomatonError> {
        if labels.len() != rewards.len() {
            return Err(AutomatonError::TraceLength { labels: labels.len(), rewards: rewards.len() });
        }
        Ok(Trace { labels, rewards })
    }

    pub fn from_symbols<I: IntoIterator<Item = Symbol>>(symbols: I) -> Self {
        let (labels, rewards) = symbols.into_iter().map(|s| (s.label, s.reward)).unzip();
        Trace { labels, rewards }
    }

    pub fn push(&mut self, label: Label, reward: RewardValue) {
        self.labels.push(label);
        self.rewards.push(reward);
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn rewards(&self) -> &[RewardValue] {
        &self.rewards
    }

    pub fn symbol(&self, i: usize) -> Symbol {
        Symbol::new(self.labels[i], self.rewards[i])
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.labels.iter().zip(&self.rewards).map(|(&l, &r)| Symbol::new(l, r))
    }

    pub fn to_word(&self) -> Word {
        self.symbols().collect()
    }

    pub fn prefix(&self, len: usize) -> Trace {
        let len = len.min(self.len());
        Trace { labels: self.labels[..len].to_vec(), rewards: self.rewards[..len].to_vec() }
    }

    /// True iff `self` is a (not necessarily proper) prefix of `other` as a combined word.
    pub fn is_prefix_of(&self, other: &Trace) -> bool {
        self.len() <= other.len()
            && self.labels[..] == other.labels[..self.len()]
            && self.rewards[..] == other.rewards[..self.len()]
    }

    /// Drops every step whose label is empty and whose reward is zero.
    pub fn compress_empty(&self) -> Trace {
        Trace::from_symbols(self.symbols().filter(|s| !(s.label.is_empty() && s.reward.is_zero())))
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().map(|r| r.to_f64()).sum()
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&word_to_string(&self.to_word()))
    }
}
