use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::automata::{word_to_string, FiniteRewardAutomaton, Label, RewardValue, Symbol, Word};

use super::TableError;

/// Bit vector of table entries for one row, indexed like `E`.
pub type RowSignature = Vec<bool>;

/// The `(S, E, T)` observation table over the combined alphabet `inputs × rewards`.
///
/// `T` is keyed by the concatenated word, so two `(s, e)` pairs with the same
/// concatenation share one cell. Missing keys are unanswered cells.
#[derive(Clone, Debug)]
pub struct ObservationTable {
    inputs: Vec<Label>,
    rewards: Vec<RewardValue>,
    alphabet: Vec<Symbol>,
    prefixes: Vec<Word>,
    prefix_set: HashSet<Word>,
    suffixes: Vec<Word>,
    suffix_set: HashSet<Word>,
    cells: HashMap<Word, bool>,
}

fn concat(a: &[Symbol], b: &[Symbol]) -> Word {
    let mut w = Vec::with_capacity(a.len() + b.len());
    w.extend_from_slice(a);
    w.extend_from_slice(b);
    w
}

impl ObservationTable {
    /// `S = E = {ε}` with every cell unanswered.
    pub fn new(inputs: impl IntoIterator<Item = Label>, rewards: impl IntoIterator<Item = RewardValue>) -> Self {
        let mut t = ObservationTable {
            inputs: Vec::new(),
            rewards: Vec::new(),
            alphabet: Vec::new(),
            prefixes: vec![Vec::new()],
            prefix_set: HashSet::from([Vec::new()]),
            suffixes: vec![Vec::new()],
            suffix_set: HashSet::from([Vec::new()]),
            cells: HashMap::new(),
        };
        t.extend_alphabet(inputs, rewards);
        t
    }

    /// Grows `Σ_c`. Returns true if anything new was added; the new cells start unanswered.
    pub fn extend_alphabet(
        &mut self,
        inputs: impl IntoIterator<Item = Label>,
        rewards: impl IntoIterator<Item = RewardValue>,
    ) -> bool {
        let (ni, nr) = (self.inputs.len(), self.rewards.len());
        self.inputs.extend(inputs);
        self.inputs.sort();
        self.inputs.dedup();
        self.rewards.extend(rewards);
        self.rewards.sort();
        self.rewards.dedup();
        if (ni, nr) == (self.inputs.len(), self.rewards.len()) {
            return false;
        }
        self.alphabet = self
            .inputs
            .iter()
            .flat_map(|&l| self.rewards.iter().map(move |&r| Symbol::new(l, r)))
            .collect();
        true
    }

    pub fn inputs(&self) -> &[Label] {
        &self.inputs
    }

    pub fn rewards(&self) -> &[RewardValue] {
        &self.rewards
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn prefixes(&self) -> &[Word] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[Word] {
        &self.suffixes
    }

    pub fn get(&self, word: &[Symbol]) -> Option<bool> {
        self.cells.get(word).copied()
    }

    pub fn set(&mut self, word: Word, value: bool) {
        self.cells.insert(word, value);
    }

    /// `S·Σ_c` in prefix-major, alphabet-minor order.
    pub fn extensions(&self) -> Vec<Word> {
        self.prefixes
            .iter()
            .flat_map(|s| self.alphabet.iter().map(move |&a| concat(s, &[a])))
            .collect()
    }

    /// Every word `(S ∪ S·Σ_c)·E`, deduplicated, in a fixed order.
    pub fn required_words(&self) -> Vec<Word> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for row in self.prefixes.iter().cloned().chain(self.extensions()) {
            for e in &self.suffixes {
                let w = concat(&row, e);
                if seen.insert(w.clone()) {
                    out.push(w);
                }
            }
        }
        out
    }

    pub fn unknown_words(&self) -> Vec<Word> {
        self.required_words().into_iter().filter(|w| !self.cells.contains_key(w)).collect()
    }

    pub fn row(&self, prefix: &[Symbol]) -> Result<RowSignature, TableError> {
        self.suffixes
            .iter()
            .map(|e| {
                let w = concat(prefix, e);
                self.cells.get(&w).copied().ok_or_else(|| TableError::Unanswered(word_to_string(&w)))
            })
            .collect()
    }

    fn upper_rows(&self) -> Result<Vec<RowSignature>, TableError> {
        self.prefixes.iter().map(|s| self.row(s)).collect()
    }

    pub fn is_closed(&self) -> Result<bool, TableError> {
        Ok(self.find_unclosed()?.is_none())
    }

    pub fn is_consistent(&self) -> Result<bool, TableError> {
        Ok(self.find_inconsistency()?.is_none())
    }

    /// First `s·σ` whose row is missing from the rows of `S`.
    fn find_unclosed(&self) -> Result<Option<Word>, TableError> {
        let upper: HashSet<RowSignature> = self.upper_rows()?.into_iter().collect();
        for t in self.extensions() {
            if !upper.contains(&self.row(&t)?) {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }

    /// First distinguishing suffix `σ·e` for two equal rows of `S`.
    fn find_inconsistency(&self) -> Result<Option<Word>, TableError> {
        let upper = self.upper_rows()?;
        for i in 0..self.prefixes.len() {
            for j in i + 1..self.prefixes.len() {
                if upper[i] != upper[j] {
                    continue;
                }
                for &a in &self.alphabet {
                    let r1 = self.row(&concat(&self.prefixes[i], &[a]))?;
                    let r2 = self.row(&concat(&self.prefixes[j], &[a]))?;
                    if let Some(k) = (0..r1.len()).find(|&k| r1[k] != r2[k]) {
                        return Ok(Some(concat(&[a], &self.suffixes[k])));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Repairs one defect and returns the membership queries it creates.
    ///
    /// An inconsistency adds `σe` to `E` and asks `(S ∪ S·Σ_c)·σe`; otherwise an
    /// unclosed row `sσ` moves into `S` and asks `(sσ ∪ sσ·Σ_c)·E`. A closed and
    /// consistent table yields no queries and is left untouched.
    pub fn check_obs_table(&mut self) -> Result<Vec<Word>, TableError> {
        if let Some(suffix) = self.find_inconsistency()? {
            let rows: Vec<Word> = self.prefixes.iter().cloned().chain(self.extensions()).collect();
            self.add_suffix(suffix.clone());
            return Ok(dedup(rows.iter().map(|r| concat(r, &suffix))));
        }
        if let Some(new_prefix) = self.find_unclosed()? {
            self.add_prefix(new_prefix.clone());
            let rows = std::iter::once(new_prefix.clone())
                .chain(self.alphabet.iter().map(|&a| concat(&new_prefix, &[a])));
            let mut chi = Vec::new();
            for r in rows {
                for e in &self.suffixes {
                    chi.push(concat(&r, e));
                }
            }
            return Ok(dedup(chi.into_iter()));
        }
        Ok(Vec::new())
    }

    fn add_prefix(&mut self, word: Word) -> bool {
        if self.prefix_set.insert(word.clone()) {
            self.prefixes.push(word);
            true
        } else {
            false
        }
    }

    fn add_suffix(&mut self, word: Word) -> bool {
        if self.suffix_set.insert(word.clone()) {
            self.suffixes.push(word);
            true
        } else {
            false
        }
    }

    /// Inserts every prefix of `word` into `S`. Returns the number of new rows.
    pub fn add_counterexample(&mut self, word: &[Symbol]) -> usize {
        (1..=word.len()).filter(|&k| self.add_prefix(word[..k].to_vec())).count()
    }

    /// Reward automaton read off a closed, consistent, fully answered table.
    ///
    /// States are the distinct rows of accepted prefixes, in first-seen order.
    /// For a state and input label the reward is the smallest `r` with
    /// `T(s·(ℓ,r)) = 1`; if there is none the label self-loops with reward 0.
    pub fn hypothesis_fra(&self) -> Result<FiniteRewardAutomaton, TableError> {
        if !self.is_consistent()? {
            return Err(TableError::NotConsistent);
        }
        if !self.is_closed()? {
            return Err(TableError::NotClosed);
        }
        if self.get(&[]) != Some(true) {
            return Err(TableError::EmptyWordRejected);
        }
        let mut states: Vec<(RowSignature, &Word)> = Vec::new();
        for s in &self.prefixes {
            let row = self.row(s)?;
            // E[0] is ε, so row[0] = T(s)
            if row[0] && !states.iter().any(|(r, _)| *r == row) {
                states.push((row, s));
            }
        }
        let index_of = |row: &RowSignature| states.iter().position(|(r, _)| r == row);
        let mut transitions = Vec::with_capacity(states.len() * self.inputs.len());
        for (_, s) in &states {
            for &l in &self.inputs {
                let mut choice = None;
                for &r in &self.rewards {
                    let ext = concat(s, &[Symbol::new(l, r)]);
                    if self.get(&ext) == Some(true) {
                        let target = index_of(&self.row(&ext)?).ok_or(TableError::NotClosed)?;
                        choice = Some((target, r));
                        break;
                    }
                }
                transitions.push(choice);
            }
        }
        let ni = self.inputs.len();
        let inputs = self.inputs.clone();
        FiniteRewardAutomaton::from_fn(states.len(), 0, self.inputs.iter().copied(), self.rewards.iter().copied(), |w, l| {
            let li = inputs.binary_search(&l).expect("table input");
            transitions[w * ni + li].unwrap_or((w, RewardValue::ZERO))
        })
        .map_err(|e| TableError::Automaton(e.to_string()))
    }

    /// Tab-separated dump: rows `S` then `S·Σ_c \ S`, columns `E`, cells `0`/`1`/`?`.
    pub fn dump_tsv(&self) -> String {
        let mut out = String::from("row\tpart");
        for e in &self.suffixes {
            let _ = write!(out, "\t{}", word_to_string(e));
        }
        out.push('\n');
        let lower: Vec<Word> = self.extensions().into_iter().filter(|w| !self.prefix_set.contains(w)).collect();
        let rows = self.prefixes.iter().map(|w| (w, "S")).chain(lower.iter().map(|w| (w, "SA")));
        for (w, part) in rows {
            let _ = write!(out, "{}\t{part}", word_to_string(w));
            for e in &self.suffixes {
                let cell = match self.get(&concat(w, e)) {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "?",
                };
                let _ = write!(out, "\t{cell}");
            }
            out.push('\n');
        }
        out
    }
}

fn dedup(words: impl Iterator<Item = Word>) -> Vec<Word> {
    let mut seen = HashSet::new();
    words.filter(|w| seen.insert(w.clone())).collect()
}
