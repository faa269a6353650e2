//! L*-style learning over the combined label × reward alphabet.

mod sample;
mod table;

pub use sample::{check_sample, traces_inconsistent, SampleStore};
pub use table::{ObservationTable, RowSignature};

use thiserror::Error;

use crate::automata::{FiniteRewardAutomaton, Label, RewardValue, Symbol, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("table cell {0} has not been answered")]
    Unanswered(String),
    #[error("observation table is not closed")]
    NotClosed,
    #[error("observation table is not consistent")]
    NotConsistent,
    #[error("the empty word must be accepted")]
    EmptyWordRejected,
    #[error("trace {0} contradicts the sample")]
    InconsistentSample(String),
    #[error("automaton construction failed: {0}")]
    Automaton(String),
}

/// A minimally adequate teacher for the combined-alphabet language.
pub trait Teacher {
    fn membership(&mut self, word: &[Symbol]) -> bool;
    /// `None` when the hypothesis is correct, otherwise a word on which it errs.
    fn equivalence(&mut self, hypothesis: &FiniteRewardAutomaton) -> Option<Word>;
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub hypothesis: FiniteRewardAutomaton,
    pub table: ObservationTable,
    pub membership_queries: usize,
    pub equivalence_queries: usize,
}

fn answer_unknown<T: Teacher>(table: &mut ObservationTable, teacher: &mut T) -> usize {
    let pending = table.unknown_words();
    let n = pending.len();
    for w in pending {
        let v = teacher.membership(&w);
        table.set(w, v);
    }
    n
}

/// Runs L* against `teacher` until an equivalence query succeeds.
pub fn learn_with_teacher<T: Teacher>(
    inputs: &[Label],
    rewards: &[RewardValue],
    teacher: &mut T,
) -> Result<LearnOutcome, TableError> {
    let mut table = ObservationTable::new(inputs.iter().copied(), rewards.iter().copied());
    let mut membership_queries = 0;
    let mut equivalence_queries = 0;
    loop {
        membership_queries += answer_unknown(&mut table, teacher);
        while !(table.is_closed()? && table.is_consistent()?) {
            table.check_obs_table()?;
            membership_queries += answer_unknown(&mut table, teacher);
        }
        let hypothesis = table.hypothesis_fra()?;
        equivalence_queries += 1;
        match teacher.equivalence(&hypothesis) {
            None => {
                return Ok(LearnOutcome { hypothesis, table, membership_queries, equivalence_queries });
            }
            Some(cex) => {
                table.add_counterexample(&cex);
            }
        }
    }
}
