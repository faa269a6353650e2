//! Reward automata, their DFA encodings, and the constructions built on them.

mod construct;
mod dfa;
mod fra;
mod label;
mod reward;
mod text;
mod trace;

pub use construct::{
    build_prefix_tree_fra, build_query_fra, nearest_reward, quantize_rewards, MAX_QUANTIZATION_LEVELS,
};
pub use dfa::{mealy_to_dfa, Dfa};
pub use fra::FiniteRewardAutomaton;
pub use label::Label;
pub use reward::RewardValue;
pub use text::{fra_from_text, fra_to_dot, fra_to_text};
pub use trace::{word_to_string, Symbol, Trace, Word};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("proposition `{0}` is not in a..=z")]
    UnknownProposition(char),
    #[error("label {0} is not in the input alphabet")]
    UnknownLabel(Label),
    #[error("symbol {0:?} is not in the DFA alphabet")]
    UnknownSymbol(Symbol),
    #[error("state {state} out of range for {num_states} states")]
    StateOutOfRange { state: usize, num_states: usize },
    #[error("an automaton needs at least one state")]
    NoStates,
    #[error("trace has {labels} labels but {rewards} rewards")]
    TraceLength { labels: usize, rewards: usize },
    #[error("traces {first} and {second} share a label prefix but disagree on its rewards")]
    InconsistentTraces { first: usize, second: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed automaton: {0}")]
    Malformed(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("line {line}: {message}")]
    ParseAt { line: usize, message: String },
}
