//! Active inference of reward automata driven by tabular Q-learning.

pub mod automata;
pub mod env;
pub mod lstar;
pub mod rl;
pub mod oracle;
pub mod orchestrator;
