//! Exact reference computations used to check learned automata and policies.

mod mdp;
mod teacher;

pub use mdp::{
    enumerate_attainable_traces, finite_horizon_optimum, policy_evaluation, product_mdp, value_iteration, ExplicitMdp,
    ValueIteration,
};
pub use teacher::{distinguishing_word, minimal_dfa_size, minimal_fra_size, random_fra, ExactTeacher};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("no convergence after {0} sweeps")]
    NoConvergence(usize),
    #[error("more than {0} attainable traces")]
    TooManyTraces(usize),
}
