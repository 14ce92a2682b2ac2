//! Generators for concrete interaction models: finite-range endogenous
//! averaging (Krause-style and neighbor averaging), generalized flocking
//! dynamics, the two 2-agent reference chains, and random doubly stochastic
//! chains. Every generator realizes its matrices eagerly or through a pure
//! producer, so chains replay identically on every query.

mod cucker_smale;
mod fixtures;
mod jlm;
mod krause;
mod random;

pub use cucker_smale::{
    cucker_smale_simulate, flocking_condition, CsKernel, CuckerSmaleParams, CuckerSmaleRun,
    FlockingCheck,
};
pub use fixtures::{paper_example_chain, PaperExample};
pub use jlm::{jlm_chain, JlmParams};
pub use krause::{krause_chain, KrauseKernel, KrauseParams};
pub use random::random_doubly_stochastic_chain;
