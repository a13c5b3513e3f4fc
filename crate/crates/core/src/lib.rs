//! Qualitative analysis of robust Markov decision processes.
//!
//! Given an RMDP whose transition uncertainty is (state, action)-rectangular,
//! the solvers decide from which states the agent can reach a target, or
//! satisfy a parity condition, with probability one against every choice of
//! the environment, and synthesize a pure memoryless policy that does so.
//!
//! The solvers only touch uncertainty sets through two force predicates
//! ([`oracle::Oracle::force_agent`], [`oracle::Oracle::force_env`]), which
//! are decided exactly for L-balls, polytopes and finite menus.

pub mod attractor;
pub mod bench;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod reference;
pub mod set;
pub mod solver;

pub use error::{Error, Result};
pub use model::{ActionId, MemorylessPolicy, PriorityFunction, Rmdp, RmdpBuilder, StateId};
pub use oracle::{Backend, Oracle, OracleStats};
pub use set::StateSet;
