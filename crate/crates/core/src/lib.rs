//! Max-flow network interdiction with restructuring: models, a small MILP
//! engine, and a column-and-constraint generation solver.

pub mod ccg;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod formulate;
pub mod instance;
pub mod lemmas;
pub mod milp;
pub mod netgen;
pub mod network;
pub mod restructure;

pub use error::{Error, Result};
