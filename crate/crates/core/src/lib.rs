pub mod cli;
pub mod error;
pub mod exec;
pub mod io;
pub mod models;
pub mod observables;
pub mod quantum;
pub mod solvers;
pub mod sweep;

pub use error::{Error, Result};
