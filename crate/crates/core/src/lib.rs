pub mod builtins;
pub mod error;
pub mod funcmodel;
pub mod integrability;
pub mod kernel;
pub mod solver;
pub mod verify;
pub mod asymptotics;
pub mod cli;

pub use error::{Error, Result};
