//! File formats and command-line front end for `kinetic-dec`.

pub mod cli;
pub mod config;
pub mod io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Solver(kinetic_dec::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<kinetic_dec::Error> for CliError {
    fn from(e: kinetic_dec::Error) -> Self {
        use kinetic_dec::Error as E;
        match e {
            E::InvalidConfig(_) | E::DomainMismatch | E::ShapeMismatch | E::FactorialOverflow { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Solver(e),
        }
    }
}

impl CliError {
    /// 1 for bad input, 2 for a failed computation or output.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            _ => 2,
        }
    }
}
