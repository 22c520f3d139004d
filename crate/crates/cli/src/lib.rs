//! Batch front end for the spinstate engine: configuration, workflows and
//! report files.

pub mod commands;
pub mod config;
pub mod report;
pub mod run;

pub use config::{InitialState, RunConfig};
pub use run::{execute, run, write_outputs, RunOutput};

/// Process exit codes.
pub mod exit {
    pub const CONVERGED: i32 = 0;
    pub const IO: i32 = 1;
    pub const NOT_CONVERGED: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const NON_FINITE: i32 = 4;
}

/// Maps a failure to its exit code. Anything that is not an infeasible spin
/// request or a non-finite abort counts as an I/O or input error.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        match cause.downcast_ref::<spinstate::Error>() {
            Some(spinstate::Error::Infeasible(_)) => return exit::INFEASIBLE,
            Some(spinstate::Error::NonFinite { .. }) => return exit::NON_FINITE,
            _ => {}
        }
    }
    exit::IO
}
