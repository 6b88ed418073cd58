//! Pipeline driver behind the `dqw` binary.

pub mod commands;
pub mod config;
pub mod output;

use dqw_core::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) | Error::Domain(_) | Error::WindowAtEdge { .. } => {
            EXIT_CONFIG
        }
        Error::Numerical(_) | Error::Singular(_) | Error::Ambiguous(_) | Error::Contract(_) => EXIT_NUMERICAL,
    }
}
