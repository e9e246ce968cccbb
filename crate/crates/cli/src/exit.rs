//! Process exit codes.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | internal error |
//! | 2 | usage or configuration error |
//! | 3 | I/O error, including unreadable or corrupt tapes |
//! | 4 | requested data not found (unknown ticker, missing tape or manifest) |

use std::fmt;

use tapelab::sim::SimError;
use tapelab::tape::{ImportError, TapeError};

pub const INTERNAL: u8 = 1;
pub const USAGE: u8 = 2;
pub const IO: u8 = 3;
pub const NOT_FOUND: u8 = 4;

/// An error that carries its own exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    Failure { code: USAGE, message: message.into() }.into()
}

pub fn not_found(message: impl Into<String>) -> anyhow::Error {
    Failure { code: NOT_FOUND, message: message.into() }.into()
}

/// Exit code for the outermost classifiable cause of `err`.
pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if cause.is::<SimError>() {
            return USAGE;
        }
        if cause.is::<std::io::Error>() || cause.is::<TapeError>() || cause.is::<ImportError>() {
            return IO;
        }
    }
    INTERNAL
}
