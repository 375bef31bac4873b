//! Process exit codes and their mapping from errors.

use std::fmt;

/// Stable exit-code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Ok = 0,
    /// Verification, judge or account returned 0.
    Negative = 1,
    /// Unparseable input or invalid parameters.
    Malformed = 2,
    /// Refused by GM policy (duplicate upk).
    Policy = 3,
    /// Signer state has no tags left.
    Exhausted = 4,
    /// GM state lock is held.
    Lock = 5,
}

impl Code {
    pub fn as_i32(self) -> i32 {
        self as i32
    }
}

/// An error that carries its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: Code,
    pub msg: String,
}

impl Failure {
    pub fn new(code: Code, msg: impl Into<String>) -> Self {
        Self {
            code,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl std::error::Error for Failure {}

fn core_code(e: &ats_core::Error) -> Code {
    use ats_core::Error as E;
    match e {
        E::DuplicateUser(_) => Code::Policy,
        E::StateExhausted(_) => Code::Exhausted,
        E::InvalidSignature => Code::Negative,
        _ => Code::Malformed,
    }
}

/// First coded cause in the chain; anything else is treated as malformed input.
pub fn classify(err: &anyhow::Error) -> Code {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if let Some(e) = cause.downcast_ref::<ats_core::Error>() {
            return core_code(e);
        }
    }
    Code::Malformed
}
