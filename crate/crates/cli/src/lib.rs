//! The `ats` command-line tool: artifact files, persistent GM state and the nine commands.

pub mod artifact;
pub mod commands;
pub mod exit;
pub mod gm_state;

pub use commands::{run, Cli};
pub use exit::{classify, Code, Failure};
