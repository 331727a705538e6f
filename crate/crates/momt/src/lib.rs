//! File formats and command execution for the `momt` binary.

pub mod cli;
pub mod format;
pub mod run;
