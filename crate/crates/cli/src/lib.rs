//! Library side of the `handlecalc` binary: the interactive session and the
//! command implementations, kept here so tests can drive them directly.

pub mod commands;
pub mod repl;
