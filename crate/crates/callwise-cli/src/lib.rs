//! File formats and command implementations behind the `callwise` binary.
//! The binary itself only parses flags and dispatches here, so integration
//! tests can exercise the same code paths through the library.

pub mod commands;
pub mod formats;
