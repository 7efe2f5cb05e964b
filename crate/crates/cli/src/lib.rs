//! File formats, batch experiments and command implementations for the
//! `camem` binary.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod io;
pub mod report;
