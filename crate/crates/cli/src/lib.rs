//! Command-line front end for the `seqforge-core` sequence designer.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod sweep;
