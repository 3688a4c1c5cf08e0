//! Command implementations behind the `lab` binary.

pub mod bandwidth;
pub mod config_file;
pub mod experiment;
pub mod figures;
pub mod manifest;
pub mod selftest;
