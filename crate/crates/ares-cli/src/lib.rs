//! Command-line front end and experiment runner for the polynomial
//! compression library: `compress`, `decompress`, `distance`, `combine`,
//! plus the `bench` and `scaling` measurement harnesses.

pub mod bench;
pub mod cli;
pub mod commands;
pub mod report;
pub mod scaling;

pub use cli::run;
