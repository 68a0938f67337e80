//! Command-line front end: configuration, verification suites, runs and
//! sweeps, and their CSV/JSON output.

pub mod app;
pub mod config;
pub mod record;
pub mod suites;
