//! File formats and the command-line runner for the `wtsim-core` turbine
//! model: TOML scenarios, CSV logs with a metadata block, SVG line plots and
//! JSON comparison reports.

pub mod cli;
pub mod csv_log;
pub mod plot;
pub mod scenario_file;
