//! Config-driven front end: JSON configs, output files and end-to-end runs.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{Normalization, SimulationConfig};
pub use output::{read_field, write_field, write_intensity};
pub use runner::{psf, run, simulate, RunOptions, RunReport};
