//! Monte Carlo harness around `harmcrit-core`: FFT synthesis, seeded
//! replicate runs with CSV/JSON output, correlation and normality statistics,
//! and the oracle verification suites behind the `harmcrit` CLI.

pub mod config;
pub mod error;
pub mod fft;
pub mod report;
pub mod runner;
pub mod stats;
pub mod table;
pub mod verify;

pub use config::{ExperimentConfig, StatToggles};
pub use error::{HarnessError, Result};
pub use fft::FftSynth;
pub use runner::{run_experiment, ExperimentResult, RunOptions};
