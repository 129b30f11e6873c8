//! Configuration, sweeps, secure-distance solving and result files.

pub mod config;
pub mod output;
pub mod secure;
pub mod sweep;

pub use config::{ExperimentConfig, PhaseSource, SweepVariable};
pub use output::{OutputFormat, ResolvedValues};
pub use secure::{max_secure_distance, run_secure_distance, SecureRow};
pub use sweep::{run_optimize, run_sweep, OptimizeRow, SweepRow};
