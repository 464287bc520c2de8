//! Experiment drivers behind the `rbmtl` subcommands.

pub mod commands;
pub mod config;
pub mod prune;
pub mod transfer;
pub mod xor;

pub use commands::{resolve_output_dir, run_command, Command, CommandOutput, Manifest};
pub use config::{DataFormat, DataSource, ExperimentConfig, PreprocessStep};
pub use prune::{prune_curve, PruneCurve};
pub use transfer::{run_transfer, TransferGrid, TransferReport, TransferSettings};
pub use xor::{run_xor, XorReport, XorSettings};
