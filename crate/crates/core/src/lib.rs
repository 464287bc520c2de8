//! # rbm-transfer
//!
//! Restricted Boltzmann machines with magnitude-based feature ranking and adaptive
//! transfer of ranked sub-networks between domains.
//!
//! - [`data`]: IDX/CSV loading (gzip aware), normalization, PCA, resizing, splits
//! - [`rbm`]: the model, CD-k training, free energy and exact likelihood for tiny models
//! - [`ranking`]: per-unit scores `c_j = mean |w_ij|`, pruning, rule extraction
//! - [`transfer`]: frozen top-ranked units plus trainable adaptive units
//! - [`probe`]: softmax-regression accuracy probe and confidence intervals
//! - [`persist`]: versioned JSON model files
//! - [`experiment`]: XOR rules, pruning curves, transfer comparisons and sweeps
//!
//! The `examples/` directory has one runnable program per capability.

pub mod data;
pub mod error;
pub mod experiment;
pub mod persist;
pub mod probe;
pub mod ranking;
pub mod rbm;
pub mod rng;
pub mod transfer;

pub use error::{Error, Result};
pub use probe::{ProbeConfig, SoftmaxModel};
pub use ranking::{FeatureRanking, PruneDirection};
pub use rbm::{Rbm, TrainConfig, VisibleType};
pub use transfer::{TargetRbm, TransferSpec};
