//! Accuracy over a grid of transferred units `k` and added units `m` at θ = 1,
//! printed as heatmap data.
//!
//! `cargo run --release --example knowledge_sweep > sweep.csv`

use rbm_transfer::data::{self, NormalizeMode};
use rbm_transfer::experiment::transfer::{run_transfer, TransferGrid, TransferSettings};
use rbm_transfer::{rbm, Rbm, TrainConfig, VisibleType};

fn main() -> rbm_transfer::Result<()> {
    let dir = std::env::var("MNIST_DIR").unwrap_or_else(|_| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist10k").into());
    let mnist = data::load_idx(format!("{dir}/images-idx3-ubyte.gz"), format!("{dir}/labels-idx1-ubyte.gz"))?;
    let mnist = data::normalize(&mnist, NormalizeMode::UnitScale { max: None })?;
    let source_data = mnist.filter_classes(&[0, 1, 2, 3, 4])?.take(3000)?;
    let splits = data::split(&mnist.filter_classes(&[5, 6, 7, 8, 9])?.take(600)?, (0.5, 0.25, 0.25), 2)?;

    let (source, _) = rbm::train(&Rbm::init(784, 50, VisibleType::Binary, 1)?, &source_data, &TrainConfig { seed: 1, ..TrainConfig::quick() })?;
    let settings = TransferSettings {
        grid: TransferGrid { k: vec![0, 10, 25, 50], m: vec![10, 25, 50], theta: vec![1.0] },
        repeat: 2,
        target_train: TrainConfig { epochs: 10, ..TrainConfig::quick() },
        ..TransferSettings::default()
    };
    let report = run_transfer(&source, &splits, &settings, 7)?;
    print!("{}", report.heatmap_csv());
    Ok(())
}
