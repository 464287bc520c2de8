//! Transfers knowledge from an RBM trained on digits 0-4 to a small target task on
//! digits 5-9 and compares adaptive transfer with the baselines.
//!
//! `cargo run --release --example transfer_mnist -- [repeats]`

use rbm_transfer::data::{self, NormalizeMode};
use rbm_transfer::experiment::transfer::{run_transfer, TransferSettings};
use rbm_transfer::{rbm, Rbm, TrainConfig, VisibleType};

fn main() -> rbm_transfer::Result<()> {
    let repeat = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let dir = std::env::var("MNIST_DIR").unwrap_or_else(|_| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist10k").into());
    let mnist = data::load_idx(format!("{dir}/images-idx3-ubyte.gz"), format!("{dir}/labels-idx1-ubyte.gz"))?;
    let mnist = data::normalize(&mnist, NormalizeMode::UnitScale { max: None })?;
    let source_data = mnist.filter_classes(&[0, 1, 2, 3, 4])?.take(5000)?;
    let target = mnist.filter_classes(&[5, 6, 7, 8, 9])?.take(1000)?;
    let splits = data::split(&target, (0.5, 0.25, 0.25), 11)?;

    let cfg = TrainConfig { seed: 5, ..TrainConfig::quick() };
    let (source, _) = rbm::train(&Rbm::init(784, 100, VisibleType::Binary, 5)?, &source_data, &cfg)?;

    let settings = TransferSettings { repeat, ..TransferSettings::default() };
    let report = run_transfer(&source, &splits, &settings, 99)?;
    print!("{}", report.format_table());
    println!(
        "best cell on validation: k={} m={} theta={} ({:.1}s)",
        report.best.k, report.best.m, report.best.theta, report.seconds
    );
    Ok(())
}
