//! Prunes a 100-unit MNIST RBM ten units at a time, dropping either the lowest- or
//! the highest-scoring units, and reports probe accuracy on held-out digits.
//!
//! `cargo run --release --example prune_curve -- [curve.csv]`

use rbm_transfer::data::{self, NormalizeMode};
use rbm_transfer::experiment::prune::prune_curve;
use rbm_transfer::{rbm, ProbeConfig, PruneDirection, Rbm, TrainConfig, VisibleType};

fn main() -> rbm_transfer::Result<()> {
    let dir = std::env::var("MNIST_DIR").unwrap_or_else(|_| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist10k").into());
    let mnist = data::load_idx(format!("{dir}/images-idx3-ubyte.gz"), format!("{dir}/labels-idx1-ubyte.gz"))?;
    let mnist = data::normalize(&mnist, NormalizeMode::UnitScale { max: None })?;
    let (train, test) = (mnist.take(2000)?, mnist.range(2000, 1000)?);

    let cfg = TrainConfig { seed: 7, ..TrainConfig::quick() };
    let (model, _) = rbm::train(&Rbm::init(784, 100, VisibleType::Binary, 7)?, &train, &cfg)?;
    let curve = prune_curve(&model, &train, &test, 10, &ProbeConfig::default())?;

    println!("{:>5}  {:>11}  {:>12}", "kept", "drop_lowest", "drop_highest");
    for p in curve.arm(PruneDirection::DropLowest) {
        let hi = curve.accuracy_at(PruneDirection::DropHighest, p.kept_units).unwrap();
        println!("{:>5}  {:>11.3}  {:>12.3}", p.kept_units, p.accuracy, hi);
    }
    println!(
        "area: drop_lowest {:.2}, drop_highest {:.2}",
        curve.area(PruneDirection::DropLowest),
        curve.area(PruneDirection::DropHighest)
    );
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, curve.to_csv()).map_err(|e| rbm_transfer::Error::Io { path: path.into(), source: e })?;
    }
    Ok(())
}
