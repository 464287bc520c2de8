//! Scores raw pixels with the softmax probe over several seeds and reports a 95%
//! confidence interval.
//!
//! `cargo run --release --example softmax_probe`

use rbm_transfer::data::{self, NormalizeMode};
use rbm_transfer::probe::{mean_ci95, predict, train_softmax};
use rbm_transfer::ProbeConfig;

fn main() -> rbm_transfer::Result<()> {
    let dir = std::env::var("MNIST_DIR").unwrap_or_else(|_| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist10k").into());
    let mnist = data::load_idx(format!("{dir}/images-idx3-ubyte.gz"), format!("{dir}/labels-idx1-ubyte.gz"))?;
    let mnist = data::normalize(&mnist, NormalizeMode::UnitScale { max: None })?;
    let (train, test) = (mnist.take(1000)?, mnist.range(1000, 1000)?);

    let mut accs = Vec::new();
    for seed in 0..5 {
        let cfg = ProbeConfig { seed, epochs: 50, ..ProbeConfig::default() };
        let (model, trace) = train_softmax(train.samples.view(), train.require_labels("train")?, &cfg)?;
        let acc = rbm_transfer::probe::accuracy(&predict(&model, test.samples.view())?, test.require_labels("test")?)?;
        println!("seed {seed}: loss {:.4} -> {:.4}, {} backoffs, accuracy {acc:.3}", trace.losses[0], trace.losses.last().unwrap(), trace.backoffs.len());
        accs.push(acc);
    }
    let (mean, half) = mean_ci95(&accs)?;
    println!("accuracy {mean:.4} ± {half:.4}");
    Ok(())
}
