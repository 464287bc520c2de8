//! Standardizes pixels, projects them onto 69 principal components and trains RBMs
//! with Gaussian visible units on the result, with and without a sparsity penalty.
//!
//! `cargo run --release --example pca_gaussian`

use rbm_transfer::data::{self, NormalizeMode};
use rbm_transfer::experiment::config::{preprocess, PreprocessStep};
use rbm_transfer::probe::probe_accuracy;
use rbm_transfer::{rbm, ProbeConfig, Rbm, TrainConfig, VisibleType};

fn main() -> rbm_transfer::Result<()> {
    let dir = std::env::var("MNIST_DIR").unwrap_or_else(|_| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist10k").into());
    let mnist = data::load_idx(format!("{dir}/images-idx3-ubyte.gz"), format!("{dir}/labels-idx1-ubyte.gz"))?;
    let mnist = data::normalize(&mnist, NormalizeMode::UnitScale { max: None })?;

    // Statistics come from the training split only.
    let mut sets = [mnist.take(3000)?, mnist.range(3000, 1000)?];
    preprocess(&[PreprocessStep::Zscore, PreprocessStep::Pca { components: 69 }], &mut sets)?;
    let [train, test] = sets;

    let plain = TrainConfig { learning_rate: 0.005, epochs: 30, seed: 2, ..TrainConfig::quick() };
    let sparse = TrainConfig { sparsity_target: Some(0.1), sparsity_cost: 1.0, ..plain.clone() };
    let init = Rbm::init(69, 200, VisibleType::Gaussian, 2)?;
    for (name, cfg) in [("no penalty", &plain), ("sparse 0.1", &sparse)] {
        let (model, trace) = rbm::train(&init, &train, cfg)?;
        let last = trace.epochs.last().unwrap();
        let acc = probe_accuracy(
            model.hidden_probs(train.samples.view())?.view(),
            train.require_labels("train")?,
            model.hidden_probs(test.samples.view())?.view(),
            test.require_labels("test")?,
            &ProbeConfig::default(),
        )?;
        println!(
            "{name:>10}: reconstruction {:.4}, mean hidden activation {:.3}, probe accuracy {:.3}",
            last.reconstruction_error, last.mean_hidden_activation, acc
        );
    }
    Ok(())
}
