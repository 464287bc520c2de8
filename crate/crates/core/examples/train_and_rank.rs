//! Trains an RBM on MNIST digits, ranks its hidden units by score and writes the
//! ranking plus PGM images of the highest- and lowest-scoring filters.
//!
//! `cargo run --example train_and_rank -- [out_dir]`

use std::path::PathBuf;

use rand::SeedableRng;
use rbm_transfer::data::{self, NormalizeMode};
use rbm_transfer::ranking::{filter_pgm, ranking_csv, score_features, verify_minimizer};
use rbm_transfer::{persist, rbm, Rbm, TrainConfig, VisibleType};

fn main() -> rbm_transfer::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "train_and_rank_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| rbm_transfer::Error::Io { path: out.clone(), source: e })?;
    let dir = std::env::var("MNIST_DIR").unwrap_or_else(|_| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist10k").into());
    let mnist = data::load_idx(format!("{dir}/images-idx3-ubyte.gz"), format!("{dir}/labels-idx1-ubyte.gz"))?;
    let train = data::normalize(&mnist.take(2000)?, NormalizeMode::UnitScale { max: None })?;

    let cfg = TrainConfig { seed: 3, ..TrainConfig::quick() };
    let (model, trace) = rbm::train(&Rbm::init(784, 100, VisibleType::Binary, 3)?, &train, &cfg)?;
    for (e, s) in trace.epochs.iter().enumerate().step_by(5) {
        println!("epoch {e:>3}  reconstruction {:.5}  mean hidden {:.3}", s.reconstruction_error, s.mean_hidden_activation);
    }

    let ranking = score_features(&model);
    let report = verify_minimizer(&model, 20, false, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0))?;
    println!(
        "information loss {:.4}; perturbation check {} (worst margin {:.2e})",
        ranking.total_loss,
        if report.passed { "passed" } else { "FAILED" },
        report.worst_margin
    );
    let write = |name: String, bytes: Vec<u8>| {
        let p = out.join(name);
        std::fs::write(&p, bytes).map_err(|e| rbm_transfer::Error::Io { path: p, source: e })
    };
    write("ranking.csv".into(), ranking_csv(&ranking).into_bytes())?;
    let n = ranking.order.len();
    for (name, j) in [("top", ranking.order[0]), ("second", ranking.order[1]), ("bottom", ranking.order[n - 1])] {
        println!("{name:>7} unit h{j}: score {:.4}", ranking.scores[j]);
        write(format!("{name}_h{j}.pgm"), filter_pgm(model.weights.column(j), 28, 28)?)?;
    }
    persist::save_rbm(out.join("model.json"), &model)?;
    println!("wrote ranking.csv, model.json and filter images to {}", out.display());
    Ok(())
}
