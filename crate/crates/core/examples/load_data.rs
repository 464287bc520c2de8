//! Loads the bundled MNIST subset from gzipped IDX files and a small CSV file, then
//! runs them through normalization, resizing, PCA and a seeded split.
//!
//! `cargo run --example load_data`

use rbm_transfer::data::{self, NormalizeMode};

fn main() -> rbm_transfer::Result<()> {
    let dir = std::env::var("MNIST_DIR").unwrap_or_else(|_| concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist10k").into());
    let mnist = data::load_idx(format!("{dir}/images-idx3-ubyte.gz"), format!("{dir}/labels-idx1-ubyte.gz"))?;
    let labels = mnist.require_labels("mnist")?;
    let mut counts = [0usize; 10];
    for &l in labels {
        counts[l as usize] += 1;
    }
    println!("{} images of {:?}, class counts {counts:?}", mnist.n_samples(), mnist.dims.unwrap());

    let unit = data::normalize(&mnist, NormalizeMode::UnitScale { max: None })?;
    let binary = data::normalize(&unit, NormalizeMode::Binarize { threshold: 0.5 })?;
    let small = data::resize_nearest(&binary, (14, 14))?;
    println!("binarized and resized to {:?}: {} dims", small.dims.unwrap(), small.n_dims());

    let pca = data::pca_fit(&unit.take(2000)?, 50)?;
    let kept: f64 = pca.explained_variance.sum() / pca.total_variance;
    println!("50 principal components keep {:.1}% of the variance", 100.0 * kept);

    let splits = data::split(&unit.filter_classes(&[5, 6, 7, 8, 9])?, (0.7, 0.15, 0.15), 1)?;
    println!(
        "classes 5-9 split into {} / {} / {}",
        splits.train.n_samples(),
        splits.valid.n_samples(),
        splits.test.n_samples()
    );

    let csv_path = std::env::temp_dir().join("rbm_transfer_load_data.csv");
    std::fs::write(&csv_path, "label,a,b,c\n1,0.5,0.25,1\n0,0,1,0.75\n").map_err(|e| rbm_transfer::Error::Io { path: csv_path.clone(), source: e })?;
    let table = data::load_csv(&csv_path, true, 0)?;
    println!("csv: {} rows x {} features, labels {:?}", table.n_samples(), table.n_dims(), table.labels.unwrap());
    for step in &splits.train.provenance {
        println!("  provenance: {step}");
    }
    Ok(())
}
