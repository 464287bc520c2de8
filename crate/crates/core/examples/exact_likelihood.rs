//! Exact partition functions and log-likelihoods of tiny RBMs by enumeration.
//!
//! `cargo run --example exact_likelihood`

use ndarray::Array1;
use rbm_transfer::rbm::{exact_log_likelihood, log_partition};
use rbm_transfer::{Rbm, VisibleType};

fn main() -> rbm_transfer::Result<()> {
    let mut rbm = Rbm::init(5, 3, VisibleType::Binary, 9)?;
    rbm.weights.mapv_inplace(|w| w * 100.0);
    rbm.visible_bias = Array1::linspace(-0.5, 0.5, 5);
    let log_z = log_partition(&rbm)?;

    let mut total = 0.0;
    for code in 0u32..32 {
        let v = Array1::from_iter((0..5).map(|i| f64::from((code >> i) & 1)));
        total += (-rbm.free_energy(v.view())? - log_z).exp();
    }
    println!("log Z = {log_z:.6}; sum over all 32 visible states of p(v) = {total:.15}");

    let data = ndarray::array![[1.0, 0.0, 1.0, 0.0, 1.0], [0.0, 1.0, 0.0, 1.0, 0.0]];
    println!("mean log-likelihood of two patterns: {:.6}", exact_log_likelihood(&rbm, data.view())?);

    let mut gauss = Rbm::init(2, 4, VisibleType::Gaussian, 9)?;
    gauss.weights.mapv_inplace(|w| w * 50.0);
    println!("Gaussian visible: log Z = {:.6}", log_partition(&gauss)?);
    Ok(())
}
