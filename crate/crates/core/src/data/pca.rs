use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::{Dataset, Normalization};
use crate::error::{Error, Result};

/// Principal subspace of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// `n_dims × k`, orthonormal columns sorted by decreasing variance.
    pub components: Array2<f64>,
    /// Covariance eigenvalues of the retained components (population normalization).
    pub explained_variance: Array1<f64>,
    /// Sum of all covariance eigenvalues, retained or not.
    pub total_variance: f64,
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.ncols()
    }

    /// Maps projected coordinates back to the original space.
    pub fn inverse_transform(&self, projected: &Array2<f64>) -> Array2<f64> {
        projected.dot(&self.components.t()) + &self.mean
    }
}

/// Fits the top-`k` eigenvectors of the sample covariance `(X−μ)ᵀ(X−μ)/n`.
pub fn pca_fit(d: &Dataset, k: usize) -> Result<PcaModel> {
    let (n, dims) = d.samples.dim();
    if k == 0 || k > dims {
        return Err(Error::InvalidArgument(format!("pca k={k} must be in 1..={dims}")));
    }
    if dims > n {
        return Err(Error::InvalidArgument(format!(
            "pca fit needs n_dims ({dims}) <= n_samples ({n})"
        )));
    }
    let mean = d.samples.mean_axis(Axis(0)).expect("non-empty");
    let centered = &d.samples - &mean;
    let cov = centered.t().dot(&centered) / n as f64;

    let sym = nalgebra::DMatrix::from_fn(dims, dims, |i, j| cov[[i, j]]);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..dims).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = Array2::zeros((dims, k));
    let mut explained = Array1::zeros(k);
    for (c, &src) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(src);
        // Sign convention: the largest-magnitude entry is positive.
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..dims {
            components[[i, c]] = sign * v[i];
        }
        explained[c] = eig.eigenvalues[src].max(0.0);
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance: explained,
        total_variance: eig.eigenvalues.iter().map(|v| v.max(0.0)).sum(),
    })
}

/// Projects `(x − mean)·components`; the result is tagged [`Normalization::Pca`].
pub fn pca_transform(m: &PcaModel, d: &Dataset) -> Result<Dataset> {
    if d.n_dims() != m.mean.len() {
        return Err(Error::Shape(format!(
            "pca model expects {} dims, dataset has {}",
            m.mean.len(),
            d.n_dims()
        )));
    }
    let projected = (&d.samples - &m.mean).dot(&m.components);
    let mut out = Dataset::new(projected, d.labels.clone())?;
    out.normalization = Normalization::Pca;
    out.provenance = d.provenance.clone();
    out.provenance.push(format!("pca(k={})", m.k()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn orthonormal_components() {
        let d = Dataset::new(
            Array2::from_shape_fn((30, 6), |(i, j)| ((i * 7 + j * 3) % 11) as f64 + (i as f64).sin()),
            None,
        )
        .unwrap();
        let m = pca_fit(&d, 4).unwrap();
        let gram = m.components.t().dot(&m.components);
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - e).abs() < 1e-8);
            }
        }
        assert!(m.explained_variance.windows(2).into_iter().all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_one_line_reconstructs() {
        let d = Dataset::new(array![[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [-3.0, -6.0]], None).unwrap();
        let m = pca_fit(&d, 1).unwrap();
        let z = pca_transform(&m, &d).unwrap();
        let back = m.inverse_transform(&z.samples);
        for (a, b) in back.iter().zip(d.samples.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
        assert_eq!(z.normalization, Normalization::Pca);
    }

    #[test]
    fn k_too_large() {
        let d = Dataset::new(Array2::zeros((4, 2)), None).unwrap();
        assert!(pca_fit(&d, 3).is_err());
    }
}
