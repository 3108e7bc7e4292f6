use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use super::Model;
use crate::conditions::gaussian_window_variance;
use crate::error::{Error, Result};
use crate::rng::{stream, Substream};

/// Covariance of the Gaussian part of `X*` at the positive times of
/// `t_grid`, with variance rate `sigma2` per unit of `b`. The part has
/// stationary increments, so `Cov(t, t') = (V(t) + V(t') − V(|t − t'|)) / 2`
/// with `V(t) = sigma2 · ∫ π(dx) ∫ (∫_0^t f(x, u − s) du)² ds`.
pub fn gaussian_covariance(model: &Model, sigma2: f64, t_grid: &[f64]) -> Result<DMatrix<f64>> {
    let ts: Vec<f64> = t_grid.iter().copied().filter(|t| *t > 0.0).collect();
    let mut lags: Vec<f64> = ts.clone();
    for i in 0..ts.len() {
        for j in 0..i {
            lags.push(ts[i] - ts[j]);
        }
    }
    lags.sort_by(f64::total_cmp);
    lags.dedup();
    let mut v = Vec::with_capacity(lags.len());
    for &l in &lags {
        let r = gaussian_window_variance(&model.mixing, &model.kernel, l);
        if !r.is_finite() {
            return Err(Error::Divergent { what: format!("Gaussian variance at t = {l}"), endpoint: r.divergent_at });
        }
        v.push(sigma2 * r.value);
    }
    let var = |l: f64| -> f64 {
        if l == 0.0 {
            return 0.0;
        }
        let i = lags.partition_point(|&x| x < l);
        v[i]
    };
    let n = ts.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            var(ts[i])
        } else {
            0.5 * (var(ts[i]) + var(ts[j]) - var((ts[i] - ts[j]).abs()))
        }
    }))
}

/// Lower Cholesky factor of the Gaussian covariance on a grid.
#[derive(Debug, Clone)]
pub struct GaussianFactor {
    /// Indices into the grid of the rows of `l`; other grid points are 0.
    rows: Vec<usize>,
    len: usize,
    l: Option<DMatrix<f64>>,
    pub jitter: f64,
}

impl GaussianFactor {
    pub fn new(model: &Model, sigma2: f64, t_grid: &[f64]) -> Result<GaussianFactor> {
        let rows: Vec<usize> = (0..t_grid.len()).filter(|&i| t_grid[i] > 0.0).collect();
        if sigma2 == 0.0 || rows.is_empty() {
            return Ok(GaussianFactor { rows, len: t_grid.len(), l: None, jitter: 0.0 });
        }
        let cov = gaussian_covariance(model, sigma2, t_grid)?;
        let trace = cov.trace();
        let mut jitter = 0.0;
        loop {
            let mut m = cov.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += jitter;
            }
            if let Some(c) = Cholesky::new(m) {
                return Ok(GaussianFactor { rows, len: t_grid.len(), l: Some(c.l()), jitter });
            }
            jitter = if jitter == 0.0 { 1e-16 * trace } else { jitter * 10.0 };
            if jitter > 1e-10 * trace {
                let eig = SymmetricEigen::new(cov.clone()).eigenvalues;
                let max = eig.max();
                let min = eig.min();
                return Err(Error::Numerical(format!(
                    "Gaussian covariance on {} times is not positive definite even with jitter {:.3e}: eigenvalues in [{min:.3e}, {max:.3e}], condition number {:.3e}",
                    rows.len(),
                    1e-10 * trace,
                    max / min.abs().max(f64::MIN_POSITIVE)
                )));
            }
        }
    }

    /// A draw of the Gaussian part on the whole grid.
    pub fn sample(&self, seed: u64, path: u64) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        let Some(l) = &self.l else {
            return out;
        };
        let mut rng = stream(seed, path, Substream::Gaussian);
        let xi = DVector::from_fn(l.nrows(), |_, _| StandardNormal.sample(&mut rng));
        let y = l * xi;
        for (k, &i) in self.rows.iter().enumerate() {
            out[i] = y[k];
        }
        out
    }
}
