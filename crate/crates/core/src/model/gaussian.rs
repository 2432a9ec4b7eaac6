use crate::matrix::Matrix;
use crate::scalar::Scalar;

use super::{convert, ModelError};

/// Default number of quantization bins for planners.
pub const DEFAULT_BINS: usize = 64;

/// Additive Gaussian observations `y = x + n`, `n ~ N(0, σ²)`, where the
/// state-conditional mean is the 1-based state index.
///
/// Planners see a finite alphabet: the real line is cut at `edges` into
/// `edges.len() + 1` bins, the outermost ones unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianKernel<T> {
    sigma: f64,
    edges: Vec<f64>,
    quantized: Matrix<T>,
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

impl<T: Scalar> GaussianKernel<T> {
    /// Equal-probability bins under the equal-weight mixture of the
    /// state-conditional densities.
    pub fn new(num_states: usize, sigma: f64, bins: usize) -> Result<Self, ModelError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(ModelError::Gaussian(format!("sigma must be positive, got {sigma}")));
        }
        if bins < 2 || num_states == 0 {
            return Err(ModelError::Gaussian(format!("need at least 2 bins, got {bins}")));
        }
        let mixture_cdf =
            |y: f64| (1..=num_states).map(|m| normal_cdf((y - m as f64) / sigma)).sum::<f64>() / num_states as f64;
        let mut edges = Vec::with_capacity(bins - 1);
        for k in 1..bins {
            let target = k as f64 / bins as f64;
            let (mut lo, mut hi) = (1.0 - 12.0 * sigma, num_states as f64 + 12.0 * sigma);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mixture_cdf(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            edges.push(0.5 * (lo + hi));
        }
        Self::with_edges(num_states, sigma, edges)
    }

    /// Uses caller-supplied interior bin edges.
    pub fn with_edges(num_states: usize, sigma: f64, edges: Vec<f64>) -> Result<Self, ModelError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(ModelError::Gaussian(format!("sigma must be positive, got {sigma}")));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) || edges.iter().any(|e| !e.is_finite()) {
            return Err(ModelError::Gaussian("bin edges must be finite and strictly increasing".into()));
        }
        let bins = edges.len() + 1;
        let mut rows = Vec::with_capacity(num_states);
        for x in 0..num_states {
            let mean = (x + 1) as f64;
            let cdf = |e: f64| normal_cdf((e - mean) / sigma);
            let mut row = Vec::with_capacity(bins);
            let mut prev = 0.0;
            for &e in &edges {
                let c = cdf(e);
                row.push(c - prev);
                prev = c;
            }
            row.push(1.0 - prev);
            rows.push(row);
        }
        let mut quantized =
            Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(T::from_f64_lossy).collect()).collect())
                .expect("rectangular");
        // Make each row sum to one in T's arithmetic.
        for x in 0..num_states {
            let row = quantized.row_mut(x);
            let total = crate::scalar::sum(row);
            let (k, _) = row.iter().enumerate().fold(
                (0, T::zero()),
                |(bk, bv), (k, v)| {
                    if *v > bv {
                        (k, v.clone())
                    } else {
                        (bk, bv)
                    }
                },
            );
            row[k] = row[k].clone() + (T::one() - total);
        }
        Ok(GaussianKernel { sigma, edges, quantized })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn num_bins(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn quantized(&self) -> &Matrix<T> {
        &self.quantized
    }

    /// Density of observing `y` in 0-based state `x`.
    pub fn density(&self, x: usize, y: f64) -> f64 {
        let z = (y - (x + 1) as f64) / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    /// Bin index containing `y`.
    pub fn bin_of(&self, y: f64) -> usize {
        self.edges.partition_point(|&e| e <= y)
    }

    pub(super) fn map_scalar<U: Scalar>(&self) -> GaussianKernel<U> {
        GaussianKernel { sigma: self.sigma, edges: self.edges.clone(), quantized: self.quantized.map(convert) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_are_stochastic_and_monotone() {
        let g = GaussianKernel::<f64>::new(3, 1.0, DEFAULT_BINS).unwrap();
        assert_eq!(g.num_bins(), 64);
        for x in 0..3 {
            let s: f64 = g.quantized().row(x).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        // Equal-probability under the mixture: column means are 1/64.
        for y in 0..64 {
            let m: f64 = (0..3).map(|x| g.quantized()[(x, y)]).sum::<f64>() / 3.0;
            assert!((m - 1.0 / 64.0).abs() < 1e-9, "bin {y}: {m}");
        }
        assert!(g.edges().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn density_peaks_at_state_index() {
        let g = GaussianKernel::<f64>::new(2, 1.0, 8).unwrap();
        assert!(g.density(0, 1.0) > g.density(0, 2.0));
        assert!(g.density(1, 2.0) > g.density(1, 1.0));
        assert!((g.density(0, 1.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bin_lookup() {
        let g = GaussianKernel::<f64>::with_edges(2, 1.0, vec![0.0, 1.0]).unwrap();
        assert_eq!(g.bin_of(-5.0), 0);
        assert_eq!(g.bin_of(0.5), 1);
        assert_eq!(g.bin_of(1.0), 2);
        assert!(GaussianKernel::<f64>::with_edges(2, 1.0, vec![1.0, 1.0]).is_err());
        assert!(GaussianKernel::<f64>::new(2, 0.0, 8).is_err());
    }
}
