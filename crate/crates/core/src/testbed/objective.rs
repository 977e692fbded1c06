//! The objective interface queried by every optimization run.
//!
//! Grid pairs expose their true values and optimum so regret can be computed;
//! external black-box objectives can implement [`Objective`] with unknown
//! truth, in which case traces carry NaN regret and reporting falls back to
//! best-observed values.

use std::sync::Arc;

use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::rng::standard_normal;
use crate::testbed::{FiniteDomain, ObjectivePair};

pub trait Objective {
    fn domain(&self) -> &Arc<FiniteDomain>;

    /// Noisy evaluation at a domain index. Consumes the objective's own noise
    /// stream; callers must query exactly once per round.
    fn query(&mut self, index: usize) -> Result<f64>;

    /// Noise-free value, when known.
    fn true_value(&self, index: usize) -> Option<f64>;

    /// Optimum (index, value), when known.
    fn optimum(&self) -> Option<(usize, f64)>;
}

/// Noisy view of a tabulated pair's target surface.
pub struct GridObjective {
    pair: Arc<ObjectivePair>,
    domain: Arc<FiniteDomain>,
    noise_variance: f64,
    rng: ChaCha12Rng,
}

impl GridObjective {
    pub fn new(pair: Arc<ObjectivePair>, noise_variance: f64, rng: ChaCha12Rng) -> Result<Self> {
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "objective noise variance must be nonnegative, got {noise_variance}"
            )));
        }
        let domain = pair.domain().clone();
        Ok(GridObjective { pair, domain, noise_variance, rng })
    }
}

impl Objective for GridObjective {
    fn domain(&self) -> &Arc<FiniteDomain> {
        &self.domain
    }

    fn query(&mut self, index: usize) -> Result<f64> {
        if index >= self.domain.len() {
            return Err(Error::InvalidParameter(format!(
                "query index {index} outside domain of {} points",
                self.domain.len()
            )));
        }
        Ok(query_objective(&self.pair, index, self.noise_variance, &mut self.rng))
    }

    fn true_value(&self, index: usize) -> Option<f64> {
        Some(self.pair.target_at(index))
    }

    fn optimum(&self) -> Option<(usize, f64)> {
        Some((self.pair.x_star_index(), self.pair.f_star()))
    }
}

/// f(x) plus one Gaussian noise draw from the given stream.
pub fn query_objective(
    pair: &ObjectivePair,
    index: usize,
    noise_variance: f64,
    rng: &mut impl rand::Rng,
) -> f64 {
    let noise = if noise_variance > 0.0 {
        noise_variance.sqrt() * standard_normal(rng)
    } else {
        0.0
    };
    pair.target_at(index) + noise
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_stream;
    use crate::testbed::make_gaussian_pair;

    fn pair() -> Arc<ObjectivePair> {
        let domain = Arc::new(FiniteDomain::grid(1, -1.0, 1.0, 9).unwrap());
        Arc::new(make_gaussian_pair(domain, 0.0, 0.5).unwrap())
    }

    #[test]
    fn zero_noise_returns_exact_values() {
        let p = pair();
        let mut rng = seed_stream(1);
        for i in 0..p.domain().len() {
            assert_eq!(query_objective(&p, i, 0.0, &mut rng), p.target_at(i));
        }
    }

    #[test]
    fn same_seed_gives_identical_noise_sequence() {
        let p = pair();
        let mut a = seed_stream(9);
        let mut b = seed_stream(9);
        let xs: Vec<f64> = (0..10).map(|i| query_objective(&p, i % 9, 0.3, &mut a)).collect();
        let ys: Vec<f64> = (0..10).map(|i| query_objective(&p, i % 9, 0.3, &mut b)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn sample_mean_concentrates_on_true_value() {
        let p = pair();
        let sigma2 = 0.25f64;
        let mut rng = seed_stream(31);
        let n = 10_000;
        let idx = 4;
        let mean: f64 =
            (0..n).map(|_| query_objective(&p, idx, sigma2, &mut rng)).sum::<f64>() / n as f64;
        let bound = 4.0 * sigma2.sqrt() / 100.0; // 4 sigma / sqrt(n)
        assert!(
            (mean - p.target_at(idx)).abs() <= bound,
            "sample mean off by {} > {bound}",
            (mean - p.target_at(idx)).abs()
        );
    }

    #[test]
    fn grid_objective_rejects_out_of_range_index() {
        let p = pair();
        let mut obj = GridObjective::new(p, 0.1, seed_stream(2)).unwrap();
        assert!(obj.query(999).is_err());
        assert!(obj.query(0).is_ok());
    }
}
