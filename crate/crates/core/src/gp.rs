//! Gaussian-process posteriors on finite domains.
//!
//! Noise is a per-observation diagonal, so the homoscedastic textbook case is
//! the special case of a constant diagonal. Posteriors are immutable snapshots:
//! fitting factorizes (K + D) once, extension grows the factor by one
//! row/column in quadratic time, and every later mean/variance query reuses the
//! cached factor.

use crate::error::{Error, Result};
use crate::kernels::{build_kernel_matrix, Covariance, KernelSpec, PSD_JITTER};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::{seed_stream, standard_normal_vec};
use crate::testbed::FiniteDomain;

/// Default cap on the number of points a prior-sample factorization may touch.
pub const DEFAULT_FACTORIZATION_CAP: usize = 20_000;

/// A raw posterior variance below this is treated as a numerical failure
/// rather than rounded up to zero.
const VARIANCE_FLOOR: f64 = -1e-9;

/// Training data: points, observed values, and one noise variance per
/// observation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub noise_variances: Vec<f64>,
}

impl Dataset {
    pub fn empty() -> Self {
        Dataset::default()
    }

    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>, noise_variances: Vec<f64>) -> Result<Self> {
        let d = Dataset { points, values, noise_variances };
        d.validate()?;
        Ok(d)
    }

    /// All observations share one noise variance.
    pub fn homoscedastic(points: Vec<Vec<f64>>, values: Vec<f64>, noise: f64) -> Result<Self> {
        let n = points.len();
        Dataset::new(points, values, vec![noise; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.points.len() || self.noise_variances.len() != self.points.len() {
            return Err(Error::InvalidParameter(format!(
                "dataset lengths disagree: {} points, {} values, {} noise variances",
                self.points.len(),
                self.values.len(),
                self.noise_variances.len()
            )));
        }
        if let Some(first) = self.points.first() {
            let dim = first.len();
            for p in &self.points {
                if p.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
                }
            }
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "dataset values" });
        }
        if self.noise_variances.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "every observation noise variance must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Immutable snapshot of a fitted GP.
#[derive(Debug, Clone)]
pub struct Posterior {
    kernel: KernelSpec,
    data: Dataset,
    /// Factor of (K + diag(noise) + jitter I); `None` for empty training data.
    factor: Option<Cholesky>,
    /// (K + D)^-1 y.
    alpha: Vec<f64>,
}

impl Posterior {
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn training(&self) -> &Dataset {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Posterior mean at a point.
    pub fn mean_at(&self, x: &[f64]) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let k: Vec<f64> = self
            .data
            .points
            .iter()
            .map(|p| self.kernel.eval_unchecked(p, x))
            .collect();
        k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum()
    }

    /// Posterior variance at a point, clamped at zero. Raw values below the
    /// numerical floor indicate a broken factorization and panic in debug.
    pub fn variance_at(&self, x: &[f64]) -> f64 {
        let prior = self.kernel.eval_unchecked(x, x);
        let Some(factor) = &self.factor else {
            return prior;
        };
        let k: Vec<f64> = self
            .data
            .points
            .iter()
            .map(|p| self.kernel.eval_unchecked(p, x))
            .collect();
        let w = factor.forward(&k);
        let raw = prior - w.iter().map(|v| v * v).sum::<f64>();
        debug_assert!(raw >= VARIANCE_FLOOR, "posterior variance {raw} below numerical floor");
        raw.max(0.0)
    }

    pub fn mean_and_variance_at(&self, x: &[f64]) -> (f64, f64) {
        (self.mean_at(x), self.variance_at(x))
    }

    /// Solve (K + D) v = b against the cached factor; `None` for an empty
    /// posterior.
    pub fn solve_gram(&self, b: &[f64]) -> Option<Vec<f64>> {
        self.factor.as_ref().map(|f| f.solve(b))
    }

    /// Mean and variance at every domain point.
    pub fn evaluate_on(&self, domain: &FiniteDomain) -> (Vec<f64>, Vec<f64>) {
        let mut means = Vec::with_capacity(domain.len());
        let mut vars = Vec::with_capacity(domain.len());
        for p in domain.points() {
            means.push(self.mean_at(p));
            vars.push(self.variance_at(p));
        }
        (means, vars)
    }
}

fn solve_alpha(factor: &Cholesky, values: &[f64]) -> Vec<f64> {
    factor.solve(values)
}

/// Fit a posterior from scratch: factorize (K + diag(noise)).
pub fn fit_posterior(kernel: KernelSpec, data: Dataset) -> Result<Posterior> {
    data.validate()?;
    if data.is_empty() {
        return Ok(Posterior { kernel, data, factor: None, alpha: Vec::new() });
    }
    let mut m = build_kernel_matrix(&kernel, &data.points)?;
    for i in 0..data.len() {
        m[(i, i)] += data.noise_variances[i];
    }
    let factor = Cholesky::factor(&m, PSD_JITTER)?;
    let alpha = solve_alpha(&factor, &data.values);
    Ok(Posterior { kernel, data, factor: Some(factor), alpha })
}

/// Extend a posterior with one observation via a rank-one factor extension
/// (quadratic cost). Falls back to a full refit when the Schur pivot is not
/// numerically positive.
pub fn extend_posterior(
    post: &Posterior,
    point: Vec<f64>,
    value: f64,
    noise_variance: f64,
) -> Result<Posterior> {
    if !(noise_variance > 0.0) || !noise_variance.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "observation noise variance must be positive, got {noise_variance}"
        )));
    }
    if !value.is_finite() {
        return Err(Error::NonFinite { context: "observation value" });
    }
    let mut data = post.data.clone();
    if let Some(first) = data.points.first() {
        if first.len() != point.len() {
            return Err(Error::DimensionMismatch { expected: first.len(), got: point.len() });
        }
    }
    data.points.push(point);
    data.values.push(value);
    data.noise_variances.push(noise_variance);

    let Some(factor) = &post.factor else {
        return fit_posterior(post.kernel, data);
    };

    let new_point = data.points.last().unwrap();
    let u: Vec<f64> = post
        .data
        .points
        .iter()
        .map(|p| post.kernel.eval_unchecked(p, new_point))
        .collect();
    let c = post.kernel.eval_unchecked(new_point, new_point) + noise_variance + PSD_JITTER;
    match factor.extend(&u, c) {
        Ok(extended) => {
            let alpha = solve_alpha(&extended, &data.values);
            Ok(Posterior { kernel: post.kernel, data, factor: Some(extended), alpha })
        }
        Err(e) => {
            eprintln!("warning: factor extension failed ({e}); refitting from scratch");
            fit_posterior(post.kernel, data)
        }
    }
}

/// Cached jittered factor of a kernel matrix over a whole domain. Used for
/// prior draws and joint posterior sampling; built once and shared.
#[derive(Debug, Clone)]
pub struct PriorFactor {
    kernel: KernelSpec,
    factor: Cholesky,
}

impl PriorFactor {
    pub fn build(kernel: KernelSpec, domain: &FiniteDomain, cap: usize) -> Result<Self> {
        if domain.len() > cap {
            return Err(Error::DomainTooLarge { points: domain.len(), cap });
        }
        if domain.is_empty() {
            return Err(Error::InvalidParameter("cannot factorize an empty domain".into()));
        }
        let m = build_kernel_matrix(&kernel, domain.points())?;
        let factor = factor_with_escalating_jitter(&m)?;
        Ok(PriorFactor { kernel, factor })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.factor.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.factor.dim() == 0
    }

    /// One zero-mean draw: L z with z standard normal from the given seed.
    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let mut rng = seed_stream(seed);
        let z = standard_normal_vec(&mut rng, self.len());
        self.factor.mul_vec(&z)
    }

    /// As `sample` but drawing from a caller-owned stream.
    pub fn sample_with(&self, rng: &mut impl rand::Rng) -> Vec<f64> {
        let z = standard_normal_vec(rng, self.len());
        self.factor.mul_vec(&z)
    }
}

/// Smooth kernels on fine grids are singular to machine precision, so the
/// jitter scales with the largest diagonal entry and escalates until the
/// factorization succeeds. The final jitter acts as white noise of the same
/// magnitude added to the draw, far below every amplitude used here.
fn factor_with_escalating_jitter(m: &Matrix) -> Result<Cholesky> {
    let max_diag = (0..m.rows()).map(|i| m[(i, i)]).fold(f64::MIN_POSITIVE, f64::max);
    let mut jitter = PSD_JITTER * max_diag;
    let mut last_err = None;
    for _ in 0..7 {
        match Cholesky::factor(m, jitter) {
            Ok(f) => return Ok(f),
            Err(e) => last_err = Some(e),
        }
        jitter *= 100.0;
    }
    Err(last_err.unwrap())
}

/// One draw of a zero-mean GP over the domain, deterministic in
/// (kernel, domain, seed). Rejects domains above `DEFAULT_FACTORIZATION_CAP`.
pub fn sample_prior_function(
    kernel: KernelSpec,
    domain: &FiniteDomain,
    seed: u64,
) -> Result<Vec<f64>> {
    sample_prior_function_with_cap(kernel, domain, seed, DEFAULT_FACTORIZATION_CAP)
}

pub fn sample_prior_function_with_cap(
    kernel: KernelSpec,
    domain: &FiniteDomain,
    seed: u64,
    cap: usize,
) -> Result<Vec<f64>> {
    Ok(PriorFactor::build(kernel, domain, cap)?.sample(seed))
}
