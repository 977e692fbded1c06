//! Covariance functions and kernel-matrix assembly.
//!
//! Three stationary-or-linear families cover every surrogate in the toolkit:
//! squared exponential, Matern with smoothness 5/2, and the linear kernel.
//! A kernel is an amplitude `tau2` times a normalized form, so amplitude
//! rescaling is exact by construction.

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};

/// Jitter added to diagonals before positive-definiteness checks.
pub const PSD_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Linear,
    SquaredExponential,
    /// Matern with smoothness fixed at 5/2.
    Matern52,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Linear => "linear",
            KernelFamily::SquaredExponential => "se",
            KernelFamily::Matern52 => "matern52",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelFamily::Linear),
            "se" => Ok(KernelFamily::SquaredExponential),
            "matern52" => Ok(KernelFamily::Matern52),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel family '{other}' (expected linear | se | matern52)"
            ))),
        }
    }
}

/// A covariance function: family, amplitude τ², and isotropic lengthscale ℓ
/// (ignored by the linear kernel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub amplitude_tau2: f64,
    pub lengthscale_ell: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, amplitude_tau2: f64, lengthscale_ell: f64) -> Result<Self> {
        if !(amplitude_tau2 > 0.0) || !amplitude_tau2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kernel amplitude must be positive and finite, got {amplitude_tau2}"
            )));
        }
        if !(lengthscale_ell > 0.0) || !lengthscale_ell.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "kernel lengthscale must be positive and finite, got {lengthscale_ell}"
            )));
        }
        Ok(KernelSpec { family, amplitude_tau2, lengthscale_ell })
    }

    pub fn se(amplitude_tau2: f64, lengthscale_ell: f64) -> Result<Self> {
        Self::new(KernelFamily::SquaredExponential, amplitude_tau2, lengthscale_ell)
    }

    pub fn matern52(amplitude_tau2: f64, lengthscale_ell: f64) -> Result<Self> {
        Self::new(KernelFamily::Matern52, amplitude_tau2, lengthscale_ell)
    }

    pub fn linear(amplitude_tau2: f64) -> Result<Self> {
        Self::new(KernelFamily::Linear, amplitude_tau2, 1.0)
    }
}

/// Anything usable as a covariance function over points.
pub trait Covariance {
    /// k(x, x') without input validation (callers validate once per batch).
    fn eval_unchecked(&self, x: &[f64], x_prime: &[f64]) -> f64;

    /// Human-readable description for reports.
    fn describe(&self) -> String;
}

impl Covariance for KernelSpec {
    fn eval_unchecked(&self, x: &[f64], x_prime: &[f64]) -> f64 {
        match self.family {
            KernelFamily::Linear => {
                let dot: f64 = x.iter().zip(x_prime).map(|(a, b)| a * b).sum();
                self.amplitude_tau2 * dot
            }
            KernelFamily::SquaredExponential => {
                let d2: f64 = x
                    .iter()
                    .zip(x_prime)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let ell = self.lengthscale_ell;
                self.amplitude_tau2 * (-d2 / (2.0 * ell * ell)).exp()
            }
            KernelFamily::Matern52 => {
                let d2: f64 = x
                    .iter()
                    .zip(x_prime)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let r = d2.sqrt();
                let ell = self.lengthscale_ell;
                let sqrt5_r = 5.0f64.sqrt() * r / ell;
                self.amplitude_tau2
                    * (1.0 + sqrt5_r + 5.0 * d2 / (3.0 * ell * ell))
                    * (-sqrt5_r).exp()
            }
        }
    }

    fn describe(&self) -> String {
        format!(
            "{}(tau2={}, ell={})",
            self.family.name(),
            self.amplitude_tau2,
            self.lengthscale_ell
        )
    }
}

/// Sum of two kernels; the covariance of a sum of independent GPs.
#[derive(Debug, Clone, Copy)]
pub struct SumKernel(pub KernelSpec, pub KernelSpec);

impl Covariance for SumKernel {
    fn eval_unchecked(&self, x: &[f64], x_prime: &[f64]) -> f64 {
        self.0.eval_unchecked(x, x_prime) + self.1.eval_unchecked(x, x_prime)
    }

    fn describe(&self) -> String {
        format!("{} + {}", self.0.describe(), self.1.describe())
    }
}

fn validate_pair(x: &[f64], x_prime: &[f64]) -> Result<()> {
    if x.len() != x_prime.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: x_prime.len() });
    }
    if x.iter().chain(x_prime).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "kernel input point" });
    }
    Ok(())
}

/// Evaluate k(x, x') with input validation.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    validate_pair(x, x_prime)?;
    Ok(spec.eval_unchecked(x, x_prime))
}

/// Assemble the n x n kernel matrix over `points`. Each off-diagonal entry is
/// computed once and mirrored, so the result is exactly symmetric.
pub fn build_kernel_matrix<C: Covariance + ?Sized>(
    kernel: &C,
    points: &[Vec<f64>],
) -> Result<Matrix> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("kernel matrix needs at least one point".into()));
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "kernel input point" });
        }
    }
    let n = points.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval_unchecked(&points[i], &points[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Check positive semidefiniteness by attempting a jittered factorization.
pub fn check_psd(matrix: &Matrix) -> Result<()> {
    Cholesky::factor(matrix, PSD_JITTER).map(|_| ())
}
