//! Mutual information of noisy observation subsets, greedy maximum-gain
//! estimation, and closed-form growth-rate diagnostics per kernel family.
//!
//! Information is reported in nats throughout.

use crate::error::{Error, Result};
use crate::kernels::Covariance;
use crate::linalg::{symmetric_eigenvalues, Cholesky, Matrix};
use crate::testbed::FiniteDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainMethod {
    ExactBruteforce,
    Greedy,
}

/// Result of a maximum-information-gain search.
#[derive(Debug, Clone)]
pub struct GainEstimate {
    pub value: f64,
    pub subset: Vec<usize>,
    pub method: GainMethod,
    /// Per-step gains of the greedy sequence (empty for brute force).
    pub marginal_gains: Vec<f64>,
}

fn subset_matrix<C: Covariance + ?Sized>(kernel: &C, points: &[Vec<f64>]) -> Matrix {
    let n = points.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval_unchecked(&points[i], &points[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn validate_noise(noise_sigma2: f64) -> Result<()> {
    if !(noise_sigma2 > 0.0) || !noise_sigma2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "observation noise variance must be positive, got {noise_sigma2}"
        )));
    }
    Ok(())
}

/// Mutual information between noisy observations on `points` and the function
/// values there: (1/2) log det(I + K / sigma^2), via the factorization
/// log-determinant.
pub fn mutual_information<C: Covariance + ?Sized>(
    kernel: &C,
    noise_sigma2: f64,
    points: &[Vec<f64>],
) -> Result<f64> {
    validate_noise(noise_sigma2)?;
    if points.is_empty() {
        return Err(Error::InvalidParameter("mutual information needs at least one point".into()));
    }
    let n = points.len();
    let k = subset_matrix(kernel, points);
    let m = Matrix::from_fn(n, n, |i, j| {
        let base = if i == j { 1.0 } else { 0.0 };
        base + k[(i, j)] / noise_sigma2
    });
    // I + PSD/sigma^2 has eigenvalues >= 1, no jitter needed
    let factor = Cholesky::factor(&m, 0.0)?;
    Ok(0.5 * factor.log_det())
}

/// Same quantity through the eigenvalues of K: (1/2) sum log(1 + lambda_i / sigma^2).
pub fn mutual_information_eigen<C: Covariance + ?Sized>(
    kernel: &C,
    noise_sigma2: f64,
    points: &[Vec<f64>],
) -> Result<f64> {
    validate_noise(noise_sigma2)?;
    if points.is_empty() {
        return Err(Error::InvalidParameter("mutual information needs at least one point".into()));
    }
    let k = subset_matrix(kernel, points);
    let eig = symmetric_eigenvalues(&k)?;
    let mut total = 0.0;
    for lambda in eig {
        let arg = 1.0 + lambda / noise_sigma2;
        if !(arg > 0.0) || !arg.is_finite() {
            return Err(Error::NonFinite { context: "mutual information eigenvalue" });
        }
        total += arg.ln();
    }
    Ok(0.5 * total)
}

/// Greedy maximum-information subset of size `budget`: each step adds the
/// point with the largest marginal gain (1/2) log(1 + var / sigma^2), ties to
/// the lowest index. The greedy total is a (1 - 1/e) approximation of the
/// subset-enumeration maximum.
pub fn greedy_gamma<C: Covariance + ?Sized>(
    kernel: &C,
    noise_sigma2: f64,
    domain: &FiniteDomain,
    budget: usize,
) -> Result<GainEstimate> {
    validate_noise(noise_sigma2)?;
    if budget == 0 || budget > domain.len() {
        return Err(Error::InvalidParameter(format!(
            "budget must lie in 1..={} (domain size), got {budget}",
            domain.len()
        )));
    }
    let n = domain.len();
    let prior: Vec<f64> = domain
        .points()
        .iter()
        .map(|p| kernel.eval_unchecked(p, p))
        .collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(budget);
    let mut gains: Vec<f64> = Vec::with_capacity(budget);
    let mut factor: Option<Cholesky> = None;
    let mut total = 0.0;
    for _ in 0..budget {
        let mut best_idx = usize::MAX;
        let mut best_gain = f64::NEG_INFINITY;
        for cand in 0..n {
            if chosen.contains(&cand) {
                continue;
            }
            let var = posterior_variance(kernel, domain, &chosen, factor.as_ref(), prior[cand], cand);
            let gain = 0.5 * (1.0 + var / noise_sigma2).ln();
            if gain > best_gain {
                best_gain = gain;
                best_idx = cand;
            }
        }
        let u: Vec<f64> = chosen
            .iter()
            .map(|&i| kernel.eval_unchecked(domain.point(i), domain.point(best_idx)))
            .collect();
        let c = prior[best_idx] + noise_sigma2;
        factor = Some(match factor {
            None => Cholesky::factor(&Matrix::from_fn(1, 1, |_, _| c), 0.0)?,
            Some(f) => f.extend(&u, c)?,
        });
        chosen.push(best_idx);
        gains.push(best_gain);
        total += best_gain;
    }
    Ok(GainEstimate { value: total, subset: chosen, method: GainMethod::Greedy, marginal_gains: gains })
}

fn posterior_variance<C: Covariance + ?Sized>(
    kernel: &C,
    domain: &FiniteDomain,
    chosen: &[usize],
    factor: Option<&Cholesky>,
    prior: f64,
    cand: usize,
) -> f64 {
    match factor {
        None => prior,
        Some(f) => {
            let k: Vec<f64> = chosen
                .iter()
                .map(|&i| kernel.eval_unchecked(domain.point(i), domain.point(cand)))
                .collect();
            let w = f.forward(&k);
            (prior - w.iter().map(|v| v * v).sum::<f64>()).max(0.0)
        }
    }
}

/// Exhaustive maximum over all subsets of size `budget`. Feasible only for
/// small domains; the enumeration is capped at two million subsets.
pub fn exact_gamma<C: Covariance + ?Sized>(
    kernel: &C,
    noise_sigma2: f64,
    domain: &FiniteDomain,
    budget: usize,
) -> Result<GainEstimate> {
    validate_noise(noise_sigma2)?;
    let n = domain.len();
    if budget == 0 || budget > n {
        return Err(Error::InvalidParameter(format!(
            "budget must lie in 1..={n} (domain size), got {budget}"
        )));
    }
    let combos = binomial(n, budget);
    const ENUMERATION_LIMIT: u128 = 2_000_000;
    if combos > ENUMERATION_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "exhaustive search over {combos} subsets exceeds the {ENUMERATION_LIMIT} limit"
        )));
    }
    let mut best_value = f64::NEG_INFINITY;
    let mut best_subset = Vec::new();
    let mut indices: Vec<usize> = (0..budget).collect();
    loop {
        let points: Vec<Vec<f64>> = indices.iter().map(|&i| domain.point(i).to_vec()).collect();
        let value = mutual_information(kernel, noise_sigma2, &points)?;
        if value > best_value {
            best_value = value;
            best_subset = indices.clone();
        }
        // advance to the next combination in lexicographic order
        let mut i = budget;
        loop {
            if i == 0 {
                return Ok(GainEstimate {
                    value: best_value,
                    subset: best_subset,
                    method: GainMethod::ExactBruteforce,
                    marginal_gains: Vec::new(),
                });
            }
            i -= 1;
            if indices[i] != i + n - budget {
                break;
            }
        }
        indices[i] += 1;
        for j in (i + 1)..budget {
            indices[j] = indices[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    result
}

/// Kernel family for the closed-form gain bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundFamily {
    Linear { d: usize },
    SquaredExponential { d: usize },
    Matern { d: usize, nu: f64 },
}

/// Unspecified absolute constants in the closed forms. Defaults of 1 make the
/// output a shape-only diagnostic, never a certified bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundConstants {
    pub c1: f64,
    pub c2: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants { c1: 1.0, c2: 1.0 }
    }
}

/// Closed-form information-gain growth diagnostics:
/// linear: C1 tau^2 d log(eT) + C2 log(1 + tau^2);
/// squared exponential: C1 tau^2 (log T)^(d+1) + C2 log(1 + tau^2);
/// Matern (nu > 1): C1 tau^2 T^(d(d+1)/(2 nu + d(d+1))) log T + C2 log(1 + tau^2).
pub fn prop_gain_bound(
    family: BoundFamily,
    tau2: f64,
    horizon: usize,
    constants: BoundConstants,
) -> Result<f64> {
    if !(tau2 > 0.0) || !tau2.is_finite() {
        return Err(Error::InvalidParameter(format!("amplitude must be positive, got {tau2}")));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let t = horizon as f64;
    let tail = constants.c2 * (1.0 + tau2).ln();
    let lead = match family {
        BoundFamily::Linear { d } => {
            require_dim(d)?;
            constants.c1 * tau2 * d as f64 * (std::f64::consts::E * t).ln()
        }
        BoundFamily::SquaredExponential { d } => {
            require_dim(d)?;
            constants.c1 * tau2 * t.ln().powi(d as i32 + 1)
        }
        BoundFamily::Matern { d, nu } => {
            require_dim(d)?;
            if !(nu > 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "the Matern gain bound requires smoothness greater than 1, got {nu}"
                )));
            }
            let dd = d as f64;
            let exponent = dd * (dd + 1.0) / (2.0 * nu + dd * (dd + 1.0));
            constants.c1 * tau2 * t.powf(exponent) * t.ln()
        }
    };
    Ok(lead + tail)
}

fn require_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(())
}
