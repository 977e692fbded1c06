//! The DeltaBO algorithm: a frozen source posterior, residual observations of
//! the difference function, and a combined upper-confidence acquisition.
//!
//! The source posterior is computed once from the source dataset and never
//! touched again; each target observation is converted to a residual
//! observation of the difference function, whose effective noise is inflated
//! by the source posterior's variance at the query point. Acquisition maximizes
//! the combined mean plus a confidence width over the summed variances.

use std::sync::Arc;

use rand_chacha::ChaCha12Rng;

use crate::baselines::{argmax_lowest, Strategy};
use crate::error::{Error, Result};
use crate::gp::{extend_posterior, fit_posterior, Dataset, Posterior};
use crate::kernels::{Covariance, KernelSpec, PSD_JITTER};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::{derive_stream, StreamKind};
use crate::testbed::{FiniteDomain, Objective};
use crate::trace::{run_rounds, RegretTrace};

/// Frozen source posterior tabulated over the domain.
#[derive(Debug, Clone)]
pub struct SourceModel {
    mu: Vec<f64>,
    var: Vec<f64>,
    source_noise: f64,
    n_source: usize,
}

impl SourceModel {
    /// Evaluate an already-fitted source posterior at every domain point.
    pub fn from_posterior(
        post: &Posterior,
        domain: &FiniteDomain,
        source_noise: f64,
        n_source: usize,
    ) -> Self {
        let (mu, var) = post.evaluate_on(domain);
        SourceModel { mu, var, source_noise, n_source }
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    pub fn source_noise(&self) -> f64 {
        self.source_noise
    }

    pub fn n_source(&self) -> usize {
        self.n_source
    }
}

/// Fit the source posterior once and tabulate its mean and variance over the
/// whole domain. Later rounds perform no source-side linear algebra.
pub fn build_source_model(
    kernel_g: KernelSpec,
    source_data: &Dataset,
    domain: &FiniteDomain,
) -> Result<SourceModel> {
    if source_data.is_empty() {
        return Err(Error::InvalidParameter(
            "source dataset is empty; run a non-transfer baseline instead".into(),
        ));
    }
    let noise = source_data.noise_variances[0];
    if source_data.noise_variances.iter().any(|v| *v != noise) {
        return Err(Error::InvalidParameter(
            "source observations must share a single noise variance".into(),
        ));
    }
    let post = fit_posterior(kernel_g, source_data.clone())?;
    Ok(SourceModel::from_posterior(&post, domain, noise, source_data.len()))
}

/// Residual observation of the difference function: the target observation
/// minus the frozen source mean at the query point. Pair it with noise
/// variance `source.var()[index] + sigma2` when extending the difference
/// posterior.
pub fn residual(y: f64, source: &SourceModel, index: usize) -> f64 {
    y - source.mu[index]
}

/// Confidence multiplier 2 log(|D| t^2 pi^2 / (6 rho)).
pub fn beta_t(t: usize, domain_size: usize, rho: f64) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameter("beta schedule needs t >= 1".into()));
    }
    if domain_size == 0 {
        return Err(Error::InvalidParameter("beta schedule needs a nonempty domain".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "error probability must lie in (0, 1), got {rho}"
        )));
    }
    let t = t as f64;
    let d = domain_size as f64;
    Ok(2.0 * (d * t * t * std::f64::consts::PI.powi(2) / (6.0 * rho)).ln())
}

/// Either the growing schedule or a fixed constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    Constant(f64),
    Schedule { rho: f64 },
}

impl BetaSchedule {
    pub fn value_at(&self, t: usize, domain_size: usize) -> Result<f64> {
        match self {
            BetaSchedule::Constant(b) => {
                if !(*b > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "constant beta must be positive, got {b}"
                    )));
                }
                Ok(*b)
            }
            BetaSchedule::Schedule { rho } => beta_t(t, domain_size, *rho),
        }
    }
}

/// How the difference posterior treats its noise diagonal: one entry per
/// residual observation (the algorithmic reading) or a single test-point
/// dependent value (the closed-form reading).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaNoiseMode {
    #[default]
    PerObservation,
    PerTestPoint,
}

/// Variance reported for the difference function before any residual has been
/// observed: the source-plus-noise convention used by the acquisition rule, or
/// the kernel diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaPriorVariance {
    #[default]
    SourcePlusNoise,
    KernelDiag,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DeltaOptions {
    pub noise_mode: DeltaNoiseMode,
    pub prior_variance: DeltaPriorVariance,
}

/// The difference-function side of DeltaBO: residual observations and the
/// posterior built from them.
#[derive(Debug, Clone)]
pub struct DeltaState {
    kernel_delta: KernelSpec,
    sigma2: f64,
    options: DeltaOptions,
    post: Posterior,
    residual_indices: Vec<usize>,
    residual_values: Vec<f64>,
    residual_noises: Vec<f64>,
}

impl DeltaState {
    pub fn new(kernel_delta: KernelSpec, sigma2: f64, options: DeltaOptions) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "target noise variance must be positive, got {sigma2}"
            )));
        }
        Ok(DeltaState {
            kernel_delta,
            sigma2,
            options,
            post: fit_posterior(kernel_delta, Dataset::empty())?,
            residual_indices: Vec::new(),
            residual_values: Vec::new(),
            residual_noises: Vec::new(),
        })
    }

    pub fn observation_count(&self) -> usize {
        self.residual_values.len()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Fold one target observation into the difference posterior.
    pub fn observe(
        &mut self,
        source: &SourceModel,
        domain: &FiniteDomain,
        index: usize,
        y: f64,
    ) -> Result<()> {
        let r = residual(y, source, index);
        let noise = source.var[index] + self.sigma2;
        self.residual_indices.push(index);
        self.residual_values.push(r);
        self.residual_noises.push(noise);
        if self.options.noise_mode == DeltaNoiseMode::PerObservation {
            self.post = extend_posterior(&self.post, domain.point(index).to_vec(), r, noise)?;
        }
        Ok(())
    }

    /// Difference mean and variance at every domain point.
    pub fn mean_variance_on(
        &self,
        source: &SourceModel,
        domain: &FiniteDomain,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = domain.len();
        if self.residual_values.is_empty() {
            let mu = vec![0.0; n];
            let var = match self.options.prior_variance {
                DeltaPriorVariance::SourcePlusNoise => {
                    source.var.iter().map(|v| v + self.sigma2).collect()
                }
                DeltaPriorVariance::KernelDiag => domain
                    .points()
                    .iter()
                    .map(|p| self.kernel_delta.eval_unchecked(p, p))
                    .collect(),
            };
            return Ok((mu, var));
        }
        match self.options.noise_mode {
            DeltaNoiseMode::PerObservation => {
                let mut mu = Vec::with_capacity(n);
                let mut var = Vec::with_capacity(n);
                for p in domain.points() {
                    let (m, v) = self.post.mean_and_variance_at(p);
                    mu.push(m);
                    var.push(v);
                }
                Ok((mu, var))
            }
            DeltaNoiseMode::PerTestPoint => self.per_test_point_eval(source, domain),
        }
    }

    /// Closed-form reading: every test point solves against
    /// (K + (var_g(x) + sigma^2) I), so a fresh small factorization per point.
    fn per_test_point_eval(
        &self,
        source: &SourceModel,
        domain: &FiniteDomain,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let t = self.residual_values.len();
        let train: Vec<&[f64]> = self
            .residual_indices
            .iter()
            .map(|&i| domain.point(i))
            .collect();
        let mut gram = Matrix::zeros(t, t);
        for i in 0..t {
            for j in i..t {
                let v = self.kernel_delta.eval_unchecked(train[i], train[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let mut mu = Vec::with_capacity(domain.len());
        let mut var = Vec::with_capacity(domain.len());
        for (x_idx, p) in domain.points().iter().enumerate() {
            let noise = source.var[x_idx] + self.sigma2;
            let mut m = gram.clone();
            for i in 0..t {
                m[(i, i)] += noise;
            }
            let factor = Cholesky::factor(&m, PSD_JITTER)?;
            let k: Vec<f64> = train
                .iter()
                .map(|q| self.kernel_delta.eval_unchecked(q, p))
                .collect();
            let alpha = factor.solve(&self.residual_values);
            m_push(&mut mu, &k, &alpha);
            let w = factor.forward(&k);
            let prior = self.kernel_delta.eval_unchecked(p, p);
            var.push((prior - w.iter().map(|v| v * v).sum::<f64>()).max(0.0));
        }
        Ok((mu, var))
    }
}

fn m_push(mu: &mut Vec<f64>, k: &[f64], alpha: &[f64]) {
    mu.push(k.iter().zip(alpha).map(|(a, b)| a * b).sum());
}

/// Acquisition rule: argmax of combined mean plus the confidence width over
/// the summed source and difference variances. Ties break to the lowest index.
pub fn acquire(
    source: &SourceModel,
    state: &DeltaState,
    domain: &FiniteDomain,
    beta: f64,
) -> Result<usize> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be nonnegative, got {beta}")));
    }
    let (mu_delta, var_delta) = state.mean_variance_on(source, domain)?;
    let sqrt_beta = beta.sqrt();
    let scores = (0..domain.len()).map(|i| {
        source.mu[i] + mu_delta[i] + sqrt_beta * (source.var[i] + var_delta[i]).sqrt()
    });
    Ok(argmax_lowest(scores))
}

/// DeltaBO as a strategy: the source model stays frozen, each observation
/// extends the difference posterior.
pub struct DeltaBo {
    domain: Arc<FiniteDomain>,
    source: Arc<SourceModel>,
    state: DeltaState,
    beta: BetaSchedule,
}

impl DeltaBo {
    pub fn new(
        domain: Arc<FiniteDomain>,
        source: Arc<SourceModel>,
        kernel_delta: KernelSpec,
        sigma2: f64,
        beta: BetaSchedule,
        options: DeltaOptions,
    ) -> Result<Self> {
        Ok(DeltaBo {
            domain,
            source,
            state: DeltaState::new(kernel_delta, sigma2, options)?,
            beta,
        })
    }

    pub fn state(&self) -> &DeltaState {
        &self.state
    }

    pub fn source(&self) -> &SourceModel {
        &self.source
    }
}

impl Strategy for DeltaBo {
    fn name(&self) -> &str {
        "deltabo"
    }

    fn select_next(&mut self, round: usize, _rng: &mut ChaCha12Rng) -> Result<usize> {
        let beta = self.beta.value_at(round, self.domain.len())?;
        acquire(&self.source, &self.state, &self.domain, beta)
    }

    fn observe(&mut self, index: usize, value: f64) -> Result<()> {
        self.state.observe(&self.source, &self.domain, index, value)
    }
}

/// Run DeltaBO for `horizon` rounds against an objective. Initial observations
/// (shared across algorithms by the harness) prime the difference posterior as
/// residuals before the first round.
#[allow(clippy::too_many_arguments)]
pub fn run_deltabo(
    objective: &mut dyn Objective,
    source: Arc<SourceModel>,
    kernel_delta: KernelSpec,
    horizon: usize,
    sigma2: f64,
    beta: BetaSchedule,
    initial_observations: &[(usize, f64)],
    seed: u64,
    options: DeltaOptions,
) -> Result<RegretTrace> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let domain = objective.domain().clone();
    let mut strategy = DeltaBo::new(domain, source, kernel_delta, sigma2, beta, options)?;
    for &(idx, y) in initial_observations {
        strategy.observe(idx, y)?;
    }
    let mut rng = derive_stream(seed, 0, StreamKind::Algorithm(0));
    Ok(run_rounds("deltabo", 0, &mut strategy, objective, horizon, &mut rng))
}
