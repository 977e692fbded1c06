//! Acquisition strategies behind one interface: the classical non-transfer
//! quartet (GP-UCB, EI, PI, TS) and two transfer stand-ins reconstructed from
//! prose descriptions (`env_gp_style`, `diff_gp_style`). The stand-in names
//! carry the `_style` suffix deliberately: they are reconstructions, not
//! ports of the original implementations.

use std::sync::Arc;

use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::gp::{extend_posterior, fit_posterior, Dataset, Posterior, PriorFactor};
use crate::kernels::{Covariance, KernelSpec};
use crate::rng::{normal_cdf, normal_pdf, standard_normal_vec};
use crate::testbed::FiniteDomain;
use crate::transfer::{acquire, BetaSchedule, DeltaOptions, DeltaState, SourceModel};

/// A sequential decision rule: pick a domain index each round, then absorb the
/// observation. Selection must be deterministic given the state and the rng
/// stream position.
pub trait Strategy {
    fn name(&self) -> &str;
    fn select_next(&mut self, round: usize, rng: &mut ChaCha12Rng) -> Result<usize>;
    fn observe(&mut self, index: usize, value: f64) -> Result<()>;
}

/// Argmax with ties broken to the lowest index.
pub fn argmax_lowest(scores: impl IntoIterator<Item = f64>) -> usize {
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, s) in scores.into_iter().enumerate() {
        if s > best {
            best = s;
            best_i = i;
        }
    }
    best_i
}

/// UCB rule: argmax of mean + sqrt(beta) * sd.
pub fn gp_ucb_select(post: &Posterior, domain: &FiniteDomain, beta: f64) -> usize {
    let sqrt_beta = beta.sqrt();
    argmax_lowest(domain.points().iter().map(|p| {
        let (m, v) = post.mean_and_variance_at(p);
        m + sqrt_beta * v.sqrt()
    }))
}

/// Expected improvement over `best_so_far` with jitter `xi`.
pub fn ei_score(mean: f64, sd: f64, best_so_far: f64, xi: f64) -> f64 {
    let gap = mean - best_so_far - xi;
    if sd <= 0.0 {
        return gap.max(0.0);
    }
    let z = gap / sd;
    gap * normal_cdf(z) + sd * normal_pdf(z)
}

/// Probability of improvement over `best_so_far` with jitter `xi`.
pub fn pi_score(mean: f64, sd: f64, best_so_far: f64, xi: f64) -> f64 {
    let gap = mean - best_so_far - xi;
    if sd <= 0.0 {
        return if gap > 0.0 { 1.0 } else { 0.0 };
    }
    normal_cdf(gap / sd)
}

pub fn ei_select(post: &Posterior, domain: &FiniteDomain, best_so_far: f64, xi: f64) -> usize {
    argmax_lowest(domain.points().iter().map(|p| {
        let (m, v) = post.mean_and_variance_at(p);
        ei_score(m, v.sqrt(), best_so_far, xi)
    }))
}

pub fn pi_select(post: &Posterior, domain: &FiniteDomain, best_so_far: f64, xi: f64) -> usize {
    argmax_lowest(domain.points().iter().map(|p| {
        let (m, v) = post.mean_and_variance_at(p);
        pi_score(m, v.sqrt(), best_so_far, xi)
    }))
}

/// Standalone TS selection: factorizes the posterior's kernel over the domain
/// on the fly. Prefer building one `PriorFactor` per experiment and calling
/// [`GpTs`] when sampling repeatedly.
pub fn ts_select(
    post: &Posterior,
    domain: &FiniteDomain,
    rng: &mut ChaCha12Rng,
    cap: usize,
) -> Result<usize> {
    let factor = PriorFactor::build(*post.kernel(), domain, cap)?;
    let observed: Vec<usize> = post
        .training()
        .points
        .iter()
        .map(|p| {
            domain
                .points()
                .iter()
                .position(|q| q == p)
                .ok_or_else(|| {
                    Error::InvalidParameter(
                        "posterior training point is not a domain point".into(),
                    )
                })
        })
        .collect::<Result<_>>()?;
    ts_sample_argmax(domain, post, &observed, &factor, rng)
}

/// Argmax of one joint posterior sample over the domain.
///
/// The sample is a prior draw conditioned on the observations (Matheron's
/// rule): f(x) = f0(x) + k(x, X)(K + D)^-1 (y - f0(X) - e), with f0 a prior
/// draw over the domain and e a noise draw. This is an exact joint posterior
/// sample through the same jittered factorization as prior sampling, and the
/// factorization is reused across calls.
pub fn ts_sample_argmax(
    domain: &FiniteDomain,
    post: &Posterior,
    observed_indices: &[usize],
    factor: &PriorFactor,
    rng: &mut ChaCha12Rng,
) -> Result<usize> {
    let mut sample = factor.sample_with(rng);
    let data = post.training();
    if !data.is_empty() {
        if observed_indices.len() != data.len() {
            return Err(Error::InvalidParameter(format!(
                "{} observed indices for a posterior with {} observations",
                observed_indices.len(),
                data.len()
            )));
        }
        let noise_draws = standard_normal_vec(rng, data.len());
        let target: Vec<f64> = (0..data.len())
            .map(|j| {
                data.values[j]
                    - sample[observed_indices[j]]
                    - data.noise_variances[j].sqrt() * noise_draws[j]
            })
            .collect();
        let weights = post.solve_gram(&target).expect("nonempty posterior has a factor");
        let kernel = *post.kernel();
        for (i, s) in sample.iter_mut().enumerate() {
            let x = domain.point(i);
            let mut corr = 0.0;
            for (j, w) in weights.iter().enumerate() {
                corr += kernel.eval_unchecked(&data.points[j], x) * w;
            }
            *s += corr;
        }
    }
    Ok(argmax_lowest(sample.iter().copied()))
}

/// GP-UCB on target observations only.
pub struct GpUcb {
    domain: Arc<FiniteDomain>,
    post: Posterior,
    noise: f64,
    beta: BetaSchedule,
}

impl GpUcb {
    pub fn new(
        domain: Arc<FiniteDomain>,
        kernel_f: KernelSpec,
        noise: f64,
        beta: BetaSchedule,
    ) -> Result<Self> {
        Ok(GpUcb { domain, post: fit_posterior(kernel_f, Dataset::empty())?, noise, beta })
    }
}

impl Strategy for GpUcb {
    fn name(&self) -> &str {
        "gp_ucb"
    }

    fn select_next(&mut self, round: usize, _rng: &mut ChaCha12Rng) -> Result<usize> {
        let beta = self.beta.value_at(round, self.domain.len())?;
        Ok(gp_ucb_select(&self.post, &self.domain, beta))
    }

    fn observe(&mut self, index: usize, value: f64) -> Result<()> {
        self.post =
            extend_posterior(&self.post, self.domain.point(index).to_vec(), value, self.noise)?;
        Ok(())
    }
}

/// Improvement-based strategies share everything except the score.
enum ImprovementKind {
    Expected,
    Probability,
}

struct Improvement {
    domain: Arc<FiniteDomain>,
    post: Posterior,
    noise: f64,
    xi: f64,
    best: Option<f64>,
    kind: ImprovementKind,
}

impl Improvement {
    fn select(&self) -> Result<usize> {
        let best = self.best.ok_or_else(|| {
            Error::InvalidParameter(
                "improvement strategies need at least one prior observation".into(),
            )
        })?;
        Ok(match self.kind {
            ImprovementKind::Expected => ei_select(&self.post, &self.domain, best, self.xi),
            ImprovementKind::Probability => pi_select(&self.post, &self.domain, best, self.xi),
        })
    }

    fn absorb(&mut self, index: usize, value: f64) -> Result<()> {
        self.post =
            extend_posterior(&self.post, self.domain.point(index).to_vec(), value, self.noise)?;
        self.best = Some(self.best.map_or(value, |b| b.max(value)));
        Ok(())
    }
}

pub struct GpEi(Improvement);

impl GpEi {
    pub fn new(domain: Arc<FiniteDomain>, kernel_f: KernelSpec, noise: f64, xi: f64) -> Result<Self> {
        Ok(GpEi(Improvement {
            domain,
            post: fit_posterior(kernel_f, Dataset::empty())?,
            noise,
            xi,
            best: None,
            kind: ImprovementKind::Expected,
        }))
    }
}

impl Strategy for GpEi {
    fn name(&self) -> &str {
        "gp_ei"
    }
    fn select_next(&mut self, _round: usize, _rng: &mut ChaCha12Rng) -> Result<usize> {
        self.0.select()
    }
    fn observe(&mut self, index: usize, value: f64) -> Result<()> {
        self.0.absorb(index, value)
    }
}

pub struct GpPi(Improvement);

impl GpPi {
    pub fn new(domain: Arc<FiniteDomain>, kernel_f: KernelSpec, noise: f64, xi: f64) -> Result<Self> {
        Ok(GpPi(Improvement {
            domain,
            post: fit_posterior(kernel_f, Dataset::empty())?,
            noise,
            xi,
            best: None,
            kind: ImprovementKind::Probability,
        }))
    }
}

impl Strategy for GpPi {
    fn name(&self) -> &str {
        "gp_pi"
    }
    fn select_next(&mut self, _round: usize, _rng: &mut ChaCha12Rng) -> Result<usize> {
        self.0.select()
    }
    fn observe(&mut self, index: usize, value: f64) -> Result<()> {
        self.0.absorb(index, value)
    }
}

/// Thompson sampling with a shared domain factorization.
pub struct GpTs {
    domain: Arc<FiniteDomain>,
    post: Posterior,
    noise: f64,
    factor: Arc<PriorFactor>,
    observed: Vec<usize>,
}

impl GpTs {
    pub fn new(
        domain: Arc<FiniteDomain>,
        noise: f64,
        factor: Arc<PriorFactor>,
    ) -> Result<Self> {
        if factor.len() != domain.len() {
            return Err(Error::InvalidParameter(format!(
                "prior factor covers {} points but the domain has {}",
                factor.len(),
                domain.len()
            )));
        }
        let post = fit_posterior(*factor.kernel(), Dataset::empty())?;
        Ok(GpTs { domain, post, noise, factor, observed: Vec::new() })
    }
}

impl Strategy for GpTs {
    fn name(&self) -> &str {
        "gp_ts"
    }

    fn select_next(&mut self, _round: usize, rng: &mut ChaCha12Rng) -> Result<usize> {
        ts_sample_argmax(&self.domain, &self.post, &self.observed, &self.factor, rng)
    }

    fn observe(&mut self, index: usize, value: f64) -> Result<()> {
        self.post =
            extend_posterior(&self.post, self.domain.point(index).to_vec(), value, self.noise)?;
        self.observed.push(index);
        Ok(())
    }
}

/// Env-style transfer stand-in: one GP over the union of source and target
/// observations, with every source observation's noise inflated to discount
/// the task gap.
pub struct EnvGp {
    domain: Arc<FiniteDomain>,
    post: Posterior,
    noise: f64,
    beta: BetaSchedule,
}

impl EnvGp {
    pub fn new(
        domain: Arc<FiniteDomain>,
        kernel_f: KernelSpec,
        source_data: &Dataset,
        noise_inflation: f64,
        sigma2: f64,
        beta: BetaSchedule,
    ) -> Result<Self> {
        if !(noise_inflation >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "source noise inflation must be nonnegative, got {noise_inflation}"
            )));
        }
        source_data.validate()?;
        let inflated = Dataset::new(
            source_data.points.clone(),
            source_data.values.clone(),
            source_data.noise_variances.iter().map(|v| v + noise_inflation).collect(),
        )?;
        let post = fit_posterior(kernel_f, inflated)?;
        Ok(EnvGp { domain, post, noise: sigma2, beta })
    }
}

impl Strategy for EnvGp {
    fn name(&self) -> &str {
        "env_gp_style"
    }

    fn select_next(&mut self, round: usize, _rng: &mut ChaCha12Rng) -> Result<usize> {
        let beta = self.beta.value_at(round, self.domain.len())?;
        Ok(gp_ucb_select(&self.post, &self.domain, beta))
    }

    fn observe(&mut self, index: usize, value: f64) -> Result<()> {
        self.post =
            extend_posterior(&self.post, self.domain.point(index).to_vec(), value, self.noise)?;
        Ok(())
    }
}

/// Diff-style transfer stand-in: the residual pipeline constrained to one
/// shared kernel for source, target, and difference, with the documented
/// inefficiency of re-estimating the source bias after every observation.
/// Each round refits the difference posterior from scratch over all residuals
/// and recomputes the source prediction at every source input.
pub struct DiffGp {
    domain: Arc<FiniteDomain>,
    source: SourceModel,
    source_post: Posterior,
    source_points: Vec<Vec<f64>>,
    kernel_shared: KernelSpec,
    sigma2: f64,
    beta: BetaSchedule,
    state: DeltaState,
    residuals: Vec<(usize, f64, f64)>,
    /// Recomputed each round; kept so the per-round source touching has an
    /// observable product.
    pub last_source_predictions: Vec<f64>,
}

impl DiffGp {
    pub fn new(
        domain: Arc<FiniteDomain>,
        kernel_shared: KernelSpec,
        source_data: &Dataset,
        sigma2: f64,
        beta: BetaSchedule,
    ) -> Result<Self> {
        if source_data.is_empty() {
            return Err(Error::InvalidParameter(
                "diff_gp_style needs a nonempty source dataset".into(),
            ));
        }
        let source_post = fit_posterior(kernel_shared, source_data.clone())?;
        let source = SourceModel::from_posterior(
            &source_post,
            &domain,
            source_data.noise_variances[0],
            source_data.len(),
        );
        Ok(DiffGp {
            domain,
            source,
            source_post,
            source_points: source_data.points.clone(),
            kernel_shared,
            sigma2,
            beta,
            state: DeltaState::new(kernel_shared, sigma2, DeltaOptions::default())?,
            residuals: Vec::new(),
            last_source_predictions: Vec::new(),
        })
    }
}

impl Strategy for DiffGp {
    fn name(&self) -> &str {
        "diff_gp_style"
    }

    fn select_next(&mut self, round: usize, _rng: &mut ChaCha12Rng) -> Result<usize> {
        let beta = self.beta.value_at(round, self.domain.len())?;
        acquire(&self.source, &self.state, &self.domain, beta)
    }

    fn observe(&mut self, index: usize, value: f64) -> Result<()> {
        let r = crate::transfer::residual(value, &self.source, index);
        let noise = self.source.var()[index] + self.sigma2;
        self.residuals.push((index, r, noise));

        // full refit over all residuals, cubic in their count
        let mut state = DeltaState::new(self.kernel_shared, self.sigma2, DeltaOptions::default())?;
        for &(idx, res, _) in &self.residuals {
            // re-derive the stored residual: observe() expects the raw target value
            state.observe(&self.source, &self.domain, idx, res + self.source.mu()[idx])?;
        }
        self.state = state;

        // touch every source prediction, the cost the stand-in is documented
        // to pay per round
        self.last_source_predictions = self
            .source_points
            .iter()
            .map(|p| self.source_post.mean_at(p))
            .collect();
        Ok(())
    }
}

/// Run the env-style stand-in for `horizon` rounds against an objective.
#[allow(clippy::too_many_arguments)]
pub fn env_gp_run(
    objective: &mut dyn crate::testbed::Objective,
    source_data: &Dataset,
    kernel_f: KernelSpec,
    horizon: usize,
    sigma2: f64,
    beta: BetaSchedule,
    noise_inflation: f64,
    initial_observations: &[(usize, f64)],
    seed: u64,
) -> Result<crate::trace::RegretTrace> {
    let domain = objective.domain().clone();
    let mut strategy = EnvGp::new(domain, kernel_f, source_data, noise_inflation, sigma2, beta)?;
    for &(idx, y) in initial_observations {
        strategy.observe(idx, y)?;
    }
    let mut rng = crate::rng::derive_stream(seed, 0, crate::rng::StreamKind::Algorithm(1));
    Ok(crate::trace::run_rounds(
        "env_gp_style",
        0,
        &mut strategy,
        objective,
        horizon,
        &mut rng,
    ))
}

/// Run the diff-style stand-in for `horizon` rounds against an objective.
#[allow(clippy::too_many_arguments)]
pub fn diff_gp_run(
    objective: &mut dyn crate::testbed::Objective,
    source_data: &Dataset,
    kernel_shared: KernelSpec,
    horizon: usize,
    sigma2: f64,
    beta: BetaSchedule,
    initial_observations: &[(usize, f64)],
    seed: u64,
) -> Result<crate::trace::RegretTrace> {
    let domain = objective.domain().clone();
    let mut strategy = DiffGp::new(domain, kernel_shared, source_data, sigma2, beta)?;
    for &(idx, y) in initial_observations {
        strategy.observe(idx, y)?;
    }
    let mut rng = crate::rng::derive_stream(seed, 0, crate::rng::StreamKind::Algorithm(2));
    Ok(crate::trace::run_rounds(
        "diff_gp_style",
        0,
        &mut strategy,
        objective,
        horizon,
        &mut rng,
    ))
}
