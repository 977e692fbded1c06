//! Experiment orchestration: seeded matched-randomness replications across
//! algorithms, crash-resumable trace persistence, aggregation, and file
//! emission.
//!
//! Within a replication every algorithm sees the identical source dataset,
//! identical initial target observations, and the identical objective-noise
//! stream indexed by round, so trace differences are attributable to
//! acquisition decisions alone. Streams are derived from the base seed, the
//! replication index, and a stable per-algorithm label, which makes every
//! trace reproducible in isolation.

pub mod aggregate;
pub mod config;
pub mod emit;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

pub use aggregate::{aggregate, AggregateCurve, AggregatePoint, Metric};
pub use config::{AlgorithmSpec, DomainSpec, ExperimentConfig, ObjectiveSpec, RunSettings};
pub use emit::{fnv1a64, RAW_HEADER};

use crate::baselines::{DiffGp, EnvGp, GpEi, GpPi, GpTs, GpUcb, Strategy};
use crate::error::{Error, Result};
use crate::gp::{Dataset, PriorFactor};
use crate::rng::{derive_stream, sample_without_replacement, standard_normal, StreamKind};
use crate::testbed::{
    make_assumption_satisfied_pair, make_bohachevsky_pair, make_gaussian_pair, read_pair_file,
    FiniteDomain, GridObjective, ObjectivePair,
};
use crate::trace::{run_rounds, RegretTrace};
use crate::transfer::{build_source_model, DeltaBo, DeltaOptions};

/// Execution profile: desk-scale runs cap factorizations well below the
/// release cap so accidental full-resolution configs fail fast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Ci,
    Release,
}

impl Profile {
    pub fn factorization_cap(self) -> usize {
        match self {
            Profile::Ci => 4_000,
            Profile::Release => crate::gp::DEFAULT_FACTORIZATION_CAP,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Ci => "ci",
            Profile::Release => "release",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Profile::Ci),
            "release" => Ok(Profile::Release),
            other => Err(Error::Config(format!("unknown profile '{other}' (expected ci | release)"))),
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "DELTABO_OUTPUT_DIR";

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub traces: Vec<RegretTrace>,
    pub cumulative: Vec<AggregateCurve>,
    pub average: Vec<AggregateCurve>,
    pub output_dir: PathBuf,
    pub config_hash: u64,
    pub failed_replications: usize,
}

/// The shared inputs of one replication: source data and initial target
/// observations, identical for every algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationInputs {
    pub source_indices: Vec<usize>,
    pub source: Dataset,
    pub initial: Vec<(usize, f64)>,
}

/// Derive a replication's shared inputs from the base seed alone.
pub fn replication_inputs(
    pair: &ObjectivePair,
    run: &RunSettings,
    base_seed: u64,
    replication: usize,
) -> Result<ReplicationInputs> {
    let domain = pair.domain();
    if run.source_size > domain.len() {
        return Err(Error::InvalidParameter(format!(
            "source size {} exceeds the domain of {} points",
            run.source_size,
            domain.len()
        )));
    }
    let mut source_rng = derive_stream(base_seed, replication as u64, StreamKind::SourceData);
    let source_indices =
        sample_without_replacement(&mut source_rng, domain.len(), run.source_size);
    let sd0 = run.source_noise_var.sqrt();
    let points: Vec<Vec<f64>> = source_indices.iter().map(|&i| domain.point(i).to_vec()).collect();
    let values: Vec<f64> = source_indices
        .iter()
        .map(|&i| pair.source_at(i) + sd0 * standard_normal(&mut source_rng))
        .collect();
    let source = Dataset::homoscedastic(points, values, run.source_noise_var)?;

    let mut init_rng =
        derive_stream(base_seed, replication as u64, StreamKind::InitialObservations);
    let sd = run.noise_var.sqrt();
    let initial: Vec<(usize, f64)> = (0..run.initial_observations)
        .map(|_| {
            let idx = rand::Rng::random_range(&mut init_rng, 0..domain.len());
            (idx, pair.target_at(idx) + sd * standard_normal(&mut init_rng))
        })
        .collect();
    Ok(ReplicationInputs { source_indices, source, initial })
}

/// Build the objective pair described by the config.
pub fn build_pair(config: &ExperimentConfig, profile: Profile) -> Result<Arc<ObjectivePair>> {
    let domain = match (&config.objective, config.domain) {
        (ObjectiveSpec::PairFile { path }, None) => {
            return Ok(Arc::new(read_pair_file(path)?));
        }
        (_, Some(spec)) => Arc::new(FiniteDomain::grid(
            spec.dimension,
            spec.lower,
            spec.upper,
            spec.resolution,
        )?),
        (_, None) => return Err(Error::Config("missing domain specification".into())),
    };
    let pair = match &config.objective {
        ObjectiveSpec::GaussianPair { mu, shift } => make_gaussian_pair(domain, *mu, *shift)?,
        ObjectiveSpec::BohachevskyPair => make_bohachevsky_pair(domain)?,
        ObjectiveSpec::AssumptionPair { seed, kernel_g, kernel_delta } => {
            make_assumption_satisfied_pair(
                domain,
                *kernel_g,
                *kernel_delta,
                *seed,
                profile.factorization_cap(),
            )?
        }
        ObjectiveSpec::PairFile { .. } => unreachable!("handled above"),
    };
    Ok(Arc::new(pair))
}

fn build_strategy(
    spec: &AlgorithmSpec,
    domain: &Arc<FiniteDomain>,
    inputs: &ReplicationInputs,
    run: &RunSettings,
    ts_factor: Option<&Arc<PriorFactor>>,
) -> Result<Box<dyn Strategy>> {
    let strategy: Box<dyn Strategy> = match spec {
        AlgorithmSpec::DeltaBo { kernel_g, kernel_delta, beta } => {
            let source = Arc::new(build_source_model(*kernel_g, &inputs.source, domain)?);
            Box::new(DeltaBo::new(
                domain.clone(),
                source,
                *kernel_delta,
                run.noise_var,
                *beta,
                DeltaOptions {
                    noise_mode: run.delta_noise_mode,
                    prior_variance: run.delta_prior_variance,
                },
            )?)
        }
        AlgorithmSpec::GpUcb { kernel_f, beta } => {
            Box::new(GpUcb::new(domain.clone(), *kernel_f, run.noise_var, *beta)?)
        }
        AlgorithmSpec::GpEi { kernel_f, xi } => {
            Box::new(GpEi::new(domain.clone(), *kernel_f, run.noise_var, *xi)?)
        }
        AlgorithmSpec::GpPi { kernel_f, xi } => {
            Box::new(GpPi::new(domain.clone(), *kernel_f, run.noise_var, *xi)?)
        }
        AlgorithmSpec::GpTs { .. } => {
            let factor = ts_factor
                .ok_or_else(|| Error::InvalidParameter("missing prior factor for gp_ts".into()))?;
            Box::new(GpTs::new(domain.clone(), run.noise_var, factor.clone())?)
        }
        AlgorithmSpec::EnvGpStyle { kernel_f, beta, noise_inflation } => Box::new(EnvGp::new(
            domain.clone(),
            *kernel_f,
            &inputs.source,
            noise_inflation.unwrap_or(run.tau2),
            run.noise_var,
            *beta,
        )?),
        AlgorithmSpec::DiffGpStyle { kernel_shared, beta } => Box::new(DiffGp::new(
            domain.clone(),
            *kernel_shared,
            &inputs.source,
            run.noise_var,
            *beta,
        )?),
    };
    Ok(strategy)
}

fn trace_path(dir: &Path, algorithm: &str, replication: usize) -> PathBuf {
    dir.join(format!("{algorithm}_rep{replication:04}.csv"))
}

fn failure_path(dir: &Path, algorithm: &str, replication: usize) -> PathBuf {
    dir.join(format!("{algorithm}_rep{replication:04}.failed.txt"))
}

fn run_one(
    spec: &AlgorithmSpec,
    pair: &Arc<ObjectivePair>,
    run: &RunSettings,
    base_seed: u64,
    replication: usize,
    ts_factor: Option<&Arc<PriorFactor>>,
) -> Result<RegretTrace> {
    let domain = pair.domain();
    let inputs = replication_inputs(pair, run, base_seed, replication)?;
    let mut strategy = build_strategy(spec, domain, &inputs, run, ts_factor)?;
    for &(idx, y) in &inputs.initial {
        strategy.observe(idx, y)?;
    }
    let obj_rng = derive_stream(base_seed, replication as u64, StreamKind::ObjectiveNoise);
    let mut objective = GridObjective::new(pair.clone(), run.noise_var, obj_rng)?;
    let mut alg_rng = derive_stream(
        base_seed,
        replication as u64,
        StreamKind::Algorithm(fnv1a64(spec.name().as_bytes())),
    );
    Ok(run_rounds(
        spec.name(),
        replication,
        strategy.as_mut(),
        &mut objective,
        run.horizon,
        &mut alg_rng,
    ))
}

/// Run every algorithm x replication job, resuming from any trace files
/// already on disk, then aggregate and emit all outputs.
pub fn run_experiment(
    config: &ExperimentConfig,
    profile: Profile,
    overrides: &RunOverrides,
) -> Result<ExperimentOutcome> {
    let mut run = config.run;
    if let Some(seed) = overrides.seed {
        run.seed = seed;
    }
    if let Some(workers) = overrides.workers {
        run.workers = workers;
    }
    let output_dir = overrides
        .output_dir
        .clone()
        .or_else(|| std::env::var(OUTPUT_DIR_ENV).ok().map(PathBuf::from))
        .unwrap_or_else(|| config.output_dir.clone());

    let pair = build_pair(config, profile)?;
    let domain = pair.domain().clone();
    if run.source_size > domain.len() {
        return Err(Error::Config(format!(
            "run.source_size {} exceeds the domain of {} points",
            run.source_size,
            domain.len()
        )));
    }

    // one shared domain factorization per TS algorithm
    let mut ts_factor = None;
    for spec in &config.algorithms {
        if let AlgorithmSpec::GpTs { kernel_f } = spec {
            ts_factor = Some(Arc::new(PriorFactor::build(
                *kernel_f,
                &domain,
                profile.factorization_cap(),
            )?));
        }
    }

    let traces_dir = output_dir.join("traces");
    std::fs::create_dir_all(&traces_dir)
        .map_err(|e| Error::io(traces_dir.display().to_string(), e))?;

    let jobs: Vec<(usize, usize)> = (0..config.algorithms.len())
        .flat_map(|a| (0..run.replications).map(move |r| (a, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;

    let results: Vec<Result<RegretTrace>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(a, r)| {
                let spec = &config.algorithms[a];
                let csv_path = trace_path(&traces_dir, spec.name(), r);
                let failed_path = failure_path(&traces_dir, spec.name(), r);
                if csv_path.exists() {
                    let text = std::fs::read_to_string(&csv_path)
                        .map_err(|e| Error::io(csv_path.display().to_string(), e))?;
                    return emit::trace_from_csv(&text, &csv_path);
                }
                if failed_path.exists() {
                    let reason = std::fs::read_to_string(&failed_path)
                        .map_err(|e| Error::io(failed_path.display().to_string(), e))?;
                    return Ok(RegretTrace {
                        algorithm: spec.name().to_string(),
                        replication: r,
                        rounds: Vec::new(),
                        output_index: None,
                        last_index: None,
                        failure: Some(reason.trim().to_string()),
                    });
                }
                let trace = run_one(spec, &pair, &run, run.seed, r, ts_factor.as_ref())?;
                if let Some(reason) = &trace.failure {
                    std::fs::write(&failed_path, reason)
                        .map_err(|e| Error::io(failed_path.display().to_string(), e))?;
                } else {
                    std::fs::write(&csv_path, emit::trace_to_csv(&trace))
                        .map_err(|e| Error::io(csv_path.display().to_string(), e))?;
                }
                Ok(trace)
            })
            .collect()
    });

    let mut traces = Vec::with_capacity(results.len());
    let mut failed = 0usize;
    for result in results {
        let trace = result?;
        if trace.is_failed() {
            failed += 1;
        }
        traces.push(trace);
    }
    let total = traces.len();
    if failed * 5 >= total && failed > 0 {
        return Err(Error::Objective(format!(
            "{failed} of {total} replications failed (>= 20%); aborting. First failure: {}",
            traces
                .iter()
                .find_map(|t| t.failure.as_deref())
                .unwrap_or("unknown")
        )));
    }

    // aggregation needs at least two successful replications per algorithm;
    // a single-replication run still produces raw traces and a manifest
    let (cumulative, average) = match aggregate(&traces, Metric::Cumulative) {
        Ok(c) => (c, aggregate(&traces, Metric::Average)?),
        Err(e) => {
            eprintln!("note: skipping aggregation ({e})");
            (Vec::new(), Vec::new())
        }
    };

    emit::write_text(&output_dir.join("raw.csv"), &emit::raw_csv(&traces))?;
    if !cumulative.is_empty() {
        emit::write_text(
            &output_dir.join("aggregate.csv"),
            &emit::aggregate_csv(&cumulative, &average),
        )?;
        emit::write_text(&output_dir.join("plot_cumulative.csv"), &emit::plot_csv(&cumulative))?;
        emit::write_text(&output_dir.join("plot_average.csv"), &emit::plot_csv(&average))?;
    }
    let manifest = emit::manifest_text(&emit::ManifestInputs {
        config_text: &config.raw_text,
        base_seed: run.seed,
        profile: profile.name(),
        algorithms: config.algorithms.iter().map(|a| a.name()).collect(),
        replications: run.replications,
        horizon: run.horizon,
        source_size: run.source_size,
        domain_points: domain.len(),
        failed_replications: failed,
    });
    emit::write_text(&output_dir.join("manifest.txt"), &manifest)?;

    Ok(ExperimentOutcome {
        traces,
        cumulative,
        average,
        output_dir,
        config_hash: fnv1a64(config.raw_text.as_bytes()),
        failed_replications: failed,
    })
}

/// Re-aggregate an output directory from its persisted trace files.
pub fn aggregate_directory(dir: &Path) -> Result<(Vec<AggregateCurve>, Vec<AggregateCurve>)> {
    let traces_dir = dir.join("traces");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&traces_dir)
        .map_err(|e| Error::io(traces_dir.display().to_string(), e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    let mut traces = Vec::new();
    for path in paths {
        let text =
            std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
        traces.push(emit::trace_from_csv(&text, &path)?);
    }
    if traces.is_empty() {
        return Err(Error::Config(format!("no trace files under {}", traces_dir.display())));
    }
    let cumulative = aggregate(&traces, Metric::Cumulative)?;
    let average = aggregate(&traces, Metric::Average)?;
    emit::write_text(&dir.join("aggregate.csv"), &emit::aggregate_csv(&cumulative, &average))?;
    emit::write_text(&dir.join("plot_cumulative.csv"), &emit::plot_csv(&cumulative))?;
    emit::write_text(&dir.join("plot_average.csv"), &emit::plot_csv(&average))?;
    Ok((cumulative, average))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::tests::minimal_config_text;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("deltabo_harness_{tag}_{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn single_job_produces_one_trace_with_one_record() {
        let text = minimal_config_text()
            .replace("run.horizon = 4", "run.horizon = 1")
            .replace("run.replications = 2", "run.replications = 1")
            .replace("algorithms.list = deltabo, gp_ucb", "algorithms.list = gp_ucb")
            .replace("domain.resolution = 8", "domain.resolution = 5");
        // drop the now-unused deltabo keys
        let text: String = text
            .lines()
            .filter(|l| !l.starts_with("algorithms.deltabo."))
            .collect::<Vec<_>>()
            .join("\n");
        let config = ExperimentConfig::parse(&text).unwrap();
        let out = temp_dir("single");
        let overrides =
            RunOverrides { output_dir: Some(out.clone()), ..Default::default() };
        let outcome = run_experiment(&config, Profile::Ci, &overrides).unwrap();
        assert_eq!(outcome.traces.len(), 1);
        assert_eq!(outcome.traces[0].rounds.len(), 1);
        assert!(out.join("raw.csv").exists());
        assert!(out.join("manifest.txt").exists());
        std::fs::remove_dir_all(&out).unwrap();
    }

    #[test]
    fn matched_randomness_across_algorithm_subsets() {
        // the inputs of a replication depend only on (seed, replication)
        let config = ExperimentConfig::parse(&minimal_config_text()).unwrap();
        let pair = build_pair(&config, Profile::Ci).unwrap();
        let a = replication_inputs(&pair, &config.run, config.run.seed, 1).unwrap();
        let b = replication_inputs(&pair, &config.run, config.run.seed, 1).unwrap();
        assert_eq!(a, b);
        let c = replication_inputs(&pair, &config.run, config.run.seed, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn removing_an_algorithm_leaves_other_traces_unchanged() {
        let joint_text = minimal_config_text();
        let solo_text: String = joint_text
            .replace("algorithms.list = deltabo, gp_ucb", "algorithms.list = gp_ucb")
            .lines()
            .filter(|l| !l.starts_with("algorithms.deltabo."))
            .collect::<Vec<_>>()
            .join("\n");
        let joint = ExperimentConfig::parse(&joint_text).unwrap();
        let solo = ExperimentConfig::parse(&solo_text).unwrap();
        let out_joint = temp_dir("joint");
        let out_solo = temp_dir("solo");
        let joint_outcome = run_experiment(
            &joint,
            Profile::Ci,
            &RunOverrides { output_dir: Some(out_joint.clone()), ..Default::default() },
        )
        .unwrap();
        let solo_outcome = run_experiment(
            &solo,
            Profile::Ci,
            &RunOverrides { output_dir: Some(out_solo.clone()), ..Default::default() },
        )
        .unwrap();
        let joint_ucb: Vec<_> =
            joint_outcome.traces.iter().filter(|t| t.algorithm == "gp_ucb").collect();
        let solo_ucb: Vec<_> =
            solo_outcome.traces.iter().filter(|t| t.algorithm == "gp_ucb").collect();
        assert_eq!(joint_ucb.len(), solo_ucb.len());
        for (a, b) in joint_ucb.iter().zip(&solo_ucb) {
            assert_eq!(a.rounds.len(), b.rounds.len());
            for (ra, rb) in a.rounds.iter().zip(&b.rounds) {
                assert_eq!(ra.x_index, rb.x_index);
                assert_eq!(ra.y, rb.y);
            }
        }
        std::fs::remove_dir_all(&out_joint).unwrap();
        std::fs::remove_dir_all(&out_solo).unwrap();
    }

    #[test]
    fn crash_resume_reproduces_deleted_trace_exactly() {
        let config = ExperimentConfig::parse(&minimal_config_text()).unwrap();
        let out = temp_dir("resume");
        let overrides = RunOverrides { output_dir: Some(out.clone()), ..Default::default() };
        run_experiment(&config, Profile::Ci, &overrides).unwrap();
        let victim = out.join("traces").join("gp_ucb_rep0001.csv");
        let original = std::fs::read(&victim).unwrap();
        std::fs::remove_file(&victim).unwrap();
        run_experiment(&config, Profile::Ci, &overrides).unwrap();
        let restored = std::fs::read(&victim).unwrap();
        assert_eq!(original, restored);
        std::fs::remove_dir_all(&out).unwrap();
    }

    #[test]
    fn too_many_failures_abort_with_summary() {
        // persisted failure markers are picked up on resume, so planting them
        // exercises both the resume path and the abort policy: 2 of 4 jobs
        // failed is beyond the 20% budget
        let config = ExperimentConfig::parse(&minimal_config_text()).unwrap();
        let out = temp_dir("failures");
        let traces = out.join("traces");
        std::fs::create_dir_all(&traces).unwrap();
        std::fs::write(traces.join("deltabo_rep0000.failed.txt"), "objective exploded").unwrap();
        std::fs::write(traces.join("gp_ucb_rep0000.failed.txt"), "objective exploded").unwrap();
        let overrides = RunOverrides { output_dir: Some(out.clone()), ..Default::default() };
        let err = run_experiment(&config, Profile::Ci, &overrides).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2 of 4"), "{msg}");
        assert!(msg.contains("objective exploded"), "{msg}");
        std::fs::remove_dir_all(&out).unwrap();
    }

    #[test]
    fn pair_file_objective_runs_from_config() {
        // serialize a pair, then run an experiment that loads it back
        let dir = temp_dir("pairfile");
        std::fs::create_dir_all(&dir).unwrap();
        let domain = Arc::new(FiniteDomain::grid(2, -1.0, 1.0, 6).unwrap());
        let pair = make_gaussian_pair(domain, 0.2, 0.5).unwrap();
        let pair_path = dir.join("pair.csv");
        crate::testbed::write_pair_file(&pair, &pair_path).unwrap();

        let text = minimal_config_text()
            .replace(
                "objective.kind = assumption_pair",
                &format!("objective.kind = pair_file\nobjective.path = {}", pair_path.display()),
            )
            .replace("run.source_size = 10", "run.source_size = 8");
        // strip keys the pair_file objective must not carry
        let text: String = text
            .lines()
            .filter(|l| {
                !l.starts_with("objective.seed")
                    && !l.starts_with("objective.kernel_")
                    && !l.starts_with("domain.")
            })
            .collect::<Vec<_>>()
            .join("\n");
        let config = ExperimentConfig::parse(&text).unwrap();
        let out = dir.join("out");
        let outcome = run_experiment(
            &config,
            Profile::Ci,
            &RunOverrides { output_dir: Some(out.clone()), ..Default::default() },
        )
        .unwrap();
        assert_eq!(outcome.failed_replications, 0);
        assert_eq!(outcome.traces.len(), 4);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn longer_horizon_extends_traces_without_perturbing_the_prefix() {
        // source data and objective noise come from streams independent of the
        // horizon, so running longer only appends rounds
        let short = ExperimentConfig::parse(&minimal_config_text()).unwrap();
        let long_text = minimal_config_text().replace("run.horizon = 4", "run.horizon = 7");
        let long = ExperimentConfig::parse(&long_text).unwrap();
        let out_short = temp_dir("hshort");
        let out_long = temp_dir("hlong");
        let a = run_experiment(
            &short,
            Profile::Ci,
            &RunOverrides { output_dir: Some(out_short.clone()), ..Default::default() },
        )
        .unwrap();
        let b = run_experiment(
            &long,
            Profile::Ci,
            &RunOverrides { output_dir: Some(out_long.clone()), ..Default::default() },
        )
        .unwrap();
        for (ta, tb) in a.traces.iter().zip(&b.traces) {
            assert_eq!(ta.algorithm, tb.algorithm);
            for (ra, rb) in ta.rounds.iter().zip(&tb.rounds) {
                assert_eq!(ra.x_index, rb.x_index);
                assert_eq!(ra.y, rb.y);
            }
        }
        std::fs::remove_dir_all(&out_short).unwrap();
        std::fs::remove_dir_all(&out_long).unwrap();
    }

    #[test]
    fn per_test_point_noise_mode_runs_end_to_end() {
        let text = format!("{}run.delta_noise_mode = per_test_point\n", minimal_config_text());
        let config = ExperimentConfig::parse(&text).unwrap();
        let out = temp_dir("testpoint");
        let outcome = run_experiment(
            &config,
            Profile::Ci,
            &RunOverrides { output_dir: Some(out.clone()), ..Default::default() },
        )
        .unwrap();
        assert_eq!(outcome.failed_replications, 0);
        std::fs::remove_dir_all(&out).unwrap();
    }
}
