//! Experiment configuration: a flat key-value text format with dotted
//! sections.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank lines
//! are ignored. Keys are dotted paths (`algorithms.deltabo.kernel_delta.family`).
//! Every key is validated and unknown keys are rejected, so a typo fails the
//! run instead of silently falling back to a default.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::transfer::{BetaSchedule, DeltaNoiseMode, DeltaPriorVariance};

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveSpec {
    GaussianPair { mu: f64, shift: f64 },
    BohachevskyPair,
    AssumptionPair { seed: u64, kernel_g: KernelSpec, kernel_delta: KernelSpec },
    PairFile { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub dimension: usize,
    pub lower: f64,
    pub upper: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    /// Number of source observations N.
    pub source_size: usize,
    /// Number of optimization rounds T.
    pub horizon: usize,
    /// Shared initial target observations per replication.
    pub initial_observations: usize,
    pub replications: usize,
    /// Source observation noise variance.
    pub source_noise_var: f64,
    /// Target observation noise variance.
    pub noise_var: f64,
    /// Difference-amplitude bound; also the default source-noise inflation of
    /// the env-style baseline.
    pub tau2: f64,
    pub seed: u64,
    /// Worker threads for replication parallelism; 0 picks the default.
    pub workers: usize,
    pub delta_noise_mode: DeltaNoiseMode,
    pub delta_prior_variance: DeltaPriorVariance,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmSpec {
    DeltaBo { kernel_g: KernelSpec, kernel_delta: KernelSpec, beta: BetaSchedule },
    GpUcb { kernel_f: KernelSpec, beta: BetaSchedule },
    GpEi { kernel_f: KernelSpec, xi: f64 },
    GpPi { kernel_f: KernelSpec, xi: f64 },
    GpTs { kernel_f: KernelSpec },
    EnvGpStyle { kernel_f: KernelSpec, beta: BetaSchedule, noise_inflation: Option<f64> },
    DiffGpStyle { kernel_shared: KernelSpec, beta: BetaSchedule },
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::DeltaBo { .. } => "deltabo",
            AlgorithmSpec::GpUcb { .. } => "gp_ucb",
            AlgorithmSpec::GpEi { .. } => "gp_ei",
            AlgorithmSpec::GpPi { .. } => "gp_pi",
            AlgorithmSpec::GpTs { .. } => "gp_ts",
            AlgorithmSpec::EnvGpStyle { .. } => "env_gp_style",
            AlgorithmSpec::DiffGpStyle { .. } => "diff_gp_style",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub domain: Option<DomainSpec>,
    pub run: RunSettings,
    pub algorithms: Vec<AlgorithmSpec>,
    pub output_dir: PathBuf,
    /// The exact bytes the config was parsed from; hashed into the manifest.
    pub raw_text: String,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut keys = KeyMap::parse(text)?;

        let objective = parse_objective(&mut keys)?;
        let domain = parse_domain(&mut keys, &objective)?;
        let run = parse_run(&mut keys)?;
        let algorithms = parse_algorithms(&mut keys, run.initial_observations)?;
        let output_dir = PathBuf::from(keys.required("output.dir")?);

        keys.finish()?;
        Ok(ExperimentConfig {
            objective,
            domain,
            run,
            algorithms,
            output_dir,
            raw_text: text.to_string(),
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }
}

struct KeyMap {
    entries: BTreeMap<String, String>,
}

impl KeyMap {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    line_no + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Config(format!(
                    "line {}: empty key or value in '{raw}'",
                    line_no + 1
                )));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", line_no + 1)));
            }
        }
        Ok(KeyMap { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    fn f64_required(&mut self, key: &str) -> Result<f64> {
        parse_f64(key, &self.required(key)?)
    }

    fn f64_optional(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| parse_f64(key, &v)).transpose()
    }

    fn usize_required(&mut self, key: &str) -> Result<usize> {
        parse_usize(key, &self.required(key)?)
    }

    fn usize_default(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            Some(v) => parse_usize(key, &v),
            None => Ok(default),
        }
    }

    fn u64_required(&mut self, key: &str) -> Result<u64> {
        let v = self.required(key)?;
        v.parse::<u64>().map_err(|_| Error::Config(format!("key '{key}': bad integer '{v}'")))
    }

    fn finish(self) -> Result<()> {
        if self.entries.is_empty() {
            return Ok(());
        }
        let unknown: Vec<String> = self.entries.into_keys().collect();
        Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))))
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("key '{key}': bad number '{value}'")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("key '{key}': bad integer '{value}'")))
}

fn parse_kernel(keys: &mut KeyMap, prefix: &str) -> Result<KernelSpec> {
    let family = KernelFamily::parse(&keys.required(&format!("{prefix}.family"))?)?;
    let tau2 = keys.f64_required(&format!("{prefix}.tau2"))?;
    let lengthscale = match family {
        KernelFamily::Linear => keys
            .f64_optional(&format!("{prefix}.lengthscale"))?
            .unwrap_or(1.0),
        _ => keys.f64_required(&format!("{prefix}.lengthscale"))?,
    };
    KernelSpec::new(family, tau2, lengthscale)
}

fn parse_beta(keys: &mut KeyMap, prefix: &str) -> Result<BetaSchedule> {
    let mode = keys.required(&format!("{prefix}.mode"))?;
    match mode.as_str() {
        "constant" => {
            let value = keys.f64_required(&format!("{prefix}.value"))?;
            if !(value > 0.0) {
                return Err(Error::Config(format!(
                    "key '{prefix}.value': constant beta must be positive, got {value}"
                )));
            }
            Ok(BetaSchedule::Constant(value))
        }
        "schedule" => {
            let rho = keys.f64_required(&format!("{prefix}.rho"))?;
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::Config(format!(
                    "key '{prefix}.rho': error probability must lie in (0, 1), got {rho}"
                )));
            }
            Ok(BetaSchedule::Schedule { rho })
        }
        other => Err(Error::Config(format!(
            "key '{prefix}.mode': expected constant | schedule, got '{other}'"
        ))),
    }
}

fn parse_objective(keys: &mut KeyMap) -> Result<ObjectiveSpec> {
    let kind = keys.required("objective.kind")?;
    match kind.as_str() {
        "gaussian_pair" => Ok(ObjectiveSpec::GaussianPair {
            mu: keys.f64_required("objective.mu")?,
            shift: keys.f64_required("objective.shift")?,
        }),
        "bohachevsky_pair" => Ok(ObjectiveSpec::BohachevskyPair),
        "assumption_pair" => Ok(ObjectiveSpec::AssumptionPair {
            seed: keys.u64_required("objective.seed")?,
            kernel_g: parse_kernel(keys, "objective.kernel_g")?,
            kernel_delta: parse_kernel(keys, "objective.kernel_delta")?,
        }),
        "pair_file" => Ok(ObjectiveSpec::PairFile {
            path: PathBuf::from(keys.required("objective.path")?),
        }),
        other => Err(Error::Config(format!(
            "objective.kind: expected gaussian_pair | bohachevsky_pair | assumption_pair | \
             pair_file, got '{other}'"
        ))),
    }
}

fn parse_domain(keys: &mut KeyMap, objective: &ObjectiveSpec) -> Result<Option<DomainSpec>> {
    let has_any = ["domain.dimension", "domain.lower", "domain.upper", "domain.resolution"]
        .iter()
        .any(|k| keys.entries.contains_key(*k));
    if matches!(objective, ObjectiveSpec::PairFile { .. }) {
        if has_any {
            return Err(Error::Config(
                "pair_file objectives carry their own domain; remove the domain.* keys".into(),
            ));
        }
        return Ok(None);
    }
    if !has_any {
        return Err(Error::Config("missing domain.* keys".into()));
    }
    let spec = DomainSpec {
        dimension: keys.usize_required("domain.dimension")?,
        lower: keys.f64_required("domain.lower")?,
        upper: keys.f64_required("domain.upper")?,
        resolution: keys.usize_required("domain.resolution")?,
    };
    if spec.dimension == 0 || spec.resolution == 0 {
        return Err(Error::Config("domain dimension and resolution must be at least 1".into()));
    }
    if !(spec.lower < spec.upper) {
        return Err(Error::Config(format!(
            "domain bounds must satisfy lower < upper, got [{}, {}]",
            spec.lower, spec.upper
        )));
    }
    Ok(Some(spec))
}

fn parse_run(keys: &mut KeyMap) -> Result<RunSettings> {
    let source_size = keys.usize_required("run.source_size")?;
    let horizon = keys.usize_required("run.horizon")?;
    let replications = keys.usize_required("run.replications")?;
    if source_size == 0 || horizon == 0 || replications == 0 {
        return Err(Error::Config(
            "run.source_size, run.horizon, and run.replications must be at least 1".into(),
        ));
    }
    let source_noise_var = keys.f64_required("run.source_noise_var")?;
    let noise_var = keys.f64_required("run.noise_var")?;
    let tau2 = keys.f64_required("run.tau2")?;
    for (key, v) in [
        ("run.source_noise_var", source_noise_var),
        ("run.noise_var", noise_var),
        ("run.tau2", tau2),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("key '{key}': must be positive, got {v}")));
        }
    }
    let delta_noise_mode = match keys.take("run.delta_noise_mode").as_deref() {
        None | Some("per_observation") => DeltaNoiseMode::PerObservation,
        Some("per_test_point") => DeltaNoiseMode::PerTestPoint,
        Some(other) => {
            return Err(Error::Config(format!(
                "run.delta_noise_mode: expected per_observation | per_test_point, got '{other}'"
            )))
        }
    };
    let delta_prior_variance = match keys.take("run.delta_prior_variance").as_deref() {
        None | Some("paper") => DeltaPriorVariance::SourcePlusNoise,
        Some("kernel_diag") => DeltaPriorVariance::KernelDiag,
        Some(other) => {
            return Err(Error::Config(format!(
                "run.delta_prior_variance: expected paper | kernel_diag, got '{other}'"
            )))
        }
    };
    Ok(RunSettings {
        source_size,
        horizon,
        initial_observations: keys.usize_default("run.initial_observations", 0)?,
        replications,
        source_noise_var,
        noise_var,
        tau2,
        seed: keys.u64_required("run.seed")?,
        workers: keys.usize_default("run.workers", 0)?,
        delta_noise_mode,
        delta_prior_variance,
    })
}

fn parse_algorithms(keys: &mut KeyMap, initial_observations: usize) -> Result<Vec<AlgorithmSpec>> {
    let list = keys.required("algorithms.list")?;
    let names: Vec<String> = list
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(Error::Config("algorithms.list is empty".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut specs = Vec::with_capacity(names.len());
    for name in &names {
        if !seen.insert(name.clone()) {
            return Err(Error::Config(format!("algorithm '{name}' listed twice")));
        }
        let p = format!("algorithms.{name}");
        let spec = match name.as_str() {
            "deltabo" => AlgorithmSpec::DeltaBo {
                kernel_g: parse_kernel(keys, &format!("{p}.kernel_g"))?,
                kernel_delta: parse_kernel(keys, &format!("{p}.kernel_delta"))?,
                beta: parse_beta(keys, &format!("{p}.beta"))?,
            },
            "gp_ucb" => AlgorithmSpec::GpUcb {
                kernel_f: parse_kernel(keys, &format!("{p}.kernel_f"))?,
                beta: parse_beta(keys, &format!("{p}.beta"))?,
            },
            "gp_ei" => AlgorithmSpec::GpEi {
                kernel_f: parse_kernel(keys, &format!("{p}.kernel_f"))?,
                xi: keys.f64_optional(&format!("{p}.xi"))?.unwrap_or(0.01),
            },
            "gp_pi" => AlgorithmSpec::GpPi {
                kernel_f: parse_kernel(keys, &format!("{p}.kernel_f"))?,
                xi: keys.f64_optional(&format!("{p}.xi"))?.unwrap_or(0.01),
            },
            "gp_ts" => AlgorithmSpec::GpTs {
                kernel_f: parse_kernel(keys, &format!("{p}.kernel_f"))?,
            },
            "env_gp_style" => AlgorithmSpec::EnvGpStyle {
                kernel_f: parse_kernel(keys, &format!("{p}.kernel_f"))?,
                beta: parse_beta(keys, &format!("{p}.beta"))?,
                noise_inflation: keys.f64_optional(&format!("{p}.noise_inflation"))?,
            },
            "diff_gp_style" => AlgorithmSpec::DiffGpStyle {
                kernel_shared: parse_kernel(keys, &format!("{p}.kernel_shared"))?,
                beta: parse_beta(keys, &format!("{p}.beta"))?,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown algorithm '{other}'; expected deltabo | gp_ucb | gp_ei | gp_pi | \
                     gp_ts | env_gp_style | diff_gp_style"
                )))
            }
        };
        if matches!(spec, AlgorithmSpec::GpEi { .. } | AlgorithmSpec::GpPi { .. })
            && initial_observations == 0
        {
            return Err(Error::Config(format!(
                "algorithm '{name}' needs run.initial_observations >= 1 to define an incumbent"
            )));
        }
        specs.push(spec);
    }
    Ok(specs)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn minimal_config_text() -> String {
        "\
objective.kind = assumption_pair
objective.seed = 7
objective.kernel_g.family = matern52
objective.kernel_g.tau2 = 1.0
objective.kernel_g.lengthscale = 1.2
objective.kernel_delta.family = se
objective.kernel_delta.tau2 = 0.8
objective.kernel_delta.lengthscale = 1.0

domain.dimension = 2
domain.lower = -1.0
domain.upper = 1.0
domain.resolution = 8

run.source_size = 10
run.horizon = 4
run.initial_observations = 2
run.replications = 2
run.source_noise_var = 0.1
run.noise_var = 0.01
run.tau2 = 0.8
run.seed = 42

output.dir = out/test

algorithms.list = deltabo, gp_ucb
algorithms.deltabo.kernel_g.family = matern52
algorithms.deltabo.kernel_g.tau2 = 1.0
algorithms.deltabo.kernel_g.lengthscale = 1.2
algorithms.deltabo.kernel_delta.family = se
algorithms.deltabo.kernel_delta.tau2 = 0.8
algorithms.deltabo.kernel_delta.lengthscale = 1.0
algorithms.deltabo.beta.mode = constant
algorithms.deltabo.beta.value = 0.2
algorithms.gp_ucb.kernel_f.family = matern52
algorithms.gp_ucb.kernel_f.tau2 = 1.0
algorithms.gp_ucb.kernel_f.lengthscale = 1.0
algorithms.gp_ucb.beta.mode = constant
algorithms.gp_ucb.beta.value = 0.2
"
        .to_string()
    }

    #[test]
    fn parses_a_complete_config() {
        let cfg = ExperimentConfig::parse(&minimal_config_text()).unwrap();
        assert_eq!(cfg.algorithms.len(), 2);
        assert_eq!(cfg.algorithms[0].name(), "deltabo");
        assert_eq!(cfg.run.horizon, 4);
        assert_eq!(cfg.domain.unwrap().resolution, 8);
        assert!(matches!(cfg.objective, ObjectiveSpec::AssumptionPair { seed: 7, .. }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{}\nrun.horizn = 9\n", minimal_config_text());
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("run.horizn"), "{err}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let text = format!("{}\nrun.horizon = 9\n", minimal_config_text());
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn missing_required_key_is_reported() {
        let text = minimal_config_text().replace("run.seed = 42\n", "");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("run.seed"), "{err}");
    }

    #[test]
    fn unknown_algorithm_is_rejected() {
        let text = minimal_config_text().replace(
            "algorithms.list = deltabo, gp_ucb",
            "algorithms.list = deltabo, gp_ucb, gp_sgd",
        );
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn improvement_strategies_need_initial_observations() {
        let mut text = minimal_config_text().replace(
            "algorithms.list = deltabo, gp_ucb",
            "algorithms.list = gp_ei",
        );
        text = text.replace("run.initial_observations = 2", "run.initial_observations = 0");
        text.push_str(
            "algorithms.gp_ei.kernel_f.family = se\nalgorithms.gp_ei.kernel_f.tau2 = 1.0\n\
             algorithms.gp_ei.kernel_f.lengthscale = 1.0\n",
        );
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("initial_observations"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# leading comment\n\n{}# trailing\n", minimal_config_text());
        assert!(ExperimentConfig::parse(&text).is_ok());
    }
}
