//! `deltabo` command-line interface.
//!
//! Subcommands:
//!   run <config>        run an experiment and write traces, aggregates, plot
//!                       data, and a manifest to the output directory
//!   aggregate <dir>     recompute aggregate and plot files from the trace
//!                       files already in <dir>/traces
//!   gamma <config>      information-gain report for the configured kernels
//!   pairgen <config>    build the configured objective pair and serialize it
//!
//! Flags: --workers K, --seed S, --profile ci|release, --out DIR. The
//! environment variable DELTABO_OUTPUT_DIR also overrides the output
//! directory (lower precedence than --out).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use deltabo_core::error::Result;
use deltabo_core::harness::{
    aggregate_directory, build_pair, run_experiment, AlgorithmSpec, ExperimentConfig, Profile,
    RunOverrides,
};
use deltabo_core::info_gain::{
    exact_gamma, greedy_gamma, prop_gain_bound, BoundConstants, BoundFamily,
};
use deltabo_core::kernels::{Covariance, KernelFamily, KernelSpec, SumKernel};
use deltabo_core::testbed::write_pair_file;

const USAGE: &str = "\
usage: deltabo <command> [options]

commands:
  run <config>        run the configured experiment
  aggregate <dir>     re-aggregate an output directory from its trace files
  gamma <config>      information-gain report for the configured kernels
  pairgen <config>    serialize the configured objective pair

options:
  --workers K         worker threads (0 = automatic)
  --seed S            override the config's base seed
  --profile P         ci | release (default ci)
  --out PATH          output directory (run), or output file (pairgen)
";

struct Args {
    command: String,
    positional: Vec<String>,
    workers: Option<usize>,
    seed: Option<u64>,
    profile: Profile,
    out: Option<PathBuf>,
}

fn parse_args(argv: &[String]) -> std::result::Result<Args, String> {
    let mut it = argv.iter();
    let command = it.next().cloned().ok_or_else(|| USAGE.to_string())?;
    let mut args = Args {
        command,
        positional: Vec::new(),
        workers: None,
        seed: None,
        profile: Profile::Ci,
        out: None,
    };
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--workers" => {
                let v = it.next().ok_or("--workers needs a value")?;
                args.workers = Some(v.parse().map_err(|_| format!("bad --workers '{v}'"))?);
            }
            "--seed" => {
                let v = it.next().ok_or("--seed needs a value")?;
                args.seed = Some(v.parse().map_err(|_| format!("bad --seed '{v}'"))?);
            }
            "--profile" => {
                let v = it.next().ok_or("--profile needs a value")?;
                args.profile = Profile::parse(v).map_err(|e| e.to_string())?;
            }
            "--out" => {
                let v = it.next().ok_or("--out needs a value")?;
                args.out = Some(PathBuf::from(v));
            }
            other if other.starts_with("--") => return Err(format!("unknown flag '{other}'")),
            other => args.positional.push(other.to_string()),
        }
    }
    Ok(args)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = match parse_args(&argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::FAILURE;
        }
    };
    let result = match args.command.as_str() {
        "run" => cmd_run(&args),
        "aggregate" => cmd_aggregate(&args),
        "gamma" => cmd_gamma(&args),
        "pairgen" => cmd_pairgen(&args),
        "help" | "--help" | "-h" => {
            print!("{USAGE}");
            return ExitCode::SUCCESS;
        }
        other => {
            eprintln!("unknown command '{other}'\n{USAGE}");
            return ExitCode::FAILURE;
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn config_path(args: &Args) -> std::result::Result<&Path, String> {
    args.positional
        .first()
        .map(Path::new)
        .ok_or_else(|| format!("missing <config> argument\n{USAGE}"))
}

fn cmd_run(args: &Args) -> Result<()> {
    let path = config_path(args).map_err(deltabo_core::Error::Config)?;
    let config = ExperimentConfig::load(path)?;
    let overrides = RunOverrides {
        seed: args.seed,
        workers: args.workers,
        output_dir: args.out.clone(),
    };
    let outcome = run_experiment(&config, args.profile, &overrides)?;
    let total = outcome.traces.len();
    println!(
        "completed {} replications across {} algorithms ({} failed)",
        total,
        config.algorithms.len(),
        outcome.failed_replications
    );
    for curve in &outcome.cumulative {
        if let Some(last) = curve.points.last() {
            println!(
                "  {:<14} mean R_T = {:.4} +/- {:.4} over {} replications",
                curve.algorithm, last.mean, last.half_width, curve.replications
            );
        }
    }
    println!("outputs written to {}", outcome.output_dir.display());
    Ok(())
}

fn cmd_aggregate(args: &Args) -> Result<()> {
    let dir = args
        .positional
        .first()
        .map(PathBuf::from)
        .ok_or_else(|| deltabo_core::Error::Config(format!("missing <dir> argument\n{USAGE}")))?;
    let (cumulative, _) = aggregate_directory(&dir)?;
    println!("re-aggregated {} algorithms in {}", cumulative.len(), dir.display());
    Ok(())
}

fn cmd_pairgen(args: &Args) -> Result<()> {
    let path = config_path(args).map_err(deltabo_core::Error::Config)?;
    let config = ExperimentConfig::load(path)?;
    let pair = build_pair(&config, args.profile)?;
    let out = args.out.clone().unwrap_or_else(|| config.output_dir.join("pair.csv"));
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| deltabo_core::Error::Config(format!("{}: {e}", parent.display())))?;
    }
    write_pair_file(&pair, &out)?;
    println!(
        "wrote {} grid points (optimum {:.6} at index {}) to {}",
        pair.domain().len(),
        pair.f_star(),
        pair.x_star_index(),
        out.display()
    );
    Ok(())
}

struct GammaRow {
    label: String,
    kernel: KernelDescriptor,
}

enum KernelDescriptor {
    Single(KernelSpec),
    Sum(KernelSpec, KernelSpec),
}

impl KernelDescriptor {
    fn covariance(&self) -> Box<dyn Covariance> {
        match self {
            KernelDescriptor::Single(k) => Box::new(*k),
            KernelDescriptor::Sum(a, b) => Box::new(SumKernel(*a, *b)),
        }
    }

    fn family_name(&self) -> String {
        match self {
            KernelDescriptor::Single(k) => k.family.name().to_string(),
            KernelDescriptor::Sum(a, b) => format!("{}+{}", a.family.name(), b.family.name()),
        }
    }

    fn tau2(&self) -> f64 {
        match self {
            KernelDescriptor::Single(k) => k.amplitude_tau2,
            KernelDescriptor::Sum(a, b) => a.amplitude_tau2 + b.amplitude_tau2,
        }
    }

    fn bound_family(&self, d: usize) -> Option<BoundFamily> {
        match self {
            KernelDescriptor::Single(k) => Some(match k.family {
                KernelFamily::Linear => BoundFamily::Linear { d },
                KernelFamily::SquaredExponential => BoundFamily::SquaredExponential { d },
                KernelFamily::Matern52 => BoundFamily::Matern { d, nu: 2.5 },
            }),
            KernelDescriptor::Sum(..) => None,
        }
    }
}

fn gamma_rows(config: &ExperimentConfig) -> Vec<GammaRow> {
    let mut rows: Vec<GammaRow> = Vec::new();
    let mut push = |label: String, kernel: KernelDescriptor| {
        if !rows.iter().any(|r| r.label == label) {
            rows.push(GammaRow { label, kernel });
        }
    };
    for spec in &config.algorithms {
        match spec {
            AlgorithmSpec::DeltaBo { kernel_g, kernel_delta, .. } => {
                push("deltabo.kernel_delta".into(), KernelDescriptor::Single(*kernel_delta));
                push("deltabo.kernel_g".into(), KernelDescriptor::Single(*kernel_g));
                push(
                    "deltabo.target_proxy".into(),
                    KernelDescriptor::Sum(*kernel_g, *kernel_delta),
                );
            }
            AlgorithmSpec::GpUcb { kernel_f, .. }
            | AlgorithmSpec::GpEi { kernel_f, .. }
            | AlgorithmSpec::GpPi { kernel_f, .. }
            | AlgorithmSpec::GpTs { kernel_f }
            | AlgorithmSpec::EnvGpStyle { kernel_f, .. } => {
                push(format!("{}.kernel_f", spec.name()), KernelDescriptor::Single(*kernel_f));
            }
            AlgorithmSpec::DiffGpStyle { kernel_shared, .. } => {
                push("diff_gp_style.kernel_shared".into(), KernelDescriptor::Single(*kernel_shared));
            }
        }
    }
    rows
}

fn cmd_gamma(args: &Args) -> Result<()> {
    let path = config_path(args).map_err(deltabo_core::Error::Config)?;
    let config = ExperimentConfig::load(path)?;
    let pair = build_pair(&config, args.profile)?;
    let domain = pair.domain();
    let horizon = config.run.horizon;
    let noise = config.run.noise_var;
    println!(
        "{:<28} {:<12} {:>8} {:>5} {:>14} {:>14} {:>18}",
        "kernel", "family", "tau2", "T", "greedy_gamma", "exact_gamma", "growth_diagnostic"
    );
    for row in gamma_rows(&config) {
        let cov = row.kernel.covariance();
        let greedy = greedy_gamma(cov.as_ref(), noise, domain, horizon)?;
        let exact = exact_gamma(cov.as_ref(), noise, domain, horizon)
            .map(|e| format!("{:.6}", e.value))
            .unwrap_or_else(|_| "-".to_string());
        let diagnostic = row
            .kernel
            .bound_family(domain.dimension())
            .and_then(|family| {
                prop_gain_bound(family, row.kernel.tau2(), horizon, BoundConstants::default()).ok()
            })
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:<28} {:<12} {:>8} {:>5} {:>14.6} {:>14} {:>18}",
            row.label,
            row.kernel.family_name(),
            row.kernel.tau2(),
            horizon,
            greedy.value,
            exact,
            diagnostic
        );
    }
    println!("\nvalues in nats; growth diagnostics use unit constants and are shape-only");
    Ok(())
}
