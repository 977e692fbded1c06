//! Deterministic file emission: raw trace CSV, aggregate CSV, per-figure plot
//! data, and the run manifest.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! values produce equal bytes on every platform and reruns diff clean.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::aggregate::AggregateCurve;
use crate::trace::{RegretTrace, RoundRecord};

pub const RAW_HEADER: &str =
    "algorithm,replication,t,x_index,y,instantaneous_regret,cumulative_regret,average_regret";

/// FNV-1a 64-bit hash; stable fingerprint for config bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn round_row(algorithm: &str, replication: usize, r: &RoundRecord) -> String {
    format!(
        "{algorithm},{replication},{},{},{},{},{},{}",
        r.t, r.x_index, r.y, r.instantaneous_regret, r.cumulative_regret, r.average_regret
    )
}

/// Serialize one trace with the fixed raw schema plus a trailing comment line
/// carrying the output-point bookkeeping that the schema does not cover.
pub fn trace_to_csv(trace: &RegretTrace) -> String {
    let mut out = String::new();
    out.push_str(RAW_HEADER);
    out.push('\n');
    for r in &trace.rounds {
        out.push_str(&round_row(&trace.algorithm, trace.replication, r));
        out.push('\n');
    }
    if let (Some(o), Some(l)) = (trace.output_index, trace.last_index) {
        let _ = writeln!(out, "# output_index={o} last_index={l}");
    }
    out
}

/// Parse a trace file written by [`trace_to_csv`]. Wall-clock readings are
/// diagnostic-only and come back as zero.
pub fn trace_from_csv(text: &str, path: &Path) -> Result<RegretTrace> {
    let bad = |msg: String| Error::Config(format!("{}: {msg}", path.display()));
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == RAW_HEADER => {}
        other => return Err(bad(format!("unexpected header {other:?}"))),
    }
    let mut algorithm = String::new();
    let mut replication = 0usize;
    let mut rounds = Vec::new();
    let mut output_index = None;
    let mut last_index = None;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for part in rest.split_whitespace() {
                if let Some(v) = part.strip_prefix("output_index=") {
                    output_index = v.parse().ok();
                } else if let Some(v) = part.strip_prefix("last_index=") {
                    last_index = v.parse().ok();
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(bad(format!("row has {} fields, expected 8", fields.len())));
        }
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number '{s}'")));
        let parse_u = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad integer '{s}'")));
        if algorithm.is_empty() {
            algorithm = fields[0].to_string();
            replication = parse_u(fields[1])?;
        }
        rounds.push(RoundRecord {
            t: parse_u(fields[2])?,
            x_index: parse_u(fields[3])?,
            y: parse_f(fields[4])?,
            instantaneous_regret: parse_f(fields[5])?,
            cumulative_regret: parse_f(fields[6])?,
            average_regret: parse_f(fields[7])?,
            wall_clock: 0.0,
        });
    }
    if rounds.is_empty() {
        return Err(bad("trace file has no rounds".into()));
    }
    Ok(RegretTrace { algorithm, replication, rounds, output_index, last_index, failure: None })
}

/// Combined raw CSV over all successful traces, in the given order.
pub fn raw_csv(traces: &[RegretTrace]) -> String {
    let mut out = String::new();
    out.push_str(RAW_HEADER);
    out.push('\n');
    for trace in traces.iter().filter(|t| !t.is_failed()) {
        for r in &trace.rounds {
            out.push_str(&round_row(&trace.algorithm, trace.replication, r));
            out.push('\n');
        }
    }
    out
}

pub fn aggregate_csv(cumulative: &[AggregateCurve], average: &[AggregateCurve]) -> String {
    let mut out = String::from(
        "algorithm,t,mean_cumulative_regret,ci_half_width_cumulative,\
         mean_average_regret,ci_half_width_average\n",
    );
    for (c, a) in cumulative.iter().zip(average) {
        for (pc, pa) in c.points.iter().zip(&a.points) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.algorithm, pc.t, pc.mean, pc.half_width, pa.mean, pa.half_width
            );
        }
    }
    out
}

/// Plot data for one metric: per round, mean and confidence band per
/// algorithm, consumable by any plotting tool.
pub fn plot_csv(curves: &[AggregateCurve]) -> String {
    let mut out = String::from("t");
    for c in curves {
        let _ = write!(out, ",{0}_mean,{0}_lower,{0}_upper", c.algorithm);
    }
    out.push('\n');
    let horizon = curves.first().map_or(0, |c| c.points.len());
    for i in 0..horizon {
        let _ = write!(out, "{}", curves[0].points[i].t);
        for c in curves {
            let p = &c.points[i];
            let _ = write!(out, ",{},{},{}", p.mean, p.mean - p.half_width, p.mean + p.half_width);
        }
        out.push('\n');
    }
    out
}

pub struct ManifestInputs<'a> {
    pub config_text: &'a str,
    pub base_seed: u64,
    pub profile: &'a str,
    pub algorithms: Vec<&'a str>,
    pub replications: usize,
    pub horizon: usize,
    pub source_size: usize,
    pub domain_points: usize,
    pub failed_replications: usize,
}

/// Deterministic run manifest (no timestamps).
pub fn manifest_text(m: &ManifestInputs) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "config_hash = {:#018x}", fnv1a64(m.config_text.as_bytes()));
    let _ = writeln!(out, "base_seed = {}", m.base_seed);
    let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "profile = {}", m.profile);
    let _ = writeln!(out, "algorithms = {}", m.algorithms.join(","));
    let _ = writeln!(out, "replications = {}", m.replications);
    let _ = writeln!(out, "horizon = {}", m.horizon);
    let _ = writeln!(out, "source_size = {}", m.source_size);
    let _ = writeln!(out, "domain_points = {}", m.domain_points);
    let _ = writeln!(out, "failed_replications = {}", m.failed_replications);
    let _ = writeln!(out, "source_placement = uniform_without_replacement");
    let _ = writeln!(out, "initial_placement = uniform_with_replacement");
    out
}

pub fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{RegretTrace, RoundRecord};

    fn sample_trace() -> RegretTrace {
        RegretTrace {
            algorithm: "gp_ucb".into(),
            replication: 3,
            rounds: vec![
                RoundRecord {
                    t: 1,
                    x_index: 5,
                    y: 0.25,
                    instantaneous_regret: 0.5,
                    cumulative_regret: 0.5,
                    average_regret: 0.5,
                    wall_clock: 0.001,
                },
                RoundRecord {
                    t: 2,
                    x_index: 2,
                    y: 0.75,
                    instantaneous_regret: 0.0,
                    cumulative_regret: 0.5,
                    average_regret: 0.25,
                    wall_clock: 0.002,
                },
            ],
            output_index: Some(5),
            last_index: Some(2),
            failure: None,
        }
    }

    #[test]
    fn header_is_the_fixed_schema() {
        assert_eq!(
            RAW_HEADER,
            "algorithm,replication,t,x_index,y,instantaneous_regret,cumulative_regret,average_regret"
        );
        assert!(raw_csv(&[sample_trace()]).starts_with(RAW_HEADER));
    }

    #[test]
    fn trace_round_trips_through_csv() {
        let trace = sample_trace();
        let text = trace_to_csv(&trace);
        let back = trace_from_csv(&text, Path::new("test")).unwrap();
        assert_eq!(back.algorithm, trace.algorithm);
        assert_eq!(back.replication, trace.replication);
        assert_eq!(back.output_index, trace.output_index);
        assert_eq!(back.last_index, trace.last_index);
        assert_eq!(back.rounds.len(), trace.rounds.len());
        for (a, b) in back.rounds.iter().zip(&trace.rounds) {
            assert_eq!(a.t, b.t);
            assert_eq!(a.x_index, b.x_index);
            assert_eq!(a.y, b.y);
            assert_eq!(a.cumulative_regret, b.cumulative_regret);
        }
    }

    #[test]
    fn hash_changes_with_any_byte() {
        let base = "run.seed = 42\n";
        let h0 = fnv1a64(base.as_bytes());
        assert_eq!(h0, fnv1a64(base.as_bytes()));
        for i in 0..base.len() {
            let mut bytes = base.as_bytes().to_vec();
            bytes[i] ^= 1;
            assert_ne!(h0, fnv1a64(&bytes), "flip at byte {i} left the hash unchanged");
        }
    }

    #[test]
    fn failed_traces_are_left_out_of_raw_csv() {
        let mut bad = sample_trace();
        bad.failure = Some("exploded".into());
        let csv = raw_csv(&[bad]);
        assert_eq!(csv.trim_end(), RAW_HEADER);
    }
}
