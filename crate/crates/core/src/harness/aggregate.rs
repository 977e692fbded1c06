//! Per-round aggregation of regret traces with normal-approximation
//! confidence bands.

use crate::error::{Error, Result};
use crate::trace::RegretTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Cumulative,
    Average,
}

#[derive(Debug, Clone)]
pub struct AggregatePoint {
    pub t: usize,
    pub mean: f64,
    /// 1.96 * sd / sqrt(n), sd with denominator n - 1.
    pub half_width: f64,
}

#[derive(Debug, Clone)]
pub struct AggregateCurve {
    pub algorithm: String,
    pub points: Vec<AggregatePoint>,
    pub replications: usize,
}

/// Mean curve and confidence half-widths per algorithm. Algorithms with fewer
/// than two successful replications are excluded with a note on stderr.
pub fn aggregate(traces: &[RegretTrace], metric: Metric) -> Result<Vec<AggregateCurve>> {
    let mut order: Vec<&str> = Vec::new();
    for t in traces {
        if !order.contains(&t.algorithm.as_str()) {
            order.push(&t.algorithm);
        }
    }
    let mut curves = Vec::new();
    for name in order {
        let ok: Vec<&RegretTrace> = traces
            .iter()
            .filter(|t| t.algorithm == name && !t.is_failed())
            .collect();
        if ok.len() < 2 {
            eprintln!(
                "note: algorithm '{name}' excluded from aggregation \
                 ({} successful replications, need at least 2)",
                ok.len()
            );
            continue;
        }
        let horizon = ok[0].rounds.len();
        if ok.iter().any(|t| t.rounds.len() != horizon) {
            return Err(Error::InvalidParameter(format!(
                "algorithm '{name}' has traces of unequal length"
            )));
        }
        let n = ok.len() as f64;
        let mut points = Vec::with_capacity(horizon);
        for i in 0..horizon {
            let values: Vec<f64> = ok
                .iter()
                .map(|t| match metric {
                    Metric::Cumulative => t.rounds[i].cumulative_regret,
                    Metric::Average => t.rounds[i].average_regret,
                })
                .collect();
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            points.push(AggregatePoint {
                t: ok[0].rounds[i].t,
                mean,
                half_width: 1.96 * var.sqrt() / n.sqrt(),
            });
        }
        curves.push(AggregateCurve {
            algorithm: name.to_string(),
            points,
            replications: ok.len(),
        });
    }
    if curves.is_empty() {
        return Err(Error::InvalidParameter(
            "no algorithm has enough successful replications to aggregate".into(),
        ));
    }
    Ok(curves)
}
