//! Per-run regret accounting.
//!
//! One loop drives every algorithm: select, query once, observe, record. All
//! bookkeeping lives here so swapping strategies cannot change the trace
//! schema, and a strategy physically cannot query the objective more or less
//! than once per round.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::baselines::Strategy;
use crate::testbed::Objective;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub x_index: usize,
    pub y: f64,
    pub instantaneous_regret: f64,
    pub cumulative_regret: f64,
    pub average_regret: f64,
    /// Seconds spent in this round; diagnostic only, never serialized into
    /// the deterministic outputs.
    pub wall_clock: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub algorithm: String,
    pub replication: usize,
    pub rounds: Vec<RoundRecord>,
    /// Output point drawn uniformly from the queried points.
    pub output_index: Option<usize>,
    /// Last queried point, recorded for the "last query" output convention.
    pub last_index: Option<usize>,
    pub failure: Option<String>,
}

impl RegretTrace {
    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn cumulative_regret_at_end(&self) -> Option<f64> {
        self.rounds.last().map(|r| r.cumulative_regret)
    }

    /// Largest observed value; the reporting fallback for objectives whose
    /// optimum is unknown (regret columns are NaN for those).
    pub fn best_observed(&self) -> Option<f64> {
        self.rounds.iter().map(|r| r.y).fold(None, |acc, y| match acc {
            None => Some(y),
            Some(b) => Some(b.max(y)),
        })
    }
}

/// Run `horizon` rounds of select -> query -> observe, recording regret
/// against the objective's known optimum (NaN regret when the optimum is
/// unknown). Errors from the strategy or objective mark the trace failed
/// rather than propagating.
pub fn run_rounds(
    algorithm: &str,
    replication: usize,
    strategy: &mut dyn Strategy,
    objective: &mut dyn Objective,
    horizon: usize,
    rng: &mut ChaCha12Rng,
) -> RegretTrace {
    let mut trace = RegretTrace {
        algorithm: algorithm.to_string(),
        replication,
        rounds: Vec::with_capacity(horizon),
        output_index: None,
        last_index: None,
        failure: None,
    };
    let f_star = objective.optimum().map(|(_, v)| v);
    let mut cumulative = 0.0f64;
    for t in 1..=horizon {
        let started = Instant::now();
        let x = match strategy.select_next(t, rng) {
            Ok(x) => x,
            Err(e) => {
                trace.failure = Some(format!("round {t}: selection failed: {e}"));
                return trace;
            }
        };
        let y = match objective.query(x) {
            Ok(y) => y,
            Err(e) => {
                trace.failure = Some(format!("round {t}: query failed: {e}"));
                return trace;
            }
        };
        if !y.is_finite() {
            trace.failure = Some(format!("round {t}: objective returned non-finite value {y}"));
            return trace;
        }
        if let Err(e) = strategy.observe(x, y) {
            trace.failure = Some(format!("round {t}: observe failed: {e}"));
            return trace;
        }
        let instantaneous = match (f_star, objective.true_value(x)) {
            (Some(star), Some(fx)) => star - fx,
            _ => f64::NAN,
        };
        cumulative += instantaneous;
        trace.rounds.push(RoundRecord {
            t,
            x_index: x,
            y,
            instantaneous_regret: instantaneous,
            cumulative_regret: cumulative,
            average_regret: cumulative / t as f64,
            wall_clock: started.elapsed().as_secs_f64(),
        });
    }
    if !trace.rounds.is_empty() {
        trace.last_index = trace.rounds.last().map(|r| r.x_index);
        let pick = rng.random_range(0..trace.rounds.len());
        trace.output_index = Some(trace.rounds[pick].x_index);
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::Strategy;
    use crate::error::Result;
    use crate::rng::seed_stream;
    use crate::testbed::{FiniteDomain, GridObjective, make_gaussian_pair};
    use std::sync::Arc;

    struct RoundRobin {
        domain: Arc<FiniteDomain>,
        observed: usize,
    }

    impl Strategy for RoundRobin {
        fn name(&self) -> &str {
            "round_robin"
        }
        fn select_next(&mut self, round: usize, _rng: &mut ChaCha12Rng) -> Result<usize> {
            Ok((round - 1) % self.domain.len())
        }
        fn observe(&mut self, _index: usize, _value: f64) -> Result<()> {
            self.observed += 1;
            Ok(())
        }
    }

    #[test]
    fn regret_recurrence_and_shape() {
        let domain = Arc::new(FiniteDomain::grid(1, -1.0, 1.0, 6).unwrap());
        let pair = Arc::new(make_gaussian_pair(domain.clone(), 0.0, 0.4).unwrap());
        let mut obj = GridObjective::new(pair, 0.01, seed_stream(4)).unwrap();
        let mut strat = RoundRobin { domain, observed: 0 };
        let mut rng = seed_stream(5);
        let trace = run_rounds("round_robin", 0, &mut strat, &mut obj, 9, &mut rng);
        assert!(trace.failure.is_none());
        assert_eq!(trace.rounds.len(), 9);
        assert_eq!(strat.observed, 9);
        let mut running = 0.0;
        for (i, r) in trace.rounds.iter().enumerate() {
            assert_eq!(r.t, i + 1);
            assert!(r.instantaneous_regret >= 0.0);
            running += r.instantaneous_regret;
            assert_eq!(r.cumulative_regret, running);
            assert_eq!(r.average_regret, running / r.t as f64);
        }
        assert!(trace.output_index.is_some());
        assert_eq!(trace.last_index, Some(trace.rounds[8].x_index));
    }

    #[test]
    fn single_round_output_is_the_only_query() {
        let domain = Arc::new(FiniteDomain::grid(1, -1.0, 1.0, 4).unwrap());
        let pair = Arc::new(make_gaussian_pair(domain.clone(), 0.0, 0.0).unwrap());
        let mut obj = GridObjective::new(pair, 0.0, seed_stream(1)).unwrap();
        let mut strat = RoundRobin { domain, observed: 0 };
        let mut rng = seed_stream(2);
        let trace = run_rounds("round_robin", 0, &mut strat, &mut obj, 1, &mut rng);
        assert_eq!(trace.output_index, Some(trace.rounds[0].x_index));
        assert_eq!(trace.last_index, trace.output_index);
    }

    /// A plugged-in objective without a known optimum still runs; regret is
    /// NaN and the best observed value carries the report.
    struct BlackBox {
        domain: Arc<FiniteDomain>,
    }

    impl crate::testbed::Objective for BlackBox {
        fn domain(&self) -> &Arc<FiniteDomain> {
            &self.domain
        }
        fn query(&mut self, index: usize) -> Result<f64> {
            Ok(index as f64 * 0.5)
        }
        fn true_value(&self, _index: usize) -> Option<f64> {
            None
        }
        fn optimum(&self) -> Option<(usize, f64)> {
            None
        }
    }

    #[test]
    fn unknown_optimum_reports_best_observed() {
        let domain = Arc::new(FiniteDomain::grid(1, 0.0, 1.0, 5).unwrap());
        let mut obj = BlackBox { domain: domain.clone() };
        let mut strat = RoundRobin { domain, observed: 0 };
        let mut rng = seed_stream(3);
        let trace = run_rounds("round_robin", 0, &mut strat, &mut obj, 4, &mut rng);
        assert!(trace.failure.is_none());
        assert!(trace.rounds.iter().all(|r| r.instantaneous_regret.is_nan()));
        assert_eq!(trace.best_observed(), Some(1.5));
    }
}
