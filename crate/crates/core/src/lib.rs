//! Transfer Bayesian optimization on finite domains.
//!
//! The toolkit centers on DeltaBO: a source task's posterior is computed once
//! from historical observations, each target observation becomes a residual
//! observation of the difference function with noise inflated by the source
//! uncertainty, and acquisition maximizes the combined mean plus a confidence
//! width over the summed variances. Classical baselines (GP-UCB, EI, PI, TS)
//! and two prose-level transfer stand-ins run behind the same strategy
//! interface, and a seeded harness produces matched-randomness regret curves
//! with confidence bands as diffable CSV files.

// index-driven loops mirror the linear-algebra formulas, and negated
// comparisons deliberately reject NaN parameters
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod gp;
pub mod harness;
pub mod info_gain;
pub mod kernels;
pub mod linalg;
pub mod rng;
pub mod testbed;
pub mod trace;
pub mod transfer;

pub use error::{Error, Result};
