//! Finite decision domains, synthetic objective pairs, and the objective
//! plugin interface.

mod domain;
mod encode;
mod objective;
mod pairs;

pub use domain::{FiniteDomain, GridMeta};
pub use encode::{CoordinateSpec, EncodedValue, HyperparameterSpace};
pub use objective::{query_objective, GridObjective, Objective};
pub use pairs::{
    bohachevsky_source, bohachevsky_target, make_assumption_satisfied_pair, make_bohachevsky_pair,
    make_gaussian_pair, read_pair_file, write_pair_file, ObjectivePair,
};
