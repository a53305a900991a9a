//! Cognitive complexity reduction by choosing extract-method refactorings.
//!
//! The pipeline is: method tree ([`ast`]) → complexity metrics
//! ([`metrics`]) → candidate extractions ([`enumerator`], stored as a
//! [`cache`]) → optimization instance ([`model`]) → exact single-objective
//! [`solver`] → Pareto-front drivers ([`moalgo`]) → front statistics
//! ([`analysis`]).

pub mod analysis;
pub mod ast;
pub mod cache;
#[cfg(feature = "cli")]
pub mod cli;
pub mod enumerator;
pub mod metrics;
pub mod moalgo;
pub mod model;
pub mod solver;
pub mod synthetic;
