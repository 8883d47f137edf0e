//! Discrete metric measure Dirichlet spaces.
//!
//! A [`MetricMeasureGraph`] is a finite weighted graph carrying a positive
//! vertex measure, positive edge conductances and a metric (shortest path or
//! Euclidean). The Dirichlet form is the graph energy
//! `E(f,f) = sum over edges c_uv (f(u) - f(v))^2`.
//!
//! On top of that model the crate estimates the constants of the standard
//! hypotheses of analysis on metric measure spaces (volume doubling,
//! Poincare inequality, capacity upper bound, fast volume growth), and checks
//! the geometric conclusions they imply: chain and path connectivity of
//! annuli, chain length bounds, partitions of unity, and exact elliptic
//! Harnack constants computed from harmonic measure.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod connectivity;
pub mod dirichlet;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod generators;
pub mod harmonic;
pub mod linalg;
mod math;
pub mod sample;
pub mod scaling;
#[cfg(feature = "serde")]
pub mod serde_f64;
pub mod space;
pub mod union_find;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use scaling::ScalingFunction;
pub use space::{GraphBuilder, MetricMeasureGraph, MetricMode, RegionSpec, VertexId};
