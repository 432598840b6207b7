//! Numerical core for doubly reflected backward SDEs whose driver depends on
//! the reflection process `K = K^l - K^u`.
//!
//! Everything here runs on a finite probability space: a uniform time grid
//! and the full (non-recombining) binary random-walk tree over it, so every
//! conditional expectation and projection is an exact finite sum.
//!
//! - [`grid`]: time grids, discrete paths, barriers, sup-norm, time reversal.
//! - [`skorohod`]: the two-sided Skorohod map on time-dependent intervals.
//! - [`tree`]: the path tree, conditional expectations, optional and dual
//!   projections, martingale representation.
//! - [`local_time`]: Tanaka-type local-time estimators and the local-time
//!   reconstruction of `K`.
//! - [`solver`]: the Picard map, fixed-point solver, a classical
//!   backward-induction oracle and residual diagnostics.
//! - [`experiments`]: continuous-dependence and mesh-refinement studies.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod experiments;
pub mod grid;
pub mod local_time;
pub mod skorohod;
pub mod solver;
pub mod tree;

pub use error::{Error, Result};
pub use grid::{BarrierPair, BarrierSpec, DiscretePath, TimeGrid};
pub use skorohod::{EsmOutput, HittingTimes};
pub use tree::{AdaptedProcess, PathTree, RawProcess};
