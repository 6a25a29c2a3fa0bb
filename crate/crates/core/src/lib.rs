//! Monte Carlo solver for the Dirichlet problem of the Laplacian driven by the
//! ball walk and the sphere walk.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! kernel: distance-oracle domains, reproducible random streams, the walks
//! themselves, streaming estimators, closed-form harmonic oracles, and the
//! statistical probes used to check the structural properties of the walk
//! (mean-value identities, exit measures, walk-regularity, escape bounds).
//!
//! Parallelism is injected through the [`Executor`] trait so that the same
//! code runs serially here and on a thread pool in the `ballwalk` crate, with
//! bit-identical results either way.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod estimator;
pub mod exec;
pub mod geometry;
pub mod oracle;
pub mod point;
pub mod stats;
pub mod stochastic;
pub mod walk;

pub use error::{Error, Result};
pub use estimator::{estimate_field, estimate_value, tietze_extend, BoundaryData, Estimate};
pub use exec::{Executor, Serial};
pub use geometry::{Cone, Domain, Shape};
pub use oracle::{HarmonicOracle, TestFunction};
pub use point::{Point, MAX_DIM};
pub use stochastic::{derive_stream, RngStream};
pub use walk::{run_walk, StoppedOutcome, WalkConfig, WalkKind, WalkOutcome};
