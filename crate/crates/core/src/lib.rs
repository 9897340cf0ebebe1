//! Globally optimal consensus maximization by branch and bound.
//!
//! Two families of solvers are provided for every problem:
//!
//! - *plain* branch and bound over the full `n`-dimensional parameter box,
//!   with center-point lower bounds and interval-relaxation upper bounds;
//! - *accelerated* (ACM) solvers that branch over `n - 1` parameters and
//!   solve the last one exactly inside every bound evaluation by interval
//!   stabbing.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. The only thing `std` adds is wall-clock timing of solves.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod engine;
pub mod geom;
pub mod interval;
pub mod planar;
pub mod registration;
pub mod resection;

mod math;

pub use engine::{solve, BoundEval, Bounder, Cube, SearchMode, SolveOptions, SolveReport};
pub use interval::{stab, stab_sets, Interval, IntervalSet, StabResult};
