//! Numerical toolkit for sampling sets of the Nevanlinna class in the unit disk.
//!
//! The crate is organized bottom-up: [`geometry`] and [`kernels`] provide the
//! pseudohyperbolic and harmonic primitives, [`profiles`] and [`generators`]
//! describe point configurations, and [`criteria`], [`vulnerability`],
//! [`counterexamples`] and [`hm`] implement the decision procedures,
//! witness constructions and Monte Carlo estimates built on top of them.

pub mod error;
pub mod blaschke;
pub mod counterexamples;
pub mod criteria;
pub mod generators;
pub mod geometry;
pub mod hm;
pub mod kernels;
pub mod profiles;
pub mod quadrature;
pub mod series;
pub mod vulnerability;

pub use error::{Error, Result};
