//! Greedy polling server on a circle.
//!
//! Customers arrive at uniform locations on a circle according to a Poisson
//! process. At polling instants separated by i.i.d. interpolling times the
//! server scans a uniformly random point and serves the nearest customer within
//! the scan radius. The crate models the state sampled at polling instants as a
//! finite counting measure and provides the exact one-step operators, the
//! quadratic energy used as a Lyapunov function, and a simulator for the chain.

pub mod configuration;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod kernels;
pub mod lyapunov;
pub mod quadrature;
pub mod simulator;

pub use configuration::{Atom, Configuration, SignedAtom, SignedConfiguration};
pub use error::{Error, Result};
pub use geometry::{Arc, ArcSet, CirclePoint};
pub use kernels::{Functional, InterpollingDistribution, SystemParams};
pub use lyapunov::{DriftConstants, EnergyParams, Kernel};
