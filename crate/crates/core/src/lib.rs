//! Solver for a subdiffusive Black–Scholes model whose fractional order
//! varies in time.
//!
//! The backward terminal-value pricing problem is mapped (time reversal,
//! log-price transform, boundary homogenization, exponential spatial
//! transform, convolution with the power kernel `β_{α₀}`) to a Volterra
//! integro-differential problem with a bounded, smooth convolution kernel
//! `q`. That problem is discretized by exact product integration of
//! piecewise-linear interpolants in time and P1 finite elements in space.
//! A two-mesh convergence harness reproduces the scheme's temporal order
//! `½ + 3/2·α₀` and spatial order `2`.

pub mod discretization;
pub mod error;
pub mod exponent;
pub mod harness;
pub mod kernel;
pub mod model;
pub mod quad;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
