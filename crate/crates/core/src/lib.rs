//! Implicit time integration of nonlinear second-order systems
//!
//! `M·ẍ + C·ẋ + K·x + F(x, ẋ, ẍ, t) = Q(t)`
//!
//! using the Newmark scheme with Newton iterations whose Jacobians come from
//! forward-mode automatic differentiation.
//!
//! * [`ad`] — seed-bundle dual numbers and dense Jacobians
//! * [`linalg`] — dense matrices and LU solves
//! * [`solver`] — system definition, Newmark stepping, trajectories
//! * [`reference`] — fixed-step classical Runge-Kutta on the first-order form
//! * [`models`] — oscillators, finite-element dual rotor, squeeze-film damper rotor
//! * [`analysis`] — amplitude metric, spectra, speed sweeps
//! * [`check`] — AD vs finite-difference Jacobian checks
//!
//! ```
//! use nnrad::models::duffing;
//! use nnrad::solver::{integrate, NewmarkConfig};
//!
//! let sys = duffing(Default::default());
//! let traj = integrate(&sys, &[2.0], &[0.0], 0.0, 1.0, &NewmarkConfig::default()).unwrap();
//! assert_eq!(traj.len(), 1001);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ad;
pub mod analysis;
pub mod check;
pub mod linalg;
pub mod models;
pub mod reference;
pub mod solver;

pub use ad::{Dual, Scalar};
pub use linalg::DenseMatrix;
pub use solver::{DynamicSystem, IterationStrategy, NewmarkConfig, State, Trajectory};
