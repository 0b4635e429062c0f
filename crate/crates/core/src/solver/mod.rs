//! The Newmark/Newton-Raphson integrator and the system description it
//! operates on.

mod newmark;
mod system;
mod trajectory;

pub(crate) use newmark::step_count;
pub use newmark::{
    initial_acceleration, integrate, integrate_from, predict_acceleration, predict_velocity,
    residual, step, IterationStrategy, NewmarkConfig, StepReport,
};
pub use system::{
    DynamicSystem, ErasedNonlinearity, Excitation, ForceError, Nonlinearity, State, StateScale,
    SystemScalar,
};
pub use trajectory::{format_float, Trajectory};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "Newton iteration did not converge at step {step} after {iterations} iterations \
         (|R| = {residual_norm:e}, |dx| = {increment_norm:e})"
    )]
    NonConvergence {
        step: usize,
        iterations: usize,
        residual_norm: f64,
        increment_norm: f64,
    },
    #[error("Jacobian singular at step {step}")]
    SingularJacobian { step: usize },
    #[error("mass matrix is singular")]
    SingularMass,
    #[error("initial acceleration iteration did not converge")]
    InitialAcceleration,
    #[error("force evaluation failed at step {step} (t = {time}): {source}")]
    Force {
        step: usize,
        time: f64,
        #[source]
        source: ForceError,
    },
    #[error("non-finite state at step {step}")]
    Divergence { step: usize },
    #[error("first-order reduction needs an acceleration-independent force")]
    AccelerationDependentForce,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
