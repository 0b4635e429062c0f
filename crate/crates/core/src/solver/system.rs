use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ad::{AdError, Dual, Scalar};
use crate::linalg::DenseMatrix;

use super::SolverError;

/// Failure while evaluating a nonlinear force.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForceError {
    #[error(transparent)]
    Ad(#[from] AdError),
    #[error("squeeze film rupture: dimensionless eccentricity r = {r} >= 1")]
    FilmRupture { r: f64 },
    #[error("force has {found} components, expected {expected}")]
    Dimension { expected: usize, found: usize },
}

/// Displacement, velocity and acceleration of every DOF at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

impl State {
    pub fn new(t: f64, x: Vec<f64>, v: Vec<f64>, a: Vec<f64>) -> Self {
        assert!(
            x.len() == v.len() && v.len() == a.len(),
            "state vectors must share one dimension"
        );
        State { t, x, v, a }
    }

    pub fn zeros(t: f64, n: usize) -> Self {
        State::new(t, vec![0.0; n], vec![0.0; n], vec![0.0; n])
    }

    pub fn n_dof(&self) -> usize {
        self.x.len()
    }
}

/// A nonlinear force `F(x, ẋ, ẍ, t)` written once over [`Scalar`].
pub trait Nonlinearity: Send + Sync {
    /// Systems whose force reads `ẍ` need an iterative initial acceleration
    /// and cannot be reduced to first order.
    fn depends_on_acceleration(&self) -> bool {
        false
    }

    fn force<S: Scalar>(&self, x: &[S], v: &[S], a: &[S], t: f64) -> Result<Vec<S>, ForceError>;
}

#[doc(hidden)]
pub trait ErasedNonlinearity: Send + Sync {
    fn depends_on_acceleration(&self) -> bool;
    fn force_real(&self, x: &[f64], v: &[f64], a: &[f64], t: f64) -> Result<Vec<f64>, ForceError>;
    fn force_dual(
        &self,
        x: &[Dual],
        v: &[Dual],
        a: &[Dual],
        t: f64,
    ) -> Result<Vec<Dual>, ForceError>;
}

impl<N: Nonlinearity> ErasedNonlinearity for N {
    fn depends_on_acceleration(&self) -> bool {
        Nonlinearity::depends_on_acceleration(self)
    }
    fn force_real(&self, x: &[f64], v: &[f64], a: &[f64], t: f64) -> Result<Vec<f64>, ForceError> {
        self.force(x, v, a, t)
    }
    fn force_dual(
        &self,
        x: &[Dual],
        v: &[Dual],
        a: &[Dual],
        t: f64,
    ) -> Result<Vec<Dual>, ForceError> {
        self.force(x, v, a, t)
    }
}

/// Scalars a [`DynamicSystem`] can be evaluated on.
pub trait SystemScalar: Scalar {
    #[doc(hidden)]
    fn eval_force(
        nl: &dyn ErasedNonlinearity,
        x: &[Self],
        v: &[Self],
        a: &[Self],
        t: f64,
    ) -> Result<Vec<Self>, ForceError>;
}

impl SystemScalar for f64 {
    fn eval_force(
        nl: &dyn ErasedNonlinearity,
        x: &[f64],
        v: &[f64],
        a: &[f64],
        t: f64,
    ) -> Result<Vec<f64>, ForceError> {
        nl.force_real(x, v, a, t)
    }
}

impl SystemScalar for Dual {
    fn eval_force(
        nl: &dyn ErasedNonlinearity,
        x: &[Dual],
        v: &[Dual],
        a: &[Dual],
        t: f64,
    ) -> Result<Vec<Dual>, ForceError> {
        nl.force_dual(x, v, a, t)
    }
}

pub type Excitation = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Characteristic magnitudes of a system's response, used to draw
/// representative random states and to size finite-difference steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateScale {
    /// Typical displacement magnitude.
    pub length: f64,
    /// Typical angular frequency [rad/s].
    pub rate: f64,
}

impl Default for StateScale {
    fn default() -> Self {
        StateScale {
            length: 1.0,
            rate: 1.0,
        }
    }
}

/// `M·ẍ + C·ẋ + K·x + F(x, ẋ, ẍ, t) = Q(t)`.
#[derive(Clone)]
pub struct DynamicSystem {
    name: String,
    mass: DenseMatrix,
    damping: DenseMatrix,
    stiffness: DenseMatrix,
    excitation: Option<Excitation>,
    nonlinearity: Option<Arc<dyn ErasedNonlinearity>>,
    scale: StateScale,
}

impl fmt::Debug for DynamicSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicSystem")
            .field("name", &self.name)
            .field("n_dof", &self.n_dof())
            .field("has_excitation", &self.excitation.is_some())
            .field("has_nonlinearity", &self.nonlinearity.is_some())
            .finish()
    }
}

impl DynamicSystem {
    /// Builds a linear, unforced system. All matrices must be `n×n`.
    pub fn new(
        name: impl Into<String>,
        mass: DenseMatrix,
        damping: DenseMatrix,
        stiffness: DenseMatrix,
    ) -> Result<Self, SolverError> {
        let n = mass.rows();
        for (label, m) in [
            ("mass", &mass),
            ("damping", &damping),
            ("stiffness", &stiffness),
        ] {
            if m.rows() != n || m.cols() != n {
                return Err(SolverError::InvalidSystem(format!(
                    "{label} matrix is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if n == 0 {
            return Err(SolverError::InvalidSystem(
                "system has no degrees of freedom".into(),
            ));
        }
        Ok(DynamicSystem {
            name: name.into(),
            mass,
            damping,
            stiffness,
            excitation: None,
            nonlinearity: None,
            scale: StateScale::default(),
        })
    }

    pub fn with_excitation<F>(mut self, q: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        self.excitation = Some(Arc::new(q));
        self
    }

    pub fn with_nonlinearity<N: Nonlinearity + 'static>(mut self, nl: N) -> Self {
        self.nonlinearity = Some(Arc::new(nl));
        self
    }

    pub fn with_scale(mut self, scale: StateScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_dof(&self) -> usize {
        self.mass.rows()
    }

    pub fn mass(&self) -> &DenseMatrix {
        &self.mass
    }

    pub fn damping(&self) -> &DenseMatrix {
        &self.damping
    }

    pub fn stiffness(&self) -> &DenseMatrix {
        &self.stiffness
    }

    pub fn scale(&self) -> StateScale {
        self.scale
    }

    pub fn has_nonlinearity(&self) -> bool {
        self.nonlinearity.is_some()
    }

    pub fn depends_on_acceleration(&self) -> bool {
        self.nonlinearity
            .as_ref()
            .is_some_and(|n| n.depends_on_acceleration())
    }

    /// `Q(t)`; zero when the system is unforced.
    pub fn excitation(&self, t: f64) -> Vec<f64> {
        match &self.excitation {
            Some(q) => q(t),
            None => vec![0.0; self.n_dof()],
        }
    }

    /// `F(x, ẋ, ẍ, t)`; zero when the system is linear.
    pub fn nonlinear_force<S: SystemScalar>(
        &self,
        x: &[S],
        v: &[S],
        a: &[S],
        t: f64,
    ) -> Result<Vec<S>, ForceError> {
        let n = self.n_dof();
        match &self.nonlinearity {
            Some(nl) => {
                let f = S::eval_force(nl.as_ref(), x, v, a, t)?;
                if f.len() != n {
                    return Err(ForceError::Dimension {
                        expected: n,
                        found: f.len(),
                    });
                }
                Ok(f)
            }
            None => Ok(vec![x[0].constant_like(0.0); n]),
        }
    }

    /// Left side minus right side of the equation of motion at `state`.
    pub fn equation_residual(&self, state: &State) -> Result<Vec<f64>, ForceError> {
        let f = self.nonlinear_force(&state.x, &state.v, &state.a, state.t)?;
        let q = self.excitation(state.t);
        Ok((0..self.n_dof())
            .map(|i| {
                dot(self.mass.row(i), &state.a)
                    + dot(self.damping.row(i), &state.v)
                    + dot(self.stiffness.row(i), &state.x)
                    + f[i]
                    - q[i]
            })
            .collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
