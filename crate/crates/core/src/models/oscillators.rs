//! Single-DOF benchmark oscillators.

use serde::{Deserialize, Serialize};

use crate::ad::Scalar;
use crate::linalg::DenseMatrix;
use crate::solver::{DynamicSystem, ForceError, Nonlinearity, StateScale};

fn scalar_system(name: &str, m: f64, c: f64, k: f64) -> DynamicSystem {
    DynamicSystem::new(
        name,
        DenseMatrix::from_diagonal(&[m]),
        DenseMatrix::from_diagonal(&[c]),
        DenseMatrix::from_diagonal(&[k]),
    )
    .expect("1x1 matrices are consistent")
}

/// `ε(x² − 1)ẋ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VanDerPolDamping {
    pub epsilon: f64,
}

impl Nonlinearity for VanDerPolDamping {
    fn force<S: Scalar>(&self, x: &[S], v: &[S], _a: &[S], _t: f64) -> Result<Vec<S>, ForceError> {
        let x2 = x[0].clone() * &x[0];
        Ok(vec![(x2 - 1.0) * &v[0] * self.epsilon])
    }
}

/// `ẍ + ε(x² − 1)ẋ + x = 0`.
pub fn van_der_pol(epsilon: f64) -> DynamicSystem {
    scalar_system("van_der_pol", 1.0, 0.0, 1.0)
        .with_nonlinearity(VanDerPolDamping { epsilon })
        .with_scale(StateScale {
            length: 2.0,
            rate: 1.0,
        })
}

/// Forced Duffing oscillator `ẍ + δẋ + αx + βx³ = γ cos ωt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuffingParams {
    pub damping: f64,
    pub linear_stiffness: f64,
    pub cubic_stiffness: f64,
    pub force_amplitude: f64,
    pub force_frequency: f64,
}

impl Default for DuffingParams {
    fn default() -> Self {
        DuffingParams {
            damping: 1.0,
            linear_stiffness: 1.0,
            cubic_stiffness: 3.0,
            force_amplitude: 10.0,
            force_frequency: 1.0,
        }
    }
}

/// `βx³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicSpring {
    pub coefficient: f64,
}

impl Nonlinearity for CubicSpring {
    fn force<S: Scalar>(&self, x: &[S], _v: &[S], _a: &[S], _t: f64) -> Result<Vec<S>, ForceError> {
        Ok(vec![x[0].powi(3) * self.coefficient])
    }
}

pub fn duffing(p: DuffingParams) -> DynamicSystem {
    let (gamma, omega) = (p.force_amplitude, p.force_frequency);
    scalar_system("duffing", 1.0, p.damping, p.linear_stiffness)
        .with_nonlinearity(CubicSpring {
            coefficient: p.cubic_stiffness,
        })
        .with_excitation(move |t| vec![gamma * (omega * t).cos()])
        .with_scale(StateScale {
            length: 2.0,
            rate: omega.abs().max(1.0) * 3.0,
        })
}

/// `sin x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GravityRestoring;

impl Nonlinearity for GravityRestoring {
    fn force<S: Scalar>(&self, x: &[S], _v: &[S], _a: &[S], _t: f64) -> Result<Vec<S>, ForceError> {
        Ok(vec![x[0].sin()])
    }
}

/// Undamped pendulum `ẍ + sin x = 0`.
pub fn pendulum() -> DynamicSystem {
    scalar_system("pendulum", 1.0, 0.0, 0.0)
        .with_nonlinearity(GravityRestoring)
        .with_scale(StateScale {
            length: 2.0,
            rate: 1.0,
        })
}

/// `v²/2 − cos x`.
pub fn pendulum_energy(x: f64, v: f64) -> f64 {
    0.5 * v * v - x.cos()
}

/// Linear `m ẍ + c ẋ + k x = 0`.
pub fn linear_sdof(mass: f64, damping: f64, stiffness: f64) -> DynamicSystem {
    let rate = (stiffness.abs() / mass.abs()).sqrt().max(1.0);
    scalar_system("linear_sdof", mass, damping, stiffness)
        .with_scale(StateScale { length: 1.0, rate })
}
