//! Short-bearing squeeze film damper and the four-DOF rotor it supports.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ad::Scalar;
use crate::linalg::DenseMatrix;
use crate::solver::{DynamicSystem, ForceError, Nonlinearity, SolverError, StateScale};

use super::quadrature::gauss_legendre_15;

/// Journal eccentricity below which the film force is taken as zero.
pub const CONCENTRIC_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SfdParams {
    /// Lubricant viscosity [Pa·s].
    pub viscosity: f64,
    pub journal_radius: f64,
    pub land_length: f64,
    pub film_clearance: f64,
}

impl Default for SfdParams {
    fn default() -> Self {
        SfdParams {
            viscosity: 6.76e-3,
            journal_radius: 3.915e-2,
            land_length: 0.015,
            film_clearance: 2.5e-4,
        }
    }
}

impl SfdParams {
    pub fn validate(&self) -> Result<(), SolverError> {
        let fields = [
            ("viscosity", self.viscosity),
            ("journal_radius", self.journal_radius),
            ("land_length", self.land_length),
            ("film_clearance", self.film_clearance),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::InvalidSystem(format!(
                    "squeeze film {name} must be positive, got {v}"
                )));
            }
        }
        if !self.is_short_bearing() {
            log::warn!(
                "squeeze film L/D = {:.3} is outside the short-bearing range (< 0.25)",
                self.land_length / (2.0 * self.journal_radius)
            );
        }
        Ok(())
    }

    pub fn is_short_bearing(&self) -> bool {
        self.land_length / (2.0 * self.journal_radius) < 0.25
    }

    fn force_coefficient(&self) -> f64 {
        self.viscosity * self.journal_radius * self.land_length.powi(3)
            / self.film_clearance.powi(2)
    }
}

/// `∫ sinˡθ cosᵐθ / (1 + r cos θ)³ dθ` over `[θ₁, θ₁ + π]` by the 15-point
/// Gauss rule. Differentiable in both `r` and `θ₁`.
pub fn sommerfeld_integral<S: Scalar>(l: u32, m: u32, r: &S, theta1: &S) -> Result<S, ForceError> {
    if r.value() >= 1.0 || r.value() <= -1.0 {
        return Err(ForceError::FilmRupture { r: r.value() });
    }
    let rule = gauss_legendre_15();
    let half = PI / 2.0;
    let mid = theta1.clone() + half;
    let mut acc = r.constant_like(0.0);
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        let theta = mid.clone() + half * t;
        let (s, c) = (theta.sin(), theta.cos());
        let denom = (c.clone() * r + 1.0).powi(3);
        let num = s.powi(l as i32) * &c.powi(m as i32);
        acc = acc + num.try_div(&denom)? * *w;
    }
    Ok(acc * half)
}

/// Film force `(F_x, F_y)` for journal displacement `q = [x, y, θx, θy]`
/// and its rate `qd`, with the journal at `arm` from the disk.
pub fn sfd_force<S: Scalar>(
    q: &[S],
    qd: &[S],
    p: &SfdParams,
    arm: f64,
) -> Result<[S; 2], ForceError> {
    let u = q[0].clone() + q[3].clone() * arm;
    let w = q[1].clone() - q[2].clone() * arm;
    let ud = qd[0].clone() + qd[3].clone() * arm;
    let wd = qd[1].clone() - qd[2].clone() * arm;

    let e2 = u.clone() * &u + w.clone() * &w;
    if e2.value().sqrt() < CONCENTRIC_FLOOR {
        let zero = e2.constant_like(0.0);
        return Ok([zero.clone(), zero]);
    }
    let e = e2.try_sqrt()?;
    let e_dot = (u.clone() * &ud + w.clone() * &wd).try_div(&e)?;
    let psi_dot = (u.clone() * &wd - w.clone() * &ud).try_div(&e2)?;
    let r = e.clone() / p.film_clearance;
    let r_dot = e_dot / p.film_clearance;
    if r.value() >= 1.0 {
        return Err(ForceError::FilmRupture { r: r.value() });
    }

    let whirl = psi_dot * &r;
    let theta1 = if whirl.value() == 0.0 && r_dot.value() == 0.0 {
        r.constant_like(0.0)
    } else {
        (-r_dot.clone()).try_atan2(&whirl)?
    };
    let i11 = sommerfeld_integral(1, 1, &r, &theta1)?;
    let i02 = sommerfeld_integral(0, 2, &r, &theta1)?;
    let i20 = sommerfeld_integral(2, 0, &r, &theta1)?;

    let coef = p.force_coefficient();
    let f_r = (i11.clone() * &whirl + i02 * &r_dot) * coef;
    let f_t = (i20 * &whirl + i11 * &r_dot) * coef;
    let fx = (f_r.clone() * &u - f_t.clone() * &w).try_div(&e)?;
    let fy = (f_r * &w + f_t * &u).try_div(&e)?;
    Ok([fx, fy])
}

/// Rigid rotor on a linear support and a squeeze film damper.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SfdRotorParams {
    pub mass: f64,
    pub support_stiffness: f64,
    pub diametral_inertia: f64,
    pub polar_inertia: f64,
    /// Disk to damper distance [m].
    pub damper_arm: f64,
    /// Disk to linear support distance [m].
    pub support_arm: f64,
    pub support_damping: f64,
    /// Unbalance `m·e` [kg·m].
    pub unbalance: f64,
    pub speed: f64,
    pub damper: SfdParams,
}

impl Default for SfdRotorParams {
    fn default() -> Self {
        SfdRotorParams {
            mass: 37.62,
            support_stiffness: 5.4e6,
            diametral_inertia: 0.8,
            polar_inertia: 1.6,
            damper_arm: 0.894,
            support_arm: 1.038,
            support_damping: 265.0,
            unbalance: 6.508e-4,
            speed: 600.0,
            damper: SfdParams::default(),
        }
    }
}

impl SfdRotorParams {
    pub fn with_speed(mut self, speed: f64) -> Self {
        self.speed = speed;
        self
    }
}

/// Maps the film force onto `(x, y, θx, θy)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeFilm {
    pub params: SfdParams,
    pub arm: f64,
}

impl Nonlinearity for SqueezeFilm {
    fn force<S: Scalar>(&self, x: &[S], v: &[S], _a: &[S], _t: f64) -> Result<Vec<S>, ForceError> {
        let [fx, fy] = sfd_force(x, v, &self.params, self.arm)?;
        Ok(vec![
            fx.clone(),
            fy.clone(),
            -(fy * self.arm),
            fx * self.arm,
        ])
    }
}

pub fn sfd_rotor_system(p: &SfdRotorParams) -> Result<DynamicSystem, SolverError> {
    p.damper.validate()?;
    let (m, k, c) = (p.mass, p.support_stiffness, p.support_damping);
    let (l1, l2) = (p.damper_arm, p.support_arm);
    let gyro = p.polar_inertia * p.speed;
    let mass = DenseMatrix::from_diagonal(&[m, m, p.diametral_inertia, p.diametral_inertia]);
    let sq = l1 * l1 + l2 * l2;
    let damping = DenseMatrix::from_rows(&[
        vec![2.0 * c, 0.0, 0.0, c * (l1 - l2)],
        vec![0.0, 2.0 * c, c * (l2 - l1), 0.0],
        vec![0.0, c * (l2 - l1), c * sq, gyro],
        vec![c * (l1 - l2), 0.0, -gyro, c * sq],
    ])?;
    let stiffness = DenseMatrix::from_rows(&[
        vec![k, 0.0, 0.0, k * (l1 - l2) / 2.0],
        vec![0.0, k, k * (l2 - l1) / 2.0, 0.0],
        vec![0.0, k * (l2 - l1) / 2.0, k * sq / 2.0, 0.0],
        vec![k * (l1 - l2) / 2.0, 0.0, 0.0, k * sq / 2.0],
    ])?;
    let (delta, omega) = (p.unbalance, p.speed);
    Ok(DynamicSystem::new("sfd_rotor", mass, damping, stiffness)?
        .with_nonlinearity(SqueezeFilm {
            params: p.damper,
            arm: l1,
        })
        .with_excitation(move |t| {
            let f = delta * omega * omega;
            vec![f * (omega * t).cos(), f * (omega * t).sin(), 0.0, 0.0]
        })
        .with_scale(StateScale {
            length: 0.2 * p.damper.film_clearance / (1.0 + l1),
            rate: omega.abs().max(1.0),
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::State;

    #[test]
    fn integral_examples_at_zero_eccentricity() {
        let i02 = sommerfeld_integral(0, 2, &0.0, &0.0).unwrap();
        assert!((i02 - PI / 2.0).abs() < 1e-14);
        for th in [0.0, 0.3, 1.7, -2.0] {
            let i11 = sommerfeld_integral(1, 1, &0.0, &th).unwrap();
            assert!(i11.abs() < 1e-14);
        }
    }

    #[test]
    fn integral_closed_forms_at_zero_squeeze() {
        for r in [0.05, 0.1, 0.2, 0.3] {
            let one_minus = 1.0 - r * r;
            let i11 = sommerfeld_integral(1, 1, &r, &0.0).unwrap();
            let i20 = sommerfeld_integral(2, 0, &r, &0.0).unwrap();
            assert!(
                (i11 + 2.0 * r / one_minus.powi(2)).abs() < 1e-10,
                "{r} {i11}"
            );
            assert!(
                (i20 - PI / (2.0 * one_minus.powf(1.5))).abs() < 1e-10,
                "{r} {i20}"
            );
        }
    }

    #[test]
    fn rupture_is_an_error() {
        assert!(matches!(
            sommerfeld_integral(0, 0, &1.0, &0.0),
            Err(ForceError::FilmRupture { .. })
        ));
        let p = SfdParams::default();
        let q = [p.film_clearance * 1.01, 0.0, 0.0, 0.0];
        let qd = [0.0, 1e-3, 0.0, 0.0];
        assert!(matches!(
            sfd_force(&q, &qd, &p, 0.0),
            Err(ForceError::FilmRupture { .. })
        ));
    }

    #[test]
    fn concentric_journal_has_no_force() {
        let p = SfdParams::default();
        let f = sfd_force(&[0.0; 4], &[1.0, -2.0, 0.5, 0.1], &p, 0.894).unwrap();
        assert_eq!(f, [0.0, 0.0]);
    }

    #[test]
    fn circular_whirl_collapses_to_sommerfeld_products() {
        let p = SfdParams::default();
        let (e, psi, psi_dot) = (0.4 * p.film_clearance, 0.7, 600.0);
        let q = [e * psi.cos(), e * psi.sin(), 0.0, 0.0];
        let qd = [-e * psi_dot * psi.sin(), e * psi_dot * psi.cos(), 0.0, 0.0];
        let [fx, fy] = sfd_force(&q, &qd, &p, 0.0).unwrap();
        let r = 0.4;
        let coef = p.force_coefficient();
        let f_r = coef * sommerfeld_integral(1, 1, &r, &0.0).unwrap() * psi_dot * r;
        let f_t = coef * sommerfeld_integral(2, 0, &r, &0.0).unwrap() * psi_dot * r;
        let ex = f_r * psi.cos() - f_t * psi.sin();
        let ey = f_r * psi.sin() + f_t * psi.cos();
        assert!((fx - ex).abs() < 1e-9 * ex.abs().max(1.0));
        assert!((fy - ey).abs() < 1e-9 * ey.abs().max(1.0));
    }

    #[test]
    fn rotor_matrices() {
        let p = SfdRotorParams::default();
        let sys = sfd_rotor_system(&p).unwrap();
        let m = sys.mass();
        for i in 0..4 {
            assert!(m[(i, i)] > 0.0);
            for j in 0..4 {
                if i != j {
                    assert_eq!(m[(i, j)], 0.0);
                }
            }
        }
        let c = sys.damping();
        assert_eq!(c[(2, 3)], -c[(3, 2)]);
        assert_eq!(c[(2, 3)], p.polar_inertia * p.speed);
        assert!(sys.stiffness().is_symmetric(0.0));
    }

    #[test]
    fn residual_at_rest_is_negated_excitation() {
        let p = SfdRotorParams::default();
        let sys = sfd_rotor_system(&p).unwrap();
        let r = sys.equation_residual(&State::zeros(0.0, 4)).unwrap();
        let f = p.unbalance * p.speed * p.speed;
        assert!((r[0] + f).abs() < 1e-12 * f);
        assert_eq!(&r[1..], &[0.0, 0.0, 0.0]);
    }
}
