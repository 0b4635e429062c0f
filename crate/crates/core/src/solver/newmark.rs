//! Newmark time stepping with Newton iterations on the step residual.
//!
//! Each step solves `R(x_{n+1}) = 0`, where `R` is the equation of motion at
//! `t_{n+1}` with `ẍ_{n+1}` and `ẋ_{n+1}` eliminated through the Newmark
//! relations. The Jacobian `∂R/∂x_{n+1}` comes from one forward AD pass over
//! the same residual code.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ad::{value_and_jacobian, Dual, Scalar};
use crate::linalg::{lu_factor, norm2, DenseMatrix, LinalgError, LuFactorization};

use super::{DynamicSystem, ForceError, SolverError, State, SystemScalar, Trajectory};

/// How the Newton matrix is refreshed within a step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum IterationStrategy {
    /// Fresh AD Jacobian at every iterate.
    #[default]
    #[serde(rename = "full")]
    FullNewton,
    /// One AD Jacobian per step, at the initial guess.
    #[serde(rename = "simplified")]
    SimplifiedNewton,
    /// One AD Jacobian per step followed by rank-1 secant updates.
    #[serde(rename = "broyden")]
    BroydenRank1,
}

impl IterationStrategy {
    pub const ALL: [IterationStrategy; 3] = [
        IterationStrategy::FullNewton,
        IterationStrategy::SimplifiedNewton,
        IterationStrategy::BroydenRank1,
    ];
}

impl FromStr for IterationStrategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(IterationStrategy::FullNewton),
            "simplified" => Ok(IterationStrategy::SimplifiedNewton),
            "broyden" => Ok(IterationStrategy::BroydenRank1),
            other => Err(format!(
                "unknown strategy `{other}` (expected full, simplified or broyden)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewmarkConfig {
    /// Displacement parameter (`1/4` for average acceleration).
    pub beta: f64,
    /// Velocity weight (`1/2` for no numerical damping).
    pub gamma: f64,
    pub dt: f64,
    /// Accept when `‖Δx‖₂ < tol_dx·(1 + ‖x‖₂)`.
    pub tol_dx: f64,
    /// Accept when `‖R‖₂ < tol_res`.
    pub tol_res: f64,
    pub max_iter: usize,
    pub strategy: IterationStrategy,
}

impl Default for NewmarkConfig {
    fn default() -> Self {
        NewmarkConfig {
            beta: 0.25,
            gamma: 0.5,
            dt: 1e-3,
            tol_dx: 1e-10,
            tol_res: 1e-8,
            max_iter: 50,
            strategy: IterationStrategy::FullNewton,
        }
    }
}

impl NewmarkConfig {
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_strategy(mut self, strategy: IterationStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.to_string()));
        if !(self.beta > 0.0) {
            return bad("beta must be positive");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt must be positive and finite");
        }
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1");
        }
        if !(self.tol_dx >= 0.0) || !(self.tol_res >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        Ok(())
    }

    /// Set when the parameters leave the unconditionally stable range.
    pub fn stability_warning(&self) -> Option<String> {
        if self.gamma < 0.5 || self.beta < self.gamma / 2.0 {
            Some(format!(
                "Newmark parameters beta={}, gamma={} are not unconditionally stable \
                 (need gamma >= 1/2 and beta >= gamma/2)",
                self.beta, self.gamma
            ))
        } else {
            None
        }
    }
}

/// `ẍ_{n+1}` implied by a candidate `x_{n+1}`.
pub fn predict_acceleration<S: Scalar>(x1: &[S], s: &State, cfg: &NewmarkConfig) -> Vec<S> {
    let (b, dt) = (cfg.beta, cfg.dt);
    let c0 = 1.0 / (b * dt * dt);
    let c1 = 1.0 / (b * dt);
    let c2 = 1.0 / (2.0 * b) - 1.0;
    x1.iter()
        .enumerate()
        .map(|(i, xi)| (xi.clone() - s.x[i]) * c0 - (c1 * s.v[i] + c2 * s.a[i]))
        .collect()
}

/// `ẋ_{n+1}` implied by a candidate `x_{n+1}`.
pub fn predict_velocity<S: Scalar>(x1: &[S], s: &State, cfg: &NewmarkConfig) -> Vec<S> {
    let (b, g, dt) = (cfg.beta, cfg.gamma, cfg.dt);
    let c0 = g / (b * dt);
    let c1 = 1.0 - g / b;
    let c2 = (1.0 - g / (2.0 * b)) * dt;
    x1.iter()
        .enumerate()
        .map(|(i, xi)| (xi.clone() - s.x[i]) * c0 + (c1 * s.v[i] + c2 * s.a[i]))
        .collect()
}

/// Step residual `M·ẍ₁ + C·ẋ₁ + K·x₁ + F(x₁, ẋ₁, ẍ₁, t₁) − Q(t₁)`.
pub fn residual<S: SystemScalar>(
    x1: &[S],
    s: &State,
    t1: f64,
    sys: &DynamicSystem,
    cfg: &NewmarkConfig,
) -> Result<Vec<S>, ForceError> {
    let n = sys.n_dof();
    if x1.len() != n || s.n_dof() != n {
        return Err(ForceError::Dimension {
            expected: n,
            found: if x1.len() != n { x1.len() } else { s.n_dof() },
        });
    }
    let a1 = predict_acceleration(x1, s, cfg);
    let v1 = predict_velocity(x1, s, cfg);
    let f = sys.nonlinear_force(x1, &v1, &a1, t1)?;
    let q = sys.excitation(t1);
    let (m, c, k) = (sys.mass(), sys.damping(), sys.stiffness());
    Ok(f.into_iter()
        .enumerate()
        .map(|(i, fi)| {
            S::weighted_sum(m.row(i), &a1)
                + S::weighted_sum(c.row(i), &v1)
                + S::weighted_sum(k.row(i), x1)
                + fi
                - q[i]
        })
        .collect())
}

/// Consistent `ẍ₀` from the equation of motion at the initial state.
pub fn initial_acceleration(
    sys: &DynamicSystem,
    x0: &[f64],
    v0: &[f64],
    t0: f64,
) -> Result<Vec<f64>, SolverError> {
    let n = sys.n_dof();
    check_len(n, x0.len())?;
    check_len(n, v0.len())?;
    let force_err = |source| SolverError::Force {
        step: 0,
        time: t0,
        source,
    };
    let zeros = vec![0.0; n];

    // with a zero guess `rhs` is exact for ẍ-independent forces and the
    // Newton start point otherwise
    let residual_at = |a: &[f64]| -> Result<Vec<f64>, SolverError> {
        sys.equation_residual(&State::new(t0, x0.to_vec(), v0.to_vec(), a.to_vec()))
            .map_err(force_err)
    };
    if !sys.depends_on_acceleration() {
        let r0 = residual_at(&zeros)?;
        let rhs: Vec<f64> = r0.iter().map(|r| -r).collect();
        let mass_lu = lu_factor(sys.mass()).map_err(|_| SolverError::SingularMass)?;
        return Ok(mass_lu.solve(&rhs)?);
    }

    let xd: Vec<Dual> = x0.iter().map(|&v| Dual::constant(v, n)).collect();
    let vd: Vec<Dual> = v0.iter().map(|&v| Dual::constant(v, n)).collect();
    let mut a = zeros;
    let tol = 1e-12;
    for _ in 0..100 {
        let (r, jac) = value_and_jacobian(
            |ad: &[Dual]| -> Result<Vec<Dual>, ForceError> {
                let f = sys.nonlinear_force(&xd, &vd, ad, t0)?;
                let q = sys.excitation(t0);
                Ok(f.into_iter()
                    .enumerate()
                    .map(|(i, fi)| {
                        Dual::weighted_sum(sys.mass().row(i), ad)
                            + Dual::weighted_sum(sys.damping().row(i), &vd)
                            + Dual::weighted_sum(sys.stiffness().row(i), &xd)
                            + fi
                            - q[i]
                    })
                    .collect())
            },
            &a,
        )
        .map_err(force_err)?;
        let da = lu_factor(&jac)
            .map_err(|_| SolverError::SingularJacobian { step: 0 })?
            .solve(&r)?;
        for (ai, d) in a.iter_mut().zip(&da) {
            *ai -= d;
        }
        if norm2(&da) < tol * (1.0 + norm2(&a)) {
            return Ok(a);
        }
    }
    Err(SolverError::InitialAcceleration)
}

/// Diagnostics of one accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub iterations: usize,
    pub jacobian_evaluations: usize,
    pub residual_norm: f64,
    pub increment_norm: f64,
}

/// Advances `s` by one step of `cfg.dt`.
pub fn step(
    sys: &DynamicSystem,
    s: &State,
    cfg: &NewmarkConfig,
) -> Result<(State, StepReport), SolverError> {
    advance(sys, s, cfg, 1)
}

fn advance(
    sys: &DynamicSystem,
    s: &State,
    cfg: &NewmarkConfig,
    step_index: usize,
) -> Result<(State, StepReport), SolverError> {
    let t1 = s.t + cfg.dt;
    let force_err = |source| SolverError::Force {
        step: step_index,
        time: t1,
        source,
    };
    let factor = |j: &DenseMatrix| -> Result<LuFactorization, SolverError> {
        lu_factor(j).map_err(|e| match e {
            LinalgError::Singular { .. } => SolverError::SingularJacobian { step: step_index },
            other => other.into(),
        })
    };
    let eval_r = |x: &[f64]| residual::<f64>(x, s, t1, sys, cfg).map_err(force_err);
    let eval_rj = |x: &[f64]| {
        value_and_jacobian(|xd: &[Dual]| residual::<Dual>(xd, s, t1, sys, cfg), x)
            .map_err(force_err)
    };

    let mut x = s.x.clone();
    let (mut r, mut jac) = eval_rj(&x)?;
    let mut lu = factor(&jac)?;
    let mut jacobian_evaluations = 1;
    let mut iterations = 0;
    let mut refreshed = false;
    let mut dx_norm = 0.0;

    loop {
        let r_norm = norm2(&r);
        let converged =
            r_norm < cfg.tol_res || (iterations > 0 && dx_norm < cfg.tol_dx * (1.0 + norm2(&x)));
        if converged {
            let a = predict_acceleration(&x, s, cfg);
            let v = predict_velocity(&x, s, cfg);
            let report = StepReport {
                iterations,
                jacobian_evaluations,
                residual_norm: r_norm,
                increment_norm: dx_norm,
            };
            return Ok((State::new(t1, x, v, a), report));
        }
        if iterations >= cfg.max_iter {
            return Err(SolverError::NonConvergence {
                step: step_index,
                iterations,
                residual_norm: r_norm,
                increment_norm: dx_norm,
            });
        }

        let dx = lu.solve(&r)?;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi -= d;
        }
        iterations += 1;
        dx_norm = norm2(&dx);

        let r_new = eval_r(&x)?;
        let done = norm2(&r_new) < cfg.tol_res || dx_norm < cfg.tol_dx * (1.0 + norm2(&x));
        if done {
            r = r_new;
            continue;
        }
        match cfg.strategy {
            IterationStrategy::FullNewton => {
                let (rr, j) = eval_rj(&x)?;
                r = rr;
                lu = factor(&j)?;
                jacobian_evaluations += 1;
            }
            IterationStrategy::SimplifiedNewton => r = r_new,
            IterationStrategy::BroydenRank1 => {
                if !refreshed && iterations > cfg.max_iter / 2 {
                    let (rr, j) = eval_rj(&x)?;
                    r = rr;
                    jac = j;
                    jacobian_evaluations += 1;
                    refreshed = true;
                } else {
                    broyden_update(&mut jac, &dx, &r, &r_new);
                    r = r_new;
                }
                lu = factor(&jac)?;
            }
        }
    }
}

/// Good-Broyden secant update `J += (y − J·s)·sᵀ / (sᵀ·s)` with the step
/// `s = −dx` and residual change `y = r_new − r_old`.
fn broyden_update(jac: &mut DenseMatrix, dx: &[f64], r_old: &[f64], r_new: &[f64]) {
    let n = dx.len();
    let ss: f64 = dx.iter().map(|d| d * d).sum();
    if ss == 0.0 {
        return;
    }
    for i in 0..n {
        let js: f64 = -jac.row(i).iter().zip(dx).map(|(j, d)| j * d).sum::<f64>();
        let coef = (r_new[i] - r_old[i] - js) / ss;
        for (k, d) in dx.iter().enumerate() {
            jac[(i, k)] += coef * (-d);
        }
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), SolverError> {
    if expected != found {
        return Err(SolverError::Linalg(LinalgError::DimensionMismatch {
            expected,
            found,
        }));
    }
    Ok(())
}

/// Number of uniform steps covering `[t0, t_end]`.
pub(crate) fn step_count(t0: f64, t_end: f64, dt: f64) -> Result<usize, SolverError> {
    if !(t_end >= t0) {
        return Err(SolverError::InvalidConfig(format!(
            "t_end ({t_end}) must not precede t0 ({t0})"
        )));
    }
    let span = (t_end - t0) / dt;
    Ok((span - 1e-9 * span.max(1.0)).ceil().max(0.0) as usize)
}

/// Integrates from `(x0, v0)` at `t0` to `t_end` on a uniform grid.
pub fn integrate(
    sys: &DynamicSystem,
    x0: &[f64],
    v0: &[f64],
    t0: f64,
    t_end: f64,
    cfg: &NewmarkConfig,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    let a0 = initial_acceleration(sys, x0, v0, t0)?;
    integrate_from(
        sys,
        State::new(t0, x0.to_vec(), v0.to_vec(), a0),
        t_end,
        cfg,
    )
}

/// Integrates from an already consistent state.
pub fn integrate_from(
    sys: &DynamicSystem,
    initial: State,
    t_end: f64,
    cfg: &NewmarkConfig,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    check_len(sys.n_dof(), initial.n_dof())?;
    if let Some(w) = cfg.stability_warning() {
        log::warn!("{w}");
    }
    let t0 = initial.t;
    let n_steps = step_count(t0, t_end, cfg.dt)?;
    let mut traj = Trajectory::starting_at(initial);
    traj.states.reserve(n_steps);
    for k in 1..=n_steps {
        let prev = traj.last().expect("trajectory is never empty");
        let (mut next, report) = advance(sys, prev, cfg, k)?;
        // grid times by multiplication, not accumulation
        next.t = t0 + k as f64 * cfg.dt;
        traj.push(
            next,
            report.iterations,
            report.jacobian_evaluations,
            report.residual_norm,
        );
    }
    Ok(traj)
}
