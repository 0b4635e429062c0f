//! Fixed-step classical Runge-Kutta, used as an independent comparison
//! integrator on the first-order form of a [`DynamicSystem`].

use crate::linalg::{lu_factor, LuFactorization};
use crate::solver::{step_count, DynamicSystem, SolverError, State, Trajectory};

/// `ẏ = f(t, y)`.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>, SolverError>;
}

/// Adapts a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>, SolverError> {
        Ok((self.f)(t, y))
    }
}

/// `[ẋ; ẍ] = [v; M⁻¹(Q − C·v − K·x − F(x, v, 0, t))]` with `M` factored once.
pub struct FirstOrderSystem<'a> {
    sys: &'a DynamicSystem,
    mass_lu: LuFactorization,
}

pub fn to_first_order(sys: &DynamicSystem) -> Result<FirstOrderSystem<'_>, SolverError> {
    if sys.depends_on_acceleration() {
        return Err(SolverError::AccelerationDependentForce);
    }
    let mass_lu = lu_factor(sys.mass()).map_err(|_| SolverError::SingularMass)?;
    Ok(FirstOrderSystem { sys, mass_lu })
}

impl FirstOrderSystem<'_> {
    pub fn acceleration(&self, t: f64, x: &[f64], v: &[f64]) -> Result<Vec<f64>, SolverError> {
        let n = self.sys.n_dof();
        let state = State::new(t, x.to_vec(), v.to_vec(), vec![0.0; n]);
        let r = self
            .sys
            .equation_residual(&state)
            .map_err(|source| SolverError::Force {
                step: 0,
                time: t,
                source,
            })?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        Ok(self.mass_lu.solve(&rhs)?)
    }
}

impl VectorField for FirstOrderSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.sys.n_dof()
    }

    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>, SolverError> {
        let n = self.sys.n_dof();
        let (x, v) = y.split_at(n);
        let mut out = v.to_vec();
        out.extend(self.acceleration(t, x, v)?);
        Ok(out)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

/// Classical four-stage Runge-Kutta with a fixed step on `[t0, t_end]`.
pub fn rk4_integrate<F: VectorField + ?Sized>(
    field: &F,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<OdeSolution, SolverError> {
    let mut out = OdeSolution::default();
    rk4_for_each(field, y0, t0, t_end, dt, |t, y| {
        out.times.push(t);
        out.states.push(y.to_vec());
        Ok(())
    })?;
    Ok(out)
}

fn rk4_for_each<F, V>(
    field: &F,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
    mut visit: V,
) -> Result<(), SolverError>
where
    F: VectorField + ?Sized,
    V: FnMut(f64, &[f64]) -> Result<(), SolverError>,
{
    if !(dt > 0.0) {
        return Err(SolverError::InvalidConfig("dt must be positive".into()));
    }
    if y0.len() != field.dim() {
        return Err(SolverError::InvalidConfig(format!(
            "initial state has {} components, field has {}",
            y0.len(),
            field.dim()
        )));
    }
    let n_steps = step_count(t0, t_end, dt)?;
    let tag = |step: usize, e: SolverError| match e {
        SolverError::Force { time, source, .. } => SolverError::Force { step, time, source },
        other => other,
    };
    let axpy = |y: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };
    let mut y = y0.to_vec();
    visit(t0, &y)?;
    for step in 1..=n_steps {
        let t = t0 + (step - 1) as f64 * dt;
        let k1 = field.eval(t, &y).map_err(|e| tag(step, e))?;
        let k2 = field
            .eval(t + 0.5 * dt, &axpy(&y, &k1, 0.5 * dt))
            .map_err(|e| tag(step, e))?;
        let k3 = field
            .eval(t + 0.5 * dt, &axpy(&y, &k2, 0.5 * dt))
            .map_err(|e| tag(step, e))?;
        let k4 = field
            .eval(t + dt, &axpy(&y, &k3, dt))
            .map_err(|e| tag(step, e))?;
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Divergence { step });
        }
        visit(t0 + step as f64 * dt, &y)?;
    }
    Ok(())
}

/// RK4 solution of a second-order system in the same [`Trajectory`] layout
/// as the Newmark integrator; accelerations are re-evaluated from the field.
pub fn rk4_second_order(
    sys: &DynamicSystem,
    x0: &[f64],
    v0: &[f64],
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory, SolverError> {
    let field = to_first_order(sys)?;
    let n = sys.n_dof();
    let mut y0 = x0.to_vec();
    y0.extend_from_slice(v0);
    let mut traj = Trajectory::default();
    rk4_for_each(&field, &y0, t0, t_end, dt, |t, y| {
        let (x, v) = y.split_at(n);
        let a = field.acceleration(t, x, v)?;
        let state = State::new(t, x.to_vec(), v.to_vec(), a);
        if traj.is_empty() {
            traj = Trajectory::starting_at(state);
        } else {
            traj.push(state, 0, 0, 0.0);
        }
        Ok(())
    })?;
    Ok(traj)
}
