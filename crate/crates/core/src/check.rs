//! Verification of AD residual Jacobians against central finite
//! differences at reproducible random states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ad::{value_and_jacobian, Dual};
use crate::linalg::DenseMatrix;
use crate::solver::{residual, DynamicSystem, ForceError, NewmarkConfig, SolverError, State};

pub const FD_RELATIVE_STEP: f64 = 1e-6;
pub const ERROR_FLOOR: f64 = 1e-12;

/// Central-difference Jacobian of `f` at `x` with per-component steps.
pub fn central_difference_jacobian<F, E>(
    mut f: F,
    x: &[f64],
    steps: &[f64],
) -> Result<DenseMatrix, E>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, E>,
{
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    let mut probe = x.to_vec();
    for j in 0..n {
        let h = steps[j];
        probe[j] = x[j] + h;
        let fp = f(&probe)?;
        probe[j] = x[j] - h;
        let fm = f(&probe)?;
        probe[j] = x[j];
        cols.push(
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }
    let m = cols.first().map_or(0, Vec::len);
    let mut out = DenseMatrix::zeros(m, n);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            out[(i, j)] = *v;
        }
    }
    Ok(out)
}

/// `max|A − B| / max(max|A|, floor)`.
pub fn relative_difference(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let diff = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    diff / a.max_abs().max(ERROR_FLOOR)
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobianReport {
    pub system: String,
    pub samples: usize,
    pub max_error: f64,
    pub worst_sample: usize,
}

impl JacobianReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_error < tolerance
    }
}

/// A random previous state and step candidate scaled by the system's
/// [`StateScale`](crate::solver::StateScale).
pub fn random_step_point(sys: &DynamicSystem, rng: &mut impl Rng) -> (State, Vec<f64>) {
    let n = sys.n_dof();
    let sc = sys.scale();
    let t = rng.random_range(0.0..10.0);
    let mut draw =
        |mag: f64| -> Vec<f64> { (0..n).map(|_| mag * rng.random_range(-1.0..1.0)).collect() };
    let x = draw(sc.length);
    let v = draw(sc.length * sc.rate);
    let a = draw(sc.length * sc.rate * sc.rate);
    let dx = draw(0.1 * sc.length);
    let x1 = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
    (State::new(t, x, v, a), x1)
}

fn force_error(source: ForceError) -> SolverError {
    SolverError::Force {
        step: 0,
        time: 0.0,
        source,
    }
}

/// AD and finite-difference Jacobians of the step residual at one point.
pub fn residual_jacobians(
    sys: &DynamicSystem,
    cfg: &NewmarkConfig,
    s: &State,
    x1: &[f64],
) -> Result<(DenseMatrix, DenseMatrix), SolverError> {
    let t1 = s.t + cfg.dt;
    let (_, ad) = value_and_jacobian(|xd: &[Dual]| residual::<Dual>(xd, s, t1, sys, cfg), x1)
        .map_err(force_error)?;
    let floor = sys.scale().length;
    let steps: Vec<f64> = x1
        .iter()
        .map(|v| FD_RELATIVE_STEP * v.abs().max(floor))
        .collect();
    let fd =
        central_difference_jacobian(|x: &[f64]| residual::<f64>(x, s, t1, sys, cfg), x1, &steps)
            .map_err(force_error)?;
    Ok((ad, fd))
}

/// Largest AD versus finite-difference discrepancy over `samples` random
/// points drawn from `seed`.
pub fn check_residual_jacobian(
    sys: &DynamicSystem,
    cfg: &NewmarkConfig,
    samples: usize,
    seed: u64,
) -> Result<JacobianReport, SolverError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = JacobianReport {
        system: sys.name().to_string(),
        samples,
        max_error: 0.0,
        worst_sample: 0,
    };
    for k in 0..samples {
        let (s, x1) = random_step_point(sys, &mut rng);
        let (ad, fd) = residual_jacobians(sys, cfg, &s, &x1)?;
        let err = relative_difference(&ad, &fd);
        if err > report.max_error || !err.is_finite() {
            report.max_error = err;
            report.worst_sample = k;
        }
    }
    Ok(report)
}
