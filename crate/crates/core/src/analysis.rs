//! Post-processing: orbit amplitude, spectra, steady-state windows and
//! speed sweeps.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ad::{value_and_jacobian, Dual, Scalar};
use crate::linalg::{lu_factor, norm2};
use crate::reference::rk4_second_order;
use crate::solver::{
    format_float, integrate, DynamicSystem, ForceError, NewmarkConfig, SolverError, State,
    Trajectory,
};

/// Environment variable capping sweep worker threads.
pub const THREADS_ENV: &str = "NNRAD_THREADS";
pub const DEFAULT_STEADY_FRACTION: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("empty signal")]
    Empty,
    #[error("signal lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("spectrum needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("window fraction must lie in (0, 1), got {0}")]
    Fraction(f64),
    #[error("sample interval must be positive, got {0}")]
    SampleInterval(f64),
    #[error("sweep needs at least one speed")]
    NoSpeeds,
    #[error("probe DOF {dof} out of range for a {n_dof}-DOF system")]
    Probe { dof: usize, n_dof: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// RMS radial distance of the orbit `(x, y)` from its mean position.
pub fn amplitude(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.is_empty() || y.is_empty() {
        return Err(AnalysisError::Empty);
    }
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let sum: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx).powi(2) + (b - my).powi(2))
        .sum();
    Ok((sum / x.len() as f64).sqrt())
}

/// One-sided amplitude spectrum of a mean-removed signal.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// Bin frequencies [rad/s].
    pub frequencies: Vec<f64>,
    /// Sinusoid amplitude per bin: a tone `A·sin(ωt)` on a bin shows `A`.
    pub magnitudes: Vec<f64>,
    n_samples: usize,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Index of the largest magnitude.
    pub fn dominant_bin(&self) -> usize {
        self.magnitudes
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &m)| {
                if m > best.1 {
                    (i, m)
                } else {
                    best
                }
            })
            .0
    }

    /// Indices of the `k` largest magnitudes, largest first.
    pub fn top_bins(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.magnitudes[b]
                .total_cmp(&self.magnitudes[a])
                .then(a.cmp(&b))
        });
        idx.truncate(k);
        idx
    }

    /// `Σ (x − x̄)²` recovered from the spectrum.
    pub fn signal_energy(&self) -> f64 {
        let n = self.n_samples as f64;
        let last = self.len() - 1;
        let nyquist_bin = self.n_samples.is_multiple_of(2);
        self.magnitudes
            .iter()
            .enumerate()
            .map(|(k, m)| {
                if k == 0 || (nyquist_bin && k == last) {
                    n * m * m
                } else {
                    0.5 * n * m * m
                }
            })
            .sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "frequency,magnitude")?;
        for (f, m) in self.frequencies.iter().zip(&self.magnitudes) {
            writeln!(out, "{},{}", format_float(*f), format_float(*m))?;
        }
        Ok(())
    }
}

pub fn spectrum(x: &[f64], dt: f64) -> Result<Spectrum, AnalysisError> {
    let n = x.len();
    if n < 2 {
        return Err(AnalysisError::TooShort(n));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(AnalysisError::SampleInterval(dt));
    }
    let m = mean(x);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bins = n / 2 + 1;
    let nf = n as f64;
    let frequencies = (0..bins).map(|k| 2.0 * PI * k as f64 / (nf * dt)).collect();
    let magnitudes = (0..bins)
        .map(|k| {
            let edge = k == 0 || (n.is_multiple_of(2) && k == n / 2);
            let scale = if edge { 1.0 } else { 2.0 };
            scale * buf[k].norm() / nf
        })
        .collect();
    Ok(Spectrum {
        frequencies,
        magnitudes,
        n_samples: n,
    })
}

/// The final `fraction` of the samples of `traj`, at least one.
pub fn steady_window(traj: &Trajectory, fraction: f64) -> Result<Trajectory, AnalysisError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(AnalysisError::Fraction(fraction));
    }
    let n = traj.len();
    if n == 0 {
        return Err(AnalysisError::Empty);
    }
    let keep = ((fraction * n as f64).round() as usize).clamp(1, n);
    let start = n - keep;
    Ok(Trajectory {
        states: traj.states[start..].to_vec(),
        iterations: traj.iterations[start..].to_vec(),
        jacobian_evaluations: traj.jacobian_evaluations[start..].to_vec(),
        residual_norms: traj.residual_norms[start..].to_vec(),
    })
}

/// Pair of displacement DOFs forming one orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub label: String,
    pub x_dof: usize,
    pub y_dof: usize,
}

impl Probe {
    pub fn new(label: impl Into<String>, x_dof: usize, y_dof: usize) -> Self {
        Probe {
            label: label.into(),
            x_dof,
            y_dof,
        }
    }

    /// Translational DOFs of a rotor node with four DOFs per node.
    pub fn rotor_node(node: usize) -> Self {
        Probe::new(format!("node{node}"), 4 * node, 4 * node + 1)
    }

    pub fn amplitude(&self, traj: &Trajectory) -> Result<f64, AnalysisError> {
        let n = traj.n_dof();
        for dof in [self.x_dof, self.y_dof] {
            if dof >= n {
                return Err(AnalysisError::Probe { dof, n_dof: n });
            }
        }
        amplitude(
            &traj.displacement(self.x_dof),
            &traj.displacement(self.y_dof),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Integrator {
    Newmark(NewmarkConfig),
    Rk4 { dt: f64 },
}

impl Integrator {
    pub fn dt(&self) -> f64 {
        match self {
            Integrator::Newmark(cfg) => cfg.dt,
            Integrator::Rk4 { dt } => *dt,
        }
    }

    pub fn run(
        &self,
        sys: &DynamicSystem,
        x0: &[f64],
        v0: &[f64],
        t0: f64,
        t_end: f64,
    ) -> Result<Trajectory, SolverError> {
        match self {
            Integrator::Newmark(cfg) => integrate(sys, x0, v0, t0, t_end, cfg),
            Integrator::Rk4 { dt } => rk4_second_order(sys, x0, v0, t0, t_end, *dt),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub integrator: Integrator,
    pub duration: f64,
    pub steady_fraction: f64,
    pub probes: Vec<Probe>,
    /// Start each speed from the final state of the previous one; forces
    /// sequential evaluation.
    pub continuation: bool,
    /// Start from the static equilibrium instead of rest.
    pub static_equilibrium: bool,
}

impl SweepOptions {
    pub fn new(integrator: Integrator, duration: f64, probes: Vec<Probe>) -> Self {
        SweepOptions {
            integrator,
            duration,
            steady_fraction: DEFAULT_STEADY_FRACTION,
            probes,
            continuation: false,
            static_equilibrium: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub speed: f64,
    /// One amplitude per probe; NaN when the run failed.
    pub amplitudes: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub probes: Vec<Probe>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Amplitudes of probe `p` in speed order.
    pub fn column(&self, p: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.amplitudes[p]).collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.error.is_some())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header = vec!["speed".to_string()];
        header.extend(self.probes.iter().map(|p| format!("A_{}", p.label)));
        writeln!(out, "{}", header.join(","))?;
        for r in &self.rows {
            let mut line = format_float(r.speed);
            for a in &r.amplitudes {
                line.push(',');
                line.push_str(&format_float(*a));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Solves `K·x + F(x, 0, 0, 0) = Q̄` by Newton iteration with an AD
/// Jacobian, where `Q̄` is the excitation averaged over one revolution at
/// `speed` (or `Q(0)` when the speed is zero).
pub fn static_equilibrium(sys: &DynamicSystem, speed: f64) -> Result<Vec<f64>, SolverError> {
    let n = sys.n_dof();
    let mut q_bar = vec![0.0; n];
    if speed != 0.0 {
        const SAMPLES: usize = 64;
        let period = 2.0 * PI / speed.abs();
        for k in 0..SAMPLES {
            let q = sys.excitation(period * k as f64 / SAMPLES as f64);
            for (acc, v) in q_bar.iter_mut().zip(q) {
                *acc += v / SAMPLES as f64;
            }
        }
    } else {
        q_bar = sys.excitation(0.0);
    }
    let k = sys.stiffness();
    let mut x = vec![0.0; n];
    for _ in 0..100 {
        let (g, jac) = value_and_jacobian(
            |xs: &[Dual]| -> Result<Vec<Dual>, ForceError> {
                let zero = vec![xs[0].constant_like(0.0); n];
                let f = sys.nonlinear_force(xs, &zero, &zero, 0.0)?;
                Ok(f.into_iter()
                    .enumerate()
                    .map(|(i, fi)| fi + Dual::weighted_sum(k.row(i), xs) - q_bar[i])
                    .collect())
            },
            &x,
        )
        .map_err(|source| SolverError::Force {
            step: 0,
            time: 0.0,
            source,
        })?;
        let dx = lu_factor(&jac)
            .map_err(|_| SolverError::SingularJacobian { step: 0 })?
            .solve(&g)?;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi -= d;
        }
        if norm2(&dx) <= 1e-12 * (1.0 + norm2(&x)) || norm2(&g) == 0.0 {
            return Ok(x);
        }
    }
    Err(SolverError::InitialAcceleration)
}

fn worker_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn run_speed<F>(
    factory: &F,
    speed: f64,
    opts: &SweepOptions,
    start: Option<&State>,
) -> Result<(Vec<f64>, State), AnalysisError>
where
    F: Fn(f64) -> Result<DynamicSystem, SolverError>,
{
    let sys = factory(speed)?;
    let n = sys.n_dof();
    let (x0, v0) = match start {
        Some(s) if s.n_dof() == n => (s.x.clone(), s.v.clone()),
        _ if opts.static_equilibrium => (static_equilibrium(&sys, speed)?, vec![0.0; n]),
        _ => (vec![0.0; n], vec![0.0; n]),
    };
    let traj = opts.integrator.run(&sys, &x0, &v0, 0.0, opts.duration)?;
    let window = steady_window(&traj, opts.steady_fraction)?;
    let amps = opts
        .probes
        .iter()
        .map(|p| p.amplitude(&window))
        .collect::<Result<Vec<_>, _>>()?;
    let last = traj
        .last()
        .cloned()
        .expect("trajectory holds the initial state");
    Ok((amps, last))
}

fn row(speed: f64, n_probes: usize, r: Result<Vec<f64>, AnalysisError>) -> SweepRow {
    match r {
        Ok(amplitudes) => SweepRow {
            speed,
            amplitudes,
            error: None,
        },
        Err(e) => {
            log::warn!("sweep speed {speed}: {e}");
            SweepRow {
                speed,
                amplitudes: vec![f64::NAN; n_probes],
                error: Some(e.to_string()),
            }
        }
    }
}

/// Integrates the system built by `factory` at every speed and records the
/// steady-window amplitude of each probe, one row per speed in ascending
/// order. Failed speeds keep their row with NaN amplitudes and the error
/// message.
pub fn sweep<F>(
    factory: F,
    speeds: &[f64],
    opts: &SweepOptions,
) -> Result<SweepTable, AnalysisError>
where
    F: Fn(f64) -> Result<DynamicSystem, SolverError> + Sync,
{
    if speeds.is_empty() {
        return Err(AnalysisError::NoSpeeds);
    }
    if !(opts.steady_fraction > 0.0 && opts.steady_fraction < 1.0) {
        return Err(AnalysisError::Fraction(opts.steady_fraction));
    }
    let n_probes = opts.probes.len();
    let mut rows: Vec<SweepRow> = if opts.continuation {
        let mut prev: Option<State> = None;
        speeds
            .iter()
            .map(|&w| {
                let r = run_speed(&factory, w, opts, prev.as_ref());
                let r = r.map(|(amps, last)| {
                    prev = Some(last);
                    amps
                });
                row(w, n_probes, r)
            })
            .collect()
    } else {
        let eval = || -> Vec<SweepRow> {
            speeds
                .par_iter()
                .map(|&w| row(w, n_probes, run_speed(&factory, w, opts, None).map(|r| r.0)))
                .collect()
        };
        match worker_threads() {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map(|pool| pool.install(eval))
                .unwrap_or_else(|_| eval()),
            None => eval(),
        }
    };
    // Continuation runs in the given order; the table is always by speed.
    rows.sort_by(|a, b| a.speed.total_cmp(&b.speed));
    Ok(SweepTable {
        probes: opts.probes.clone(),
        rows,
    })
}
