use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use nnrad::analysis::{self, Integrator, SweepOptions};
use nnrad::check::check_residual_jacobian;
use nnrad::{IterationStrategy, NewmarkConfig};

use crate::config::{CheckSection, Config, SpectrumSection};

/// Command-line overrides shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub strategy: Option<IterationStrategy>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
}

impl Overrides {
    fn apply(&self, mut integ: Integrator) -> Result<Integrator> {
        match &mut integ {
            Integrator::Newmark(cfg) => {
                if let Some(s) = self.strategy {
                    cfg.strategy = s;
                }
                if let Some(dt) = self.dt {
                    cfg.dt = dt;
                }
            }
            Integrator::Rk4 { dt } => {
                if self.strategy.is_some() {
                    bail!("--strategy applies to the newmark integrator only");
                }
                if let Some(v) = self.dt {
                    *dt = v;
                }
            }
        }
        if !(integ.dt() > 0.0 && integ.dt().is_finite()) {
            bail!("time step must be positive, got {}", integ.dt());
        }
        Ok(integ)
    }
}

pub fn solve(cfg: &Config, ov: &Overrides, out: &mut dyn Write) -> Result<()> {
    let spec = cfg.system()?;
    let sys = spec.build()?;
    let n = sys.n_dof();
    let x0 = cfg.initial.x.clone().unwrap_or_else(|| vec![0.0; n]);
    let v0 = cfg.initial.v.clone().unwrap_or_else(|| vec![0.0; n]);
    if x0.len() != n || v0.len() != n {
        bail!(
            "schema error: initial.x and initial.v need {n} entries for {}",
            spec.name()
        );
    }
    let t_end = cfg.t_end.context("schema error: solve needs `t_end`")?;
    let integ = ov.apply(cfg.integrator())?;
    let traj = integ.run(&sys, &x0, &v0, cfg.t0, t_end)?;
    log::info!("{}: {} samples", spec.name(), traj.len());
    traj.write_csv(out)?;
    Ok(())
}

pub fn sweep(cfg: &Config, ov: &Overrides, out: &mut dyn Write) -> Result<()> {
    let spec = cfg.system()?;
    let sec = cfg
        .sweep
        .as_ref()
        .context("schema error: sweep needs a `sweep` section")?;
    let speeds = sec.speeds()?;
    if sec.duration.is_nan() || sec.duration <= 0.0 {
        bail!("schema error: sweep.duration must be positive");
    }
    let probes = match &sec.probes {
        Some(p) => p.clone(),
        None => spec.default_probes()?,
    };
    let mut opts = SweepOptions::new(ov.apply(cfg.integrator())?, sec.duration, probes);
    opts.steady_fraction = sec.steady_fraction;
    opts.continuation = sec.continuation;
    opts.static_equilibrium = sec.static_equilibrium;
    let table = analysis::sweep(|w| spec.at_speed(w).build(), &speeds, &opts)?;
    for r in table.failures() {
        log::warn!(
            "speed {} failed: {}",
            r.speed,
            r.error.as_deref().unwrap_or("")
        );
    }
    table.write_csv(out)?;
    Ok(())
}

/// Reads one named column and the `t` column (if present) from a CSV file.
fn read_column(path: &Path, column: &str) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let idx = find(column).ok_or_else(|| {
        anyhow!(
            "column `{column}` not found in {}; available columns: {}",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(", ")
        )
    })?;
    let t_idx = find("t");
    let mut values = Vec::new();
    let mut times = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .with_context(|| format!("row {}: bad number in column {i}", line + 2))
        };
        values.push(parse(idx)?);
        if let Some(ti) = t_idx {
            times.push(parse(ti)?);
        }
    }
    Ok((values, t_idx.map(|_| times)))
}

pub fn spectrum(sec: &SpectrumSection, out: &mut dyn Write) -> Result<()> {
    let input = sec
        .input
        .as_ref()
        .context("spectrum needs an input CSV (--input or spectrum.input)")?;
    let column = sec
        .column
        .as_deref()
        .context("spectrum needs a column (--column or spectrum.column)")?;
    let (mut values, times) = read_column(input, column)?;
    let dt = match (sec.dt, &times) {
        (Some(dt), _) => dt,
        (None, Some(t)) if t.len() >= 2 => (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64,
        _ => bail!("cannot infer the sample interval; pass --dt"),
    };
    if let Some(f) = sec.steady_fraction {
        if !(f > 0.0 && f < 1.0) {
            bail!("spectrum.steady_fraction must lie in (0, 1)");
        }
        let keep = ((f * values.len() as f64).round() as usize).clamp(1, values.len());
        values.drain(..values.len() - keep);
    }
    let s = analysis::spectrum(&values, dt)?;
    s.write_csv(out)?;
    Ok(())
}

/// Writes a report and returns whether the check passed.
pub fn check_jacobian(cfg: &Config, ov: &Overrides, out: &mut dyn Write) -> Result<bool> {
    let spec = cfg.system()?;
    let sys = spec.build()?;
    let sec = cfg.check.clone().unwrap_or_default();
    let CheckSection {
        samples, tolerance, ..
    } = sec;
    let seed = ov.seed.unwrap_or(sec.seed);
    let newmark = match ov.apply(cfg.integrator())? {
        Integrator::Newmark(n) => n,
        Integrator::Rk4 { dt } => NewmarkConfig::default().with_dt(dt),
    };
    let report = check_residual_jacobian(&sys, &newmark, samples, seed)?;
    let pass = report.passes(tolerance);
    writeln!(out, "system: {}", report.system)?;
    writeln!(out, "samples: {}", report.samples)?;
    writeln!(out, "seed: {seed}")?;
    writeln!(out, "max_relative_error: {:e}", report.max_error)?;
    writeln!(out, "worst_sample: {}", report.worst_sample)?;
    writeln!(out, "tolerance: {tolerance:e}")?;
    writeln!(out, "result: {}", if pass { "PASS" } else { "FAIL" })?;
    Ok(pass)
}
