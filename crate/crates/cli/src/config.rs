//! JSON run configuration, versioned by `schema_version`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use nnrad::analysis::{Integrator, Probe, DEFAULT_STEADY_FRACTION};
use nnrad::models::SystemSpec;
use nnrad::NewmarkConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub t0: f64,
    pub t_end: Option<f64>,
    pub integrator: Option<Integrator>,
    pub sweep: Option<SweepSection>,
    pub check: Option<CheckSection>,
    pub spectrum: Option<SpectrumSection>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    pub x: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub speeds: Option<Vec<f64>>,
    pub range: Option<SpeedRange>,
    pub duration: f64,
    #[serde(default = "default_fraction")]
    pub steady_fraction: f64,
    pub probes: Option<Vec<Probe>>,
    #[serde(default)]
    pub continuation: bool,
    #[serde(default)]
    pub static_equilibrium: bool,
}

fn default_fraction() -> f64 {
    DEFAULT_STEADY_FRACTION
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        CheckSection {
            samples: default_samples(),
            seed: 0,
            tolerance: default_tolerance(),
        }
    }
}

fn default_samples() -> usize {
    100
}

fn default_tolerance() -> f64 {
    1e-5
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub input: Option<PathBuf>,
    pub column: Option<String>,
    pub dt: Option<f64>,
    /// Analyse only the final fraction of the samples.
    pub steady_fraction: Option<f64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg =
            Config::parse(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Config> {
        let probe: serde_json::Value = serde_json::from_str(text).context("malformed JSON")?;
        match probe.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => bail!("unsupported schema_version {v}, expected {SCHEMA_VERSION}"),
            None => bail!("missing integer field `schema_version` (expected {SCHEMA_VERSION})"),
        }
        let cfg: Config = serde_json::from_value(probe).context("schema error")?;
        debug_assert_eq!(cfg.schema_version, SCHEMA_VERSION);
        Ok(cfg)
    }

    /// Relative model and input paths are taken relative to the config file.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.system {
            Some(SystemSpec::SfdRotor {
                model_file: Some(p),
                ..
            })
            | Some(SystemSpec::DualRotor {
                model_file: Some(p),
                ..
            }) => fix(p),
            _ => {}
        }
        if let Some(SpectrumSection { input: Some(p), .. }) = &mut self.spectrum {
            fix(p);
        }
    }

    pub fn system(&self) -> Result<&SystemSpec> {
        self.system
            .as_ref()
            .context("config needs a `system` section")
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
            .clone()
            .unwrap_or_else(|| Integrator::Newmark(NewmarkConfig::default()))
    }
}

impl SweepSection {
    pub fn speeds(&self) -> Result<Vec<f64>> {
        let speeds = match (&self.speeds, &self.range) {
            (Some(s), None) => s.clone(),
            (None, Some(r)) => {
                if r.count == 0 {
                    bail!("schema error: sweep.range.count must be at least 1");
                }
                if !(r.start.is_finite() && r.stop.is_finite()) || r.stop < r.start {
                    bail!(
                        "schema error: sweep.range needs finite start <= stop, got {}..{}",
                        r.start,
                        r.stop
                    );
                }
                if r.count == 1 {
                    vec![r.start]
                } else {
                    let step = (r.stop - r.start) / (r.count - 1) as f64;
                    (0..r.count).map(|k| r.start + step * k as f64).collect()
                }
            }
            (Some(_), Some(_)) => bail!("schema error: give sweep.speeds or sweep.range, not both"),
            (None, None) => bail!("schema error: sweep needs `speeds` or `range`"),
        };
        if speeds.is_empty() {
            bail!("schema error: sweep.speeds is empty");
        }
        if let Some(w) = speeds.iter().find(|w| !w.is_finite()) {
            bail!("schema error: non-finite speed {w}");
        }
        Ok(speeds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_missing_or_wrong_version() {
        assert!(Config::parse(r#"{"system": {"kind": "pendulum"}}"#).is_err());
        let e = Config::parse(r#"{"schema_version": 2}"#).unwrap_err();
        assert!(e.to_string().contains("schema_version 2"));
    }

    #[test]
    fn parses_newmark_integrator() {
        let c = Config::parse(
            r#"{"schema_version": 1, "system": {"kind": "duffing"},
                "integrator": {"method": "newmark", "dt": 0.01, "strategy": "broyden"}}"#,
        )
        .unwrap();
        match c.integrator() {
            Integrator::Newmark(n) => {
                assert_eq!(n.dt, 0.01);
                assert_eq!(n.strategy, nnrad::IterationStrategy::BroydenRank1);
                assert_eq!(n.beta, 0.25);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(Config::parse(r#"{"schema_version": 1, "tend": 3}"#).is_err());
    }

    #[test]
    fn range_expansion() {
        let s = SweepSection {
            speeds: None,
            range: Some(SpeedRange {
                start: 600.0,
                stop: 1400.0,
                count: 5,
            }),
            duration: 1.0,
            steady_fraction: 0.3,
            probes: None,
            continuation: false,
            static_equilibrium: false,
        };
        assert_eq!(
            s.speeds().unwrap(),
            vec![600.0, 800.0, 1000.0, 1200.0, 1400.0]
        );
        let bad = SweepSection {
            range: Some(SpeedRange {
                start: 10.0,
                stop: 1.0,
                count: 3,
            }),
            ..s
        };
        assert!(bad
            .speeds()
            .unwrap_err()
            .to_string()
            .contains("schema error"));
    }
}
