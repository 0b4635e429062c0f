//! Constructors for the benchmark systems.

mod oscillators;
pub mod quadrature;
pub mod rotor;
pub mod sfd;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use oscillators::{
    duffing, linear_sdof, pendulum, pendulum_energy, van_der_pol, CubicSpring, DuffingParams,
    GravityRestoring, VanDerPolDamping,
};
pub use quadrature::{gauss_legendre, gauss_legendre_15, GaussRule};
pub use rotor::{
    assemble_dual_rotor, bearing_force, disk_matrices, shaft_element_matrices, BearingParams,
    DiskProps, RotorLayout, ShaftElementProps,
};
pub use sfd::{sfd_force, sfd_rotor_system, sommerfeld_integral, SfdParams, SfdRotorParams};

use crate::analysis::Probe;
use crate::solver::{DynamicSystem, SolverError};

const SFD_ROTOR_JSON: &str = include_str!("../../../../models/sfd_rotor.json");

/// The shipped squeeze film damper rotor parameter file.
pub fn default_sfd_rotor_params() -> SfdRotorParams {
    serde_json::from_str(SFD_ROTOR_JSON).expect("shipped SFD rotor file is valid")
}

fn default_epsilon() -> f64 {
    1.0
}

fn default_speed_ratio() -> f64 {
    1.2
}

/// A built-in system selected by name in a configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    VanDerPol {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    Duffing {
        #[serde(default)]
        params: DuffingParams,
    },
    Pendulum,
    LinearSdof {
        mass: f64,
        damping: f64,
        stiffness: f64,
    },
    SfdRotor {
        #[serde(default)]
        params: Option<SfdRotorParams>,
        #[serde(default)]
        model_file: Option<PathBuf>,
        #[serde(default)]
        speed: Option<f64>,
    },
    DualRotor {
        #[serde(default)]
        model_file: Option<PathBuf>,
        /// High spool speed as a multiple of the low spool speed when the
        /// speed is overridden.
        #[serde(default = "default_speed_ratio")]
        speed_ratio: f64,
        #[serde(default)]
        speed: Option<f64>,
    },
}

impl SystemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::VanDerPol { .. } => "van_der_pol",
            SystemSpec::Duffing { .. } => "duffing",
            SystemSpec::Pendulum => "pendulum",
            SystemSpec::LinearSdof { .. } => "linear_sdof",
            SystemSpec::SfdRotor { .. } => "sfd_rotor",
            SystemSpec::DualRotor { .. } => "dual_rotor",
        }
    }

    /// The same system at spin speed `speed`; oscillators have no speed and
    /// are returned unchanged.
    pub fn at_speed(&self, speed: f64) -> SystemSpec {
        let mut out = self.clone();
        match &mut out {
            SystemSpec::SfdRotor { speed: s, .. } | SystemSpec::DualRotor { speed: s, .. } => {
                *s = Some(speed)
            }
            _ => {}
        }
        out
    }

    pub fn build(&self) -> Result<DynamicSystem, SolverError> {
        match self {
            SystemSpec::VanDerPol { epsilon } => Ok(van_der_pol(*epsilon)),
            SystemSpec::Duffing { params } => Ok(duffing(*params)),
            SystemSpec::Pendulum => Ok(pendulum()),
            SystemSpec::LinearSdof {
                mass,
                damping,
                stiffness,
            } => {
                if !(*mass > 0.0) {
                    return Err(SolverError::InvalidSystem("mass must be positive".into()));
                }
                Ok(linear_sdof(*mass, *damping, *stiffness))
            }
            SystemSpec::SfdRotor {
                params,
                model_file,
                speed,
            } => {
                let mut p = match (params, model_file) {
                    (Some(p), _) => *p,
                    (None, Some(path)) => {
                        let text = read_model(path)?;
                        serde_json::from_str(&text).map_err(|e| {
                            SolverError::InvalidSystem(format!("{}: {e}", path.display()))
                        })?
                    }
                    (None, None) => default_sfd_rotor_params(),
                };
                if let Some(w) = speed {
                    p = p.with_speed(*w);
                }
                sfd_rotor_system(&p)
            }
            SystemSpec::DualRotor {
                model_file,
                speed_ratio,
                speed,
            } => {
                let mut layout = match model_file {
                    Some(path) => RotorLayout::from_json(&read_model(path)?)?,
                    None => RotorLayout::default_dual_rotor(),
                };
                if let Some(w) = speed {
                    layout = layout.with_speeds(*w, speed_ratio * w);
                }
                assemble_dual_rotor(&layout)
            }
        }
    }
}

impl SystemSpec {
    /// Orbits reported by a sweep when none are configured: the probe nodes
    /// of a rotor layout, or the disk of the SFD rotor.
    pub fn default_probes(&self) -> Result<Vec<Probe>, SolverError> {
        match self {
            SystemSpec::SfdRotor { .. } => Ok(vec![Probe::new("disk", 0, 1)]),
            SystemSpec::DualRotor { model_file, .. } => {
                let layout = match model_file {
                    Some(path) => RotorLayout::from_json(&read_model(path)?)?,
                    None => RotorLayout::default_dual_rotor(),
                };
                Ok(layout
                    .probe_nodes
                    .iter()
                    .map(|&n| Probe::rotor_node(n))
                    .collect())
            }
            other => Err(SolverError::InvalidConfig(format!(
                "{} has no orbit to probe; list probes explicitly",
                other.name()
            ))),
        }
    }
}

fn read_model(path: &PathBuf) -> Result<String, SolverError> {
    std::fs::read_to_string(path)
        .map_err(|e| SolverError::InvalidSystem(format!("cannot read {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_sfd_file_matches_defaults() {
        assert_eq!(default_sfd_rotor_params(), SfdRotorParams::default());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let specs = [
            SystemSpec::VanDerPol { epsilon: 1.0 },
            SystemSpec::Duffing {
                params: DuffingParams::default(),
            },
            SystemSpec::Pendulum,
            SystemSpec::SfdRotor {
                params: None,
                model_file: None,
                speed: Some(800.0),
            },
        ];
        for s in specs {
            let text = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<SystemSpec>(&text).unwrap(), s);
            s.build().unwrap();
        }
        let vdp: SystemSpec = serde_json::from_str(r#"{"kind": "van_der_pol"}"#).unwrap();
        assert_eq!(vdp, SystemSpec::VanDerPol { epsilon: 1.0 });
    }

    #[test]
    fn speed_override_reaches_the_model() {
        let spec = SystemSpec::DualRotor {
            model_file: None,
            speed_ratio: 1.2,
            speed: None,
        };
        let a = spec.build().unwrap();
        let b = spec.at_speed(700.0).build().unwrap();
        assert_ne!(a.damping(), b.damping());
        assert_eq!(a.mass(), b.mass());
        assert_eq!(spec.default_probes().unwrap().len(), 4);
    }
}
