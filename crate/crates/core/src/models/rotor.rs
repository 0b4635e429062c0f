//! Finite-element rotors on Hertzian rolling-element bearings.
//!
//! Every node carries four DOFs in the order `x, y, θx, θy`. Shaft and disk
//! matrices are formulated in two bending planes with local coordinates
//! `(x, −θy)` and `(y, θx)` and scattered into the global system.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ad::Scalar;
use crate::linalg::DenseMatrix;
use crate::solver::{DynamicSystem, ForceError, Nonlinearity, SolverError, StateScale};

pub const DOFS_PER_NODE: usize = 4;
/// Load-deflection exponent of a ball contact.
pub const HERTZ_EXPONENT: f64 = 10.0 / 9.0;

/// Timoshenko beam element data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShaftElementProps {
    pub density: f64,
    pub length: f64,
    pub area: f64,
    pub young_modulus: f64,
    pub shear_modulus: f64,
    pub second_moment: f64,
    pub shear_factor: f64,
}

impl ShaftElementProps {
    pub fn validate(&self) -> Result<(), SolverError> {
        let fields = [
            ("density", self.density),
            ("length", self.length),
            ("area", self.area),
            ("young_modulus", self.young_modulus),
            ("shear_modulus", self.shear_modulus),
            ("second_moment", self.second_moment),
            ("shear_factor", self.shear_factor),
        ];
        positive_fields("shaft element", &fields)
    }

    /// Ratio of bending to shear stiffness, `12EI/(κGAl²)`.
    pub fn shear_parameter(&self) -> f64 {
        12.0 * self.young_modulus * self.second_moment
            / (self.shear_factor * self.shear_modulus * self.area * self.length.powi(2))
    }
}

fn positive_fields(what: &str, fields: &[(&str, f64)]) -> Result<(), SolverError> {
    for &(name, v) in fields {
        if !(v > 0.0 && v.is_finite()) {
            return Err(SolverError::InvalidSystem(format!(
                "{what} {name} must be positive and finite, got {v}"
            )));
        }
    }
    Ok(())
}

/// Element matrices in local plane coordinates `[w₁, ψ₁, w₂, ψ₂]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShaftElementMatrices {
    pub mass: DenseMatrix,
    /// Polar inertia coupling; multiplied by the spin speed it gives the
    /// gyroscopic matrix.
    pub polar: DenseMatrix,
    pub stiffness: DenseMatrix,
}

pub fn shaft_element_matrices(p: &ShaftElementProps) -> ShaftElementMatrices {
    let l = p.length;
    let phi = p.shear_parameter();
    let phi2 = phi * phi;
    let l2 = l * l;
    let m1 = 312.0 + 588.0 * phi + 280.0 * phi2;
    let m2 = (44.0 + 77.0 * phi + 35.0 * phi2) * l;
    let m3 = 108.0 + 252.0 * phi + 140.0 * phi2;
    let m4 = -(26.0 + 63.0 * phi + 35.0 * phi2) * l;
    let m5 = (8.0 + 14.0 * phi + 7.0 * phi2) * l2;
    let m6 = -(6.0 + 14.0 * phi + 7.0 * phi2) * l2;
    let m7 = 36.0;
    let m8 = (3.0 - 15.0 * phi) * l;
    let m9 = (4.0 + 5.0 * phi + 10.0 * phi2) * l2;
    let m10 = (-1.0 + 5.0 * phi + 5.0 * phi2) * l2;

    let translational = [
        [m1, m2, m3, m4],
        [m2, m5, -m4, m6],
        [m3, -m4, m1, -m2],
        [m4, m6, -m2, m5],
    ];
    let rotary = [
        [m7, m8, -m7, m8],
        [m8, m9, -m8, m10],
        [-m7, -m8, m7, -m8],
        [m8, m10, -m8, m9],
    ];
    let stiff = [
        [12.0, 6.0 * l, -12.0, 6.0 * l],
        [6.0 * l, (4.0 + phi) * l2, -6.0 * l, (2.0 - phi) * l2],
        [-12.0, -6.0 * l, 12.0, -6.0 * l],
        [6.0 * l, (2.0 - phi) * l2, -6.0 * l, (4.0 + phi) * l2],
    ];

    let denom = (1.0 + phi).powi(2);
    let c_t = p.density * p.area * l / (840.0 * denom);
    let c_r = p.density * p.second_moment / (30.0 * l * denom);
    let c_j = p.density * p.second_moment / (15.0 * l * denom);
    let c_k = p.young_modulus * p.second_moment / (l.powi(3) * (1.0 + phi));

    let build = |f: &dyn Fn(usize, usize) -> f64| {
        let data = (0..16).map(|k| f(k / 4, k % 4)).collect();
        DenseMatrix::from_row_major(4, 4, data).expect("4x4 data")
    };
    ShaftElementMatrices {
        mass: build(&|i, j| c_t * translational[i][j] + c_r * rotary[i][j]),
        polar: build(&|i, j| c_j * rotary[i][j]),
        stiffness: build(&|i, j| c_k * stiff[i][j]),
    }
}

/// Rigid disk with a point unbalance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskProps {
    pub mass: f64,
    pub diametral_inertia: f64,
    pub polar_inertia: f64,
    #[serde(default)]
    pub eccentricity: f64,
    #[serde(default)]
    pub phase: f64,
}

impl DiskProps {
    pub fn validate(&self) -> Result<(), SolverError> {
        positive_fields(
            "disk",
            &[
                ("mass", self.mass),
                ("diametral_inertia", self.diametral_inertia),
                ("polar_inertia", self.polar_inertia),
            ],
        )?;
        if !(self.eccentricity.is_finite() && self.phase.is_finite()) {
            return Err(SolverError::InvalidSystem(
                "disk eccentricity and phase must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Disk matrices in local plane coordinates `[w, ψ]` at spin speed `speed`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskMatrices {
    pub mass: DenseMatrix,
    pub polar: DenseMatrix,
    pub speed: f64,
    unbalance: f64,
    phase: f64,
}

impl DiskMatrices {
    /// `speed · polar`.
    pub fn gyroscopic(&self) -> DenseMatrix {
        self.polar.scaled(self.speed)
    }

    /// Unbalance force `(F_x, F_y)` on the disk center.
    pub fn unbalance(&self, t: f64) -> [f64; 2] {
        let arg = self.speed * t + self.phase;
        [self.unbalance * arg.sin(), self.unbalance * arg.cos()]
    }

    pub fn unbalance_magnitude(&self) -> f64 {
        self.unbalance.abs()
    }
}

pub fn disk_matrices(p: &DiskProps, speed: f64) -> DiskMatrices {
    DiskMatrices {
        mass: DenseMatrix::from_diagonal(&[p.mass, p.diametral_inertia]),
        polar: DenseMatrix::from_diagonal(&[0.0, p.polar_inertia]),
        speed,
        unbalance: p.mass * speed * speed * p.eccentricity,
        phase: p.phase,
    }
}

/// Rolling-element bearing with Hertzian ball contacts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BearingParams {
    pub n_balls: usize,
    /// Contact stiffness [N/m^(10/9)].
    pub contact_stiffness: f64,
    /// Radial clearance [m].
    pub clearance: f64,
    pub inner_race_radius: f64,
    pub outer_race_radius: f64,
    #[serde(default)]
    pub inner_speed: f64,
    #[serde(default)]
    pub outer_speed: f64,
}

impl BearingParams {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.n_balls == 0 {
            return Err(SolverError::InvalidSystem(
                "bearing needs at least one ball".into(),
            ));
        }
        positive_fields(
            "bearing",
            &[
                ("contact_stiffness", self.contact_stiffness),
                ("inner_race_radius", self.inner_race_radius),
                ("outer_race_radius", self.outer_race_radius),
            ],
        )?;
        if !(self.clearance >= 0.0 && self.clearance.is_finite()) {
            return Err(SolverError::InvalidSystem(format!(
                "bearing clearance must be non-negative, got {}",
                self.clearance
            )));
        }
        Ok(())
    }

    /// `(r_i·ω_outer + r_o·ω_inner)/(r_i + r_o)`.
    pub fn cage_speed(&self) -> f64 {
        (self.inner_race_radius * self.outer_speed + self.outer_race_radius * self.inner_speed)
            / (self.inner_race_radius + self.outer_race_radius)
    }

    /// Angular position of ball `k` (zero based) at time `t`.
    pub fn ball_angle(&self, k: usize, t: f64) -> f64 {
        2.0 * PI * k as f64 / self.n_balls as f64 + self.cage_speed() * t
    }
}

/// Contact force `(F_x, F_y)` exerted by the inner race on the balls, for
/// inner race displacement `(x_i, y_i)` and outer race `(x_o, y_o)`.
pub fn bearing_force<S: Scalar>(
    inner: [&S; 2],
    outer: [&S; 2],
    t: f64,
    p: &BearingParams,
) -> Result<[S; 2], ForceError> {
    let dx = inner[0].clone() - outer[0];
    let dy = inner[1].clone() - outer[1];
    let mut fx = dx.constant_like(0.0);
    let mut fy = dx.constant_like(0.0);
    for k in 0..p.n_balls {
        let (s, c) = p.ball_angle(k, t).sin_cos();
        let delta = dx.clone() * c + dy.clone() * s - p.clearance;
        let load = delta.relu_pow(HERTZ_EXPONENT)?;
        fx = fx + load.clone() * c;
        fy = fy + load * s;
    }
    Ok([fx * p.contact_stiffness, fy * p.contact_stiffness])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spool {
    Low,
    High,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    /// Axial coordinate [m].
    pub position: f64,
    pub spool: Spool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub density: f64,
    pub young_modulus: f64,
    pub shear_modulus: f64,
}

/// Tubular shaft element between two nodes of one spool.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShaftSection {
    pub start: usize,
    pub end: usize,
    pub outer_diameter: f64,
    #[serde(default)]
    pub inner_diameter: f64,
    pub material: Material,
    pub shear_factor: f64,
}

impl ShaftSection {
    pub fn props(&self, nodes: &[NodeSpec]) -> ShaftElementProps {
        let (d_o, d_i) = (self.outer_diameter, self.inner_diameter);
        ShaftElementProps {
            density: self.material.density,
            length: (nodes[self.end].position - nodes[self.start].position).abs(),
            area: PI / 4.0 * (d_o.powi(2) - d_i.powi(2)),
            young_modulus: self.material.young_modulus,
            shear_modulus: self.material.shear_modulus,
            second_moment: PI / 64.0 * (d_o.powi(4) - d_i.powi(4)),
            shear_factor: self.shear_factor,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskPlacement {
    pub node: usize,
    #[serde(flatten)]
    pub props: DiskProps,
}

/// A bearing between a node (inner race) and either ground or another node
/// (outer race). Race speeds follow the spools of the connected nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BearingPlacement {
    #[serde(default)]
    pub label: String,
    pub inner_node: usize,
    #[serde(default)]
    pub outer_node: Option<usize>,
    pub n_balls: usize,
    pub contact_stiffness: f64,
    pub clearance: f64,
    pub inner_race_radius: f64,
    pub outer_race_radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpoolSpeeds {
    pub low: f64,
    pub high: f64,
}

impl SpoolSpeeds {
    pub fn of(&self, spool: Spool) -> f64 {
        match spool {
            Spool::Low => self.low,
            Spool::High => self.high,
        }
    }
}

/// `C = a₀·M + a₁·K` before gyroscopic terms are added.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayleighDamping {
    pub mass_coefficient: f64,
    pub stiffness_coefficient: f64,
}

pub const LAYOUT_SCHEMA_VERSION: u32 = 1;

fn default_gravity() -> f64 {
    9.81
}

/// Complete rotor description as stored in a model parameter file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotorLayout {
    pub schema_version: u32,
    #[serde(default)]
    pub description: String,
    pub nodes: Vec<NodeSpec>,
    pub shafts: Vec<ShaftSection>,
    #[serde(default)]
    pub disks: Vec<DiskPlacement>,
    #[serde(default)]
    pub bearings: Vec<BearingPlacement>,
    pub speeds: SpoolSpeeds,
    #[serde(default)]
    pub damping: RayleighDamping,
    #[serde(default)]
    pub gravity: bool,
    #[serde(default = "default_gravity")]
    pub gravity_acceleration: f64,
    /// Probe nodes for amplitude reporting.
    #[serde(default)]
    pub probe_nodes: Vec<usize>,
}

const DUAL_ROTOR_JSON: &str = include_str!("../../../../models/dual_rotor.json");

impl RotorLayout {
    /// The shipped ten-node dual-rotor parameter set. Its values are
    /// illustrative.
    pub fn default_dual_rotor() -> RotorLayout {
        RotorLayout::from_json(DUAL_ROTOR_JSON).expect("shipped dual rotor file is valid")
    }

    pub fn from_json(text: &str) -> Result<RotorLayout, SolverError> {
        let layout: RotorLayout = serde_json::from_str(text)
            .map_err(|e| SolverError::InvalidSystem(format!("rotor layout: {e}")))?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn with_speeds(mut self, low: f64, high: f64) -> Self {
        self.speeds = SpoolSpeeds { low, high };
        self
    }

    pub fn n_dof(&self) -> usize {
        DOFS_PER_NODE * self.nodes.len()
    }

    fn check_node(&self, node: usize, what: &str) -> Result<(), SolverError> {
        if node >= self.nodes.len() {
            return Err(SolverError::InvalidSystem(format!(
                "{what} references node {node}, layout has {} nodes",
                self.nodes.len()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.schema_version != LAYOUT_SCHEMA_VERSION {
            return Err(SolverError::InvalidSystem(format!(
                "unsupported rotor layout schema_version {}, expected {LAYOUT_SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.nodes.is_empty() {
            return Err(SolverError::InvalidSystem(
                "rotor layout has no nodes".into(),
            ));
        }
        if !(self.speeds.low.is_finite() && self.speeds.high.is_finite()) {
            return Err(SolverError::InvalidSystem(
                "spool speeds must be finite".into(),
            ));
        }
        for (i, s) in self.shafts.iter().enumerate() {
            let what = format!("shaft {i}");
            self.check_node(s.start, &what)?;
            self.check_node(s.end, &what)?;
            if self.nodes[s.start].spool != self.nodes[s.end].spool {
                return Err(SolverError::InvalidSystem(format!(
                    "{what} joins nodes of different spools"
                )));
            }
            if !(s.inner_diameter >= 0.0 && s.inner_diameter < s.outer_diameter) {
                return Err(SolverError::InvalidSystem(format!(
                    "{what} needs 0 <= inner_diameter < outer_diameter"
                )));
            }
            s.props(&self.nodes).validate()?;
        }
        for (i, d) in self.disks.iter().enumerate() {
            self.check_node(d.node, &format!("disk {i}"))?;
            d.props.validate()?;
        }
        for (i, b) in self.bearings.iter().enumerate() {
            let what = format!("bearing {i}");
            self.check_node(b.inner_node, &what)?;
            if let Some(o) = b.outer_node {
                self.check_node(o, &what)?;
                if self.nodes[o].spool == self.nodes[b.inner_node].spool {
                    return Err(SolverError::InvalidSystem(format!(
                        "{what} must couple a low and a high spool node"
                    )));
                }
            }
            self.bearing_params(b).validate()?;
        }
        for &n in &self.probe_nodes {
            self.check_node(n, "probe")?;
        }
        if !(self.damping.mass_coefficient >= 0.0 && self.damping.stiffness_coefficient >= 0.0) {
            return Err(SolverError::InvalidSystem(
                "Rayleigh coefficients must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Bearing parameters with race speeds taken from the attached spools.
    pub fn bearing_params(&self, b: &BearingPlacement) -> BearingParams {
        BearingParams {
            n_balls: b.n_balls,
            contact_stiffness: b.contact_stiffness,
            clearance: b.clearance,
            inner_race_radius: b.inner_race_radius,
            outer_race_radius: b.outer_race_radius,
            inner_speed: self.speeds.of(self.nodes[b.inner_node].spool),
            outer_speed: b
                .outer_node
                .map_or(0.0, |o| self.speeds.of(self.nodes[o].spool)),
        }
    }
}

/// Global DOF indices and signs of the two bending planes at `node`.
fn plane_maps(node: usize) -> [([usize; 2], [f64; 2]); 2] {
    let base = DOFS_PER_NODE * node;
    [
        ([base, base + 3], [1.0, -1.0]),
        ([base + 1, base + 2], [1.0, 1.0]),
    ]
}

/// Adds `Tᵀ·local·T` into both planes for the given node sequence.
fn scatter_planes(global: &mut DenseMatrix, local: &DenseMatrix, nodes: &[usize]) {
    for plane in 0..2 {
        let (idx, sgn) = plane_dofs(nodes, plane);
        for i in 0..idx.len() {
            for j in 0..idx.len() {
                global[(idx[i], idx[j])] += sgn[i] * sgn[j] * local[(i, j)];
            }
        }
    }
}

/// Adds `speed·(T₂ᵀ·polar·T₁ − T₁ᵀ·polar·T₂)`.
fn scatter_gyroscopic(global: &mut DenseMatrix, polar: &DenseMatrix, speed: f64, nodes: &[usize]) {
    let (i1, s1) = plane_dofs(nodes, 0);
    let (i2, s2) = plane_dofs(nodes, 1);
    for i in 0..i1.len() {
        for j in 0..i1.len() {
            let g = speed * polar[(i, j)];
            global[(i2[i], i1[j])] += s2[i] * s1[j] * g;
            global[(i1[i], i2[j])] -= s1[i] * s2[j] * g;
        }
    }
}

fn plane_dofs(nodes: &[usize], plane: usize) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::with_capacity(2 * nodes.len());
    let mut sgn = Vec::with_capacity(2 * nodes.len());
    for &n in nodes {
        let (i, s) = plane_maps(n)[plane];
        idx.extend(i);
        sgn.extend(s);
    }
    (idx, sgn)
}

#[derive(Clone, Debug)]
struct MountedBearing {
    inner: usize,
    outer: Option<usize>,
    params: BearingParams,
}

/// Sum of all bearing contact forces. The inner node receives `+F`, the
/// outer node of an inter-shaft bearing `−F`.
#[derive(Clone, Debug)]
pub struct BearingSupports {
    n_dof: usize,
    bearings: Vec<MountedBearing>,
}

impl Nonlinearity for BearingSupports {
    fn force<S: Scalar>(&self, x: &[S], _v: &[S], _a: &[S], t: f64) -> Result<Vec<S>, ForceError> {
        let zero = x[0].constant_like(0.0);
        let mut out = vec![zero.clone(); self.n_dof];
        for b in &self.bearings {
            let i = DOFS_PER_NODE * b.inner;
            let [fx, fy] = match b.outer {
                Some(o) => {
                    let o = DOFS_PER_NODE * o;
                    bearing_force([&x[i], &x[i + 1]], [&x[o], &x[o + 1]], t, &b.params)?
                }
                None => bearing_force([&x[i], &x[i + 1]], [&zero, &zero], t, &b.params)?,
            };
            if let Some(o) = b.outer {
                let o = DOFS_PER_NODE * o;
                out[o] = out[o].clone() - &fx;
                out[o + 1] = out[o + 1].clone() - &fy;
            }
            out[i] = out[i].clone() + &fx;
            out[i + 1] = out[i + 1].clone() + &fy;
        }
        Ok(out)
    }
}

/// Assembled linear operators of a rotor layout.
#[derive(Clone, Debug, PartialEq)]
pub struct RotorMatrices {
    pub mass: DenseMatrix,
    pub stiffness: DenseMatrix,
    pub gyroscopic: DenseMatrix,
    pub damping: DenseMatrix,
}

pub fn assemble_rotor_matrices(layout: &RotorLayout) -> Result<RotorMatrices, SolverError> {
    layout.validate()?;
    let n = layout.n_dof();
    let mut mass = DenseMatrix::zeros(n, n);
    let mut stiffness = DenseMatrix::zeros(n, n);
    let mut gyroscopic = DenseMatrix::zeros(n, n);
    for s in &layout.shafts {
        let e = shaft_element_matrices(&s.props(&layout.nodes));
        let nodes = [s.start, s.end];
        scatter_planes(&mut mass, &e.mass, &nodes);
        scatter_planes(&mut stiffness, &e.stiffness, &nodes);
        let speed = layout.speeds.of(layout.nodes[s.start].spool);
        scatter_gyroscopic(&mut gyroscopic, &e.polar, speed, &nodes);
    }
    for d in &layout.disks {
        let speed = layout.speeds.of(layout.nodes[d.node].spool);
        let dm = disk_matrices(&d.props, speed);
        scatter_planes(&mut mass, &dm.mass, &[d.node]);
        scatter_gyroscopic(&mut gyroscopic, &dm.polar, speed, &[d.node]);
    }
    let structural = mass
        .scaled(layout.damping.mass_coefficient)
        .mat_add(&stiffness.scaled(layout.damping.stiffness_coefficient))?;
    let damping = structural.mat_add(&gyroscopic)?;
    Ok(RotorMatrices {
        mass,
        stiffness,
        gyroscopic,
        damping,
    })
}

/// Builds `M·ẍ + C·ẋ + K·x + F_bearing(x, t) = Q_unbalance(t) (+ Q_gravity)`.
pub fn assemble_dual_rotor(layout: &RotorLayout) -> Result<DynamicSystem, SolverError> {
    let mats = assemble_rotor_matrices(layout)?;
    let n = layout.n_dof();

    let disks: Vec<(usize, DiskMatrices)> = layout
        .disks
        .iter()
        .map(|d| {
            let speed = layout.speeds.of(layout.nodes[d.node].spool);
            (d.node, disk_matrices(&d.props, speed))
        })
        .collect();
    let gravity_load: Vec<f64> = if layout.gravity {
        let mut ones_y = vec![0.0; n];
        for node in 0..layout.nodes.len() {
            ones_y[DOFS_PER_NODE * node + 1] = 1.0;
        }
        mats.mass
            .matvec(&ones_y)?
            .into_iter()
            .map(|v| -layout.gravity_acceleration * v)
            .collect()
    } else {
        vec![0.0; n]
    };

    let bearings = layout
        .bearings
        .iter()
        .map(|b| MountedBearing {
            inner: b.inner_node,
            outer: b.outer_node,
            params: layout.bearing_params(b),
        })
        .collect();

    let max_speed = layout
        .speeds
        .low
        .abs()
        .max(layout.speeds.high.abs())
        .max(1.0);
    let typical = layout
        .bearings
        .iter()
        .map(|b| b.clearance)
        .fold(0.0, f64::max)
        .max(1e-6);
    Ok(
        DynamicSystem::new("dual_rotor", mats.mass, mats.damping, mats.stiffness)?
            .with_nonlinearity(BearingSupports { n_dof: n, bearings })
            .with_excitation(move |t| {
                let mut q = gravity_load.clone();
                for (node, dm) in &disks {
                    let [fx, fy] = dm.unbalance(t);
                    q[DOFS_PER_NODE * node] += fx;
                    q[DOFS_PER_NODE * node + 1] += fy;
                }
                q
            })
            .with_scale(StateScale {
                length: 10.0 * typical,
                rate: max_speed,
            }),
    )
}
