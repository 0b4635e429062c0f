//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p nnrad-core --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nnrad::analysis::{spectrum, steady_window, sweep, Integrator, Probe, SweepOptions};
use nnrad::check::{check_residual_jacobian, random_step_point, residual_jacobians};
use nnrad::models::{
    assemble_dual_rotor, bearing_force, duffing, gauss_legendre_15, linear_sdof, pendulum,
    pendulum_energy, shaft_element_matrices, sommerfeld_integral, van_der_pol, BearingParams,
    DuffingParams, RotorLayout, ShaftElementProps, SystemSpec,
};
use nnrad::reference::rk4_second_order;
use nnrad::solver::integrate;
use nnrad::{Dual, DynamicSystem, IterationStrategy, NewmarkConfig, Trajectory};

use common::{cholesky, max_abs_diff, sommerfeld_oracle};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sfd_spec() -> SystemSpec {
    SystemSpec::SfdRotor {
        params: None,
        model_file: None,
        speed: None,
    }
}

fn dual_rotor_spec() -> SystemSpec {
    SystemSpec::DualRotor {
        model_file: None,
        speed_ratio: 1.2,
        speed: None,
    }
}

fn newmark(dt: f64) -> NewmarkConfig {
    NewmarkConfig::default().with_dt(dt)
}

fn ad_exactness() -> Outcome {
    let systems = [
        (SystemSpec::VanDerPol { epsilon: 1.0 }, 1e-3),
        (
            SystemSpec::Duffing {
                params: DuffingParams::default(),
            },
            1e-3,
        ),
        (SystemSpec::Pendulum, 1e-3),
        (
            SystemSpec::LinearSdof {
                mass: 2.0,
                damping: 0.3,
                stiffness: 5.0,
            },
            1e-3,
        ),
        (sfd_spec(), 1e-4),
        (dual_rotor_spec(), 1e-4),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (seed, (spec, dt)) in systems.iter().enumerate() {
        let sys = spec.build().unwrap();
        let report = check_residual_jacobian(&sys, &newmark(*dt), 100, seed as u64).unwrap();
        pass &= report.passes(1e-6);
        parts.push(format!("{} {:.1e}", spec.name(), report.max_error));
    }

    let p = DuffingParams::default();
    let sys = duffing(p);
    let cfg = newmark(1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (s, x1) = random_step_point(&sys, &mut rng);
        let (ad, _) = residual_jacobians(&sys, &cfg, &s, &x1).unwrap();
        let (b, g, dt) = (cfg.beta, cfg.gamma, cfg.dt);
        let exact = 1.0 / (b * dt * dt)
            + p.damping * g / (b * dt)
            + p.linear_stiffness
            + 3.0 * p.cubic_stiffness * x1[0] * x1[0];
        worst = worst.max((ad[(0, 0)] - exact).abs() / exact.abs());
    }
    pass &= worst < 1e-12;
    parts.push(format!("duffing analytic {worst:.1e}"));
    outcome(pass, parts.join(", "))
}

fn convergence_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn method_order() -> Outcome {
    let sys = linear_sdof(1.0, 0.0, 1.0);
    let t_end = 10.0;
    let global_error = |traj: &Trajectory| {
        traj.states
            .iter()
            .map(|s| (s.x[0] - s.t.cos()).abs())
            .fold(0.0, f64::max)
    };
    let nm: Vec<f64> = [0.1, 0.05, 0.025, 0.0125]
        .iter()
        .map(|&dt| {
            global_error(&integrate(&sys, &[1.0], &[0.0], 0.0, t_end, &newmark(dt)).unwrap())
        })
        .collect();
    let rk: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&dt| global_error(&rk4_second_order(&sys, &[1.0], &[0.0], 0.0, t_end, dt).unwrap()))
        .collect();
    let (p_nm, p_rk) = (convergence_orders(&nm), convergence_orders(&rk));
    let pass = p_nm.iter().all(|p| (1.8..=2.2).contains(p))
        && p_rk.iter().all(|p| (3.8..=4.2).contains(p));
    outcome(
        pass,
        format!("newmark orders {p_nm:.3?}, rk4 orders {p_rk:.3?}"),
    )
}

fn benchmark_agreement() -> Outcome {
    let systems: [(&str, DynamicSystem); 3] = [
        ("van_der_pol", van_der_pol(1.0)),
        ("duffing", duffing(DuffingParams::default())),
        ("pendulum", pendulum()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, sys) in &systems {
        let a = integrate(sys, &[2.0], &[0.0], 0.0, 20.0, &newmark(1e-3)).unwrap();
        let b = rk4_second_order(sys, &[2.0], &[0.0], 0.0, 20.0, 1e-3).unwrap();
        let d = max_abs_diff(&a.displacement(0), &b.displacement(0));
        pass &= a.len() == b.len() && d < 1e-3;
        parts.push(format!("{name} {d:.1e}"));
    }
    outcome(pass, format!("max |Δx|: {}", parts.join(", ")))
}

fn pendulum_conservation() -> Outcome {
    let traj = integrate(&pendulum(), &[2.0], &[0.0], 0.0, 100.0, &newmark(1e-3)).unwrap();
    let e0 = pendulum_energy(2.0, 0.0);
    let drift = traj
        .states
        .iter()
        .map(|s| (pendulum_energy(s.x[0], s.v[0]) - e0).abs())
        .fold(0.0, f64::max);
    outcome(
        drift < 1e-3,
        format!("max |E - E0| = {drift:.2e} over 100 s"),
    )
}

fn quadrature() -> Outcome {
    let rule = gauss_legendre_15();
    let monomial_error = |k: i32| {
        let exact = if k % 2 == 0 {
            2.0 / (k + 1) as f64
        } else {
            0.0
        };
        (rule.integrate(-1.0, 1.0, |t| t.powi(k)) - exact).abs()
    };
    let exact_through_29 = (0..=29).map(monomial_error).fold(0.0, f64::max);
    let degree_30 = monomial_error(30);
    let gl_pass = rule.len() == 15 && exact_through_29 < 1e-12 && degree_30 > 1e-12;

    let mut worst = (0.0f64, 0.0f64);
    let mut failing_r = Vec::new();
    for ri in 0..=9 {
        let r = ri as f64 / 10.0;
        let mut worst_r = 0.0f64;
        for (l, m) in [(1, 1), (0, 2), (2, 0)] {
            for k in 0..24 {
                let theta1 = -PI + 2.0 * PI * k as f64 / 24.0;
                let got = sommerfeld_integral(l as u32, m as u32, &r, &theta1).unwrap();
                let want = sommerfeld_oracle(l, m, r, theta1);
                worst_r = worst_r.max((got - want).abs());
            }
        }
        if worst_r >= 1e-8 {
            failing_r.push(r);
        }
        if worst_r > worst.0 {
            worst = (worst_r, r);
        }
    }
    let sommerfeld_pass = failing_r.is_empty();
    outcome(
        gl_pass && sommerfeld_pass,
        format!(
            "monomials ≤29 err {exact_through_29:.1e}, degree 30 err {degree_30:.1e}; \
             sommerfeld worst err {:.1e} at r={}, r over 1e-8: {failing_r:?}",
            worst.0, worst.1
        ),
    )
}

fn sfd_trend() -> Outcome {
    let speeds: Vec<f64> = (0..21).map(|k| 600.0 + 40.0 * k as f64).collect();
    let spec = sfd_spec();
    let opts = SweepOptions::new(
        Integrator::Newmark(newmark(1e-4)),
        1.5,
        spec.default_probes().unwrap(),
    );
    let table = sweep(|w| spec.at_speed(w).build(), &speeds, &opts).unwrap();
    let a = table.column(0);
    let decreasing = a.windows(2).all(|w| w[1] < w[0]);
    let first: Vec<f64> = a.windows(2).map(|w| w[0] - w[1]).collect();
    let max_first = first.iter().cloned().fold(0.0, f64::max);
    let max_second = a
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]).abs())
        .fold(0.0, f64::max);
    // Smooth: the decrement changes by less than its own size between neighbours.
    let smooth = max_second < max_first;
    outcome(
        decreasing && smooth && table.failures().count() == 0,
        format!(
            "A from {:.4e} to {:.4e} over {} speeds, max 2nd diff / max 1st diff = {:.2}",
            a[0],
            a[a.len() - 1],
            a.len(),
            max_second / max_first
        ),
    )
}

fn dual_rotor_agreement() -> Outcome {
    let layout = RotorLayout::default_dual_rotor();
    let sys = assemble_dual_rotor(&layout).unwrap();
    let n = sys.n_dof();
    let zeros = vec![0.0; n];
    let dt = 1e-4;
    let a = integrate(&sys, &zeros, &zeros, 0.0, 1.0, &newmark(dt)).unwrap();
    let b = rk4_second_order(&sys, &zeros, &zeros, 0.0, 1.0, dt).unwrap();
    let (wa, wb) = (
        steady_window(&a, 0.3).unwrap(),
        steady_window(&b, 0.3).unwrap(),
    );

    let mut worst = 0.0f64;
    for node in 0..layout.nodes.len() {
        let p = Probe::rotor_node(node);
        let (aa, ab) = (p.amplitude(&wa).unwrap(), p.amplitude(&wb).unwrap());
        worst = worst.max((aa - ab).abs() / ab);
    }
    let mut spectra_match = true;
    let mut bins = Vec::new();
    for &node in &layout.probe_nodes {
        let dof = 4 * node;
        let sa = spectrum(&wa.displacement(dof), dt).unwrap();
        let sb = spectrum(&wb.displacement(dof), dt).unwrap();
        let (mut ta, mut tb) = (sa.top_bins(3), sb.top_bins(3));
        ta.sort_unstable();
        tb.sort_unstable();
        spectra_match &= ta == tb;
        bins.push(format!(
            "node{node} {:?}",
            ta.iter()
                .map(|&k| sa.frequencies[k].round())
                .collect::<Vec<_>>()
        ));
    }
    outcome(
        worst < 0.01 && spectra_match,
        format!(
            "{n} DOF, max relative amplitude diff {worst:.2e}; top bins [rad/s] {}",
            bins.join(", ")
        ),
    )
}

fn strategy_equivalence() -> Outcome {
    let cases: [(&str, DynamicSystem, Vec<f64>, f64); 2] = [
        (
            "duffing",
            duffing(DuffingParams::default()),
            vec![2.0],
            1e-3,
        ),
        ("sfd_rotor", sfd_spec().build().unwrap(), vec![0.0; 4], 1e-4),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, sys, x0, dt) in &cases {
        let v0 = vec![0.0; x0.len()];
        let run = |s| integrate(sys, x0, &v0, 0.0, 10.0, &newmark(*dt).with_strategy(s)).unwrap();
        let full = run(IterationStrategy::FullNewton);
        let simplified = run(IterationStrategy::SimplifiedNewton);
        let broyden = run(IterationStrategy::BroydenRank1);
        let mut dx = 0.0f64;
        for other in [&simplified, &broyden] {
            for dof in 0..sys.n_dof() {
                dx = dx.max(max_abs_diff(
                    &full.displacement(dof),
                    &other.displacement(dof),
                ));
            }
        }
        let mean_iters =
            |t: &Trajectory| t.iterations[1..].iter().sum::<usize>() as f64 / (t.len() - 1) as f64;
        let mean_jacobians = |t: &Trajectory| {
            t.jacobian_evaluations[1..].iter().sum::<usize>() as f64 / (t.len() - 1) as f64
        };
        let (it_full, it_simp, it_broy) = (
            mean_iters(&full),
            mean_iters(&simplified),
            mean_iters(&broyden),
        );
        pass &= dx < 1e-6 && it_simp >= it_full;
        parts.push(format!(
            "{name} max |Δx| {dx:.1e}, iters/step full {it_full:.2} simplified {it_simp:.2} \
             broyden {it_broy:.2}, jacobians/step full {:.2} simplified {:.2}",
            mean_jacobians(&full),
            mean_jacobians(&simplified)
        ));
    }
    outcome(pass, parts.join("; "))
}

fn element_matrices() -> Outcome {
    let mut worst_rigid = 0.0f64;
    let mut all_pd = true;
    let mut count = 0;
    for &length in &[0.02, 0.1, 0.5, 1.5] {
        for &outer in &[0.01, 0.05, 0.2] {
            for &hollow in &[0.0, 0.5, 0.9] {
                let inner = hollow * outer;
                let area = PI / 4.0 * (outer * outer - inner * inner);
                let p = ShaftElementProps {
                    density: 7800.0,
                    length,
                    area,
                    young_modulus: 2.07e11,
                    shear_modulus: 7.96e10,
                    second_moment: PI / 64.0 * (outer.powi(4) - inner.powi(4)),
                    shear_factor: 0.886,
                };
                let e = shaft_element_matrices(&p);
                let norm = e.stiffness.frobenius_norm();
                for mode in [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, length, 1.0]] {
                    let r = e.stiffness.matvec(&mode).unwrap();
                    worst_rigid =
                        worst_rigid.max(r.iter().map(|v| v.abs()).fold(0.0, f64::max) / norm);
                }
                let rows: Vec<Vec<f64>> = (0..4).map(|i| e.mass.row(i).to_vec()).collect();
                all_pd &=
                    e.mass.is_symmetric(1e-12 * e.mass.max_abs()) && cholesky(&rows).is_some();
                count += 1;
            }
        }
    }
    outcome(
        worst_rigid < 1e-9 && all_pd,
        format!(
            "{count} elements, max |K·r|/‖K‖ = {worst_rigid:.1e}, mass positive definite: {all_pd}"
        ),
    )
}

fn contact_smoothness() -> Outcome {
    let layout = RotorLayout::default_dual_rotor();
    let p: BearingParams = layout.bearing_params(&layout.bearings[0]);
    let p = BearingParams {
        inner_speed: 0.0,
        outer_speed: 0.0,
        ..p
    };
    let h = 1e-9;
    let steps = 2000;
    let zero = Dual::constant(0.0, 1);
    let mut force = Vec::with_capacity(steps + 1);
    let mut slope = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let x = p.clearance + (k as f64 - steps as f64 / 2.0) * h;
        let xd = Dual::variable(x, 0, 1);
        let [fx, _] = bearing_force([&xd, &zero], [&zero, &zero], 0.0, &p).unwrap();
        force.push(fx.value() / p.contact_stiffness);
        slope.push(fx.seeds()[0] / p.contact_stiffness);
    }
    let max_force_jump = force
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let max_slope_jump = slope
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    // d/dδ δ^p is Hölder-(p−1) with constant p; ball directions add Σcos² ≤ n.
    let exponent = 10.0 / 9.0;
    let kink_bound = exponent * h.powf(exponent - 1.0) * p.n_balls as f64;
    let at_zero = force[steps / 2].abs();
    outcome(
        max_force_jump < 1e-6 && max_slope_jump <= kink_bound && at_zero == 0.0,
        format!(
            "per unit contact stiffness: max force jump {max_force_jump:.1e}, \
             max slope jump {max_slope_jump:.2e} (bound {kink_bound:.2e})"
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "AD Jacobian exactness", ad_exactness),
        (2, "method convergence order", method_order),
        (3, "oscillator NNR-AD vs RK4", benchmark_agreement),
        (4, "pendulum energy drift", pendulum_conservation),
        (5, "quadrature accuracy", quadrature),
        (6, "SFD amplitude trend", sfd_trend),
        (7, "dual rotor NNR-AD vs RK4", dual_rotor_agreement),
        (8, "iteration strategy equivalence", strategy_equivalence),
        (9, "shaft element matrices", element_matrices),
        (10, "bearing contact smoothness", contact_smoothness),
    ];
    let mut failed = Vec::new();
    for (id, title, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "[{id:>2}] {verdict} {title:<32} ({:.1} s) {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
