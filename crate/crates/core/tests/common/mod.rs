//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below roundoff the tolerance can no longer be met by bisection.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫ sinˡθ cosᵐθ / (1 + r cos θ)³` over `[θ₁, θ₁ + π]` by adaptive Simpson.
pub fn sommerfeld_oracle(l: i32, m: i32, r: f64, theta1: f64) -> f64 {
    let f = |t: f64| t.sin().powi(l) * t.cos().powi(m) / (1.0 + r * t.cos()).powi(3);
    adaptive_simpson(&f, theta1, theta1 + std::f64::consts::PI, 1e-14)
}

/// Film force from the short-bearing model, written directly in polar
/// form with adaptive quadrature: `(x, y, ẋ, ẏ)` of the journal centre.
pub fn sfd_force_oracle(
    pos: [f64; 2],
    vel: [f64; 2],
    viscosity: f64,
    radius: f64,
    length: f64,
    clearance: f64,
) -> [f64; 2] {
    let e = pos[0].hypot(pos[1]);
    let psi = pos[1].atan2(pos[0]);
    let (cp, sp) = (psi.cos(), psi.sin());
    let e_dot = vel[0] * cp + vel[1] * sp;
    let psi_dot = (-vel[0] * sp + vel[1] * cp) / e;
    let r = e / clearance;
    let r_dot = e_dot / clearance;
    let theta1 = (-r_dot).atan2(r * psi_dot);
    let k = viscosity * radius * length.powi(3) / clearance.powi(2);
    let i11 = sommerfeld_oracle(1, 1, r, theta1);
    let i02 = sommerfeld_oracle(0, 2, r, theta1);
    let i20 = sommerfeld_oracle(2, 0, r, theta1);
    let f_r = k * (r * psi_dot * i11 + r_dot * i02);
    let f_t = k * (r * psi_dot * i20 + r_dot * i11);
    [f_r * cp - f_t * sp, f_r * sp + f_t * cp]
}

/// Naive `O(N²)` one-sided DFT amplitude of a mean-removed signal.
pub fn dft_amplitudes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, v) in x.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (k * j % n) as f64 / n as f64;
                re += (v - mean) * ang.cos();
                im += (v - mean) * ang.sin();
            }
            let mag = re.hypot(im) / n as f64;
            if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                mag
            } else {
                2.0 * mag
            }
        })
        .collect()
}

/// Lower Cholesky factor; `None` unless `a` is symmetric positive definite.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d.is_nan() || d <= 0.0 {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
