//! Forward-mode automatic differentiation over seed bundles.
//!
//! A [`Dual`] carries a value together with its partial derivatives with
//! respect to every independent input of one evaluation. Lifting `n` inputs
//! with identity seeds ([`lift_inputs`]) and evaluating a vector function once
//! yields every column of its Jacobian in a single pass ([`jacobian`]).
//!
//! Model code is written once against the [`Scalar`] trait and then runs both
//! on plain `f64` (time stepping, reference integration) and on [`Dual`]
//! (Newton Jacobians).

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("cannot lift an empty input vector")]
    EmptyInput,
    #[error("seed width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
    #[error("domain error in `{op}` at operand value {value:e}")]
    Domain { op: &'static str, value: f64 },
    #[error("output component {index} has seed width {found}, expected {expected}")]
    OutputWidth {
        index: usize,
        expected: usize,
        found: usize,
    },
}

/// Value plus derivative seeds.
///
/// Seeds have a fixed width per evaluation. Mixing widths in the operator
/// overloads panics; the `try_*` methods report [`AdError::WidthMismatch`].
#[derive(Clone, Debug, PartialEq)]
pub struct Dual {
    value: f64,
    seeds: Vec<f64>,
}

impl Dual {
    /// A constant of the given bundle width (all-zero seeds).
    pub fn constant(value: f64, width: usize) -> Self {
        Dual {
            value,
            seeds: vec![0.0; width],
        }
    }

    /// The `index`-th independent variable of a bundle of `width`.
    pub fn variable(value: f64, index: usize, width: usize) -> Self {
        let mut seeds = vec![0.0; width];
        seeds[index] = 1.0;
        Dual { value, seeds }
    }

    pub fn from_parts(value: f64, seeds: Vec<f64>) -> Self {
        Dual { value, seeds }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn seeds(&self) -> &[f64] {
        &self.seeds
    }

    pub fn width(&self) -> usize {
        self.seeds.len()
    }

    pub fn into_seeds(self) -> Vec<f64> {
        self.seeds
    }

    fn check_width(&self, other: &Dual) -> Result<(), AdError> {
        if self.seeds.len() == other.seeds.len() {
            Ok(())
        } else {
            Err(AdError::WidthMismatch {
                left: self.seeds.len(),
                right: other.seeds.len(),
            })
        }
    }

    fn assert_width(&self, other: &Dual) {
        if let Err(e) = self.check_width(other) {
            panic!("{e}");
        }
    }

    /// Applies the chain rule for a unary op with value `value` and local
    /// derivative `deriv`, reusing the seed buffer.
    fn chain(mut self, value: f64, deriv: f64) -> Dual {
        for s in &mut self.seeds {
            *s *= deriv;
        }
        self.value = value;
        self
    }

    pub fn try_add(&self, rhs: &Dual) -> Result<Dual, AdError> {
        self.check_width(rhs)?;
        Ok(self.clone() + rhs)
    }

    pub fn try_sub(&self, rhs: &Dual) -> Result<Dual, AdError> {
        self.check_width(rhs)?;
        Ok(self.clone() - rhs)
    }

    pub fn try_mul(&self, rhs: &Dual) -> Result<Dual, AdError> {
        self.check_width(rhs)?;
        Ok(self.clone() * rhs)
    }
}

impl Add<&Dual> for Dual {
    type Output = Dual;
    fn add(mut self, rhs: &Dual) -> Dual {
        self.assert_width(rhs);
        self.value += rhs.value;
        for (s, r) in self.seeds.iter_mut().zip(&rhs.seeds) {
            *s += r;
        }
        self
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        self + &rhs
    }
}

impl Sub<&Dual> for Dual {
    type Output = Dual;
    fn sub(mut self, rhs: &Dual) -> Dual {
        self.assert_width(rhs);
        self.value -= rhs.value;
        for (s, r) in self.seeds.iter_mut().zip(&rhs.seeds) {
            *s -= r;
        }
        self
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        self - &rhs
    }
}

impl Mul<&Dual> for Dual {
    type Output = Dual;
    fn mul(mut self, rhs: &Dual) -> Dual {
        self.assert_width(rhs);
        let (a, b) = (self.value, rhs.value);
        for (s, r) in self.seeds.iter_mut().zip(&rhs.seeds) {
            *s = *s * b + a * r;
        }
        self.value = a * b;
        self
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        self * &rhs
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        let v = -self.value;
        self.chain(v, -1.0)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(mut self, rhs: f64) -> Dual {
        self.value += rhs;
        self
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(mut self, rhs: f64) -> Dual {
        self.value -= rhs;
        self
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        let v = self.value * rhs;
        self.chain(v, rhs)
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, rhs: f64) -> Dual {
        self * (1.0 / rhs)
    }
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for f64 {}
    impl Sealed for super::Dual {}
}

/// Arithmetic shared by `f64` and [`Dual`], so that residuals and forces are
/// written once and differentiated for free.
///
/// Operations with a restricted domain return `Result`; everything else goes
/// through the operator overloads.
pub trait Scalar:
    sealed::Sealed
    + Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;
    /// A constant with the same seed width as `self`.
    fn constant_like(&self, value: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn atan(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn try_div(&self, rhs: &Self) -> Result<Self, AdError>;
    fn try_sqrt(&self) -> Result<Self, AdError>;
    fn try_powf(&self, p: f64) -> Result<Self, AdError>;
    /// Quadrant-correct `atan2(self, x)`.
    fn try_atan2(&self, x: &Self) -> Result<Self, AdError>;
    /// `max(self, 0)^p`, continuously differentiable for `p > 1`.
    fn relu_pow(&self, p: f64) -> Result<Self, AdError>;
    /// `Σ coeffs[i] * xs[i]`; zero coefficients are skipped. `xs` must be
    /// non-empty.
    fn weighted_sum(coeffs: &[f64], xs: &[Self]) -> Self;
}

fn pow_domain(a: f64, p: f64) -> Result<(), AdError> {
    let integer = p.fract() == 0.0;
    if (!integer && a < 0.0) || (a == 0.0 && p < 1.0 && p != 0.0) || !a.is_finite() {
        return Err(AdError::Domain {
            op: "pow_real",
            value: a,
        });
    }
    Ok(())
}

fn relu_pow_parts(a: f64, p: f64) -> Result<(f64, f64), AdError> {
    if !(p > 1.0) {
        return Err(AdError::Domain {
            op: "relu_pow",
            value: p,
        });
    }
    if a > 0.0 {
        Ok((a.powf(p), p * a.powf(p - 1.0)))
    } else {
        Ok((0.0, 0.0))
    }
}

fn atan2_parts(y: f64, x: f64) -> Result<(f64, f64, f64), AdError> {
    let r2 = x * x + y * y;
    if r2 == 0.0 {
        return Err(AdError::Domain {
            op: "atan2",
            value: 0.0,
        });
    }
    Ok((y.atan2(x), x / r2, -y / r2))
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn constant_like(&self, value: f64) -> Self {
        value
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn try_div(&self, rhs: &Self) -> Result<Self, AdError> {
        if *rhs == 0.0 {
            return Err(AdError::Domain {
                op: "div",
                value: *rhs,
            });
        }
        Ok(self / rhs)
    }
    fn try_sqrt(&self) -> Result<Self, AdError> {
        if !(*self > 0.0) {
            return Err(AdError::Domain {
                op: "sqrt",
                value: *self,
            });
        }
        Ok(f64::sqrt(*self))
    }
    fn try_powf(&self, p: f64) -> Result<Self, AdError> {
        pow_domain(*self, p)?;
        Ok(f64::powf(*self, p))
    }
    fn try_atan2(&self, x: &Self) -> Result<Self, AdError> {
        Ok(atan2_parts(*self, *x)?.0)
    }
    fn relu_pow(&self, p: f64) -> Result<Self, AdError> {
        Ok(relu_pow_parts(*self, p)?.0)
    }
    fn weighted_sum(coeffs: &[f64], xs: &[Self]) -> Self {
        coeffs.iter().zip(xs).map(|(c, x)| c * x).sum()
    }
}

impl Scalar for Dual {
    fn value(&self) -> f64 {
        self.value
    }
    fn constant_like(&self, value: f64) -> Self {
        Dual::constant(value, self.seeds.len())
    }
    fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.clone().chain(s, c)
    }
    fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.clone().chain(c, -s)
    }
    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.clone().chain(e, e)
    }
    fn atan(&self) -> Self {
        let a = self.value;
        self.clone().chain(a.atan(), 1.0 / (1.0 + a * a))
    }
    fn powi(&self, n: i32) -> Self {
        let a = self.value;
        let d = if n == 0 {
            0.0
        } else {
            n as f64 * a.powi(n - 1)
        };
        self.clone().chain(a.powi(n), d)
    }
    fn try_div(&self, rhs: &Self) -> Result<Self, AdError> {
        self.check_width(rhs)?;
        if rhs.value == 0.0 {
            return Err(AdError::Domain {
                op: "div",
                value: rhs.value,
            });
        }
        let q = self.value / rhs.value;
        let inv = 1.0 / rhs.value;
        let seeds = self
            .seeds
            .iter()
            .zip(&rhs.seeds)
            .map(|(a, b)| (a - q * b) * inv)
            .collect();
        Ok(Dual { value: q, seeds })
    }
    fn try_sqrt(&self) -> Result<Self, AdError> {
        if !(self.value > 0.0) {
            return Err(AdError::Domain {
                op: "sqrt",
                value: self.value,
            });
        }
        let s = self.value.sqrt();
        Ok(self.clone().chain(s, 0.5 / s))
    }
    fn try_powf(&self, p: f64) -> Result<Self, AdError> {
        let a = self.value;
        pow_domain(a, p)?;
        let d = if p == 0.0 { 0.0 } else { p * a.powf(p - 1.0) };
        Ok(self.clone().chain(a.powf(p), d))
    }
    fn try_atan2(&self, x: &Self) -> Result<Self, AdError> {
        self.check_width(x)?;
        let (v, dy, dx) = atan2_parts(self.value, x.value)?;
        let seeds = self
            .seeds
            .iter()
            .zip(&x.seeds)
            .map(|(sy, sx)| dy * sy + dx * sx)
            .collect();
        Ok(Dual { value: v, seeds })
    }
    fn relu_pow(&self, p: f64) -> Result<Self, AdError> {
        let (v, d) = relu_pow_parts(self.value, p)?;
        Ok(self.clone().chain(v, d))
    }
    fn weighted_sum(coeffs: &[f64], xs: &[Self]) -> Self {
        let width = xs[0].seeds.len();
        let mut out = Dual::constant(0.0, width);
        for (&c, x) in coeffs.iter().zip(xs) {
            if c == 0.0 {
                continue;
            }
            out.assert_width(x);
            out.value += c * x.value;
            for (o, s) in out.seeds.iter_mut().zip(&x.seeds) {
                *o += c * s;
            }
        }
        out
    }
}

/// Lifts `x` into independent variables with identity seeds.
pub fn lift_inputs(x: &[f64]) -> Result<Vec<Dual>, AdError> {
    if x.is_empty() {
        return Err(AdError::EmptyInput);
    }
    let n = x.len();
    Ok(x.iter()
        .enumerate()
        .map(|(i, &v)| Dual::variable(v, i, n))
        .collect())
}

/// Evaluates `f` once on lifted inputs and returns its value together with
/// the exact Jacobian (row `i` holds the seeds of output `i`).
pub fn value_and_jacobian<F, E>(f: F, x0: &[f64]) -> Result<(Vec<f64>, DenseMatrix), E>
where
    F: FnOnce(&[Dual]) -> Result<Vec<Dual>, E>,
    E: From<AdError>,
{
    let inputs = lift_inputs(x0)?;
    let n = x0.len();
    let outputs = f(&inputs)?;
    let m = outputs.len();
    let mut values = Vec::with_capacity(m);
    let mut entries = Vec::with_capacity(m * n);
    for (i, out) in outputs.into_iter().enumerate() {
        if out.width() != n {
            return Err(AdError::OutputWidth {
                index: i,
                expected: n,
                found: out.width(),
            }
            .into());
        }
        values.push(out.value);
        entries.extend_from_slice(&out.seeds);
    }
    let jac =
        DenseMatrix::from_row_major(m, n, entries).expect("jacobian entries sized from outputs");
    Ok((values, jac))
}

pub fn jacobian<F, E>(f: F, x0: &[f64]) -> Result<DenseMatrix, E>
where
    F: FnOnce(&[Dual]) -> Result<Vec<Dual>, E>,
    E: From<AdError>,
{
    value_and_jacobian(f, x0).map(|(_, j)| j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(v: f64) -> Dual {
        Dual::variable(v, 0, 1)
    }

    #[test]
    fn lift_seeds_identity() {
        let xs = lift_inputs(&[3.0]).unwrap();
        assert_eq!(xs[0].value(), 3.0);
        assert_eq!(xs[0].seeds(), &[1.0]);

        let xs = lift_inputs(&[3.0, 5.0]).unwrap();
        assert_eq!(xs[0].seeds(), &[1.0, 0.0]);
        assert_eq!(xs[1].seeds(), &[0.0, 1.0]);

        let c = Dual::constant(7.0, 2);
        assert_eq!(c.value(), 7.0);
        assert_eq!(c.seeds(), &[0.0, 0.0]);
    }

    #[test]
    fn lift_empty_is_error() {
        assert_eq!(lift_inputs(&[]), Err(AdError::EmptyInput));
    }

    #[test]
    fn square_of_sum() {
        let xs = lift_inputs(&[3.0, 5.0]).unwrap();
        let k = xs[0].clone() + &xs[1];
        let f = k.clone() * &k;
        assert_eq!(f.value(), 64.0);
        assert_eq!(f.seeds(), &[16.0, 16.0]);

        // same function through the expanded form x² + 2xy + y²
        let (x, y) = (&xs[0], &xs[1]);
        let g = x.clone() * x + (x.clone() * y) * 2.0 + y.clone() * y;
        assert_eq!(g.seeds(), f.seeds());
    }

    #[test]
    fn sin_at_zero() {
        let s = Scalar::sin(&var(0.0));
        assert_eq!(s.value(), 0.0);
        assert_eq!(s.seeds(), &[1.0]);
    }

    #[test]
    fn relu_pow_inactive_branch() {
        let r = var(-0.2).relu_pow(10.0 / 9.0).unwrap();
        assert_eq!(r.value(), 0.0);
        assert_eq!(r.seeds(), &[0.0]);
        let r = var(0.0).relu_pow(10.0 / 9.0).unwrap();
        assert_eq!(r.seeds(), &[0.0]);
    }

    #[test]
    fn relu_pow_active_branch() {
        let p = 10.0 / 9.0;
        let r = var(0.3).relu_pow(p).unwrap();
        assert!((r.value() - 0.3f64.powf(p)).abs() < 1e-15);
        assert!((r.seeds()[0] - p * 0.3f64.powf(p - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_name_the_op() {
        assert_eq!(
            var(1.0).try_div(&var(0.0)),
            Err(AdError::Domain {
                op: "div",
                value: 0.0
            })
        );
        assert_eq!(
            var(-1.0).try_sqrt(),
            Err(AdError::Domain {
                op: "sqrt",
                value: -1.0
            })
        );
        assert_eq!(
            var(-2.0).try_powf(0.5),
            Err(AdError::Domain {
                op: "pow_real",
                value: -2.0
            })
        );
        assert!(var(-2.0).try_powf(3.0).is_ok());
        assert!(matches!(
            var(1.0).relu_pow(1.0),
            Err(AdError::Domain { op: "relu_pow", .. })
        ));
        assert!(matches!(
            var(0.0).try_atan2(&var(0.0)),
            Err(AdError::Domain { op: "atan2", .. })
        ));
        assert!(matches!(0.0f64.try_sqrt(), Err(AdError::Domain { .. })));
    }

    #[test]
    fn width_mismatch() {
        let a = Dual::constant(1.0, 2);
        let b = Dual::constant(1.0, 3);
        assert_eq!(
            a.try_add(&b),
            Err(AdError::WidthMismatch { left: 2, right: 3 })
        );
        assert!(a.try_mul(&b).is_err());
        assert!(a.try_div(&b).is_err());
    }

    #[test]
    #[should_panic(expected = "seed width mismatch")]
    fn operator_width_mismatch_panics() {
        let _ = Dual::constant(1.0, 2) + Dual::constant(1.0, 3);
    }

    #[test]
    fn atan2_partials_all_quadrants() {
        for &(y, x) in &[
            (1.0, 2.0),
            (1.0, -2.0),
            (-1.0, -2.0),
            (-1.0, 2.0),
            (3.0, 0.0),
        ] {
            let v = lift_inputs(&[y, x]).unwrap();
            let a = v[0].try_atan2(&v[1]).unwrap();
            let r2 = x * x + y * y;
            assert!((a.value() - f64::atan2(y, x)).abs() < 1e-15);
            assert!((a.seeds()[0] - x / r2).abs() < 1e-15);
            assert!((a.seeds()[1] + y / r2).abs() < 1e-15);
        }
    }

    #[test]
    fn elementary_derivatives() {
        let x = 0.7;
        let h = 1e-6;
        type Case = (
            &'static str,
            Box<dyn Fn(&Dual) -> Dual>,
            Box<dyn Fn(f64) -> f64>,
        );
        let cases: Vec<Case> = vec![
            ("sin", Box::new(Scalar::sin), Box::new(f64::sin)),
            ("cos", Box::new(Scalar::cos), Box::new(f64::cos)),
            ("exp", Box::new(Scalar::exp), Box::new(f64::exp)),
            ("atan", Box::new(Scalar::atan), Box::new(f64::atan)),
            (
                "sqrt",
                Box::new(|a| a.try_sqrt().unwrap()),
                Box::new(f64::sqrt),
            ),
            (
                "powi",
                Box::new(|a| Scalar::powi(a, 3)),
                Box::new(|v| v.powi(3)),
            ),
            (
                "powf",
                Box::new(|a| a.try_powf(2.5).unwrap()),
                Box::new(|v| v.powf(2.5)),
            ),
            ("neg", Box::new(|a| -a.clone()), Box::new(|v| -v)),
            (
                "div",
                Box::new(|a| Dual::constant(2.0, 1).try_div(a).unwrap()),
                Box::new(|v| 2.0 / v),
            ),
        ];
        for (name, fd, ff) in cases {
            let d = fd(&var(x));
            let fdiff = (ff(x + h) - ff(x - h)) / (2.0 * h);
            assert!((d.value() - ff(x)).abs() < 1e-15, "{name} value");
            assert!((d.seeds()[0] - fdiff).abs() < 1e-8, "{name} derivative");
        }
    }

    #[test]
    fn identity_jacobian() {
        let j: DenseMatrix = jacobian::<_, AdError>(|x| Ok(x.to_vec()), &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(j, DenseMatrix::identity(3));
    }

    #[test]
    fn jacobian_of_square_of_sum() {
        let j = jacobian::<_, AdError>(
            |x| {
                let k = x[0].clone() + &x[1];
                Ok(vec![k.clone() * &k])
            },
            &[3.0, 5.0],
        )
        .unwrap();
        assert_eq!(j.rows(), 1);
        assert_eq!(j.row(0), &[16.0, 16.0]);
    }

    #[test]
    fn constant_function_gives_zero_jacobian() {
        let j = jacobian::<_, AdError>(
            |x| Ok(vec![x[0].constant_like(4.0), x[0].constant_like(-1.0)]),
            &[1.0, 2.0],
        )
        .unwrap();
        assert_eq!(j, DenseMatrix::zeros(2, 2));
    }

    #[test]
    fn output_width_is_checked() {
        let r = jacobian::<_, AdError>(|_| Ok(vec![Dual::constant(1.0, 5)]), &[1.0, 2.0]);
        assert!(matches!(
            r,
            Err(AdError::OutputWidth {
                expected: 2,
                found: 5,
                ..
            })
        ));
    }

    #[test]
    fn weighted_sum_matches_naive() {
        let xs = lift_inputs(&[1.0, 2.0, 3.0]).unwrap();
        let c = [2.0, 0.0, -1.0];
        let w = Dual::weighted_sum(&c, &xs);
        let naive = xs[0].clone() * 2.0 + &(xs[2].clone() * -1.0);
        assert_eq!(w.value(), naive.value());
        assert_eq!(w.seeds(), naive.seeds());
        assert_eq!(f64::weighted_sum(&c, &[1.0, 2.0, 3.0]), -1.0);
    }
}
