//! Closed-form constants of the curvature-dimension argument.
//!
//! Every formula is written once over a generic field so that rational
//! inputs (as parsed by the CLI) are evaluated exactly and rounded only at
//! the end, while the `f64` entry points serve library callers.

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed};
use serde::Serialize;

use crate::error::{Error, Result};

/// Exact rational used for dimension and interpolation parameters.
pub type Rational = Ratio<i128>;

trait Scalar: Num + Copy + PartialOrd + FromPrimitive + Signed {}
impl<T: Num + Copy + PartialOrd + FromPrimitive + Signed> Scalar for T {}

fn k<T: Scalar>(n: i64) -> T {
    T::from_i64(n).expect("small integer")
}

fn theta0_g<T: Scalar>(d: T) -> T {
    let dm1 = d - k(1);
    k::<T>(16) * dm1 * dm1 / ((k::<T>(6) - d) * (d + k(2)))
}

fn abc_g<T: Scalar>(d: T, th: T) -> (T, T, T) {
    let r = d / (d - k(1));
    let one = k::<T>(1);
    let a = th / k(4) * r;
    let s = (one - th) / k(8) + k::<T>(3) * th / k(16) * r + one / k(8);
    let b = -s * k(2) * d / (d + k(2));
    let c = (s / k(2) * d / (d + k(2)) - (one - th + k::<T>(2) * th * r) / k(64)) * r;
    (a, b, c)
}

fn sign_expr_g<T: Scalar>(d: T, th: T) -> T {
    let dm1 = d - k(1);
    k::<T>(16) * dm1 * dm1 - (k::<T>(6) - d) * (d + k(2)) * th
}

fn gap_closed_g<T: Scalar>(d: T, x: T) -> T {
    let (p, q) = (d - k(1), d - k(2));
    p * p * q * q / ((k::<T>(6) - d) * (d + k(2))) * (k::<T>(1) - x)
}

fn f1_g<T: Scalar>(d: T, x: T) -> T {
    let t = theta0_g(d);
    k::<T>(1) - t + t * x
}

fn f2_g<T: Scalar>(d: T, x: T) -> T {
    let dm1 = d - k(1);
    d * (k::<T>(2) - d) + dm1 * dm1 * x
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

fn theta0_domain(d: f64) -> Result<()> {
    check_finite("d", d)?;
    if !(1.0..6.0).contains(&d) {
        return Err(Error::Domain(format!("theta0 needs 1 <= d < 6, got d = {d}")));
    }
    Ok(())
}

fn abc_domain(d: f64, theta: f64) -> Result<()> {
    check_finite("d", d)?;
    check_finite("theta", theta)?;
    if d <= 1.0 {
        return Err(Error::Domain(format!("coefficients need d > 1, got d = {d}")));
    }
    Ok(())
}

fn fontenas_domain(d: f64, x: f64) -> Result<()> {
    check_finite("d", d)?;
    check_finite("x", x)?;
    if !(d > 1.0 && d <= 2.0) {
        return Err(Error::Domain(format!("comparison functions need 1 < d <= 2, got {d}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("comparison functions need 0 <= x <= 1, got {x}")));
    }
    Ok(())
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `16 (d-1)^2 / ((6-d)(d+2))`, the parameter where the discriminant vanishes.
pub fn theta0(d: f64) -> Result<f64> {
    theta0_domain(d)?;
    Ok(theta0_g(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbcCoefficients {
    pub d: f64,
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AbcCoefficients {
    /// Coefficient of `M` in the completed square `L + (b / 2a) M`.
    pub fn square_ratio(&self) -> f64 {
        self.b / (2.0 * self.a)
    }
}

pub fn abc_coefficients(d: f64, theta: f64) -> Result<AbcCoefficients> {
    abc_domain(d, theta)?;
    let (a, b, c) = abc_g(d, theta);
    Ok(AbcCoefficients { d, theta, a, b, c })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discriminant {
    /// `b^2 - 4ac`.
    pub delta: f64,
    /// `16 (d-1)^2 - (6-d)(d+2) theta`, which carries the sign of `delta`.
    pub sign_expression: f64,
    pub sign: i8,
    pub signs_agree: bool,
}

fn sign_of(v: f64, scale: f64) -> i8 {
    if v.abs() <= 1e-14 * scale.max(1.0) {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

pub fn discriminant(d: f64, theta: f64) -> Result<Discriminant> {
    abc_domain(d, theta)?;
    let (a, b, c) = abc_g(d, theta);
    let delta = b * b - 4.0 * a * c;
    let expr = sign_expr_g(d, theta);
    let s1 = sign_of(delta, b * b + (4.0 * a * c).abs());
    let s2 = sign_of(expr, 16.0 * (d - 1.0).powi(2) + ((6.0 - d) * (d + 2.0) * theta).abs());
    Ok(Discriminant {
        delta,
        sign_expression: expr,
        sign: s2,
        signs_agree: s1 == s2,
    })
}

pub fn fontenas_f1(d: f64, x: f64) -> Result<f64> {
    fontenas_domain(d, x)?;
    Ok(f1_g(d, x))
}

pub fn fontenas_f2(d: f64, x: f64) -> Result<f64> {
    fontenas_domain(d, x)?;
    Ok(f2_g(d, x))
}

/// `f2 - f1`, computed from the factored closed form.
pub fn fontenas_gap(d: f64, x: f64) -> Result<f64> {
    fontenas_domain(d, x)?;
    Ok(gap_closed_g(d, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureBound {
    pub bound: f64,
    /// Parameter maximizing the affine bound over `[theta0(d), 1]`.
    pub optimal_theta: f64,
    pub optimal_bound: f64,
}

fn affine_bound(d: f64, rho: f64, lambda1: f64, theta: f64) -> f64 {
    0.5 * lambda1 * (1.0 - theta) + 0.5 * theta * d / (d - 1.0) * rho
}

/// `λ1 (1-θ)/2 + (θ/2) d/(d-1) ρ`, with the best `θ` in the admissible range.
pub fn curvature_rigidity_bound(d: f64, rho: f64, lambda1: f64, theta: f64) -> Result<CurvatureBound> {
    abc_domain(d, theta)?;
    check_finite("rho", rho)?;
    check_finite("lambda1", lambda1)?;
    if lambda1 <= 0.0 {
        return Err(Error::Domain(format!("lambda1 must be > 0, got {lambda1}")));
    }
    let t0 = theta0(d)?;
    if theta < t0 - 1e-15 || theta > 1.0 {
        return Err(Error::Domain(format!(
            "theta must lie in [theta0(d), 1] = [{t0}, 1], got {theta}"
        )));
    }
    let optimal_theta = if rho * d / (d - 1.0) <= lambda1 { t0 } else { 1.0 };
    Ok(CurvatureBound {
        bound: affine_bound(d, rho, lambda1, theta),
        optimal_theta,
        optimal_bound: affine_bound(d, rho, lambda1, optimal_theta),
    })
}

/// Exact-arithmetic variants for rational inputs.
pub mod exact {
    use super::*;

    fn gt_one(d: Rational) -> Result<()> {
        if d <= Rational::from_integer(1) {
            return Err(Error::Domain(format!("coefficients need d > 1, got d = {d}")));
        }
        Ok(())
    }

    pub fn theta0(d: Rational) -> Result<f64> {
        if d < Rational::from_integer(1) || d >= Rational::from_integer(6) {
            return Err(Error::Domain(format!("theta0 needs 1 <= d < 6, got d = {d}")));
        }
        Ok(to_f64(theta0_g(d)))
    }

    pub fn abc_coefficients(d: Rational, theta: Rational) -> Result<AbcCoefficients> {
        gt_one(d)?;
        let (a, b, c) = abc_g(d, theta);
        Ok(AbcCoefficients {
            d: to_f64(d),
            theta: to_f64(theta),
            a: to_f64(a),
            b: to_f64(b),
            c: to_f64(c),
        })
    }

    pub fn discriminant(d: Rational, theta: Rational) -> Result<Discriminant> {
        gt_one(d)?;
        let (a, b, c) = abc_g(d, theta);
        let delta = b * b - Rational::from_integer(4) * a * c;
        let expr = sign_expr_g(d, theta);
        let sgn = |r: Rational| -> i8 {
            if r.is_positive() {
                1
            } else if r.is_negative() {
                -1
            } else {
                0
            }
        };
        Ok(Discriminant {
            delta: to_f64(delta),
            sign_expression: to_f64(expr),
            sign: sgn(expr),
            signs_agree: sgn(delta) == sgn(expr),
        })
    }

    fn fontenas_domain(d: Rational, x: Rational) -> Result<()> {
        let (one, two) = (Rational::from_integer(1), Rational::from_integer(2));
        if !(d > one && d <= two) || x < Rational::from_integer(0) || x > one {
            return Err(Error::Domain(format!(
                "comparison functions need 1 < d <= 2 and 0 <= x <= 1, got d = {d}, x = {x}"
            )));
        }
        Ok(())
    }

    /// `(f1, f2, gap)`.
    pub fn fontenas(d: Rational, x: Rational) -> Result<(f64, f64, f64)> {
        fontenas_domain(d, x)?;
        Ok((
            to_f64(f1_g(d, x)),
            to_f64(f2_g(d, x)),
            to_f64(gap_closed_g(d, x)),
        ))
    }

    /// Parses `"3/2"`, `"2"` or a finite decimal such as `"1.25"` exactly.
    pub fn parse(s: &str) -> Result<Rational> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("`{s}` is not a rational number"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            return Ok(Rational::new(n, d));
        }
        let (mant, exp10) = match s.split_once(['e', 'E']) {
            Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
            None => (s, 0),
        };
        let neg = mant.starts_with('-');
        let mant = mant.trim_start_matches(['-', '+']);
        let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
        if ip.is_empty() && fp.is_empty() {
            return Err(bad());
        }
        if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{ip}{fp}");
        let scale = exp10 - fp.len() as i32;
        if digits.len() > 30 || scale.abs() > 30 {
            return Err(bad());
        }
        let mut num: i128 = digits.parse().map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let p = 10i128.pow(scale.unsigned_abs());
        Ok(if scale >= 0 {
            Rational::from_integer(num * p)
        } else {
            Rational::new(num, p)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta0_values() {
        assert_eq!(theta0(2.0).unwrap(), 1.0);
        assert_eq!(theta0(1.0).unwrap(), 0.0);
        assert!((theta0(1.5).unwrap() - 4.0 / 15.75).abs() < 1e-15);
        assert!(matches!(theta0(6.0), Err(Error::Domain(_))));
    }

    #[test]
    fn abc_at_two_one() {
        let c = abc_coefficients(2.0, 1.0).unwrap();
        assert_eq!((c.a, c.b, c.c), (0.5, -0.5, 0.125));
        assert_eq!(c.square_ratio(), -0.5);
        assert_eq!(abc_coefficients(1.7, 0.0).unwrap().a, 0.0);
        assert!(abc_coefficients(1.0, 0.3).is_err());
    }

    #[test]
    fn discriminant_signs() {
        let z = discriminant(2.0, 1.0).unwrap();
        assert!(z.delta.abs() < 1e-14 && z.signs_agree && z.sign == 0);
        assert_eq!(discriminant(2.0, 0.5).unwrap().sign, 1);
        let d3 = discriminant(3.0, 1.0).unwrap();
        assert_eq!(d3.sign_expression, 49.0);
        assert!(d3.signs_agree);
    }

    #[test]
    fn fontenas_hand_values() {
        assert!((fontenas_f1(1.5, 0.5).unwrap() - 0.873016).abs() < 1e-6);
        assert_eq!(fontenas_f2(1.5, 0.5).unwrap(), 0.875);
        assert!((fontenas_gap(1.5, 0.5).unwrap() - 0.001984).abs() < 1e-6);
        assert!(fontenas_gap(2.5, 0.5).is_err());
    }

    #[test]
    fn curvature_bound_cases() {
        let b = curvature_rigidity_bound(2.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(b.bound, 1.0);
        let d = 1.5;
        let l1 = 3.0;
        let rho = (d - 1.0) / d * l1;
        for th in [theta0(d).unwrap(), 0.5, 1.0] {
            let b = curvature_rigidity_bound(d, rho, l1, th).unwrap();
            assert!((b.bound - l1 / 2.0).abs() < 1e-14);
        }
        assert!(curvature_rigidity_bound(1.5, 1.0, 3.0, 0.1).is_err());
    }

    #[test]
    fn exact_parse_and_eval() {
        assert_eq!(exact::parse("3/2").unwrap(), Rational::new(3, 2));
        assert_eq!(exact::parse("1.25").unwrap(), Rational::new(5, 4));
        assert_eq!(exact::parse("2").unwrap(), Rational::from_integer(2));
        assert!(exact::parse("x").is_err());
        let d = exact::discriminant(Rational::from_integer(2), Rational::from_integer(1)).unwrap();
        assert_eq!(d.delta, 0.0);
        let (f1, f2, gap) = exact::fontenas(Rational::new(3, 2), Rational::new(1, 2)).unwrap();
        assert!((f2 - f1 - gap).abs() < 1e-16);
    }
}
