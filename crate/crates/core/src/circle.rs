//! The one-dimensional problem `-½ u'' + λ - e^u = 0` on a circle.

use std::sync::Arc;

use serde::Serialize;

use crate::branch::{BranchPoint, ElOperator};
use crate::error::{Error, Result};
use crate::geometry::{first_eigenvalue, Geometry, GeometryKind, ScalarField};
use crate::identities::{random_field, trial_rng};

/// Relative bracket width at which bisection stops.
pub const BISECTION_RTOL: f64 = 1e-4;

pub fn solve_el_circle(lambda: f64, init: &ScalarField, tol: f64) -> Result<BranchPoint> {
    init.geometry().expect_kind(GeometryKind::Circle)?;
    crate::branch::solve_el(lambda, init, tol)
}

/// Runs `starts` Newton solves from `log λ + a φ`, where `φ` is a seeded
/// random field of unit sup norm and `a` is uniform in `[0, amplitude]`.
pub fn multistart(
    op: &ElOperator,
    lambda: f64,
    starts: usize,
    seed: u64,
    amplitude: f64,
    tol: f64,
) -> Vec<Result<BranchPoint>> {
    use rand::Rng;
    use rayon::prelude::*;
    let geom = op.geometry();
    (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k);
            let a = rng.gen_range(0.0..=amplitude);
            let phi = random_field(geom, &mut rng)?;
            let init = phi.map(|v| lambda.ln() + a * v)?;
            op.solve(lambda, &init, tol)
        })
        .collect()
}

/// Follows the nonconstant branch bifurcating from `u = log λ` at
/// `λ = λ₁/2` until it reaches `target`.
///
/// The branch is parametrized by the amplitude `A` of the first Fourier
/// mode: `(u, λ)` solves the equation together with `<u, cos> = A`. Plain
/// Newton at fixed `λ` is attracted by the constant solution instead.
pub fn nonconstant_branch(op: &ElOperator, target: f64, tol: f64) -> Result<Vec<BranchPoint>> {
    let geom = Arc::clone(op.geometry());
    geom.expect_kind(GeometryKind::Circle)?;
    let n = geom.resolution();
    let lambda_c = LinearizedSpectrum::new(&geom)?.smallest(0.0);
    if !(target > lambda_c) {
        return Err(Error::InvalidParameter(format!(
            "the nonconstant branch exists only for lambda > {lambda_c}, got {target}"
        )));
    }
    let period = geom.volume();
    let w = geom.weights();
    let phi: Vec<f64> = geom
        .nodes()
        .iter()
        .map(|x| (2.0 * std::f64::consts::PI * x / period).cos())
        .collect();
    let norm: f64 = (0..n).map(|j| w[j] * phi[j] * phi[j]).sum();
    let proj: Vec<f64> = (0..n).map(|j| w[j] * phi[j] / norm).collect();
    let opts = crate::newton::NewtonOptions {
        tol,
        ..Default::default()
    };

    let bordered = |a: f64, x0: Vec<f64>| -> Result<crate::newton::NewtonOutcome> {
        crate::newton::solve(
            x0,
            |x| {
                let (u, lam) = (&x[..n], x[n]);
                let mut r = op.residual(lam, u)?;
                r.push(u.iter().zip(&proj).map(|(u, p)| u * p).sum::<f64>() - a);
                Some(r)
            },
            |x| {
                let mut j = nalgebra::DMatrix::zeros(n + 1, n + 1);
                j.view_mut((0, 0), (n, n)).copy_from(&op.jacobian(&x[..n]));
                for i in 0..n {
                    j[(i, n)] = 1.0;
                    j[(n, i)] = proj[i];
                }
                j
            },
            &opts,
        )
    };

    let da = 0.05;
    let mut prev: Option<Vec<f64>> = None;
    let mut cur = {
        let mut x: Vec<f64> = phi.iter().map(|p| lambda_c.ln() + da * p).collect();
        x.push(lambda_c);
        bordered(da, x)?.x
    };
    let mut a = da;
    let mut path = Vec::new();
    for _ in 0..400 {
        if cur[n] >= target {
            break;
        }
        let guess: Vec<f64> = match &prev {
            Some(p) => cur.iter().zip(p).map(|(c, p)| 2.0 * c - p).collect(),
            None => cur.clone(),
        };
        a += da;
        let out = bordered(a, guess)?;
        prev = Some(std::mem::replace(&mut cur, out.x));
        let u = ScalarField::from_values(&geom, cur[..n].to_vec())?;
        path.push(BranchPoint::from_solution(cur[n], u, out.residual, out.iterations, out.history));
    }
    if cur[n] < target {
        return Err(Error::NotConverged {
            iterations: path.len(),
            update: target - cur[n],
            history: path.iter().map(|b| b.lambda).collect(),
        });
    }
    // interpolate in λ between the last two branch points, then fix λ
    let init = match &prev {
        Some(p) if cur[n] > p[n] => {
            let t = (target - p[n]) / (cur[n] - p[n]);
            (0..n).map(|j| p[j] + t * (cur[j] - p[j])).collect()
        }
        _ => cur[..n].to_vec(),
    };
    let last = op.solve(target, &ScalarField::from_values(&geom, init)?, tol)?;
    path.push(last);
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct Bifurcation {
    /// Midpoint of the final bisection bracket.
    pub lambda_c: f64,
    pub bracket: (f64, f64),
    /// Root of the linear interpolant through the bracket ends.
    pub lambda_c_interpolated: f64,
    pub evaluations: usize,
}

/// Smallest eigenvalue of the linearization `-½φ'' - λφ` at `u = log λ` over
/// mean-zero `φ` (integrating the equation fixes the mean of a perturbation).
pub struct LinearizedSpectrum {
    lambda1: f64,
}

impl LinearizedSpectrum {
    pub fn new(geom: &Geometry) -> Result<Self> {
        Ok(Self {
            lambda1: first_eigenvalue(geom)?,
        })
    }

    pub fn smallest(&self, lambda: f64) -> f64 {
        0.5 * self.lambda1 - lambda
    }
}

/// Locates the sign change of the linearized eigenvalue on
/// `[lambda_min, lambda_max]`: a uniform scan with `steps` cells, then bisection.
pub fn bifurcation_scan(geom: &Geometry, lambda_min: f64, lambda_max: f64, steps: usize) -> Result<Bifurcation> {
    geom.expect_kind(GeometryKind::Circle)?;
    if !(lambda_min > 0.0 && lambda_max > lambda_min && steps >= 1) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < lambda_min < lambda_max and steps >= 1, got [{lambda_min}, {lambda_max}], {steps}"
        )));
    }
    let spec = LinearizedSpectrum::new(geom)?;
    scan_with(|l| spec.smallest(l), lambda_min, lambda_max, steps)
}

pub(crate) fn scan_with(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> Result<Bifurcation> {
    let mut evaluations = 0;
    let mut eval = |l: f64| {
        evaluations += 1;
        f(l)
    };
    let h = (hi - lo) / steps as f64;
    let mut a = lo;
    let mut fa = eval(a);
    let mut bracket = None;
    for k in 1..=steps {
        let b = lo + h * k as f64;
        let fb = eval(b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            bracket = Some((a, b, fa, fb));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut a, mut b, mut fa, mut fb) = bracket.ok_or(Error::NoSignChange { lo, hi })?;
    while (b - a) > BISECTION_RTOL * 0.5 * (a + b) && fa != 0.0 {
        let m = 0.5 * (a + b);
        let fm = eval(m);
        if fm == 0.0 || fm.signum() == fb.signum() {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    let interp = if fa == 0.0 { a } else { a - fa * (b - a) / (fb - fa) };
    Ok(Bifurcation {
        lambda_c: 0.5 * (a + b),
        bracket: (a, b),
        lambda_c_interpolated: interp,
        evaluations,
    })
}

/// `¼⨍|u'|² + λ⨍u − λ log⨍e^u` with averages over the circle.
///
/// Averages keep the critical value at half the first eigenvalue for any
/// period; for unit period they coincide with plain integrals.
pub fn mto_deficit_circle(u: &ScalarField, lambda: f64) -> Result<f64> {
    let geom = u.geometry();
    geom.expect_kind(GeometryKind::Circle)?;
    let vol = geom.volume();
    let b = crate::geometry::differentiate(geom, u)?;
    let dirichlet = geom.quad(&b.grad_sq) / vol;
    let mean = u.mean();
    // shift by the max before exponentiating
    let top = u.max();
    let e: Vec<f64> = u.values().iter().map(|v| (v - top).exp()).collect();
    let log_mean_exp = top + (geom.quad(&e) / vol).ln();
    Ok(0.25 * dirichlet + lambda * (mean - log_mean_exp))
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityRow {
    pub lambda: f64,
    pub branch_tag: String,
    pub residual: f64,
    pub distance_to_constant: f64,
    pub deficit: f64,
}

impl RigidityRow {
    pub fn from_branch(bp: &BranchPoint) -> Result<Self> {
        Ok(Self {
            lambda: bp.lambda,
            branch_tag: bp.branch_tag.to_string(),
            residual: bp.newton_residual,
            distance_to_constant: bp.distance_to_constant,
            deficit: mto_deficit_circle(&bp.solution, bp.lambda)?,
        })
    }
}

/// Convenience constructor for the default circle.
pub fn unit_circle(n: usize) -> Result<Arc<Geometry>> {
    Ok(Arc::new(Geometry::circle(n, 1.0)?))
}
