//! Radial solutions of `-(1/8π) Δu + λμ - λ e^u μ = 0` with `∫ e^u dμ = 1`,
//! and the functionals built on the weighted inequality.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::weight::{RadialFunction, Weight, WeightKind};
use crate::branch::{BranchTag, CONSTANT_THRESHOLD};
use crate::error::{Error, Result};
use crate::geometry::{laplacian_matrix, Geometry, GeometryKind, ScalarField};
use crate::identities::{random_field, trial_rng};
use crate::newton::{self, NewtonOptions};

#[derive(Debug, Clone)]
pub struct WeightedElSolution {
    pub lambda: f64,
    pub solution: ScalarField,
    pub branch_tag: BranchTag,
    /// Sup norm of the residual over the collocated nodes.
    pub residual: f64,
    /// `|∫ e^u dμ - 1|`, tail included.
    pub constraint_defect: f64,
    pub distance_to_constant: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// `∫ e^u dμ` on the disc plus `e^{u(R)}` times the weight's tail mass.
fn exp_mass(w: &Weight, mu: &[f64], u: &[f64], outer: usize) -> f64 {
    let q: Vec<f64> = mu.iter().zip(u).map(|(m, v)| m * v.exp()).collect();
    w.geom.quad(&q) + w.tail_mass * u[outer].exp()
}

fn outer_node(geom: &Geometry) -> usize {
    geom.nodes()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i)
}

/// Pointwise `-(1/8π) Δu + λμ - λ e^u μ` at every node.
pub fn el_residual_weighted(w: &Weight, lambda: f64, u: &ScalarField) -> Result<Vec<f64>> {
    if **u.geometry() != *w.geom {
        return Err(Error::GeometryMismatch {
            expected: w.geom.descriptor(),
            found: u.geometry().descriptor(),
        });
    }
    let lap = w.geom.laplacian(u.values());
    let mu = w.mu();
    Ok((0..mu.len())
        .map(|j| -lap[j] / (8.0 * PI) + lambda * mu[j] * (1.0 - u.values()[j].exp()))
        .collect())
}

/// Newton on the residual evaluated after the additive shift that enforces
/// the constraint. The shift makes the map invariant under constants, and the
/// minimum-norm step of the SVD solve ignores that direction. The outermost
/// node carries no equation: the constraint takes the place of a boundary
/// condition at `R`.
pub fn solve_el_weighted(lambda: f64, w: &Weight, init: &ScalarField, tol: f64) -> Result<WeightedElSolution> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    let geom = &w.geom;
    if **init.geometry() != **geom {
        return Err(Error::GeometryMismatch {
            expected: geom.descriptor(),
            found: init.geometry().descriptor(),
        });
    }
    let n = geom.resolution();
    let outer = outer_node(geom);
    let rows: Vec<usize> = (0..n).filter(|&j| j != outer).collect();
    let mu = w.mu();
    let lap = laplacian_matrix(geom);
    let wts = geom.weights();

    let shift = |u: &[f64]| -> Option<Vec<f64>> {
        let m = exp_mass(w, &mu, u, outer);
        (m > 0.0 && m.is_finite()).then(|| {
            let c = m.ln();
            u.iter().map(|v| v - c).collect()
        })
    };
    let residual = |u: &[f64]| -> Option<Vec<f64>> {
        let s = shift(u)?;
        let ls = geom.laplacian(&s);
        let r: Vec<f64> = rows
            .iter()
            .map(|&j| -ls[j] / (8.0 * PI) + lambda * mu[j] * (1.0 - s[j].exp()))
            .collect();
        r.iter().all(|v| v.is_finite()).then_some(r)
    };
    let jacobian = |u: &[f64]| -> DMatrix<f64> {
        let s = shift(u).unwrap_or_else(|| u.to_vec());
        let e: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        // gradient of log m at the shifted point (where m = 1)
        let mut dlogm: Vec<f64> = (0..n).map(|j| wts[j] * mu[j] * e[j]).collect();
        dlogm[outer] += w.tail_mass * e[outer];
        let mut je = &lap * (-1.0 / (8.0 * PI));
        for j in 0..n {
            je[(j, j)] -= lambda * mu[j] * e[j];
        }
        // J_E (I - 1 ⊗ ∇log m)
        let rowsum: Vec<f64> = (0..n).map(|i| je.row(i).sum()).collect();
        DMatrix::from_fn(rows.len(), n, |a, k| {
            let i = rows[a];
            je[(i, k)] - rowsum[i] * dlogm[k]
        })
    };
    let opts = NewtonOptions {
        tol,
        ..Default::default()
    };
    let out = newton::solve(init.values().to_vec(), residual, jacobian, &opts)?;
    let s = shift(&out.x).ok_or_else(|| Error::NormalizationFailure("∫e^u dμ is not finite".into()))?;
    let constraint_defect = (exp_mass(w, &mu, &s, outer) - 1.0).abs();
    let solution = ScalarField::from_values(geom, s)?;
    let dist = solution.sup_norm();
    Ok(WeightedElSolution {
        lambda,
        branch_tag: if dist <= CONSTANT_THRESHOLD {
            BranchTag::Constant
        } else {
            BranchTag::Nonconstant
        },
        solution,
        residual: out.residual,
        constraint_defect,
        distance_to_constant: dist,
        iterations: out.iterations,
        history: out.history,
    })
}

/// Solves from `starts` random radial fields of sup norm `amplitude`.
pub fn multistart_weighted(
    w: &Weight,
    lambda: f64,
    starts: usize,
    seed: u64,
    amplitude: f64,
    tol: f64,
) -> Vec<Result<WeightedElSolution>> {
    (0..starts)
        .into_par_iter()
        .map(|k| {
            let f = random_field(&w.geom, &mut trial_rng(seed, k))?.map(|v| amplitude * v)?;
            solve_el_weighted(lambda, w, &f, tol)
        })
        .collect()
}

/// `u_σ = 2 log σ + 2 log(1+r²) - 2 log(1+σ²r²)`, the dilations of the
/// constant that saturate the stereographic inequality.
pub fn dilation_family(geom: &Arc<Geometry>, sigma: f64) -> Result<ScalarField> {
    geom.expect_kind(GeometryKind::PlaneRadial)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    ScalarField::from_fn(geom, |r| {
        let r2 = r * r;
        2.0 * sigma.ln() + 2.0 * r2.ln_1p() - 2.0 * (sigma * sigma * r2).ln_1p()
    })
}

/// `(1/16π) ∫|∇u|² dx - λ [log ∫e^u dμ - ∫u dμ]`.
///
/// Both `dμ` integrals carry the tail beyond `R` at the value `u(R)` and are
/// divided by the total mass of `μ`, which keeps the result shift invariant.
pub fn onofri_deficit_weighted(w: &Weight, u: &ScalarField, lambda: f64) -> Result<f64> {
    let b = w.bundle(u)?;
    let mu = w.mu();
    let outer = outer_node(&w.geom);
    let total = w.geom.quad(&mu) + w.tail_mass;
    let top = u.max();
    let e: Vec<f64> = mu.iter().zip(&b.u).map(|(m, v)| m * (v - top).exp()).collect();
    let emass = w.geom.quad(&e) + w.tail_mass * (b.u[outer] - top).exp();
    if !(emass > 0.0 && emass.is_finite()) {
        return Err(Error::NormalizationFailure(format!("∫e^u dμ = {emass}")));
    }
    let um: Vec<f64> = mu.iter().zip(&b.u).map(|(m, v)| m * v).collect();
    let mean_u = (w.geom.quad(&um) + w.tail_mass * b.u[outer]) / total;
    let log_mean_exp = top + (emass / total).ln();
    Ok(w.geom.quad(&b.grad_sq) / (16.0 * PI) - lambda * (log_mean_exp - mean_u))
}

#[derive(Debug, Clone, Serialize)]
pub struct CapitalLambda {
    pub value: f64,
    pub numerator: f64,
    /// `∫|∇u|² e^{-u/2} dx`.
    pub denominator: f64,
}

/// `Λ(u) = (1/8π) ∫[(∇u·∇g)² - (Δg + |∇g|²)|∇u|²] e^{-u/2-g} / ∫|∇u|² e^{-u/2}`.
pub fn capital_lambda_quotient(w: &Weight, u: &ScalarField) -> Result<CapitalLambda> {
    let b = w.bundle(u)?;
    let t = b.weighted.as_ref().expect("bundle carries weight terms");
    let wts = w.geom.weights();
    let (mut num, mut den, mut scale) = (0.0, 0.0, 0.0);
    for j in 0..wts.len() {
        let e = (-0.5 * b.u[j]).exp();
        num += wts[j] * (t.du_dg_sq[j] - (t.lap_g[j] + t.grad_g_sq[j]) * b.grad_sq[j]) * e * (-t.g[j]).exp();
        den += wts[j] * b.grad_sq[j] * e;
        scale += wts[j] * b.u[j] * b.u[j] * e;
    }
    if !(den > 1e-14 * scale) || den == 0.0 {
        return Err(Error::ConstantField);
    }
    let numerator = num / (8.0 * PI);
    Ok(CapitalLambda {
        value: numerator / den,
        numerator,
        denominator: den,
    })
}

/// Largest oscillation of `h` before `e^{-Var h}` underflows.
const MAX_VARIATION: f64 = 700.0;

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationBound {
    pub bound: f64,
    /// `sup h - inf h`.
    pub variation: f64,
    /// `inf (1+r²)² Δh`.
    pub inf_term: f64,
    /// `Λ⋆` of the tilted stereographic weight, computed directly.
    pub lambda_star: f64,
    /// `bound ≤ lambda_star + 1e-8`.
    pub holds: bool,
}

/// `e^{-Var h} [1 + ⅛ inf (1+r²)² Δh]`, a lower bound on `Λ⋆` for the
/// density proportional to `e^{-h} (1+r²)^{-2}`.
pub fn perturbation_bound(h: &dyn RadialFunction, geom: &Arc<Geometry>) -> Result<PerturbationBound> {
    geom.expect_kind(GeometryKind::PlaneRadial)?;
    let radius = geom.plane_radius().unwrap_or(0.0);
    let mut pts: Vec<f64> = geom.nodes().to_vec();
    pts.extend([0.0, radius]);
    let (mut hmin, mut hmax, mut inf_term) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for r in pts {
        let [v, d1, d2] = h.eval(r);
        let lap = if r > 0.0 { d2 + d1 / r } else { 2.0 * d2 };
        hmin = hmin.min(v);
        hmax = hmax.max(v);
        inf_term = inf_term.min((1.0 + r * r).powi(2) * lap);
    }
    if let Some((h_inf, l_inf)) = h.limits() {
        hmin = hmin.min(h_inf);
        hmax = hmax.max(h_inf);
        inf_term = inf_term.min(l_inf);
    }
    let variation = hmax - hmin;
    if !(variation.is_finite() && variation <= MAX_VARIATION) || !inf_term.is_finite() {
        return Err(Error::UnboundedVariation(variation));
    }
    let bound = (-variation).exp() * (1.0 + inf_term / 8.0);
    let mut weight = Weight::perturbed(geom, h)?;
    weight.kind = WeightKind::Perturbed { amplitude: h.eval(0.0)[0] };
    let lambda_star = super::weight::lambda_star_weight(&weight).value;
    Ok(PerturbationBound {
        bound,
        variation,
        inf_term,
        lambda_star,
        holds: bound <= lambda_star + 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean::Lorentzian;

    fn stereo(n: usize) -> Weight {
        Weight::stereographic(&Arc::new(Geometry::plane(n, 20.0).unwrap()))
    }

    #[test]
    fn zero_solves_for_every_lambda() {
        let w = stereo(128);
        let z = ScalarField::constant(w.geometry(), 0.0).unwrap();
        for lam in [0.3, 1.0, 2.5] {
            assert!(el_residual_weighted(&w, lam, &z).unwrap().iter().all(|r| r.abs() <= 1e-12));
            let s = solve_el_weighted(lam, &w, &z, 1e-10).unwrap();
            assert_eq!(s.branch_tag, BranchTag::Constant);
            assert!(s.constraint_defect < 1e-8);
        }
    }

    #[test]
    fn perturbation_bound_arithmetic() {
        let g = Arc::new(Geometry::plane(256, 20.0).unwrap());
        let zero = perturbation_bound(&Lorentzian { amplitude: 0.0 }, &g).unwrap();
        assert_eq!(zero.bound, 1.0);
        let p = perturbation_bound(&Lorentzian { amplitude: 0.05 }, &g).unwrap();
        assert!((p.variation - 0.05).abs() < 1e-15);
        assert!((p.inf_term + 0.2).abs() < 1e-12);
        assert!(p.holds, "{p:?}");
    }
}
