//! Zonal fields on the round sphere: the rigidity quotient, the MTO
//! functional and its dissipation, the EL equation, and the flow.

mod flow;
mod minimize;

pub use flow::{flow_evolve, mass_rate_terms, FlowConfig, FlowTrace};
pub use minimize::{minimize_lambda_star, LambdaStarEstimate, OptimizerConfig};

use std::sync::Arc;

use serde::Serialize;

use crate::branch::BranchPoint;
use crate::circle::{scan_with, Bifurcation};
use crate::error::{Error, Result};
use crate::geometry::{differentiate, first_eigenvalue, DerivativeBundle, Geometry, GeometryKind, ScalarField};

/// Relative size below which `∫|∇u|² e^{-u/2}` counts as zero.
const DENOMINATOR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Serialize)]
pub struct QuotientReport {
    pub value: f64,
    /// `∫ ||L u - M u / 2||² e^{-u/2}`.
    pub tensor_term: f64,
    /// `∫ ρ |∇u|² e^{-u/2}`.
    pub ricci_term: f64,
    /// `∫ |∇u|² e^{-u/2}`.
    pub denominator: f64,
    pub geometry: String,
}

fn quotient_parts(geom: &Geometry, b: &DerivativeBundle) -> (f64, f64, f64) {
    let w = geom.weights();
    let (mut t, mut d) = (0.0, 0.0);
    for j in 0..w.len() {
        let e = w[j] * (-0.5 * b.u[j]).exp();
        t += e * b.lm_half_normsq[j];
        d += e * b.grad_sq[j];
    }
    (t, b.ricci * d, d)
}

/// The rigidity quotient of a nonconstant zonal field.
pub fn lambda_star_quotient(geom: &Geometry, u: &ScalarField) -> Result<QuotientReport> {
    geom.expect_kind(GeometryKind::SphereZonal)?;
    let b = differentiate(geom, u)?;
    let (tensor_term, ricci_term, denominator) = quotient_parts(geom, &b);
    // compare with the same weighted integral of u² as a scale
    let scale: f64 = geom
        .weights()
        .iter()
        .zip(&b.u)
        .map(|(w, u)| w * u * u * (-0.5 * u).exp())
        .sum();
    let mean = u.mean();
    let spread = geom
        .weights()
        .iter()
        .zip(&b.u)
        .map(|(w, v)| w * (v - mean) * (v - mean) * (-0.5 * v).exp())
        .sum::<f64>();
    if !(denominator > DENOMINATOR_FLOOR * scale.max(f64::MIN_POSITIVE)) || spread == 0.0 {
        return Err(Error::ConstantField);
    }
    Ok(QuotientReport {
        value: (tensor_term + ricci_term) / denominator,
        tensor_term,
        ricci_term,
        denominator,
        geometry: geom.descriptor(),
    })
}

/// `F_λ[u] = ¼∫|∇u|² + λ∫u − λ V log(⨍e^u)`.
///
/// With volume `V = 1` this is the usual functional; the factor `V` keeps it
/// shift invariant on spheres of any radius.
pub fn functional_f(geom: &Geometry, lambda: f64, u: &ScalarField) -> Result<f64> {
    if geom.kind() == GeometryKind::PlaneRadial {
        return Err(Error::UnsupportedGeometry("F is defined on the circle and the sphere".into()));
    }
    let b = differentiate(geom, u)?;
    Ok(functional_f_from(geom, lambda, &b.u, &b.grad_sq))
}

pub(crate) fn functional_f_from(geom: &Geometry, lambda: f64, u: &[f64], grad_sq: &[f64]) -> f64 {
    let vol = geom.volume();
    let top = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = u.iter().map(|v| (v - top).exp()).collect();
    let log_mean_exp = top + (geom.quad(&e) / vol).ln();
    0.25 * geom.quad(grad_sq) + lambda * (geom.quad(u) - vol * log_mean_exp)
}

/// `G_λ[f] = tensor + ricci − λ · denominator`, all weighted by `e^{-f/2}`.
pub fn dissipation_g(geom: &Geometry, lambda: f64, f: &ScalarField) -> Result<f64> {
    geom.expect_kind(GeometryKind::SphereZonal)?;
    let b = differentiate(geom, f)?;
    let (t, r, d) = quotient_parts(geom, &b);
    Ok(t + r - lambda * d)
}

pub fn solve_el_sphere(lambda: f64, init: &ScalarField, tol: f64) -> Result<BranchPoint> {
    init.geometry().expect_kind(GeometryKind::SphereZonal)?;
    crate::branch::solve_el(lambda, init, tol)
}

/// Sign change of `λ₁/2 − λ`, the smallest linearized eigenvalue at the
/// constant solution over zonal mean-zero perturbations.
pub fn bifurcation_scan_sphere(geom: &Geometry, lambda_min: f64, lambda_max: f64, steps: usize) -> Result<Bifurcation> {
    geom.expect_kind(GeometryKind::SphereZonal)?;
    if !(lambda_min > 0.0 && lambda_max > lambda_min && steps >= 1) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < lambda_min < lambda_max and steps >= 1, got [{lambda_min}, {lambda_max}], {steps}"
        )));
    }
    let l1 = first_eigenvalue(geom)?;
    scan_with(|l| 0.5 * l1 - l, lambda_min, lambda_max, steps)
}

/// `a·P_l(cos θ)` as a field.
pub fn zonal_harmonic(geom: &Arc<Geometry>, l: usize, a: f64) -> Result<ScalarField> {
    ScalarField::from_fn(geom, |t| a * crate::geometry::legendre::legendre_table(l, t.cos())[l])
}
