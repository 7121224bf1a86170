//! Registry and assembly of the integration-by-parts identities.
//!
//! Both sides of every identity are assembled by quadrature from a single
//! [`DerivativeBundle`]. Each split keeps a manifestly signed term alone on
//! one side so that `rel_err` is not dominated by cancellation.

mod random;
mod suite;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

pub use random::{random_field, trial_rng};
pub use suite::{
    convergence_pair, default_tolerance, run_suite, suite_geometry, suite_identities, write_reports_csv,
    IdentitySummary, Suite, SuiteOptions, SuiteResult, SuiteSummary,
};

use crate::error::{Error, Result};
use crate::euclidean::Weight;
use crate::geometry::{differentiate, DerivativeBundle, Geometry, GeometryKind, ScalarField};

/// Floor for the denominator of relative errors.
pub const REL_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IdentityId {
    AlgHessianSplit,
    AlgMNorm,
    SphereBlwPointwise,
    SphereIbp,
    SphereBlwIntegral,
    PoincareSlack,
    CircleIntparts,
    CircleElIdentity,
    CircleSpectral,
    PlaneElim1,
    PlaneElim2,
    PlaneElim3,
    PlaneAbc,
    PlaneDE,
    PlaneIpp1,
    PlaneIpp2,
    PlaneDeltau2,
    PlaneIZero,
    PlaneFinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Integral equality.
    Equality,
    /// `lhs >= rhs`; only a negative slack counts as error.
    Inequality,
    /// Nodewise equality, reported through sup norms.
    Pointwise,
}

use GeometryKind::{Circle, PlaneRadial, SphereZonal};

const ALL: &[GeometryKind] = &[Circle, SphereZonal, PlaneRadial];

impl IdentityId {
    pub const ALL: [IdentityId; 19] = [
        IdentityId::AlgHessianSplit,
        IdentityId::AlgMNorm,
        IdentityId::SphereBlwPointwise,
        IdentityId::SphereIbp,
        IdentityId::SphereBlwIntegral,
        IdentityId::PoincareSlack,
        IdentityId::CircleIntparts,
        IdentityId::CircleElIdentity,
        IdentityId::CircleSpectral,
        IdentityId::PlaneElim1,
        IdentityId::PlaneElim2,
        IdentityId::PlaneElim3,
        IdentityId::PlaneAbc,
        IdentityId::PlaneDE,
        IdentityId::PlaneIpp1,
        IdentityId::PlaneIpp2,
        IdentityId::PlaneDeltau2,
        IdentityId::PlaneIZero,
        IdentityId::PlaneFinal,
    ];

    pub fn as_str(self) -> &'static str {
        use IdentityId::*;
        match self {
            AlgHessianSplit => "ALG_HESSIAN_SPLIT",
            AlgMNorm => "ALG_M_NORM",
            SphereBlwPointwise => "SPHERE_BLW_POINTWISE",
            SphereIbp => "SPHERE_IBP",
            SphereBlwIntegral => "SPHERE_BLW_INTEGRAL",
            PoincareSlack => "POINCARE_SLACK",
            CircleIntparts => "CIRCLE_INTPARTS",
            CircleElIdentity => "CIRCLE_EL_IDENTITY",
            CircleSpectral => "CIRCLE_SPECTRAL",
            PlaneElim1 => "PLANE_ELIM1",
            PlaneElim2 => "PLANE_ELIM2",
            PlaneElim3 => "PLANE_ELIM3",
            PlaneAbc => "PLANE_ABC",
            PlaneDE => "PLANE_D_E",
            PlaneIpp1 => "PLANE_IPP1",
            PlaneIpp2 => "PLANE_IPP2",
            PlaneDeltau2 => "PLANE_DELTAU2",
            PlaneIZero => "PLANE_I_ZERO",
            PlaneFinal => "PLANE_FINAL",
        }
    }

    pub fn geometries(self) -> &'static [GeometryKind] {
        use IdentityId::*;
        match self {
            AlgHessianSplit | AlgMNorm => ALL,
            SphereBlwPointwise | SphereIbp | SphereBlwIntegral => &[SphereZonal],
            PoincareSlack => &[Circle, SphereZonal],
            CircleIntparts | CircleElIdentity | CircleSpectral => &[Circle],
            _ => &[PlaneRadial],
        }
    }

    pub fn relation(self) -> Relation {
        use IdentityId::*;
        match self {
            AlgHessianSplit | AlgMNorm | SphereBlwPointwise | PlaneDE => Relation::Pointwise,
            PoincareSlack | CircleSpectral => Relation::Inequality,
            _ => Relation::Equality,
        }
    }

    /// True if the identity uses the Euler-Lagrange equation.
    pub fn requires_el(self) -> bool {
        matches!(
            self,
            IdentityId::CircleElIdentity | IdentityId::PlaneIZero | IdentityId::PlaneFinal
        )
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase().replace('-', "_");
        IdentityId::ALL
            .into_iter()
            .find(|id| id.as_str() == up)
            .ok_or_else(|| Error::Unknown(s.to_string()))
    }
}

/// Field (or solver output) handed to [`verify_identity`].
#[derive(Debug, Clone)]
pub struct IdentityInput<'a> {
    pub field: &'a ScalarField,
    /// Plane density; the stereographic weight is used when absent.
    pub weight: Option<&'a Weight>,
    /// `λ` of the equation the field solves, if it is a solution.
    pub el_lambda: Option<f64>,
    pub seed: Option<u64>,
    pub trial: Option<usize>,
    pub note: String,
}

impl<'a> IdentityInput<'a> {
    pub fn field(field: &'a ScalarField) -> Self {
        Self {
            field,
            weight: None,
            el_lambda: None,
            seed: None,
            trial: None,
            note: String::new(),
        }
    }

    pub fn solution(field: &'a ScalarField, lambda: f64) -> Self {
        Self {
            el_lambda: Some(lambda),
            ..Self::field(field)
        }
    }

    pub fn with_weight(mut self, w: &'a Weight) -> Self {
        self.weight = Some(w);
        self
    }

    pub fn with_trial(mut self, seed: u64, trial: usize) -> Self {
        self.seed = Some(seed);
        self.trial = Some(trial);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub identity_id: IdentityId,
    pub geometry: String,
    pub seed: Option<u64>,
    pub trial: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
    /// `lhs - rhs` for inequalities.
    pub slack: Option<f64>,
    /// Set when the field's spectral tail is not negligible.
    pub under_resolved: bool,
    pub context: String,
}

/// `lhs`, `rhs`, `abs_err` for one check.
#[derive(Debug, Clone, Copy)]
struct Sides {
    lhs: f64,
    rhs: f64,
    abs_err: f64,
    slack: Option<f64>,
}

impl Sides {
    fn eq(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            abs_err: (lhs - rhs).abs(),
            slack: None,
        }
    }

    fn ineq(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            abs_err: (rhs - lhs).max(0.0),
            slack: Some(lhs - rhs),
        }
    }

    /// Sup norms of both sides and of their nodewise difference.
    fn pointwise(lhs: &[f64], rhs: &[f64]) -> Self {
        let mut s = Self::eq(0.0, 0.0);
        for (a, b) in lhs.iter().zip(rhs) {
            s.lhs = s.lhs.max(a.abs());
            s.rhs = s.rhs.max(b.abs());
            s.abs_err = s.abs_err.max((a - b).abs());
        }
        s
    }

    fn rel(&self) -> f64 {
        self.abs_err / self.lhs.abs().max(self.rhs.abs()).max(REL_FLOOR)
    }

    /// The check with the larger relative error.
    fn worst(items: impl IntoIterator<Item = Sides>) -> Sides {
        items
            .into_iter()
            .max_by(|a, b| a.rel().total_cmp(&b.rel()))
            .expect("at least one check")
    }
}

/// Weighted integrals shared by the manifold identities (`e = e^{-u/2}`).
struct ManifoldIntegrals {
    lap_grad2: f64,
    lm: f64,
    grad4: f64,
    lap2: f64,
    l2: f64,
    grad2: f64,
}

impl ManifoldIntegrals {
    fn new(geom: &Geometry, b: &DerivativeBundle) -> Self {
        let e: Vec<f64> = b.u.iter().map(|u| (-0.5 * u).exp()).collect();
        let q = |f: &dyn Fn(usize) -> f64| -> f64 {
            geom.weights().iter().enumerate().map(|(j, w)| w * f(j) * e[j]).sum()
        };
        Self {
            lap_grad2: q(&|j| b.lap[j] * b.grad_sq[j]),
            lm: q(&|j| b.lm_inner[j]),
            grad4: q(&|j| b.grad_sq[j] * b.grad_sq[j]),
            lap2: q(&|j| b.lap[j] * b.lap[j]),
            l2: q(&|j| b.l_normsq[j]),
            grad2: q(&|j| b.grad_sq[j]),
        }
    }
}

/// Plane integrals against `dν = e^{-u/2-g} dx` (and `dx` where noted).
struct PlaneIntegrals {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    p: f64,
    q: f64,
    lap_grad2: f64,
    lm: f64,
    m2: f64,
    grad4: f64,
    lap_of_grad2: f64,
    lap2: f64,
    l2: f64,
    lmn: f64,
    /// `∫ |∇u|^2 e^{-u/2} dx`.
    grad2_dx: f64,
    /// `∫ (Δg + |∇g|^2 - (∇g·ω)^2) |∇u|^2 dν`.
    final_g: f64,
}

impl PlaneIntegrals {
    fn new(geom: &Geometry, b: &DerivativeBundle) -> Self {
        let t = b.weighted.as_ref().expect("plane bundle carries weight terms");
        let e: Vec<f64> = b.u.iter().map(|u| (-0.5 * u).exp()).collect();
        let nu: Vec<f64> = e.iter().zip(&t.g).map(|(e, g)| e * (-g).exp()).collect();
        let w = geom.weights();
        let qn = |f: &dyn Fn(usize) -> f64| -> f64 { (0..w.len()).map(|j| w[j] * f(j) * nu[j]).sum() };
        Self {
            a: qn(&|j| b.lap[j] * t.du_dg[j]),
            b: qn(&|j| b.grad_sq[j] * t.du_dg[j]),
            c: qn(&|j| t.hess_u_ug[j]),
            d: qn(&|j| t.hess_g_uu[j]),
            e: qn(&|j| t.du_dg_sq[j]),
            p: qn(&|j| t.lm_ug[j]),
            q: qn(&|j| b.grad_sq[j] * (t.grad_g_sq[j] - t.lap_g[j])),
            lap_grad2: qn(&|j| b.lap[j] * b.grad_sq[j]),
            lm: qn(&|j| b.lm_inner[j]),
            m2: qn(&|j| b.m_normsq[j]),
            grad4: qn(&|j| b.grad_sq[j] * b.grad_sq[j]),
            lap_of_grad2: qn(&|j| b.lap_grad_sq[j]),
            lap2: qn(&|j| b.lap[j] * b.lap[j]),
            l2: qn(&|j| b.l_normsq[j]),
            lmn: qn(&|j| t.lmn_normsq[j]),
            grad2_dx: (0..w.len()).map(|j| w[j] * b.grad_sq[j] * e[j]).sum(),
            final_g: qn(&|j| (t.lap_g[j] + t.grad_g_sq[j] - t.omega_g_sq[j]) * b.grad_sq[j]),
        }
    }
}

/// First positive eigenvalue of `-Δ` on the circle or sphere, in closed form.
pub(crate) fn analytic_lambda1(geom: &Geometry) -> f64 {
    match geom.params() {
        crate::geometry::GeometryParams::Circle { period } => 4.0 * PI * PI / (period * period),
        crate::geometry::GeometryParams::Sphere { radius, .. } => 2.0 / (radius * radius),
        crate::geometry::GeometryParams::Plane { .. } => f64::NAN,
    }
}

fn geometry_label(geom: &Geometry) -> String {
    geom.descriptor().trim_start_matches("#geom ").to_string()
}

fn assemble(id: IdentityId, geom: &Geometry, b: &DerivativeBundle, lambda: Option<f64>) -> Sides {
    use IdentityId::*;
    let d = b.dim as f64;
    let rho = b.ricci;
    let lam = lambda.unwrap_or(f64::NAN);
    match id {
        AlgHessianSplit => {
            let rhs: Vec<f64> = (0..b.len()).map(|j| b.l_normsq[j] + b.lap[j] * b.lap[j] / d).collect();
            Sides::pointwise(&b.hess_normsq, &rhs)
        }
        AlgMNorm => {
            let rhs: Vec<f64> = b.grad_sq.iter().map(|g| (1.0 - 1.0 / d) * g * g).collect();
            Sides::pointwise(&b.m_normsq, &rhs)
        }
        SphereBlwPointwise => {
            let lhs: Vec<f64> = (0..b.len())
                .map(|j| 0.5 * b.lap_grad_sq[j] - b.grad_lap_dot_grad[j])
                .collect();
            let rhs: Vec<f64> = (0..b.len())
                .map(|j| b.l_normsq[j] + b.lap[j] * b.lap[j] / d + rho * b.grad_sq[j])
                .collect();
            Sides::pointwise(&lhs, &rhs)
        }
        PlaneDE => {
            let rd: Vec<f64> = (0..b.len()).map(|j| b.hess_normsq[j] - 0.5 * b.lap[j] * b.lap[j]).collect();
            let re: Vec<f64> = b.grad_sq.iter().map(|g| 0.5 * g * g).collect();
            Sides::worst([Sides::pointwise(&b.l_normsq, &rd), Sides::pointwise(&b.m_normsq, &re)])
        }
        SphereIbp | SphereBlwIntegral | PoincareSlack | CircleIntparts | CircleElIdentity | CircleSpectral => {
            let m = ManifoldIntegrals::new(geom, b);
            let l1 = analytic_lambda1(geom);
            match id {
                SphereIbp => Sides::eq(
                    m.lap_grad2 + 2.0 * d / (d + 2.0) * m.lm,
                    0.5 * d / (d + 2.0) * m.grad4,
                ),
                SphereBlwIntegral => {
                    let k = d / (d - 1.0);
                    Sides::eq(
                        m.lap2,
                        0.75 * k * m.lap_grad2 - 0.125 * k * m.grad4 + k * m.l2 + k * rho * m.grad2,
                    )
                }
                PoincareSlack => Sides::ineq(m.lap2, l1 * m.grad2 - m.grad4 / 16.0 + 0.5 * m.lap_grad2),
                CircleIntparts => Sides::eq(m.lap_grad2, m.grad4 / 6.0),
                CircleElIdentity => Sides::eq(0.25 * m.lap2 + m.grad4 / 48.0, 0.5 * lam * m.grad2),
                CircleSpectral => Sides::ineq(m.lap2 - m.grad4 / 48.0, l1 * m.grad2),
                _ => unreachable!(),
            }
        }
        _ => {
            let p = PlaneIntegrals::new(geom, b);
            match id {
                PlaneElim1 => Sides::eq(2.0 * p.a - p.b + 2.0 * p.c + 2.0 * p.d, 2.0 * p.e),
                PlaneElim2 => Sides::eq(p.p, p.c - 0.5 * p.a - 0.25 * p.b),
                PlaneElim3 => Sides::eq(-0.5 * p.b + 2.0 * p.c, p.q),
                PlaneAbc => Sides::worst([
                    Sides::eq(p.a + 2.0 * p.p, p.q),
                    Sides::eq(p.b + 8.0 * p.p + 4.0 * p.e, 4.0 * p.d + 6.0 * p.q),
                    Sides::eq(p.c + p.e + 2.0 * p.p, p.d + 2.0 * p.q),
                ]),
                PlaneIpp1 => Sides::eq(
                    p.lap_grad2 + p.lm + 2.0 * p.e + 4.0 * p.p,
                    0.5 * p.m2 + 2.0 * p.d + 3.0 * p.q,
                ),
                PlaneIpp2 => Sides::eq(p.lap_of_grad2 + 0.5 * p.lap_grad2, 0.25 * p.grad4 + p.q + p.b),
                PlaneDeltau2 => Sides::eq(
                    p.lap2 + 1.5 * p.lm + 2.0 * p.p + p.d,
                    2.0 * p.l2 + 0.25 * p.m2 + p.e - 0.5 * p.q,
                ),
                PlaneIZero => Sides::eq(2.0 * p.lap2 + p.lap_grad2, 16.0 * PI * lam * p.grad2_dx),
                PlaneFinal => Sides::eq(4.0 * p.lmn, 2.0 * p.final_g + 16.0 * PI * lam * p.grad2_dx),
                _ => unreachable!(),
            }
        }
    }
}

fn check_applicable(id: IdentityId, geom: &Geometry, input: &IdentityInput<'_>) -> Result<()> {
    if !id.geometries().contains(&geom.kind()) {
        return Err(Error::GeometryMismatch {
            expected: id
                .geometries()
                .iter()
                .map(|k| k.as_str())
                .collect::<Vec<_>>()
                .join("|"),
            found: geom.kind().to_string(),
        });
    }
    if id.requires_el() && input.el_lambda.is_none() {
        return Err(Error::NeedsElSolution(id.to_string()));
    }
    Ok(())
}

fn bundle_for(geom: &Geometry, input: &IdentityInput<'_>) -> Result<DerivativeBundle> {
    if geom.kind() != PlaneRadial {
        return differentiate(geom, input.field);
    }
    let fallback;
    let w = match input.weight {
        Some(w) => w,
        None => {
            fallback = Weight::stereographic(input.field.geometry());
            &fallback
        }
    };
    if **w.geometry() != *geom {
        return Err(Error::GeometryMismatch {
            expected: geom.descriptor(),
            found: w.geometry().descriptor(),
        });
    }
    w.bundle(input.field)
}

fn report(id: IdentityId, geom: &Geometry, input: &IdentityInput<'_>, b: &DerivativeBundle, tol: f64) -> IdentityReport {
    let s = assemble(id, geom, b, input.el_lambda);
    let rel_err = s.rel();
    let mut context = geometry_label(geom);
    if let (Some(seed), Some(trial)) = (input.seed, input.trial) {
        context += &format!(" seed={seed} trial={trial}");
    }
    if let Some(l) = input.el_lambda {
        context += &format!(" lambda={l}");
    }
    if let Some(w) = input.weight {
        context += &format!(" weight={}", w.kind);
    }
    if !input.note.is_empty() {
        context += " ";
        context += &input.note;
    }
    context += &format!(" tol={tol:e}");
    IdentityReport {
        identity_id: id,
        geometry: geometry_label(geom),
        seed: input.seed,
        trial: input.trial,
        lhs: s.lhs,
        rhs: s.rhs,
        abs_err: s.abs_err,
        rel_err,
        tol,
        pass: rel_err <= tol,
        slack: s.slack,
        under_resolved: b.under_resolved,
        context,
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")))
    }
}

/// Checks one identity on one field.
pub fn verify_identity(id: IdentityId, geom: &Geometry, input: &IdentityInput<'_>, tol: f64) -> Result<IdentityReport> {
    verify_many(&[id], geom, input, tol).map(|mut v| v.remove(0))
}

/// Checks several identities on one field, differentiating it once.
pub fn verify_many(
    ids: &[IdentityId],
    geom: &Geometry,
    input: &IdentityInput<'_>,
    tol: f64,
) -> Result<Vec<IdentityReport>> {
    check_tol(tol)?;
    for &id in ids {
        check_applicable(id, geom, input)?;
    }
    let b = bundle_for(geom, input)?;
    Ok(ids.iter().map(|&id| report(id, geom, input, &b, tol)).collect())
}

/// Convenience wrapper around [`verify_identity`] for a field that owns its geometry.
pub fn verify_on(id: IdentityId, input: &IdentityInput<'_>, tol: f64) -> Result<IdentityReport> {
    let g: Arc<Geometry> = Arc::clone(input.field.geometry());
    verify_identity(id, &g, input, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Normalization;

    #[test]
    fn names_round_trip() {
        for id in IdentityId::ALL {
            assert_eq!(id.as_str().parse::<IdentityId>().unwrap(), id);
        }
        assert!("NOPE".parse::<IdentityId>().is_err());
    }

    #[test]
    fn circle_intparts_example() {
        let g = Arc::new(Geometry::circle(256, 1.0).unwrap());
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x).cos()).unwrap();
        let r = verify_on(IdentityId::CircleIntparts, &IdentityInput::field(&f), 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn constants_give_zero_sides() {
        let geoms = [
            Geometry::circle(32, 1.0).unwrap(),
            Geometry::sphere(32, Normalization::UnitRadius).unwrap(),
            Geometry::plane(64, 20.0).unwrap(),
        ];
        for g in geoms {
            let g = Arc::new(g);
            let f = ScalarField::constant(&g, 0.7).unwrap();
            for id in IdentityId::ALL {
                if !id.geometries().contains(&g.kind()) {
                    continue;
                }
                let inp = if id.requires_el() {
                    IdentityInput::solution(&f, 1.0)
                } else {
                    IdentityInput::field(&f)
                };
                let r = verify_on(id, &inp, 1e-12).unwrap();
                assert_eq!((r.lhs, r.rhs), (0.0, 0.0), "{id}");
                assert!(r.pass);
            }
        }
    }

    #[test]
    fn el_identities_need_solutions() {
        let g = Arc::new(Geometry::circle(32, 1.0).unwrap());
        let f = ScalarField::constant(&g, 0.0).unwrap();
        assert!(matches!(
            verify_on(IdentityId::CircleElIdentity, &IdentityInput::field(&f), 1e-8),
            Err(Error::NeedsElSolution(_))
        ));
        assert!(matches!(
            verify_on(IdentityId::PlaneElim1, &IdentityInput::field(&f), 1e-8),
            Err(Error::GeometryMismatch { .. })
        ));
    }

    #[test]
    fn poincare_saturates_on_first_harmonic() {
        let g = Arc::new(Geometry::sphere_with_radius(64, 1.0).unwrap());
        let mut prev = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3] {
            let f = ScalarField::from_fn(&g, |t| eps * t.cos()).unwrap();
            let r = verify_on(IdentityId::PoincareSlack, &IdentityInput::field(&f), 1e-7).unwrap();
            let rel = r.slack.unwrap() / r.lhs;
            assert!(r.pass && rel.abs() < prev);
            prev = rel.abs();
        }
        assert!(prev < 1e-2);
    }
}
