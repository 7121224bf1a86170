//! Solutions of `-½ Δu + λ - e^u = 0` on the circle and the zonal sphere.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{laplacian_matrix, Geometry, GeometryKind, ScalarField};
use crate::newton::{self, NewtonOptions};

const MAX_TRANSIENT_STEPS: usize = 500;
/// Residual at which pseudo-transient continuation hands over to Newton.
const TRANSIENT_HANDOFF: f64 = 1e-6;

/// Sup distance to the mean below which a solution counts as constant.
pub const CONSTANT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchTag {
    Constant,
    Nonconstant,
}

impl fmt::Display for BranchTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchTag::Constant => "constant",
            BranchTag::Nonconstant => "nonconstant",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    pub solution: ScalarField,
    pub branch_tag: BranchTag,
    /// Sup norm of the collocation residual.
    pub newton_residual: f64,
    /// `sup |u - mean(u)|`.
    pub distance_to_constant: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

impl BranchPoint {
    pub(crate) fn from_solution(lambda: f64, solution: ScalarField, residual: f64, iterations: usize, history: Vec<f64>) -> Self {
        let m = solution.mean();
        let dist = solution.values().iter().fold(0.0f64, |a, v| a.max((v - m).abs()));
        Self {
            lambda,
            branch_tag: if dist <= CONSTANT_THRESHOLD {
                BranchTag::Constant
            } else {
                BranchTag::Nonconstant
            },
            solution,
            newton_residual: residual,
            distance_to_constant: dist,
            iterations,
            history,
        }
    }
}

/// Discrete EL operator with its Jacobian, reusable across `λ`.
#[derive(Debug, Clone)]
pub struct ElOperator {
    geom: Arc<Geometry>,
    lap: DMatrix<f64>,
}

impl ElOperator {
    pub fn new(geom: &Arc<Geometry>) -> Result<Self> {
        if geom.kind() == GeometryKind::PlaneRadial {
            return Err(Error::UnsupportedGeometry(
                "this equation is posed on the circle or the sphere".into(),
            ));
        }
        Ok(Self {
            geom: Arc::clone(geom),
            lap: laplacian_matrix(geom),
        })
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geom
    }

    pub fn residual(&self, lambda: f64, u: &[f64]) -> Option<Vec<f64>> {
        if !u.iter().all(|v| v.is_finite()) {
            return None;
        }
        let lu = self.geom.laplacian(u);
        let r: Vec<f64> = (0..u.len()).map(|j| -0.5 * lu[j] + lambda - u[j].exp()).collect();
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let mut j = &self.lap * -0.5;
        for (i, v) in u.iter().enumerate() {
            j[(i, i)] -= v.exp();
        }
        j
    }

    /// Damped Newton from `init`; the sup-norm residual must reach `tol`.
    pub fn solve(&self, lambda: f64, init: &ScalarField, tol: f64) -> Result<BranchPoint> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
        }
        if **init.geometry() != *self.geom {
            return Err(Error::GeometryMismatch {
                expected: self.geom.descriptor(),
                found: init.geometry().descriptor(),
            });
        }
        let opts = NewtonOptions {
            tol,
            ..Default::default()
        };
        let newton_from = |x0: Vec<f64>, opts: &NewtonOptions| {
            newton::solve(x0, |u| self.residual(lambda, u), |u| self.jacobian(u), opts)
        };
        // a good start converges in a handful of steps; otherwise globalize
        let quick = NewtonOptions {
            max_iter: 20,
            ..opts
        };
        let out = match newton_from(init.values().to_vec(), &quick) {
            Ok(out) => out,
            Err(first) => {
                let Ok((v, steps)) = self.transient(lambda, init.values()) else {
                    return Err(first);
                };
                let mut out = newton_from(v, &opts)?;
                out.iterations += steps;
                out
            }
        };
        let u = ScalarField::from_values(&self.geom, out.x)?;
        Ok(BranchPoint::from_solution(lambda, u, out.residual, out.iterations, out.history))
    }

    /// Pseudo-transient continuation on the mass-normalized form
    /// `G(v) = -½Δv + λ - λ e^v / ⨍e^v`, the gradient of the MTO functional.
    /// Small pseudo-time steps follow its (parabolic) gradient flow, large
    /// ones become Newton steps. Zeros of `G` are solutions up to the shift
    /// `log λ - log ⨍e^v`, which is applied on return.
    fn transient(&self, lambda: f64, init: &[f64]) -> Result<(Vec<f64>, usize)> {
        let n = init.len();
        let w = self.geom.weights();
        let vol = self.geom.volume();
        let mut v = init.to_vec();
        let eval = |v: &[f64]| {
            let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = v.iter().map(|x| (x - top).exp()).collect();
            let m = self.geom.quad(&e) / vol;
            let lv = self.geom.laplacian(v);
            let g: Vec<f64> = (0..n).map(|j| -0.5 * lv[j] + lambda - lambda * e[j] / m).collect();
            (g, e, m, top)
        };
        let (mut g, mut e, mut m, mut top) = eval(&v);
        let mut tau = 1e-2;
        let mut gnorm = newton::sup(&g);
        for step in 0..MAX_TRANSIENT_STEPS {
            if gnorm <= TRANSIENT_HANDOFF {
                let shift = lambda.ln() - top - m.ln();
                return Ok((v.into_iter().map(|x| x + shift).collect(), step));
            }
            let mut a = &self.lap * -0.5;
            for i in 0..n {
                a[(i, i)] += 1.0 / tau - lambda * e[i] / m;
                for j in 0..n {
                    a[(i, j)] += lambda * e[i] * w[j] * e[j] / (m * m * vol);
                }
            }
            let rhs = nalgebra::DVector::from_iterator(n, g.iter().map(|x| -x));
            let delta = a
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Unknown("singular pseudo-transient system".into()))?;
            let trial: Vec<f64> = v.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            let (g2, e2, m2, top2) = eval(&trial);
            let n2 = newton::sup(&g2);
            if !n2.is_finite() {
                tau *= 0.1;
                continue;
            }
            tau *= (gnorm / n2).clamp(0.5, 10.0);
            (v, g, e, m, top, gnorm) = (trial, g2, e2, m2, top2, n2);
        }
        Err(Error::NotConverged {
            iterations: MAX_TRANSIENT_STEPS,
            update: gnorm,
            history: vec![],
        })
    }

    /// Follows a solution from `start.lambda` to `target` in `steps` equal
    /// increments, each solve starting from the previous solution.
    pub fn continuation(&self, start: &BranchPoint, target: f64, steps: usize, tol: f64) -> Result<Vec<BranchPoint>> {
        let steps = steps.max(1);
        let mut out = Vec::with_capacity(steps);
        let mut cur = start.solution.clone();
        for k in 1..=steps {
            let lam = start.lambda + (target - start.lambda) * k as f64 / steps as f64;
            let bp = self.solve(lam, &cur, tol)?;
            cur = bp.solution.clone();
            out.push(bp);
        }
        Ok(out)
    }
}

/// Solves `-½ Δu + λ = e^u` on a circle or zonal sphere.
pub fn solve_el(lambda: f64, init: &ScalarField, tol: f64) -> Result<BranchPoint> {
    ElOperator::new(init.geometry())?.solve(lambda, init, tol)
}
