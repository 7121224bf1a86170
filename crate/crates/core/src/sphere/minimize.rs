//! Multistart projected descent of the rigidity quotient over zonal fields
//! `u = Σ c_l P_l(cos θ)`.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::lambda_star_quotient;
use crate::error::{Error, Result};
use crate::geometry::{legendre::legendre_table, Geometry, GeometryKind, ScalarField};
use crate::identities::trial_rng;

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub modes: usize,
    /// Modes used in the refinement pass (0 skips it).
    pub refine_modes: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Coefficient vectors are kept in the annulus `[min_norm, max_norm]`.
    pub min_norm: f64,
    pub max_norm: f64,
    pub fd_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 16,
            modes: 12,
            refine_modes: 24,
            iterations: 200,
            seed: 7,
            min_norm: 1e-3,
            max_norm: 3.0,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaStarEstimate {
    pub estimate: f64,
    /// Quotient evaluations, finite-difference probes included.
    pub probe_count: usize,
    /// Set when no start improved during its last quarter of iterations
    /// while the step had collapsed.
    pub stalled: bool,
    pub coefficients: Vec<f64>,
    #[serde(skip)]
    pub field: ScalarField,
}

struct Probe<'a> {
    geom: &'a Arc<Geometry>,
    /// `P_l(cos θ_j)` for `l = 0..=modes`, per node.
    table: Vec<Vec<f64>>,
}

impl<'a> Probe<'a> {
    fn new(geom: &'a Arc<Geometry>, modes: usize) -> Self {
        let table = geom.nodes().iter().map(|t| legendre_table(modes, t.cos())).collect();
        Self { geom, table }
    }

    fn field(&self, c: &[f64]) -> Result<ScalarField> {
        let vals = self
            .table
            .iter()
            .map(|p| c.iter().zip(&p[1..]).map(|(a, b)| a * b).sum())
            .collect();
        ScalarField::from_values(self.geom, vals)
    }

    fn eval(&self, c: &[f64]) -> f64 {
        self.field(c)
            .and_then(|u| lambda_star_quotient(self.geom, &u))
            .map_or(f64::INFINITY, |q| q.value)
    }
}

fn project(c: &mut [f64], lo: f64, hi: f64) {
    let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        c[0] = lo;
    } else if n < lo || n > hi {
        let s = n.clamp(lo, hi) / n;
        c.iter_mut().for_each(|x| *x *= s);
    }
}

struct Run {
    value: f64,
    coef: Vec<f64>,
    probes: usize,
    stalled: bool,
}

fn descend(p: &Probe, mut c: Vec<f64>, cfg: &OptimizerConfig) -> Run {
    project(&mut c, cfg.min_norm, cfg.max_norm);
    let mut val = p.eval(&c);
    let mut probes = 1;
    let mut step = 0.1;
    let mut last_gain = 0;
    for it in 0..cfg.iterations {
        let mut grad = vec![0.0; c.len()];
        for i in 0..c.len() {
            let mut a = c.clone();
            let mut b = c.clone();
            a[i] += cfg.fd_step;
            b[i] -= cfg.fd_step;
            grad[i] = (p.eval(&a) - p.eval(&b)) / (2.0 * cfg.fd_step);
        }
        probes += 2 * c.len();
        let gn = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if !(gn.is_finite() && gn > 0.0) {
            break;
        }
        // backtracking along the normalized gradient
        let mut moved = false;
        while step > 1e-10 {
            let mut t: Vec<f64> = c.iter().zip(&grad).map(|(x, g)| x - step * g / gn).collect();
            project(&mut t, cfg.min_norm, cfg.max_norm);
            let v = p.eval(&t);
            probes += 1;
            if v < val {
                (c, val) = (t, v);
                step *= 1.5;
                moved = true;
                last_gain = it;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let stalled = step <= 1e-10 && last_gain + cfg.iterations / 4 < cfg.iterations;
    Run {
        value: val,
        coef: c,
        probes,
        stalled,
    }
}

/// Estimates `λ⋆` from above as the smallest quotient found by descent from
/// `cfg.starts` random zonal fields, refined on `cfg.refine_modes` modes.
///
/// Only zonal fields are probed, so the result bounds the zonal infimum.
pub fn minimize_lambda_star(geom: &Arc<Geometry>, cfg: &OptimizerConfig) -> Result<LambdaStarEstimate> {
    geom.expect_kind(GeometryKind::SphereZonal)?;
    if cfg.starts == 0 || cfg.modes == 0 {
        return Err(Error::InvalidParameter("need at least one start and one mode".into()));
    }
    if !(cfg.min_norm > 0.0 && cfg.max_norm > cfg.min_norm) {
        return Err(Error::InvalidParameter("need 0 < min_norm < max_norm".into()));
    }
    if cfg.modes.max(cfg.refine_modes) >= geom.resolution() {
        return Err(Error::ResolutionTooSmall {
            got: geom.resolution(),
            min: cfg.modes.max(cfg.refine_modes) + 1,
        });
    }
    let probe = Probe::new(geom, cfg.modes);
    let runs: Vec<Run> = (0..cfg.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(cfg.seed, k);
            let amp: f64 = rng.gen_range(0.05..1.5);
            let c: Vec<f64> = (1..=cfg.modes)
                .map(|l| amp * rng.gen_range(-1.0..1.0) / (l as f64).powi(2))
                .collect();
            descend(&probe, c, cfg)
        })
        .collect();
    let mut probes: usize = runs.iter().map(|r| r.probes).sum();
    let stalled = runs.iter().all(|r| r.stalled);
    let best = runs
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");
    let (mut value, mut coef) = (best.value, best.coef);
    if cfg.refine_modes > cfg.modes {
        let fine = Probe::new(geom, cfg.refine_modes);
        let mut c = coef.clone();
        c.resize(cfg.refine_modes, 0.0);
        let r = descend(&fine, c, cfg);
        probes += r.probes;
        if r.value < value {
            (value, coef) = (r.value, r.coef);
        }
    }
    if !value.is_finite() {
        return Err(Error::NotConverged {
            iterations: cfg.iterations,
            update: value,
            history: vec![],
        });
    }
    let field = Probe::new(geom, coef.len()).field(&coef)?;
    Ok(LambdaStarEstimate {
        estimate: value,
        probe_count: probes,
        stalled,
        coefficients: coef,
        field,
    })
}
