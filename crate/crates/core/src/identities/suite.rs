//! Batches of identity checks on seeded random fields.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::random::{random_field, trial_rng};
use super::{verify_many, IdentityId, IdentityInput, IdentityReport};
use crate::error::{Error, Result};
use crate::euclidean::{Weight, WeightKind};
use crate::geometry::{Geometry, Normalization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Circle,
    Sphere,
    Plane,
    All,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Circle => "circle",
            Suite::Sphere => "sphere",
            Suite::Plane => "plane",
            Suite::All => "all",
        }
    }

    /// The single-geometry suites making up `self`.
    pub fn parts(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Circle, Suite::Sphere, Suite::Plane],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Suite::Circle),
            "sphere" => Ok(Suite::Sphere),
            "plane" => Ok(Suite::Plane),
            "all" => Ok(Suite::All),
            _ => Err(Error::Unknown(s.to_string())),
        }
    }
}

/// Identities checked on random fields (EL-only ones are excluded).
pub fn suite_identities(suite: Suite) -> Vec<IdentityId> {
    use IdentityId::*;
    match suite {
        Suite::Circle => vec![CircleIntparts, CircleSpectral, AlgHessianSplit],
        Suite::Sphere => vec![
            AlgHessianSplit,
            AlgMNorm,
            SphereBlwPointwise,
            SphereIbp,
            SphereBlwIntegral,
            PoincareSlack,
        ],
        Suite::Plane => vec![
            PlaneElim1,
            PlaneElim2,
            PlaneElim3,
            PlaneAbc,
            PlaneDE,
            PlaneIpp1,
            PlaneIpp2,
            PlaneDeltau2,
            AlgHessianSplit,
            AlgMNorm,
        ],
        Suite::All => Suite::All.parts().into_iter().flat_map(suite_identities).collect(),
    }
}

pub fn default_tolerance(suite: Suite) -> f64 {
    match suite {
        Suite::Circle => 1e-8,
        Suite::Sphere => 1e-7,
        Suite::Plane | Suite::All => 1e-5,
    }
}

fn default_resolution(suite: Suite) -> usize {
    match suite {
        Suite::Circle | Suite::Sphere => 256,
        _ => 2048,
    }
}

/// Geometry used by a single-geometry suite at resolution `n`.
pub fn suite_geometry(suite: Suite, n: usize) -> Result<Geometry> {
    match suite {
        Suite::Circle => Geometry::circle(n, 1.0),
        Suite::Sphere => Geometry::sphere(n, Normalization::UnitRadius),
        Suite::Plane => Geometry::plane(n, 20.0),
        Suite::All => Err(Error::InvalidParameter("`all` has no single geometry".into())),
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub trials: usize,
    pub seed: u64,
    /// Overrides the per-suite default tolerance.
    pub tol: Option<f64>,
    /// Overrides the per-suite default resolution.
    pub resolution: Option<usize>,
    /// Plane density (stereographic by default).
    pub weight: Option<WeightKind>,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            trials: 32,
            seed: 7,
            tol: None,
            resolution: None,
            weight: None,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitySummary {
    pub identity_id: IdentityId,
    pub checks: usize,
    pub failed: usize,
    pub max_rel_err: f64,
    /// Smallest slack, for inequalities.
    pub min_slack: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub under_resolved: usize,
    pub per_identity: Vec<IdentitySummary>,
    /// Provenance remarks, e.g. the plane truncation tail.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub reports: Vec<IdentityReport>,
    pub summary: SuiteSummary,
}

impl SuiteResult {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidParameter("jobs must be >= 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Unknown(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn run_part(suite: Suite, opts: &SuiteOptions, notes: &mut Vec<String>) -> Result<Vec<IdentityReport>> {
    let tol = opts.tol.unwrap_or(default_tolerance(suite));
    let n = opts.resolution.unwrap_or(default_resolution(suite));
    let geom = Arc::new(suite_geometry(suite, n)?);
    let weight = if suite == Suite::Plane {
        let w = Weight::new(opts.weight.unwrap_or(WeightKind::Stereographic), &geom)?;
        notes.push(format!(
            "plane integrals truncated at R = {}: weight tail mass {:.3e}, normalization defect {:.3e}",
            geom.plane_radius().unwrap_or(0.0),
            w.tail_mass,
            w.normalization_defect
        ));
        Some(w)
    } else {
        None
    };
    let ids = suite_identities(suite);
    let per_trial: Vec<Result<Vec<IdentityReport>>> = with_pool(opts.jobs, || {
        (0..opts.trials)
            .into_par_iter()
            .map(|trial| {
                let field = random_field(&geom, &mut trial_rng(opts.seed, trial))?;
                let mut input = IdentityInput::field(&field).with_trial(opts.seed, trial);
                if let Some(w) = &weight {
                    input = input.with_weight(w);
                }
                verify_many(&ids, &geom, &input, tol)
            })
            .collect()
    })?;
    let mut out = Vec::with_capacity(opts.trials * ids.len());
    for r in per_trial {
        out.extend(r?);
    }
    let order = |id: IdentityId| ids.iter().position(|&x| x == id).unwrap_or(usize::MAX);
    out.sort_by_key(|r| (order(r.identity_id), r.trial));
    Ok(out)
}

fn summarize(suite: Suite, reports: &[IdentityReport], notes: Vec<String>) -> SuiteSummary {
    let mut per_identity: Vec<IdentitySummary> = Vec::new();
    for r in reports {
        let pos = per_identity
            .iter()
            .position(|s| s.identity_id == r.identity_id);
        let s = match pos {
            Some(p) => &mut per_identity[p],
            None => {
                per_identity.push(IdentitySummary {
                    identity_id: r.identity_id,
                    checks: 0,
                    failed: 0,
                    max_rel_err: 0.0,
                    min_slack: None,
                });
                per_identity.last_mut().unwrap()
            }
        };
        s.checks += 1;
        s.failed += usize::from(!r.pass);
        s.max_rel_err = s.max_rel_err.max(r.rel_err);
        if let Some(sl) = r.slack {
            s.min_slack = Some(s.min_slack.map_or(sl, |m: f64| m.min(sl)));
        }
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    SuiteSummary {
        suite,
        total: reports.len(),
        passed: reports.len() - failed,
        failed,
        under_resolved: reports.iter().filter(|r| r.under_resolved).count(),
        per_identity,
        notes,
    }
}

/// Runs every applicable identity on `opts.trials` random fields per geometry.
///
/// Reports are ordered by identity (suite order) and then trial, independently
/// of the thread count.
pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteResult> {
    if opts.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if let Some(t) = opts.tol {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {t}")));
        }
    }
    let mut reports = Vec::new();
    let mut notes = Vec::new();
    for part in suite.parts() {
        reports.extend(run_part(part, opts, &mut notes)?);
    }
    let summary = summarize(suite, &reports, notes);
    Ok(SuiteResult { reports, summary })
}

/// Worst relative error (negative slack for inequalities) per identity of a
/// single-geometry suite at resolutions `n` and `2n`.
pub fn convergence_pair(suite: Suite, n: usize, trials: usize, seed: u64) -> Result<Vec<(IdentityId, f64, f64)>> {
    let worst = |res: usize| -> Result<Vec<IdentityReport>> {
        let opts = SuiteOptions {
            trials,
            seed,
            tol: Some(1.0),
            resolution: Some(res),
            ..Default::default()
        };
        Ok(run_suite(suite, &opts)?.reports)
    };
    let coarse = worst(n)?;
    let fine = worst(2 * n)?;
    let ids = suite_identities(suite);
    Ok(ids
        .into_iter()
        .map(|id| {
            let m = |rs: &[IdentityReport]| {
                rs.iter()
                    .filter(|r| r.identity_id == id)
                    .map(|r| r.rel_err)
                    .fold(0.0, f64::max)
            };
            (id, m(&coarse), m(&fine))
        })
        .collect())
}

/// CSV with columns `identity_id, geometry, seed, trial, lhs, rhs, rel_err, pass`.
pub fn write_reports_csv<W: Write>(reports: &[IdentityReport], mut w: W) -> Result<()> {
    writeln!(w, "identity_id,geometry,seed,trial,lhs,rhs,rel_err,pass")?;
    for r in reports {
        let opt = |v: Option<String>| v.unwrap_or_default();
        writeln!(
            w,
            "{},\"{}\",{},{},{:.17e},{:.17e},{:.6e},{}",
            r.identity_id,
            r.geometry,
            opt(r.seed.map(|s| s.to_string())),
            opt(r.trial.map(|t| t.to_string())),
            r.lhs,
            r.rhs,
            r.rel_err,
            r.pass
        )?;
    }
    Ok(())
}
