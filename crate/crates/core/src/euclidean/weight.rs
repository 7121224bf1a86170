use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{differentiate, Geometry, GeometryKind, ScalarField};

/// Largest tolerated defect of `∫μ = 1` after accounting for the tail beyond `R`.
pub const NORMALIZATION_TOL: f64 = 1e-4;

/// Which family a [`Weight`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightKind {
    Stereographic,
    Gaussian { sigma: f64 },
    /// Stereographic density tilted by `e^{-h}`, `h = amplitude / (1 + r^2)`.
    Perturbed { amplitude: f64 },
    KellerSegel { mass: f64 },
    KsSelfsim { mass: f64, epsilon: f64 },
}

impl WeightKind {
    pub fn label(&self) -> &'static str {
        match self {
            WeightKind::Stereographic => "stereographic",
            WeightKind::Gaussian { .. } => "gaussian",
            WeightKind::Perturbed { .. } => "perturbed",
            WeightKind::KellerSegel { .. } => "keller-segel",
            WeightKind::KsSelfsim { .. } => "ks-selfsim",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            WeightKind::Stereographic => vec![],
            WeightKind::Gaussian { sigma } => vec![sigma],
            WeightKind::Perturbed { amplitude } => vec![amplitude],
            WeightKind::KellerSegel { mass } => vec![mass],
            WeightKind::KsSelfsim { mass, epsilon } => vec![mass, epsilon],
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())?;
        for p in self.params() {
            write!(f, ":{p}")?;
        }
        Ok(())
    }
}

/// `stereographic`, `gaussian:σ`, `perturbed:a`, `keller-segel:M`, `ks-selfsim:M:ε`.
impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or("").trim();
        let nums: Vec<f64> = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad weight parameter `{p}`")))
            })
            .collect::<Result<_>>()?;
        let want = |n: usize| -> Result<()> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "weight `{name}` takes {n} parameter(s), got {}",
                    nums.len()
                )))
            }
        };
        match name {
            "stereographic" => {
                want(0)?;
                Ok(WeightKind::Stereographic)
            }
            "gaussian" => {
                if nums.is_empty() {
                    return Ok(WeightKind::Gaussian { sigma: 1.0 });
                }
                want(1)?;
                Ok(WeightKind::Gaussian { sigma: nums[0] })
            }
            "perturbed" => {
                want(1)?;
                Ok(WeightKind::Perturbed { amplitude: nums[0] })
            }
            "keller-segel" | "ks" => {
                want(1)?;
                Ok(WeightKind::KellerSegel { mass: nums[0] })
            }
            "ks-selfsim" => {
                want(2)?;
                Ok(WeightKind::KsSelfsim {
                    mass: nums[0],
                    epsilon: nums[1],
                })
            }
            other => Err(Error::InvalidParameter(format!("unknown weight kind `{other}`"))),
        }
    }
}

/// A smooth radial function with its first two radial derivatives.
pub trait RadialFunction: Sync {
    /// `(h, h', h'')` at radius `r`.
    fn eval(&self, r: f64) -> [f64; 3];

    /// `(lim h, lim (1+r^2)^2 Δh)` as `r → ∞`, if known.
    fn limits(&self) -> Option<(f64, f64)> {
        None
    }
}

/// `h(r) = amplitude / (1 + r^2)`.
#[derive(Debug, Clone, Copy)]
pub struct Lorentzian {
    pub amplitude: f64,
}

impl RadialFunction for Lorentzian {
    fn eval(&self, r: f64) -> [f64; 3] {
        let a = self.amplitude;
        let q = 1.0 + r * r;
        [
            a / q,
            -2.0 * a * r / (q * q),
            -2.0 * a * (1.0 - 3.0 * r * r) / (q * q * q),
        ]
    }

    fn limits(&self) -> Option<(f64, f64)> {
        Some((0.0, 4.0 * self.amplitude))
    }
}

/// Value and Laplacian of `g` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialPoint {
    pub r: f64,
    pub g: f64,
    pub lap_g: f64,
}

/// Keller-Segel data kept alongside the weight.
#[derive(Debug, Clone)]
pub struct KsProfile {
    pub mass: f64,
    pub epsilon: f64,
    pub c: Vec<f64>,
    pub dc: Vec<f64>,
    pub iterations: usize,
    pub history: Vec<f64>,
    /// `2π ∫ n r dr` from the cumulative radial integral.
    pub recovered_mass: f64,
}

/// Radial probability density `μ = e^g` sampled on a plane geometry.
#[derive(Debug, Clone)]
pub struct Weight {
    pub(crate) geom: Arc<Geometry>,
    pub kind: WeightKind,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub ddg: Vec<f64>,
    pub lap_g: Vec<f64>,
    pub origin: RadialPoint,
    pub edge: RadialPoint,
    /// Mass of `μ` beyond the truncation radius (analytic or estimated).
    pub tail_mass: f64,
    /// `|∫_{r<R} μ + tail_mass - 1|`.
    pub normalization_defect: f64,
    /// `inf_{r > R}` of the ratio `-Δg e^{-g} / 8π`, when known in closed form.
    pub tail_ratio_inf: Option<f64>,
    pub ks: Option<KsProfile>,
}

fn expect_plane(geom: &Geometry) -> Result<()> {
    geom.expect_kind(GeometryKind::PlaneRadial)
}

impl Weight {
    pub fn new(kind: WeightKind, geom: &Arc<Geometry>) -> Result<Self> {
        expect_plane(geom)?;
        match kind {
            WeightKind::Stereographic => Ok(Self::stereographic(geom)),
            WeightKind::Gaussian { sigma } => Self::gaussian(geom, sigma),
            WeightKind::Perturbed { amplitude } => {
                let mut w = Self::perturbed(geom, &Lorentzian { amplitude })?;
                w.kind = kind;
                Ok(w)
            }
            WeightKind::KellerSegel { mass } => {
                super::keller_segel::solve_keller_segel(mass, 0.0, geom, &Default::default())
            }
            WeightKind::KsSelfsim { mass, epsilon } => {
                super::keller_segel::solve_keller_segel(mass, epsilon, geom, &Default::default())
            }
        }
    }

    pub fn stereographic(geom: &Arc<Geometry>) -> Self {
        let g_of = |r: f64| -PI.ln() - 2.0 * (r * r).ln_1p();
        let lap_of = |r: f64| -8.0 / (1.0 + r * r).powi(2);
        let r = geom.nodes();
        let radius = geom.plane_radius().unwrap_or(0.0);
        let mut w = Self {
            geom: Arc::clone(geom),
            kind: WeightKind::Stereographic,
            g: r.iter().map(|&x| g_of(x)).collect(),
            dg: r.iter().map(|&x| -4.0 * x / (1.0 + x * x)).collect(),
            ddg: r.iter().map(|&x| -4.0 * (1.0 - x * x) / (1.0 + x * x).powi(2)).collect(),
            lap_g: r.iter().map(|&x| lap_of(x)).collect(),
            origin: RadialPoint { r: 0.0, g: g_of(0.0), lap_g: lap_of(0.0) },
            edge: RadialPoint { r: radius, g: g_of(radius), lap_g: lap_of(radius) },
            tail_mass: 1.0 / (1.0 + radius * radius),
            normalization_defect: 0.0,
            tail_ratio_inf: Some(1.0),
            ks: None,
        };
        w.normalization_defect = w.defect();
        w
    }

    pub fn gaussian(geom: &Arc<Geometry>, sigma: f64) -> Result<Self> {
        expect_plane(geom)?;
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
        }
        let s2 = sigma * sigma;
        let g_of = |r: f64| -(2.0 * PI * s2).ln() - r * r / (2.0 * s2);
        let r = geom.nodes();
        let radius = geom.plane_radius().unwrap_or(0.0);
        let mut w = Self {
            geom: Arc::clone(geom),
            kind: WeightKind::Gaussian { sigma },
            g: r.iter().map(|&x| g_of(x)).collect(),
            dg: r.iter().map(|&x| -x / s2).collect(),
            ddg: vec![-1.0 / s2; r.len()],
            lap_g: vec![-2.0 / s2; r.len()],
            origin: RadialPoint { r: 0.0, g: g_of(0.0), lap_g: -2.0 / s2 },
            edge: RadialPoint { r: radius, g: g_of(radius), lap_g: -2.0 / s2 },
            tail_mass: (-radius * radius / (2.0 * s2)).exp(),
            normalization_defect: 0.0,
            // the ratio grows like e^{r^2/2σ^2} beyond R
            tail_ratio_inf: None,
            ks: None,
        };
        w.normalization_defect = w.defect();
        Ok(w)
    }

    /// `μ = e^{-h} / (Z (1+r^2)^2)` with `Z` from quadrature plus the tail estimate.
    pub fn perturbed(geom: &Arc<Geometry>, h: &dyn RadialFunction) -> Result<Self> {
        expect_plane(geom)?;
        let r = geom.nodes();
        let radius = geom.plane_radius().unwrap_or(0.0);
        let hv: Vec<[f64; 3]> = r.iter().map(|&x| h.eval(x)).collect();
        if hv.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("perturbation is not finite on the grid".into()));
        }
        let base: Vec<f64> = r
            .iter()
            .zip(&hv)
            .map(|(&x, hh)| (-hh[0]).exp() / (1.0 + x * x).powi(2))
            .collect();
        let h_edge = h.eval(radius)[0];
        let h_inf = h.limits().map_or(h_edge, |l| l.0);
        // ∫_{r>R} e^{-h} (1+r^2)^{-2} dx ≈ e^{-h} π / (1 + R^2)
        let tail = PI * (-0.5 * (h_edge + h_inf)).exp() / (1.0 + radius * radius);
        let z = geom.quad(&base) + tail;
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::NormalizationFailure(format!("normalization constant {z}")));
        }
        let lz = z.ln();
        let g_of = |x: f64, hh: [f64; 3]| -hh[0] - lz - 2.0 * (x * x).ln_1p();
        let lap_h = |x: f64, hh: [f64; 3]| {
            if x > 0.0 {
                hh[2] + hh[1] / x
            } else {
                2.0 * hh[2]
            }
        };
        let lap_of = |x: f64, hh: [f64; 3]| -lap_h(x, hh) - 8.0 / (1.0 + x * x).powi(2);
        let h0 = h.eval(0.0);
        let he = h.eval(radius);
        let tail_ratio_inf = h.limits().map(|(hi, li)| z * hi.exp() * (1.0 + li / 8.0) / PI);
        let amplitude = h0[0];
        let mut w = Self {
            geom: Arc::clone(geom),
            kind: WeightKind::Perturbed { amplitude },
            g: r.iter().zip(&hv).map(|(&x, &hh)| g_of(x, hh)).collect(),
            dg: r
                .iter()
                .zip(&hv)
                .map(|(&x, hh)| -hh[1] - 4.0 * x / (1.0 + x * x))
                .collect(),
            ddg: r
                .iter()
                .zip(&hv)
                .map(|(&x, hh)| -hh[2] - 4.0 * (1.0 - x * x) / (1.0 + x * x).powi(2))
                .collect(),
            lap_g: r.iter().zip(&hv).map(|(&x, &hh)| lap_of(x, hh)).collect(),
            origin: RadialPoint { r: 0.0, g: g_of(0.0, h0), lap_g: lap_of(0.0, h0) },
            edge: RadialPoint { r: radius, g: g_of(radius, he), lap_g: lap_of(radius, he) },
            tail_mass: tail / z,
            normalization_defect: 0.0,
            tail_ratio_inf,
            ks: None,
        };
        w.normalization_defect = w.defect();
        Ok(w)
    }

    fn defect(&self) -> f64 {
        (self.geom.quad(&self.mu()) + self.tail_mass - 1.0).abs()
    }

    pub(crate) fn check_normalization(self) -> Result<Self> {
        if self.normalization_defect > NORMALIZATION_TOL || !self.normalization_defect.is_finite() {
            return Err(Error::NormalizationFailure(format!(
                "|∫μ - 1| = {:e} exceeds {NORMALIZATION_TOL:e}",
                self.normalization_defect
            )));
        }
        Ok(self)
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geom
    }

    pub fn mu(&self) -> Vec<f64> {
        self.g.iter().map(|g| g.exp()).collect()
    }

    /// Pointwise `(-Δ log μ) / (8π μ)`.
    pub fn ratio(&self) -> Vec<f64> {
        self.g
            .iter()
            .zip(&self.lap_g)
            .map(|(g, l)| -l * (-g).exp() / (8.0 * PI))
            .collect()
    }

    /// True if `μ` is nonincreasing along the nodes (up to roundoff).
    pub fn is_monotone(&self) -> bool {
        self.g.windows(2).all(|p| p[1] <= p[0] + 1e-12 * p[0].abs().max(1.0))
    }

    /// Couples a field's derivative bundle with this weight's `g`.
    pub fn bundle(&self, u: &ScalarField) -> Result<crate::geometry::DerivativeBundle> {
        differentiate(&self.geom, u)?.with_log_density(&self.g, &self.dg, &self.ddg, self.geom.nodes())
    }

    /// CSV with columns `r, mu, g, dg, lap_g`.
    pub fn write_profile_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.geom.descriptor())?;
        writeln!(w, "r,mu,g,dg,lap_g")?;
        for j in 0..self.g.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.geom.nodes()[j],
                self.g[j].exp(),
                self.g[j],
                self.dg[j],
                self.lap_g[j]
            )?;
        }
        Ok(())
    }
}

/// `Λ⋆ = inf (-Δ log μ) / (8π μ)` and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaStarWeight {
    pub value: f64,
    /// Radius of the infimum; `None` when it is the limit `r → ∞`.
    pub inf_location_r: Option<f64>,
    pub grid_min: f64,
    pub normalization_defect: f64,
}

pub fn lambda_star_weight(w: &Weight) -> LambdaStarWeight {
    let ratio_at = |p: &RadialPoint| -p.lap_g * (-p.g).exp() / (8.0 * PI);
    let mut best = (ratio_at(&w.origin), Some(0.0));
    let mut grid_min = f64::INFINITY;
    for (r, v) in w.geom.nodes().iter().zip(w.ratio()) {
        grid_min = grid_min.min(v);
        if v < best.0 {
            best = (v, Some(*r));
        }
    }
    let e = ratio_at(&w.edge);
    if e < best.0 {
        best = (e, Some(w.edge.r));
    }
    if let Some(t) = w.tail_ratio_inf {
        if t < best.0 {
            best = (t, None);
        }
    }
    LambdaStarWeight {
        value: best.0,
        inf_location_r: best.1,
        grid_min,
        normalization_defect: w.normalization_defect,
    }
}
