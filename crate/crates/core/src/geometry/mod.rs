//! Discretized model geometries: the circle, zonal fields on the round
//! sphere, and radial fields on the plane.

mod field;
pub mod legendre;
mod spectral;
mod spectrum;

pub use field::{differentiate, integrate, DerivativeBundle, ScalarField, WeightTerms};
pub use spectral::PointValues;
pub use spectrum::{first_eigenvalue, laplacian_matrix};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use legendre::LegendreIter;

pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    Circle,
    SphereZonal,
    PlaneRadial,
}

impl GeometryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeometryKind::Circle => "circle",
            GeometryKind::SphereZonal => "sphere-zonal",
            GeometryKind::PlaneRadial => "plane-radial",
        }
    }
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeometryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(GeometryKind::Circle),
            "sphere" | "sphere-zonal" => Ok(GeometryKind::SphereZonal),
            "plane" | "plane-radial" => Ok(GeometryKind::PlaneRadial),
            other => Err(Error::InvalidParameter(format!("unknown geometry kind `{other}`"))),
        }
    }
}

/// Sphere size convention. Reported constants always carry this tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    UnitRadius,
    UnitVolume,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::UnitRadius => "unit-radius",
            Normalization::UnitVolume => "unit-volume",
        }
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit-radius" => Ok(Normalization::UnitRadius),
            "unit-volume" => Ok(Normalization::UnitVolume),
            other => Err(Error::InvalidParameter(format!("unknown normalization `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryParams {
    Circle { period: f64 },
    /// A sphere of radius `radius`; `normalization` is `UnitVolume` only when
    /// `4 pi radius^2 = 1`.
    Sphere { radius: f64, normalization: Normalization },
    /// Disk of radius `radius` sampled through `r = R sinh(b s) / sinh(b)`
    /// (`b = stretch`, linear map for `b = 0`).
    Plane { radius: f64, stretch: f64 },
}

impl GeometryParams {
    pub fn circle(period: f64) -> Self {
        GeometryParams::Circle { period }
    }

    pub fn sphere(normalization: Normalization) -> Self {
        let radius = match normalization {
            Normalization::UnitRadius => 1.0,
            Normalization::UnitVolume => 1.0 / (4.0 * PI).sqrt(),
        };
        GeometryParams::Sphere {
            radius,
            normalization,
        }
    }

    pub fn sphere_radius(radius: f64) -> Self {
        GeometryParams::Sphere {
            radius,
            normalization: Normalization::UnitRadius,
        }
    }

    pub fn plane(radius: f64) -> Self {
        GeometryParams::Plane {
            radius,
            stretch: DEFAULT_PLANE_STRETCH,
        }
    }

    pub fn kind(&self) -> GeometryKind {
        match self {
            GeometryParams::Circle { .. } => GeometryKind::Circle,
            GeometryParams::Sphere { .. } => GeometryKind::SphereZonal,
            GeometryParams::Plane { .. } => GeometryKind::PlaneRadial,
        }
    }
}

pub const DEFAULT_PLANE_STRETCH: f64 = 3.0;

/// Nodal data used by the spectral transforms.
#[derive(Debug, Clone)]
pub(crate) enum Basis {
    /// Equispaced nodes, Fourier modes.
    Fourier,
    /// Gauss nodes `x_j = cos(theta_j)`, Legendre modes `P_l(x)`, `l < N`.
    Legendre { x: Vec<f64>, gw: Vec<f64> },
    /// Positive half of a `2N`-point Gauss grid in the mapped variable `s`;
    /// even Legendre modes `P_{2k}(s)`, `k < N`.
    EvenLegendre {
        s: Vec<f64>,
        gw: Vec<f64>,
        dr: Vec<f64>,
        ddr: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct Geometry {
    params: GeometryParams,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub(crate) basis: Basis,
    /// Relative threshold below which trailing spectral coefficients are treated as noise.
    pub(crate) chop_tol: f64,
}

pub const DEFAULT_CHOP_TOL: f64 = 1e-14;

impl PartialEq for Geometry {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.nodes.len() == other.nodes.len()
    }
}

/// Interpolatory weights for the disk: the exact area integral of each even
/// cardinal function. The naive `2π r r' w` weights see `|s|` as the density and
/// stall near 1e-8.
fn plane_weights(map: &RadialMap, s: &[f64], gw: &[f64]) -> Vec<f64> {
    let n = s.len();
    // moments m_k = 2π ∫_0^1 P_2k(s) r r' ds; r r' is odd so t = s^2 makes the
    // integrand smooth
    let (t, wt) = legendre::gauss_legendre(2 * n + 64);
    let mut m = vec![0.0; n];
    for (ti, wi) in t.iter().zip(&wt) {
        let tt = 0.5 * (ti + 1.0);
        let si = tt.sqrt();
        let rr_over_s = if si > 0.0 {
            map.r(si) * map.dr(si) / si
        } else {
            map.dr(0.0).powi(2)
        };
        // ds = dt / (2 s), dt = dx / 2
        let f = 2.0 * PI * rr_over_s * 0.25 * wi;
        let mut it = LegendreIter::new(si);
        for mk in m.iter_mut() {
            *mk += f * it.next_values().0;
            it.next_values();
        }
    }
    (0..n)
        .map(|j| {
            let mut it = LegendreIter::new(s[j]);
            let mut acc = 0.0;
            for (k, mk) in m.iter().enumerate() {
                acc += (4 * k + 1) as f64 * it.next_values().0 * mk;
                it.next_values();
            }
            acc * gw[j]
        })
        .collect()
}

impl Geometry {
    pub fn build(resolution: usize, params: GeometryParams) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall {
                got: resolution,
                min: MIN_RESOLUTION,
            });
        }
        match params {
            GeometryParams::Circle { period } => {
                check_positive("period", period)?;
                let h = period / resolution as f64;
                Ok(Self {
                    params,
                    nodes: (0..resolution).map(|j| j as f64 * h).collect(),
                    weights: vec![h; resolution],
                    basis: Basis::Fourier,
                    chop_tol: DEFAULT_CHOP_TOL,
                })
            }
            GeometryParams::Sphere { radius, .. } => {
                check_positive("radius", radius)?;
                let (x, gw) = legendre::gauss_legendre(resolution);
                // colatitude ascending from the north pole
                let nodes = x.iter().map(|&xi| xi.acos()).collect();
                let weights = gw.iter().map(|w| 2.0 * PI * radius * radius * w).collect();
                Ok(Self {
                    params,
                    nodes,
                    weights,
                    basis: Basis::Legendre { x, gw },
                    chop_tol: DEFAULT_CHOP_TOL,
                })
            }
            GeometryParams::Plane { radius, stretch } => {
                check_positive("radius", radius)?;
                if !(stretch >= 0.0) || !stretch.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "plane stretch must be finite and >= 0, got {stretch}"
                    )));
                }
                let (x, w) = legendre::gauss_legendre(2 * resolution);
                let s: Vec<f64> = x[resolution..].to_vec();
                let gw: Vec<f64> = w[resolution..].to_vec();
                let map = RadialMap { radius, stretch };
                let nodes: Vec<f64> = s.iter().map(|&si| map.r(si)).collect();
                let dr: Vec<f64> = s.iter().map(|&si| map.dr(si)).collect();
                let ddr: Vec<f64> = s.iter().map(|&si| map.ddr(si)).collect();
                let weights = plane_weights(&map, &s, &gw);
                Ok(Self {
                    params,
                    nodes,
                    weights,
                    basis: Basis::EvenLegendre { s, gw, dr, ddr },
                    chop_tol: DEFAULT_CHOP_TOL,
                })
            }
        }
    }

    pub fn circle(resolution: usize, period: f64) -> Result<Self> {
        Self::build(resolution, GeometryParams::circle(period))
    }

    pub fn sphere(resolution: usize, normalization: Normalization) -> Result<Self> {
        Self::build(resolution, GeometryParams::sphere(normalization))
    }

    pub fn sphere_with_radius(resolution: usize, radius: f64) -> Result<Self> {
        Self::build(resolution, GeometryParams::sphere_radius(radius))
    }

    pub fn plane(resolution: usize, radius: f64) -> Result<Self> {
        Self::build(resolution, GeometryParams::plane(radius))
    }

    pub fn plane_stretched(resolution: usize, radius: f64, stretch: f64) -> Result<Self> {
        Self::build(resolution, GeometryParams::Plane { radius, stretch })
    }

    /// Same geometry with another coefficient chop threshold (0 disables chopping).
    pub fn with_chop_tol(mut self, tol: f64) -> Self {
        self.chop_tol = tol.max(0.0);
        self
    }

    pub fn kind(&self) -> GeometryKind {
        self.params.kind()
    }

    pub fn params(&self) -> GeometryParams {
        self.params
    }

    pub fn resolution(&self) -> usize {
        self.nodes.len()
    }

    /// Node coordinates: `x` on the circle, colatitude on the sphere, radius on the plane.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self.kind() {
            GeometryKind::Circle => 1,
            _ => 2,
        }
    }

    /// Constant Ricci curvature.
    pub fn ricci(&self) -> f64 {
        match self.params {
            GeometryParams::Sphere { radius, .. } => 1.0 / (radius * radius),
            _ => 0.0,
        }
    }

    /// Total measure of the (truncated) domain.
    pub fn volume(&self) -> f64 {
        match self.params {
            GeometryParams::Circle { period } => period,
            GeometryParams::Sphere { radius, .. } => 4.0 * PI * radius * radius,
            GeometryParams::Plane { radius, .. } => PI * radius * radius,
        }
    }

    pub fn sphere_radius(&self) -> Option<f64> {
        match self.params {
            GeometryParams::Sphere { radius, .. } => Some(radius),
            _ => None,
        }
    }

    pub fn normalization(&self) -> Option<Normalization> {
        match self.params {
            GeometryParams::Sphere { normalization, .. } => Some(normalization),
            _ => None,
        }
    }

    pub fn plane_radius(&self) -> Option<f64> {
        match self.params {
            GeometryParams::Plane { radius, .. } => Some(radius),
            _ => None,
        }
    }

    /// `∫_0^r q(t) dt` at every node and at the outer radius, for nodal samples
    /// of a function odd in `r` (such as `f(r) r` for a smooth radial `f`).
    pub fn radial_integral(&self, q: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.expect_kind(GeometryKind::PlaneRadial)?;
        if q.len() != self.resolution() {
            return Err(Error::InvalidParameter("integrand length differs from node count".into()));
        }
        Ok(spectral::radial_antiderivative(self, q))
    }

    pub fn expect_kind(&self, kind: GeometryKind) -> Result<()> {
        if self.kind() == kind {
            Ok(())
        } else {
            Err(Error::GeometryMismatch {
                expected: kind.to_string(),
                found: self.kind().to_string(),
            })
        }
    }

    /// `Δu` at the nodes, by transform (far less roundoff than the dense matrix).
    pub fn laplacian(&self, values: &[f64]) -> Vec<f64> {
        let c = spectral::analyze(self, values);
        spectral::synthesize(self, &c).lap
    }

    /// Gradient component and Laplacian at the nodes, by transform.
    pub fn grad_and_laplacian(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c = spectral::analyze(self, values);
        let d = spectral::synthesize(self, &c);
        (d.du, d.lap)
    }

    /// Quadrature of nodal values.
    pub fn quad(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Header line used by the CSV field format.
    pub fn descriptor(&self) -> String {
        let n = self.resolution();
        match self.params {
            GeometryParams::Circle { period } => format!("#geom kind=circle N={n} param={period}"),
            GeometryParams::Sphere {
                radius,
                normalization,
            } => format!(
                "#geom kind=sphere-zonal N={n} param={radius} normalization={}",
                normalization.as_str()
            ),
            GeometryParams::Plane { radius, stretch } => {
                format!("#geom kind=plane-radial N={n} param={radius} stretch={stretch}")
            }
        }
    }

    /// Inverse of [`Geometry::descriptor`].
    pub fn from_descriptor(line: &str) -> Result<Self> {
        let rest = line
            .trim()
            .strip_prefix("#geom")
            .ok_or_else(|| Error::Parse(format!("not a geometry header: `{line}`")))?;
        let mut kind = None;
        let mut n = None;
        let mut param = None;
        let mut normalization = Normalization::UnitRadius;
        let mut stretch = DEFAULT_PLANE_STRETCH;
        for tok in rest.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token `{tok}`")))?;
            match k {
                "kind" => kind = Some(v.parse::<GeometryKind>()?),
                "N" => n = Some(parse_num::<usize>(v)?),
                "param" => param = Some(parse_num::<f64>(v)?),
                "normalization" => normalization = v.parse()?,
                "stretch" => stretch = parse_num(v)?,
                _ => return Err(Error::Parse(format!("unknown header key `{k}`"))),
            }
        }
        let kind = kind.ok_or_else(|| Error::Parse("header without kind".into()))?;
        let n = n.ok_or_else(|| Error::Parse("header without N".into()))?;
        let param = param.ok_or_else(|| Error::Parse("header without param".into()))?;
        let params = match kind {
            GeometryKind::Circle => GeometryParams::Circle { period: param },
            GeometryKind::SphereZonal => GeometryParams::Sphere {
                radius: param,
                normalization,
            },
            GeometryKind::PlaneRadial => GeometryParams::Plane {
                radius: param,
                stretch,
            },
        };
        Self::build(n, params)
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("cannot parse number `{v}`")))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// `r(s) = R sinh(b s) / sinh(b)`, odd in `s`, mapping `[0, 1]` onto `[0, R]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialMap {
    pub radius: f64,
    pub stretch: f64,
}

impl RadialMap {
    pub fn r(&self, s: f64) -> f64 {
        let b = self.stretch;
        if b == 0.0 {
            self.radius * s
        } else {
            self.radius * (b * s).sinh() / b.sinh()
        }
    }

    pub fn dr(&self, s: f64) -> f64 {
        let b = self.stretch;
        if b == 0.0 {
            self.radius
        } else {
            self.radius * b * (b * s).cosh() / b.sinh()
        }
    }

    pub fn ddr(&self, s: f64) -> f64 {
        let b = self.stretch;
        if b == 0.0 {
            0.0
        } else {
            self.radius * b * b * (b * s).sinh() / b.sinh()
        }
    }

    /// Inverse map `s(r)`.
    pub fn s(&self, r: f64) -> f64 {
        let b = self.stretch;
        if b == 0.0 {
            r / self.radius
        } else {
            (r / self.radius * b.sinh()).asinh() / b
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_weights_sum_to_period() {
        let g = Geometry::circle(256, 1.0).unwrap();
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let g = Geometry::circle(64, 2.5).unwrap();
        assert!((g.weights().iter().sum::<f64>() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn unit_volume_sphere() {
        let g = Geometry::sphere(128, Normalization::UnitVolume).unwrap();
        let a = g.sphere_radius().unwrap();
        assert!((a - 0.5 / PI.sqrt()).abs() < 1e-15);
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!((g.ricci() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn plane_weights_sum_to_disk_area() {
        for stretch in [0.0, DEFAULT_PLANE_STRETCH] {
            let g = Geometry::plane_stretched(2048, 20.0, stretch).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s / (400.0 * PI) - 1.0).abs() < 1e-10, "stretch={stretch}: {s}");
            assert!(g.weights().iter().all(|&w| w > 0.0));
            assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            Geometry::circle(4, 1.0),
            Err(Error::ResolutionTooSmall { got: 4, min: 8 })
        ));
        assert!(matches!(
            Geometry::circle(16, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            Geometry::sphere_with_radius(16, -1.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            Geometry::plane(16, f64::NAN),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn descriptor_round_trip() {
        for g in [
            Geometry::circle(32, 1.5).unwrap(),
            Geometry::sphere(16, Normalization::UnitVolume).unwrap(),
            Geometry::plane_stretched(24, 12.0, 1.5).unwrap(),
        ] {
            let back = Geometry::from_descriptor(&g.descriptor()).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn radial_map_inverse() {
        let m = RadialMap {
            radius: 20.0,
            stretch: 3.0,
        };
        for s in [0.0, 0.1, 0.5, 0.99] {
            assert!((m.s(m.r(s)) - s).abs() < 1e-14);
        }
    }
}
