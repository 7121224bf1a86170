use std::io::{BufRead, Write};
use std::sync::Arc;

use super::spectral::{self, PointValues};
use super::{Geometry, GeometryKind};
use crate::error::{Error, Result};

/// Nodal samples of a smooth function together with its spectral coefficients.
#[derive(Debug, Clone)]
pub struct ScalarField {
    geom: Arc<Geometry>,
    values: Vec<f64>,
    coeffs: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(geom: &Arc<Geometry>, values: Vec<f64>) -> Result<Self> {
        if values.len() != geom.resolution() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, geometry has {} nodes",
                values.len(),
                geom.resolution()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite field value at node {i}"
            )));
        }
        let coeffs = spectral::analyze(geom, &values);
        Ok(Self {
            geom: Arc::clone(geom),
            values,
            coeffs,
        })
    }

    /// Samples `f(coordinate)` at the nodes.
    pub fn from_fn(geom: &Arc<Geometry>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = geom.nodes().iter().map(|&x| f(x)).collect();
        Self::from_values(geom, values)
    }

    pub fn constant(geom: &Arc<Geometry>, c: f64) -> Result<Self> {
        Self::from_values(geom, vec![c; geom.resolution()])
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geom
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Nodal values re-synthesized from the coefficients.
    pub fn round_trip(&self) -> Vec<f64> {
        spectral::synthesize(&self.geom, &self.coeffs).u
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Average with respect to the geometry's measure.
    pub fn mean(&self) -> f64 {
        self.geom.quad(&self.values) / self.geom.weights().iter().sum::<f64>()
    }

    /// Pointwise map of the values.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(&self.geom, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        ensure_same(&self.geom, &other.geom)?;
        Self::from_values(
            &self.geom,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        )
    }

    pub fn shifted(&self, c: f64) -> Result<Self> {
        self.map(|v| v + c)
    }

    /// Interpolant and frame derivatives at an arbitrary coordinate.
    pub fn evaluate_at(&self, coordinate: f64) -> PointValues {
        spectral::evaluate_at(&self.geom, &self.coeffs, coordinate)
    }

    /// Share of spectral energy in the top quarter of the modes.
    pub fn tail_energy(&self) -> f64 {
        spectral::tail_energy_fraction(&self.geom, &self.coeffs)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.geom.descriptor())?;
        writeln!(w, "node_coordinate,value")?;
        for (x, v) in self.geom.nodes().iter().zip(&self.values) {
            writeln!(w, "{x},{v}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty field file".into()))??;
        let geom = Arc::new(Geometry::from_descriptor(&header)?);
        let mut values = Vec::with_capacity(geom.resolution());
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("node_coordinate") {
                continue;
            }
            let (_, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad field row `{line}`")))?;
            values.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value `{v}`")))?,
            );
        }
        Self::from_values(&geom, values)
    }
}

fn ensure_same(a: &Geometry, b: &Geometry) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GeometryMismatch {
            expected: a.descriptor(),
            found: b.descriptor(),
        })
    }
}

/// Per-node derivative data of a field.
///
/// Tensors are stored through their norms and inner products in the
/// orthonormal frame `(e_theta, e_phi)` on the sphere and `(e_r, e_phi)` on the
/// plane, where zonal/radial Hessians are diagonal.
#[derive(Debug, Clone)]
pub struct DerivativeBundle {
    pub kind: GeometryKind,
    pub dim: usize,
    pub ricci: f64,
    pub u: Vec<f64>,
    /// Gradient component along the frame's first direction.
    pub du: Vec<f64>,
    pub grad_sq: Vec<f64>,
    pub lap: Vec<f64>,
    /// Orthonormal-frame Hessian diagonal.
    pub hess: [Vec<f64>; 2],
    pub hess_normsq: Vec<f64>,
    pub l_normsq: Vec<f64>,
    pub m_normsq: Vec<f64>,
    pub lm_inner: Vec<f64>,
    /// `||L u - M u / 2||^2`.
    pub lm_half_normsq: Vec<f64>,
    /// `Δ |∇u|^2`, from a second transform of `|∇u|^2`.
    pub lap_grad_sq: Vec<f64>,
    /// `∇(Δu) · ∇u`, from a second transform of `Δu`.
    pub grad_lap_dot_grad: Vec<f64>,
    /// Set when the field's spectral tail carries more than `1e-8` of its energy.
    pub under_resolved: bool,
    pub weighted: Option<WeightTerms>,
}

/// Plane entries coupling `u` with a radial log-density `g`.
#[derive(Debug, Clone)]
pub struct WeightTerms {
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub lap_g: Vec<f64>,
    pub grad_g_sq: Vec<f64>,
    /// `∇u · ∇g`.
    pub du_dg: Vec<f64>,
    pub du_dg_sq: Vec<f64>,
    /// `H g : ∇u ⊗ ∇u`.
    pub hess_g_uu: Vec<f64>,
    /// `H u : ∇u ⊗ ∇g`.
    pub hess_u_ug: Vec<f64>,
    /// `(L u - M u / 2) : ∇u ⊗ ∇g`.
    pub lm_ug: Vec<f64>,
    pub n_normsq: Vec<f64>,
    /// `||L u - M u / 2 - N u||^2`.
    pub lmn_normsq: Vec<f64>,
    /// `(∇g · ω)^2` with `ω = ∇u / |∇u|`, zero where `∇u = 0`.
    pub omega_g_sq: Vec<f64>,
}

const TAIL_WARN: f64 = 1e-8;

pub fn differentiate(geom: &Geometry, field: &ScalarField) -> Result<DerivativeBundle> {
    ensure_same(geom, field.geometry())?;
    let d = spectral::synthesize(geom, field.coeffs());
    let n = d.u.len();
    let dim = geom.dim();
    let df = dim as f64;

    let grad_sq: Vec<f64> = d.du.iter().map(|p| p * p).collect();
    let mut hess_normsq = vec![0.0; n];
    let mut l_normsq = vec![0.0; n];
    let mut m_normsq = vec![0.0; n];
    let mut lm_inner = vec![0.0; n];
    let mut lm_half_normsq = vec![0.0; n];
    for j in 0..n {
        let (h1, h2, p2) = (d.h1[j], d.h2[j], grad_sq[j]);
        hess_normsq[j] = h1 * h1 + h2 * h2;
        if dim == 2 {
            // L = diag(q, -q), M = diag(p^2/2, -p^2/2)
            let q = 0.5 * (h1 - h2);
            l_normsq[j] = 2.0 * q * q;
            m_normsq[j] = 0.5 * p2 * p2;
            lm_inner[j] = q * p2;
            let t = q - 0.25 * p2;
            lm_half_normsq[j] = 2.0 * t * t;
        } else {
            // one-dimensional: trace-free tensors vanish
            let _ = df;
        }
    }

    let lap_c = spectral::analyze(geom, &d.lap);
    let dlap = spectral::synthesize(geom, &lap_c).du;
    let grad_lap_dot_grad: Vec<f64> = dlap.iter().zip(&d.du).map(|(a, b)| a * b).collect();
    let lap_grad_sq = if geom.kind() == GeometryKind::PlaneRadial {
        // Flat Bochner form. Transforming |∇u|^2 again leaves edge roundoff
        // that weights growing like r^4 blow up; here it is damped by ∇u.
        (0..n).map(|j| 2.0 * (hess_normsq[j] + grad_lap_dot_grad[j])).collect()
    } else {
        let gsq_c = spectral::analyze(geom, &grad_sq);
        spectral::synthesize(geom, &gsq_c).lap
    };

    Ok(DerivativeBundle {
        kind: geom.kind(),
        dim,
        ricci: geom.ricci(),
        under_resolved: field.tail_energy() > TAIL_WARN,
        u: d.u,
        du: d.du,
        grad_sq,
        lap: d.lap,
        hess: [d.h1, d.h2],
        hess_normsq,
        l_normsq,
        m_normsq,
        lm_inner,
        lm_half_normsq,
        lap_grad_sq,
        grad_lap_dot_grad,
        weighted: None,
    })
}

impl DerivativeBundle {
    /// Attach the entries coupled to a radial log-density `g` with nodal
    /// `g'`, `g''` (plane only).
    pub fn with_log_density(mut self, g: &[f64], dg: &[f64], ddg: &[f64], r: &[f64]) -> Result<Self> {
        if self.kind != GeometryKind::PlaneRadial {
            return Err(Error::GeometryMismatch {
                expected: GeometryKind::PlaneRadial.to_string(),
                found: self.kind.to_string(),
            });
        }
        let n = self.u.len();
        let mut t = WeightTerms {
            g: g.to_vec(),
            dg: dg.to_vec(),
            lap_g: vec![0.0; n],
            grad_g_sq: vec![0.0; n],
            du_dg: vec![0.0; n],
            du_dg_sq: vec![0.0; n],
            hess_g_uu: vec![0.0; n],
            hess_u_ug: vec![0.0; n],
            lm_ug: vec![0.0; n],
            n_normsq: vec![0.0; n],
            lmn_normsq: vec![0.0; n],
            omega_g_sq: vec![0.0; n],
        };
        for j in 0..n {
            let (p, gp) = (self.du[j], dg[j]);
            let h1 = self.hess[0][j];
            let q = 0.5 * (h1 - self.hess[1][j]);
            t.lap_g[j] = ddg[j] + gp / r[j];
            t.grad_g_sq[j] = gp * gp;
            t.du_dg[j] = p * gp;
            t.du_dg_sq[j] = p * p * gp * gp;
            t.hess_g_uu[j] = ddg[j] * p * p;
            t.hess_u_ug[j] = h1 * p * gp;
            t.lm_ug[j] = (q - 0.25 * p * p) * p * gp;
            // N = ∇u⊗∇g - (∇u·∇g) I/2 = diag(pg'/2, -pg'/2) for radial fields
            t.n_normsq[j] = p * p * gp * gp - 0.5 * t.du_dg_sq[j];
            let s = q - 0.25 * p * p - 0.5 * p * gp;
            t.lmn_normsq[j] = 2.0 * s * s;
            t.omega_g_sq[j] = if p != 0.0 { gp * gp } else { 0.0 };
        }
        self.weighted = Some(t);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Quadrature of a field over its geometry.
pub fn integrate(geom: &Geometry, field: &ScalarField) -> Result<f64> {
    ensure_same(geom, field.geometry())?;
    Ok(geom.quad(field.values()))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::Normalization;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn circle_eigenfunction() {
        let g = Arc::new(Geometry::circle(64, 1.0).unwrap());
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x).cos()).unwrap();
        let b = differentiate(&g, &f).unwrap();
        for (j, &x) in g.nodes().iter().enumerate() {
            let exact = -4.0 * PI * PI * (2.0 * PI * x).cos();
            assert!((b.lap[j] - exact).abs() < 1e-11);
            assert!((b.du[j] + 2.0 * PI * (2.0 * PI * x).sin()).abs() < 1e-12);
        }
        assert!(integrate(&g, &f).unwrap().abs() < 1e-14);
    }

    #[test]
    fn sphere_first_harmonic() {
        let g = Arc::new(Geometry::sphere(32, Normalization::UnitRadius).unwrap());
        let f = ScalarField::from_fn(&g, f64::cos).unwrap();
        let b = differentiate(&g, &f).unwrap();
        for (j, &t) in g.nodes().iter().enumerate() {
            assert!((b.lap[j] + 2.0 * t.cos()).abs() < 1e-13);
            assert!(b.l_normsq[j].abs() < 1e-26);
            // ||H||^2 = ||L||^2 + (Δu)^2 / 2
            assert!(rel(b.hess_normsq[j], b.l_normsq[j] + 0.5 * b.lap[j].powi(2)) < 1e-12);
        }
    }

    #[test]
    fn constant_field_has_vanishing_derivatives() {
        for g in [
            Geometry::circle(32, 1.0).unwrap(),
            Geometry::sphere(32, Normalization::UnitRadius).unwrap(),
            Geometry::plane(64, 20.0).unwrap(),
        ] {
            let g = Arc::new(g);
            let f = ScalarField::constant(&g, 5.0).unwrap();
            let b = differentiate(&g, &f).unwrap();
            assert!(b.du.iter().all(|&v| v == 0.0), "{}", g.kind());
            assert!(b.lap.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn plane_gaussian_laplacian() {
        let g = Arc::new(Geometry::plane(256, 12.0).unwrap());
        let f = ScalarField::from_fn(&g, |r| (-r * r / 2.0).exp()).unwrap();
        let b = differentiate(&g, &f).unwrap();
        for (j, &r) in g.nodes().iter().enumerate() {
            let exact = (r * r - 2.0) * (-r * r / 2.0).exp();
            assert!((b.lap[j] - exact).abs() < 1e-9, "r={r}: {} vs {exact}", b.lap[j]);
        }
        let at0 = f.evaluate_at(0.0);
        assert!((at0.u - 1.0).abs() < 1e-13);
        assert!((at0.lap + 2.0).abs() < 1e-10);
    }

    #[test]
    fn plane_integral_of_stereographic_density() {
        let g = Arc::new(Geometry::plane(2048, 20.0).unwrap());
        let f = ScalarField::from_fn(&g, |r| 1.0 / (PI * (1.0 + r * r).powi(2))).unwrap();
        let v = integrate(&g, &f).unwrap();
        assert!((v - (1.0 - 1.0 / 401.0)).abs() < 1e-8, "{v}");
    }

    #[test]
    fn csv_round_trip() {
        let g = Arc::new(Geometry::sphere(16, Normalization::UnitVolume).unwrap());
        let f = ScalarField::from_fn(&g, |t| t.cos().powi(3)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = ScalarField::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(**back.geometry(), *g);
    }

    #[test]
    fn geometry_mismatch_is_reported() {
        let a = Arc::new(Geometry::circle(32, 1.0).unwrap());
        let b = Geometry::circle(64, 1.0).unwrap();
        let f = ScalarField::constant(&a, 1.0).unwrap();
        assert!(matches!(
            differentiate(&b, &f),
            Err(Error::GeometryMismatch { .. })
        ));
        assert!(matches!(integrate(&b, &f), Err(Error::GeometryMismatch { .. })));
    }
}
