//! Radial stationary Keller-Segel profiles, plain and in self-similar variables.

use std::f64::consts::PI;
use std::sync::Arc;

use super::weight::{KsProfile, RadialPoint, Weight, WeightKind};
use crate::error::{Error, Result};
use crate::geometry::{differentiate, Geometry, GeometryKind, ScalarField};

#[derive(Debug, Clone, Copy)]
pub struct KsConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KsConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

pub fn check_mass(mass: f64) -> Result<()> {
    if mass > 0.0 && mass < 8.0 * PI {
        Ok(())
    } else {
        Err(Error::MassOutOfRange(mass))
    }
}

/// Solves `-Δc = ε x·∇c + n`, `n = M e^{c - r^2/2} / ∫ e^{c - r^2/2}` by damped
/// Picard iteration with `c(R) = 0`, and returns `μ = n / M` as a weight.
pub fn solve_keller_segel(mass: f64, epsilon: f64, geom: &Arc<Geometry>, cfg: &KsConfig) -> Result<Weight> {
    check_mass(mass)?;
    geom.expect_kind(GeometryKind::PlaneRadial)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if !(cfg.damping > 0.0 && cfg.damping <= 1.0) {
        return Err(Error::InvalidParameter(format!("damping must lie in (0, 1], got {}", cfg.damping)));
    }
    let r = geom.nodes().to_vec();
    let n_nodes = r.len();
    let radius = geom.plane_radius().unwrap_or(0.0);

    let density = |c: &[f64]| -> Result<(Vec<f64>, f64)> {
        let e: Vec<f64> = c.iter().zip(&r).map(|(c, r)| (c - 0.5 * r * r).exp()).collect();
        let z = geom.quad(&e);
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::NormalizationFailure(format!("∫e^(c - r²/2) = {z}")));
        }
        Ok((e.into_iter().map(|v| mass * v / z).collect(), z))
    };
    // c' from the integrated equation: r c' e^{εr²/2} = -∫_0^r n t e^{εt²/2} dt
    let slope = |n: &[f64]| -> Result<Vec<f64>> {
        let q: Vec<f64> = (0..n_nodes)
            .map(|j| n[j] * r[j] * (0.5 * epsilon * r[j] * r[j]).exp())
            .collect();
        let (m, _) = geom.radial_integral(&q)?;
        Ok((0..n_nodes)
            .map(|j| -m[j] * (-0.5 * epsilon * r[j] * r[j]).exp() / r[j])
            .collect())
    };

    let mut c = vec![0.0; n_nodes];
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let (n, _) = density(&c)?;
        let dc = slope(&n)?;
        let (cc, edge) = geom.radial_integral(&dc)?;
        let mut upd: f64 = 0.0;
        for j in 0..n_nodes {
            let step = cfg.damping * ((cc[j] - edge) - c[j]);
            c[j] += step;
            upd = upd.max(step.abs());
        }
        history.push(upd);
        iterations += 1;
        if !upd.is_finite() {
            return Err(Error::NotConverged { iterations, update: upd, history });
        }
        if upd <= cfg.tol {
            break;
        }
        if iterations >= cfg.max_iter {
            return Err(Error::NotConverged { iterations, update: upd, history });
        }
    }

    let (n, z) = density(&c)?;
    let dc = slope(&n)?;
    let nr: Vec<f64> = n.iter().zip(&r).map(|(n, r)| n * r).collect();
    let (_, m_edge) = geom.radial_integral(&nr)?;
    let recovered_mass = 2.0 * PI * m_edge;

    let lz = (z / mass).ln() + mass.ln();
    let g: Vec<f64> = c.iter().zip(&r).map(|(c, r)| c - 0.5 * r * r - lz).collect();
    // differentiate the bounded part c spectrally; -r^2/2 analytically
    let cf = ScalarField::from_values(geom, c.clone())?;
    let b = differentiate(geom, &cf)?;
    let c0 = cf.evaluate_at(0.0);
    let ce = cf.evaluate_at(radius);
    // beyond R, c stays near 0 and μ decays like e^{-r^2/2}
    let tail_mass = 2.0 * PI * (-0.5 * radius * radius).exp() / z;
    let kind = if epsilon == 0.0 {
        WeightKind::KellerSegel { mass }
    } else {
        WeightKind::KsSelfsim { mass, epsilon }
    };
    let mut w = Weight {
        geom: Arc::clone(geom),
        kind,
        g,
        dg: b.du.iter().zip(&r).map(|(d, r)| d - r).collect(),
        ddg: b.hess[0].iter().map(|h| h - 1.0).collect(),
        lap_g: b.lap.iter().map(|l| l - 2.0).collect(),
        origin: RadialPoint { r: 0.0, g: c0.u - lz, lap_g: c0.lap - 2.0 },
        edge: RadialPoint {
            r: radius,
            g: ce.u - 0.5 * radius * radius - lz,
            lap_g: ce.lap - 2.0,
        },
        tail_mass,
        normalization_defect: 0.0,
        tail_ratio_inf: None,
        ks: Some(KsProfile {
            mass,
            epsilon,
            c,
            dc,
            iterations,
            history,
            recovered_mass,
        }),
    };
    w.normalization_defect = (geom.quad(&w.mu()) + tail_mass - 1.0).abs();
    w.check_normalization()
}

/// Sup over the bulk of `|(-Δ log μ - ε x·∇c - 2) / (8π μ) - M / (8π)|`.
///
/// The expression divides by `μ`, so nodes where `μ < mask · max μ` are skipped:
/// there the absolute accuracy of `Δ log μ` is amplified by `1/μ`.
pub fn ks_decomposition_error(w: &Weight, mask: f64) -> Result<f64> {
    let ks = w
        .ks
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("weight is not a Keller-Segel profile".into()))?;
    let r = w.geometry().nodes();
    let mu = w.mu();
    let top = mu.iter().cloned().fold(0.0, f64::max);
    let target = ks.mass / (8.0 * PI);
    let mut worst: f64 = 0.0;
    for j in 0..mu.len() {
        if mu[j] < mask * top {
            continue;
        }
        let drift = ks.epsilon * r[j] * ks.dc[j] + 2.0;
        let v = (-w.lap_g[j] - drift) / (8.0 * PI * mu[j]);
        worst = worst.max((v - target).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> Arc<Geometry> {
        Arc::new(Geometry::plane(192, 12.0).unwrap())
    }

    #[test]
    fn mass_interval() {
        let g = geom();
        assert!(matches!(
            solve_keller_segel(9.0 * PI, 0.0, &g, &KsConfig::default()),
            Err(Error::MassOutOfRange(_))
        ));
        assert!(solve_keller_segel(0.0, 0.0, &g, &KsConfig::default()).is_err());
    }

    #[test]
    fn small_mass_is_gaussian() {
        let g = geom();
        let w = solve_keller_segel(0.01, 0.0, &g, &KsConfig::default()).unwrap();
        let gauss = Weight::gaussian(&g, 1.0).unwrap();
        let d = w
            .mu()
            .iter()
            .zip(gauss.mu())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 1e-2, "{d}");
    }

    #[test]
    fn decomposition_and_mass() {
        let g = geom();
        for (m, eps) in [(4.0, 0.0), (4.0, 0.5)] {
            let w = solve_keller_segel(m, eps, &g, &KsConfig::default()).unwrap();
            let ks = w.ks.as_ref().unwrap();
            assert!((ks.recovered_mass - m).abs() < 1e-6, "{}", ks.recovered_mass);
            let e = ks_decomposition_error(&w, 1e-6).unwrap();
            assert!(e < 1e-6, "M={m} eps={eps}: {e}");
            assert!(w.is_monotone());
        }
    }
}
