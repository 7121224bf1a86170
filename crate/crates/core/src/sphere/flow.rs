//! The mass-preserving nonlinear flow along which `F_λ` decreases.
//!
//! We integrate `∂f/∂t = (Δf + ½|∇f|²) e^{-f/2} = 2 e^{-f} Δ(e^{f/2})`.
//! Then `d/dt ∫e^f = 2∫Δ(e^{f/2}) = 0` and `dF_λ/dt = -G_λ`.

use std::sync::Arc;

use serde::Serialize;

use super::{functional_f_from, quotient_parts};
use crate::error::{Error, Result};
use crate::geometry::{differentiate, Geometry, GeometryKind, ScalarField};

const MIN_DT: f64 = 1e-12;
const BLOWUP: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Fraction of the explicit stability limit.
    pub safety: f64,
    /// Keep every k-th step in the trace (the last step is always kept).
    pub record_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            safety: 0.25,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowTrace {
    pub lambda: f64,
    pub times: Vec<f64>,
    #[serde(rename = "F_values")]
    pub f_values: Vec<f64>,
    #[serde(rename = "G_values")]
    pub g_values: Vec<f64>,
    pub mass_values: Vec<f64>,
    pub sup_f: Vec<f64>,
    #[serde(skip)]
    pub final_field: ScalarField,
    /// `∫₀^T G dt`, trapezoid rule over every step (not only recorded ones).
    pub dissipated: f64,
    /// Largest step-to-step increase of `F`, zero for a monotone run.
    pub max_increase: f64,
    pub steps: usize,
}

impl FlowTrace {
    pub fn monotone(&self, slack: f64) -> bool {
        self.max_increase <= slack
    }

    /// Largest relative deviation of the mass from its initial value.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass_values[0];
        self.mass_values.iter().fold(0.0, |a, m| a.max((m - m0).abs() / m0.abs()))
    }

    /// `|F(0) - ∫G dt - F(T)|`.
    pub fn energy_defect(&self) -> f64 {
        (self.f_values[0] - self.dissipated - self.f_values[self.f_values.len() - 1]).abs()
    }

    /// Worst `|ΔF/Δt + G_mid| / max|G|` over consecutive trace entries, with
    /// `G_mid` the average of the two endpoints.
    pub fn duality_error(&self) -> f64 {
        let gmax = self.g_values.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if gmax == 0.0 {
            return 0.0;
        }
        self.times
            .windows(2)
            .enumerate()
            .map(|(k, t)| {
                let slope = (self.f_values[k + 1] - self.f_values[k]) / (t[1] - t[0]);
                let mid = 0.5 * (self.g_values[k] + self.g_values[k + 1]);
                (slope + mid).abs() / gmax
            })
            .fold(0.0, f64::max)
    }

    /// CSV with columns `t, F, G, mass, sup_f`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,F,G,mass,sup_f")?;
        for k in 0..self.times.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.times[k], self.f_values[k], self.g_values[k], self.mass_values[k], self.sup_f[k]
            )?;
        }
        Ok(())
    }
}

fn rhs(geom: &Geometry, f: &[f64]) -> Vec<f64> {
    let (du, lap) = geom.grad_and_laplacian(f);
    (0..f.len())
        .map(|j| (lap[j] + 0.5 * du[j] * du[j]) * (-0.5 * f[j]).exp())
        .collect()
}

/// Explicit step limit: the spectral Laplacian reaches `N(N-1)/a²` and the
/// diffusion coefficient `e^{-f/2}` peaks where `f` is smallest.
fn step_limit(geom: &Geometry, f: &[f64], safety: f64) -> f64 {
    let n = geom.resolution() as f64;
    let a = geom.sphere_radius().unwrap_or(1.0);
    let fmin = f.iter().cloned().fold(f64::INFINITY, f64::min);
    safety * a * a / (n * (n - 1.0)) * (0.5 * fmin).exp()
}

struct Monitor {
    f: f64,
    g: f64,
    mass: f64,
    sup: f64,
}

fn monitor(geom: &Arc<Geometry>, lambda: f64, f: &[f64]) -> Result<Monitor> {
    let field = ScalarField::from_values(geom, f.to_vec())?;
    let b = differentiate(geom, &field)?;
    let (t, r, d) = quotient_parts(geom, &b);
    let e: Vec<f64> = f.iter().map(|v| v.exp()).collect();
    Ok(Monitor {
        f: functional_f_from(geom, lambda, f, &b.grad_sq),
        g: t + r - lambda * d,
        mass: geom.quad(&e),
        sup: f.iter().fold(0.0f64, |a, v| a.max(v.abs())),
    })
}

/// Runs the flow from `u0` up to `t_final` with classical RK4.
pub fn flow_evolve(lambda: f64, u0: &ScalarField, t_final: f64, cfg: &FlowConfig) -> Result<FlowTrace> {
    let geom = u0.geometry();
    geom.expect_kind(GeometryKind::SphereZonal)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_final must be positive, got {t_final}")));
    }
    if !(cfg.safety > 0.0 && cfg.safety <= 1.0) {
        return Err(Error::InvalidParameter(format!("safety must lie in (0, 1], got {}", cfg.safety)));
    }
    let every = cfg.record_every.max(1);
    let mut f = u0.values().to_vec();
    let mut t = 0.0;
    let m0 = monitor(geom, lambda, &f)?;
    let mut trace = FlowTrace {
        lambda,
        times: vec![0.0],
        f_values: vec![m0.f],
        g_values: vec![m0.g],
        mass_values: vec![m0.mass],
        sup_f: vec![m0.sup],
        final_field: u0.clone(),
        dissipated: 0.0,
        max_increase: 0.0,
        steps: 0,
    };
    if m0.sup > BLOWUP {
        return Err(Error::BlowupDetected { t, sup: m0.sup });
    }
    let mut prev = m0;
    let n = f.len();
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> { (0..n).map(|j| x[j] + h * k[j]).collect() };
    while t < t_final {
        let mut dt = step_limit(geom, &f, cfg.safety);
        if dt < MIN_DT {
            return Err(Error::StepFailure { t, dt });
        }
        let last = t + dt >= t_final;
        if last {
            dt = t_final - t;
        }
        let k1 = rhs(geom, &f);
        let k2 = rhs(geom, &axpy(&f, &k1, 0.5 * dt));
        let k3 = rhs(geom, &axpy(&f, &k2, 0.5 * dt));
        let k4 = rhs(geom, &axpy(&f, &k3, dt));
        for j in 0..n {
            f[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t = if last { t_final } else { t + dt };
        trace.steps += 1;
        if !f.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowupDetected { t, sup: f64::INFINITY });
        }
        let m = monitor(geom, lambda, &f)?;
        if m.sup > BLOWUP {
            return Err(Error::BlowupDetected { t, sup: m.sup });
        }
        trace.dissipated += 0.5 * dt * (prev.g + m.g);
        trace.max_increase = trace.max_increase.max(m.f - prev.f);
        if last || trace.steps.is_multiple_of(every) {
            trace.times.push(t);
            trace.f_values.push(m.f);
            trace.g_values.push(m.g);
            trace.mass_values.push(m.mass);
            trace.sup_f.push(m.sup);
        }
        prev = m;
    }
    trace.final_field = ScalarField::from_values(geom, f)?;
    Ok(trace)
}

/// The two halves of `d/dt ∫e^f` at a field: `∫ e^{f/2} Δf` and
/// `½∫ |∇f|² e^{f/2}`. They cancel by one integration by parts.
pub fn mass_rate_terms(f: &ScalarField) -> Result<(f64, f64)> {
    let geom = f.geometry();
    let b = differentiate(geom, f)?;
    let h: Vec<f64> = b.u.iter().map(|v| (0.5 * v).exp()).collect();
    let a: Vec<f64> = (0..h.len()).map(|j| h[j] * b.lap[j]).collect();
    let c: Vec<f64> = (0..h.len()).map(|j| 0.5 * h[j] * b.grad_sq[j]).collect();
    Ok((geom.quad(&a), geom.quad(&c)))
}
