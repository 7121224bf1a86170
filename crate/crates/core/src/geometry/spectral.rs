//! Forward/inverse transforms and spectral differentiation for each basis.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::legendre::LegendreIter;
use super::{Basis, Geometry, GeometryParams};

/// Frame quantities of a field: value, gradient component along the unit
/// radial/meridional direction, and the two diagonal Hessian entries in the
/// orthonormal frame (the circle has a single one, `h2 = 0`).
#[derive(Debug, Clone, Default)]
pub(crate) struct FrameDerivs {
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub lap: Vec<f64>,
}

/// Frame quantities at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValues {
    pub u: f64,
    pub du: f64,
    pub h1: f64,
    pub h2: f64,
    pub lap: f64,
}

/// Spectral coefficients of nodal values (chopped according to the geometry).
pub(crate) fn analyze(geom: &Geometry, values: &[f64]) -> Vec<f64> {
    let mut c = analyze_raw(geom, values);
    chop(geom, &mut c);
    c
}

pub(crate) fn analyze_raw(geom: &Geometry, values: &[f64]) -> Vec<f64> {
    let n = values.len();
    match &geom.basis {
        Basis::Fourier => {
            let spec = fft(values);
            complex_to_real_layout(&spec)
        }
        Basis::Legendre { x, gw } => {
            let mut c = vec![0.0; n];
            for j in 0..n {
                let wu = gw[j] * values[j];
                let mut it = LegendreIter::new(x[j]);
                for cl in c.iter_mut() {
                    *cl += wu * it.next_values().0;
                }
            }
            for (l, cl) in c.iter_mut().enumerate() {
                *cl *= (2 * l + 1) as f64 / 2.0;
            }
            c
        }
        Basis::EvenLegendre { s, gw, .. } => {
            let mut c = vec![0.0; n];
            for j in 0..n {
                let wu = gw[j] * values[j];
                let mut it = LegendreIter::new(s[j]);
                for ck in c.iter_mut() {
                    *ck += wu * it.next_values().0;
                    it.next_values();
                }
            }
            for (k, ck) in c.iter_mut().enumerate() {
                *ck *= (4 * k + 1) as f64;
            }
            c
        }
    }
}

/// Magnitude of each mode in an orthonormal normalization.
pub(crate) fn mode_magnitudes(geom: &Geometry, c: &[f64]) -> Vec<f64> {
    match geom.basis {
        Basis::Fourier => {
            let n = c.len();
            let mut m = vec![c[0].abs()];
            let half = n / 2;
            let paired = if n.is_multiple_of(2) { half - 1 } else { half };
            for k in 1..=paired {
                m.push(c[2 * k - 1].hypot(c[2 * k]));
            }
            if n.is_multiple_of(2) {
                m.push(c[n - 1].abs());
            }
            m
        }
        Basis::Legendre { .. } => c
            .iter()
            .enumerate()
            .map(|(l, v)| v.abs() * (2.0 / (2 * l + 1) as f64).sqrt())
            .collect(),
        Basis::EvenLegendre { .. } => c
            .iter()
            .enumerate()
            .map(|(k, v)| v.abs() * (2.0 / (4 * k + 1) as f64).sqrt())
            .collect(),
    }
}

/// Zero the tail of modes that sit below `chop_tol` times the largest mode.
fn chop(geom: &Geometry, c: &mut [f64]) {
    if geom.chop_tol <= 0.0 {
        return;
    }
    let m = mode_magnitudes(geom, c);
    let top = m.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return;
    }
    let thresh = geom.chop_tol * top;
    let keep = m.iter().rposition(|&v| v > thresh).map_or(0, |i| i + 1);
    match geom.basis {
        Basis::Fourier => {
            // mode k occupies slots 2k-1, 2k (and the Nyquist slot n-1)
            let first_zeroed = if keep == 0 { 0 } else { 2 * keep - 1 };
            for v in c.iter_mut().skip(first_zeroed) {
                *v = 0.0;
            }
        }
        _ => {
            for v in c.iter_mut().skip(keep) {
                *v = 0.0;
            }
        }
    }
}

/// Fraction of spectral energy carried by the top quarter of the modes.
pub(crate) fn tail_energy_fraction(geom: &Geometry, c: &[f64]) -> f64 {
    let m = mode_magnitudes(geom, c);
    let total: f64 = m.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return 0.0;
    }
    let start = m.len() - m.len() / 4;
    m[start..].iter().map(|v| v * v).sum::<f64>() / total
}

/// Nodal values and frame derivatives from coefficients.
pub(crate) fn synthesize(geom: &Geometry, c: &[f64]) -> FrameDerivs {
    let n = c.len();
    match (&geom.basis, geom.params) {
        (Basis::Fourier, GeometryParams::Circle { period }) => {
            let spec = real_layout_to_complex(c);
            let u = ifft_real(&spec);
            let mut d1 = spec.clone();
            let mut d2 = spec;
            for k in 0..n {
                let kk = wavenumber(k, n) * 2.0 * PI / period;
                if n.is_multiple_of(2) && k == n / 2 {
                    d1[k] = Complex64::new(0.0, 0.0);
                } else {
                    d1[k] *= Complex64::new(0.0, kk);
                }
                d2[k] *= -kk * kk;
            }
            let du = ifft_real(&d1);
            let h1 = ifft_real(&d2);
            FrameDerivs {
                u,
                du,
                lap: h1.clone(),
                h2: vec![0.0; n],
                h1,
            }
        }
        (Basis::Legendre { x, .. }, GeometryParams::Sphere { radius, .. }) => {
            let lmax = last_nonzero(c);
            let mut out = FrameDerivs {
                u: vec![0.0; n],
                du: vec![0.0; n],
                h1: vec![0.0; n],
                h2: vec![0.0; n],
                lap: vec![0.0; n],
            };
            for j in 0..n {
                let p = sphere_point(c, lmax, x[j], radius);
                out.u[j] = p.u;
                out.du[j] = p.du;
                out.h1[j] = p.h1;
                out.h2[j] = p.h2;
                out.lap[j] = p.lap;
            }
            out
        }
        (Basis::EvenLegendre { s, dr, ddr, .. }, GeometryParams::Plane { .. }) => {
            let kmax = last_nonzero(c);
            let r = geom.nodes();
            let mut out = FrameDerivs {
                u: vec![0.0; n],
                du: vec![0.0; n],
                h1: vec![0.0; n],
                h2: vec![0.0; n],
                lap: vec![0.0; n],
            };
            for j in 0..n {
                let p = plane_point(c, kmax, s[j], r[j], dr[j], ddr[j]);
                out.u[j] = p.u;
                out.du[j] = p.du;
                out.h1[j] = p.h1;
                out.h2[j] = p.h2;
                out.lap[j] = p.lap;
            }
            out
        }
        _ => unreachable!("basis and parameters always agree"),
    }
}

/// Evaluate the interpolant and its frame derivatives at an arbitrary coordinate
/// (`x` on the circle, colatitude on the sphere, radius on the plane).
pub(crate) fn evaluate_at(geom: &Geometry, c: &[f64], coord: f64) -> PointValues {
    match geom.params {
        GeometryParams::Circle { period } => {
            let n = c.len();
            let w = 2.0 * PI / period;
            let mut p = PointValues {
                u: c[0],
                du: 0.0,
                h1: 0.0,
                h2: 0.0,
                lap: 0.0,
            };
            let half = n / 2;
            let paired = if n.is_multiple_of(2) { half - 1 } else { half };
            for k in 1..=paired {
                let (a, b) = (c[2 * k - 1], c[2 * k]);
                let kw = k as f64 * w;
                let (sn, cs) = (kw * coord).sin_cos();
                p.u += a * cs + b * sn;
                p.du += kw * (-a * sn + b * cs);
                p.h1 -= kw * kw * (a * cs + b * sn);
            }
            if n.is_multiple_of(2) {
                let kw = half as f64 * w;
                let cs = (kw * coord).cos();
                p.u += c[n - 1] * cs;
                p.h1 -= kw * kw * c[n - 1] * cs;
            }
            p.lap = p.h1;
            p
        }
        GeometryParams::Sphere { radius, .. } => {
            sphere_point(c, last_nonzero(c), coord.cos(), radius)
        }
        GeometryParams::Plane { radius, stretch } => {
            let map = super::RadialMap { radius, stretch };
            let s = map.s(coord);
            plane_point(c, last_nonzero(c), s, coord, map.dr(s), map.ddr(s))
        }
    }
}

fn sphere_point(c: &[f64], lmax: usize, x: f64, radius: f64) -> PointValues {
    let mut it = LegendreIter::new(x);
    let (mut s0, mut s1, mut sll) = (0.0, 0.0, 0.0);
    for (l, &cl) in c.iter().enumerate().take(lmax + 1) {
        let (p, dp, _) = it.next_values();
        s0 += cl * p;
        s1 += cl * dp;
        sll += cl * (l * (l + 1)) as f64 * p;
    }
    let sin = (1.0 - x * x).max(0.0).sqrt();
    let a2 = radius * radius;
    PointValues {
        u: s0,
        du: -sin * s1 / radius,
        h1: (x * s1 - sll) / a2,
        h2: -x * s1 / a2,
        lap: -sll / a2,
    }
}

fn plane_point(c: &[f64], kmax: usize, s: f64, r: f64, dr: f64, ddr: f64) -> PointValues {
    let mut it = LegendreIter::new(s);
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for &ck in c.iter().take(kmax + 1) {
        let (p, dp, ddp) = it.next_values();
        s0 += ck * p;
        s1 += ck * dp;
        s2 += ck * ddp;
        it.next_values();
    }
    let ur = s1 / dr;
    let urr = (s2 - ur * ddr) / (dr * dr);
    let h2 = if r > 0.0 { ur / r } else { urr };
    PointValues {
        u: s0,
        du: ur,
        h1: urr,
        h2,
        lap: urr + h2,
    }
}

/// `∫_0^{r} q(t) dt` at every node and at the outer radius, for nodal samples
/// of a function `q` that is odd in `r` (e.g. `f(r) r` for smooth radial `f`).
pub(crate) fn radial_antiderivative(geom: &Geometry, q: &[f64]) -> (Vec<f64>, f64) {
    let Basis::EvenLegendre { s, gw, dr, .. } = &geom.basis else {
        panic!("radial antiderivative needs a plane geometry");
    };
    let n = q.len();
    // integrand in s is odd: expand in P_1, P_3, ... (2N - 1 odd modes fit N of them)
    let mut c = vec![0.0; n];
    for j in 0..n {
        let wq = gw[j] * q[j] * dr[j];
        let mut it = LegendreIter::new(s[j]);
        for ck in c.iter_mut() {
            it.next_values();
            *ck += wq * it.next_values().0;
        }
    }
    for (k, ck) in c.iter_mut().enumerate() {
        *ck *= (4 * k + 3) as f64;
    }
    // ∫_0^s P_l = (P_{l+1}(s) - P_{l-1}(s) - P_{l+1}(0) + P_{l-1}(0)) / (2l + 1)
    let eval = |x: f64| -> f64 {
        let mut it = LegendreIter::new(x);
        let mut prev = it.next_values().0; // P_0
        it.next_values(); // P_1
        let mut acc = 0.0;
        for (k, &ck) in c.iter().enumerate() {
            let l = 2 * k + 1;
            let next = it.next_values().0; // P_{l+1}
            acc += ck * (next - prev) / (2 * l + 1) as f64;
            prev = next;
            it.next_values(); // P_{l+2}
        }
        acc
    };
    let base = eval(0.0);
    let at_nodes = s.iter().map(|&sj| eval(sj) - base).collect();
    (at_nodes, eval(1.0) - base)
}

fn last_nonzero(c: &[f64]) -> usize {
    c.iter().rposition(|&v| v != 0.0).unwrap_or(0)
}

fn wavenumber(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

fn fft(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

fn ifft_real(spec: &[Complex64]) -> Vec<f64> {
    let n = spec.len();
    let mut buf = spec.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.re).collect()
}

/// `[a0, a1, b1, a2, b2, ..., a_{N/2}]` with `u = a0 + Σ a_k cos + b_k sin`.
fn complex_to_real_layout(spec: &[Complex64]) -> Vec<f64> {
    let n = spec.len();
    let mut c = vec![0.0; n];
    c[0] = spec[0].re;
    let half = n / 2;
    let paired = if n.is_multiple_of(2) { half - 1 } else { half };
    for k in 1..=paired {
        c[2 * k - 1] = 2.0 * spec[k].re;
        c[2 * k] = -2.0 * spec[k].im;
    }
    if n.is_multiple_of(2) {
        c[n - 1] = spec[half].re;
    }
    c
}

fn real_layout_to_complex(c: &[f64]) -> Vec<Complex64> {
    let n = c.len();
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    spec[0] = Complex64::new(c[0], 0.0);
    let half = n / 2;
    let paired = if n.is_multiple_of(2) { half - 1 } else { half };
    for k in 1..=paired {
        let z = Complex64::new(0.5 * c[2 * k - 1], -0.5 * c[2 * k]);
        spec[k] = z;
        spec[n - k] = z.conj();
    }
    if n.is_multiple_of(2) {
        spec[half] = Complex64::new(c[n - 1], 0.0);
    }
    spec
}
