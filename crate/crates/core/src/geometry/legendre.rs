//! Gauss-Legendre nodes and Legendre polynomial recurrences.
//!
//! Derivatives are always produced from the three-term recurrences for
//! `P_l`, `P_l'` and `P_l''` rather than from the Legendre differential
//! equation, which divides by `1 - x^2` and loses digits next to `x = ±1`.

use std::f64::consts::PI;

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi initial guess for the i-th largest root.
        let k = (i + 1) as f64;
        let theta = PI * (4.0 * k - 1.0) / (4.0 * nf + 2.0);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_and_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_and_derivative(n, 0.0);
        nodes[m - 1] = 0.0;
        weights[m - 1] = 2.0 / (d * d);
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))`.
pub fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for l in 1..n {
        let lf = l as f64;
        let p2 = ((2.0 * lf + 1.0) * x * p1 - lf * p0) / (lf + 1.0);
        let d2 = d0 + (2.0 * lf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Running values of `P_l`, `P_l'`, `P_l''` for consecutive degrees at a fixed point.
#[derive(Debug, Clone, Copy)]
pub struct LegendreIter {
    x: f64,
    l: usize,
    p: [f64; 2],
    d1: [f64; 2],
    d2: [f64; 2],
}

impl LegendreIter {
    pub fn new(x: f64) -> Self {
        Self {
            x,
            l: 0,
            p: [1.0, x],
            d1: [0.0, 1.0],
            d2: [0.0, 0.0],
        }
    }

    /// Degree of the values returned by the next call to [`LegendreIter::next_values`].
    pub fn degree(&self) -> usize {
        self.l
    }

    /// Returns `(P_l, P_l', P_l'')` for the current degree and advances by one.
    pub fn next_values(&mut self) -> (f64, f64, f64) {
        let out = (self.p[0], self.d1[0], self.d2[0]);
        let lf = self.l as f64 + 1.0;
        // advance the pair (l, l+1) -> (l+1, l+2)
        let p_next = ((2.0 * lf + 1.0) * self.x * self.p[1] - lf * self.p[0]) / (lf + 1.0);
        let d1_next = self.d1[0] + (2.0 * lf + 1.0) * self.p[1];
        let d2_next = self.d2[0] + (2.0 * lf + 1.0) * self.d1[1];
        self.p = [self.p[1], p_next];
        self.d1 = [self.d1[1], d1_next];
        self.d2 = [self.d2[1], d2_next];
        self.l += 1;
        out
    }
}

/// `P_l(x)` for `l = 0..=lmax`.
pub fn legendre_table(lmax: usize, x: f64) -> Vec<f64> {
    let mut it = LegendreIter::new(x);
    (0..=lmax).map(|_| it.next_values().0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_are_sorted() {
        for n in [8, 33, 256, 1024] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            assert!(w.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn quadrature_is_exact_for_degree_2n_minus_1() {
        let n = 12;
        let (x, w) = gauss_legendre(n);
        for k in 0..(2 * n) {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn iterator_matches_closed_forms() {
        let x: f64 = 0.3;
        let mut it = LegendreIter::new(x);
        let vals: Vec<_> = (0..4).map(|_| it.next_values()).collect();
        let p3 = 0.5 * (5.0 * x.powi(3) - 3.0 * x);
        let dp3 = 0.5 * (15.0 * x * x - 3.0);
        let ddp3 = 15.0 * x;
        assert!((vals[3].0 - p3).abs() < 1e-15);
        assert!((vals[3].1 - dp3).abs() < 1e-14);
        assert!((vals[3].2 - ddp3).abs() < 1e-14);
        assert!((vals[2].2 - 3.0).abs() < 1e-15);
    }
}
