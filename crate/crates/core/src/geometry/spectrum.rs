use nalgebra::{DMatrix, SymmetricEigen};

use super::spectral;
use super::{Geometry, GeometryKind};
use crate::error::{Error, Result};

/// Nodal matrix of the discrete Laplace-Beltrami operator (chopping disabled).
pub fn laplacian_matrix(geom: &Geometry) -> DMatrix<f64> {
    let g = geom.clone().with_chop_tol(0.0);
    let n = g.resolution();
    let mut a = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let c = spectral::analyze(&g, &e);
        let lap = spectral::synthesize(&g, &c).lap;
        a.set_column(j, &nalgebra::DVector::from_vec(lap));
        e[j] = 0.0;
    }
    a
}

/// Eigenvalues of `-Δ` on the discretization, ascending.
pub(crate) fn neg_laplacian_spectrum(geom: &Geometry) -> Vec<f64> {
    let a = laplacian_matrix(geom);
    // W^{1/2} (-A) W^{-1/2} is symmetric for the quadrature inner product
    let sw: Vec<f64> = geom.weights().iter().map(|w| w.sqrt()).collect();
    let n = a.nrows();
    let s = DMatrix::from_fn(n, n, |i, j| -a[(i, j)] * sw[i] / sw[j]);
    let s = (&s + s.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Smallest positive eigenvalue of `-Δ` on a circle or zonal sphere.
pub fn first_eigenvalue(geom: &Geometry) -> Result<f64> {
    if geom.kind() == GeometryKind::PlaneRadial {
        return Err(Error::UnsupportedGeometry(
            "first eigenvalue is defined for the circle and the sphere".into(),
        ));
    }
    let ev = neg_laplacian_spectrum(geom);
    let top = ev.last().copied().unwrap_or(0.0).abs();
    ev.into_iter()
        .find(|&v| v > 1e-8 * top)
        .ok_or_else(|| Error::Domain("no positive eigenvalue found".into()))
}
