//! Damped Newton iteration shared by the elliptic solvers.
//!
//! Steps come from a truncated SVD so that exact symmetries (the
//! translation kernel on the circle, for instance) do not make the linear
//! solve blow up; the minimum-norm step simply ignores those directions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Relative singular-value cutoff for the pseudo-inverse.
    pub svd_rcond: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            max_halvings: 40,
            svd_rcond: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    /// Sup norm of the final residual.
    pub residual: f64,
    pub iterations: usize,
    /// Sup norm of the residual after each accepted step, starting with the initial guess.
    pub history: Vec<f64>,
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Solves `F(x) = 0`. `residual` may fail (e.g. on overflow); such trial
/// points are treated like an increase of the merit function.
pub fn solve<R, J>(x0: Vec<f64>, mut residual: R, mut jacobian: J, opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    R: FnMut(&[f64]) -> Option<Vec<f64>>,
    J: FnMut(&[f64]) -> DMatrix<f64>,
{
    let mut x = x0;
    let mut f = residual(&x).ok_or_else(|| Error::NewtonDiverged {
        iterations: 0,
        residual: f64::INFINITY,
        history: vec![],
    })?;
    let mut history = vec![sup(&f)];
    for it in 0..opts.max_iter {
        if sup(&f) <= opts.tol {
            return Ok(NewtonOutcome {
                residual: sup(&f),
                x,
                iterations: it,
                history,
            });
        }
        let jac = jacobian(&x);
        let rhs = DVector::from_column_slice(&f);
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&rhs, opts.svd_rcond * smax)
            .map_err(|e| Error::Unknown(format!("SVD solve failed: {e}")))?;
        let merit0 = l2sq(&f);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            if let Some(ft) = residual(&trial) {
                let m = l2sq(&ft);
                if m.is_finite() && m < merit0 * (1.0 - 1e-4 * t) {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, fnew)) => {
                x = xn;
                f = fnew;
                history.push(sup(&f));
            }
            None => {
                // stalled: at roundoff level this is success, otherwise divergence
                let r = sup(&f);
                if r <= opts.tol * 10.0 {
                    return Ok(NewtonOutcome {
                        residual: r,
                        x,
                        iterations: it,
                        history,
                    });
                }
                return Err(Error::NewtonDiverged {
                    iterations: it,
                    residual: r,
                    history,
                });
            }
        }
    }
    let r = sup(&f);
    if r <= opts.tol {
        Ok(NewtonOutcome {
            residual: r,
            x,
            iterations: opts.max_iter,
            history,
        })
    } else {
        Err(Error::NewtonDiverged {
            iterations: opts.max_iter,
            residual: r,
            history,
        })
    }
}
