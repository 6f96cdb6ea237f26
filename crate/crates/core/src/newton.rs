//! Damped Newton iteration for small dense systems with analytic Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    /// Absolute tolerance on the max-norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest line-search damping factor tried before taking the step anyway.
    pub min_damping: f64,
    /// A point counts as converged only if the next Newton step is below
    /// `step_tol * (1 + |x|)`; this rejects slow drift toward a degenerate root.
    pub step_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            min_damping: 1.0 / 1024.0,
            step_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport {
    pub x: Vec<f64>,
    /// Max-norm of the residual at `x`.
    pub residual: f64,
    pub iterations: usize,
}

/// Residual vector and Jacobian at a point.
pub type Linearization = (DVector<f64>, DMatrix<f64>);

fn max_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, c| if c.is_nan() { f64::NAN } else { m.max(c.abs()) })
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let eps = svd.singular_values.max() * 1e-13 * a.nrows().max(a.ncols()) as f64;
    svd.solve(b, eps).ok()
}

fn newton_step(f: &DVector<f64>, j: &DMatrix<f64>) -> Option<DVector<f64>> {
    if j.is_square() {
        if let Some(dx) = j.clone().lu().solve(f) {
            if dx.iter().all(|c| c.is_finite()) {
                return Some(-dx);
            }
        }
    }
    lstsq(j, f).map(|dx| -dx)
}

/// Solves `F(x) = 0`.
///
/// `system` returns the residual and Jacobian; an error from it aborts the
/// iteration (this is how callers report collapse of the iterates). Each
/// step is damped by halving until `‖F‖²` decreases or `min_damping` is hit.
pub fn solve<F>(mut system: F, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonReport>
where
    F: FnMut(&[f64]) -> Result<Linearization>,
{
    let mut x = DVector::from_column_slice(x0);
    let (mut f, mut j) = system(x.as_slice())?;
    let mut norm = max_norm(&f);
    if !norm.is_finite() {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: norm,
        });
    }
    for iter in 1..=opts.max_iter {
        let Some(dx) = newton_step(&f, &j) else {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: norm,
            });
        };
        if norm <= opts.tol && dx.norm() <= opts.step_tol * (1.0 + x.norm()) {
            return polish(&mut system, x, f, j, norm, iter - 1);
        }
        let f2 = f.norm_squared();
        let mut lambda = 1.0;
        loop {
            let trial = &x + &dx * lambda;
            let (ft, jt) = system(trial.as_slice())?;
            let nt = max_norm(&ft);
            // Within tolerance the residual is round-off, so it cannot judge the step.
            let accept = nt.is_finite() && (norm <= opts.tol || ft.norm_squared() <= (1.0 - 1e-4 * lambda) * f2);
            if accept || lambda <= opts.min_damping {
                if nt.is_finite() {
                    x = trial;
                    f = ft;
                    j = jt;
                    norm = nt;
                }
                break;
            }
            lambda *= 0.5;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: norm,
    })
}

/// Up to two extra undamped steps, kept only when they lower the residual.
fn polish<F>(
    system: &mut F,
    mut x: DVector<f64>,
    mut f: DVector<f64>,
    mut j: DMatrix<f64>,
    mut norm: f64,
    iterations: usize,
) -> Result<NewtonReport>
where
    F: FnMut(&[f64]) -> Result<Linearization>,
{
    for _ in 0..2 {
        if norm == 0.0 {
            break;
        }
        let Some(dx) = newton_step(&f, &j) else { break };
        let trial = &x + dx;
        let Ok((ft, jt)) = system(trial.as_slice()) else { break };
        let nt = max_norm(&ft);
        if !(nt < norm) {
            break;
        }
        x = trial;
        f = ft;
        j = jt;
        norm = nt;
    }
    Ok(NewtonReport {
        x: x.as_slice().to_vec(),
        residual: norm,
        iterations,
    })
}
