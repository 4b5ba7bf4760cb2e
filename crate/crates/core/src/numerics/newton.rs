use super::{norm, solve_linear, solve_regularized_least_squares, Matrix};
use crate::error::{Error, Result};

/// A square or overdetermined nonlinear system `F(z) = 0`.
pub trait System {
    fn dim(&self) -> usize;
    fn residual(&self, z: &[f64]) -> Vec<f64>;
    fn jacobian(&self, z: &[f64]) -> Matrix;
}

/// [`System`] built from closures.
pub struct FnSystem<F, J> {
    pub dim: usize,
    pub f: F,
    pub j: J,
}

impl<F, J> System for FnSystem<F, J>
where
    F: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> Matrix,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn residual(&self, z: &[f64]) -> Vec<f64> {
        (self.f)(z)
    }

    fn jacobian(&self, z: &[f64]) -> Matrix {
        (self.j)(z)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Initial step length; halved until the residual decreases.
    pub damping: f64,
    pub tol: f64,
    /// Levenberg-Marquardt damping used when the Jacobian is singular or not
    /// square. `None` makes a singular Jacobian an error.
    pub regularization: Option<f64>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 100,
            damping: 1.0,
            tol: super::tol::NEWTON_RESIDUAL,
            regularization: Some(1e-10),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NewtonSolution {
    pub z: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Damped Newton iteration with backtracking on `‖F‖`.
pub fn newton<S: System + ?Sized>(
    sys: &S,
    z0: &[f64],
    opts: &NewtonOptions,
) -> Result<NewtonSolution> {
    let (sol, err) = newton_iterate(sys, z0, opts)?;
    match err {
        None => Ok(sol),
        Some(e) => Err(e),
    }
}

/// As [`newton`], but always returns the last iterate together with the
/// reason it stopped early, if any.
pub fn newton_iterate<S: System + ?Sized>(
    sys: &S,
    z0: &[f64],
    opts: &NewtonOptions,
) -> Result<(NewtonSolution, Option<Error>)> {
    if z0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: z0.len(),
        });
    }
    let mut z = z0.to_vec();
    let mut f = sys.residual(&z);
    let mut r = norm(&f);
    let stop = |z: Vec<f64>, r: f64, it: usize, e: Option<Error>| {
        Ok((
            NewtonSolution {
                z,
                residual: r,
                iterations: it,
            },
            e,
        ))
    };
    if !r.is_finite() {
        return stop(
            z,
            r,
            0,
            Some(Error::NoConvergence {
                iterations: 0,
                residual: r,
            }),
        );
    }
    for it in 0..opts.max_iter {
        if r <= opts.tol {
            return stop(z, r, it, None);
        }
        let j = sys.jacobian(&z);
        let solved = if j.is_square() {
            match solve_linear(&j, &f) {
                Ok(s) => Ok(s),
                Err(e) => match opts.regularization {
                    Some(mu) => solve_regularized_least_squares(&j, &f, mu),
                    None => Err(e),
                },
            }
        } else {
            solve_regularized_least_squares(&j, &f, opts.regularization.unwrap_or(1e-12))
        };
        let step = match solved {
            Ok(s) => s,
            Err(e) => return stop(z, r, it, Some(e)),
        };
        let mut t = opts.damping;
        let mut accepted = false;
        for _ in 0..=20 {
            let trial: Vec<f64> = z.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            let ft = sys.residual(&trial);
            let rt = norm(&ft);
            if rt.is_finite() && rt < r {
                z = trial;
                f = ft;
                r = rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return stop(
                z,
                r,
                it + 1,
                Some(Error::NoConvergence {
                    iterations: it + 1,
                    residual: r,
                }),
            );
        }
    }
    if r <= opts.tol {
        stop(z, r, opts.max_iter, None)
    } else {
        let e = Error::NoConvergence {
            iterations: opts.max_iter,
            residual: r,
        };
        stop(z, r, opts.max_iter, Some(e))
    }
}
