use serde::{Deserialize, Serialize};

use super::{tol, Matrix, MAX_DIM};
use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix: `A = Q Λ Qᵀ`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Matrix,
}

/// Counts of negative, near-zero and positive eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InertiaTriple {
    pub neg: usize,
    pub zero: usize,
    pub pos: usize,
    pub tol: f64,
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps plane rotations over all off-diagonal pairs until the off-diagonal
/// Frobenius norm drops below `1e-12·‖A‖`.
pub fn sym_eig(a: &Matrix) -> Result<SymEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    if n > MAX_DIM {
        return Err(Error::TooLarge(n));
    }
    let norm = a.frobenius_norm();
    let asym = a.asymmetry();
    if asym > 1e-9 * (1.0 + norm) {
        return Err(Error::NonSymmetric { asymmetry: asym });
    }
    let mut m = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    let mut v = Matrix::identity(n);
    let target = tol::EIGEN_OFFDIAG * norm;

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_j)] = v[(i, old_j)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Applies the rotation `J(p,q,c,s)`: `M ← Jᵀ M J`, `V ← V J`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Inertia with an absolute zero band `[-tol, tol]`.
pub fn inertia(a: &Matrix, tol: f64) -> Result<InertiaTriple> {
    let eig = sym_eig(a)?;
    let mut t = InertiaTriple {
        neg: 0,
        zero: 0,
        pos: 0,
        tol,
    };
    for &l in &eig.values {
        if l < -tol {
            t.neg += 1;
        } else if l > tol {
            t.pos += 1;
        } else {
            t.zero += 1;
        }
    }
    Ok(t)
}

/// Inertia with the zero band scaled by the Frobenius norm of `a`.
pub fn inertia_relative(a: &Matrix, rel: f64) -> Result<InertiaTriple> {
    inertia(a, rel * a.frobenius_norm())
}
