use super::{dot, sym_eig, Matrix};
use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is treated as singular.
const PIVOT_RTOL: f64 = 1e-13;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let scale = a.max_abs();
    if n > 0 && scale == 0.0 {
        return Err(Error::Singular { pivot: 0.0 });
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (piv_row, piv_val) =
            (col..n)
                .map(|r| (r, m[(r, col)].abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if piv_val <= PIVOT_RTOL * scale {
            return Err(Error::Singular { pivot: piv_val });
        }
        if piv_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv_row, j)];
                m[(piv_row, j)] = tmp;
            }
            rhs.swap(col, piv_row);
        }
        let p = m[(col, col)];
        for r in (col + 1)..n {
            let f = m[(r, col)] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[(r, j)] -= f * m[(col, j)];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| m[(i, j)] * x[j]).sum();
        x[i] = (rhs[i] - s) / m[(i, i)];
    }
    Ok(x)
}

/// Solves `(JᵀJ + damping·I) δ = Jᵀ r`, the Levenberg–Marquardt step.
pub fn solve_regularized_least_squares(j: &Matrix, r: &[f64], damping: f64) -> Result<Vec<f64>> {
    let jt = j.transpose();
    let mut normal = jt.matmul(j);
    let scale = normal.max_abs().max(1e-300);
    for i in 0..normal.rows() {
        normal[(i, i)] += damping * scale;
    }
    let rhs = jt.mul_vec(r);
    solve_linear(&normal, &rhs)
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)` in `ℝⁿ`.
///
/// Vectors whose component outside the span of the previous ones is below
/// `tol` times their norm are treated as dependent.
pub fn orthonormal_complement(vectors: &[Vec<f64>], n: usize, tol: f64) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        let norm0 = dot(v, v).sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nw = dot(&w, &w).sqrt();
        if nw > tol * norm0 {
            basis.push(w.iter().map(|x| x / nw).collect());
        }
    }
    if basis.len() >= n {
        return Ok(Vec::new());
    }
    let mut proj = Matrix::zeros(n, n);
    for b in &basis {
        proj = proj.add(&Matrix::outer(b));
    }
    let eig = sym_eig(&proj)?;
    // Eigenvalues are 0 on the complement and 1 on the span, ascending.
    Ok((0..n - basis.len())
        .map(|j| eig.vectors.column(j))
        .collect())
}
