//! Indices and nondegeneracy of critical points.

use serde::{Deserialize, Serialize};

use super::{CriticalPoint, Domain, Flag};
use crate::distfield::{is_critical, surface_normal, PointCloud, SearchOptions, Target};
use crate::error::{Error, Result};
use crate::numerics::{
    barycentric_zero, dot, inertia, norm, orthonormal_complement, sub, sym_eig, Matrix,
};
use crate::poly::Poly;

/// Below this `|1 − rκ|` a witness is treated as focal.
const FOCAL_TOL: f64 = 1e-8;
/// Singular-value threshold for the linear independence condition.
const RANK_TOL: f64 = 1e-7;
/// Relative zero band for the combined Hessian.
const ZERO_BAND: f64 = 1e-7;
const LAMBDA_MIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexVerdict {
    Index(usize),
    Degenerate,
}

/// Second fundamental form of `Z(q)` at `y` for the unit normal pointing to
/// `x`, as an `n×n` matrix vanishing on the normal. Positive curvature means
/// the hypersurface bends toward `x`.
fn shape_operator(q: &Poly, y: &[f64], x: &[f64]) -> Result<Matrix> {
    let g = q.grad(y)?;
    let gn = norm(&g);
    if gn < 1e-12 {
        return Err(Error::SingularSurfacePoint(gn));
    }
    let d = sub(x, y);
    if norm(&d) == 0.0 {
        return Err(Error::OnTarget(0.0));
    }
    let s = if dot(&g, &d) >= 0.0 { 1.0 } else { -1.0 };
    let nu: Vec<f64> = g.iter().map(|c| c / gn).collect();
    let n = y.len();
    let proj = Matrix::identity(n).sub(&Matrix::outer(&nu));
    let h = q.hessian(y)?;
    Ok(proj.matmul(&h).matmul(&proj).scale(-s / gn))
}

/// Principal curvatures of `Z(q)` at `y` toward `x`.
pub fn curvatures(q: &Poly, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let shape = shape_operator(q, y, x)?;
    let g = q.grad(y)?;
    let basis = orthonormal_complement(&[g], y.len(), 1e-9)?;
    let b = Matrix::from_columns(&basis);
    Ok(sym_eig(&shape.congruence(&b))?.values)
}

/// Hessian at `x` of the distance to the sheet of `Z(q)` through the witness `y`,
/// with `r = ‖x − y‖`. Each principal curvature `κ` becomes `−κ/(1 − rκ)`;
/// the normal direction stays in the kernel.
pub fn hessian_dist_sheet(q: &Poly, y: &[f64], x: &[f64], r: f64) -> Result<Matrix> {
    if q.nvars() != x.len() || y.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: q.nvars(),
            got: x.len(),
        });
    }
    let shape = shape_operator(q, y, x)?;
    let eig = sym_eig(&shape)?;
    let mut mapped = Vec::with_capacity(eig.values.len());
    for &kappa in &eig.values {
        let denom = 1.0 - r * kappa;
        if denom.abs() < FOCAL_TOL {
            return Err(Error::Focal(denom.abs()));
        }
        mapped.push(-kappa / denom);
    }
    let v = &eig.vectors;
    Ok(v.matmul(&Matrix::diag(&mapped)).matmul(&v.transpose()))
}

/// Hessian of `z ↦ ‖z − y‖` at `x`: `(I − wwᵀ)/d` with `w = (x − y)/d`.
pub fn hessian_dist_point(y: &[f64], x: &[f64]) -> Result<Matrix> {
    let d = crate::numerics::dist(x, y);
    if d == 0.0 {
        return Err(Error::OnTarget(0.0));
    }
    let w: Vec<f64> = sub(x, y).iter().map(|c| c / d).collect();
    Ok(Matrix::identity(x.len())
        .sub(&Matrix::outer(&w))
        .scale(1.0 / d))
}

/// Quadratic index of a `k = 1` critical point of the distance to a planar
/// curve, from the curvatures `κ₀, κ₁` at the two witnesses (positive when
/// bending toward the point) and the distance `d`.
pub fn planar_index(kappa0: f64, kappa1: f64, d: f64) -> Result<IndexVerdict> {
    if !(d > 0.0) {
        return Err(Error::Precondition(format!(
            "distance must be positive, got {d}"
        )));
    }
    if kappa0 >= 1.0 / d || kappa1 >= 1.0 / d {
        return Err(Error::Precondition(format!(
            "curvatures must stay below 1/d = {}, got {kappa0} and {kappa1}",
            1.0 / d
        )));
    }
    let c = 1.0 / (2.0 * d);
    let lhs = (kappa0 - c) * (kappa1 - c);
    let rhs = c * c;
    let h = lhs - rhs;
    if h.abs() <= 1e-9 * lhs.abs().max(rhs) {
        Ok(IndexVerdict::Degenerate)
    } else if h > 0.0 {
        Ok(IndexVerdict::Index(0))
    } else {
        Ok(IndexVerdict::Index(1))
    }
}

/// Index of a critical point `x` of the distance from `X = Z(p)` to the point `y`:
/// the number of principal curvatures of `X` at `x`, toward `y`, exceeding
/// `1/‖x − y‖`.
pub fn point_target_index(p: &Poly, x: &[f64], y: &[f64]) -> Result<usize> {
    let n = p.nvars();
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let target = Target::Cloud(PointCloud::new(n, vec![y.to_vec()])?);
    let opts = SearchOptions {
        tol: 1e-8,
        ..Default::default()
    };
    let (critical, _) = is_critical(Some(p), &target, x, &opts, 1e-7)?;
    if !critical {
        return Err(Error::NotCritical);
    }
    let d = crate::numerics::dist(x, y);
    let kappas = curvatures(p, x, y)?;
    let mut iota = 0;
    for kappa in kappas {
        let gap = 1.0 - d * kappa;
        if gap.abs() < 1e-9 {
            return Err(Error::Focal(gap.abs()));
        }
        if gap < 0.0 {
            iota += 1;
        }
    }
    Ok(iota)
}

/// Computes `k`, `ι` and nondegeneracy of a critical point.
///
/// With `Σλᵢ(x − yᵢ) = μ∇p(x)` the combined Hessian on `V(x)` is
/// `Σλᵢ H(gᵢ) − (μ/r) H(p)`, where `gᵢ` is the distance to the sheet of `Y`
/// through `yᵢ`.
pub fn classify(domain: &Domain, target: &Target, cp: &CriticalPoint) -> Result<CriticalPoint> {
    let n = domain.dim();
    let x = &cp.x;
    if x.len() != n || target.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let m = cp.witnesses.len();
    if m == 0 {
        return Err(Error::Invalid("critical point without witnesses".into()));
    }
    let r = cp
        .witnesses
        .iter()
        .map(|y| crate::numerics::dist(x, y))
        .sum::<f64>()
        / m as f64;
    if r <= 0.0 {
        return Err(Error::OnTarget(r));
    }
    let mut out = cp.clone();
    out.k = m - 1;
    out.flags
        .retain(|f| !matches!(f, Flag::Degenerate | Flag::Focal | Flag::BoundaryDegenerate));

    let normal = match domain.poly() {
        Some(p) => Some(surface_normal(p, x, 1e-6)?),
        None => None,
    };
    let project = |v: &[f64]| -> Vec<f64> {
        match &normal {
            Some(nu) => {
                let s = dot(v, nu);
                v.iter().zip(nu).map(|(a, b)| a - s * b).collect()
            }
            None => v.to_vec(),
        }
    };
    let units: Vec<Vec<f64>> = cp
        .witnesses
        .iter()
        .map(|y| sub(x, y).iter().map(|c| c / r).collect())
        .collect();
    let projected: Vec<Vec<f64>> = units.iter().map(|u| project(u)).collect();

    let lambdas = if cp.lambdas.len() == m {
        cp.lambdas.clone()
    } else {
        barycentric_zero(&projected, 1e-7).lambdas
    };
    out.lambdas = lambdas.clone();

    // Condition 1: each leave-one-out family of differentials is independent.
    let mut independent = true;
    for j in 0..m {
        let family: Vec<&Vec<f64>> = projected
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, v)| v)
            .collect();
        if family.is_empty() {
            continue;
        }
        let mut gram = Matrix::zeros(family.len(), family.len());
        for a in 0..family.len() {
            for b in 0..family.len() {
                gram[(a, b)] = dot(family[a], family[b]);
            }
        }
        let smallest = sym_eig(&gram)?.values[0];
        if smallest.max(0.0).sqrt() <= RANK_TOL {
            independent = false;
        }
    }

    // V(x): orthogonal to ∇p and to the differences of the differentials.
    let mut span: Vec<Vec<f64>> = Vec::new();
    if let Some(nu) = &normal {
        span.push(nu.clone());
    }
    for u in &units[1..] {
        span.push(sub(u, &units[0]));
    }
    let basis = orthonormal_complement(&span, n, 1e-9)?;

    let mut focal = false;
    let mut sheet = Vec::with_capacity(m);
    for y in &cp.witnesses {
        let h = match target {
            Target::Hypersurface(q) => hessian_dist_sheet(q, y, x, r),
            Target::Cloud(_) => hessian_dist_point(y, x),
        };
        match h {
            Ok(h) => sheet.push(h),
            Err(Error::Focal(_)) => {
                focal = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let small_lambda = lambdas.iter().any(|&l| l <= LAMBDA_MIN);
    if small_lambda {
        out.add_flag(Flag::BoundaryDegenerate);
    }
    if focal {
        out.add_flag(Flag::Focal);
        out.iota = None;
        out.nondegenerate = false;
        return Ok(out);
    }

    let mut zero_band_empty = true;
    let mut iota = 0;
    if !basis.is_empty() {
        let b = Matrix::from_columns(&basis);
        let mut combined = Matrix::zeros(basis.len(), basis.len());
        let mut scale = 0.0;
        for (lam, h) in lambdas.iter().zip(&sheet) {
            let part = h.congruence(&b).scale(*lam);
            scale += part.frobenius_norm();
            combined = combined.add(&part);
        }
        if let Some(p) = domain.poly() {
            let g = p.grad(x)?;
            let mu = cp.mu.unwrap_or_else(|| {
                let mut resid = x.clone();
                for (lam, y) in lambdas.iter().zip(&cp.witnesses) {
                    for (a, b) in resid.iter_mut().zip(y) {
                        *a -= lam * b;
                    }
                }
                dot(&g, &resid) / dot(&g, &g)
            });
            let part = p.hessian(x)?.congruence(&b).scale(-mu / r);
            scale += part.frobenius_norm();
            combined = combined.add(&part);
        }
        // 1/r is the curvature scale of a flat sheet, so a vanishing Hessian
        // still gets a band.
        let t = inertia(&combined, ZERO_BAND * (scale + 1.0 / r))?;
        zero_band_empty = t.zero == 0;
        iota = t.neg;
    }
    let within_bounds = out.k + iota <= domain.manifold_dim();
    out.iota = zero_band_empty.then_some(iota);
    out.nondegenerate = independent && zero_band_empty && !small_lambda && within_bounds;
    if !out.nondegenerate {
        out.add_flag(Flag::Degenerate);
    }
    Ok(out)
}
