//! Critical points of `dist_Y` for a finite `Y ⊂ ℝⁿ`.
//!
//! A subset `Y'` of `k+1` points yields a critical point at the center of the
//! smallest sphere through it when (i) the center lies in `co(Y')` and (ii) no
//! other point of `Y` is strictly closer. The quadratic index is always zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distfield::{lex_cmp, PointCloud};
use crate::error::{Error, Result};
use crate::numerics::{barycentric_zero, dist, dot, solve_linear, sub, sym_eig, Matrix};

pub const DEFAULT_MAX_POINTS: usize = 25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudCritical {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Indices into the cloud.
    pub support: Vec<usize>,
    pub support_points: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
    pub k: usize,
    pub iota: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudAnalysis {
    pub criticals: Vec<CloudCritical>,
    /// Subsets whose circumsphere passes through another point of `Y` to
    /// within the tie band.
    pub cospherical: Vec<Vec<usize>>,
    pub candidates: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudOptions {
    pub max_points: usize,
    /// Relative band for condition (ii) and for tie detection.
    pub band: f64,
    /// Feasibility tolerance for condition (i).
    pub hull_tol: f64,
}

impl Default for CloudOptions {
    fn default() -> Self {
        CloudOptions {
            max_points: DEFAULT_MAX_POINTS,
            band: 1e-9,
            hull_tol: 1e-9,
        }
    }
}

/// Gram matrix of `pᵢ − p₀`, `i ≥ 1`.
fn edge_gram(points: &[Vec<f64>]) -> (Vec<Vec<f64>>, Matrix) {
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    let k = edges.len();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = dot(&edges[i], &edges[j]);
        }
    }
    (edges, g)
}

fn affinely_independent(points: &[Vec<f64>]) -> bool {
    if points.len() <= 1 {
        return true;
    }
    let (_, g) = edge_gram(points);
    let Ok(e) = sym_eig(&g) else {
        return false;
    };
    let max = e.values.last().copied().unwrap_or(0.0);
    max > 0.0 && e.values[0] > 1e-12 * max
}

/// Center and radius of the smallest sphere through affinely independent points.
pub fn circumcenter(points: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let Some(first) = points.first() else {
        return Err(Error::Invalid("circumcenter of no points".into()));
    };
    let n = first.len();
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    if points.len() > n + 1 || !affinely_independent(points) {
        return Err(Error::AffinelyDependent);
    }
    if points.len() == 1 {
        return Ok((first.clone(), 0.0));
    }
    // c = p₀ + Σ αᵢ eᵢ with 2 eᵢ·(c − p₀) = ‖eᵢ‖², i.e. G α = ½ diag(G).
    let (edges, g) = edge_gram(points);
    let rhs: Vec<f64> = (0..edges.len()).map(|i| 0.5 * g[(i, i)]).collect();
    let alpha = solve_linear(&g, &rhs).map_err(|_| Error::AffinelyDependent)?;
    let mut c = first.clone();
    for (a, e) in alpha.iter().zip(&edges) {
        for (ci, ei) in c.iter_mut().zip(e) {
            *ci += a * ei;
        }
    }
    let r = points.iter().map(|p| dist(&c, p)).sum::<f64>() / points.len() as f64;
    Ok((c, r))
}

/// Checks that every subset of at most `n+1` points is affinely independent.
/// Returns the first offending subset.
pub fn general_position_check(y: &PointCloud) -> (bool, Option<Vec<usize>>) {
    let m = y.len();
    for size in 2..=(y.dim + 1).min(m) {
        for subset in crate::numerics::subsets_of(m, size) {
            let pts: Vec<Vec<f64>> = subset.iter().map(|&i| y.points[i].clone()).collect();
            if !affinely_independent(&pts) {
                return (false, Some(subset));
            }
        }
    }
    (true, None)
}

/// `Σ_{k=0}^{n} C(m, k+1)`, the number of candidate subsets.
pub fn candidate_bound(m: usize, n: usize) -> u128 {
    let mut total: u128 = 0;
    for size in 1..=(n + 1).min(m) {
        let mut c: u128 = 1;
        for i in 0..size {
            c = c * (m - i) as u128 / (i + 1) as u128;
        }
        total += c;
    }
    total
}

/// All critical points of `dist_Y`, sorted by `k` then center.
pub fn enumerate_critical(y: &PointCloud, opts: &CloudOptions) -> Result<CloudAnalysis> {
    let m = y.len();
    if m > opts.max_points {
        return Err(Error::CloudTooLarge {
            got: m,
            limit: opts.max_points,
        });
    }
    if let (false, Some(subset)) = general_position_check(y) {
        return Err(Error::GeneralPosition { subset });
    }
    let n = y.dim;
    let subsets: Vec<Vec<usize>> = (1..=(n + 1).min(m))
        .flat_map(|size| crate::numerics::subsets_of(m, size))
        .collect();
    let candidates = subsets.len();
    let results: Vec<Result<(Option<CloudCritical>, bool)>> = subsets
        .par_iter()
        .map(|subset| evaluate_subset(y, subset, opts))
        .collect();
    let mut criticals = Vec::new();
    let mut cospherical = Vec::new();
    for (subset, r) in subsets.iter().zip(results) {
        let (crit, tie) = r?;
        if tie {
            cospherical.push(subset.clone());
        }
        criticals.extend(crit);
    }
    criticals.sort_by(|a, b| a.k.cmp(&b.k).then_with(|| lex_cmp(&a.center, &b.center)));
    Ok(CloudAnalysis {
        criticals,
        cospherical,
        candidates,
    })
}

fn evaluate_subset(
    y: &PointCloud,
    subset: &[usize],
    opts: &CloudOptions,
) -> Result<(Option<CloudCritical>, bool)> {
    let pts: Vec<Vec<f64>> = subset.iter().map(|&i| y.points[i].clone()).collect();
    let k = subset.len() - 1;
    if k == 0 {
        return Ok((
            Some(CloudCritical {
                center: pts[0].clone(),
                radius: 0.0,
                support: subset.to_vec(),
                support_points: pts,
                lambdas: vec![1.0],
                k: 0,
                iota: 0,
            }),
            false,
        ));
    }
    let (c, r) = circumcenter(&pts)?;
    let verts: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| sub(&c, p).iter().map(|v| v / r).collect())
        .collect();
    let hull = barycentric_zero(&verts, opts.hull_tol);
    let band = opts.band * (1.0 + r);
    let mut tie = false;
    let mut blocked = false;
    for (i, p) in y.points.iter().enumerate() {
        if subset.contains(&i) {
            continue;
        }
        let d = dist(&c, p);
        if d < r - band {
            blocked = true;
        } else if (d - r).abs() <= band {
            tie = true;
        }
    }
    if !hull.feasible || blocked {
        return Ok((None, tie && hull.feasible));
    }
    Ok((
        Some(CloudCritical {
            center: c,
            radius: r,
            support: subset.to_vec(),
            support_points: pts,
            lambdas: hull.lambdas,
            k,
            iota: 0,
        }),
        tie,
    ))
}

/// `Σ_k (−1)^k #{criticals of index k}`.
pub fn euler_sum(criticals: &[CloudCritical]) -> i64 {
    criticals
        .iter()
        .map(|c| if c.k % 2 == 0 { 1 } else { -1 })
        .sum()
}
