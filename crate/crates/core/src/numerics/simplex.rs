use serde::{Deserialize, Serialize};

use super::{dot, norm, solve_linear, Matrix};

/// Convex weights `λ` with `Σλᵢ = 1` and the norm of `Σλᵢvᵢ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycentricSolution {
    pub lambdas: Vec<f64>,
    pub feasible: bool,
    pub residual: f64,
}

/// Affine minimum-norm combination of `vectors[idx]`: solves the KKT system
/// `[G 1; 1ᵀ 0] [λ; s] = [0; 1]` with `G` the Gram matrix. `None` when the
/// vectors are affinely dependent.
fn affine_min_norm(vectors: &[Vec<f64>], idx: &[usize]) -> Option<Vec<f64>> {
    let m = idx.len();
    let mut kkt = Matrix::zeros(m + 1, m + 1);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            kkt[(a, b)] = dot(&vectors[i], &vectors[j]);
        }
        kkt[(a, m)] = 1.0;
        kkt[(m, a)] = 1.0;
    }
    let mut rhs = vec![0.0; m + 1];
    rhs[m] = 1.0;
    solve_linear(&kkt, &rhs).ok().map(|mut s| {
        s.truncate(m);
        s
    })
}

fn combination(vectors: &[Vec<f64>], idx: &[usize], w: &[f64]) -> Vec<f64> {
    let n = vectors[idx[0]].len();
    let mut out = vec![0.0; n];
    for (&i, &wi) in idx.iter().zip(w) {
        for (o, v) in out.iter_mut().zip(&vectors[i]) {
            *o += wi * v;
        }
    }
    out
}

/// Decides whether `0 ∈ co{v₀,…,v_k}`.
///
/// For at most `n+1` affinely independent vectors the weights are unique and
/// come from one square solve. Dependent families fall back to enumerating
/// faces; larger families use [`min_norm_point`]. Feasibility is judged with
/// `λᵢ ≥ -tol` and `‖Σλᵢvᵢ‖ ≤ tol`. When infeasible, the returned
/// weights realize the distance from the origin to the hull.
pub fn barycentric_zero(vectors: &[Vec<f64>], tol: f64) -> BarycentricSolution {
    let m = vectors.len();
    if m == 0 {
        return BarycentricSolution {
            lambdas: Vec::new(),
            feasible: false,
            residual: f64::INFINITY,
        };
    }
    let n = vectors[0].len();
    let scale = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    if scale == 0.0 {
        return BarycentricSolution {
            lambdas: vec![1.0 / m as f64; m],
            feasible: true,
            residual: 0.0,
        };
    }
    let accept = |lam: &[f64], res: f64| lam.iter().all(|&l| l >= -tol) && res <= tol;

    if m <= n + 1 {
        let all: Vec<usize> = (0..m).collect();
        if let Some(lam) = affine_min_norm(vectors, &all) {
            let res = norm(&combination(vectors, &all, &lam));
            if accept(&lam, res) {
                return BarycentricSolution {
                    lambdas: lam,
                    feasible: true,
                    residual: res,
                };
            }
        } else {
            // Affinely dependent: try every face, smallest first.
            for size in 1..=m {
                for subset in subsets(m, size) {
                    if let Some(lam) = affine_min_norm(vectors, &subset) {
                        let res = norm(&combination(vectors, &subset, &lam));
                        if accept(&lam, res) {
                            let mut full = vec![0.0; m];
                            for (&i, &l) in subset.iter().zip(&lam) {
                                full[i] = l;
                            }
                            return BarycentricSolution {
                                lambdas: full,
                                feasible: true,
                                residual: res,
                            };
                        }
                    }
                }
            }
        }
    }
    let (lambdas, residual) = min_norm_point(vectors);
    BarycentricSolution {
        feasible: residual <= tol,
        lambdas,
        residual,
    }
}

/// All `size`-element subsets of `0..m` in lexicographic order.
pub fn subsets(m: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > m {
        return out;
    }
    let mut cur: Vec<usize> = (0..size).collect();
    loop {
        out.push(cur.clone());
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < m - size + i {
                cur[i] += 1;
                for j in (i + 1)..size {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Wolfe's algorithm for the point of minimum norm in `co(vectors)`.
/// Returns convex weights and the minimum norm.
pub fn min_norm_point(vectors: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let m = vectors.len();
    assert!(m > 0, "min_norm_point needs at least one vector");
    let scale2 = vectors.iter().map(|v| dot(v, v)).fold(0.0, f64::max);
    let eps = 1e-14 * scale2.max(1e-300);

    let start = (0..m)
        .min_by(|&a, &b| dot(&vectors[a], &vectors[a]).total_cmp(&dot(&vectors[b], &vectors[b])))
        .unwrap();
    let mut active = vec![start];
    let mut w = vec![1.0];
    let mut x = vectors[start].clone();

    for _major in 0..1000 {
        let xx = dot(&x, &x);
        let (j, xp) = (0..m)
            .map(|j| (j, dot(&x, &vectors[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if xx - xp <= eps || active.contains(&j) || xx <= eps {
            break;
        }
        active.push(j);
        w.push(0.0);
        loop {
            let Some(alpha) = affine_min_norm(vectors, &active) else {
                // Numerically dependent; drop the entering point and stop.
                active.pop();
                w.pop();
                return finish(vectors, &active, &w, m);
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                w = alpha;
                x = combination(vectors, &active, &w);
                break;
            }
            let mut theta = 1.0f64;
            for (&a, &wi) in alpha.iter().zip(&w) {
                if a <= 1e-15 && wi - a > 0.0 {
                    theta = theta.min(wi / (wi - a));
                }
            }
            for (wi, &a) in w.iter_mut().zip(&alpha) {
                *wi = theta * a + (1.0 - theta) * *wi;
            }
            let mut k = 0;
            while k < active.len() {
                if w[k] <= 1e-15 {
                    active.remove(k);
                    w.remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = w.iter().sum();
            for wi in &mut w {
                *wi /= s;
            }
        }
    }
    finish(vectors, &active, &w, m)
}

fn finish(vectors: &[Vec<f64>], active: &[usize], w: &[f64], m: usize) -> (Vec<f64>, f64) {
    let mut full = vec![0.0; m];
    for (&i, &wi) in active.iter().zip(w) {
        full[i] = wi;
    }
    let x = combination(vectors, active, w);
    (full, norm(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn opposite_pair() {
        let s = barycentric_zero(&[vec![1.0, 0.0], vec![-1.0, 0.0]], 1e-9);
        assert!(s.feasible);
        assert!((s.lambdas[0] - 0.5).abs() < 1e-12 && (s.lambdas[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pair_infeasible() {
        let s = barycentric_zero(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-9);
        assert!(!s.feasible);
        assert!((s.residual - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn three_directions() {
        let v: Vec<Vec<f64>> = [0.0f64, 120.0, 240.0]
            .iter()
            .map(|d| vec![d.to_radians().cos(), d.to_radians().sin()])
            .collect();
        let s = barycentric_zero(&v, 1e-9);
        assert!(s.feasible);
        for l in s.lambdas {
            assert!((l - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_zero_vector() {
        let s = barycentric_zero(&[vec![0.0, 0.0]], 1e-9);
        assert!(s.feasible);
        assert_eq!(s.lambdas, vec![1.0]);
    }

    #[test]
    fn face_tie_kept_feasible() {
        // 0 lies on the segment between the first two vectors.
        let v = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0]];
        let s = barycentric_zero(&v, 1e-9);
        assert!(s.feasible);
        assert!(s.lambdas[2].abs() < 1e-12);
    }

    #[test]
    fn dependent_family_uses_faces() {
        // Four vectors in the plane: affinely dependent as a set of n+2.
        let v = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
        ];
        let s = barycentric_zero(&v, 1e-9);
        assert!(s.feasible);
        assert!(s.residual < 1e-12);
        // Collinear triple, 0 inside.
        let v = vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![-1.0, 0.0]];
        assert!(barycentric_zero(&v, 1e-9).feasible);
    }

    #[test]
    fn many_vectors_use_min_norm() {
        let v: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = i as f64 * 0.1;
                vec![t.cos(), t.sin()]
            })
            .collect();
        assert!(barycentric_zero(&v, 1e-9).feasible);
        let half: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let t = 0.2 + i as f64 * 0.1;
                vec![t.cos(), t.sin()]
            })
            .collect();
        assert!(!barycentric_zero(&half, 1e-9).feasible);
    }

    #[test]
    fn min_norm_point_segment() {
        let (w, d) = min_norm_point(&[vec![1.0, 1.0], vec![-1.0, 1.0]]);
        assert!((d - 1.0).abs() < 1e-12);
        assert!((w[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert!(subsets(2, 3).is_empty());
    }

    fn unit(theta: f64, phi: f64) -> Vec<f64> {
        vec![theta.cos() * phi.cos(), theta.sin() * phi.cos(), phi.sin()]
    }

    proptest! {
        #[test]
        fn permutation_and_scaling_invariance(
            angles in prop::collection::vec((0.0f64..std::f64::consts::TAU, -1.5f64..1.5), 1..=4),
            scale in 0.1f64..10.0,
            rot in 0usize..4,
        ) {
            let v: Vec<Vec<f64>> = angles.iter().map(|&(t, p)| unit(t, p)).collect();
            let base = barycentric_zero(&v, 1e-9);
            let mut perm = v.clone();
            perm.rotate_left(rot % v.len());
            let p = barycentric_zero(&perm, 1e-9);
            prop_assert_eq!(base.feasible, p.feasible);
            let scaled: Vec<Vec<f64>> = v.iter().map(|x| x.iter().map(|c| c * scale).collect()).collect();
            let s = barycentric_zero(&scaled, 1e-9);
            prop_assert_eq!(base.feasible, s.feasible);
            if base.feasible && v.len() <= 4 {
                let mut unrot = p.lambdas.clone();
                unrot.rotate_right(rot % v.len());
                for (a, b) in base.lambdas.iter().zip(&unrot) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
                for (a, b) in base.lambdas.iter().zip(&s.lambdas) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
            }
            prop_assert!((s.residual - scale * base.residual).abs() < 1e-8 * scale);
        }
    }
}
