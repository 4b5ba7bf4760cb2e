//! Planar test curves and independent measurements of them.

use distmorse::numerics::Matrix;
use distmorse::poly::{exponents_up_to, Poly};
use distmorse::sample::trace_curve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Foot of the perpendicular from `x` to `Z(q)` near `y0`, by Newton on
/// `q(y) = 0`, `(x − y) × ∇q(y) = 0`.
pub fn local_foot(q: &Poly, y0: &[f64], x: &[f64]) -> Option<[f64; 2]> {
    let mut y = [y0[0], y0[1]];
    for _ in 0..100 {
        let g = q.grad(&y).ok()?;
        let h = q.hessian(&y).ok()?;
        let a = [x[0] - y[0], x[1] - y[1]];
        let f = [q.eval(&y).ok()?, a[0] * g[1] - a[1] * g[0]];
        let j = [
            [g[0], g[1]],
            [
                -g[1] + a[0] * h[(1, 0)] - a[1] * h[(0, 0)],
                g[0] + a[0] * h[(1, 1)] - a[1] * h[(0, 1)],
            ],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dy = [
            (f[0] * j[1][1] - f[1] * j[0][1]) / det,
            (j[0][0] * f[1] - j[1][0] * f[0]) / det,
        ];
        y = [y[0] - dy[0], y[1] - dy[1]];
        if dy[0].abs().max(dy[1].abs()) < 1e-15 * (1.0 + y[0].abs().max(y[1].abs())) {
            return Some(y);
        }
    }
    let f = q.eval(&y).ok()?;
    (f.abs() < 1e-12).then_some(y)
}

/// Distance from `x` to the sheet of `Z(q)` through `y0`.
pub fn sheet_distance(q: &Poly, y0: &[f64], x: &[f64]) -> f64 {
    let y = local_foot(q, y0, x).expect("local foot converges");
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
}

/// Number of connected sign regions of `p` on a grid over `[−b, b]²`, and
/// whether every boundary node is positive.
pub fn sign_regions(p: &Poly, b: f64, cells: usize) -> (usize, bool) {
    let n = cells + 1;
    let h = 2.0 * b / cells as f64;
    let sign: Vec<bool> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            p.eval(&[-b + i as f64 * h, -b + j as f64 * h]).unwrap() > 0.0
        })
        .collect();
    let boundary_positive =
        (0..n).all(|t| sign[t] && sign[(n - 1) * n + t] && sign[t * n] && sign[t * n + n - 1]);
    let mut label = vec![usize::MAX; n * n];
    let mut regions = 0;
    for start in 0..n * n {
        if label[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        label[start] = regions;
        while let Some(c) = stack.pop() {
            let (i, j) = (c % n, c / n);
            let mut push = |d: usize| {
                if label[d] == usize::MAX && sign[d] == sign[c] {
                    label[d] = regions;
                    stack.push(d);
                }
            };
            if i > 0 {
                push(c - 1);
            }
            if i + 1 < n {
                push(c + 1);
            }
            if j > 0 {
                push(c - n);
            }
            if j + 1 < n {
                push(c + n);
            }
        }
        regions += 1;
    }
    (regions, boundary_positive)
}

/// Oval count of a compact curve: sign regions minus the outer one, checked
/// against the number of closed traced components.
pub fn count_ovals(p: &Poly, b: f64, cells: usize) -> Option<usize> {
    let (regions, outside) = sign_regions(p, b, cells);
    if !outside {
        return None;
    }
    let lines = trace_curve(p, b, cells).ok()?;
    if lines.iter().any(|l| !l.closed) || lines.len() != regions - 1 {
        return None;
    }
    Some(regions - 1)
}

/// A random quartic whose leading form is positive definite and whose
/// constant term is negative, so `Z(p)` is a nonempty compact curve. It is
/// scaled and moved so the curve spans radius about `radius` around `center`.
pub fn random_compact_quartic(seed: u64, center: [f64; 2], radius: f64) -> Option<Poly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms: Vec<(Vec<u32>, f64)> = exponents_up_to(2, 4)
        .into_iter()
        .map(|e| {
            let c: f64 = match e[0] + e[1] {
                2 => rng.random_range(-3.0..1.0),
                _ => rng.random_range(-1.0..1.0),
            };
            (e.to_vec(), c)
        })
        .collect();
    let quartic = |terms: &[(Vec<u32>, f64)], t: f64| -> f64 {
        let (c, s) = (t.cos(), t.sin());
        terms
            .iter()
            .filter(|(e, _)| e[0] + e[1] == 4)
            .map(|(e, k)| k * c.powi(e[0] as i32) * s.powi(e[1] as i32))
            .sum()
    };
    let lowest = (0..3600)
        .map(|i| quartic(&terms, i as f64 * std::f64::consts::PI / 1800.0))
        .fold(f64::INFINITY, f64::min);
    let lift = (-lowest).max(0.0) + rng.random_range(0.05..0.3);
    for (e, c) in terms.iter_mut() {
        match (e[0], e[1]) {
            (4, 0) | (0, 4) => *c += lift,
            (2, 2) => *c += 2.0 * lift,
            (0, 0) => *c = -0.5 * c.abs() - 0.05,
            _ => {}
        }
    }
    let p = Poly::new(2, terms).ok()?;
    let lines = trace_curve(&p, 12.0, 600).ok()?;
    if lines.is_empty() || lines.iter().any(|l| !l.closed) {
        return None;
    }
    let rho = lines
        .iter()
        .flat_map(|l| &l.points)
        .map(|q| q[0].hypot(q[1]))
        .fold(0.0, f64::max);
    let s = rho / radius;
    let a = Matrix::from_rows(&[vec![s, 0.0], vec![0.0, s]]);
    let out = p
        .compose_affine(&a, &[-s * center[0], -s * center[1]])
        .ok()?;
    // Unit leading scale keeps residual tolerances comparable across draws.
    let top = out.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max);
    Some(out.scale(1.0 / top))
}

/// Rotation of the plane by `theta`.
pub fn rotation(theta: f64) -> Matrix {
    let (c, s) = (theta.cos(), theta.sin());
    Matrix::from_rows(&[vec![c, -s], vec![s, c]])
}

/// `a·b`, for building reducible test targets.
pub fn product(a: &Poly, b: &Poly) -> Poly {
    let mut acc: std::collections::BTreeMap<Vec<u32>, f64> = Default::default();
    for (ea, ca) in a.terms() {
        for (eb, cb) in b.terms() {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *acc.entry(e).or_default() += ca * cb;
        }
    }
    Poly::new(a.nvars(), acc.into_iter().filter(|(_, c)| *c != 0.0)).unwrap()
}
