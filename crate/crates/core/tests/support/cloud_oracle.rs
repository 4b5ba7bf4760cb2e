//! Grid-and-refine detection of the critical points of the distance to a
//! finite set, written without the library's circumsphere machinery.
//!
//! A node is flagged when the ε-nearest unit vectors nearly contain the
//! origin in their hull: `‖min-norm‖·dist ≤ h√n`. Within `δ` of a critical
//! point of radius `r` that score is at most `δ(r+δ)/(r−δ)`, so the nearest
//! lattice node is always flagged and its half-step neighbours contain the
//! nearest node of the next level. A grid with step `1e-3` of the box is
//! reached by halving; refinement continues to about `1e-6` of the box so
//! near misses (a circumcenter just outside its simplex) drop out.

use std::collections::HashSet;

#[derive(Clone, Debug)]
pub struct OracleCritical {
    pub center: Vec<f64>,
    pub k: usize,
    pub radius: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting; `None` when nearly singular.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot = &top[col];
        for (i, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            for (v, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *v -= f * p;
            }
            b[col + 1 + i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn combos(m: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == size {
        out.push(cur.clone());
        return;
    }
    for i in start..m {
        cur.push(i);
        combos(m, size, i + 1, cur, out);
        cur.pop();
    }
}

/// Norm of the point of `co(vs)` closest to the origin, by trying every
/// affinely independent face of at most `n+1` vertices.
pub fn hull_min_norm(vs: &[Vec<f64>]) -> f64 {
    let n = vs[0].len();
    let mut best = f64::INFINITY;
    for size in 1..=vs.len().min(n + 1) {
        let mut faces = Vec::new();
        combos(vs.len(), size, 0, &mut Vec::new(), &mut faces);
        for face in faces {
            let v0 = &vs[face[0]];
            let edges: Vec<Vec<f64>> = face[1..]
                .iter()
                .map(|&i| vs[i].iter().zip(v0).map(|(a, b)| a - b).collect())
                .collect();
            let t = if edges.is_empty() {
                Some(vec![])
            } else {
                let a = edges
                    .iter()
                    .map(|e| edges.iter().map(|f| dot(e, f)).collect())
                    .collect();
                let b = edges.iter().map(|e| -dot(e, v0)).collect();
                gauss(a, b)
            };
            let Some(t) = t else { continue };
            let w0 = 1.0 - t.iter().sum::<f64>();
            if w0 < -1e-12 || t.iter().any(|&w| w < -1e-12) {
                continue;
            }
            let mut p = v0.clone();
            for (e, w) in edges.iter().zip(&t) {
                for (pi, ei) in p.iter_mut().zip(e) {
                    *pi += w * ei;
                }
            }
            best = best.min(dot(&p, &p).sqrt());
        }
    }
    best
}

struct Eval {
    score: f64,
    flagged: bool,
    dist: f64,
    active: usize,
}

fn evaluate(points: &[Vec<f64>], x: &[f64], h: f64) -> Eval {
    let n = x.len();
    let ds: Vec<f64> = points.iter().map(|p| dist(x, p)).collect();
    let d = ds.iter().copied().fold(f64::INFINITY, f64::min);
    let tau = 1.5 * h * (n as f64).sqrt();
    if d <= 1e-300 {
        return Eval {
            score: 0.0,
            flagged: true,
            dist: 0.0,
            active: 1,
        };
    }
    let units: Vec<Vec<f64>> = points
        .iter()
        .zip(&ds)
        .filter(|(_, &di)| di <= d + tau)
        .map(|(p, &di)| x.iter().zip(p).map(|(a, b)| (a - b) / di).collect())
        .collect();
    let m = hull_min_norm(&units);
    Eval {
        score: m * d,
        flagged: m * d <= h * (n as f64).sqrt(),
        dist: d,
        active: units.len(),
    }
}

type Node = Vec<i64>;

/// Critical points of `dist_Y` at positive radius, plus the points of `Y`
/// themselves (the zeros of the distance, `k = 0`).
pub fn brute_force_criticals(points: &[Vec<f64>]) -> Vec<OracleCritical> {
    let n = points[0].len();
    let lo: Vec<f64> = (0..n)
        .map(|i| points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..n)
        .map(|i| {
            points
                .iter()
                .map(|p| p[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
    let levels = 14u32;
    let coarse = 64i64;
    let unit = 1i64 << levels;
    let h_fine = extent / (coarse * unit) as f64;
    let origin: Vec<f64> = lo
        .iter()
        .map(|v| v - 2.0 * extent / coarse as f64)
        .collect();
    let pos = |node: &Node| -> Vec<f64> {
        node.iter()
            .zip(&origin)
            .map(|(&c, o)| o + c as f64 * h_fine)
            .collect()
    };

    let span = coarse + 4;
    let mut nodes: Vec<Node> = vec![vec![]];
    for _ in 0..n {
        nodes = nodes
            .into_iter()
            .flat_map(|v| {
                (0..=span).map(move |i| {
                    let mut w = v.clone();
                    w.push(i * unit);
                    w
                })
            })
            .collect();
    }

    let mut step = unit;
    let mut flagged: Vec<Node>;
    loop {
        let h = step as f64 * h_fine;
        flagged = nodes
            .iter()
            .filter(|v| evaluate(points, &pos(v), h).flagged)
            .cloned()
            .collect();
        if step == 1 {
            break;
        }
        step /= 2;
        let mut next: HashSet<Node> = HashSet::new();
        for s in &flagged {
            next.extend(neighbours(s, step, 1));
        }
        nodes = next.into_iter().collect();
        nodes.sort();
    }

    // Connected components of the finest flagged nodes are critical points.
    let h = h_fine;
    let set: HashSet<Node> = flagged.iter().cloned().collect();
    let mut seen: HashSet<Node> = HashSet::new();
    let mut out: Vec<OracleCritical> = points
        .iter()
        .map(|p| OracleCritical {
            center: p.clone(),
            k: 0,
            radius: 0.0,
        })
        .collect();
    for s in &flagged {
        if !seen.insert(s.clone()) {
            continue;
        }
        let mut stack = vec![s.clone()];
        let mut best: Option<(Vec<f64>, Eval)> = None;
        while let Some(v) = stack.pop() {
            let x = pos(&v);
            let e = evaluate(points, &x, h);
            if best.as_ref().is_none_or(|(_, b)| e.score < b.score) {
                best = Some((x, e));
            }
            for w in neighbours(&v, 1, 1) {
                if set.contains(&w) && seen.insert(w.clone()) {
                    stack.push(w);
                }
            }
        }
        let (x, e) = best.unwrap();
        if e.dist <= 4.0 * h * (n as f64).sqrt() {
            continue;
        }
        out.push(OracleCritical {
            center: x,
            k: e.active - 1,
            radius: e.dist,
        });
    }
    out
}

fn neighbours(v: &Node, step: i64, reach: i64) -> impl Iterator<Item = Node> + '_ {
    let n = v.len();
    let width = (2 * reach + 1) as usize;
    (0..width.pow(n as u32)).map(move |mut code| {
        let mut w = v.clone();
        for c in w.iter_mut() {
            let off = (code % width) as i64 - reach;
            code /= width;
            *c += off * step;
        }
        w
    })
}
