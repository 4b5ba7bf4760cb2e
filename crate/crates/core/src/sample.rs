//! Marching-squares tracing of planar zero sets `Z(p) ⊂ [−b, b]²`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Piecewise-linear approximation of one component of a planar curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    /// The chain returns to its start instead of leaving the box.
    pub closed: bool,
}

/// Traces `Z(p)` on a `cells × cells` grid over `[−b, b]²`.
pub fn trace_curve(p: &Poly, box_half: f64, cells: usize) -> Result<Vec<Polyline>> {
    if p.nvars() != 2 {
        return Err(Error::Precondition(format!(
            "curve tracing needs 2 variables, got {}",
            p.nvars()
        )));
    }
    if cells == 0 || !(box_half > 0.0) {
        return Err(Error::Invalid("tracing grid must be nonempty".into()));
    }
    let n = cells;
    let h = 2.0 * box_half / n as f64;
    let coord = |i: usize| -box_half + i as f64 * h;
    let mut vals = vec![0.0; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            let v = p.eval(&[coord(i), coord(j)])?;
            // Exact zeros are nudged so every node has a sign.
            vals[j * (n + 1) + i] = if v == 0.0 { f64::MIN_POSITIVE } else { v };
        }
    }
    let val = |i: usize, j: usize| vals[j * (n + 1) + i];
    let h_edge = |i: usize, j: usize| 2 * (j * (n + 1) + i);
    let v_edge = |i: usize, j: usize| 2 * (j * (n + 1) + i) + 1;

    let mut crossing: BTreeMap<usize, [f64; 2]> = BTreeMap::new();
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let cross = |a: f64, b: f64| (a > 0.0) != (b > 0.0);
    let interp = |a: f64, b: f64| a / (a - b);

    for j in 0..=n {
        for i in 0..=n {
            if i < n && cross(val(i, j), val(i + 1, j)) {
                let t = interp(val(i, j), val(i + 1, j));
                crossing.insert(h_edge(i, j), [coord(i) + t * h, coord(j)]);
            }
            if j < n && cross(val(i, j), val(i, j + 1)) {
                let t = interp(val(i, j), val(i, j + 1));
                crossing.insert(v_edge(i, j), [coord(i), coord(j) + t * h]);
            }
        }
    }
    let mut link = |a: usize, b: usize| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for j in 0..n {
        for i in 0..n {
            let e = [
                h_edge(i, j),
                v_edge(i + 1, j),
                h_edge(i, j + 1),
                v_edge(i, j),
            ];
            let hit: Vec<usize> = e
                .iter()
                .copied()
                .filter(|id| crossing.contains_key(id))
                .collect();
            match hit.len() {
                2 => link(hit[0], hit[1]),
                4 => {
                    let center = p.eval(&[coord(i) + 0.5 * h, coord(j) + 0.5 * h])?;
                    if (center > 0.0) == (val(i, j) > 0.0) {
                        link(e[0], e[1]);
                        link(e[2], e[3]);
                    } else {
                        link(e[3], e[0]);
                        link(e[1], e[2]);
                    }
                }
                _ => {}
            }
        }
    }

    let mut visited: BTreeMap<usize, bool> = crossing.keys().map(|&k| (k, false)).collect();
    let mut lines = Vec::new();
    let starts: Vec<usize> = adj
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(&k, _)| k)
        .chain(adj.keys().copied())
        .collect();
    for s in starts {
        if visited[&s] {
            continue;
        }
        let mut chain = vec![s];
        visited.insert(s, true);
        let mut cur = s;
        let closed = loop {
            match adj[&cur].iter().copied().find(|nb| !visited[nb]) {
                Some(nb) => {
                    visited.insert(nb, true);
                    chain.push(nb);
                    cur = nb;
                }
                None => break chain.len() > 2 && adj[&cur].contains(&s),
            }
        };
        lines.push(Polyline {
            points: chain.iter().map(|id| crossing[id]).collect(),
            closed,
        });
    }
    Ok(lines)
}
