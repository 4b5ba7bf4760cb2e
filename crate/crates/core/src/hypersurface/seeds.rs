//! Starting points for the critical-point systems.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Domain;
use crate::distfield::{
    local_feet, project_to_zero_set, random_unit, shoot_ray, substream, SearchOptions,
};
use crate::error::Result;
use crate::numerics::{dist, norm, Matrix};
use crate::poly::Poly;
use crate::sample::{trace_curve, Polyline};

/// An approximate critical point with `k+1` approximate witnesses.
#[derive(Clone, Debug)]
pub(crate) struct Seed {
    pub x: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
}

impl Seed {
    pub fn k(&self) -> usize {
        self.ys.len() - 1
    }
}

/// A random point of `X`, or of the box in ambient mode.
pub(crate) fn random_point(
    domain: &Domain,
    rng: &mut ChaCha8Rng,
    box_half: f64,
) -> Option<Vec<f64>> {
    let n = domain.dim();
    let b = box_half;
    let start: Vec<f64> = (0..n).map(|_| rng.random_range(-b..b)).collect();
    match domain {
        Domain::Ambient(_) => Some(start),
        Domain::Surface(p) => {
            let d = random_unit(n, rng);
            let t_max = 2.0 * b * (n as f64).sqrt();
            let hit = shoot_ray(p, &start, &d, t_max, 128)
                .or_else(|| project_to_zero_set(p, &start, 1e-13))?;
            hit.iter().all(|c| c.abs() <= b).then_some(hit)
        }
    }
}

/// Random seeds for `Y = Z(q)`: a random `x` together with its `k+1` closest
/// local feet.
pub(crate) fn random_seed(
    domain: &Domain,
    q: &Poly,
    k: usize,
    seed: u64,
    index: u64,
    box_half: f64,
    feet_starts: usize,
) -> Option<Seed> {
    let mut rng = substream(seed, index);
    let x = random_point(domain, &mut rng, box_half)?;
    let opts = SearchOptions {
        starts: Some(feet_starts),
        seed: rng.random(),
        box_half,
        ..Default::default()
    };
    let (feet, _, _) = local_feet(q, &x, &opts, &[]).ok()?;
    if feet.len() < k + 1 {
        return None;
    }
    Some(Seed {
        x,
        ys: feet[..k + 1].to_vec(),
    })
}

/// Samples of a planar curve with the grid spacing used to trace it.
pub(crate) struct Samples {
    pub points: Vec<[f64; 2]>,
    pub spacing: f64,
}

impl Samples {
    pub fn trace(q: &Poly, box_half: f64, cells: usize) -> Result<Samples> {
        let (lines, spacing) = trace_tight(q, box_half, cells)?;
        Ok(Samples {
            points: lines.into_iter().flat_map(|l| l.points).collect(),
            spacing,
        })
    }

    pub fn nearest(&self, x: &[f64]) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, s)| (i, dist(s, x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// The `count` samples closest to `x`, each at least `gap` apart.
    pub fn near(&self, x: &[f64], count: usize, gap: f64) -> Vec<Vec<f64>> {
        let mut all: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, s)| (dist(s, x), i))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut out: Vec<Vec<f64>> = Vec::new();
        for (_, i) in all {
            let s = self.points[i].to_vec();
            if out.iter().all(|o| dist(o, &s) > gap) {
                out.push(s);
                if out.len() == count {
                    break;
                }
            }
        }
        out
    }

    fn point(&self, i: usize) -> Vec<f64> {
        self.points[i].to_vec()
    }
}

/// Traces `Z(p)` over the search box, then again over a padded square around
/// what was found so that small curves get the full grid resolution. Returns
/// the polylines and the grid spacing used.
pub(crate) fn trace_tight(p: &Poly, box_half: f64, cells: usize) -> Result<(Vec<Polyline>, f64)> {
    let coarse = trace_curve(p, box_half, cells)?;
    let h = 2.0 * box_half / cells as f64;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for q in coarse.iter().flat_map(|l| &l.points) {
        for d in 0..2 {
            lo[d] = lo[d].min(q[d]);
            hi[d] = hi[d].max(q[d]);
        }
    }
    if coarse.is_empty() {
        return Ok((coarse, h));
    }
    let half = 0.5 * (hi[0] - lo[0]).max(hi[1] - lo[1]) + 2.0 * h;
    if half >= 0.5 * box_half {
        return Ok((coarse, h));
    }
    let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let zoomed = p.compose_affine(&Matrix::diag(&[half, half]), &c)?;
    let lines = trace_curve(&zoomed, 1.0, cells)?
        .into_iter()
        .map(|l| Polyline {
            points: l
                .points
                .iter()
                .map(|z| [c[0] + half * z[0], c[1] + half * z[1]])
                .collect(),
            closed: l.closed,
        })
        .collect();
    Ok((lines, 2.0 * half / cells as f64))
}

/// Seeds read off piecewise-linear approximations of planar `X` and `Y`.
///
/// On a curve `X`, every sample gives a `k = 0` seed (close pairs of extrema
/// are easily lost in the sampled distance) and jumps of the nearest sample of `Y` give `k = 1` seeds. In the plane the
/// same jumps across grid edges give `k = 1` seeds, and grid cells whose
/// corners see three separated samples give `k = 2` seeds.
pub(crate) fn planar_seeds(
    domain: &Domain,
    ys: &Samples,
    k_top: usize,
    box_half: f64,
    cells: usize,
) -> Result<Vec<Seed>> {
    if ys.points.is_empty() {
        return Ok(Vec::new());
    }
    let jump = 4.0 * ys.spacing;
    let mut seeds = Vec::new();
    match domain {
        Domain::Surface(p) => {
            for line in trace_tight(p, box_half, cells)?.0 {
                curve_seeds(&line, ys, k_top, jump, &mut seeds);
            }
        }
        Domain::Ambient(_) => {
            let g = (cells / 2).max(8);
            let h = 2.0 * box_half / g as f64;
            let node = |i: usize, j: usize| [-box_half + i as f64 * h, -box_half + j as f64 * h];
            let mut owner = vec![0usize; (g + 1) * (g + 1)];
            for j in 0..=g {
                for i in 0..=g {
                    owner[j * (g + 1) + i] = ys.nearest(&node(i, j)).map(|t| t.0).unwrap_or(0);
                }
            }
            let own = |i: usize, j: usize| owner[j * (g + 1) + i];
            let far = |a: usize, b: usize| dist(&ys.points[a], &ys.points[b]) > jump;
            if k_top >= 1 {
                for j in 0..=g {
                    for i in 0..=g {
                        for (i2, j2) in [(i + 1, j), (i, j + 1)] {
                            if i2 > g || j2 > g {
                                continue;
                            }
                            let (a, b) = (own(i, j), own(i2, j2));
                            if far(a, b) {
                                let (p0, p1) = (node(i, j), node(i2, j2));
                                seeds.push(Seed {
                                    x: vec![0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])],
                                    ys: vec![ys.point(a), ys.point(b)],
                                });
                            }
                        }
                    }
                }
            }
            if k_top >= 2 {
                for j in 0..g {
                    for i in 0..g {
                        let corners = [own(i, j), own(i + 1, j), own(i, j + 1), own(i + 1, j + 1)];
                        let mut picked: Vec<usize> = Vec::new();
                        for c in corners {
                            if picked.iter().all(|&o| far(o, c)) {
                                picked.push(c);
                            }
                        }
                        if picked.len() >= 3 {
                            let c = node(i, j);
                            seeds.push(Seed {
                                x: vec![c[0] + 0.5 * h, c[1] + 0.5 * h],
                                ys: picked[..3].iter().map(|&a| ys.point(a)).collect(),
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(seeds)
}

fn curve_seeds(line: &Polyline, ys: &Samples, k_top: usize, jump: f64, out: &mut Vec<Seed>) {
    let m = line.points.len();
    if m < 2 {
        return;
    }
    let near: Vec<(usize, f64)> = line
        .points
        .iter()
        .map(|x| ys.nearest(x).expect("nonempty"))
        .collect();
    let at = |j: usize| -> Vec<f64> { line.points[j].to_vec() };
    for j in 0..m {
        out.push(Seed {
            x: at(j),
            ys: vec![ys.point(near[j].0)],
        });
        let next = if line.closed {
            (j + 1) % m
        } else if j + 1 == m {
            continue;
        } else {
            j + 1
        };
        if k_top >= 1 {
            let (a, b) = (near[j].0, near[next].0);
            if dist(&ys.points[a], &ys.points[b]) > jump {
                let mid: Vec<f64> = at(j)
                    .iter()
                    .zip(&at(next))
                    .map(|(u, v)| 0.5 * (u + v))
                    .collect();
                out.push(Seed {
                    x: mid,
                    ys: vec![ys.point(a), ys.point(b)],
                });
            }
        }
    }
}

/// Length scale used for relative tolerances at `x`.
pub(crate) fn scale(x: &[f64]) -> f64 {
    1.0 + norm(x)
}
