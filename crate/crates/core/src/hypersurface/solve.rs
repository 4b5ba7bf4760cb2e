//! Multistart Newton on the critical systems, followed by global validation
//! and classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seeds::{planar_seeds, random_point, random_seed, scale, Samples, Seed};
use super::system::{assemble_critical_system, CriticalSystem};
use super::{classify, CriticalPoint, Domain, Flag};
use crate::distfield::{
    lex_cmp, nearest_points_cloud, nearest_points_seeded, polish_foot, project_to_zero_set,
    substream, SearchOptions, Target,
};
use crate::error::{Error, Result};
use crate::numerics::{barycentric_zero, dist, dot, newton_iterate, norm, sub, NewtonOptions};
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Random starts per `k`; `None` means `128·n`.
    pub starts: Option<usize>,
    pub seed: u64,
    /// Residual accepted as a solution.
    pub tol: f64,
    /// Nearest-point search used for validation.
    pub search: SearchOptions,
    /// Tracing grid for planar seeding; 0 disables it.
    pub planar_grid: usize,
    /// Local-feet starts when building a random seed.
    pub feet_starts: usize,
    pub lambda_min: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            starts: None,
            seed: 0,
            tol: 1e-9,
            search: SearchOptions::default(),
            planar_grid: 256,
            feet_starts: 16,
            lambda_min: 1e-6,
        }
    }
}

impl SolveOptions {
    pub fn starts_for(&self, n: usize) -> usize {
        self.starts.unwrap_or(128 * n)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KStats {
    pub k: usize,
    pub seeds: usize,
    pub converged: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub seeds: usize,
    pub converged: usize,
    pub distinct: usize,
    pub validated: usize,
    pub algebraic_only: usize,
    /// Solutions with a clearly negative `λᵢ`.
    pub discarded_negative: usize,
    /// Solutions re-solved with one witness fewer after a vanishing `λᵢ`.
    pub demoted: usize,
    pub per_k: Vec<KStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    /// Globally validated and classified, sorted by value then `x`.
    pub validated: Vec<CriticalPoint>,
    pub algebraic_only: Vec<CriticalPoint>,
    pub diagnostics: SolveDiagnostics,
}

impl SolveOutcome {
    pub fn clean(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.validated.iter().filter(|c| c.is_clean())
    }

    pub fn has_degeneracy(&self) -> bool {
        self.validated
            .iter()
            .any(|c| c.flags.iter().any(|f| f.is_degeneracy()) || !c.nondegenerate)
    }
}

#[derive(Clone, Debug)]
struct Raw {
    x: Vec<f64>,
    ys: Vec<Vec<f64>>,
    lambdas: Vec<f64>,
    mu: Option<f64>,
    sigmas: Vec<f64>,
    r: f64,
    residual: f64,
    demoted: bool,
}

impl Raw {
    fn k(&self) -> usize {
        self.ys.len() - 1
    }
}

enum Attempt {
    Solved(Raw),
    NegativeLambda,
    Failed,
}

struct Ctx<'a> {
    domain: &'a Domain,
    target: &'a Target,
    opts: &'a SolveOptions,
    newton: NewtonOptions,
}

impl<'a> Ctx<'a> {
    fn system(&self, ys: &[Vec<f64>]) -> Result<CriticalSystem<'a>> {
        match self.target {
            Target::Hypersurface(q) => {
                assemble_critical_system(self.domain.poly(), q, ys.len() - 1)
            }
            Target::Cloud(_) => {
                CriticalSystem::with_fixed_witnesses(self.domain.poly(), ys.to_vec())
            }
        }
    }

    fn free_target(&self) -> Option<&'a Poly> {
        match self.target {
            Target::Hypersurface(q) => Some(q),
            Target::Cloud(_) => None,
        }
    }

    fn initial_guess(&self, sys: &CriticalSystem, seed: &Seed) -> Option<Vec<f64>> {
        let x = match self.domain.poly() {
            Some(p) => project_to_zero_set(p, &seed.x, 1e-13)?,
            None => seed.x.clone(),
        };
        let ys: Vec<Vec<f64>> = match self.free_target() {
            Some(q) => seed
                .ys
                .iter()
                .map(|y| {
                    polish_foot(q, &x, y, self.opts.tol)
                        .or_else(|| project_to_zero_set(q, y, 1e-13))
                })
                .collect::<Option<_>>()?,
            None => seed.ys.clone(),
        };
        let s = scale(&x);
        for i in 0..ys.len() {
            for j in 0..i {
                if dist(&ys[i], &ys[j]) <= 1e-6 * s {
                    return None;
                }
            }
        }
        let r = ys.iter().map(|y| dist(&x, y)).sum::<f64>() / ys.len() as f64;
        if !(r > 0.0) {
            return None;
        }
        let normal = match self.domain.poly() {
            Some(p) => {
                let g = p.grad(&x).ok()?;
                let l = norm(&g);
                if l < 1e-12 {
                    return None;
                }
                Some(g.into_iter().map(|c| c / l).collect::<Vec<f64>>())
            }
            None => None,
        };
        let vertices: Vec<Vec<f64>> = ys
            .iter()
            .map(|y| {
                let u: Vec<f64> = sub(&x, y).iter().map(|c| c / r).collect();
                match &normal {
                    Some(nu) => {
                        let t = dot(&u, nu);
                        u.iter().zip(nu).map(|(a, b)| a - t * b).collect()
                    }
                    None => u,
                }
            })
            .collect();
        let mut lambdas: Vec<f64> = barycentric_zero(&vertices, 1e-7)
            .lambdas
            .iter()
            .map(|l| l.max(0.0))
            .collect();
        let total: f64 = lambdas.iter().sum();
        if total > 1e-12 {
            lambdas.iter_mut().for_each(|l| *l /= total);
        } else {
            lambdas = vec![1.0 / ys.len() as f64; ys.len()];
        }
        let sigmas: Vec<f64> = match self.free_target() {
            Some(q) => ys
                .iter()
                .map(|y| {
                    let g = q.grad(y).unwrap_or_else(|_| vec![0.0; y.len()]);
                    let gg = dot(&g, &g);
                    if gg > 0.0 {
                        dot(&sub(&x, y), &g) / gg
                    } else {
                        0.0
                    }
                })
                .collect(),
            None => Vec::new(),
        };
        let mu = match self.domain.poly() {
            Some(p) => {
                let g = p.grad(&x).ok()?;
                let mut rest = x.clone();
                for (l, y) in lambdas.iter().zip(&ys) {
                    for (a, b) in rest.iter_mut().zip(y) {
                        *a -= l * b;
                    }
                }
                dot(&g, &rest) / dot(&g, &g)
            }
            None => 0.0,
        };
        Some(sys.pack(&x, &ys, &lambdas, mu, &sigmas, r))
    }

    fn solve_seed(&self, seed: &Seed, allow_demotion: bool) -> Attempt {
        let Ok(sys) = self.system(&seed.ys) else {
            return Attempt::Failed;
        };
        let Some(z0) = self.initial_guess(&sys, seed) else {
            return Attempt::Failed;
        };
        let Ok((sol, _)) = newton_iterate(&sys, &z0, &self.newton) else {
            return Attempt::Failed;
        };
        if !(sol.residual <= self.opts.tol) || sol.z.iter().any(|v| !v.is_finite()) {
            return Attempt::Failed;
        }
        let z = &sol.z;
        let l = &sys.layout;
        let n = l.n;
        let m = l.m();
        let x = z[..n].to_vec();
        if x.iter().any(|c| c.abs() > self.opts.search.box_half) {
            return Attempt::Failed;
        }
        let ys: Vec<Vec<f64>> = (0..m).map(|i| sys.witness(z, i).to_vec()).collect();
        let s = scale(&x);
        let r = z[l.r()].abs();
        if r <= 1e-9 * s {
            return Attempt::Failed;
        }
        for i in 0..m {
            for j in 0..i {
                if dist(&ys[i], &ys[j]) <= 1e-6 * s {
                    return Attempt::Failed;
                }
            }
        }
        let lambdas: Vec<f64> = (0..m).map(|i| z[l.lambda(i)]).collect();
        if lambdas.iter().any(|&v| v < -self.opts.lambda_min) {
            return Attempt::NegativeLambda;
        }
        let raw = Raw {
            sigmas: if l.free_witnesses {
                (0..m).map(|i| z[l.sigma(i)]).collect()
            } else {
                Vec::new()
            },
            mu: l.mu().map(|i| z[i]),
            x,
            ys,
            lambdas,
            r,
            residual: sol.residual,
            demoted: false,
        };
        let weakest = (0..m)
            .min_by(|&a, &b| raw.lambdas[a].total_cmp(&raw.lambdas[b]))
            .expect("m ≥ 1");
        if allow_demotion && m > 1 && raw.lambdas[weakest] <= self.opts.lambda_min {
            let reduced = Seed {
                x: raw.x.clone(),
                ys: raw
                    .ys
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != weakest)
                    .map(|(_, y)| y.clone())
                    .collect(),
            };
            if let Attempt::Solved(mut lower) = self.solve_seed(&reduced, true) {
                if lower.lambdas.iter().all(|&v| v > self.opts.lambda_min) {
                    lower.demoted = true;
                    return Attempt::Solved(lower);
                }
            }
        }
        Attempt::Solved(raw)
    }
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    dist(a, b) <= 1e-6 * scale(a)
}

enum Verdict {
    Valid { capped: bool },
    Rejected,
}

fn validate(ctx: &Ctx, raw: &Raw, samples: Option<&Samples>) -> Verdict {
    let search = &ctx.opts.search;
    let set = match ctx.target {
        Target::Hypersurface(q) => {
            let mut extra = raw.ys.clone();
            if let Some(s) = samples {
                extra.extend(s.near(&raw.x, 8, s.spacing));
            }
            nearest_points_seeded(q, &raw.x, search, &extra)
        }
        Target::Cloud(c) => nearest_points_cloud(c, &raw.x, search),
    };
    let Ok(set) = set else {
        return Verdict::Rejected;
    };
    let s = scale(&raw.x);
    if set.radius < raw.r * (1.0 - search.accept_band) - search.tol {
        return Verdict::Rejected;
    }
    let match_tol = 1e-5 * s;
    if !raw
        .ys
        .iter()
        .all(|y| set.witnesses.iter().any(|w| dist(w, y) <= match_tol))
    {
        return Verdict::Rejected;
    }
    if set.capped {
        return Verdict::Valid { capped: true };
    }
    if set.witnesses.len() != raw.ys.len() {
        return Verdict::Rejected;
    }
    Verdict::Valid { capped: false }
}

fn to_point(raw: &Raw, validated: bool) -> CriticalPoint {
    let mut order: Vec<usize> = (0..raw.ys.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&raw.ys[a], &raw.ys[b]));
    CriticalPoint {
        x: raw.x.clone(),
        value: raw.r,
        witnesses: order.iter().map(|&i| raw.ys[i].clone()).collect(),
        lambdas: order.iter().map(|&i| raw.lambdas[i]).collect(),
        mu: raw.mu,
        sigmas: if raw.sigmas.is_empty() {
            Vec::new()
        } else {
            order.iter().map(|&i| raw.sigmas[i]).collect()
        },
        k: raw.k(),
        iota: None,
        nondegenerate: false,
        residual: raw.residual,
        validated,
        flags: if validated {
            Vec::new()
        } else {
            vec![Flag::AlgebraicOnly]
        },
    }
}

fn canonical(a: &CriticalPoint, b: &CriticalPoint) -> std::cmp::Ordering {
    a.value
        .total_cmp(&b.value)
        .then_with(|| lex_cmp(&a.x, &b.x))
        .then(a.k.cmp(&b.k))
}

fn seeds_for(
    ctx: &Ctx,
    k_min: usize,
    k_top: usize,
    samples: Option<&Samples>,
) -> Result<Vec<Seed>> {
    let opts = ctx.opts;
    let n = ctx.domain.dim();
    let b = opts.search.box_half;
    let starts = opts.starts_for(n);
    let mut seeds: Vec<Seed> = Vec::new();
    match ctx.target {
        Target::Hypersurface(q) => {
            for k in k_min..=k_top {
                let stream = opts
                    .seed
                    .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k as u64 + 1));
                let batch: Vec<Option<Seed>> = (0..starts)
                    .into_par_iter()
                    .map(|i| random_seed(ctx.domain, q, k, stream, i as u64, b, opts.feet_starts))
                    .collect();
                seeds.extend(batch.into_iter().flatten());
            }
            if let Some(s) = samples {
                let planar = planar_seeds(ctx.domain, s, k_top, b, opts.planar_grid)?;
                seeds.extend(planar.into_iter().filter(|sd| sd.k() >= k_min));
            }
        }
        Target::Cloud(c) => {
            let mut subsets = Vec::new();
            for k in k_min..=k_top.min(c.len().saturating_sub(1)) {
                subsets.extend(crate::numerics::subsets_of(c.len(), k + 1));
            }
            let per = (starts / subsets.len().max(1)).max(4);
            for (si, idx) in subsets.iter().enumerate() {
                let ys: Vec<Vec<f64>> = idx.iter().map(|&i| c.points[i].clone()).collect();
                let centroid: Vec<f64> = (0..n)
                    .map(|d| ys.iter().map(|y| y[d]).sum::<f64>() / ys.len() as f64)
                    .collect();
                let mut xs = vec![centroid];
                let mut rng = substream(opts.seed, si as u64);
                for _ in 0..per {
                    if let Some(x) = random_point(ctx.domain, &mut rng, b) {
                        xs.push(x);
                    }
                }
                seeds.extend(xs.into_iter().map(|x| Seed { x, ys: ys.clone() }));
            }
        }
    }
    Ok(seeds)
}

/// Critical points of the distance to `target` restricted to `domain`, for
/// `k` up to `k_max` (clamped to `dim X`).
pub fn solve_critical_points(
    domain: &Domain,
    target: &Target,
    k_max: usize,
    opts: &SolveOptions,
) -> Result<SolveOutcome> {
    let n = domain.dim();
    if target.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: target.dim(),
        });
    }
    if n == 0 || n > crate::numerics::MAX_DIM {
        return Err(Error::TooLarge(n));
    }
    let ambient = matches!(domain, Domain::Ambient(_));
    if ambient && matches!(target, Target::Cloud(_)) {
        return Err(Error::Precondition(
            "critical points of the distance to a point cloud in ℝⁿ are enumerated combinatorially"
                .into(),
        ));
    }
    if let Target::Cloud(c) = target {
        if c.is_empty() {
            return Err(Error::Invalid("empty point cloud".into()));
        }
    }
    let k_min = usize::from(ambient);
    let k_top = k_max.min(domain.manifold_dim()).min(n);
    let ctx = Ctx {
        domain,
        target,
        opts,
        newton: NewtonOptions {
            max_iter: 60,
            damping: 1.0,
            tol: opts.tol * 1e-2,
            regularization: Some(1e-10),
        },
    };
    let mut diagnostics = SolveDiagnostics::default();
    if k_top < k_min {
        return Ok(SolveOutcome {
            validated: Vec::new(),
            algebraic_only: Vec::new(),
            diagnostics,
        });
    }

    let samples = match target {
        Target::Hypersurface(q) if n == 2 && opts.planar_grid > 0 => {
            Some(Samples::trace(q, opts.search.box_half, opts.planar_grid)?)
        }
        _ => None,
    };
    let seeds = seeds_for(&ctx, k_min, k_top, samples.as_ref())?;
    diagnostics.seeds = seeds.len();
    let attempts: Vec<Attempt> = seeds.par_iter().map(|s| ctx.solve_seed(s, true)).collect();

    let mut per_k: Vec<KStats> = (k_min..=k_top)
        .map(|k| KStats {
            k,
            ..Default::default()
        })
        .collect();
    for s in &seeds {
        per_k[s.k() - k_min].seeds += 1;
    }
    let mut distinct: Vec<Raw> = Vec::new();
    for (s, a) in seeds.iter().zip(attempts) {
        match a {
            Attempt::Solved(raw) => {
                diagnostics.converged += 1;
                per_k[s.k() - k_min].converged += 1;
                if raw.demoted {
                    diagnostics.demoted += 1;
                }
                if raw.k() < k_min {
                    continue;
                }
                if !distinct
                    .iter()
                    .any(|d| d.k() == raw.k() && same_point(&d.x, &raw.x))
                {
                    distinct.push(raw);
                }
            }
            Attempt::NegativeLambda => diagnostics.discarded_negative += 1,
            Attempt::Failed => {}
        }
    }
    diagnostics.per_k = per_k;
    diagnostics.distinct = distinct.len();

    let verdicts: Vec<Verdict> = distinct
        .par_iter()
        .map(|raw| validate(&ctx, raw, samples.as_ref()))
        .collect();
    let mut validated: Vec<CriticalPoint> = Vec::new();
    let mut algebraic: Vec<CriticalPoint> = Vec::new();
    for (raw, v) in distinct.iter().zip(verdicts) {
        match v {
            Verdict::Valid { capped } => {
                let mut cp = to_point(raw, true);
                if capped {
                    cp.add_flag(Flag::Capped);
                }
                validated.push(cp);
            }
            Verdict::Rejected => algebraic.push(to_point(raw, false)),
        }
    }
    // A capped point can be reached from several k; keep the lowest.
    validated.sort_by(|a, b| a.k.cmp(&b.k).then_with(|| canonical(a, b)));
    let mut kept: Vec<CriticalPoint> = Vec::new();
    for cp in validated {
        if !kept.iter().any(|c| same_point(&c.x, &cp.x)) {
            kept.push(cp);
        }
    }
    let mut classified: Vec<CriticalPoint> = kept
        .par_iter()
        .map(|cp| {
            let mut out = classify(domain, target, cp)?;
            if cp.has_flag(Flag::Capped) {
                out.add_flag(Flag::Capped);
                out.nondegenerate = false;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    classified.sort_by(canonical);
    algebraic.sort_by(canonical);
    diagnostics.validated = classified.len();
    diagnostics.algebraic_only = algebraic.len();
    Ok(SolveOutcome {
        validated: classified,
        algebraic_only: algebraic,
        diagnostics,
    })
}

/// Bottleneck-type critical points of the distance to `Z(q)` in `ℝⁿ`,
/// for `k = 1..=k`.
pub fn bottlenecks(q: &Poly, k: usize, opts: &SolveOptions) -> Result<SolveOutcome> {
    solve_critical_points(
        &Domain::Ambient(q.nvars()),
        &Target::Hypersurface(q.clone()),
        k,
        opts,
    )
}
