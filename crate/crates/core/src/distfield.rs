//! Distance to a hypersurface `Z(q)` or a finite point set: nearest-point
//! sets, the distance itself and the Clarke subdifferential.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    barycentric_zero, dist, dot, newton, norm, orthonormal_complement, sub, BarycentricSolution,
    FnSystem, Matrix, NewtonOptions,
};
use crate::poly::Poly;

/// Finite target set `Y ⊂ ℝⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CloudFile")]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct CloudFile {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<CloudFile> for PointCloud {
    type Error = Error;

    fn try_from(f: CloudFile) -> Result<Self> {
        PointCloud::new(f.dim, f.points)
    }
}

impl PointCloud {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid(
                "point cloud dimension must be positive".into(),
            ));
        }
        if points.is_empty() {
            return Err(Error::Invalid("point cloud is empty".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Invalid(format!(
                    "points[{i}] has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::Invalid(format!(
                    "points[{i}] has a non-finite coordinate"
                )));
            }
        }
        Ok(PointCloud { dim, points })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("point cloud JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("point cloud serializes")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// What distances are measured to.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Hypersurface(Poly),
    Cloud(PointCloud),
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::Hypersurface(q) => q.nvars(),
            Target::Cloud(c) => c.dim,
        }
    }
}

/// Knobs of the multistart nearest-point search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Number of starts; `None` means `64·n`.
    pub starts: Option<usize>,
    pub seed: u64,
    /// Acceptance tolerance for `|q(y)|`, collinearity and equidistance.
    pub tol: f64,
    /// Maximum number of witnesses before the set is flagged; `None` means `n+1`.
    pub cap: Option<usize>,
    /// Feet closer than `dedup·(1+‖x‖)` are merged.
    pub dedup: f64,
    /// Feet with `‖x−y‖ ≤ (1+accept_band)·min` are witnesses.
    pub accept_band: f64,
    /// Half-width of the search box `[−b, b]ⁿ`.
    pub box_half: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            starts: None,
            seed: 0,
            tol: 1e-9,
            cap: None,
            dedup: 1e-6,
            accept_band: 1e-7,
            box_half: 10.0,
        }
    }
}

impl SearchOptions {
    pub fn starts_for(&self, n: usize) -> usize {
        self.starts.unwrap_or(64 * n).max(1)
    }

    pub fn cap_for(&self, n: usize) -> usize {
        self.cap.unwrap_or(n + 1)
    }
}

/// The witness set `B(x, r) ∩ Y` of a query point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestSet {
    pub x: Vec<f64>,
    pub radius: f64,
    pub witnesses: Vec<Vec<f64>>,
    pub tol: f64,
    pub capped: bool,
    /// Distinct local feet found by the search, before the distance band.
    pub local_feet: usize,
    pub starts: usize,
    pub converged: usize,
}

impl NearestSet {
    /// `m_Y(x)`, the number of witnesses.
    pub fn multiplicity(&self) -> usize {
        self.witnesses.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subdifferential {
    pub vertices: Vec<Vec<f64>>,
    pub projected: bool,
    pub tangent_basis: Option<Vec<Vec<f64>>>,
}

/// Substream seed for start `index`, independent of scheduling.
pub(crate) fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub(crate) fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let l = norm(&v);
        if l > 1e-12 {
            return v.into_iter().map(|c| c / l).collect();
        }
    }
}

/// Moves `y` onto `Z(q)` along the gradient; `None` if it does not settle.
pub(crate) fn project_to_zero_set(q: &Poly, y: &[f64], tol: f64) -> Option<Vec<f64>> {
    let mut y = y.to_vec();
    for _ in 0..60 {
        let v = q.eval(&y).ok()?;
        let g = q.grad(&y).ok()?;
        let gg = dot(&g, &g);
        if v.abs() <= tol * (1.0 + gg.sqrt()) {
            return Some(y);
        }
        if gg < 1e-24 || !v.is_finite() {
            return None;
        }
        // Newton step along the gradient, at most unit length.
        let len = v.abs() / gg.sqrt();
        let step = if len > 1.0 { v / gg / len } else { v / gg };
        for (yi, gi) in y.iter_mut().zip(&g) {
            *yi -= step * gi;
        }
    }
    None
}

/// First zero of `t ↦ q(x + t·d)` for `t` in `(0, t_max]`, by sampling and bisection.
pub(crate) fn shoot_ray(
    q: &Poly,
    x: &[f64],
    d: &[f64],
    t_max: f64,
    samples: usize,
) -> Option<Vec<f64>> {
    let at = |t: f64| -> Vec<f64> { x.iter().zip(d).map(|(a, b)| a + t * b).collect() };
    let f = |t: f64| q.eval(&at(t)).unwrap_or(f64::NAN);
    let mut t0 = 0.0;
    let mut f0 = f(0.0);
    for i in 1..=samples {
        let t1 = t_max * i as f64 / samples as f64;
        let f1 = f(t1);
        if f0 == 0.0 {
            return Some(at(t0));
        }
        if f0.signum() != f1.signum() {
            let (mut lo, mut hi, mut flo) = (t0, t1, f0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    return Some(at(mid));
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            return Some(at(0.5 * (lo + hi)));
        }
        t0 = t1;
        f0 = f1;
    }
    None
}

/// Polishes a foot with Newton on `{q(y) = 0, x − y − σ∇q(y) = 0}`.
pub(crate) fn polish_foot(q: &Poly, x: &[f64], y0: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = x.len();
    let g = q.grad(y0).ok()?;
    let gg = dot(&g, &g);
    if gg < 1e-24 {
        return None;
    }
    let sigma0 = dot(&sub(x, y0), &g) / gg;
    let mut z0 = y0.to_vec();
    z0.push(sigma0);
    let sys = FnSystem {
        dim: n + 1,
        f: |z: &[f64]| {
            let (y, s) = (&z[..n], z[n]);
            let g = q.grad(y).expect("dimension checked");
            let mut out = Vec::with_capacity(n + 1);
            out.push(q.eval(y).expect("dimension checked"));
            for i in 0..n {
                out.push(x[i] - y[i] - s * g[i]);
            }
            out
        },
        j: |z: &[f64]| {
            let (y, s) = (&z[..n], z[n]);
            let g = q.grad(y).expect("dimension checked");
            let h = q.hessian(y).expect("dimension checked");
            let mut m = Matrix::zeros(n + 1, n + 1);
            for j in 0..n {
                m[(0, j)] = g[j];
            }
            for i in 0..n {
                for j in 0..n {
                    m[(1 + i, j)] = -s * h[(i, j)] - if i == j { 1.0 } else { 0.0 };
                }
                m[(1 + i, n)] = -g[i];
            }
            m
        },
    };
    let opts = NewtonOptions {
        max_iter: 40,
        tol: tol * 1e-3,
        ..Default::default()
    };
    let sol = match newton(&sys, &z0, &opts) {
        Ok(s) => s,
        Err(_) => {
            // The descent may already sit at the foot to within `tol`.
            let r = norm(&crate::numerics::System::residual(&sys, &z0));
            if r <= tol {
                return Some(y0.to_vec());
            }
            return None;
        }
    };
    let y = sol.z[..n].to_vec();
    if dist(&y, y0) > 0.5 * (1.0 + dist(x, y0)) {
        return None;
    }
    Some(y)
}

/// Local minimization of `‖x − y‖` over `y ∈ Z(q)` starting from a point on `Z(q)`.
pub(crate) fn descend_foot(q: &Poly, x: &[f64], y_start: &[f64], tol: f64) -> Option<Vec<f64>> {
    let mut y = project_to_zero_set(q, y_start, 1e-13)?;
    let mut d = dist(x, &y);
    let mut alpha = 1.0;
    for _ in 0..400 {
        let g = q.grad(&y).ok()?;
        let gn = norm(&g);
        if gn < 1e-14 {
            return None;
        }
        let nu: Vec<f64> = g.iter().map(|c| c / gn).collect();
        let diff = sub(x, &y);
        let s = dot(&diff, &nu);
        let tangential: Vec<f64> = diff.iter().zip(&nu).map(|(a, b)| a - s * b).collect();
        let tn = norm(&tangential);
        if tn <= 1e-9 * (1.0 + d) {
            break;
        }
        let mut moved = false;
        while alpha > 1e-10 {
            let trial: Vec<f64> = y
                .iter()
                .zip(&tangential)
                .map(|(a, b)| a + alpha * b)
                .collect();
            if let Some(yt) = project_to_zero_set(q, &trial, 1e-13) {
                let dt = dist(x, &yt);
                if dt < d {
                    y = yt;
                    d = dt;
                    moved = true;
                    alpha = (alpha * 1.5).min(1.0);
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    polish_foot(q, x, &y, tol)
}

fn check_foot(q: &Poly, x: &[f64], y: &[f64], tol: f64) -> bool {
    let (Ok(v), Ok(g)) = (q.eval(y), q.grad(y)) else {
        return false;
    };
    let gn = norm(&g);
    if gn < 1e-12 || v.abs() > tol * (1.0 + gn) {
        return false;
    }
    let nu: Vec<f64> = g.iter().map(|c| c / gn).collect();
    let diff = sub(x, y);
    let s = dot(&diff, &nu);
    let perp = norm(
        &diff
            .iter()
            .zip(&nu)
            .map(|(a, b)| a - s * b)
            .collect::<Vec<_>>(),
    );
    perp <= tol * 10.0 * (1.0 + norm(&diff))
}

/// Candidate feet of `x` on `Z(q)` from the multistart search, plus any
/// extra starting points on or near `Z(q)`. Sorted by distance, deduplicated.
pub fn local_feet(
    q: &Poly,
    x: &[f64],
    opts: &SearchOptions,
    extra: &[Vec<f64>],
) -> Result<(Vec<Vec<f64>>, usize, usize)> {
    let n = q.nvars();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let starts = opts.starts_for(n);
    let b = opts.box_half;
    let t_max = 2.0 * b * (n as f64).sqrt() + norm(x);
    let results: Vec<Option<Vec<f64>>> = (0..starts + extra.len())
        .into_par_iter()
        .map(|i| {
            let y0 = if i < starts {
                let mut rng = substream(opts.seed, i as u64);
                let d = random_unit(n, &mut rng);
                match shoot_ray(q, x, &d, t_max, 256) {
                    Some(y) => y,
                    None => {
                        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-b..b)).collect();
                        project_to_zero_set(q, &p, 1e-13)?
                    }
                }
            } else {
                extra[i - starts].clone()
            };
            let y = descend_foot(q, x, &y0, opts.tol)?;
            check_foot(q, x, &y, opts.tol).then_some(y)
        })
        .collect();
    let converged = results.iter().filter(|r| r.is_some()).count();
    let mut feet: Vec<(f64, Vec<f64>)> = results
        .into_iter()
        .flatten()
        .map(|y| (dist(x, &y), y))
        .collect();
    feet.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));
    let radius_dedup = opts.dedup * (1.0 + norm(x));
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for (_, y) in feet {
        if distinct.iter().all(|d| dist(d, &y) > radius_dedup) {
            distinct.push(y);
        }
    }
    Ok((distinct, starts + extra.len(), converged))
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Global nearest-point set of `x` on `Z(q)` by multistart local projection.
pub fn nearest_points(q: &Poly, x: &[f64], opts: &SearchOptions) -> Result<NearestSet> {
    nearest_points_seeded(q, x, opts, &[])
}

/// As [`nearest_points`], with additional starting points for the search.
pub fn nearest_points_seeded(
    q: &Poly,
    x: &[f64],
    opts: &SearchOptions,
    extra: &[Vec<f64>],
) -> Result<NearestSet> {
    let n = q.nvars();
    let (feet, starts, converged) = local_feet(q, x, opts, extra)?;
    if feet.is_empty() {
        return Err(Error::OracleFailure {
            reason: if converged == 0 {
                "no start reached the zero set inside the search box".into()
            } else {
                "no start converged to a foot point".into()
            },
            starts,
            converged,
        });
    }
    let min = dist(x, &feet[0]);
    let band = (1.0 + opts.accept_band) * min + opts.tol;
    let mut witnesses: Vec<Vec<f64>> = feet
        .iter()
        .filter(|y| dist(x, y) <= band)
        .cloned()
        .collect();
    witnesses.sort_by(|a, b| lex_cmp(a, b));
    let cap = opts.cap_for(n);
    Ok(NearestSet {
        x: x.to_vec(),
        radius: min,
        capped: witnesses.len() > cap,
        witnesses,
        tol: opts.tol,
        local_feet: feet.len(),
        starts,
        converged,
    })
}

/// Exact nearest set for a finite target.
pub fn nearest_points_cloud(y: &PointCloud, x: &[f64], opts: &SearchOptions) -> Result<NearestSet> {
    if x.len() != y.dim {
        return Err(Error::DimensionMismatch {
            expected: y.dim,
            got: x.len(),
        });
    }
    let min = y
        .points
        .iter()
        .map(|p| dist(x, p))
        .fold(f64::INFINITY, f64::min);
    let band = (1.0 + opts.accept_band) * min + opts.tol;
    let mut witnesses: Vec<Vec<f64>> = y
        .points
        .iter()
        .filter(|p| dist(x, p) <= band)
        .cloned()
        .collect();
    witnesses.sort_by(|a, b| lex_cmp(a, b));
    Ok(NearestSet {
        x: x.to_vec(),
        radius: min,
        capped: witnesses.len() > opts.cap_for(y.dim),
        witnesses,
        tol: opts.tol,
        local_feet: y.len(),
        starts: 0,
        converged: y.len(),
    })
}

pub fn nearest(target: &Target, x: &[f64], opts: &SearchOptions) -> Result<NearestSet> {
    match target {
        Target::Hypersurface(q) => nearest_points(q, x, opts),
        Target::Cloud(c) => nearest_points_cloud(c, x, opts),
    }
}

/// `dist_Y(x)`.
pub fn distance(target: &Target, x: &[f64], opts: &SearchOptions) -> Result<f64> {
    nearest(target, x, opts).map(|s| s.radius)
}

/// Vertices `(x − yᵢ)/r` of `∂ₓ dist_Y`.
pub fn subdifferential(
    target: &Target,
    x: &[f64],
    opts: &SearchOptions,
) -> Result<Subdifferential> {
    let set = nearest(target, x, opts)?;
    subdifferential_of(&set)
}

pub fn subdifferential_of(set: &NearestSet) -> Result<Subdifferential> {
    if set.radius <= set.tol {
        return Err(Error::OnTarget(set.radius));
    }
    let vertices = set
        .witnesses
        .iter()
        .map(|y| {
            let d = sub(&set.x, y);
            let l = norm(&d);
            d.into_iter().map(|c| c / l).collect()
        })
        .collect();
    Ok(Subdifferential {
        vertices,
        projected: false,
        tangent_basis: None,
    })
}

/// Unit normal of `X = Z(p)` at `x`, after checking `x ∈ X` and regularity.
pub(crate) fn surface_normal(p: &Poly, x: &[f64], tol: f64) -> Result<Vec<f64>> {
    let v = p.eval(x)?;
    let g = p.grad(x)?;
    let gn = norm(&g);
    if gn < tol {
        return Err(Error::SingularSurfacePoint(gn));
    }
    if v.abs() > tol * (1.0 + gn) {
        return Err(Error::NotOnSurface(v.abs()));
    }
    Ok(g.into_iter().map(|c| c / gn).collect())
}

/// Projects a subdifferential onto `T_xX`.
pub fn project_subdifferential(
    p: &Poly,
    x: &[f64],
    sd: &Subdifferential,
    tol: f64,
) -> Result<Subdifferential> {
    let nu = surface_normal(p, x, tol)?;
    let vertices = sd
        .vertices
        .iter()
        .map(|v| {
            let s = dot(v, &nu);
            v.iter().zip(&nu).map(|(a, b)| a - s * b).collect()
        })
        .collect();
    let basis = orthonormal_complement(&[nu], x.len(), 1e-9)?;
    Ok(Subdifferential {
        vertices,
        projected: true,
        tangent_basis: Some(basis),
    })
}

/// `∂ₓ(dist_Y|_X)`: the ambient subdifferential projected onto `T_xX`.
pub fn subdifferential_restricted(
    p: &Poly,
    target: &Target,
    x: &[f64],
    opts: &SearchOptions,
) -> Result<Subdifferential> {
    surface_normal(p, x, opts.tol)?;
    let sd = subdifferential(target, x, opts)?;
    project_subdifferential(p, x, &sd, opts.tol)
}

/// Whether `0` lies in the (restricted) subdifferential at `x`. `p = None`
/// means `X = ℝⁿ`. `tol` is the barycentric feasibility tolerance.
pub fn is_critical(
    p: Option<&Poly>,
    target: &Target,
    x: &[f64],
    opts: &SearchOptions,
    tol: f64,
) -> Result<(bool, BarycentricSolution)> {
    let sd = match p {
        Some(p) => subdifferential_restricted(p, target, x, opts)?,
        None => subdifferential(target, x, opts)?,
    };
    let sol = barycentric_zero(&sd.vertices, tol);
    Ok((sol.feasible, sol))
}
