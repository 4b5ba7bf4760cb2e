//! One-shot analyses and their JSON reports, shared by the CLI and the C API.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::distfield::{nearest, PointCloud, SearchOptions, Target};
use crate::error::{Error, Result};
use crate::hypersurface::{
    point_target_index, solve_critical_points, CriticalPoint, Domain, Flag, SolveDiagnostics,
    SolveOptions,
};
use crate::pointcloud::{enumerate_critical, CloudCritical, CloudOptions};
use crate::poly::Poly;
use crate::topology::{
    attachment_spheres, check_euler, morse_inequalities, IdentityVerdict, IndexCensus,
    MorseVerdict, Topology,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `X = Z(p)`, `Y = Z(q)`.
    HypersurfacePair,
    /// `X = ℝⁿ`, `Y = Z(q)`.
    AmbientBottleneck,
    /// `X = Z(p)`, `Y` finite.
    PointTarget,
    /// `X = ℝⁿ`, `Y` finite.
    PointCloud,
    /// `X` a single point, the trivial side of a duality check.
    PointDomain,
}

/// Names of built-in topologies for `X`, `Y` and `X∩Y`; see [`Topology::builtin`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xy: Option<String>,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<Poly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Poly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<PointCloud>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    /// Defaults to `dim X`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    /// Defaults to `128·n` per `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_box", rename = "box")]
    pub box_half: f64,
    #[serde(default)]
    pub topology: TopologyInputs,
}

fn default_tol() -> f64 {
    1e-9
}

fn default_box() -> f64 {
    10.0
}

impl Default for AnalyzeRequest {
    fn default() -> Self {
        AnalyzeRequest {
            surface: None,
            ambient: None,
            domain_point: None,
            target: None,
            cloud: None,
            point: None,
            k_max: None,
            starts: None,
            seed: 0,
            tol: default_tol(),
            box_half: default_box(),
            topology: TopologyInputs::default(),
        }
    }
}

impl AnalyzeRequest {
    /// Parses a request, or takes the `inputs` block of a full report.
    pub fn from_json(s: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::Invalid(format!("request JSON: {e}")))?;
        let inputs = match value.get("inputs") {
            Some(i) if value.get("mode").is_some() => i.clone(),
            _ => value,
        };
        serde_json::from_value(inputs).map_err(|e| Error::Invalid(format!("request JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveDiagnostics>,
    /// Subsets examined by the point-cloud enumeration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub cospherical: Vec<Vec<usize>>,
    /// Number of reported critical points carrying each flag.
    pub flags: BTreeMap<String, usize>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub euler_sum: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub euler: Option<IdentityVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub morse: Option<Vec<MorseVerdict>>,
    pub attachment_spheres: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub elapsed_ms: u64,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub mode: Mode,
    pub inputs: AnalyzeRequest,
    pub critical_points: Vec<CriticalPoint>,
    #[serde(default)]
    pub algebraic_only: Vec<CriticalPoint>,
    pub census: IndexCensus,
    pub diagnostics: Diagnostics,
    pub verdicts: Verdicts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("report JSON: {e}")))
    }

    /// 0 for a clean run, 2 when any degeneracy was flagged.
    pub fn exit_code(&self) -> i32 {
        if self.diagnostics.degenerate {
            2
        } else {
            0
        }
    }
}

fn parse_topology(name: &Option<String>) -> Result<Option<Topology>> {
    name.as_deref().map(Topology::builtin).transpose()
}

fn check_point(p: &[f64], n: usize, what: &str) -> Result<()> {
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::Invalid(format!(
            "{what} has a non-finite coordinate"
        )));
    }
    Ok(())
}

fn cloud_point(c: &CloudCritical) -> CriticalPoint {
    CriticalPoint {
        x: c.center.clone(),
        value: c.radius,
        witnesses: c.support_points.clone(),
        lambdas: c.lambdas.clone(),
        mu: None,
        sigmas: Vec::new(),
        k: c.k,
        iota: Some(c.iota),
        nondegenerate: true,
        residual: 0.0,
        validated: true,
        flags: Vec::new(),
    }
}

fn resolve(req: &AnalyzeRequest) -> Result<(Mode, Option<Domain>, Target, usize)> {
    let domains = [
        req.surface.is_some(),
        req.ambient.is_some(),
        req.domain_point.is_some(),
    ];
    if domains.iter().filter(|d| **d).count() != 1 {
        return Err(Error::Invalid(
            "exactly one of surface, ambient, domain_point is required".into(),
        ));
    }
    let targets = [
        req.target.is_some(),
        req.cloud.is_some(),
        req.point.is_some(),
    ];
    if targets.iter().filter(|t| **t).count() != 1 {
        return Err(Error::Invalid(
            "exactly one of target, cloud, point is required".into(),
        ));
    }
    if !(req.tol > 0.0) || !(req.box_half > 0.0) {
        return Err(Error::Invalid("tol and box must be positive".into()));
    }
    let target = match (&req.target, &req.cloud, &req.point) {
        (Some(q), _, _) => Target::Hypersurface(q.clone()),
        (_, Some(c), _) => Target::Cloud(c.clone()),
        (_, _, Some(p)) => Target::Cloud(PointCloud::new(p.len(), vec![p.clone()])?),
        _ => unreachable!("checked above"),
    };
    let n = target.dim();
    if let Some(p) = &req.surface {
        if p.nvars() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.nvars(),
            });
        }
        if p.degree() == 0 {
            return Err(Error::Invalid("surface polynomial is constant".into()));
        }
    }
    if let Some(a) = req.ambient {
        if a != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a,
            });
        }
    }
    if let Some(x) = &req.domain_point {
        check_point(x, n, "domain_point")?;
    }
    let finite = !matches!(target, Target::Hypersurface(_));
    let (mode, domain) = match (&req.surface, req.ambient, finite) {
        (Some(p), _, false) => (Mode::HypersurfacePair, Some(Domain::Surface(p.clone()))),
        (Some(p), _, true) => (Mode::PointTarget, Some(Domain::Surface(p.clone()))),
        (None, Some(_), false) => (Mode::AmbientBottleneck, Some(Domain::Ambient(n))),
        (None, Some(_), true) => (Mode::PointCloud, None),
        (None, None, _) => (Mode::PointDomain, None),
    };
    Ok((mode, domain, target, n))
}

/// Runs the analysis described by `req`. With `with_meta` the report carries
/// the elapsed time and thread count, which makes it non-reproducible.
pub fn analyze(req: &AnalyzeRequest, with_meta: bool) -> Result<AnalysisReport> {
    let started = Instant::now();
    let (mode, domain, target, n) = resolve(req)?;
    let topo_x = parse_topology(&req.topology.x)?;
    let topo_y = parse_topology(&req.topology.y)?;
    let topo_xy = parse_topology(&req.topology.xy)?;

    let mut inputs = req.clone();
    let search = SearchOptions {
        seed: req.seed,
        tol: req.tol,
        box_half: req.box_half,
        ..Default::default()
    };
    let mut diagnostics = Diagnostics::default();
    let (critical_points, algebraic_only) = match mode {
        Mode::HypersurfacePair | Mode::AmbientBottleneck | Mode::PointTarget => {
            let domain = domain.expect("set for these modes");
            let k_max = req.k_max.unwrap_or(domain.manifold_dim());
            inputs.k_max = Some(k_max);
            let opts = SolveOptions {
                starts: req.starts,
                seed: req.seed,
                tol: req.tol,
                search,
                ..Default::default()
            };
            inputs.starts = Some(opts.starts_for(n));
            let mut out = solve_critical_points(&domain, &target, k_max, &opts)?;
            if let (Mode::PointTarget, Some(p), Some(y)) = (mode, domain.poly(), &req.point) {
                for cp in out
                    .validated
                    .iter_mut()
                    .filter(|c| c.k == 0 && c.iota.is_some())
                {
                    match point_target_index(p, &cp.x, y) {
                        Ok(i) if Some(i) == cp.iota => {}
                        Ok(i) => {
                            cp.iota = Some(i);
                            cp.nondegenerate = false;
                            cp.flags.push(Flag::Degenerate);
                            cp.flags.sort();
                            cp.flags.dedup();
                        }
                        Err(Error::Focal(_)) => {
                            cp.iota = None;
                            cp.nondegenerate = false;
                            cp.flags.push(Flag::Focal);
                            cp.flags.sort();
                            cp.flags.dedup();
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            diagnostics.solve = Some(out.diagnostics);
            (out.validated, out.algebraic_only)
        }
        Mode::PointCloud => {
            let Target::Cloud(c) = &target else {
                unreachable!("finite target")
            };
            let a = enumerate_critical(c, &CloudOptions::default())?;
            diagnostics.candidates = Some(a.candidates);
            diagnostics.cospherical = a.cospherical.clone();
            (a.criticals.iter().map(cloud_point).collect(), Vec::new())
        }
        Mode::PointDomain => {
            let x = req.domain_point.clone().expect("set for this mode");
            let set = nearest(&target, &x, &search)?;
            let m = set.witnesses.len();
            let mut cp = CriticalPoint {
                x,
                value: set.radius,
                witnesses: set.witnesses,
                lambdas: vec![1.0 / m as f64; m],
                mu: None,
                sigmas: Vec::new(),
                k: 0,
                iota: Some(0),
                nondegenerate: true,
                residual: 0.0,
                validated: true,
                flags: Vec::new(),
            };
            if set.capped {
                cp.flags.push(Flag::Capped);
            }
            (vec![cp], Vec::new())
        }
    };

    for cp in &critical_points {
        for f in &cp.flags {
            let name = serde_json::to_value(f).expect("flag serializes");
            *diagnostics
                .flags
                .entry(name.as_str().unwrap_or_default().to_string())
                .or_default() += 1;
        }
    }
    if !algebraic_only.is_empty() {
        diagnostics
            .flags
            .insert("algebraic-only".into(), algebraic_only.len());
    }
    diagnostics.degenerate = critical_points
        .iter()
        .any(|c| !c.nondegenerate || c.flags.iter().any(|f| f.is_degeneracy()))
        || !diagnostics.cospherical.is_empty();

    let mut census = IndexCensus::from_points(&critical_points);
    if let Some(t) = &topo_x {
        census = census.with_x(t);
    }
    if let Some(t) = &topo_y {
        census = census.with_y(t);
    }
    if let Some(t) = &topo_xy {
        census = census.with_xy(t);
    }
    let verdicts = Verdicts {
        euler_sum: crate::topology::euler_sum(&census),
        euler: check_euler(&census).ok(),
        morse: morse_inequalities(&census).ok(),
        attachment_spheres: attachment_spheres(&census),
    };
    let meta = with_meta.then(|| Meta {
        version: env!("CARGO_PKG_VERSION").to_string(),
        elapsed_ms: started.elapsed().as_millis() as u64,
        threads: rayon::current_num_threads(),
    });
    Ok(AnalysisReport {
        mode,
        inputs,
        critical_points,
        algebraic_only,
        census,
        diagnostics,
        verdicts,
        meta,
    })
}
