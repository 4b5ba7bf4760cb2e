use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use distmorse::distfield::PointCloud;
use distmorse::poly::{degree_bound, Poly};
use distmorse::report::{analyze, AnalysisReport, AnalyzeRequest, Mode, TopologyInputs};
use distmorse::sample::trace_curve;
use distmorse::topology::{check_duality, check_euler, morse_inequalities};

/// Critical points of distance functions between algebraic sets.
///
/// Exit status: 0 on a clean run, 2 when a degeneracy was flagged (or a
/// checked identity failed), 1 on errors.
#[derive(Parser)]
#[command(name = "distmorse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical points of dist_Y restricted to X.
    Analyze(Box<AnalyzeArgs>),
    /// Ambient critical points (k ≥ 1) of the distance to Z(q).
    Bottlenecks(BottleneckArgs),
    /// Smallest degree d(n, k, r) making the multijet map a submersion.
    DegreeBound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        r: u64,
    },
    /// Checks duality between an (X, Y) and a (Y, X) report, or the Euler
    /// identity and Morse inequalities of a single report.
    Verify {
        #[arg(long, requires = "report_yx")]
        report_xy: Option<PathBuf>,
        #[arg(long)]
        report_yx: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["report_xy", "report_yx"])]
        report: Option<PathBuf>,
    },
    /// CSV samples of X, Y and the critical points of a planar report.
    Plotdata {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Tracing grid resolution.
        #[arg(long, default_value_t = 400)]
        cells: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Half-width of the search box.
    #[arg(long = "box", default_value_t = 10.0)]
    box_half: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit timing and thread information so reports are reproducible.
    #[arg(long)]
    no_meta: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Rerun the inputs of an earlier report or a request file.
    #[arg(long, conflicts_with_all = ["surface", "ambient", "domain_point", "target", "cloud", "point"])]
    request: Option<PathBuf>,
    #[arg(long)]
    surface: Option<PathBuf>,
    /// Take X = ℝⁿ with n from the target.
    #[arg(long)]
    ambient: bool,
    /// Take X to be a single point, e.g. "3,0".
    #[arg(long, allow_hyphen_values = true)]
    domain_point: Option<String>,
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    cloud: Option<PathBuf>,
    /// Single target point, e.g. "3,0,0".
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Built-in topology of X: circle, sphere, point, torus, empty, ovals:N, points:N.
    #[arg(long)]
    x_topology: Option<String>,
    #[arg(long)]
    y_topology: Option<String>,
    #[arg(long)]
    xy_topology: Option<String>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct BottleneckArgs {
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[command(flatten)]
    run: RunArgs,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_poly(path: &Path) -> anyhow::Result<Poly> {
    Poly::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn parse_point(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .with_context(|| format!("bad coordinate {c:?} in {s:?}"))
        })
        .collect()
}

fn read_report(path: &Path) -> anyhow::Result<AnalysisReport> {
    AnalysisReport::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.write_all(b"\n")?;
            Ok(())
        }
    }
}

fn run_report(req: AnalyzeRequest, run: &RunArgs) -> anyhow::Result<i32> {
    let report = analyze(&req, !run.no_meta)?;
    emit(&report.to_json(), run.out.as_deref())?;
    Ok(report.exit_code())
}

fn cmd_analyze(a: AnalyzeArgs) -> anyhow::Result<i32> {
    let mut req = match &a.request {
        Some(path) => AnalyzeRequest::from_json(&read(path)?)
            .with_context(|| format!("in {}", path.display()))?,
        None => AnalyzeRequest::default(),
    };
    if a.request.is_none() {
        let target = a.target.as_deref().map(read_poly).transpose()?;
        let cloud = match &a.cloud {
            Some(path) => Some(
                PointCloud::from_json(&read(path)?)
                    .with_context(|| format!("in {}", path.display()))?,
            ),
            None => None,
        };
        let point = a.point.as_deref().map(parse_point).transpose()?;
        let n = target
            .as_ref()
            .map(|q| q.nvars())
            .or(cloud.as_ref().map(|c| c.dim))
            .or(point.as_ref().map(|p| p.len()));
        req.surface = a.surface.as_deref().map(read_poly).transpose()?;
        req.ambient = match (a.ambient, n) {
            (true, Some(n)) => Some(n),
            (true, None) => bail!("--ambient needs a target"),
            (false, _) => None,
        };
        req.domain_point = a.domain_point.as_deref().map(parse_point).transpose()?;
        req.target = target;
        req.cloud = cloud;
        req.point = point;
        req.k_max = a.k_max;
        req.topology = TopologyInputs {
            x: a.x_topology,
            y: a.y_topology,
            xy: a.xy_topology,
        };
    }
    let run = &a.run;
    if a.request.is_none() || run.starts.is_some() {
        req.starts = run.starts.or(req.starts);
    }
    if a.request.is_none() {
        req.seed = run.seed;
        req.tol = run.tol;
        req.box_half = run.box_half;
    }
    run_report(req, run)
}

fn cmd_bottlenecks(b: BottleneckArgs) -> anyhow::Result<i32> {
    let q = read_poly(&b.target)?;
    let req = AnalyzeRequest {
        ambient: Some(q.nvars()),
        target: Some(q),
        k_max: Some(b.k),
        starts: b.run.starts,
        seed: b.run.seed,
        tol: b.run.tol,
        box_half: b.run.box_half,
        ..Default::default()
    };
    run_report(req, &b.run)
}

fn cmd_verify(
    xy: Option<PathBuf>,
    yx: Option<PathBuf>,
    single: Option<PathBuf>,
) -> anyhow::Result<i32> {
    if let (Some(xy), Some(yx)) = (xy, yx) {
        let (a, b) = (read_report(&xy)?, read_report(&yx)?);
        let v = check_duality(&a.census, &b.census)?;
        println!("{v}");
        return Ok(if v.holds { 0 } else { 2 });
    }
    let Some(path) = single else {
        bail!("give --report, or both --report-xy and --report-yx");
    };
    let r = read_report(&path)?;
    let mut ok = true;
    let mut checked = false;
    if let Ok(v) = check_euler(&r.census) {
        checked = true;
        ok &= v.holds;
        println!(
            "euler identity {}: {v}",
            if v.holds { "holds" } else { "fails" }
        );
    }
    if let Ok(ms) = morse_inequalities(&r.census) {
        checked = true;
        for m in ms {
            ok &= m.strong && m.weak;
            println!(
                "lambda {}: strong {} <= {} {}, weak {} <= {} {}",
                m.lambda,
                m.strong_lhs,
                m.strong_rhs,
                if m.strong { "ok" } else { "VIOLATED" },
                m.weak_lhs,
                m.weak_rhs,
                if m.weak { "ok" } else { "VIOLATED" }
            );
        }
    }
    if !checked {
        bail!("report has no topology data to check (chi_x and chi_xy, or betti_x and betti_xy)");
    }
    Ok(if ok { 0 } else { 2 })
}

fn cmd_plotdata(path: &Path, out: Option<&Path>, cells: usize) -> anyhow::Result<i32> {
    let r = read_report(path)?;
    let i = &r.inputs;
    let n = i
        .target
        .as_ref()
        .map(|q| q.nvars())
        .or(i.cloud.as_ref().map(|c| c.dim))
        .or(i.point.as_ref().map(|p| p.len()))
        .unwrap_or(0);
    if n != 2 {
        bail!("plot data is only available for planar inputs (got dimension {n})");
    }
    let mut csv = String::from("x,y,which,k,iota\n");
    let mut curve = |p: &Poly, which: &str| -> anyhow::Result<()> {
        for line in trace_curve(p, i.box_half, cells)? {
            for q in line.points {
                csv.push_str(&format!("{},{},{which},,\n", q[0], q[1]));
            }
        }
        Ok(())
    };
    if let Some(p) = &i.surface {
        curve(p, "X")?;
    }
    if let Some(q) = &i.target {
        curve(q, "Y")?;
    }
    let mut points: Vec<(Vec<f64>, &str)> = Vec::new();
    if let Some(x) = &i.domain_point {
        points.push((x.clone(), "X"));
    }
    if let Some(c) = &i.cloud {
        points.extend(c.points.iter().map(|p| (p.clone(), "Y")));
    }
    if let Some(p) = &i.point {
        points.push((p.clone(), "Y"));
    }
    for (p, which) in points {
        csv.push_str(&format!("{},{},{which},,\n", p[0], p[1]));
    }
    for c in &r.critical_points {
        if r.mode == Mode::PointCloud && c.value == 0.0 {
            continue;
        }
        let iota = c.iota.map(|v| v.to_string()).unwrap_or_default();
        csv.push_str(&format!("{},{},crit,{},{iota}\n", c.x[0], c.x[1], c.k));
    }
    match out {
        Some(o) => fs::write(o, csv).with_context(|| format!("writing {}", o.display()))?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("DISTMORSE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .with_context(|| format!("DISTMORSE_THREADS={v:?} is not a number"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Analyze(a) => cmd_analyze(*a),
        Command::Bottlenecks(b) => cmd_bottlenecks(b),
        Command::DegreeBound { n, k, r } => {
            println!("{}", degree_bound(n, k, r)?);
            Ok(0)
        }
        Command::Verify {
            report_xy,
            report_yx,
            report,
        } => cmd_verify(report_xy, report_yx, report),
        Command::Plotdata { report, out, cells } => cmd_plotdata(&report, out.as_deref(), cells),
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
