//! Command implementations and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::CommandFactory;
use knotfield::checks::{verify, CheckResult, VerifyOptions, VerifyReport};
use knotfield::fields::{self, VectorField};
use knotfield::framing::{framing_self_link, solid_angle_framing_in_link};
use knotfield::io;
use knotfield::solidangle::{omega_at, omega_grid, IssueKind, NodeIssue};
use knotfield::{knots, GridSpec, Link, ScalarField};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::*;

/// How the binary volume payloads are laid out.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ByteOrders {
    pub vtk: String,
    pub raw: String,
    pub raw_layout: String,
}

impl Default for ByteOrders {
    fn default() -> Self {
        ByteOrders {
            vtk: "big_endian".into(),
            raw: "little_endian".into(),
            raw_layout: "float64, index (i*ny + j)*nz + k, k fastest; vector fields as three consecutive blocks x, y, z".into(),
        }
    }
}

/// Record written next to every output. `args` echoes the full command, so
/// the manifest alone reproduces the run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub args: Command,
    pub curve_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_curve_hash: Option<String>,
    pub components: usize,
    pub grid: Option<GridSpec>,
    pub evaluator: Option<knotfield::Evaluator>,
    pub config: Option<knotfield::EvalConfig>,
    pub byte_order: ByteOrders,
    pub outputs: Vec<PathBuf>,
    pub flagged_nodes: Vec<NodeIssue>,
    pub results: serde_json::Value,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    fn new(args: &Command, link: &Link) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            args: args.absolutized(),
            curve_hash: link.content_hash(),
            second_curve_hash: None,
            components: link.len(),
            grid: None,
            evaluator: None,
            config: None,
            byte_order: ByteOrders::default(),
            outputs: Vec::new(),
            flagged_nodes: Vec::new(),
            results: serde_json::Value::Null,
            wall_clock_seconds: 0.0,
        }
    }

    fn write(mut self, base: &Path, started: Instant) -> Result<()> {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
        let path = with_suffix(base, ".manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&self)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn usage_error(message: &str) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::MissingRequiredArgument, message)
        .exit()
}

fn grid_or_usage(grid: &GridArgs) -> GridSpec {
    match grid.spec() {
        None => usage_error("--grid NX,NY,NZ and --spacing are required"),
        Some(Err(e)) => {
            Cli::command()
                .error(clap::error::ErrorKind::ValueValidation, e)
                .exit()
        }
        Some(Ok(g)) => g,
    }
}

fn load(path: &Path) -> Result<Link> {
    io::read_link(path).with_context(|| format!("reading curve {}", path.display()))
}

fn write_output(manifest: &mut RunManifest, path: PathBuf, bytes: &[u8]) -> Result<()> {
    io::write_bytes(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    manifest.outputs.push(path);
    Ok(())
}

/// Reports flagged nodes; degenerate ones make the run fail.
fn node_status(issues: &[NodeIssue]) -> ExitCode {
    let degenerate: Vec<&NodeIssue> = issues.iter().filter(|i| i.kind == IssueKind::Degenerate).collect();
    let on_curve = issues.len() - degenerate.len();
    if on_curve > 0 {
        eprintln!("note: {on_curve} nodes lie on the curve and hold the sentinel value");
    }
    if degenerate.is_empty() {
        return ExitCode::SUCCESS;
    }
    eprintln!("error: {} nodes could not be evaluated", degenerate.len());
    for issue in degenerate.iter().take(10) {
        eprintln!("  node {}: {}", issue.index, issue.message);
    }
    ExitCode::from(1)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build()?;
            Ok(pool.install(f))
        }
    }
}

pub fn dispatch(command: Command) -> Result<ExitCode> {
    match &command {
        Command::Omega(a) => omega(a, &command),
        Command::Framing(a) => framing(a, &command),
        Command::Scroll(a) => scroll(a, &command),
        Command::Director(a) => director(a, &command),
        Command::Verify(a) => verify_cmd(a),
        Command::Generate(a) => generate(a, &command),
        Command::Replay(a) => replay(a),
    }
}

fn scalar_outputs(manifest: &mut RunManifest, field: &ScalarField, name: &str, base: &Path) -> Result<()> {
    write_output(manifest, with_suffix(base, ".vti-legacy"), &io::vtk_scalar_bytes(field, name))?;
    write_output(manifest, with_suffix(base, ".raw"), &io::raw_scalar_bytes(field))?;
    manifest.grid = Some(field.grid.clone());
    manifest.evaluator = field.meta.evaluator;
    manifest.config = field.meta.config.clone();
    manifest.flagged_nodes = field.issues.clone();
    Ok(())
}

fn vector_outputs(manifest: &mut RunManifest, field: &VectorField, base: &Path) -> Result<()> {
    write_output(manifest, with_suffix(base, ".vti-legacy"), &io::vtk_vector_bytes(field))?;
    write_output(manifest, with_suffix(base, ".raw"), &io::raw_vector_bytes(field))?;
    manifest.grid = Some(field.grid.clone());
    manifest.evaluator = field.meta.evaluator;
    manifest.config = field.meta.config.clone();
    manifest.flagged_nodes = field.issues.clone();
    Ok(())
}

fn omega(a: &OmegaArgs, command: &Command) -> Result<ExitCode> {
    let started = Instant::now();
    let cfg = a.eval.config();
    let points = match &a.points {
        Some(p) => Some(
            io::parse_points(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
                .with_context(|| format!("parsing {}", p.display()))?,
        ),
        None => None,
    };
    let grid = if points.is_none() { Some(grid_or_usage(&a.grid)) } else { None };
    let link = load(&a.curve)?;
    let cfg = cfg.validated()?;
    let mut manifest = RunManifest::new(command, &link);
    let issues = if let Some(points) = points {
        let values = with_workers(a.eval.workers, || {
            use rayon::prelude::*;
            points.par_iter().map(|x| omega_at(&link, x, &cfg)).collect::<Vec<_>>()
        })?;
        let mut table = String::from("# x y z omega\n");
        let mut issues = Vec::new();
        for (index, (x, v)) in points.iter().zip(values).enumerate() {
            match v {
                Ok(v) => writeln!(table, "{} {} {} {}", x.x, x.y, x.z, v)?,
                Err(e) => {
                    writeln!(table, "{} {} {} nan", x.x, x.y, x.z)?;
                    issues.push(NodeIssue {
                        index,
                        kind: if matches!(e, knotfield::Error::OnCurve { .. }) {
                            IssueKind::OnCurve
                        } else {
                            IssueKind::Degenerate
                        },
                        message: e.to_string(),
                    });
                }
            }
        }
        write_output(&mut manifest, with_suffix(&a.out, ".points.txt"), table.as_bytes())?;
        manifest.evaluator = Some(cfg.evaluator);
        manifest.config = Some(cfg.clone());
        manifest.flagged_nodes = issues.clone();
        issues
    } else {
        let grid = grid.expect("grid mode");
        let field = with_workers(a.eval.workers, || omega_grid(&link, &grid, &cfg))??;
        scalar_outputs(&mut manifest, &field, "omega", &a.out)?;
        field.issues
    };
    manifest.write(&a.out, started)?;
    Ok(node_status(&issues))
}

fn framing(a: &FramingArgs, command: &Command) -> Result<ExitCode> {
    let started = Instant::now();
    let link = load(&a.curve)?;
    let cfg = a.eval.config();
    let components: Vec<usize> = match a.component {
        Some(c) if c >= link.len() => bail!("the curve has {} components, no component {c}", link.len()),
        Some(c) => vec![c],
        None => (0..link.len()).collect(),
    };
    let framings = with_workers(a.eval.workers, || {
        components
            .iter()
            .map(|&c| {
                let curve = &link.components()[c];
                let eps = a.eps_rel * curve.min_radius_of_curvature().min(curve.total_length());
                let f = solid_angle_framing_in_link(&link, c, eps, &cfg)?;
                let sl = framing_self_link(&f)?;
                Ok((c, f, sl))
            })
            .collect::<knotfield::Result<Vec<_>>>()
    })??;
    let mut table = String::from("# component s alpha x y z\n");
    let mut results = Vec::new();
    for (c, f, sl) in &framings {
        let s = f.base.arclengths();
        for ((si, alpha), p) in s.iter().zip(&f.alpha).zip(&f.pushoff) {
            writeln!(table, "{c} {si} {alpha} {} {} {}", p.x, p.y, p.z)?;
        }
        results.push(json!({
            "component": c,
            "epsilon": f.epsilon,
            "self_link": sl,
            "alpha_winding": f.alpha_winding(),
        }));
    }
    let mut manifest = RunManifest::new(command, &link);
    write_output(&mut manifest, with_suffix(&a.out, ".framing.txt"), table.as_bytes())?;
    manifest.config = Some(cfg.validated()?);
    manifest.evaluator = Some(cfg.evaluator);
    manifest.results = json!({ "framings": results });
    manifest.write(&a.out, started)?;
    for (c, _, sl) in &framings {
        println!("component {c}: self_link {sl}");
    }
    Ok(ExitCode::SUCCESS)
}

fn scroll(a: &ScrollArgs, command: &Command) -> Result<ExitCode> {
    let started = Instant::now();
    let grid = grid_or_usage(&a.grid);
    let link = load(&a.curve)?;
    let modulation = match &a.modulate {
        Some(p) => Some(
            io::parse_modulation(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
                .with_context(|| format!("parsing {}", p.display()))?,
        ),
        None => None,
    };
    let cfg = a.eval.config();
    let field = with_workers(a.eval.workers, || {
        fields::scroll_phase(&link, &grid, a.k, &cfg, modulation.as_ref())
    })??;
    let mut manifest = RunManifest::new(command, &link);
    scalar_outputs(&mut manifest, &field, "psi", &a.out)?;
    manifest.write(&a.out, started)?;
    Ok(node_status(&field.issues))
}

fn director(a: &DirectorArgs, command: &Command) -> Result<ExitCode> {
    let started = Instant::now();
    let grid = grid_or_usage(&a.grid);
    let link = load(&a.curve)?;
    let second = a.second_curve.as_deref().map(load).transpose()?;
    let cfg = a.eval.config();
    let field = with_workers(a.eval.workers, || -> knotfield::Result<VectorField> {
        let omega_k = omega_grid(&link, &grid, &cfg)?;
        match &second {
            None => Ok(fields::planar_director(&omega_k)),
            Some(l) => fields::full_director(&omega_k, &omega_grid(l, &grid, &cfg)?),
        }
    })??;
    let mut manifest = RunManifest::new(command, &link);
    manifest.second_curve_hash = second.as_ref().map(Link::content_hash);
    vector_outputs(&mut manifest, &field, &a.out)?;
    manifest.write(&a.out, started)?;
    Ok(node_status(&field.issues))
}

fn print_table(report: &VerifyReport) {
    println!("{:<16} {:>6} {:>14} {:>12} {:>8} {:>8}", "check", "result", "value", "tolerance", "samples", "skipped");
    for c in &report.checks {
        println!(
            "{:<16} {:>6} {:>14.6e} {:>12.3e} {:>8} {:>8}  {}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.value,
            c.tolerance,
            c.samples,
            c.skipped,
            c.detail
        );
    }
    println!("overall: {}", if report.passed { "PASS" } else { "FAIL" });
}

fn verify_cmd(a: &VerifyArgs) -> Result<ExitCode> {
    let report = match io::read_link(&a.curve) {
        Ok(link) => verify(
            &link,
            &VerifyOptions {
                points: a.points,
                seed: a.seed,
                ..Default::default()
            },
        ),
        Err(e) => VerifyReport {
            curve_hash: String::new(),
            components: 0,
            points: a.points,
            seed: a.seed,
            checks: vec![CheckResult {
                name: "validation".into(),
                passed: false,
                value: f64::NAN,
                tolerance: 0.0,
                samples: 0,
                skipped: 0,
                detail: format!("{}: {e}", a.curve.display()),
            }],
            passed: false,
        },
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(path) = &a.report {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    if a.json {
        print!("{text}");
    } else {
        print_table(&report);
    }
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn generate(a: &GenerateArgs, command: &Command) -> Result<ExitCode> {
    let started = Instant::now();
    if a.points < 3 {
        usage_error("--points must be at least 3");
    }
    let Some(link) = knots::by_name(&a.knot, a.points) else {
        Cli::command()
            .error(
                clap::error::ErrorKind::InvalidValue,
                format!("unknown knot {:?}; expected one of {}", a.knot, knots::NAMES.join(", ")),
            )
            .exit()
    };
    let mut manifest = RunManifest::new(command, &link);
    write_output(&mut manifest, a.out.clone(), io::write_curve_file(&link).as_bytes())?;
    manifest.write(&a.out, started)?;
    Ok(ExitCode::SUCCESS)
}

fn replay(a: &ReplayArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let manifest: RunManifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.manifest.display()))?;
    let mut command = manifest.args;
    let curve = match &command {
        Command::Omega(c) => Some(&c.curve),
        Command::Framing(c) => Some(&c.curve),
        Command::Scroll(c) => Some(&c.curve),
        Command::Director(c) => Some(&c.curve),
        Command::Verify(c) => Some(&c.curve),
        Command::Generate(_) | Command::Replay(_) => None,
    };
    if let Some(curve) = curve {
        let hash = load(curve)?.content_hash();
        if hash != manifest.curve_hash {
            bail!(
                "curve {} has changed since the run (hash {hash}, manifest {})",
                curve.display(),
                manifest.curve_hash
            );
        }
    }
    if let Some(out) = &a.out {
        command.set_out(out.clone());
    }
    dispatch(command)
}
