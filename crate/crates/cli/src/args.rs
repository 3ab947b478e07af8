use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use knotfield::solidangle::EvalConfig;
use knotfield::{Evaluator, GridSpec, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "knotfield", version, about = "Solid angle fields of knotted curves and links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Evaluate the solid angle on a grid or at listed points.
    Omega(OmegaArgs),
    /// Compute the solid-angle framing of every component.
    Framing(FramingArgs),
    /// Scroll-wave phase field.
    Scroll(ScrollArgs),
    /// Nematic director field with the curve as a disclination.
    Director(DirectorArgs),
    /// Run the self-consistency suites on a curve.
    Verify(VerifyArgs),
    /// Write a built-in knot or link as a curve file.
    Generate(GenerateArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    /// The same command with every path made absolute, so a recorded run
    /// can be replayed from any directory.
    pub fn absolutized(&self) -> Command {
        let abs = |p: &mut PathBuf| {
            if let Ok(a) = std::path::absolute(&*p) {
                *p = a;
            }
        };
        let mut c = self.clone();
        match &mut c {
            Command::Omega(a) => {
                abs(&mut a.curve);
                abs(&mut a.out);
                a.points.as_mut().map(abs);
            }
            Command::Framing(a) => {
                abs(&mut a.curve);
                abs(&mut a.out);
            }
            Command::Scroll(a) => {
                abs(&mut a.curve);
                abs(&mut a.out);
                a.modulate.as_mut().map(abs);
            }
            Command::Director(a) => {
                abs(&mut a.curve);
                abs(&mut a.out);
                a.second_curve.as_mut().map(abs);
            }
            Command::Verify(a) => {
                abs(&mut a.curve);
                a.report.as_mut().map(abs);
            }
            Command::Generate(a) => abs(&mut a.out),
            Command::Replay(_) => {}
        }
        c
    }

    /// Replaces the output base of a recorded command.
    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::Omega(a) => a.out = out,
            Command::Framing(a) => a.out = out,
            Command::Scroll(a) => a.out = out,
            Command::Director(a) => a.out = out,
            Command::Verify(a) => a.report = Some(out),
            Command::Generate(a) => a.out = out,
            Command::Replay(_) => {}
        }
    }
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> Result<[T; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got {s:?}"));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| format!("{p:?} is not a valid number"))?);
    }
    out.try_into().map_err(|_| unreachable!())
}

pub fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let dims = parse_triple::<usize>(s)?;
    if dims.iter().any(|&d| d < 2) {
        return Err("every grid dimension must be at least 2".into());
    }
    Ok(dims)
}

pub fn parse_vec(s: &str) -> Result<[f64; 3], String> {
    let v = parse_triple::<f64>(s)?;
    if v.iter().any(|c| !c.is_finite()) {
        return Err("components must be finite".into());
    }
    Ok(v)
}

/// One spacing, or three that must be equal.
pub fn parse_spacing(s: &str) -> Result<f64, String> {
    let h = if s.contains(',') {
        let [a, b, c] = parse_vec(s)?;
        if a != b || b != c {
            return Err("anisotropic spacing is not supported; give a single value".into());
        }
        a
    } else {
        s.trim().parse::<f64>().map_err(|_| format!("{s:?} is not a valid number"))?
    };
    if !(h > 0.0 && h.is_finite()) {
        return Err("spacing must be positive".into());
    }
    Ok(h)
}

fn parse_evaluator(s: &str) -> Result<Evaluator, String> {
    s.parse().map_err(|e: knotfield::Error| e.to_string())
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GridArgs {
    /// Node counts NX,NY,NZ.
    #[arg(long, value_parser = parse_dims)]
    pub grid: Option<[usize; 3]>,
    /// Position of node (0, 0, 0) as x,y,z.
    #[arg(long, value_parser = parse_vec, default_value = "0,0,0", allow_hyphen_values = true)]
    pub origin: [f64; 3],
    /// Isotropic node spacing.
    #[arg(long, value_parser = parse_spacing)]
    pub spacing: Option<f64>,
}

impl GridArgs {
    pub fn spec(&self) -> Option<Result<GridSpec, String>> {
        let dims = self.grid?;
        Some(match self.spacing {
            None => Err("--spacing is required with --grid".into()),
            Some(h) => GridSpec::new(Vec3::from(self.origin), h, dims).map_err(|e| e.to_string()),
        })
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Solid-angle evaluator.
    #[arg(long, value_parser = parse_evaluator, default_value = "infinity_triangle")]
    pub evaluator: Evaluator,
    /// Dirac-string direction x,y,z.
    #[arg(long, value_parser = parse_vec, default_value = "0,0,1", allow_hyphen_values = true)]
    pub ninf: [f64; 3],
    /// Margin below which the evaluator switches axis.
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    /// Seed of the fallback axis.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub workers: Option<usize>,
}

impl EvalArgs {
    pub fn config(&self) -> EvalConfig {
        EvalConfig {
            n_inf: Vec3::from(self.ninf),
            switch_threshold: self.threshold,
            fallback_seed: self.seed,
            evaluator: self.evaluator,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct OmegaArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Evaluate at the points listed in this file instead of on a grid.
    #[arg(long, conflicts_with = "grid")]
    pub points: Option<PathBuf>,
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Output base name.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct FramingArgs {
    #[arg(long)]
    pub curve: PathBuf,
    /// Offset radius relative to the minimum radius of curvature.
    #[arg(long, default_value_t = knotfield::framing::DEFAULT_EPS_REL)]
    pub eps_rel: f64,
    /// Frame only this component.
    #[arg(long)]
    pub component: Option<usize>,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ScrollArgs {
    #[arg(long)]
    pub curve: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Wavenumber.
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    /// Table of `arclength offset` pairs added to the distance.
    #[arg(long)]
    pub modulate: Option<PathBuf>,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct DirectorArgs {
    #[arg(long)]
    pub curve: PathBuf,
    /// Auxiliary curve whose solid angle sets the in-plane angle.
    #[arg(long)]
    pub second_curve: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub curve: PathBuf,
    /// Sample points per suite.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report as JSON to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GenerateArgs {
    /// One of circle, trefoil, figure-eight, hopf, whitehead, borromean.
    #[arg(long)]
    pub knot: String,
    /// Vertices per component.
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write outputs under this base instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
