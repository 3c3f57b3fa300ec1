use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};

use super::error::CliError;
use crate::charts::ChartSpec;

/// Environment variable read when neither `--jobs` nor the config sets it.
pub const JOBS_ENV: &str = "OBSTRUKT_JOBS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    CurvatureReport,
    SolveKe,
    CheckMa,
    Obstruction,
    FeffermanTensors,
    Feasibility,
}

/// A point of `C^n` written as comma-separated complex numbers, e.g.
/// `0.3+0.1i,-0.2i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointArg(pub Vec<Complex64>);

impl FromStr for PointArg {
    type Err = String;

    fn from_str(s: &str) -> Result<PointArg, String> {
        s.split(',')
            .map(|t| {
                let t = t.trim();
                Complex64::from_str(t).map_err(|_| format!("`{t}` is not a complex number"))
            })
            .collect::<Result<_, _>>()
            .map(PointArg)
    }
}

impl<'de> Deserialize<'de> for PointArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<PointArg, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn parse_chart(s: &str) -> Result<ChartSpec, String> {
    s.parse().map_err(|e: crate::charts::ChartError| e.to_string())
}

/// Settings shared by every task. The same fields make up the config file;
/// a flag given on the command line replaces the file's value.
#[derive(Clone, Debug, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Task to run; only read from the config file, for `obstrukt run`.
    #[arg(skip)]
    pub task: Option<Task>,
    /// Chart, e.g. `burns-simanca`, `product-of-disks:-2,-2`, `custom:1:bundle=EXPR`.
    #[arg(long, value_parser = parse_chart)]
    pub chart: Option<ChartSpec>,
    /// Ricci eigenvalues of the base, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eigs: Option<Vec<f64>>,
    /// Total complex dimension of the disk bundle (defaults to eigenvalue count plus one).
    #[arg(long)]
    pub m: Option<usize>,
    /// Explicit evaluation point; repeat for several.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Option<Vec<PointArg>>,
    /// Number of sample points (base points for check-ma).
    #[arg(long)]
    pub count: Option<usize>,
    /// Seed for random sample points instead of the deterministic grid.
    #[arg(long)]
    pub sample_seed: Option<u64>,
    /// Obstruction ray `S_MIN:S_MAX:SAMPLES` in `|z|²`.
    #[arg(long)]
    pub ray: Option<String>,
    /// Direction of the ray (normalized), e.g. `1,1`.
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<PointArg>,
    /// Jet order of the potential.
    #[arg(long)]
    pub order: Option<usize>,
    /// Pass/fail tolerance of the task.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Largest fiber radius `X` in the check-ma grid.
    #[arg(long)]
    pub x_max: Option<f64>,
    /// CSV data (or the JSON document for JSON-only tasks); stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary of CSV tasks; stderr if absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Worker threads; defaults to $OBSTRUKT_JOBS, then to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

macro_rules! prefer {
    ($flags:ident, $file:ident; $($f:ident),*) => {
        Options { $($f: $flags.$f.or($file.$f)),* }
    };
}

impl Options {
    /// Field-wise merge in which `self` (the flags) wins.
    pub fn over(self, file: Options) -> Options {
        let flags = self;
        prefer!(flags, file; task, chart, eigs, m, points, count, sample_seed, ray, direction, order,
            tolerance, x_max, out, summary, jobs)
    }

    pub fn from_file(path: &Path) -> Result<Options, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
    }

    /// Thread count from the flag or config, then the environment.
    pub fn resolved_jobs(&self) -> Result<Option<usize>, CliError> {
        let jobs = match self.jobs {
            Some(j) => Some(j),
            None => match std::env::var(JOBS_ENV) {
                Ok(v) if !v.trim().is_empty() => Some(
                    v.trim()
                        .parse()
                        .map_err(|_| CliError::config(format!("{JOBS_ENV}={v:?} is not a thread count")))?,
                ),
                _ => None,
            },
        };
        match jobs {
            Some(0) => Err(CliError::config("--jobs must be at least 1")),
            j => Ok(j),
        }
    }

    pub fn require_chart(&self) -> Result<&ChartSpec, CliError> {
        self.chart.as_ref().ok_or_else(|| CliError::config("--chart is required"))
    }

    pub fn require_eigs(&self) -> Result<&[f64], CliError> {
        match &self.eigs {
            Some(e) if !e.is_empty() => Ok(e),
            _ => Err(CliError::config("--eigs is required")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "obstrukt", version, about = "Kähler–Einstein disk bundles, Fefferman tensors and CR obstruction functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature, Ricci eigenvalues and |∇R| at sample points (CSV).
    CurvatureReport(TaskArgs),
    /// Solve the radial ODE for constant eigenvalues (CSV on 201 radii).
    SolveKe(TaskArgs),
    /// Check J(u) = 1 and the Kähler–Einstein condition on the disk bundle (CSV).
    CheckMa(TaskArgs),
    /// Obstruction function and LC on a grid and along a ray (CSV).
    Obstruction(TaskArgs),
    /// Fefferman-space tensors and identity residuals at a point (JSON).
    FeffermanTensors(TaskArgs),
    /// Whether a solution exists for the eigenvalues, with a witness if not (JSON).
    Feasibility(TaskArgs),
    /// Run the task named in the config file.
    Run(TaskArgs),
}

#[derive(Debug, Args)]
pub struct TaskArgs {
    /// JSON config file with the same keys as the flags (snake_case).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: Options,
}

impl Command {
    pub fn split(self) -> (Option<Task>, TaskArgs) {
        match self {
            Command::CurvatureReport(a) => (Some(Task::CurvatureReport), a),
            Command::SolveKe(a) => (Some(Task::SolveKe), a),
            Command::CheckMa(a) => (Some(Task::CheckMa), a),
            Command::Obstruction(a) => (Some(Task::Obstruction), a),
            Command::FeffermanTensors(a) => (Some(Task::FeffermanTensors), a),
            Command::Feasibility(a) => (Some(Task::Feasibility), a),
            Command::Run(a) => (None, a),
        }
    }
}
