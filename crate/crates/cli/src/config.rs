use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use pleg_core::error::{Error, Result};
use pleg_core::solver::{DEFAULT_BOUNDARY_TOLERANCE, DEFAULT_MARGIN_TOLERANCE, DEFAULT_RESIDUAL_BOUND};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Transform,
    Verify,
    Solve,
    Sweep,
}

/// Command-line flags; every field may also come from `--config`.
#[derive(Debug, Parser)]
#[command(name = "pleg", version, about = "Partial Legendre transforms and the dual 1+1 solver")]
pub struct Cli {
    /// JSON file with any of the fields below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    /// `const:<c>`, `cos:<a>`, `cosine01`, `quadratic`, `manufactured`,
    /// `manufactured2` or a CSV path; `<spec0>;<spec1>` gives distinct slices.
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    /// Grid size in x (and y).
    #[arg(long)]
    pub nx: Option<usize>,
    /// Number of t-intervals.
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub residual_bound: Option<f64>,
    #[arg(long)]
    pub margin_tolerance: Option<f64>,
    #[arg(long)]
    pub boundary_tolerance: Option<f64>,
    /// Highest total derivative order in sweep norms.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Highest y-derivative order in maximum-principle checks.
    #[arg(long)]
    pub m_max: Option<u32>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    boundary: Option<String>,
    epsilon: Option<f64>,
    epsilons: Option<Vec<f64>>,
    nx: Option<usize>,
    nt: Option<usize>,
    out: Option<PathBuf>,
    residual_bound: Option<f64>,
    margin_tolerance: Option<f64>,
    boundary_tolerance: Option<f64>,
    n_max: Option<usize>,
    m_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub boundary: String,
    pub epsilon: f64,
    pub epsilons: Vec<f64>,
    pub nx: usize,
    pub nt: usize,
    pub out: PathBuf,
    pub residual_bound: f64,
    pub margin_tolerance: f64,
    pub boundary_tolerance: f64,
    pub n_max: usize,
    pub m_max: u32,
}

const DEFAULT_NX: usize = 128;
const DEFAULT_EPSILON: f64 = 0.1;
const DEFAULT_EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let command = cli
            .command
            .or(file.command)
            .ok_or_else(|| Error::InvalidArgument("no command given".into()))?;
        let nx = cli.nx.or(file.nx).unwrap_or(DEFAULT_NX);
        let cfg = Self {
            command,
            boundary: cli.boundary.or(file.boundary).unwrap_or_else(|| default_boundary(command).into()),
            epsilon: cli.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON),
            epsilons: cli.epsilons.or(file.epsilons).unwrap_or_else(|| DEFAULT_EPSILONS.to_vec()),
            nx,
            nt: cli.nt.or(file.nt).unwrap_or(nx),
            out: cli.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            residual_bound: cli.residual_bound.or(file.residual_bound).unwrap_or(DEFAULT_RESIDUAL_BOUND),
            margin_tolerance: cli.margin_tolerance.or(file.margin_tolerance).unwrap_or(DEFAULT_MARGIN_TOLERANCE),
            boundary_tolerance: cli
                .boundary_tolerance
                .or(file.boundary_tolerance)
                .unwrap_or(DEFAULT_BOUNDARY_TOLERANCE),
            n_max: cli.n_max.or(file.n_max).unwrap_or(3),
            m_max: cli.m_max.or(file.m_max).unwrap_or(4),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("nt", self.nt)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidArgument(format!("{name} must be even and at least 8, got {n}")));
            }
        }
        let check_eps = |e: f64| {
            if e > 0.0 && e < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {e}")))
            }
        };
        match self.command {
            Command::Solve | Command::Verify => check_eps(self.epsilon)?,
            Command::Sweep => self.epsilons.iter().try_for_each(|&e| check_eps(e))?,
            Command::Transform => {}
        }
        for (name, v) in [
            ("residual_bound", self.residual_bound),
            ("margin_tolerance", self.margin_tolerance),
            ("boundary_tolerance", self.boundary_tolerance),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be a finite non-negative number")));
            }
        }
        Ok(())
    }
}

fn default_boundary(command: Command) -> &'static str {
    match command {
        Command::Verify => "quadratic",
        _ => "cosine01",
    }
}
