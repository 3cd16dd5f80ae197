use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod cmd;
mod input;
mod output;

/// Combinatorial and numerical checks for degenerating Calabi-Yau families.
///
/// Every command writes CSV tables and a `manifest.json` into `--out`.
/// Exit status: 0 when all checks pass, 2 when a check fails, 1 on bad input.
#[derive(Debug, Parser)]
#[command(name = "nama", version)]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "nama-out")]
    pub out: PathBuf,
    /// Overrides the tolerance of the command's check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model documents.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Non-archimedean Monge-Ampere masses of the document's model metric.
    Namma { config: PathBuf },
    /// Real Monge-Ampere solver and subgradient measures.
    Realma {
        #[command(subcommand)]
        action: RealmaAction,
    },
    /// Comparisons between the non-archimedean and real pictures.
    Compare(CompareArgs),
    /// Monte Carlo checks on local models near a stratum.
    Hybrid {
        #[command(subcommand)]
        action: HybridAction,
    },
    /// Pointwise metric identities.
    Geometry {
        #[command(subcommand)]
        action: GeometryAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum ModelAction {
    /// Parses the document, lists faces and checks the intersection table.
    Validate { config: PathBuf },
    /// Essential skeleton and its Lebesgue measure.
    Skeleton { config: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Newton,
    Lifting,
}

#[derive(Debug, Subcommand)]
pub enum RealmaAction {
    /// Dirichlet problem on a box.
    Solve {
        config: PathBuf,
        /// Nodes per axis; overrides the document.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Subgradient masses of the convex envelope of `x.., value` rows.
    Measure {
        nodes: PathBuf,
        /// Also estimate masses by grid rasterization at this resolution.
        #[arg(long)]
        oracle: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompareMode {
    Vilsmeier,
    Lowerface,
    Pde,
    Matching,
    Mass,
}

/// `compare <MODE> <CONFIG>` or `compare --mode <MODE> <CONFIG>`.
#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct CompareArgs {
    #[arg(long, value_enum, requires = "config")]
    pub mode: Option<CompareMode>,
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub by_name: Option<CompareByName>,
}

#[derive(Debug, Subcommand)]
pub enum CompareByName {
    Vilsmeier { config: PathBuf },
    Lowerface { config: PathBuf },
    Pde { config: PathBuf },
    Matching { config: PathBuf },
    Mass { config: PathBuf },
}

impl CompareArgs {
    pub fn resolve(&self) -> Result<(CompareMode, PathBuf), String> {
        match (&self.by_name, self.mode, &self.config) {
            (Some(c), _, _) => Ok(match c {
                CompareByName::Vilsmeier { config } => (CompareMode::Vilsmeier, config.clone()),
                CompareByName::Lowerface { config } => (CompareMode::Lowerface, config.clone()),
                CompareByName::Pde { config } => (CompareMode::Pde, config.clone()),
                CompareByName::Matching { config } => (CompareMode::Matching, config.clone()),
                CompareByName::Mass { config } => (CompareMode::Mass, config.clone()),
            }),
            (None, Some(mode), Some(config)) => Ok((mode, config.clone())),
            _ => Err("compare needs a mode and a config document".into()),
        }
    }
}

#[derive(Debug, Args)]
pub struct LocalModelArgs {
    /// Dimension of the stratum's simplex.
    #[arg(long)]
    pub n: usize,
    /// Values of `-log|t|`, comma separated.
    #[arg(long = "t-exp", value_delimiter = ',', required = true)]
    pub t_exp: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Residue polynomial in `z0, z1, ..`.
    #[arg(long = "uJ", default_value = "1")]
    pub u_j: String,
    /// Multiplicities `b_0, .., b_n`; all 1 by default.
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<u32>>,
    /// Weights `a_0, .., a_n`; all 0 by default.
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<f64>>,
    /// Number of transverse fibre coordinates.
    #[arg(long, default_value_t = 0)]
    pub fiber: usize,
}

#[derive(Debug, Subcommand)]
pub enum HybridAction {
    /// Distance of the pushed-forward measure from Lebesgue on the simplex.
    Pushforward {
        #[command(flatten)]
        local: LocalModelArgs,
        /// Dyadic refinement level of the cells.
        #[arg(long)]
        level: Option<u32>,
    },
    /// Growth order of the volume integral in `-log|t|`.
    Growth {
        #[command(flatten)]
        local: LocalModelArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum GeometryAction {
    /// Lagrangian and phase residuals of semiflat torus fibres.
    SlagCheck {
        /// Symmetric Hessian, one CSV row per matrix row.
        #[arg(long)]
        hessian: PathBuf,
        #[arg(long = "L", default_value_t = 1.0)]
        scale: f64,
        /// Base point `log|z_i|`; the origin by default.
        #[arg(long, value_delimiter = ',')]
        base: Option<Vec<f64>>,
    },
    /// Radial Calabi equation for `x^((n+1)/n)`.
    Calabi {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, default_value_t = 1e-2)]
        lo: f64,
        #[arg(long, default_value_t = 1e2)]
        hi: f64,
        /// Differentiate numerically instead of analytically.
        #[arg(long)]
        finite_difference: bool,
    },
    /// Volume asymptotics of the generalized Calabi ansatz.
    Gcalabi {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "L", value_delimiter = ',', required = true)]
        scales: Vec<f64>,
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        /// Coupling block; zero by default.
        #[arg(long)]
        b: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // Usage errors are input errors; 2 is reserved for failed checks.
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let report = match cmd::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = report.write(&cli.out) {
        eprintln!("error: cannot write to {}: {e}", cli.out.display());
        return ExitCode::from(1);
    }
    println!("{}", report.message);
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
