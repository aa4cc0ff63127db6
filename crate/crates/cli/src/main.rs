//! `quasidiff`: reproducible diffraction experiments on cut-and-project
//! model sets and Fibonacci random tilings.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod run;

use config::{CommandKind, ExperimentConfig, Format};

/// Why a run stopped; each maps to an exit status.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Resource(String),
    Check(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Resource(_) => 3,
            Failure::Check(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Resource(m) | Failure::Check(m) | Failure::Io(m) => m,
        }
    }
}

impl From<quasidiff::Error> for Failure {
    fn from(e: quasidiff::Error) -> Self {
        use quasidiff::Error::*;
        match e {
            ResourceCap { .. } | ToleranceUnreachable(_) | Quadrature { .. } => Failure::Resource(e.to_string()),
            Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "quasidiff", version, args_conflicts_with_subcommands = true, about = "Diffraction experiments on weighted model sets and dense Dirac combs")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "QUASIDIFF_THREADS")]
    threads: Option<usize>,

    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Replay a config: a JSON config file, or any CSV/JSON output of this tool.
    #[arg(long)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Basis, covolume and dual of a scheme.
    SchemeInfo(Params),
    /// Points of a model set inside a ball.
    Modelset(Params),
    /// Empirical against exact density of a model set.
    Density(Params),
    /// Weyl average of the dense comb (or of a weighted model set with --window).
    Weyl(Params),
    /// Finite-volume and limiting Fourier-Bohr coefficient.
    FourierBohr(Params),
    /// Autocorrelation coefficients, closed form and optionally finite-N.
    Autocorr(Params),
    /// Bragg peaks above an intensity floor.
    Diffract(Params),
    /// Certified two-sided check of the generalized Poisson summation.
    PoissonCheck(Params),
    /// Averaged vertex-star histogram of Fibonacci random tilings.
    Randomtile(Params),
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',').map(|v| v.trim().parse::<T>().map_err(|_| format!("`{v}` is not a valid number"))).collect()
}

/// Every experiment option. Each command accepts the subset it uses and
/// rejects the rest.
#[derive(Args, Default)]
struct Params {
    /// Output format (default csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// `fibonacci`, or a scheme JSON file (optionally prefixed `file:`).
    #[arg(long)]
    scheme: Option<String>,
    /// `gaussian[:width=..,alpha=..]`, `bump:center=..,half_width=..`,
    /// `hat:center=..,half_width=..`, `lorentzian`, `zero`, or `file:<csv>`.
    #[arg(long)]
    weight: Option<String>,
    /// `fibonacci`, `interval:lo:hi[:open-closed]`, `box:lo:hi:flags:...`, `ball:c1,c2:r`.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Radius of the averaging ball.
    #[arg(long)]
    r: Option<f64>,
    /// Center of the averaging ball, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    /// Averaging radius of the finite autocorrelation.
    #[arg(long)]
    n: Option<f64>,
    /// Wavevector as integer dual-module coordinates, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    k: Option<Vec<i64>>,
    /// Wavevector in direct space, treated as off the dual module.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    k_direct: Option<Vec<f64>>,
    /// Difference vector in lattice coordinates; repeat for several.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_list::<i64>)]
    z: Vec<Vec<i64>>,
    /// Absolute tolerance on the internal-space truncation of dense sums.
    #[arg(long)]
    internal_tol: Option<f64>,
    /// Intensity floor of the listed spectrum.
    #[arg(long)]
    floor: Option<f64>,
    /// Internal-space radius of the spectrum (default: from the weight's decay).
    #[arg(long)]
    kstar_radius: Option<f64>,
    /// Direct-space radius of the spectrum.
    #[arg(long)]
    k_radius: Option<f64>,
    /// Width of the Gaussian test function.
    #[arg(long)]
    sigma: Option<f64>,
    /// Tolerance of a check command.
    #[arg(long)]
    tol: Option<f64>,
    /// Tiles per random tiling (N).
    #[arg(long)]
    tiles: Option<usize>,
    /// Number of sampled tilings (M).
    #[arg(long)]
    samples: Option<usize>,
    /// Probability of the short tile.
    #[arg(long)]
    p_u: Option<f64>,
    /// Histogram bins.
    #[arg(long)]
    bins: Option<usize>,
    /// Master seed of the random tiling ensemble.
    #[arg(long)]
    seed: Option<u64>,
    /// `bernoulli` or `fixed-composition`.
    #[arg(long)]
    sampler: Option<String>,
    /// `drift-line` or `raw`.
    #[arg(long)]
    centering: Option<String>,
    /// System sizes for the width-scaling fit, comma separated.
    #[arg(long, value_delimiter = ',')]
    width_fit: Option<Vec<usize>>,
}

impl Params {
    fn into_config(self, command: CommandKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(command);
        c.format = self.format.unwrap_or_default();
        c.scheme = self.scheme;
        c.weight = self.weight;
        c.window = self.window;
        c.r = self.r;
        c.a = self.a;
        c.n = self.n;
        c.k = self.k;
        c.k_direct = self.k_direct;
        c.z = if self.z.is_empty() { None } else { Some(self.z) };
        c.internal_tol = self.internal_tol;
        c.floor = self.floor;
        c.kstar_radius = self.kstar_radius;
        c.k_radius = self.k_radius;
        c.sigma = self.sigma;
        c.tol = self.tol;
        c.tiles = self.tiles;
        c.samples = self.samples;
        c.p_u = self.p_u;
        c.bins = self.bins;
        c.seed = self.seed;
        c.sampler = self.sampler;
        c.centering = self.centering;
        c.width_fit = self.width_fit;
        c
    }
}

impl Command {
    fn into_config(self) -> ExperimentConfig {
        let (kind, p) = match self {
            Command::SchemeInfo(p) => (CommandKind::SchemeInfo, p),
            Command::Modelset(p) => (CommandKind::Modelset, p),
            Command::Density(p) => (CommandKind::Density, p),
            Command::Weyl(p) => (CommandKind::Weyl, p),
            Command::FourierBohr(p) => (CommandKind::FourierBohr, p),
            Command::Autocorr(p) => (CommandKind::Autocorr, p),
            Command::Diffract(p) => (CommandKind::Diffract, p),
            Command::PoissonCheck(p) => (CommandKind::PoissonCheck, p),
            Command::Randomtile(p) => (CommandKind::Randomtile, p),
        };
        p.into_config(kind)
    }
}

fn summary_path(output: &Path) -> PathBuf {
    output.with_extension("summary.json")
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::Io(e.to_string()))?;
    }
    let cfg = match (cli.config, cli.command) {
        (Some(path), _) => config::load(&path)?,
        (None, Some(cmd)) => cmd.into_config(),
        (None, None) => return Err(Failure::Validation("give a subcommand or --config; see --help".into())),
    };
    let cfg = cfg.resolve()?;
    let outcome = run::run(&cfg)?;
    write(cli.output.as_deref(), &outcome.main)?;
    if let (Some(summary), Some(out)) = (&outcome.summary, &cli.output) {
        write(Some(&summary_path(out)), summary)?;
    }
    match outcome.check_failure {
        Some(msg) => Err(Failure::Check(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("quasidiff: error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
