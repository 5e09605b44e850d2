use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oscgeom::exactgeom::{format_rational, parse_rational, rat};

#[derive(Parser, Debug)]
#[command(name = "oscgeom", version, about = "Exact experiments on oscillators, convex subsets and perturbed grids")]
pub struct Cli {
    /// Worker threads. OSC_THREADS overrides this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build an oscillator or a perturbed grid and certify it.
    Generate(GenerateArgs),
    /// Check a point set file against one property.
    Certify(CertifyArgs),
    /// Run one measurement on a point set file.
    #[command(subcommand)]
    Measure(Measure),
    /// Run a parameter sweep from a JSON spec and fit a log-log slope.
    Sweep(SweepArgs),
    /// Summarize a report file, optionally exporting it as CSV.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Oscillator,
    Grid,
}

/// Exact "p/q" in (0, 1/2). Floats are rejected on purpose.
pub fn parse_eps(s: &str) -> Result<String, String> {
    let r = parse_rational(s).map_err(|_| format!("{s:?} is not an exact rational p/q"))?;
    if r <= rat(0, 1) || r >= rat(1, 2) {
        return Err(format!("eps must satisfy 0 < eps < 1/2, got {}", format_rational(&r)));
    }
    Ok(format_rational(&r))
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Oscillator length, or grid side.
    #[arg(long = "len", visible_alias = "n")]
    pub len: usize,
    #[arg(long, default_value = "1/8", value_parser = parse_eps)]
    pub eps: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Point set output.
    #[arg(long)]
    pub out: PathBuf,
    /// Certificate output; defaults to the point file name with .cert.json.
    #[arg(long)]
    pub cert: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Oscillator,
    GeneralPosition,
    ConvexIndependent,
    Regular,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Property::Oscillator)]
    pub property: Property,
    #[arg(long)]
    pub cert: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Common {
    #[arg(long)]
    pub input: PathBuf,
    /// Report to append to: .csv for flat rows, anything else for JSON lines.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Auto,
    Exact,
    PlanarDp,
    Heuristic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Cupcap,
    Ci,
}

#[derive(Subcommand, Debug)]
pub enum Measure {
    /// Largest convex independent subset.
    MaxConvex {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
        /// Restarts for the heuristic.
        #[arg(long, default_value_t = 4)]
        seeds: usize,
        /// Witness output; grid inputs get grid coordinates.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Minimum stretch of a k-cup/cap or k-convex-independent subset.
    Stretch {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Mode::Cupcap)]
        mode: Mode,
        /// Search node cap.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Occupancy of lattice lines by a set of grid points.
    Lines {
        #[command(flatten)]
        common: Common,
        /// Grid side; read from the file or taken as the largest coordinate otherwise.
        #[arg(long)]
        n: Option<i64>,
        #[arg(long, default_value_t = 3)]
        cutoff: i64,
    },
    /// Hull facets of a lattice set and the surface-area bound.
    Facets {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo hit probability of the random slice.
    Hitprob {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Randomized ball-slice extraction of a convex independent subset.
    Extract {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// JSON sweep spec.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Only this run id.
    #[arg(long)]
    pub run: Option<String>,
    /// Append the rows to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
