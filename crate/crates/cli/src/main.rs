mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hykonv::estimators::DEFAULT_SAMPLES;
use hykonv::exact::CIRCLE_NODES;

const DEFAULT_SEED: u64 = 42;

/// Intrinsic volumes of convex bodies and the hyperbolic geometry of their
/// homothety classes.
#[derive(Debug, Parser)]
#[command(name = "hykonv", version)]
pub struct Cli {
    /// Seed of the Monte-Carlo streams.
    #[arg(long, global = true, env = "HYKONV_SEED", default_value_t = DEFAULT_SEED,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub seed: u64,

    /// Monte-Carlo sample count.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,

    /// Worker threads for the estimators. Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    /// Nodes of the S¹ rule; the S² rule uses q/16 polar by q/2 azimuthal nodes.
    #[arg(long, global = true, default_value_t = CIRCLE_NODES as u64,
          value_parser = clap::value_parser!(u64).range(32..))]
    pub quad_points: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the result table here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VolumeMethod {
    Exact,
    Tsirelson,
    Malliavin,
    Sudakov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MixedMethod {
    /// Closed form where known, else quadrature up to dimension 3, else Monte Carlo.
    Auto,
    Exact,
    Quadrature,
    Malliavin,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// k-th intrinsic volume of a body.
    Volume {
        body: PathBuf,
        #[arg(short, long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value_t = VolumeMethod::Exact)]
        method: VolumeMethod,
    },
    /// Hyperbolic distance between the classes of two bodies.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = MixedMethod::Auto)]
        method: MixedMethod,
    },
    /// Hyperboloid coordinates of a family of classes.
    Embed {
        /// Body files, or directories whose *.json files are read in name order.
        inputs: Vec<PathBuf>,
        /// Read the kernel matrix from CSV instead of computing it.
        #[arg(long, conflicts_with = "inputs")]
        kernel: Option<PathBuf>,
        /// Label placed at the apex; defaults to the first one.
        #[arg(long)]
        base: Option<String>,
        #[arg(long, value_enum, default_value_t = MixedMethod::Auto)]
        method: MixedMethod,
        /// Also write the kernel matrix as CSV.
        #[arg(long)]
        kernel_out: Option<PathBuf>,
    },
    /// Gaussian-process diagnostics.
    Estimate {
        #[command(subcommand)]
        what: EstimateCommand,
    },
    /// Named desk-scale experiment: ball_sequence, rectangle_sections,
    /// rectangle_cross, box_ball, o_limit, segment_ball.
    Experiment {
        name: String,
        #[arg(long)]
        n_max: Option<usize>,
        /// Length rule: constant, polynomial(p) or geometric(r). For
        /// segment_ball it gives the ball radius c_n.
        #[arg(long, default_value = "constant")]
        rule: String,
        /// Second rule for rectangle_cross.
        #[arg(long, default_value = "geometric(2)")]
        rule_b: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum EstimateCommand {
    /// Steiner point as a Gaussian expectation.
    Steiner { body: PathBuf },
    /// Hermite chaos coefficient of the support process.
    Chaos {
        body: PathBuf,
        /// Multi-index as coord:order pairs, e.g. `0:2` or `0:1,1:1`.
        #[arg(long)]
        index: String,
    },
    /// Both sides of the Gaussian Poincaré-type check.
    Rayleigh { body: PathBuf },
    /// Eigen-relation of the Ornstein-Uhlenbeck operator on H_n(X_v).
    Ou {
        #[arg(long)]
        n: usize,
        /// Unit direction, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
        direction: Vec<f64>,
    },
    /// Expected supremum over truncations of a body family.
    Gb {
        /// rectangle, ellipsoid or octahedron.
        #[arg(long)]
        family: String,
        /// Family parameters, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "rule")]
        params: Vec<f64>,
        /// Generate parameters from a length rule instead.
        #[arg(long)]
        rule: Option<String>,
        /// Truncation dimensions, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
    },
    /// Random-direction lower estimate of the Hausdorff distance.
    Hausdorff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        directions: usize,
    },
    /// Interval containing the Vitale distance.
    Vitale {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        directions: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hykonv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
