use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use schrlat::rational::{parse_rational, to_f64};
use schrlat::{QuadratureSpec, Rational};

#[derive(Parser, Debug)]
#[command(name = "schrlat", version, about = "Self-similar Schrödinger solutions, concentration lattices and sharpness experiments")]
pub struct Cli {
    /// Worker threads (falls back to SCHRLAT_THREADS, then all cores).
    #[arg(long, global = true, env = "SCHRLAT_THREADS")]
    pub threads: Option<usize>,

    /// Output file; written atomically. Standard output when omitted.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    #[command(flatten)]
    pub quad: QuadArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct QuadArgs {
    /// Minimum Gauss–Legendre nodes per interval.
    #[arg(long, global = true, default_value_t = 8)]
    pub quad_nodes_min: usize,
    /// Nodes per phase cycle across an interval.
    #[arg(long, global = true, default_value_t = 6.0)]
    pub quad_nodes_per_cycle: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub quad_abs_tol: f64,
}

impl QuadArgs {
    pub fn spec(&self) -> schrlat::Result<QuadratureSpec> {
        QuadratureSpec::new(self.quad_nodes_min, self.quad_nodes_per_cycle, self.quad_abs_tol)
    }
}

pub fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Accepts decimals and `num/den`.
pub fn real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => rational(s).map(|r| to_f64(&r)),
    }
}

#[derive(Args, Debug, Clone)]
pub struct Grid {
    /// δ = 2^-a; a single value.
    #[arg(long)]
    pub delta_log2: u32,
    /// σ as `num/den`; σ·a must be an integer.
    #[arg(long, value_parser = rational)]
    pub sigma: Rational,
    #[arg(long, default_value_t = 1)]
    pub level: u32,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Interval list of the frequency profile g_k.
    Profile(Grid),
    /// Evaluates e^{itΔ}f at one point.
    Solve {
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        n: usize,
        /// Spatial coordinates, comma separated (n-1 values).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Points of the concentration lattice Λ_k.
    Lattice {
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational, default_value = "1/40")]
        c: Rational,
    },
    /// Checks on the concentration lattice.
    #[command(subcommand)]
    Verify(Verify),
    /// Ball mass or Morrey–Campanato norm of a weight.
    Norm(NormArgs),
    /// Scaling experiments with fitted exponents.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Exact region boundaries in the (α, 1/p) plane.
    Region {
        #[arg(long)]
        n: usize,
        /// Also report the vertical section at this α.
        #[arg(long, value_parser = rational)]
        alpha: Option<Rational>,
    },
    /// Surface extension operator on the paraboloid.
    #[command(subcommand)]
    Extension(Extension),
}

#[derive(Subcommand, Debug)]
pub enum Verify {
    /// Minimum modulus on Λ_k and its slope in δ.
    Concentration {
        #[arg(long, value_delimiter = ',', required = true)]
        delta_log2: Vec<u32>,
        #[arg(long, value_parser = rational)]
        sigma: Rational,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        level: u32,
        #[arg(long, value_parser = rational, default_value = "1/40")]
        c: Rational,
        /// Allowed deviation of the slope from k(n-1)(1-σ).
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Exact self-similar decompositions of g_k and Λ_k.
    SelfSimilarity {
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational, default_value = "1/40")]
        c: Rational,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightKind {
    /// Ω: lattice thickened by cubes of half-side ρ.
    Omega,
    /// Ω̃: Ω scaled by δ.
    OmegaTilde,
    /// The Knapp tube at δ.
    Knapp,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[arg(long, value_enum, conflicts_with = "weight_file")]
    pub weight: Option<WeightKind>,
    /// Weight in the JSON schema written by `--format json`.
    #[arg(long)]
    pub weight_file: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub delta_log2: Vec<u32>,
    #[arg(long, value_parser = rational)]
    pub sigma: Option<Rational>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = rational, default_value = "1/40")]
    pub c: Rational,
    #[arg(long, value_parser = rational, default_value = "1/50")]
    pub rho: Rational,
    #[arg(long, value_parser = real, conflicts_with_all = ["alpha", "p"])]
    pub eta: Option<f64>,
    #[arg(long, value_parser = real, requires = "p")]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = real, requires = "alpha")]
    pub p: Option<f64>,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub radius_ratio: f64,
    /// Also run the exhaustive oracle with this centre spacing.
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Write the weight itself instead of its norm.
    #[arg(long)]
    pub dump_weight: bool,
}

#[derive(Subcommand, Debug)]
pub enum Experiment {
    /// Weighted estimate against η-dimensional measures.
    Upperbound {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational)]
        eta: Rational,
        /// R = 2^a.
        #[arg(long, value_delimiter = ',', required = true)]
        r_log2: Vec<u32>,
        /// Defaults to (n-η)/(n+1).
        #[arg(long, value_parser = rational)]
        sigma: Option<Rational>,
        #[arg(long, value_parser = rational, default_value = "1/40")]
        c: Rational,
        #[arg(long, value_parser = rational, default_value = "1/50")]
        rho: Rational,
        #[arg(long, default_value_t = 3)]
        nodes: usize,
    },
    /// The upper-bound experiment for σ = i/16.
    UpperboundSweep {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational)]
        eta: Rational,
        #[arg(long, default_value_t = 12)]
        a_min: u32,
        /// Skip σ whose lattice would exceed this many values per axis.
        #[arg(long, default_value_t = 1 << 16)]
        max_axis: u64,
    },
    /// Knapp cell and tube.
    Knapp {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = real)]
        alpha: f64,
        #[arg(long, value_parser = real)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7")]
        delta_log2: Vec<u32>,
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
    /// Morrey–Campanato weights on Ω at one σ.
    Morrey {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = real)]
        alpha: f64,
        #[arg(long, value_parser = real, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_parser = rational)]
        sigma: Rational,
        /// Defaults to three values chosen by the q_max rule.
        #[arg(long, value_delimiter = ',')]
        delta_log2: Vec<u32>,
        #[arg(long, value_parser = rational, default_value = "1/40")]
        c: Rational,
        #[arg(long, value_parser = rational, default_value = "1/50")]
        rho: Rational,
    },
    /// Morrey experiment over several σ, extrapolated to σ = 1/2.
    MorreySweep {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = real)]
        alpha: f64,
        #[arg(long, value_parser = real, value_delimiter = ',', default_value = "1.5,2")]
        p: Vec<f64>,
        #[arg(long, value_parser = rational, value_delimiter = ',', default_value = "1/5,1/4,1/3")]
        sigmas: Vec<Rational>,
        /// Smallest number of nonzero time indices at the first scale.
        #[arg(long, default_value_t = 12)]
        min_times: u64,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Aligned,
    Literal,
}

#[derive(Subcommand, Debug)]
pub enum Extension {
    /// Compares |ĝdσ| with |e^{ix_nΔ}f| at seeded random points.
    CheckRed {
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Convention::Aligned)]
        convention: Convention,
    },
    /// Lower bound of the extension of a Knapp cell on its tube.
    Knapp {
        #[arg(long)]
        delta_log2: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
}
