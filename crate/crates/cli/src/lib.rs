//! Command-line front end for `dynzsig-core`.
//!
//! [`run`] does everything the binary does but returns the exit code and
//! both output streams instead of printing them.

pub mod cache;
pub mod commands;
pub mod config;
pub mod expr;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Format, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dynzsig",
    version,
    about = "Primitive divisors in orbits of polynomial maps over Q"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Trial division bound for factoring.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub trial_bound: u64,
    /// Iterations allowed to each Pollard rho attempt.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub rho_budget: u64,
    /// Largest number of decimal digits in an orbit value.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub digit_budget: u64,
    /// Target accuracy for canonical heights.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0x5eed_2024)]
    pub seed: u64,
    /// Factor cache file (JSON lines).
    #[arg(long, global = true, env = cache::CACHE_ENV)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl GlobalArgs {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            trial_bound: self.trial_bound,
            rho_budget: self.rho_budget,
            digit_budget: self.digit_budget,
            tol: self.tol,
            seed: self.seed,
            cache: self.cache.clone(),
            format: self.format,
        }
    }
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    /// The map, e.g. "z^2+1".
    #[arg(long, allow_hyphen_values = true)]
    pub poly: String,
    /// Base point of the orbit.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub alpha: String,
    /// Number of terms.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct PlacesArg {
    /// Finite places as a comma-separated prime list; ∞ is always included.
    #[arg(long, default_value = "")]
    pub places: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact orbit values φⁿ(α) − α with their ideals.
    Orbit(OrbitArgs),
    /// Indices without a primitive divisor, with per-term splits.
    Zsigmondy(OrbitArgs),
    /// Rigid-divisibility check of the orbit numerators.
    RigidCheck {
        #[command(flatten)]
        orbit: OrbitArgs,
        #[command(flatten)]
        places: PlacesArg,
    },
    /// Weil, map, canonical and local heights of a point.
    Heights {
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        /// The point.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        alpha: String,
        #[command(flatten)]
        places: PlacesArg,
    },
    /// The bound M on the Zsigmondy set and its exceptional sets.
    Bound(BoundArgs),
    /// Powerfulness and the place set of the squarefree factors.
    PowerfulCheck {
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
    },
    /// Hypotheses, growth and valuation stability for a product of powers.
    FamilyCheck {
        /// The map as a product, e.g. "(z+2)^2*(z+3)^2".
        #[arg(long)]
        factors: String,
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
}

/// Either all of `--d --B --hhat --htilde --s-size`, or `--poly` to derive
/// them.
#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, conflicts_with_all = ["d", "b", "hhat", "htilde", "s_size"], allow_hyphen_values = true)]
    pub poly: Option<String>,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub alpha: String,
    /// Terms to test for empirical J membership (with --poly).
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[command(flatten)]
    pub places: PlacesArg,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hhat: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub htilde: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long)]
    pub s_size: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_CONFIG,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    commands::execute(&cli)
}
