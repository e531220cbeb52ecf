//! Command line configuration and its validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use miw_core::constructor::{auto_counts, MAX_POINTS};
use miw_core::states::MAX_ORDER;
use miw_core::stein::TestFunction;
use miw_core::EnergyState64;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(name = "miw", version, about = "Experiments with MIW sequences of harmonic oscillator states")]
pub struct Config {
    #[command(subcommand)]
    pub command: Command,

    /// Output path for the artifact; `-` writes to standard output.
    #[arg(long, global = true, default_value = "-")]
    pub out: String,

    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(flatten)]
    pub tolerances: Tolerances,
}

/// Pass/fail thresholds used in summaries and exit codes.
#[derive(Args, Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative recursion and boundary residual accepted by `construct` and `verify`.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub residual_tol: f64,

    /// Relative energy drift accepted by `simulate`.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub drift_tol: f64,

    /// Stein residual accepted by `stein`.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub stein_tol: f64,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    /// Build an MIW sequence and write it as `.miw.json`.
    Construct(SequenceArgs),
    /// Recompute the invariants of a saved sequence.
    Verify(InputArgs),
    /// Exact Wasserstein-1 distance, per-region distances and the mixture bound.
    Wasserstein(SequenceArgs),
    /// Wasserstein rate table over a geometric N grid.
    Rates(SweepArgs),
    /// Gap and span diagnostics over a geometric N grid.
    Gaps(SweepArgs),
    /// Gradient of the energy along a sequence, with the stationarity limit.
    Gradient(GradientArgs),
    /// Centre scaling of the symmetric first excited state.
    Center(CenterArgs),
    /// Sample the Stein solution g_h on one region.
    Stein(SteinArgs),
    /// Integrate the MIW Hamiltonian dynamics.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceArgs {
    /// Energy level ℓ.
    #[arg(long, default_value_t = 0)]
    pub ell: usize,
    /// Points per region, comma separated (ℓ + 1 values).
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<usize>>,
    /// Total number of points, split across regions by mass.
    #[arg(long)]
    pub n: Option<usize>,
    /// Read the sequence from a `.miw.json` file instead of constructing it.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputArgs {
    /// A `.miw.json` file written by `construct`.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0)]
    pub ell: usize,
    /// Geometric grid `start:stop:factor`.
    #[arg(long, default_value = "64:4096:2")]
    pub n_grid: Grid,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientArgs {
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Points t at which to report ∂H at n(t) and the limit value.
    #[arg(long = "t", value_delimiter = ',', allow_hyphen_values = true, default_value = "-1.5,0.5,2.0")]
    pub probes: Vec<f64>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterArgs {
    /// Geometric grid of even totals `start:stop:factor`.
    #[arg(long, default_value = "50:3200:2")]
    pub n_grid: Grid,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinArgs {
    #[arg(long, default_value_t = 0)]
    pub ell: usize,
    /// Region index k, 0 ≤ k ≤ ℓ.
    #[arg(long, default_value_t = 0)]
    pub region: usize,
    /// Test function: identity, tanh, softplus or sin.
    #[arg(long, default_value = "identity")]
    pub h: String,
    /// Number of sample points.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// Also evaluate the bound on |E_R[h] - E_P[h]| for the auto sequence of this size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Weight β of the boundary terms in the bound.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Start from a saved sequence.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Start from a constructed sequence of this level (with --counts or --n).
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<usize>>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Start from the fixed five-point configuration scaled to this energy.
    #[arg(long)]
    pub arbitrary: Option<f64>,
    /// Initial momenta, comma separated (default: zeros).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub momenta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    /// Keep every stride-th step.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
}

/// `start:stop:factor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub start: usize,
    pub stop: usize,
    pub factor: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, factor] = parts.as_slice() else {
            return Err(format!("expected start:stop:factor, got {s:?}"));
        };
        let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Grid { start: num(start)?, stop: num(stop)?, factor: num(factor)? })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.factor)
    }
}

impl Grid {
    pub fn values(&self) -> Vec<usize> {
        miw_core::metrics::geometric_grid(self.start, self.stop, self.factor).unwrap_or_default()
    }

    fn check(&self, min: usize) -> Result<(), String> {
        if self.factor < 2 || self.start < min || self.stop < self.start || self.stop > MAX_POINTS {
            return Err(format!("n-grid {self} needs factor ≥ 2 and {min} ≤ start ≤ stop ≤ {MAX_POINTS}"));
        }
        Ok(())
    }
}

fn check_ell(ell: usize) -> Result<(), String> {
    if ell > MAX_ORDER {
        return Err(format!("ell = {ell} exceeds {MAX_ORDER}"));
    }
    Ok(())
}

/// Counts are explicit, or derived from `n`; the allocation is checked here so
/// that a too-small N is a configuration error.
fn check_points(ell: usize, counts: &Option<Vec<usize>>, n: Option<usize>) -> Result<(), String> {
    check_ell(ell)?;
    match (counts, n) {
        (Some(_), Some(_)) => Err("give either --counts or --n, not both".into()),
        (None, None) => Err("give --counts or --n".into()),
        (Some(c), None) => {
            if c.len() != ell + 1 {
                return Err(format!("ell = {ell} needs {} counts, got {}", ell + 1, c.len()));
            }
            let min = if ell == 0 { 2 } else { 1 };
            if c.iter().any(|&v| v < min) {
                return Err(format!("every count must be at least {min}"));
            }
            if c.iter().sum::<usize>() > MAX_POINTS {
                return Err(format!("at most {MAX_POINTS} points"));
            }
            Ok(())
        }
        (None, Some(n)) => {
            if n > MAX_POINTS {
                return Err(format!("at most {MAX_POINTS} points"));
            }
            let state = EnergyState64::new(ell).map_err(|e| e.to_string())?;
            auto_counts(&state, n).map(|_| ()).map_err(|e| e.to_string())
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

impl Config {
    /// Rejects inconsistent configurations before any experiment runs.
    pub fn validate(&self) -> Result<(), String> {
        if self.out.is_empty() {
            return Err("--out must be a path or -".into());
        }
        if self.jobs == Some(0) {
            return Err("--jobs must be at least 1".into());
        }
        positive("--residual-tol", self.tolerances.residual_tol)?;
        positive("--drift-tol", self.tolerances.drift_tol)?;
        positive("--stein-tol", self.tolerances.stein_tol)?;
        match &self.command {
            Command::Construct(a) => {
                if a.input.is_some() {
                    return Err("construct builds a sequence; --input is not accepted".into());
                }
                check_points(a.ell, &a.counts, a.n)
            }
            Command::Verify(_) => Ok(()),
            Command::Wasserstein(a) => check_sequence(a),
            Command::Gradient(a) => {
                check_sequence(&a.sequence)?;
                if a.probes.iter().any(|t| !t.is_finite()) {
                    return Err("--t values must be finite".into());
                }
                Ok(())
            }
            Command::Rates(a) | Command::Gaps(a) => {
                check_ell(a.ell)?;
                a.n_grid.check(2)?;
                let min = a.n_grid.start;
                check_points(a.ell, &None, Some(min)).map_err(|e| format!("n-grid start {min}: {e}"))
            }
            Command::Center(a) => {
                a.n_grid.check(4)?;
                if a.n_grid.values().iter().any(|n| n % 2 == 1) {
                    return Err(format!("n-grid {} must contain only even N", a.n_grid));
                }
                Ok(())
            }
            Command::Stein(a) => {
                check_ell(a.ell)?;
                if a.region > a.ell {
                    return Err(format!("region {} does not exist for ell = {}", a.region, a.ell));
                }
                if TestFunction::parse(&a.h).is_none() {
                    return Err(format!("unknown test function {:?} (identity, tanh, softplus, sin)", a.h));
                }
                if a.grid == 0 {
                    return Err("--grid must be positive".into());
                }
                if !(0.0..=1.0).contains(&a.beta) {
                    return Err(format!("--beta {} outside [0, 1]", a.beta));
                }
                if let Some(n) = a.n {
                    check_points(a.ell, &None, Some(n))?;
                }
                Ok(())
            }
            Command::Simulate(a) => {
                positive("--dt", a.dt)?;
                if !(a.t_max >= 0.0 && a.t_max.is_finite()) {
                    return Err(format!("--t-max must be non-negative, got {}", a.t_max));
                }
                if a.stride == 0 {
                    return Err("--stride must be at least 1".into());
                }
                let sources = [a.init.is_some(), a.ell.is_some(), a.arbitrary.is_some()];
                if sources.iter().filter(|&&s| s).count() != 1 {
                    return Err("give exactly one of --init, --ell or --arbitrary".into());
                }
                if let Some(ell) = a.ell {
                    check_points(ell, &a.counts, a.n)?;
                } else if a.counts.is_some() || a.n.is_some() {
                    return Err("--counts and --n go with --ell".into());
                }
                if let Some(e) = a.arbitrary {
                    positive("--arbitrary", e)?;
                }
                if let Some(p) = &a.momenta {
                    if p.iter().any(|v| !v.is_finite()) {
                        return Err("--momenta must be finite".into());
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_sequence(a: &SequenceArgs) -> Result<(), String> {
    if a.input.is_some() {
        if a.counts.is_some() || a.n.is_some() {
            return Err("--input excludes --counts and --n".into());
        }
        return check_ell(a.ell);
    }
    check_points(a.ell, &a.counts, a.n)
}
