use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod manifest;

#[derive(Parser, Debug, Serialize)]
#[command(name = "entcorr", version, about = "Entanglement and correlation sweeps for spin and boson chains")]
pub struct Cli {
    /// Environment variable holding the worker thread count.
    #[arg(long, global = true, default_value = "ENTCORR_THREADS")]
    pub threads_env: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Nearest-neighbour concurrence, three- and four-tangle of the Ising chain.
    IsingTangles(TanglesArgs),
    /// Norms or spectra of correlated reduced states of the Ising chain.
    IsingNorms(IsingNormsArgs),
    /// Correlated-state norms of the Bose-Hubbard chain.
    Bh(BhArgs),
    /// Tangle against correlation norm for random pure states.
    Scatter(ScatterArgs),
    /// Cross-engine consistency checks.
    Verify(VerifyArgs),
    /// Re-runs a manifest and compares output digests.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Grid {
    #[arg(long)]
    pub j_min: Option<f64>,
    #[arg(long)]
    pub j_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Grid {
    pub fn points(&self, default: (f64, f64, usize)) -> Vec<f64> {
        entcorr::sweep::grid(
            self.j_min.unwrap_or(default.0),
            self.j_max.unwrap_or(default.1),
            self.steps.unwrap_or(default.2),
        )
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SchemeArg {
    Absolute,
    Renormalized,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Tau4Arg {
    /// Filter invariant of degree six.
    A,
    /// Filter invariant of degree twelve.
    C,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Quantity {
    Norms,
    Spectra,
}

#[derive(Args, Debug, Serialize)]
pub struct TanglesArgs {
    #[command(flatten)]
    pub grid: Grid,
    #[arg(long, value_enum, default_value = "absolute")]
    pub scheme: SchemeArg,
    #[arg(long, value_enum, default_value = "a")]
    pub tau4: Tau4Arg,
    /// Anisotropy; 1 is the transverse-field Ising chain.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Four-tangle level marking its onset.
    #[arg(long, default_value_t = 1e-4)]
    pub onset_threshold: f64,
}

fn parse_distances(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad distance {x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|d| {
            if d.is_empty() || d.len() > 3 || d.contains(&0) {
                Err(format!("need 1 to 3 positive distances, got {s:?}"))
            } else {
                Ok(d)
            }
        })
}

#[derive(Args, Debug, Serialize)]
pub struct IsingNormsArgs {
    #[command(flatten)]
    pub grid: Grid,
    /// Schatten orders.
    #[arg(long = "p", value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub p: Vec<f64>,
    /// Site distances of one tuple, e.g. `1,1`; repeat for more tuples.
    #[arg(long, value_parser = parse_distances)]
    pub distances: Vec<Vec<usize>>,
    #[arg(long, value_enum, default_value = "norms")]
    pub quantity: Quantity,
    /// Finite periodic chain instead of the thermodynamic limit.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct BhArgs {
    #[command(flatten)]
    pub grid: Grid,
    #[arg(long = "N", alias = "n", default_value_t = 9)]
    pub particles: usize,
    #[arg(long = "L", alias = "l", default_value_t = 9)]
    pub sites: usize,
    #[arg(long = "p", value_delimiter = ',', default_values_t = [1.0, 2.0])]
    pub p: Vec<f64>,
    #[arg(long, value_parser = parse_distances)]
    pub distances: Vec<Vec<usize>>,
    #[arg(long, value_enum, default_value = "norms")]
    pub quantity: Quantity,
    /// Skip strong-coupling and ideal-gas reference rows.
    #[arg(long)]
    pub no_overlays: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum MethodArg {
    Haar,
    Acin3,
}

#[derive(Args, Debug, Serialize)]
pub struct ScatterArgs {
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(3..=4))]
    pub qubits: u8,
    #[arg(long, default_value_t = 40_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "haar")]
    pub method: MethodArg,
    /// Points per family curve.
    #[arg(long, default_value_t = 201)]
    pub family_points: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Adds this offset to one free-fermion contraction entry.
    #[arg(long, default_value_t = 0.0, hide = true)]
    pub perturb_m: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Directory for the regenerated files.
    #[arg(long, default_value = "replay")]
    pub out: PathBuf,
}

fn configure_threads(var: &str) -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var(var) {
        let n: usize = raw.trim().parse().map_err(|_| anyhow::anyhow!("{var}={raw:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = configure_threads(&cli.threads_env) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::run(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<commands::UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
