//! Command-line driver for depth-modulated classical shadows.

mod commands;
mod config;
mod ensemble;
mod error;
mod reproduce;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shallow_shadows::brickwork::Depth;
use shallow_shadows::inverse::Regularization;
use shallow_shadows::shadows::Direction;

use commands::{EstimateArgs, NormArgs, NormChoice, SampleArgs};
use config::{parse_term, Estimator, ExperimentConfig, InversionSpec, NamedObservable, NamedState, ObservableSpec, StateSpec};
use error::{usage, CliError, Result};

/// Exit status for a finished inversion that missed its accuracy target.
const EXIT_NOT_HERALDED: u8 = 2;

#[derive(Parser)]
#[command(name = "shallow-shadows", version, about = "Classical shadows from shallow brickwork Clifford circuits")]
struct Cli {
    /// Directory caching the two-qubit pair kernel between runs.
    #[arg(long, global = true, env = "SHALLOW_SHADOWS_CACHE")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Ensemble {
    /// Number of qubits (even).
    #[arg(long)]
    n: usize,
    /// Circuit depth: a layer count or `inf`.
    #[arg(long)]
    d: Depth,
}

#[derive(Args)]
struct InversionArgs {
    /// Bond schedule, grown when the fit stalls; the last value is the target.
    #[arg(long = "chi", value_delimiter = ',', default_value = "2,3,4")]
    bonds: Vec<usize>,
    /// Required herald epsilon `sqrt(C0)`.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
    #[arg(long, value_enum, default_value_t = RegularizationArg::Translational)]
    regularization: RegularizationArg,
    #[arg(long = "inversion-seed", default_value_t = 0)]
    seed: u64,
}

impl InversionArgs {
    fn spec(&self) -> InversionSpec {
        InversionSpec {
            bonds: self.bonds.clone(),
            eps: self.eps,
            max_sweeps: self.max_sweeps,
            regularization: self.regularization.into(),
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegularizationArg {
    None,
    Translational,
    Norm,
}

impl From<RegularizationArg> for Regularization {
    fn from(r: RegularizationArg) -> Self {
        match r {
            RegularizationArg::None => Regularization::None,
            RegularizationArg::Translational => Regularization::Translational,
            RegularizationArg::Norm => Regularization::Norm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Auto,
    Observable,
    Snapshot,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Auto => Direction::Auto,
            DirectionArg::Observable => Direction::Observable,
            DirectionArg::Snapshot => Direction::Snapshot,
        }
    }
}

#[derive(Args)]
struct ObservableArgs {
    /// Pauli term as `coefficient:PAULI` or `PAULI`; repeat for sums.
    #[arg(long = "term", value_parser = parse_term, conflicts_with_all = ["named", "mps"])]
    terms: Vec<(f64, String)>,
    #[arg(long = "observable", value_enum, conflicts_with = "mps")]
    named: Option<NamedObservable>,
    /// Pauli-coefficient MPS file.
    #[arg(long)]
    mps: Option<PathBuf>,
}

impl ObservableArgs {
    fn spec(&self) -> Option<ObservableSpec> {
        if let Some(named) = self.named {
            Some(ObservableSpec::Named(named))
        } else if let Some(mps) = &self.mps {
            Some(ObservableSpec::Mps { mps: mps.clone() })
        } else if !self.terms.is_empty() {
            Some(ObservableSpec::Terms { terms: self.terms.clone() })
        } else {
            None
        }
    }
}

#[derive(Args)]
struct StateArgs {
    #[arg(long, value_enum, conflicts_with = "generators")]
    state: Option<NamedState>,
    /// Stabilizer generators, comma separated, e.g. `XX,ZZ`.
    #[arg(long, value_delimiter = ',')]
    generators: Vec<String>,
}

impl StateArgs {
    fn spec(&self) -> StateSpec {
        if self.generators.is_empty() {
            StateSpec::Named(self.state.unwrap_or(NamedState::Zero))
        } else {
            StateSpec::Generators { generators: self.generators.clone() }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print measurement-channel eigenvalues `t` for Pauli strings.
    Channel {
        #[command(flatten)]
        ensemble: Ensemble,
        #[arg(long)]
        pauli: Vec<String>,
        /// Write the Pauli-label eigenvalue MPS to this file.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Print joint eigenvalues `tau` for commuting pairs.
    Tau {
        #[command(flatten)]
        ensemble: Ensemble,
        /// A pair `P,Q`; repeat for several.
        #[arg(long)]
        pair: Vec<String>,
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Fit an MPS to the inverse channel eigenvalues.
    Invert {
        #[command(flatten)]
        ensemble: Ensemble,
        #[command(flatten)]
        inversion: InversionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate measurement records for a stabilizer state.
    Sample {
        #[command(flatten)]
        ensemble: Ensemble,
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// First circuit stream, to extend an earlier run.
        #[arg(long, default_value_t = 0)]
        first: u64,
        /// Store each circuit instead of regenerating it from the seed.
        #[arg(long)]
        explicit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate an observable from measurement records.
    Estimate {
        #[arg(long)]
        records: PathBuf,
        #[command(flatten)]
        observable: ObservableArgs,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        #[arg(long, value_enum, default_value_t = Estimator::Auto)]
        estimator: Estimator,
        #[arg(long, value_enum, default_value_t = DirectionArg::Auto)]
        direction: DirectionArg,
        /// Inversion written by `invert`.
        #[arg(long)]
        inverse: Option<PathBuf>,
        #[command(flatten)]
        inversion: InversionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shadow-norm values and bounds.
    Norm {
        #[command(flatten)]
        ensemble: Ensemble,
        #[arg(long, value_enum, default_value_t = NormChoice::Auto)]
        method: NormChoice,
        #[arg(long, conflicts_with_all = ["terms", "named", "mps"])]
        pauli: Option<String>,
        #[command(flatten)]
        observable: ObservableArgs,
        /// Exponent in the depth condition of the locality bound.
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 2.2)]
        c: f64,
        #[arg(long)]
        inverse: Option<PathBuf>,
        #[command(flatten)]
        inversion: InversionArgs,
    },
    /// Regenerate the data behind the standard plots as CSV.
    Reproduce {
        #[command(subcommand)]
        which: Reproduce,
    },
    /// Sample, estimate and bound from a TOML experiment file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<Depth>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Reproduce {
    /// Fidelity of GHZ with itself over repeated experiments.
    GhzFidelity {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
        depths: Vec<Depth>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Squared shadow norms of `Z` strings of every weight.
    PauliNorms {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
        depths: Vec<Depth>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster Hamiltonian energy of GHZ across depths.
    Hamiltonian {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,inf")]
        depths: Vec<Depth>,
        #[arg(long, default_value_t = 20_000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|source| CliError::File { path: p.display().to_string(), source })?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    let cache = cli.cache_dir.as_deref();
    match cli.command {
        Command::Channel { ensemble, pauli, save } => commands::channel(ensemble.n, ensemble.d, &pauli, save.as_deref()),
        Command::Tau { ensemble, pair, save } => commands::tau(ensemble.n, ensemble.d, &pair, save.as_deref(), cache),
        Command::Invert { ensemble, inversion, out } => {
            commands::invert(ensemble.n, ensemble.d, &inversion.spec(), out.as_deref())
        }
        Command::Sample { ensemble, state, count, seed, first, explicit, out } => {
            let state = state.spec();
            let args = SampleArgs { n: ensemble.n, depth: ensemble.d, state: &state, count, seed, first, explicit };
            commands::sample(&args, out.as_deref()).map(drop)
        }
        Command::Estimate { records, observable, blocks, estimator, direction, inverse, inversion, out } => {
            let Some(spec) = observable.spec() else {
                return usage("pass --term, --observable or --mps");
            };
            let snaps = commands::load_records(&records)?;
            let inversion = inversion.spec();
            let args = EstimateArgs {
                blocks,
                estimator,
                direction: direction.into(),
                inverse: inverse.as_deref(),
                inversion: &inversion,
                cache,
            };
            let hash = commands::estimate_hash(&spec, &args, &records)?;
            let report = commands::estimate(&spec.build(snaps[0].n)?, &snaps, &args, hash)?;
            commands::write_json(&report, out.as_deref())
        }
        Command::Norm { ensemble, method, pauli, observable, alpha, c, inverse, inversion } => {
            let inversion = inversion.spec();
            let args = NormArgs {
                method,
                pauli: pauli.as_deref(),
                alpha,
                c,
                inverse: inverse.as_deref(),
                inversion: &inversion,
                cache,
            };
            let report = commands::norm(ensemble.n, ensemble.d, observable.spec().as_ref(), &args)?;
            commands::write_json(&report, None)
        }
        Command::Reproduce { which } => match which {
            Reproduce::GhzFidelity { n, depths, reps, shots, seed, out } => {
                let args = reproduce::FidelityArgs { n, depths: &depths, reps, shots, seed };
                reproduce::ghz_fidelity(&args, cache, writer(out.as_deref())?)
            }
            Reproduce::PauliNorms { n, depths, out } => reproduce::pauli_norms(n, &depths, writer(out.as_deref())?),
            Reproduce::Hamiltonian { n, depths, shots, seed, out } => {
                let args = reproduce::HamiltonianArgs { n, depths: &depths, shots, seed };
                reproduce::hamiltonian(&args, cache, writer(out.as_deref())?)
            }
        },
        Command::Run { config, n, d, shots, blocks, seed, output } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.n = n.unwrap_or(cfg.n);
            cfg.d = d.unwrap_or(cfg.d);
            cfg.shots = shots.unwrap_or(cfg.shots);
            cfg.blocks = blocks.unwrap_or(cfg.blocks);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.output = output.or(cfg.output);
            let run = commands::run(&cfg, cache)?;
            if let Some(path) = &run.path {
                commands::write_json(&run.report, Some(path))?;
            }
            commands::write_json(&run.report, None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (CliError::NotHeralded(_) | CliError::Core(shallow_shadows::Error::NotHeralded(_)))) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NOT_HERALDED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
