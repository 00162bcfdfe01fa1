//! Experiment configuration and the observable and state specifications
//! shared by the subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shallow_shadows::brickwork::Depth;
use shallow_shadows::inverse::{InversionConfig, Regularization};
use shallow_shadows::mps::PeriodicMps;
use shallow_shadows::shadows::{ShallowObservable, SparseObservable};
use shallow_shadows::stabilizer::StabilizerState;

use crate::error::{usage, CliError, Result};

/// Largest GHZ projector expanded into its `2^n` stabilizer terms.
const MAX_EXPANDED_PROJECTOR: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NamedState {
    Ghz,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(NamedState),
    Generators { generators: Vec<String> },
}

impl StateSpec {
    pub fn build(&self, n: usize) -> Result<StabilizerState> {
        let state = match self {
            StateSpec::Named(NamedState::Ghz) => StabilizerState::ghz(n),
            StateSpec::Named(NamedState::Zero) => StabilizerState::zero(n),
            StateSpec::Generators { generators } => StabilizerState::from_strings(generators)?,
        };
        if state.n() != n {
            return usage(format!("state acts on {} qubits, expected {n}", state.n()));
        }
        if !state.is_pure() {
            return usage(format!("{} generators do not fix a pure state on {n} qubits", state.k()));
        }
        Ok(state)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NamedObservable {
    GhzProjector,
    ClusterHamiltonian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Named(NamedObservable),
    Terms { terms: Vec<(f64, String)> },
    /// Pauli-coefficient MPS, as written by `PeriodicMps::save`.
    Mps { mps: PathBuf },
}

/// An observable in every form the estimators and bounds can use.
pub struct Observable {
    pub sparse: Option<SparseObservable>,
    pub mps: ShallowObservable,
    /// The state this observable projects onto, if it is a stabilizer projector.
    pub projector_of: Option<StabilizerState>,
}

impl ObservableSpec {
    pub fn build(&self, n: usize) -> Result<Observable> {
        let obs = match self {
            ObservableSpec::Named(NamedObservable::GhzProjector) => {
                let ghz = StabilizerState::ghz(n);
                let sparse = if n <= MAX_EXPANDED_PROJECTOR {
                    Some(SparseObservable::stabilizer_projector(&ghz)?)
                } else {
                    None
                };
                Observable { sparse, mps: ShallowObservable::ghz_projector(n)?, projector_of: Some(ghz) }
            }
            ObservableSpec::Named(NamedObservable::ClusterHamiltonian) => {
                Observable::from_sparse(SparseObservable::cluster_hamiltonian(n)?)?
            }
            ObservableSpec::Terms { terms } => {
                if terms.is_empty() {
                    return usage("observable has no terms");
                }
                let refs: Vec<(f64, &str)> = terms.iter().map(|(c, s)| (*c, s.as_str())).collect();
                Observable::from_sparse(SparseObservable::from_strings(&refs)?)?
            }
            ObservableSpec::Mps { mps } => {
                let beta = PeriodicMps::load(mps).map_err(|e| match e {
                    shallow_shadows::Error::Io(source) => CliError::File { path: mps.display().to_string(), source },
                    e => e.into(),
                })?;
                Observable { sparse: None, mps: ShallowObservable::new(beta)?, projector_of: None }
            }
        };
        if obs.mps.n() != n {
            return usage(format!("observable acts on {} qubits, expected {n}", obs.mps.n()));
        }
        Ok(obs)
    }
}

impl Observable {
    fn from_sparse(o: SparseObservable) -> Result<Self> {
        Ok(Self { mps: ShallowObservable::from_sparse(&o)?, sparse: Some(o), projector_of: None })
    }
}

/// Parse `coefficient:PAULI` or a bare `PAULI` (coefficient one).
pub fn parse_term(s: &str) -> std::result::Result<(f64, String), String> {
    match s.split_once(':') {
        Some((c, p)) => {
            let c: f64 = c.trim().parse().map_err(|e| format!("bad coefficient {c:?}: {e}"))?;
            Ok((c, p.trim().to_string()))
        }
        None => Ok((1.0, s.trim().to_string())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionSpec {
    /// Bond schedule; the last entry is the target bond dimension.
    #[serde(default = "default_bonds")]
    pub bonds: Vec<usize>,
    /// Required herald epsilon `√C_0`.
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default = "default_regularization")]
    pub regularization: Regularization,
    #[serde(default)]
    pub seed: u64,
}

fn default_bonds() -> Vec<usize> {
    vec![2, 3, 4]
}

fn default_eps() -> f64 {
    1e-3
}

fn default_max_sweeps() -> usize {
    500
}

fn default_regularization() -> Regularization {
    Regularization::Translational
}

impl Default for InversionSpec {
    fn default() -> Self {
        Self {
            bonds: default_bonds(),
            eps: default_eps(),
            max_sweeps: default_max_sweeps(),
            regularization: default_regularization(),
            seed: 0,
        }
    }
}

impl InversionSpec {
    pub fn to_config(&self) -> Result<InversionConfig> {
        if !(self.eps > 0.0) {
            return usage("eps must be positive");
        }
        let mut cfg = InversionConfig::with_growth(self.bonds.clone());
        cfg.eps_stop = self.eps * self.eps;
        cfg.max_sweeps = self.max_sweeps;
        cfg.regularization = self.regularization;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Sparse terms when available, otherwise the MPS contraction.
    #[default]
    Auto,
    Sparse,
    Mps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub d: Depth,
    pub state: StateSpec,
    pub observable: ObservableSpec,
    /// Number of snapshots `N`.
    pub shots: usize,
    /// Median-of-means blocks `K`.
    #[serde(default = "one")]
    pub blocks: usize,
    pub seed: u64,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub inversion: InversionSpec,
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n % 2 == 1 {
            return usage(format!("n must be even and positive, got {}", self.n));
        }
        if self.shots == 0 || self.blocks == 0 || !self.shots.is_multiple_of(self.blocks) {
            return usage(format!("{} blocks must divide {} shots", self.blocks, self.shots));
        }
        Ok(())
    }

    pub fn hash(&self) -> Result<String> {
        Ok(hash_hex(&[serde_json::to_vec(self)?.as_slice()]))
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::File { path: path.display().to_string(), source })
}

/// Hex SHA-256 over the concatenated parts.
pub fn hash_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
