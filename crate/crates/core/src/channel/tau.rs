//! Joint eigenvalues `τ_{λ,λ'} = Pr[U P^λ U† ∈ ±Z and U P^{λ'} U† ∈ ±Z]`.
//!
//! Per qubit the pair `(λ_q, λ'_q)` is one of 16 symbols `λ_q + 4λ'_q`. The
//! MPS has one site per qubit pair with physical dimension 256 and bond
//! dimension `16^{d-1}`.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::column::ColumnKernel;
use crate::brickwork::{check_even, Depth};
use crate::clifford::two_qubit_group;
use crate::error::{Error, Result};
use crate::mps::PeriodicMps;
use crate::pauli::PauliString;

/// Largest depth for which the τ-MPS is built (bond `16^{d-1}`).
pub const MAX_TAU_DEPTH: usize = 3;

const CACHE_MAGIC: &[u8; 4] = b"SSGK";
const CACHE_VERSION: u32 = 1;
const CACHE_FILE: &str = "gamma-v1.bin";

#[inline]
fn symbol(l: u8, lp: u8) -> usize {
    l as usize + 4 * lp as usize
}

/// Split two 2-qubit labels into the per-qubit symbol pair index `s_a + 16 s_b`.
#[inline]
fn pair_index(g: u8, gp: u8) -> usize {
    symbol(g & 3, gp & 3) + 16 * symbol(g >> 2, gp >> 2)
}

/// Two-qubit gate kernel on symbol pairs, averaged over the Clifford group:
/// `data[out·256 + in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaKernel {
    data: Vec<f64>,
}

impl GammaKernel {
    pub fn build() -> Self {
        let group = two_qubit_group();
        let w = 1.0 / group.len() as f64;
        let mut data = vec![0.0; 256 * 256];
        for u in group.iter() {
            for g in 0..16u8 {
                let h = u.apply(g).0;
                for gp in 0..16u8 {
                    let hp = u.apply(gp).0;
                    data[pair_index(h, hp) * 256 + pair_index(g, gp)] += w;
                }
            }
        }
        Self { data }
    }

    /// Process-wide kernel, built on first use.
    pub fn global() -> &'static Self {
        static K: OnceLock<GammaKernel> = OnceLock::new();
        K.get_or_init(Self::build)
    }

    pub fn get(&self, out: usize, input: usize) -> f64 {
        self.data[out * 256 + input]
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(CACHE_MAGIC)?;
        f.write_all(&CACHE_VERSION.to_le_bytes())?;
        for x in &self.data {
            f.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() != 8 + 8 * 65536 || &bytes[..4] != CACHE_MAGIC {
            return Err(Error::Cache(format!("{} is not a kernel cache", path.display())));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let data = bytes[8..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(Self { data })
    }

    /// Load from `dir`, or build and write the cache file when absent or stale.
    pub fn load_or_build(dir: &Path) -> Result<Self> {
        let path = dir.join(CACHE_FILE);
        match Self::load(&path) {
            Ok(k) => Ok(k),
            Err(e) => {
                log::info!("rebuilding kernel cache: {e}");
                let k = Self::build();
                std::fs::create_dir_all(dir)?;
                k.save(&path)?;
                Ok(k)
            }
        }
    }
}

/// τ over interleaved pair symbols, finite depth `d ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairEigenvalueMps {
    n: usize,
    d: usize,
    inner: PeriodicMps,
}

/// Physical digits of the pair-site τ-MPS for `(λ, λ')`.
pub fn pair_digits(lambda: &PauliString, lambda2: &PauliString) -> Vec<usize> {
    let (a, b) = (lambda.labels(), lambda2.labels());
    (0..a.len() / 2).map(|j| symbol(a[2 * j], b[2 * j]) + 16 * symbol(a[2 * j + 1], b[2 * j + 1])).collect()
}

impl PairEigenvalueMps {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.d
    }

    pub fn inner(&self) -> &PeriodicMps {
        &self.inner
    }

    pub fn value(&self, lambda: &PauliString, lambda2: &PauliString) -> Result<f64> {
        for p in [lambda, lambda2] {
            if p.n() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: p.n() });
            }
        }
        self.inner.evaluate(&pair_digits(lambda, lambda2))
    }

    /// Equivalent MPS with one site per qubit (physical dimension 16). The
    /// first qubit of each pair forwards its symbol on a bond of size `16χ`.
    pub fn qubit_sites(&self) -> Result<PeriodicMps> {
        let mut sites = Vec::with_capacity(self.n);
        for j in 0..self.inner.len() {
            let t = self.inner.site(j);
            let (l, r) = t[0].shape();
            sites.push(
                (0..16)
                    .map(|s| {
                        let mut m = DMatrix::zeros(l, 16 * l);
                        m.view_mut((0, s * l), (l, l)).fill_with_identity();
                        m
                    })
                    .collect(),
            );
            sites.push(
                (0..16)
                    .map(|s2| {
                        let mut m = DMatrix::zeros(16 * l, r);
                        for s in 0..16 {
                            m.view_mut((s * l, 0), (l, r)).copy_from(&t[s + 16 * s2]);
                        }
                        m
                    })
                    .collect(),
            );
        }
        PeriodicMps::new(sites)
    }
}

/// τ-MPS for `n` qubits at depth `1 ≤ d ≤ MAX_TAU_DEPTH`.
pub fn build_tau_mps(n: usize, d: usize) -> Result<PairEigenvalueMps> {
    build_tau_mps_with(n, d, GammaKernel::global())
}

pub fn build_tau_mps_with(n: usize, d: usize, kernel: &GammaKernel) -> Result<PairEigenvalueMps> {
    check_even(n)?;
    if d == 0 {
        return Err(Error::Precondition("depth 0 joint eigenvalues are closed-form; use PairChannel".into()));
    }
    if d > MAX_TAU_DEPTH {
        return Err(Error::BondCap { bond: 16usize.saturating_pow(d as u32 - 1), cap: 16usize.pow(MAX_TAU_DEPTH as u32 - 1) });
    }
    // Both Paulis must end Z-type on every qubit.
    let pi: Vec<f64> = (0..16).map(|s| if s & 1 == 0 && (s >> 2) & 1 == 0 { 1.0 } else { 0.0 }).collect();
    let mut terminal = vec![0.0; 256];
    for (input, slot) in terminal.iter_mut().enumerate() {
        *slot = (0..256).map(|out| pi[out % 16] * pi[out / 16] * kernel.get(out, input)).sum();
    }
    let inputs: Vec<(usize, usize)> = (0..256).map(|v| (v % 16, v / 16)).collect();
    let column = ColumnKernel { alphabet: 16, gate: &kernel.data, terminal: &terminal, inputs: &inputs };
    let inner = PeriodicMps::uniform(column.build(d), n / 2)?;
    Ok(PairEigenvalueMps { n, d, inner })
}

/// Joint eigenvalues for any depth, closed-form at `d = 0` and `d = ∞`.
#[derive(Clone, Debug, PartialEq)]
pub enum PairChannel {
    Local { n: usize },
    Brickwork(PairEigenvalueMps),
    Global { n: usize },
}

impl PairChannel {
    pub fn new(n: usize, depth: Depth) -> Result<Self> {
        check_even(n)?;
        Ok(match depth {
            Depth::Finite(0) => PairChannel::Local { n },
            Depth::Finite(d) => PairChannel::Brickwork(build_tau_mps(n, d)?),
            Depth::Infinite => PairChannel::Global { n },
        })
    }

    pub fn n(&self) -> usize {
        match self {
            PairChannel::Local { n } | PairChannel::Global { n } => *n,
            PairChannel::Brickwork(m) => m.n,
        }
    }

    pub fn tau(&self, lambda: &PauliString, lambda2: &PauliString) -> Result<f64> {
        let n = self.n();
        for p in [lambda, lambda2] {
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.n() });
            }
        }
        Ok(match self {
            PairChannel::Local { .. } => lambda
                .labels()
                .iter()
                .zip(lambda2.labels())
                .map(|(&a, &b)| match (a, b) {
                    (0, 0) => 1.0,
                    (0, _) | (_, 0) => 1.0 / 3.0,
                    (a, b) if a == b => 1.0 / 3.0,
                    _ => 0.0,
                })
                .product(),
            PairChannel::Global { n } => {
                let q = 2f64.powi(*n as i32);
                let t = 1.0 / (q + 1.0);
                if !lambda.commutes_with(lambda2) {
                    0.0
                } else if lambda.is_identity() {
                    if lambda2.is_identity() {
                        1.0
                    } else {
                        t
                    }
                } else if lambda2.is_identity() || lambda.labels() == lambda2.labels() {
                    t
                } else {
                    // Ordered pairs of distinct non-identity Z strings over all
                    // ordered pairs of distinct commuting non-identity Paulis.
                    (q - 1.0) * (q - 2.0) / ((q * q - 1.0) * (q * q / 2.0 - 2.0))
                }
            }
            PairChannel::Brickwork(m) => m.value(lambda, lambda2)?,
        })
    }
}

/// `τ_{λ,λ'}` for any pair channel.
pub fn tau_value(channel: &PairChannel, lambda: &PauliString, lambda2: &PauliString) -> Result<f64> {
    channel.tau(lambda, lambda2)
}
