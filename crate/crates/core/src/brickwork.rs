//! Circular brickwork circuits of random Clifford gates.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{
    apply_local_in_place, one_qubit_group, random_clifford, two_qubit_group, CliffordTableau,
    LocalClifford,
};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Circuit depth; `Infinite` stands for a uniformly random global Clifford.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "DepthRepr", try_from = "DepthRepr")]
pub enum Depth {
    Finite(usize),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DepthRepr {
    Layers(usize),
    Named(String),
}

impl From<Depth> for DepthRepr {
    fn from(d: Depth) -> Self {
        match d {
            Depth::Finite(d) => DepthRepr::Layers(d),
            Depth::Infinite => DepthRepr::Named("inf".into()),
        }
    }
}

impl TryFrom<DepthRepr> for Depth {
    type Error = Error;

    fn try_from(r: DepthRepr) -> Result<Self> {
        match r {
            DepthRepr::Layers(d) => Ok(Depth::Finite(d)),
            DepthRepr::Named(s) => s.parse(),
        }
    }
}

impl FromStr for Depth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinite" | "∞" => Ok(Depth::Infinite),
            other => other
                .parse()
                .map(Depth::Finite)
                .map_err(|_| Error::Precondition(format!("invalid depth {other:?}"))),
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(d) => write!(f, "{d}"),
            Depth::Infinite => f.write_str("inf"),
        }
    }
}

pub(crate) fn check_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::OddQubitCount(n));
    }
    Ok(())
}

/// Qubit pairs acted on by brickwork layer `layer >= 1` (0-based qubits).
/// Odd layers pair `(0,1),(2,3),…`; even layers pair `(1,2),…,(n-1,0)`.
pub fn layer_pairs(n: usize, layer: usize) -> Vec<[usize; 2]> {
    let offset = if layer % 2 == 1 { 0 } else { 1 };
    (0..n / 2).map(|i| [2 * i + offset, (2 * i + offset + 1) % n]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrickworkSpec {
    n: usize,
    depth: Depth,
    seed: u64,
}

impl BrickworkSpec {
    pub fn new(n: usize, depth: Depth, seed: u64) -> Result<Self> {
        check_even(n)?;
        Ok(Self { n, depth, seed })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> Depth {
        self.depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Gate placements per layer. Layer 0 holds `n` single-qubit slots.
    /// Empty for infinite depth.
    pub fn layout(&self) -> Vec<Vec<Vec<usize>>> {
        let Depth::Finite(d) = self.depth else {
            return Vec::new();
        };
        let mut layers = vec![(0..self.n).map(|q| vec![q]).collect::<Vec<_>>()];
        for layer in 1..=d {
            layers.push(layer_pairs(self.n, layer).iter().map(|p| p.to_vec()).collect());
        }
        layers
    }
}

/// A local Clifford placed on one qubit (`qubits[0] == qubits[1]`) or a pair.
#[derive(Clone, Debug)]
pub struct PlacedGate {
    pub qubits: [usize; 2],
    pub gate: Cow<'static, LocalClifford>,
}

impl PlacedGate {
    pub fn support(&self) -> &[usize] {
        if self.gate.arity() == 1 {
            &self.qubits[..1]
        } else {
            &self.qubits
        }
    }
}

/// A sampled measurement unitary.
#[derive(Clone, Debug)]
pub enum Circuit {
    /// Gates layer by layer, layer 0 first.
    Layers { n: usize, layers: Vec<Vec<PlacedGate>> },
    /// A global Clifford given by its tableau.
    Global(CliffordTableau),
}

impl Circuit {
    pub fn sample<R: Rng + ?Sized>(n: usize, depth: Depth, rng: &mut R) -> Result<Self> {
        check_even(n)?;
        let d = match depth {
            Depth::Infinite => return Ok(Circuit::Global(random_clifford(n, rng))),
            Depth::Finite(d) => d,
        };
        let one = one_qubit_group();
        let two = two_qubit_group();
        let mut layers = Vec::with_capacity(d + 1);
        layers.push(
            (0..n)
                .map(|q| PlacedGate { qubits: [q, q], gate: Cow::Borrowed(one.get(one.sample(rng))) })
                .collect(),
        );
        for layer in 1..=d {
            layers.push(
                layer_pairs(n, layer)
                    .into_iter()
                    .map(|qubits| PlacedGate { qubits, gate: Cow::Borrowed(two.get(two.sample(rng))) })
                    .collect(),
            );
        }
        Ok(Circuit::Layers { n, layers })
    }

    pub fn n(&self) -> usize {
        match self {
            Circuit::Layers { n, .. } => *n,
            Circuit::Global(t) => t.n(),
        }
    }

    pub fn layers(&self) -> Option<&[Vec<PlacedGate>]> {
        match self {
            Circuit::Layers { layers, .. } => Some(layers),
            Circuit::Global(_) => None,
        }
    }

    /// `U P U†`.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        match self {
            Circuit::Layers { n, layers } => {
                if p.n() != *n {
                    return Err(Error::DimensionMismatch { expected: *n, got: p.n() });
                }
                let mut out = p.clone();
                for layer in layers {
                    for g in layer {
                        apply_local_in_place(&g.gate, g.support(), &mut out);
                    }
                }
                Ok(out)
            }
            Circuit::Global(t) => t.conjugate(p),
        }
    }

    pub fn to_tableau(&self) -> CliffordTableau {
        match self {
            Circuit::Layers { n, layers } => {
                let mut t = CliffordTableau::identity(*n);
                for layer in layers {
                    for g in layer {
                        t.apply_local(&g.gate, g.support());
                    }
                }
                t
            }
            Circuit::Global(t) => t.clone(),
        }
    }
}

/// Sample a brickwork unitary and return its tableau.
pub fn sample_brickwork<R: Rng + ?Sized>(spec: &BrickworkSpec, rng: &mut R) -> Result<CliffordTableau> {
    Ok(Circuit::sample(spec.n, spec.depth, rng)?.to_tableau())
}
