//! Measurement records and their JSON-lines format.
//!
//! A record is `{seed, stream_id, n, d, outcome_bits}`; the circuit is
//! regenerated from `(seed, stream_id)`. Records produced elsewhere may
//! carry the circuit explicitly instead.

use std::borrow::Cow;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::brickwork::{BrickworkSpec, Circuit, Depth, PlacedGate};
use crate::clifford::{CliffordTableau, LocalClifford};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::rng::{circuit_stream, outcome_stream, stream_rng};
use crate::stabilizer::{measure_all, StabilizerState};

/// A gate given by the images of `X_q`, `Z_q` for each qubit it acts on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitGate {
    pub qubits: Vec<usize>,
    pub images: Vec<PauliString>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplicitCircuit {
    /// Layers applied in order, first layer first.
    Layers(Vec<Vec<ExplicitGate>>),
    /// Images of `X_0..X_{n-1}` followed by `Z_0..Z_{n-1}`.
    Tableau(Vec<PauliString>),
}

impl ExplicitGate {
    fn place(&self) -> Result<PlacedGate> {
        let qubits = match self.qubits[..] {
            [q] => [q, q],
            [a, b] if a != b => [a, b],
            _ => return Err(Error::Record(format!("gate on qubits {:?}", self.qubits))),
        };
        let arity = self.qubits.len();
        let mut gens = Vec::with_capacity(2 * arity);
        for p in &self.images {
            if p.n() != arity {
                return Err(Error::Record(format!("image {p} does not act on {arity} qubits")));
            }
            let packed = (0..arity).fold(0u8, |acc, q| acc | p.label(q) << (2 * q));
            gens.push((packed, p.is_negative()));
        }
        let gate = LocalClifford::from_generator_images(arity as u8, &gens)?;
        Ok(PlacedGate { qubits, gate: Cow::Owned(gate) })
    }

    fn from_placed(g: &PlacedGate) -> Self {
        let qubits = g.support().to_vec();
        let arity = qubits.len();
        let images = (0..2 * arity)
            .map(|i| {
                let (label, negative) = g.gate.apply(((i % 2 + 1) << (2 * (i / 2))) as u8);
                PauliString::from_labels((0..arity).map(|q| (label >> (2 * q)) & 3).collect(), negative)
            })
            .collect();
        Self { qubits, images }
    }
}

impl ExplicitCircuit {
    pub fn from_circuit(c: &Circuit) -> Self {
        match c {
            Circuit::Layers { layers, .. } => {
                ExplicitCircuit::Layers(layers.iter().map(|l| l.iter().map(ExplicitGate::from_placed).collect()).collect())
            }
            Circuit::Global(t) => {
                let n = t.n();
                let images = (0..n).map(|q| t.image_x(q).clone()).chain((0..n).map(|q| t.image_z(q).clone())).collect();
                ExplicitCircuit::Tableau(images)
            }
        }
    }

    pub fn to_circuit(&self, n: usize) -> Result<Circuit> {
        match self {
            ExplicitCircuit::Layers(layers) => {
                let layers = layers
                    .iter()
                    .map(|l| {
                        l.iter()
                            .map(|g| {
                                if g.qubits.iter().any(|&q| q >= n) {
                                    return Err(Error::Record(format!("gate on {:?} outside {n} qubits", g.qubits)));
                                }
                                g.place()
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                Ok(Circuit::Layers { n, layers })
            }
            ExplicitCircuit::Tableau(images) => {
                if images.len() != 2 * n {
                    return Err(Error::Record(format!("tableau needs {} images, got {}", 2 * n, images.len())));
                }
                Ok(Circuit::Global(CliffordTableau::from_images(images.clone())?))
            }
        }
    }
}

mod bits {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&b.iter().map(|&x| if x { '1' } else { '0' }).collect::<String>())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(serde::de::Error::custom(format!("invalid outcome bit {c:?}"))),
            })
            .collect()
    }
}

/// One snapshot `U†|b⟩⟨b|U`, stored compactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub seed: u64,
    pub stream_id: u64,
    pub n: usize,
    pub d: Depth,
    /// Bit `q` is the outcome of qubit `q`.
    #[serde(rename = "outcome_bits", with = "bits")]
    pub outcome: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<ExplicitCircuit>,
}

impl Snapshot {
    /// The measurement unitary, regenerated from the seed unless explicit.
    pub fn circuit(&self) -> Result<Circuit> {
        match &self.circuit {
            Some(c) => c.to_circuit(self.n),
            None => Circuit::sample(self.n, self.d, &mut stream_rng(self.seed, circuit_stream(self.stream_id))),
        }
    }

    /// Store the circuit explicitly, e.g. for export to other tools.
    pub fn with_explicit_circuit(mut self) -> Result<Self> {
        let c = self.circuit()?;
        self.circuit = Some(ExplicitCircuit::from_circuit(&c));
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.outcome.len() != self.n {
            return Err(Error::Record(format!("{} outcome bits for {} qubits", self.outcome.len(), self.n)));
        }
        crate::brickwork::check_even(self.n)
    }
}

/// Measure `state` after the circuit of stream `stream_id`.
pub fn acquire_one(state: &StabilizerState, spec: &BrickworkSpec, stream_id: u64) -> Result<Snapshot> {
    if state.n() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), got: state.n() });
    }
    let circuit = Circuit::sample(spec.n(), spec.depth(), &mut stream_rng(spec.seed(), circuit_stream(stream_id)))?;
    let outcome = measure_all(state, &circuit, &mut stream_rng(spec.seed(), outcome_stream(stream_id)))?;
    Ok(Snapshot { seed: spec.seed(), stream_id, n: spec.n(), d: spec.depth(), outcome, circuit: None })
}

/// `count` snapshots on streams `first..first + count`.
pub fn acquire_range(state: &StabilizerState, spec: &BrickworkSpec, first: u64, count: usize) -> Result<Vec<Snapshot>> {
    (first..first + count as u64).map(|id| acquire_one(state, spec, id)).collect()
}

/// `count` snapshots on streams `0..count`.
pub fn acquire(state: &StabilizerState, spec: &BrickworkSpec, count: usize) -> Result<Vec<Snapshot>> {
    acquire_range(state, spec, 0, count)
}

pub fn write_records<W: Write>(mut w: W, snaps: &[Snapshot]) -> Result<()> {
    for s in snaps {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records<R: BufRead>(r: R) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: Snapshot =
            serde_json::from_str(&line).map_err(|e| Error::Record(format!("line {}: {e}", i + 1)))?;
        s.validate().map_err(|e| Error::Record(format!("line {}: {e}", i + 1)))?;
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_state_depth_zero_marginals() {
        // after a single-qubit Clifford, |0⟩ gives a deterministic bit iff Z maps to ±Z
        let spec = BrickworkSpec::new(4, Depth::Finite(0), 9).unwrap();
        for s in acquire(&StabilizerState::zero(4), &spec, 50).unwrap() {
            let c = s.circuit().unwrap();
            for q in 0..4 {
                let img = c.conjugate(&PauliString::single(4, q, crate::pauli::Z)).unwrap();
                if img.label(q) == crate::pauli::Z {
                    assert_eq!(s.outcome[q], img.is_negative());
                }
            }
        }
    }

    #[test]
    fn records_are_reproducible() {
        let spec = BrickworkSpec::new(6, Depth::Finite(2), 3).unwrap();
        let a = acquire(&StabilizerState::ghz(6), &spec, 20).unwrap();
        let b = acquire(&StabilizerState::ghz(6), &spec, 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn jsonl_round_trip() {
        let spec = BrickworkSpec::new(4, Depth::Finite(1), 5).unwrap();
        let snaps = acquire(&StabilizerState::ghz(4), &spec, 5).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &snaps).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().next().unwrap().contains("\"outcome_bits\""));
        assert_eq!(read_records(&buf[..]).unwrap(), snaps);
    }

    #[test]
    fn explicit_circuit_round_trip() {
        for depth in [Depth::Finite(2), Depth::Infinite] {
            let spec = BrickworkSpec::new(4, depth, 8).unwrap();
            let s = acquire_one(&StabilizerState::zero(4), &spec, 2).unwrap();
            let explicit = s.clone().with_explicit_circuit().unwrap();
            let mut buf = Vec::new();
            write_records(&mut buf, std::slice::from_ref(&explicit)).unwrap();
            let back = read_records(&buf[..]).unwrap().pop().unwrap();
            let (c1, c2) = (s.circuit().unwrap(), back.circuit().unwrap());
            for idx in 0..256 {
                let p = PauliString::from_index(4, idx);
                assert_eq!(c1.conjugate(&p).unwrap(), c2.conjugate(&p).unwrap());
            }
        }
    }

    #[test]
    fn malformed_records_rejected() {
        let bad = br#"{"seed":1,"stream_id":0,"n":4,"d":1,"outcome_bits":"012"}"#;
        assert!(matches!(read_records(&bad[..]), Err(Error::Record(_))));
        let short = br#"{"seed":1,"stream_id":0,"n":4,"d":1,"outcome_bits":"01"}"#;
        assert!(matches!(read_records(&short[..]), Err(Error::Record(_))));
    }
}
