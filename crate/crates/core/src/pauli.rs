//! Signed Pauli strings in the Hermitian `(x, z)` labelling.
//!
//! A single-qubit label packs `x` in bit 0 and `z` in bit 1, so `I = 0`,
//! `X = 1`, `Z = 2` and `Y = 3`. The operator for label `(x, z)` is
//! `i^{xz} X^x Z^z`, which makes `Y` Hermitian.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const I: u8 = 0;
pub const X: u8 = 1;
pub const Z: u8 = 2;
pub const Y: u8 = 3;

/// `PHASE[a][b] = g` with `P^a P^b = i^g P^{a ^ b}`.
pub(crate) const PHASE: [[u8; 4]; 4] = [[0, 0, 0, 0], [0, 0, 3, 1], [0, 1, 0, 3], [0, 3, 1, 0]];

/// Multiply two packed labels over `arity` qubits (2 bits per qubit).
/// Returns the product label and the phase exponent mod 4.
#[inline]
pub(crate) fn mul_packed(a: u8, b: u8, arity: usize) -> (u8, u8) {
    let mut phase = 0u8;
    for q in 0..arity {
        let la = (a >> (2 * q)) & 3;
        let lb = (b >> (2 * q)) & 3;
        phase += PHASE[la as usize][lb as usize];
    }
    (a ^ b, phase & 3)
}

#[inline]
pub(crate) fn label_char(l: u8) -> char {
    ['I', 'X', 'Z', 'Y'][l as usize]
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PauliString {
    labels: Vec<u8>,
    negative: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { labels: vec![I; n], negative: false }
    }

    /// Build from per-qubit labels (`0..4`). Panics on an out-of-range label.
    pub fn from_labels(labels: Vec<u8>, negative: bool) -> Self {
        assert!(labels.iter().all(|&l| l < 4), "Pauli label out of range");
        Self { labels, negative }
    }

    pub fn from_xz(x: &[bool], z: &[bool], negative: bool) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: z.len() });
        }
        let labels = x.iter().zip(z).map(|(&x, &z)| x as u8 | (z as u8) << 1).collect();
        Ok(Self { labels, negative })
    }

    /// Single-qubit Pauli `label` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, label: u8) -> Self {
        let mut p = Self::identity(n);
        p.labels[q] = label;
        p
    }

    /// Decode a base-4 index with qubit 0 as the least significant digit.
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            labels.push((index & 3) as u8);
            index >>= 2;
        }
        Self { labels, negative: false }
    }

    pub fn index(&self) -> usize {
        self.labels.iter().rev().fold(0, |acc, &l| acc << 2 | l as usize)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub(crate) fn labels_mut(&mut self) -> &mut [u8] {
        &mut self.labels
    }

    pub fn label(&self, q: usize) -> u8 {
        self.labels[q]
    }

    pub fn x(&self) -> Vec<bool> {
        self.labels.iter().map(|l| l & 1 == 1).collect()
    }

    pub fn z(&self) -> Vec<bool> {
        self.labels.iter().map(|l| l & 2 == 2).collect()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn sign(&self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    /// Same operator label with a positive sign.
    pub fn unsigned(&self) -> Self {
        Self { labels: self.labels.clone(), negative: false }
    }

    pub fn negated(&self) -> Self {
        Self { labels: self.labels.clone(), negative: !self.negative }
    }

    pub fn weight(&self) -> usize {
        self.labels.iter().filter(|&&l| l != I).count()
    }

    pub fn signature(&self) -> Vec<bool> {
        self.labels.iter().map(|&l| l != I).collect()
    }

    /// Per-pair OR of the signature: entry `j` covers qubits `2j` and `2j+1`.
    pub fn pair_signature(&self) -> Vec<usize> {
        self.labels.chunks(2).map(|c| c.iter().any(|&l| l != I) as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&l| l == I)
    }

    /// True iff the operator is `±` a Z-type string.
    pub fn in_pm_z(&self) -> bool {
        self.labels.iter().all(|&l| l & 1 == 0)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let mut anti = 0u32;
        for (&a, &b) in self.labels.iter().zip(&other.labels) {
            anti += ((a & 1) & (b >> 1) ^ (a >> 1) & (b & 1)) as u32;
        }
        anti.is_multiple_of(2)
    }

    /// `self · other = i^k · P` with `P` carrying a positive sign.
    /// Signs of both factors are folded into `k`.
    pub fn product(&self, other: &Self) -> (u8, PauliString) {
        debug_assert_eq!(self.n(), other.n());
        let mut k = 2 * (self.negative as u8 + other.negative as u8);
        let labels = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(&a, &b)| {
                k += PHASE[a as usize][b as usize];
                a ^ b
            })
            .collect();
        (k & 3, PauliString { labels, negative: false })
    }

    /// Product of two commuting Paulis, which is again a signed Pauli.
    pub fn mul_commuting(&self, other: &Self) -> PauliString {
        let (k, mut p) = self.product(other);
        assert!(k % 2 == 0, "product of anticommuting Paulis is not Hermitian");
        p.negative = k == 2;
        p
    }
}

/// `<b|P|b>` for a computational basis state `b`.
pub fn basis_expectation(p: &PauliString, b: &[bool]) -> i8 {
    let mut negative = p.negative;
    for (&l, &bit) in p.labels.iter().zip(b) {
        if l & 1 == 1 {
            return 0;
        }
        if l == Z && bit {
            negative = !negative;
        }
    }
    if negative {
        -1
    } else {
        1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for &l in &self.labels {
            write!(f, "{}", label_char(l))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        if body.is_empty() {
            return Err(Error::ParsePauli(s.to_string()));
        }
        let labels = body
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' | '_' => Ok(I),
                'X' => Ok(X),
                'Y' => Ok(Y),
                'Z' => Ok(Z),
                _ => Err(Error::ParsePauli(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { labels, negative })
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for PauliString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn pm_z_membership() {
        assert!(p("ZIZ").in_pm_z());
        assert!(!p("XI").in_pm_z());
        assert!(p("-ZZ").in_pm_z());
    }

    #[test]
    fn basis_expectations() {
        assert_eq!(basis_expectation(&p("Z"), &[true]), -1);
        assert_eq!(basis_expectation(&p("X"), &[false]), 0);
        assert_eq!(basis_expectation(&p("X"), &[true]), 0);
        assert_eq!(basis_expectation(&p("-ZZ"), &[false, true]), 1);
    }

    #[test]
    fn single_qubit_products() {
        // XZ = -iY, ZX = iY, XY = iZ, YZ = iX
        assert_eq!(p("X").product(&p("Z")), (3, p("Y")));
        assert_eq!(p("Z").product(&p("X")), (1, p("Y")));
        assert_eq!(p("X").product(&p("Y")), (1, p("Z")));
        assert_eq!(p("Y").product(&p("Z")), (1, p("X")));
        assert_eq!(p("-Y").product(&p("Y")), (2, p("I")));
    }

    #[test]
    fn weight_and_signature() {
        let q = p("XIYZ");
        assert_eq!(q.weight(), 3);
        assert_eq!(q.signature(), vec![true, false, true, true]);
        assert_eq!(q.pair_signature(), vec![1, 1]);
        assert_eq!(p("IIZI").pair_signature(), vec![0, 1]);
    }

    #[test]
    fn index_roundtrip() {
        for idx in 0..256 {
            assert_eq!(PauliString::from_index(4, idx).index(), idx);
        }
        assert_eq!(p("XIII").index(), 1);
    }

    #[test]
    fn text_roundtrip() {
        let q = p("-XYZI");
        assert_eq!(q.to_string(), "-XYZI");
        assert_eq!(p(&q.to_string()), q);
        assert!("".parse::<PauliString>().is_err());
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn commutation() {
        assert!(p("XX").commutes_with(&p("ZZ")));
        assert!(!p("XI").commutes_with(&p("ZI")));
        assert!(p("XX").mul_commuting(&p("ZZ")) == p("-YY"));
    }
}
