//! Expectation-value estimation from snapshots.
//!
//! Pauli coefficient vectors use `ρ = Σ_λ α_λ P^λ`, so a state has
//! `α_I = 2^{-n}` and `tr(O ρ) = 2^n Σ_λ β_λ α_λ`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::brickwork::Circuit;
use crate::channel::{lift_to_pauli_mps, Channel};
use crate::error::{Error, Result};
use crate::inverse::InversionResult;
use crate::mps::{PeriodicMps, SiteTensor};
use crate::pauli::{basis_expectation, PauliString, I, X, Z};
use crate::records::Snapshot;
use crate::stabilizer::StabilizerState;

/// Largest `n` for which snapshots of global circuits are handled by
/// enumerating their stabilizer group.
pub const MAX_ENUMERATED_QUBITS: usize = 16;

/// `O = Σ_k β_k P_k` with unsigned Paulis and real coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseObservable {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl SparseObservable {
    /// Signs are folded into the coefficients and repeated Paulis merged.
    pub fn new(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let mut merged: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        for (c, p) in terms {
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.n() });
            }
            *merged.entry(p.labels().to_vec()).or_default() += c * p.sign();
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(l, c)| (c, PauliString::from_labels(l, false)))
            .collect();
        Ok(Self { n, terms })
    }

    pub fn from_strings(terms: &[(f64, &str)]) -> Result<Self> {
        let parsed: Vec<(f64, PauliString)> =
            terms.iter().map(|(c, s)| Ok((*c, s.parse()?))).collect::<Result<_>>()?;
        let n = parsed.first().map_or(0, |(_, p)| p.n());
        Self::new(n, parsed)
    }

    /// `Σ_i Z_{i−1} Z_i Z_{i+1} + X_i` on a ring.
    pub fn cluster_hamiltonian(n: usize) -> Result<Self> {
        let mut terms = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut zzz = vec![I; n];
            for q in [(i + n - 1) % n, i, (i + 1) % n] {
                zzz[q] = Z;
            }
            terms.push((1.0, PauliString::from_labels(zzz, false)));
            terms.push((1.0, PauliString::single(n, i, X)));
        }
        Self::new(n, terms)
    }

    /// Projector onto the space stabilized by `state`.
    pub fn stabilizer_projector(state: &StabilizerState) -> Result<Self> {
        let scale = 0.5f64.powi(state.k() as i32);
        Self::new(state.n(), state.group_elements().into_iter().map(|s| (scale, s)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.terms.iter().find(|(_, p)| p.is_identity()).map_or(0.0, |(c, _)| *c)
    }

    /// `Σ_k |β_k|`, an upper bound on `‖O‖_∞`.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    /// `‖O‖_F² = 2^n Σ_k β_k²`.
    pub fn frobenius_sq(&self) -> f64 {
        2f64.powi(self.n as i32) * self.terms.iter().map(|(c, _)| c * c).sum::<f64>()
    }

    pub fn dense_coefficients(&self) -> Vec<f64> {
        let mut beta = vec![0.0; 1 << (2 * self.n)];
        for (c, p) in &self.terms {
            beta[p.index()] += c;
        }
        beta
    }
}

/// `O` given by an MPS of its Pauli coefficients `β_λ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShallowObservable {
    beta: PeriodicMps,
}

fn delta(label: u8) -> Vec<f64> {
    let mut v = vec![0.0; 4];
    v[label as usize] = 1.0;
    v
}

impl ShallowObservable {
    pub fn new(beta: PeriodicMps) -> Result<Self> {
        if beta.phys_dims().iter().any(|&p| p != 4) {
            return Err(Error::Shape("Pauli coefficient MPS needs physical dimension 4".into()));
        }
        Ok(Self { beta })
    }

    pub fn identity(n: usize) -> Self {
        Self::pauli(1.0, &PauliString::identity(n))
    }

    pub fn pauli(coefficient: f64, p: &PauliString) -> Self {
        let mut vectors: Vec<Vec<f64>> = p.labels().iter().map(|&l| delta(l)).collect();
        for x in &mut vectors[0] {
            *x *= coefficient * p.sign();
        }
        Self { beta: PeriodicMps::product(&vectors).expect("valid shapes") }
    }

    /// Block sum of one product MPS per term; bond dimension equals the term count.
    pub fn from_sparse(o: &SparseObservable) -> Result<Self> {
        let r = o.terms().len();
        if r == 0 {
            return Ok(Self { beta: PeriodicMps::constant(o.n(), 4, 0.0) });
        }
        let sites = (0..o.n())
            .map(|q| {
                (0..4u8)
                    .map(|l| {
                        let diag = o.terms().iter().map(|(c, p)| {
                            let hit = (p.label(q) == l) as u8 as f64;
                            if q == 0 {
                                c * hit
                            } else {
                                hit
                            }
                        });
                        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(r, diag))
                    })
                    .collect()
            })
            .collect();
        Ok(Self { beta: PeriodicMps::new(sites)? })
    }

    /// `|GHZ⟩⟨GHZ|` on `n` qubits as a bond-4 MPS.
    ///
    /// The stabilizer group splits into `{I,Z}` strings with an even number of
    /// `Z` and `{X,Y}` strings with an even number of `Y`, the latter carrying
    /// sign `(−1)^{#Y/2}`. Each branch is a 2×2 block: a parity counter for
    /// the first, and the real representation of `i^{#Y}` for the second.
    pub fn ghz_projector(n: usize) -> Result<Self> {
        crate::brickwork::check_even(n)?;
        let scale = 0.5f64.powi(n as i32) * 0.5;
        let block = |a: [f64; 4], b: [f64; 4]| {
            let mut m = DMatrix::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(&DMatrix::from_row_slice(2, 2, &a));
            m.view_mut((2, 2), (2, 2)).copy_from(&DMatrix::from_row_slice(2, 2, &b));
            m
        };
        let eye = [1.0, 0.0, 0.0, 1.0];
        let zero = [0.0; 4];
        let site: SiteTensor = vec![
            block(eye, zero),
            block(zero, eye),
            block([1.0, 0.0, 0.0, -1.0], zero),
            block(zero, [0.0, -1.0, 1.0, 0.0]),
        ];
        let mut beta = PeriodicMps::uniform(site, n)?;
        beta.scale(scale);
        Ok(Self { beta })
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &PeriodicMps {
        &self.beta
    }

    pub fn value(&self, lambda: &PauliString) -> Result<f64> {
        Ok(lambda.sign() * self.beta.evaluate(&digits(lambda))?)
    }
}

pub(crate) fn digits(p: &PauliString) -> Vec<usize> {
    p.labels().iter().map(|&l| l as usize).collect()
}

/// Pauli-label MPS of `1/t_λ` together with its certified accuracy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowInverse {
    pauli: PeriodicMps,
    herald_epsilon: f64,
}

impl ShadowInverse {
    /// Closed-form inverse for the local and global ensembles.
    pub fn exact(channel: &Channel) -> Option<Self> {
        channel.exact_inverse_pauli_mps().map(|pauli| Self { pauli, herald_epsilon: 0.0 })
    }

    pub fn from_inversion(result: &InversionResult) -> Result<Self> {
        if !result.heralded {
            return Err(Error::NotHeralded(result.herald_epsilon));
        }
        Ok(Self { pauli: lift_to_pauli_mps(&result.v)?, herald_epsilon: result.herald_epsilon })
    }

    pub fn for_channel(channel: &Channel, inversion: Option<&InversionResult>) -> Result<Self> {
        match (Self::exact(channel), inversion) {
            (Some(exact), _) => Ok(exact),
            (None, Some(r)) => Self::from_inversion(r),
            (None, None) => Err(Error::MissingInverse),
        }
    }

    /// Wrap an arbitrary Pauli-label MPS, e.g. a perturbed inverse.
    pub fn from_pauli_mps(pauli: PeriodicMps, herald_epsilon: f64) -> Result<Self> {
        if pauli.phys_dims().iter().any(|&p| p != 4) {
            return Err(Error::Shape("inverse MPS needs physical dimension 4".into()));
        }
        Ok(Self { pauli, herald_epsilon })
    }

    pub fn pauli_mps(&self) -> &PeriodicMps {
        &self.pauli
    }

    pub fn herald_epsilon(&self) -> f64 {
        self.herald_epsilon
    }
}

/// `m = left · right` with the inner dimension cut to the numerical rank.
/// A column-pivoted QR reveals the rank; if dropping the trailing rows of
/// `R` would change `m` the split keeps every column instead.
fn split_exact(m: DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let scale = m.amax();
    if scale == 0.0 {
        return (DMatrix::zeros(m.nrows(), 1), DMatrix::zeros(1, m.ncols()));
    }
    let qr = m.clone().col_piv_qr();
    let (q, mut r, p) = (qr.q(), qr.r(), qr.p());
    p.inv_permute_columns(&mut r);
    let k = (0..r.nrows()).filter(|&i| r.row(i).amax() > 1e-13 * scale).count().max(1);
    // rows of R past the rank are numerically zero but need not be trailing
    let keep: Vec<usize> = {
        let mut rows: Vec<usize> = (0..r.nrows()).collect();
        rows.sort_by(|&x, &y| r.row(y).amax().total_cmp(&r.row(x).amax()));
        rows.truncate(k);
        rows.sort_unstable();
        rows
    };
    let left = DMatrix::from_columns(&keep.iter().map(|&i| q.column(i)).collect::<Vec<_>>());
    let right = DMatrix::from_rows(&keep.iter().map(|&i| r.row(i)).collect::<Vec<_>>());
    if (&left * &right - &m).amax() <= 1e-12 * scale {
        (left, right)
    } else {
        let (rows, cols) = m.shape();
        if rows <= cols {
            (DMatrix::identity(rows, rows), m)
        } else {
            (m, DMatrix::identity(cols, cols))
        }
    }
}

/// Merge sites `a` and `b = a+1 (mod n)`, relabel by `map` and split again
/// without loss.
fn apply_pair_map(mps: &mut PeriodicMps, a: usize, map: impl Fn(usize) -> (usize, f64)) {
    let n = mps.len();
    let b = (a + 1) % n;
    let (sa, sb) = (mps.site(a).clone(), mps.site(b).clone());
    let chi_l = sa[0].nrows();
    let chi_r = sb[0].ncols();
    let mut merged = DMatrix::zeros(4 * chi_l, 4 * chi_r);
    for out in 0..16 {
        let (src, sign) = map(out);
        if sign == 0.0 {
            continue;
        }
        let block = &sa[src % 4] * &sb[src / 4] * sign;
        merged.view_mut(((out % 4) * chi_l, (out / 4) * chi_r), (chi_l, chi_r)).copy_from(&block);
    }
    let (left, right) = split_exact(merged);
    let new_a: SiteTensor = (0..4).map(|p| left.rows(p * chi_l, chi_l).into_owned()).collect();
    let new_b: SiteTensor = (0..4).map(|p| right.columns(p * chi_r, chi_r).into_owned()).collect();
    let mut sites: Vec<SiteTensor> = (0..n).map(|j| mps.site(j).clone()).collect();
    sites[a] = new_a;
    sites[b] = new_b;
    *mps = PeriodicMps::new(sites).expect("consistent bonds");
}

/// Signed Pauli coefficients of `U†|b⟩⟨b|U` as an `n`-site MPS.
pub fn snapshot_to_pauli_mps(s: &Snapshot) -> Result<PeriodicMps> {
    circuit_snapshot_mps(&s.circuit()?, &s.outcome)
}

fn circuit_snapshot_mps(circuit: &Circuit, b: &[bool]) -> Result<PeriodicMps> {
    let Circuit::Layers { n, layers } = circuit else {
        return Err(Error::Precondition("global snapshots have no shallow MPS form".into()));
    };
    let n = *n;
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let vectors: Vec<Vec<f64>> = b.iter().map(|&bit| vec![0.5, 0.0, if bit { -0.5 } else { 0.5 }, 0.0]).collect();
    let mut mps = PeriodicMps::product(&vectors)?;
    // σ = L_0† ⋯ L_d† |b⟩⟨b| L_d ⋯ L_0: the last layer acts first, and the
    // coefficient of P^λ after L† is ±(coefficient of L P^λ L†).
    for layer in layers.iter().rev() {
        for g in layer {
            if g.gate.arity() == 1 {
                let q = g.qubits[0];
                let site: SiteTensor = (0..4u8)
                    .map(|l| {
                        let (img, neg) = g.gate.apply(l);
                        &mps.site(q)[img as usize] * if neg { -1.0 } else { 1.0 }
                    })
                    .collect();
                mps.set_site(q, site)?;
            } else {
                let [a, bq] = g.qubits;
                if bq != (a + 1) % n {
                    return Err(Error::Precondition(format!("gate on non-adjacent qubits {a}, {bq}")));
                }
                apply_pair_map(&mut mps, a, |out| {
                    let (img, neg) = g.gate.apply(out as u8);
                    (img as usize, if neg { -1.0 } else { 1.0 })
                });
            }
        }
    }
    Ok(mps)
}

/// Stabilizer generators of the snapshot state `U†|b⟩⟨b|U`.
pub fn snapshot_state(s: &Snapshot) -> Result<StabilizerState> {
    let inv = s.circuit()?.to_tableau().inverse();
    let gens = (0..s.n)
        .map(|q| {
            let z = PauliString::single(s.n, q, Z);
            inv.conjugate(&if s.outcome[q] { z.negated() } else { z })
        })
        .collect::<Result<_>>()?;
    StabilizerState::new(s.n, gens)
}

/// Median of `k` block means; `k = 1` is the plain mean.
pub fn median_of_means(values: &[f64], k: usize) -> Result<f64> {
    Ok(median(&block_means(values, k)?))
}

pub fn block_means(values: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || values.is_empty() || !values.len().is_multiple_of(k) {
        return Err(Error::BlockCount { k, len: values.len() });
    }
    let size = values.len() / k;
    Ok(values.chunks(size).map(|c| c.iter().sum::<f64>() / size as f64).collect())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomConfig {
    pub blocks: usize,
}

impl Default for MomConfig {
    fn default() -> Self {
        Self { blocks: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub estimate: f64,
    pub block_means: Vec<f64>,
    pub herald_epsilon: f64,
    pub variance_bound: Option<f64>,
    pub snapshots: usize,
    pub sample_variance: f64,
    pub standard_error: f64,
}

impl EstimationReport {
    pub fn from_values(values: &[f64], mom: MomConfig, herald_epsilon: f64) -> Result<Self> {
        let block_means = block_means(values, mom.blocks)?;
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sample_variance =
            if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Ok(Self {
            estimate: median(&block_means),
            block_means,
            herald_epsilon,
            variance_bound: None,
            snapshots: values.len(),
            sample_variance,
            standard_error: (sample_variance / n).sqrt(),
        })
    }
}

/// Per-snapshot values `Σ_k β_k w_k ⟨b|U P_k U†|b⟩` for given inverse eigenvalues `w_k`.
pub fn sparse_values(o: &SparseObservable, snaps: &[Snapshot], inverse_t: &[f64]) -> Result<Vec<f64>> {
    if inverse_t.len() != o.terms().len() {
        return Err(Error::DimensionMismatch { expected: o.terms().len(), got: inverse_t.len() });
    }
    snaps
        .iter()
        .map(|s| {
            if s.n != o.n() {
                return Err(Error::DimensionMismatch { expected: o.n(), got: s.n });
            }
            let c = s.circuit()?;
            let mut acc = 0.0;
            for ((beta, p), w) in o.terms().iter().zip(inverse_t) {
                acc += beta * w * basis_expectation(&c.conjugate(p)?, &s.outcome) as f64;
            }
            Ok(acc)
        })
        .collect()
}

/// `1/t` for every term of `o`.
pub fn inverse_eigenvalues(o: &SparseObservable, channel: &Channel) -> Result<Vec<f64>> {
    o.terms().iter().map(|(_, p)| Ok(1.0 / channel.t(p)?)).collect()
}

pub fn estimate_sparse(
    o: &SparseObservable,
    snaps: &[Snapshot],
    channel: &Channel,
    mom: MomConfig,
) -> Result<EstimationReport> {
    let values = sparse_values(o, snaps, &inverse_eigenvalues(o, channel)?)?;
    EstimationReport::from_values(&values, mom, 0.0)
}

/// Which factor the inverse channel is applied to before contracting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Invert the observable once when it is reused across snapshots.
    #[default]
    Auto,
    Observable,
    Snapshot,
}

/// Per-snapshot values `2^n Σ_λ β_λ v_λ α_λ(σ)`.
pub fn shallow_values(
    o: &ShallowObservable,
    snaps: &[Snapshot],
    inverse: &ShadowInverse,
    direction: Direction,
) -> Result<Vec<f64>> {
    let n = o.n();
    if inverse.pauli.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: inverse.pauli.len() });
    }
    let scale = 2f64.powi(n as i32);
    // one observable against many snapshots: fold the inverse into O
    let folded = match direction {
        Direction::Auto | Direction::Observable => Some(PeriodicMps::hadamard(&o.beta, &inverse.pauli)?),
        Direction::Snapshot => None,
    };
    snaps
        .iter()
        .map(|s| {
            if s.n != n {
                return Err(Error::DimensionMismatch { expected: n, got: s.n });
            }
            let circuit = s.circuit()?;
            if matches!(circuit, Circuit::Global(_)) {
                let combined = match &folded {
                    Some(f) => f.clone(),
                    None => PeriodicMps::hadamard(&o.beta, &inverse.pauli)?,
                };
                return enumerated_value(&combined, s);
            }
            let alpha = circuit_snapshot_mps(&circuit, &s.outcome)?;
            Ok(scale
                * match &folded {
                    Some(f) => PeriodicMps::inner(f, &alpha)?,
                    None => PeriodicMps::inner(&o.beta, &PeriodicMps::hadamard(&alpha, &inverse.pauli)?)?,
                })
        })
        .collect()
}

/// `Σ_{s ∈ S(σ)} sign(s) f(|s|)`, where `σ = 2^{-n} Σ_{s∈S} s`.
fn enumerated_value(f: &PeriodicMps, s: &Snapshot) -> Result<f64> {
    if s.n > MAX_ENUMERATED_QUBITS {
        return Err(Error::Precondition(format!("global snapshots limited to {MAX_ENUMERATED_QUBITS} qubits")));
    }
    let mut acc = 0.0;
    for g in snapshot_state(s)?.group_elements() {
        acc += g.sign() * f.evaluate(&digits(&g))?;
    }
    Ok(acc)
}

pub fn estimate_shallow(
    o: &ShallowObservable,
    snaps: &[Snapshot],
    inverse: &ShadowInverse,
    mom: MomConfig,
) -> Result<EstimationReport> {
    let values = shallow_values(o, snaps, inverse, Direction::Auto)?;
    EstimationReport::from_values(&values, mom, inverse.herald_epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brickwork::{BrickworkSpec, Depth};
    use crate::dense;
    use crate::records::acquire;

    #[test]
    fn median_of_means_examples() {
        assert_eq!(median_of_means(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3).unwrap(), 3.5);
        assert_eq!(median_of_means(&[1.0, 2.0, 6.0], 1).unwrap(), 3.0);
        assert!(matches!(median_of_means(&[1.0], 0), Err(Error::BlockCount { .. })));
        assert!(matches!(median_of_means(&[1.0, 2.0, 3.0], 2), Err(Error::BlockCount { .. })));
        let mut v: Vec<f64> = (0..100).map(|i| (i % 7) as f64).collect();
        let clean = median_of_means(&v, 10).unwrap();
        v[13] = 1e6;
        assert_eq!(median_of_means(&v, 10).unwrap(), clean);
    }

    #[test]
    fn sparse_observable_merges_terms() {
        let o = SparseObservable::from_strings(&[(1.0, "XZ"), (0.5, "-XZ"), (2.0, "II")]).unwrap();
        assert_eq!(o.terms().len(), 2);
        assert_eq!(o.identity_coefficient(), 2.0);
        assert!(o.terms().iter().any(|(c, p)| p.to_string() == "+XZ" && *c == 0.5));
    }

    #[test]
    fn ghz_projector_matches_group() {
        let n = 6;
        let proj = ShallowObservable::ghz_projector(n).unwrap();
        let sparse = SparseObservable::stabilizer_projector(&StabilizerState::ghz(n)).unwrap();
        let dense = sparse.dense_coefficients();
        for (idx, want) in dense.iter().enumerate() {
            let got = proj.value(&PauliString::from_index(n, idx)).unwrap();
            assert!((got - want).abs() < 1e-15, "{idx}: {got} vs {want}");
        }
    }

    #[test]
    fn from_sparse_matches_coefficients() {
        let o = SparseObservable::from_strings(&[(0.3, "XZIY"), (-1.2, "ZZII"), (0.7, "IIII")]).unwrap();
        let s = ShallowObservable::from_sparse(&o).unwrap();
        for (idx, want) in o.dense_coefficients().iter().enumerate() {
            assert!((s.value(&PauliString::from_index(4, idx)).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn depth_zero_zero_outcome_snapshot() {
        let n = 4;
        let circuit = Circuit::sample(n, Depth::Finite(0), &mut crate::rng::stream_rng(0, 0)).unwrap();
        let Circuit::Layers { layers, .. } = circuit else { unreachable!() };
        let identity = crate::clifford::one_qubit_group()
            .iter()
            .find(|g| (0..4).all(|l| g.apply(l) == (l, false)))
            .unwrap()
            .clone();
        let layers = vec![layers[0]
            .iter()
            .map(|g| crate::brickwork::PlacedGate { qubits: g.qubits, gate: std::borrow::Cow::Owned(identity.clone()) })
            .collect()];
        let mps = circuit_snapshot_mps(&Circuit::Layers { n, layers }, &[false; 4]).unwrap();
        for idx in 0..256 {
            let p = PauliString::from_index(n, idx);
            let want = if p.labels().iter().all(|&l| l == I || l == Z) { 1.0 / 16.0 } else { 0.0 };
            assert!((mps.evaluate(&digits(&p)).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn snapshot_mps_matches_dense() {
        let n = 4;
        for depth in 0..4 {
            let spec = BrickworkSpec::new(n, Depth::Finite(depth), 11).unwrap();
            for s in acquire(&StabilizerState::ghz(n), &spec, 5).unwrap() {
                let mps = snapshot_to_pauli_mps(&s).unwrap();
                let u = dense::circuit_unitary(&s.circuit().unwrap()).unwrap();
                let idx: usize = s.outcome.iter().enumerate().map(|(q, &b)| (b as usize) << q).sum();
                let mut ket = nalgebra::DVector::zeros(1 << n);
                ket[idx] = dense::C64::new(1.0, 0.0);
                let sigma = u.adjoint() * dense::density_matrix(&ket) * &u;
                let coeffs = dense::pauli_coefficients(&sigma, n);
                let got = mps.to_dense();
                for (i, (a, b)) in got.iter().zip(&coeffs).enumerate() {
                    assert!((a - b).abs() < 1e-10, "d={depth} idx {i}: {a} vs {b}");
                }
                assert!((got[0] - 1.0 / 16.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn snapshot_mps_matches_stabilizer_group() {
        let n = 8;
        for depth in [2, 3, 4] {
            let spec = BrickworkSpec::new(n, Depth::Finite(depth), 5).unwrap();
            for s in acquire(&StabilizerState::ghz(n), &spec, 20).unwrap() {
                let mps = snapshot_to_pauli_mps(&s).unwrap();
                let group: std::collections::HashMap<usize, f64> =
                    snapshot_state(&s).unwrap().group_elements().iter().map(|g| (g.index(), g.sign() / 256.0)).collect();
                for idx in (0..1 << (2 * n)).step_by(11).chain(group.keys().copied()) {
                    let got = mps.evaluate(&digits(&PauliString::from_index(n, idx))).unwrap();
                    let want = group.get(&idx).copied().unwrap_or(0.0);
                    assert!((got - want).abs() < 1e-12, "d={depth} idx {idx}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn split_is_lossless() {
        // rank-1 with entries spanning many orders of magnitude
        let col = DMatrix::from_column_slice(8, 1, &[0.25, -1e-33, 0.0307, 0.174, 1e-48, 0.0, -0.174, 0.25]);
        let row = DMatrix::from_row_slice(1, 4, &[0.7, 0.0, 1e-17, -0.7]);
        for m in [&col * &row, DMatrix::from_fn(6, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0)] {
            let (l, r) = split_exact(m.clone());
            assert!((&l * &r - &m).amax() < 1e-13);
            assert!(l.ncols() <= m.nrows().min(m.ncols()));
        }
        let (l, _) = split_exact(&col * &row);
        assert_eq!(l.ncols(), 1);
    }

    #[test]
    fn identity_observable_is_one_per_snapshot() {
        let n = 4;
        let channel = Channel::new(n, Depth::Finite(0)).unwrap();
        let inverse = ShadowInverse::exact(&channel).unwrap();
        let spec = BrickworkSpec::new(n, Depth::Finite(0), 2).unwrap();
        let snaps = acquire(&StabilizerState::zero(n), &spec, 10).unwrap();
        for v in shallow_values(&ShallowObservable::identity(n), &snaps, &inverse, Direction::Auto).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let o = SparseObservable::from_strings(&[(2.5, "IIII")]).unwrap();
        let r = estimate_sparse(&o, &snaps, &channel, MomConfig::default()).unwrap();
        assert_eq!(r.estimate, 2.5);
    }

    #[test]
    fn directions_agree() {
        let n = 4;
        let channel = Channel::new(n, Depth::Infinite).unwrap();
        let inverse = ShadowInverse::exact(&channel).unwrap();
        let o = ShallowObservable::ghz_projector(n).unwrap();
        let spec = BrickworkSpec::new(n, Depth::Infinite, 4).unwrap();
        let snaps = acquire(&StabilizerState::ghz(n), &spec, 10).unwrap();
        let a = shallow_values(&o, &snaps, &inverse, Direction::Observable).unwrap();
        let b = shallow_values(&o, &snaps, &inverse, Direction::Snapshot).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn missing_inverse_rejected() {
        let channel = Channel::new(4, Depth::Finite(2)).unwrap();
        assert!(matches!(ShadowInverse::for_channel(&channel, None), Err(Error::MissingInverse)));
    }
}
