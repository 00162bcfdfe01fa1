//! Shadow norms and sample-complexity bounds.
//!
//! The state-dependent squared shadow norm is the second moment of the
//! single-snapshot estimator. It splits into the locally scrambled part
//! `Σ_λ β_λ²/t_λ` and `tr(σ Õ)` with
//! `Õ = Σ_{λ≠λ'} β_λ β_λ' τ_{λ,λ'}/(t_λ t_λ') P^λ P^λ'`.
//! Norms are reported for the traceless part of `O`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::brickwork::{check_even, Circuit, Depth};
use crate::channel::tau::PairChannel;
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::mps::{PeriodicMps, SiteTensor};
use crate::pauli::{basis_expectation, PauliString, PHASE};
use crate::shadows::{inverse_eigenvalues, ShadowInverse, ShallowObservable, SparseObservable};
use crate::stabilizer::{measure_all, StabilizerState};

/// Default cap on the bond dimension of the `Õ'` coefficient MPS. Its norm
/// contracts transfer matrices of side `bond²`.
pub const DEFAULT_BOND_CAP: usize = 32;

/// Largest generator count accepted by [`stabilizer_projector_norm_sq`].
pub const MAX_PROJECTOR_GENERATORS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    PauliExact,
    SparseTriangle,
    FrobeniusBound,
    StabilizerExact,
    StatmechBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub ls_norm_sq: f64,
    pub worst_case_upper_sq: f64,
    pub method: NormMethod,
    pub components: BTreeMap<String, f64>,
}

/// `‖P^λ‖²_{s(d)} = 1/t_λ`.
pub fn pauli_norm_sq(lambda: &PauliString, channel: &Channel) -> Result<f64> {
    if lambda.is_identity() {
        return Err(Error::IdentityPauli);
    }
    Ok(1.0 / channel.t(lambda)?)
}

pub fn pauli_report(lambda: &PauliString, channel: &Channel) -> Result<NormReport> {
    let v = pauli_norm_sq(lambda, channel)?;
    Ok(NormReport { ls_norm_sq: v, worst_case_upper_sq: v, method: NormMethod::PauliExact, components: BTreeMap::new() })
}

fn traceless_terms(o: &SparseObservable) -> impl Iterator<Item = &(f64, PauliString)> {
    o.terms().iter().filter(|(_, p)| !p.is_identity())
}

/// `Σ_{λ≠I} β_λ²/t_λ` over the terms of a sparse observable.
pub fn ls_norm_sq(o: &SparseObservable, channel: &Channel) -> Result<f64> {
    traceless_terms(o).map(|(c, p)| Ok(c * c / channel.t(p)?)).sum()
}

/// `Σ_{λ≠I} β_λ² v_λ` by contraction, with `v ≈ 1/t`.
pub fn ls_norm_sq_shallow(o: &ShallowObservable, inverse: &ShadowInverse) -> Result<f64> {
    let sq = PeriodicMps::hadamard(o.beta(), o.beta())?;
    let all = PeriodicMps::inner(&sq, inverse.pauli_mps())?;
    let id = vec![0; o.n()];
    Ok(all - sq.evaluate(&id)? * inverse.pauli_mps().evaluate(&id)?)
}

/// Triangle-inequality bound `(Σ_k |β_k| / √t_k)²`.
pub fn sparse_upper_sq(o: &SparseObservable, channel: &Channel) -> Result<f64> {
    let mut any = false;
    let mut acc = 0.0;
    for (c, p) in traceless_terms(o) {
        any = true;
        acc += c.abs() / channel.t(p)?.sqrt();
    }
    if !any {
        return Err(Error::TrivialObservable);
    }
    Ok(acc * acc)
}

pub fn sparse_report(o: &SparseObservable, channel: &Channel) -> Result<NormReport> {
    let upper = sparse_upper_sq(o, channel)?;
    let ls = ls_norm_sq(o, channel)?;
    let mut components = BTreeMap::new();
    components.insert("l1_norm".into(), traceless_terms(o).map(|(c, _)| c.abs()).sum());
    components.insert("terms".into(), traceless_terms(o).count() as f64);
    Ok(NormReport { ls_norm_sq: ls, worst_case_upper_sq: upper, method: NormMethod::SparseTriangle, components })
}

/// Real 2×2 representation of `i^g`.
fn phase_matrix(g: u8) -> DMatrix<f64> {
    match g & 3 {
        0 => DMatrix::identity(2, 2),
        1 => DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
        2 => -DMatrix::identity(2, 2),
        _ => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
    }
}

/// Merge qubit sites `(2j, 2j+1)` into one site with index `a + p·b`.
fn pair_sites(m: &PeriodicMps) -> Result<Vec<SiteTensor>> {
    if !m.len().is_multiple_of(2) {
        return Err(Error::OddQubitCount(m.len()));
    }
    Ok((0..m.len() / 2)
        .map(|j| {
            let (a, b) = (m.site(2 * j), m.site(2 * j + 1));
            b.iter().flat_map(|mb| a.iter().map(move |ma| ma * mb)).collect()
        })
        .collect())
}

/// τ over one qubit pair as pair-site matrices indexed by `s_a + 16 s_b`.
fn tau_pair_sites(tau: &PairChannel) -> Result<Vec<SiteTensor>> {
    match tau {
        PairChannel::Brickwork(m) => Ok((0..m.inner().len()).map(|j| m.inner().site(j).clone()).collect()),
        PairChannel::Local { n } => {
            let w = |s: usize| -> f64 {
                match (s % 4, s / 4) {
                    (0, 0) => 1.0,
                    (0, _) | (_, 0) => 1.0 / 3.0,
                    (a, b) if a == b => 1.0 / 3.0,
                    _ => 0.0,
                }
            };
            let site: SiteTensor = (0..256).map(|s| DMatrix::from_element(1, 1, w(s % 16) * w(s / 16))).collect();
            Ok(vec![site; n / 2])
        }
        PairChannel::Global { .. } => {
            Err(Error::Precondition("no joint-eigenvalue MPS for the global ensemble".into()))
        }
    }
}

/// `‖O‖²_{s(d)} ≤ ‖O‖²_LS + ‖Õ‖_F`, with `‖Õ‖_F` from the Pauli coefficient
/// MPS of `Õ' = Õ + ‖O‖²_LS·I`. The product phases of `P^λ P^λ'` ride
/// along as 2×2 real rotations, so the coefficient MPS has bond
/// `2·χ_O²·χ_τ·χ_v²` on qubit-pair sites.
pub fn frobenius_bound_sq(
    o: &ShallowObservable,
    tau: &PairChannel,
    inverse: &ShadowInverse,
    bond_cap: usize,
) -> Result<NormReport> {
    let n = o.n();
    check_even(n)?;
    if tau.n() != n || inverse.pauli_mps().len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: tau.n().min(inverse.pauli_mps().len()) });
    }
    let beta = pair_sites(o.beta())?;
    let v = pair_sites(inverse.pauli_mps())?;
    let taus = tau_pair_sites(tau)?;
    let pairs = n / 2;
    let bond = |j: usize| 2 * beta[j][0].nrows().pow(2) * taus[j][0].nrows() * v[j][0].nrows().pow(2);
    let widest = (0..pairs).map(bond).max().expect("non-empty");
    if widest > bond_cap {
        return Err(Error::BondCap { bond: widest, cap: bond_cap });
    }
    let symbol = |l: usize, lp: usize| l + 4 * lp;
    let mut sites = Vec::with_capacity(pairs);
    for j in 0..pairs {
        let mut site: SiteTensor = Vec::with_capacity(16);
        for mu in 0..16usize {
            let mut acc: Option<DMatrix<f64>> = None;
            for lam in 0..16usize {
                let lamp = lam ^ mu;
                let (la, lb, lpa, lpb) = (lam & 3, lam >> 2, lamp & 3, lamp >> 2);
                let t = &taus[j][symbol(la, lpa) + 16 * symbol(lb, lpb)];
                if t.iter().all(|&x| x == 0.0) {
                    continue;
                }
                let g = PHASE[la][lpa] + PHASE[lb][lpb];
                let term = beta[j][lam]
                    .kronecker(&beta[j][lamp])
                    .kronecker(t)
                    .kronecker(&v[j][lam])
                    .kronecker(&v[j][lamp])
                    .kronecker(&phase_matrix(g));
                acc = Some(match acc {
                    None => term,
                    Some(a) => a + term,
                });
            }
            let (r, c) = (bond(j), bond((j + 1) % pairs));
            site.push(acc.unwrap_or_else(|| DMatrix::zeros(r, c)));
        }
        sites.push(site);
    }
    let coeffs = PeriodicMps::new(sites)?;
    // the phase block contributes tr = 2 Re(·)
    let sum_sq = PeriodicMps::inner(&coeffs, &coeffs)? / 4.0;
    let c0 = coeffs.evaluate(&vec![0; pairs])? / 2.0;
    let scale = 2f64.powi(n as i32);
    let tilde_sq = (scale * (sum_sq - c0 * c0)).max(0.0);
    let ls = ls_norm_sq_shallow(o, inverse)?;
    let tilde = tilde_sq.sqrt();
    // c0 is the full diagonal sum, identity term included, so the bound
    // covers the second moment of O as given
    let upper = c0 + tilde;
    let mut components = BTreeMap::new();
    components.insert("tilde_frobenius".into(), tilde);
    components.insert("tilde_prime_frobenius_sq".into(), scale * sum_sq);
    components.insert("identity_coefficient".into(), c0);
    components.insert("bond".into(), widest as f64);
    Ok(NormReport { ls_norm_sq: ls, worst_case_upper_sq: upper, method: NormMethod::FrobeniusBound, components })
}

/// Per-qubit relation of two labels, which determines `τ`.
fn relation(a: u8, b: u8) -> u8 {
    match (a, b) {
        (0, 0) => 0,
        (0, _) => 1,
        (_, 0) => 2,
        (a, b) if a == b => 3,
        _ => 4,
    }
}

/// A label pair with the given relation, used as the class representative.
const RELATION_REPRESENTATIVE: [(usize, usize); 5] = [(0, 0), (0, 2), (2, 0), (2, 2), (1, 2)];

/// A matrix stored on its nonzero rows and columns.
#[derive(Clone, Debug)]
struct Support {
    rows: Vec<usize>,
    cols: Vec<usize>,
    m: DMatrix<f64>,
}

impl Support {
    fn new(a: &DMatrix<f64>) -> Self {
        let rows: Vec<usize> = (0..a.nrows()).filter(|&i| a.row(i).amax() != 0.0).collect();
        let cols: Vec<usize> = (0..a.ncols()).filter(|&j| a.column(j).amax() != 0.0).collect();
        let m = a.select_rows(&rows).select_columns(&cols);
        Self { rows, cols, m }
    }

    fn mul(&self, other: &Support) -> Support {
        let (mut xi, mut yi) = (Vec::new(), Vec::new());
        let (mut i, mut j) = (0, 0);
        while i < self.cols.len() && j < other.rows.len() {
            match self.cols[i].cmp(&other.rows[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    xi.push(i);
                    yi.push(j);
                    i += 1;
                    j += 1;
                }
            }
        }
        let m = self.m.select_columns(&xi) * other.m.select_rows(&yi);
        Support { rows: self.rows.clone(), cols: other.cols.clone(), m }
    }

    fn trace(&self) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| self.cols.binary_search(r).ok().map(|j| self.m[(i, j)]))
            .sum()
    }

    /// `tr(self · other)`.
    fn trace_with(&self, other: &Support) -> f64 {
        let width = other.cols.iter().chain(&other.rows).max().map_or(0, |m| m + 1);
        let mut col_pos = vec![usize::MAX; width];
        for (k, &c) in other.cols.iter().enumerate() {
            col_pos[c] = k;
        }
        let mut row_pos = vec![usize::MAX; width];
        for (b, &r) in other.rows.iter().enumerate() {
            row_pos[r] = b;
        }
        let lookup = |v: &[usize], x: usize| v.get(x).copied().filter(|&p| p != usize::MAX);
        let ks: Vec<Option<usize>> = self.rows.iter().map(|&r| lookup(&col_pos, r)).collect();
        let mut acc = 0.0;
        for (a, &c) in self.cols.iter().enumerate() {
            let Some(b) = lookup(&row_pos, c) else { continue };
            for (i, k) in ks.iter().enumerate() {
                if let Some(k) = *k {
                    acc += self.m[(i, a)] * other.m[(b, k)];
                }
            }
        }
        acc
    }
}

/// τ memoized by the per-qubit relation string of the pair. For brickwork
/// ensembles the two halves of the ring are cached separately, so a new
/// relation string usually costs one contraction of two cached products.
pub struct TauCache<'a> {
    tau: &'a PairChannel,
    values: HashMap<Vec<u8>, f64>,
    halves: HashMap<(usize, Vec<u8>), Support>,
}

impl<'a> TauCache<'a> {
    pub fn new(tau: &'a PairChannel) -> Self {
        Self { tau, values: HashMap::new(), halves: HashMap::new() }
    }

    pub fn get(&mut self, a: &PauliString, b: &PauliString) -> Result<f64> {
        if !a.commutes_with(b) {
            return Ok(0.0);
        }
        let n = self.tau.n();
        if a.n() != n || b.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.n().min(b.n()) });
        }
        let key: Vec<u8> = a.labels().iter().zip(b.labels()).map(|(&x, &y)| relation(x, y)).collect();
        if let Some(&v) = self.values.get(&key) {
            return Ok(v);
        }
        let v = match self.tau {
            PairChannel::Brickwork(m) => self.brickwork_value(m.inner(), &key),
            other => other.tau(a, b)?,
        };
        self.values.insert(key, v);
        Ok(v)
    }

    /// Product of the pair sites `start..end` at the representative digits.
    fn product(&mut self, inner: &PeriodicMps, key: &[u8], start: usize, end: usize) -> Support {
        let k = (start, key[2 * start..2 * end].to_vec());
        if let Some(s) = self.halves.get(&k) {
            return s.clone();
        }
        let digit = |j: usize| {
            let (a, ap) = RELATION_REPRESENTATIVE[key[2 * j] as usize];
            let (b, bp) = RELATION_REPRESENTATIVE[key[2 * j + 1] as usize];
            (a + 4 * ap) + 16 * (b + 4 * bp)
        };
        let site = Support::new(&inner.site(start)[digit(start)]);
        let out = if end == start + 1 { site } else { site.mul(&self.product(inner, key, start + 1, end)) };
        self.halves.insert(k, out.clone());
        out
    }

    fn brickwork_value(&mut self, inner: &PeriodicMps, key: &[u8]) -> f64 {
        let pairs = inner.len();
        let split = pairs.div_ceil(2);
        let left = self.product(inner, key, 0, split);
        if split == pairs {
            return left.trace();
        }
        let right = self.product(inner, key, split, pairs);
        left.trace_with(&right)
    }
}

/// `4^{−k} Σ_{λ,λ'∈Λ_S} τ_{λ,λ'}/(t_λ t_λ')`, the squared shadow norm of the
/// projector onto the space stabilized by `state`.
pub fn stabilizer_projector_norm_sq(state: &StabilizerState, channel: &Channel, tau: &PairChannel) -> Result<f64> {
    let k = state.k();
    if k > MAX_PROJECTOR_GENERATORS {
        return Err(Error::Precondition(format!("{k} generators exceed the limit of {MAX_PROJECTOR_GENERATORS}")));
    }
    let elements: Vec<PauliString> = state.group_elements().iter().map(PauliString::unsigned).collect();
    let inv_t: Vec<f64> = elements.iter().map(|p| Ok(1.0 / channel.t(p)?)).collect::<Result<_>>()?;
    let mut cache = TauCache::new(tau);
    let mut acc = 0.0;
    for (a, wa) in elements.iter().zip(&inv_t) {
        for (b, wb) in elements.iter().zip(&inv_t) {
            acc += cache.get(a, b)? * wa * wb;
        }
    }
    Ok(acc * 0.25f64.powi(k as i32))
}

pub fn stabilizer_report(state: &StabilizerState, channel: &Channel, tau: &PairChannel) -> Result<NormReport> {
    let worst = stabilizer_projector_norm_sq(state, channel, tau)?;
    let o = SparseObservable::stabilizer_projector(state)?;
    let ls = ls_norm_sq(&o, channel)?;
    let mut components = BTreeMap::new();
    components.insert("generators".into(), state.k() as f64);
    Ok(NormReport { ls_norm_sq: ls, worst_case_upper_sq: worst, method: NormMethod::StabilizerExact, components })
}

/// Monte-Carlo estimate of `E_U Σ_b ⟨b|UρU†|b⟩ ⟨b|U M^{-1}(O) U†|b⟩²` with its
/// standard error. The identity term of `O` is kept.
pub fn mc_state_dep_norm_sq<R: Rng + ?Sized>(
    o: &SparseObservable,
    rho: &StabilizerState,
    channel: &Channel,
    shots: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if shots < 2 {
        return Err(Error::Precondition("at least two shots are needed".into()));
    }
    let inv_t = inverse_eigenvalues(o, channel)?;
    let depth = channel.depth();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..shots {
        let circuit = Circuit::sample(o.n(), depth, rng)?;
        let b = measure_all(rho, &circuit, rng)?;
        let mut x = 0.0;
        for ((beta, p), w) in o.terms().iter().zip(&inv_t) {
            x += beta * w * basis_expectation(&circuit.conjugate(p)?, &b) as f64;
        }
        sum += x * x;
        sum_sq += x.powi(4);
    }
    let m = shots as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0) * m / (m - 1.0);
    Ok((mean, (var / m).sqrt()))
}

/// `Õ` as dense Pauli coefficients over all `4^n` labels, for small `n`.
pub fn tilde_coefficients(o: &SparseObservable, channel: &Channel, tau: &PairChannel) -> Result<Vec<f64>> {
    let n = o.n();
    if n > 8 {
        return Err(Error::Precondition("dense Õ limited to 8 qubits".into()));
    }
    let mut out = vec![0.0; 1 << (2 * n)];
    let mut cache = TauCache::new(tau);
    for (ba, a) in o.terms() {
        for (bb, b) in o.terms() {
            if a == b || !a.commutes_with(b) {
                continue;
            }
            let (k, prod) = a.product(b);
            debug_assert!(k % 2 == 0);
            let sign = if k == 2 { -1.0 } else { 1.0 };
            let w = ba * bb * cache.get(a, b)? / (channel.t(a)? * channel.t(b)?);
            out[prod.index()] += sign * w;
        }
    }
    Ok(out)
}

/// Depth condition `d ≥ (α ln n + ln(1/c)) / ln(25/16)` with `n > (25c/18)^{1/(α−1)}`.
pub fn statmech_preconditions(n: usize, d: usize, alpha: f64, c: f64) -> Result<()> {
    if !(alpha > 1.0) || !(c > 0.0) {
        return Err(Error::Precondition(format!("need α > 1 and c > 0, got α = {alpha}, c = {c}")));
    }
    let nf = n as f64;
    let min_depth = (alpha * nf.ln() + (1.0 / c).ln()) / (25.0f64 / 16.0).ln();
    if (d as f64) < min_depth {
        return Err(Error::Precondition(format!("depth {d} below the required {min_depth:.3}")));
    }
    let min_n = (25.0 * c / 18.0).powf(1.0 / (alpha - 1.0));
    if nf <= min_n {
        return Err(Error::Precondition(format!("n = {n} must exceed {min_n:.3}")));
    }
    Ok(())
}

/// `1 / (1 + (16/25) / ((18/(25c)) n^{α−1} − 1))`.
pub fn statmech_correction(n: usize, alpha: f64, c: f64) -> f64 {
    let x = 18.0 / (25.0 * c) * (n as f64).powf(alpha - 1.0) - 1.0;
    1.0 / (1.0 + 16.0 / 25.0 / x)
}

/// Lower bound on `t_{λ,d}` for a Pauli whose support spans `extent`
/// consecutive qubits.
pub fn statmech_t_lower_bound(n: usize, d: usize, extent: usize, alpha: f64, c: f64) -> Result<f64> {
    statmech_preconditions(n, d, alpha, c)?;
    let span = (extent + 2 * d).min(n);
    Ok(1.0 / (2f64.powi(span as i32) + 1.0) * statmech_correction(n, alpha, c))
}

/// Length of the shortest arc of the ring containing the support of `p`.
pub fn support_extent(p: &PauliString) -> usize {
    let n = p.n();
    let support: Vec<usize> = (0..n).filter(|&q| p.label(q) != 0).collect();
    if support.is_empty() {
        return 0;
    }
    // the complement of the largest cyclic gap between support qubits
    let mut gap = 0;
    for (i, &q) in support.iter().enumerate() {
        let next = support[(i + 1) % support.len()];
        let g = (next + n - q) % n;
        gap = gap.max(if g == 0 { n } else { g });
    }
    n - gap + 1
}

pub fn statmech_report(p: &PauliString, depth: Depth, alpha: f64, c: f64) -> Result<NormReport> {
    let Depth::Finite(d) = depth else {
        return Err(Error::Precondition("the bound is stated for finite depth".into()));
    };
    if p.is_identity() {
        return Err(Error::IdentityPauli);
    }
    let lower = statmech_t_lower_bound(p.n(), d, support_extent(p), alpha, c)?;
    let mut components = BTreeMap::new();
    components.insert("t_lower_bound".into(), lower);
    components.insert("correction".into(), statmech_correction(p.n(), alpha, c));
    // ‖P‖²_s = 1/t is at most 1/lower
    Ok(NormReport {
        ls_norm_sq: 1.0 / lower,
        worst_case_upper_sq: 1.0 / lower,
        method: NormMethod::StatmechBound,
        components,
    })
}

/// Squared norms of an observable evaluated on its dense coefficients, for tests.
pub fn dense_ls_norm_sq(beta: &[f64], n: usize, channel: &Channel) -> Result<f64> {
    let mut acc = 0.0;
    for (idx, &b) in beta.iter().enumerate().skip(1) {
        if b != 0.0 {
            acc += b * b / channel.t(&PauliString::from_index(n, idx))?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn pauli_norms_closed_forms() {
        let local = Channel::new(4, Depth::Finite(0)).unwrap();
        assert!((pauli_norm_sq(&p("XZII"), &local).unwrap() - 9.0).abs() < 1e-12);
        let pair = Channel::new(2, Depth::Finite(1)).unwrap();
        assert!((pauli_norm_sq(&p("ZI"), &pair).unwrap() - 5.0).abs() < 1e-10);
        let global = Channel::new(20, Depth::Infinite).unwrap();
        let z = PauliString::single(20, 3, crate::pauli::Z);
        assert_eq!(pauli_norm_sq(&z, &global).unwrap(), 2f64.powi(20) + 1.0);
        assert!(matches!(pauli_norm_sq(&PauliString::identity(4), &local), Err(Error::IdentityPauli)));
    }

    #[test]
    fn single_term_triangle_is_exact() {
        let ch = Channel::new(6, Depth::Finite(2)).unwrap();
        let o = SparseObservable::from_strings(&[(0.5, "IXZYII"), (3.0, "IIIIII")]).unwrap();
        let t = ch.t(&p("IXZYII")).unwrap();
        assert!((sparse_upper_sq(&o, &ch).unwrap() - 0.25 / t).abs() < 1e-10);
        assert!((ls_norm_sq(&o, &ch).unwrap() - 0.25 / t).abs() < 1e-10);
        let id = SparseObservable::from_strings(&[(1.0, "IIIIII")]).unwrap();
        assert!(matches!(sparse_upper_sq(&id, &ch), Err(Error::TrivialObservable)));
    }

    #[test]
    fn frobenius_of_single_pauli() {
        // Õ vanishes, so the bound is the diagonal term 1/t
        let ch = Channel::new(4, Depth::Finite(1)).unwrap();
        let tau = PairChannel::new(4, Depth::Finite(1)).unwrap();
        let inv = ShadowInverse::exact(&ch).unwrap();
        let lam = p("XZII");
        let o = ShallowObservable::pauli(1.0, &lam);
        let r = frobenius_bound_sq(&o, &tau, &inv, DEFAULT_BOND_CAP).unwrap();
        let expect = 1.0 / ch.t(&lam).unwrap();
        assert!((r.worst_case_upper_sq - expect).abs() < 1e-9 * expect, "{r:?}");
        assert!(r.components["tilde_frobenius"] < 1e-6);
    }

    #[test]
    fn frobenius_matches_dense_tilde() {
        for depth in [Depth::Finite(0), Depth::Finite(1)] {
            let ch = Channel::new(4, depth).unwrap();
            let tau = PairChannel::new(4, depth).unwrap();
            let inv = ShadowInverse::exact(&ch).unwrap();
            let sparse = SparseObservable::from_strings(&[(0.7, "ZZII"), (-0.4, "IZZI"), (0.3, "XXXX")]).unwrap();
            let coeffs = tilde_coefficients(&sparse, &ch, &tau).unwrap();
            let dense = (16.0 * coeffs.iter().map(|c| c * c).sum::<f64>()).sqrt();
            let shallow = ShallowObservable::from_sparse(&sparse).unwrap();
            let r = frobenius_bound_sq(&shallow, &tau, &inv, DEFAULT_BOND_CAP).unwrap();
            let got = r.components["tilde_frobenius"];
            assert!((got - dense).abs() < 1e-8 * dense.max(1.0), "{depth:?}: {got} vs {dense}");
            let ls = ls_norm_sq(&sparse, &ch).unwrap();
            assert!((r.ls_norm_sq - ls).abs() < 1e-9 * ls);
        }
    }

    #[test]
    fn frobenius_respects_bond_cap() {
        let ch = Channel::new(4, Depth::Finite(1)).unwrap();
        let tau = PairChannel::new(4, Depth::Finite(1)).unwrap();
        let inv = ShadowInverse::exact(&ch).unwrap();
        let o = ShallowObservable::ghz_projector(4).unwrap();
        assert!(matches!(frobenius_bound_sq(&o, &tau, &inv, 4), Err(Error::BondCap { .. })));
    }

    #[test]
    fn projector_of_trivial_group() {
        let state = StabilizerState::new(4, vec![]).unwrap();
        let ch = Channel::new(4, Depth::Finite(1)).unwrap();
        let tau = PairChannel::new(4, Depth::Finite(1)).unwrap();
        assert!((stabilizer_projector_norm_sq(&state, &ch, &tau).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projector_norm_brute_force() {
        for (n, depth) in [
            (4, Depth::Finite(0)),
            (4, Depth::Finite(1)),
            (4, Depth::Infinite),
            (6, Depth::Finite(2)),
            (4, Depth::Finite(3)),
        ] {
            let state = StabilizerState::ghz(n);
            let ch = Channel::new(n, depth).unwrap();
            let tau = PairChannel::new(n, depth).unwrap();
            let elems = state.group_elements();
            let mut acc = 0.0;
            for a in &elems {
                for b in &elems {
                    let (a, b) = (a.unsigned(), b.unsigned());
                    acc += tau.tau(&a, &b).unwrap() / (ch.t(&a).unwrap() * ch.t(&b).unwrap());
                }
            }
            let got = stabilizer_projector_norm_sq(&state, &ch, &tau).unwrap();
            let want = acc * 0.25f64.powi(n as i32);
            assert!((got - want).abs() < 1e-9 * got, "n={n} {depth:?}: {got} vs {want}");
        }
    }

    #[test]
    fn correction_increases_with_n() {
        let mut last = 0.0;
        for n in [10, 20, 40, 80, 160] {
            let c = statmech_correction(n, 1.5, 2.2);
            assert!(c > last && c < 1.0);
            last = c;
        }
    }

    #[test]
    fn statmech_refuses_outside_preconditions() {
        assert!(statmech_t_lower_bound(10, 6, 2, 1.5, 2.2).is_ok());
        assert!(matches!(statmech_t_lower_bound(10, 5, 2, 1.5, 2.2), Err(Error::Precondition(_))));
        assert!(matches!(statmech_t_lower_bound(10, 6, 2, 1.0, 2.2), Err(Error::Precondition(_))));
        // n must exceed (25c/18)^{1/(α−1)}
        assert!(matches!(statmech_t_lower_bound(4, 40, 2, 1.5, 5.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn statmech_bound_below_exact() {
        let ch = Channel::new(10, Depth::Finite(6)).unwrap();
        let lam = p("XZIIIIIIII");
        let lower = statmech_t_lower_bound(10, 6, support_extent(&lam), 1.5, 2.2).unwrap();
        assert!(lower <= ch.t(&lam).unwrap());
    }

    #[test]
    fn extent_on_ring() {
        assert_eq!(support_extent(&p("XIIIIZ")), 2);
        assert_eq!(support_extent(&p("IXIZII")), 3);
        assert_eq!(support_extent(&p("IIIIII")), 0);
        assert_eq!(support_extent(&p("IIXIII")), 1);
    }
}
