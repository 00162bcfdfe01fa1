//! Stabilizer states, computational-basis measurement, and the Monte-Carlo
//! estimate of channel eigenvalues.

use rand::Rng;

use crate::brickwork::{layer_pairs, BrickworkSpec, Circuit, Depth};
use crate::clifford::{one_qubit_group, random_clifford, two_qubit_group};
use crate::error::{Error, Result};
use crate::pauli::{PauliString, X, Z};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    generators: Vec<PauliString>,
}

fn gf2_rank(rows: &mut [Vec<bool>]) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c]) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] {
                let pivot = rows[rank].clone();
                for (a, b) in rows[r].iter_mut().zip(pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

impl StabilizerState {
    /// Validates that the generators commute, are independent and Hermitian.
    pub fn new(n: usize, generators: Vec<PauliString>) -> Result<Self> {
        if generators.len() > n {
            return Err(Error::InvalidStabilizer(format!("{} generators on {n} qubits", generators.len())));
        }
        for g in &generators {
            if g.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: g.n() });
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(Error::InvalidStabilizer(format!("{a} and {b} anticommute")));
                }
            }
        }
        let mut rows: Vec<Vec<bool>> =
            generators.iter().map(|g| g.x().into_iter().chain(g.z()).collect()).collect();
        if gf2_rank(&mut rows) != generators.len() {
            return Err(Error::InvalidStabilizer("generators are not independent".into()));
        }
        Ok(Self { n, generators })
    }

    pub fn from_strings<S: AsRef<str>>(gens: &[S]) -> Result<Self> {
        let gens = gens.iter().map(|s| s.as_ref().parse()).collect::<Result<Vec<PauliString>>>()?;
        let n = gens.first().map_or(0, |g| g.n());
        Self::new(n, gens)
    }

    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        let generators = (0..n).map(|q| PauliString::single(n, q, Z)).collect();
        Self { n, generators }
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`, stabilized by `X^{⊗n}` and `Z_q Z_{q+1}`.
    pub fn ghz(n: usize) -> Self {
        let mut generators = vec![PauliString::from_labels(vec![X; n], false)];
        for q in 0..n.saturating_sub(1) {
            let mut labels = vec![0; n];
            labels[q] = Z;
            labels[q + 1] = Z;
            generators.push(PauliString::from_labels(labels, false));
        }
        Self { n, generators }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.generators.len()
    }

    pub fn is_pure(&self) -> bool {
        self.generators.len() == self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// All `2^k` signed elements of the stabilizer group.
    pub fn group_elements(&self) -> Vec<PauliString> {
        let mut elements = vec![PauliString::identity(self.n)];
        for g in &self.generators {
            let extra: Vec<_> = elements.iter().map(|e| e.mul_commuting(g)).collect();
            elements.extend(extra);
        }
        elements
    }

    /// Stabilizer state `U ρ U†`.
    pub fn evolve(&self, circuit: &Circuit) -> Result<Self> {
        let generators = self.generators.iter().map(|g| circuit.conjugate(g)).collect::<Result<_>>()?;
        Ok(Self { n: self.n, generators })
    }
}

/// Sample `b` from `⟨b|ψ⟩` for a pure stabilizer state given by generators.
fn sample_outcome<R: Rng + ?Sized>(n: usize, mut rows: Vec<PauliString>, rng: &mut R) -> Vec<bool> {
    // Eliminate X parts; the remaining rows generate the Z-type subgroup.
    let mut r = 0;
    for q in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].label(q) & 1 == 1) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i].label(q) & 1 == 1 {
                rows[i] = rows[i].mul_commuting(&rows[r]);
            }
        }
        r += 1;
    }
    // Z-type element s with sign: ⟨b|s|b⟩ = 1 requires z·b = [s negative].
    let mut eqs: Vec<(Vec<bool>, bool)> = rows[r..].iter().map(|s| (s.z(), s.is_negative())).collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for q in 0..n {
        let Some(p) = (rank..eqs.len()).find(|&i| eqs[i].0[q]) else {
            continue;
        };
        eqs.swap(rank, p);
        let (pivot_row, pivot_rhs) = eqs[rank].clone();
        for (i, (row, rhs)) in eqs.iter_mut().enumerate() {
            if i != rank && row[q] {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
                *rhs ^= pivot_rhs;
            }
        }
        pivots.push(q);
        rank += 1;
    }
    let mut b: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
    for (i, &q) in pivots.iter().enumerate() {
        let (row, rhs) = &eqs[i];
        let mut v = *rhs;
        for c in 0..n {
            if c != q && row[c] {
                v ^= b[c];
            }
        }
        b[q] = v;
    }
    b
}

/// Measure every qubit of `U ρ U†` in the computational basis.
pub fn measure_all<R: Rng + ?Sized>(state: &StabilizerState, circuit: &Circuit, rng: &mut R) -> Result<Vec<bool>> {
    if !state.is_pure() {
        return Err(Error::MixedState { k: state.k(), n: state.n });
    }
    let evolved = state.evolve(circuit)?;
    Ok(sample_outcome(state.n, evolved.generators, rng))
}

/// Push `labels` through a freshly sampled brickwork circuit without storing it.
/// Gates acting on two identity labels are skipped since they fix the identity.
fn conjugate_random_brickwork<R: Rng + ?Sized>(labels: &mut [u8], d: usize, rng: &mut R) {
    let n = labels.len();
    let one = one_qubit_group();
    let two = two_qubit_group();
    for l in labels.iter_mut() {
        if *l != 0 {
            *l = one.get(one.sample(rng)).apply(*l).0;
        }
    }
    for layer in 1..=d {
        for [a, b] in layer_pairs(n, layer) {
            let packed = labels[a] | labels[b] << 2;
            if packed != 0 {
                let img = two.get(two.sample(rng)).apply(packed).0;
                labels[a] = img & 3;
                labels[b] = img >> 2;
            }
        }
    }
}

/// Monte-Carlo estimate of `Pr[U P U† ∈ ±Z]` with its binomial standard error.
pub fn monte_carlo_t<R: Rng + ?Sized>(
    lambda: &PauliString,
    spec: &BrickworkSpec,
    shots: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if lambda.n() != spec.n() {
        return Err(Error::DimensionMismatch { expected: spec.n(), got: lambda.n() });
    }
    if shots == 0 {
        return Err(Error::Precondition("shots must be positive".into()));
    }
    let mut hits = 0usize;
    let mut labels = lambda.labels().to_vec();
    for _ in 0..shots {
        let in_z = match spec.depth() {
            Depth::Finite(d) => {
                labels.copy_from_slice(lambda.labels());
                conjugate_random_brickwork(&mut labels, d, rng);
                labels.iter().all(|l| l & 1 == 0)
            }
            Depth::Infinite => random_clifford(spec.n(), rng).conjugate(lambda)?.in_pm_z(),
        };
        hits += in_z as usize;
    }
    let p = hits as f64 / shots as f64;
    Ok((p, (p * (1.0 - p) / shots as f64).sqrt()))
}
