//! Dense Markov-chain references for `t` and `τ`.
//!
//! These propagate Pauli labels through the brickwork with kernels averaged
//! directly over the enumerated Clifford groups, with no signature or OR
//! compression, and serve as independent checks of the MPS constructions.

use crate::brickwork::{check_even, layer_pairs};
use crate::clifford::{one_qubit_group, two_qubit_group};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Largest `n` the dense oracles accept.
pub const MAX_DENSE_QUBITS: usize = 8;

/// `t_λ` for every label by backward propagation over all `4^n` labels.
#[derive(Clone, Debug)]
pub struct DenseMarkovOracle {
    n: usize,
    d: usize,
    /// `single[out·4 + in]`.
    single: [f64; 16],
    /// `pair[out·16 + in]` over packed two-qubit labels.
    pair: Vec<f64>,
    t: Vec<f64>,
}

impl DenseMarkovOracle {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        check_even(n)?;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Precondition(format!("dense oracle limited to {MAX_DENSE_QUBITS} qubits")));
        }
        let mut single = [0.0; 16];
        let one = one_qubit_group();
        for g in one.iter() {
            for l in 0..4u8 {
                single[g.apply(l).0 as usize * 4 + l as usize] += 1.0 / one.len() as f64;
            }
        }
        let mut pair = vec![0.0; 256];
        let two = two_qubit_group();
        for g in two.iter() {
            for l in 0..16u8 {
                pair[g.apply(l).0 as usize * 16 + l as usize] += 1.0 / two.len() as f64;
            }
        }
        let mut oracle = Self { n, d, single, pair, t: Vec::new() };
        oracle.t = oracle.propagate();
        Ok(oracle)
    }

    pub fn single_kernel(&self) -> &[f64; 16] {
        &self.single
    }

    pub fn pair_kernel(&self) -> &[f64] {
        &self.pair
    }

    fn propagate(&self) -> Vec<f64> {
        let n = self.n;
        let size = 1usize << (2 * n);
        // f(λ) = Pr[final label is Z-type | label λ at this point]
        let mut f: Vec<f64> = (0..size)
            .map(|idx| if PauliString::from_index(n, idx).in_pm_z() { 1.0 } else { 0.0 })
            .collect();
        for layer in (1..=self.d).rev() {
            for [a, b] in layer_pairs(n, layer) {
                let mut next = vec![0.0; size];
                for (idx, slot) in next.iter_mut().enumerate() {
                    let la = (idx >> (2 * a)) & 3;
                    let lb = (idx >> (2 * b)) & 3;
                    let rest = idx & !(3 << (2 * a)) & !(3 << (2 * b));
                    let input = la | lb << 2;
                    *slot = (0..16)
                        .map(|out| {
                            let target = rest | (out & 3) << (2 * a) | (out >> 2) << (2 * b);
                            self.pair[out * 16 + input] * f[target]
                        })
                        .sum();
                }
                f = next;
            }
        }
        for q in 0..n {
            let mut next = vec![0.0; size];
            for (idx, slot) in next.iter_mut().enumerate() {
                let l = (idx >> (2 * q)) & 3;
                let rest = idx & !(3 << (2 * q));
                *slot = (0..4).map(|out| self.single[out * 4 + l] * f[rest | out << (2 * q)]).sum();
            }
            f = next;
        }
        f
    }

    pub fn t(&self, lambda: &PauliString) -> f64 {
        self.t[lambda.index()]
    }

    /// All eigenvalues indexed by `PauliString::index`.
    pub fn t_all(&self) -> &[f64] {
        &self.t
    }

    pub fn depth(&self) -> usize {
        self.d
    }
}

/// Per-qubit relation of two labels: `II`, `IP`, `PI`, `PP` (equal), `PQ` (different).
fn class(a: u8, b: u8) -> usize {
    match (a, b) {
        (0, 0) => 0,
        (0, _) => 1,
        (_, 0) => 2,
        (a, b) if a == b => 3,
        _ => 4,
    }
}

const CLASS_REPRESENTATIVE: [(u8, u8); 5] = [(0, 0), (0, 2), (2, 0), (2, 2), (1, 2)];
const CLASS_WEIGHT: [f64; 5] = [1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0];

/// `τ_{λ,λ'}` by backward propagation over the `5^n` strings of per-qubit
/// label relations. Every gate is invariant under local Cliffords on either
/// side, so the propagation only depends on these relations.
#[derive(Clone, Debug)]
pub struct PairMarkovOracle {
    n: usize,
    f: Vec<f64>,
}

impl PairMarkovOracle {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        check_even(n)?;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::Precondition(format!("dense oracle limited to {MAX_DENSE_QUBITS} qubits")));
        }
        // kernel[out·25 + in] over (class_a + 5·class_b)
        let mut kernel = vec![0.0; 625];
        let two = two_qubit_group();
        for ca in 0..5 {
            for cb in 0..5 {
                let (la, lpa) = CLASS_REPRESENTATIVE[ca];
                let (lb, lpb) = CLASS_REPRESENTATIVE[cb];
                let (g, gp) = (la | lb << 2, lpa | lpb << 2);
                for u in two.iter() {
                    let (h, hp) = (u.apply(g).0, u.apply(gp).0);
                    let out = class(h & 3, hp & 3) + 5 * class(h >> 2, hp >> 2);
                    kernel[out * 25 + ca + 5 * cb] += 1.0 / two.len() as f64;
                }
            }
        }
        let size = 5usize.pow(n as u32);
        let pow5: Vec<usize> = (0..n).map(|q| 5usize.pow(q as u32)).collect();
        let digit = |s: usize, q: usize| (s / pow5[q]) % 5;
        let mut f: Vec<f64> = (0..size).map(|s| (0..n).map(|q| CLASS_WEIGHT[digit(s, q)]).product()).collect();
        for layer in (1..=d).rev() {
            for [a, b] in layer_pairs(n, layer) {
                let mut next = vec![0.0; size];
                for (s, slot) in next.iter_mut().enumerate() {
                    let (ca, cb) = (digit(s, a), digit(s, b));
                    let rest = s - ca * pow5[a] - cb * pow5[b];
                    let input = ca + 5 * cb;
                    *slot = (0..25)
                        .map(|out| kernel[out * 25 + input] * f[rest + (out % 5) * pow5[a] + (out / 5) * pow5[b]])
                        .sum();
                }
                f = next;
            }
        }
        Ok(Self { n, f })
    }

    pub fn tau(&self, lambda: &PauliString, lambda2: &PauliString) -> f64 {
        let s: usize = (0..self.n).rev().fold(0, |acc, q| acc * 5 + class(lambda.label(q), lambda2.label(q)));
        self.f[s]
    }
}

/// `τ` for every ordered pair by propagation over all `16^n` label pairs,
/// using the full two-qubit pair kernel. Only for `n ≤ 4`.
pub fn full_pair_tau(n: usize, d: usize) -> Result<Vec<f64>> {
    check_even(n)?;
    if n > 4 {
        return Err(Error::Precondition("full pair propagation limited to 4 qubits".into()));
    }
    let kernel = super::tau::GammaKernel::global();
    let size = 1usize << (4 * n);
    // index = Σ_q (λ_q + 4λ'_q) 16^q
    let mut f: Vec<f64> = (0..size)
        .map(|idx| (0..n).all(|q| (idx >> (4 * q)) & 0b0101 == 0) as u8 as f64)
        .collect();
    for layer in (1..=d).rev() {
        for [a, b] in layer_pairs(n, layer) {
            let mut next = vec![0.0; size];
            for (idx, slot) in next.iter_mut().enumerate() {
                let sa = (idx >> (4 * a)) & 15;
                let sb = (idx >> (4 * b)) & 15;
                let rest = idx & !(15 << (4 * a)) & !(15 << (4 * b));
                *slot = (0..256)
                    .map(|out| kernel.get(out, sa + 16 * sb) * f[rest | (out % 16) << (4 * a) | (out / 16) << (4 * b)])
                    .sum();
            }
            f = next;
        }
    }
    if d == 0 {
        // single-qubit layer: each symbol averages to its class weight
        f = (0..size)
            .map(|idx| {
                (0..n)
                    .map(|q| {
                        let s = (idx >> (4 * q)) & 15;
                        CLASS_WEIGHT[class((s & 3) as u8, (s >> 2) as u8)]
                    })
                    .product()
            })
            .collect();
    }
    Ok(f)
}

/// Index into [`full_pair_tau`] for `(λ, λ')`.
pub fn full_pair_index(lambda: &PauliString, lambda2: &PauliString) -> usize {
    (0..lambda.n()).rev().fold(0, |acc, q| acc << 4 | (lambda.label(q) + 4 * lambda2.label(q)) as usize)
}
