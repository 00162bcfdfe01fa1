//! Dense state-vector and operator helpers for small `n`.
//!
//! These exist to cross-check the tableau and tensor-network code; every
//! routine is exponential in `n`. Basis index `i` has qubit `q` in bit `q`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::brickwork::Circuit;
use crate::clifford::{Generator, LocalClifford};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::stabilizer::StabilizerState;

pub type C64 = Complex<f64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_matrix(p: &PauliString) -> DMatrix<C64> {
    let n = p.n();
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    let flip: usize = (0..n).filter(|&q| p.label(q) & 1 == 1).map(|q| 1 << q).sum();
    for i in 0..dim {
        let mut amp = c(p.sign(), 0.0);
        for q in 0..n {
            let bit = (i >> q) & 1 == 1;
            amp *= match p.label(q) {
                0 | 1 => c(1.0, 0.0),
                2 => c(if bit { -1.0 } else { 1.0 }, 0.0),
                _ => c(0.0, if bit { -1.0 } else { 1.0 }),
            };
        }
        m[(i ^ flip, i)] = amp;
    }
    m
}

fn generator_matrix(g: Generator) -> DMatrix<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = DMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
    let ph = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
    let id = DMatrix::<C64>::identity(2, 2);
    // kronecker(A, B) puts A on the more significant bit, i.e. local qubit 1.
    match g {
        Generator::H(0) => id.kronecker(&h),
        Generator::H(_) => h.kronecker(&id),
        Generator::S(0) => id.kronecker(&ph),
        Generator::S(_) => ph.kronecker(&id),
        Generator::Cx => {
            let mut m = DMatrix::zeros(4, 4);
            for i in 0..4usize {
                let j = if i & 1 == 1 { i ^ 2 } else { i };
                m[(j, i)] = c(1.0, 0.0);
            }
            m
        }
    }
}

/// Unitary of a local Clifford on its own qubits (2×2 or 4×4), from its generator word.
pub fn local_unitary(g: &LocalClifford) -> DMatrix<C64> {
    let mut u = DMatrix::<C64>::identity(4, 4);
    for &gen in g.word() {
        u = generator_matrix(gen) * u;
    }
    if g.arity() == 1 {
        // Words of one-qubit elements only act on local qubit 0.
        DMatrix::from_fn(2, 2, |i, j| u[(i, j)])
    } else {
        u
    }
}

/// Embed a local unitary acting on `qubits` into `n` qubits.
pub fn embed(u: &DMatrix<C64>, qubits: &[usize], n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let k = qubits.len();
    let mut out = DMatrix::zeros(dim, dim);
    let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    for i in 0..dim {
        let li: usize = qubits.iter().enumerate().map(|(t, &q)| ((i >> q) & 1) << t).sum();
        for lo in 0..1usize << k {
            let mut j = i & !mask;
            for (t, &q) in qubits.iter().enumerate() {
                j |= ((lo >> t) & 1) << q;
            }
            out[(j, i)] += u[(lo, li)];
        }
    }
    out
}

pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<C64>> {
    let Some(layers) = circuit.layers() else {
        return Err(Error::Precondition("dense unitary needs an explicit gate list".into()));
    };
    let n = circuit.n();
    let mut u = DMatrix::<C64>::identity(1 << n, 1 << n);
    for layer in layers {
        for g in layer {
            u = embed(&local_unitary(&g.gate), g.support(), n) * u;
        }
    }
    Ok(u)
}

/// Normalized state vector of a pure stabilizer state.
pub fn stabilizer_vector(state: &StabilizerState) -> Result<DVector<C64>> {
    if !state.is_pure() {
        return Err(Error::MixedState { k: state.k(), n: state.n() });
    }
    let dim = 1usize << state.n();
    let id = DMatrix::<C64>::identity(dim, dim);
    let mut proj = id.clone();
    for g in state.generators() {
        proj = (&id + pauli_matrix(g)) * c(0.5, 0.0) * proj;
    }
    let col = (0..dim)
        .map(|j| proj.column(j).into_owned())
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("non-empty");
    let norm = col.norm();
    Ok(col / c(norm, 0.0))
}

pub fn density_matrix(psi: &DVector<C64>) -> DMatrix<C64> {
    psi * psi.adjoint()
}

/// Real Pauli coefficients `α_λ = 2^{-n} tr(P^λ A)` indexed by `PauliString::index`.
pub fn pauli_coefficients(a: &DMatrix<C64>, n: usize) -> Vec<f64> {
    let scale = 1.0 / (1u64 << n) as f64;
    (0..1usize << (2 * n)).map(|idx| (pauli_matrix(&PauliString::from_index(n, idx)) * a).trace().re * scale).collect()
}

/// `Σ_λ β_λ P^λ` for a dense coefficient vector.
pub fn operator_from_coefficients(beta: &[f64], n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for (idx, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            out += pauli_matrix(&PauliString::from_index(n, idx)) * c(b, 0.0);
        }
    }
    out
}
