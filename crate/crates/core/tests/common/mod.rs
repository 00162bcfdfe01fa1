#![allow(dead_code)]

use rand::Rng;
use shallow_shadows::brickwork::Circuit;
use shallow_shadows::clifford::random_clifford;
use shallow_shadows::dense;
use shallow_shadows::pauli::PauliString;
use shallow_shadows::shadows::SparseObservable;
use shallow_shadows::stabilizer::StabilizerState;

pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliString {
    PauliString::from_labels((0..n).map(|_| rng.random_range(0..4u8)).collect(), false)
}

pub fn random_non_identity<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PauliString {
    loop {
        let p = random_pauli(n, rng);
        if !p.is_identity() {
            return p;
        }
    }
}

/// A uniformly random pure stabilizer state.
pub fn random_stabilizer_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StabilizerState {
    StabilizerState::zero(n).evolve(&Circuit::Global(random_clifford(n, rng))).unwrap()
}

/// A random traceless observable with `terms` Pauli terms.
pub fn random_sparse<R: Rng + ?Sized>(n: usize, terms: usize, rng: &mut R) -> SparseObservable {
    let t = (0..terms).map(|_| (rng.random_range(-1.0..1.0), random_non_identity(n, rng))).collect();
    SparseObservable::new(n, t).unwrap()
}

/// `tr(Oρ)` by dense linear algebra.
pub fn dense_expectation(o: &SparseObservable, state: &StabilizerState) -> f64 {
    let psi = dense::stabilizer_vector(state).unwrap();
    let op = dense::operator_from_coefficients(&o.dense_coefficients(), o.n());
    (psi.adjoint() * op * &psi)[(0, 0)].re
}

/// Largest absolute eigenvalue of a Hermitian observable.
pub fn operator_norm(o: &SparseObservable) -> f64 {
    let op = dense::operator_from_coefficients(&o.dense_coefficients(), o.n());
    op.symmetric_eigenvalues().iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

pub fn sample_variance(values: &[f64]) -> f64 {
    let (mean, _) = mean_and_stderr(values);
    values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}
