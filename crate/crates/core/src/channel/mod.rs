//! The measurement channel of brickwork shadows.
//!
//! The channel is diagonal in the Pauli basis with eigenvalue
//! `t_λ = Pr[U P^λ U† ∈ ±Z]`. For finite depth `t_λ` depends only on the
//! pair signature of `λ` (one bit per qubit pair) and is an MPS of bond
//! dimension `2^{d-1}` over those bits.

mod column;
pub mod oracle;
pub mod tau;

use nalgebra::DMatrix;

use crate::brickwork::{check_even, Depth};
use crate::error::{Error, Result};
use crate::mps::PeriodicMps;
use crate::pauli::PauliString;

use column::ColumnKernel;

pub use tau::{build_tau_mps, tau_value, GammaKernel, PairEigenvalueMps};

/// Two-qubit gate action on signatures: rows are output signatures
/// `00, 10, 01, 11` (left bit least significant), columns the OR of the inputs.
pub const SIGNATURE_GATE: [[f64; 2]; 4] = [[1.0, 0.0], [0.0, 0.2], [0.0, 0.2], [0.0, 0.6]];

/// Final-layer weight per qubit signature bit.
pub const SIGNATURE_WEIGHT: [f64; 2] = [1.0, 1.0 / 3.0];

/// Channel eigenvalues for finite depth `d ≥ 1`, over pair signatures.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueMps {
    n: usize,
    d: usize,
    inner: PeriodicMps,
}

impl EigenvalueMps {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.d
    }

    pub fn inner(&self) -> &PeriodicMps {
        &self.inner
    }

    pub fn evaluate_signature(&self, h: &[usize]) -> Result<f64> {
        self.inner.evaluate(h)
    }

    pub fn value(&self, lambda: &PauliString) -> Result<f64> {
        if lambda.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: lambda.n() });
        }
        self.inner.evaluate(&lambda.pair_signature())
    }
}

/// Exact `t`-MPS for `n` qubits at depth `d ≥ 1`.
pub fn build_t_mps(n: usize, d: usize) -> Result<EigenvalueMps> {
    check_even(n)?;
    if d == 0 {
        return Err(Error::Precondition("depth 0 eigenvalues are closed-form; use Channel".into()));
    }
    let mut gate = vec![0.0; 16];
    for out in 0..4 {
        for in_l in 0..2 {
            for in_r in 0..2 {
                gate[out * 4 + in_l + 2 * in_r] = SIGNATURE_GATE[out][in_l | in_r];
            }
        }
    }
    let mut terminal = vec![0.0; 4];
    for (input, slot) in terminal.iter_mut().enumerate() {
        *slot = (0..4)
            .map(|out| SIGNATURE_WEIGHT[out & 1] * SIGNATURE_WEIGHT[out >> 1] * gate[out * 4 + input])
            .sum();
    }
    let kernel = ColumnKernel { alphabet: 2, gate: &gate, terminal: &terminal, inputs: &[(0, 0), (1, 0)] };
    let inner = PeriodicMps::uniform(kernel.build(d), n / 2)?;
    Ok(EigenvalueMps { n, d, inner })
}

/// Channel eigenvalues for any depth, using closed forms at `d = 0` and `d = ∞`.
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Local { n: usize },
    Brickwork(EigenvalueMps),
    Global { n: usize },
}

impl Channel {
    pub fn new(n: usize, depth: Depth) -> Result<Self> {
        check_even(n)?;
        Ok(match depth {
            Depth::Finite(0) => Channel::Local { n },
            Depth::Finite(d) => Channel::Brickwork(build_t_mps(n, d)?),
            Depth::Infinite => Channel::Global { n },
        })
    }

    pub fn n(&self) -> usize {
        match self {
            Channel::Local { n } | Channel::Global { n } => *n,
            Channel::Brickwork(m) => m.n,
        }
    }

    pub fn depth(&self) -> Depth {
        match self {
            Channel::Local { .. } => Depth::Finite(0),
            Channel::Brickwork(m) => Depth::Finite(m.d),
            Channel::Global { .. } => Depth::Infinite,
        }
    }

    /// `t_λ`.
    pub fn t(&self, lambda: &PauliString) -> Result<f64> {
        if lambda.n() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: lambda.n() });
        }
        Ok(match self {
            Channel::Local { .. } => 3f64.powi(-(lambda.weight() as i32)),
            Channel::Global { n } => {
                if lambda.is_identity() {
                    1.0
                } else {
                    1.0 / (2f64.powi(*n as i32) + 1.0)
                }
            }
            Channel::Brickwork(m) => m.value(lambda)?,
        })
    }

    /// `t_λ` as an `n`-site, physical-dimension-4 MPS over Pauli labels.
    pub fn pauli_mps(&self) -> PeriodicMps {
        match self {
            Channel::Local { n } => PeriodicMps::product(&vec![vec![1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]; *n])
                .expect("valid shapes"),
            Channel::Global { n } => identity_plus_constant(*n, 1.0 / (2f64.powi(*n as i32) + 1.0)),
            Channel::Brickwork(m) => lift_to_pauli_mps(&m.inner).expect("pair-site MPS"),
        }
    }

    /// Exact `1/t_λ` as a Pauli-label MPS where a closed form exists.
    pub fn exact_inverse_pauli_mps(&self) -> Option<PeriodicMps> {
        match self {
            Channel::Local { n } => {
                Some(PeriodicMps::product(&vec![vec![1.0, 3.0, 3.0, 3.0]; *n]).expect("valid shapes"))
            }
            Channel::Global { n } => Some(identity_plus_constant(*n, 2f64.powi(*n as i32) + 1.0)),
            // bond 1 (depth 1) is a product over pairs, inverted site by site
            Channel::Brickwork(m) if m.inner.max_bond() == 1 => {
                let vectors: Vec<Vec<f64>> =
                    (0..m.inner.len()).map(|j| m.inner.site(j).iter().map(|x| 1.0 / x[(0, 0)]).collect()).collect();
                Some(lift_to_pauli_mps(&PeriodicMps::product(&vectors).expect("valid shapes")).expect("signature MPS"))
            }
            Channel::Brickwork(_) => None,
        }
    }
}

/// `t_λ` for any channel.
pub fn t_value(channel: &Channel, lambda: &PauliString) -> Result<f64> {
    channel.t(lambda)
}

/// MPS with value `c` on every non-identity label and `1` on the identity.
fn identity_plus_constant(n: usize, c: f64) -> PeriodicMps {
    let sites = (0..n)
        .map(|j| {
            (0..4)
                .map(|p| {
                    let (mut a, mut b) = (1.0, if p == 0 { 1.0 } else { 0.0 });
                    if j == 0 {
                        a *= c;
                        b *= 1.0 - c;
                    }
                    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a, b]))
                })
                .collect()
        })
        .collect();
    PeriodicMps::new(sites).expect("valid shapes")
}

/// Compose a pair-signature MPS (`N` sites, physical dimension 2) with the
/// OR of each qubit pair, giving an `n = 2N`-site MPS over Pauli labels.
///
/// The first qubit of a pair forwards a flag `a ≠ I` on a doubled bond; the
/// second qubit selects `V_0` or `V_1` from it.
pub fn lift_to_pauli_mps(sig: &PeriodicMps) -> Result<PeriodicMps> {
    if sig.phys_dims().iter().any(|&p| p != 2) {
        return Err(Error::Shape("signature MPS must have physical dimension 2".into()));
    }
    let mut sites = Vec::with_capacity(2 * sig.len());
    for j in 0..sig.len() {
        let v = sig.site(j);
        let (l, r) = v[0].shape();
        let mut pass = DMatrix::zeros(l, 2 * l);
        pass.view_mut((0, 0), (l, l)).fill_with_identity();
        let mut flag = DMatrix::zeros(l, 2 * l);
        flag.view_mut((0, l), (l, l)).fill_with_identity();
        sites.push(vec![pass, flag.clone(), flag.clone(), flag]);
        let mut quiet = DMatrix::zeros(2 * l, r);
        quiet.view_mut((0, 0), (l, r)).copy_from(&v[0]);
        quiet.view_mut((l, 0), (l, r)).copy_from(&v[1]);
        let mut loud = DMatrix::zeros(2 * l, r);
        loud.view_mut((0, 0), (l, r)).copy_from(&v[1]);
        loud.view_mut((l, 0), (l, r)).copy_from(&v[1]);
        sites.push(vec![quiet, loud.clone(), loud.clone(), loud]);
    }
    PeriodicMps::new(sites)
}

/// Multiply Pauli coefficients by `t_λ`, or by an approximate `1/t_λ` when
/// inverting. Inversion at finite depth needs the signature-level inverse `v`.
pub fn apply_channel(
    alpha: &PeriodicMps,
    channel: &Channel,
    invert: bool,
    inverse: Option<&PeriodicMps>,
) -> Result<PeriodicMps> {
    if alpha.len() != channel.n() {
        return Err(Error::DimensionMismatch { expected: channel.n(), got: alpha.len() });
    }
    let factor = if !invert {
        channel.pauli_mps()
    } else if let Some(exact) = channel.exact_inverse_pauli_mps() {
        exact
    } else {
        lift_to_pauli_mps(inverse.ok_or(Error::MissingInverse)?)?
    };
    PeriodicMps::hadamard(alpha, &factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn two_qubit_depth_one() {
        let m = build_t_mps(2, 1).unwrap();
        assert!((m.value(&p("ZI")).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(m.value(&p("II")).unwrap(), 1.0);
    }

    #[test]
    fn identity_is_one_at_every_depth() {
        for d in 1..5 {
            let m = build_t_mps(8, d).unwrap();
            assert!((m.value(&PauliString::identity(8)).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(m.inner().max_bond(), 1 << (d - 1));
        }
    }

    #[test]
    fn closed_forms() {
        let local = Channel::new(8, Depth::Finite(0)).unwrap();
        assert!((local.t(&p("XYZIIIII")).unwrap() - 1.0 / 27.0).abs() < 1e-15);
        let global = Channel::new(8, Depth::Infinite).unwrap();
        assert_eq!(global.t(&p("ZZZZZZZZ")).unwrap(), 1.0 / 257.0);
        assert_eq!(global.t(&PauliString::identity(8)).unwrap(), 1.0);
        for ch in [local, global] {
            let mps = ch.pauli_mps();
            let inv = ch.exact_inverse_pauli_mps().unwrap();
            for idx in (0..1 << 16).step_by(331) {
                let lam = PauliString::from_index(8, idx);
                let t = ch.t(&lam).unwrap();
                assert!((mps.evaluate(lam.labels().iter().map(|&l| l as usize).collect::<Vec<_>>().as_slice()).unwrap() - t).abs() < 1e-14);
                let v = inv.evaluate(&lam.labels().iter().map(|&l| l as usize).collect::<Vec<_>>()).unwrap();
                assert!((t * v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lifted_t_matches_every_label() {
        let m = build_t_mps(4, 2).unwrap();
        let lifted = lift_to_pauli_mps(m.inner()).unwrap();
        assert_eq!(lifted.len(), 4);
        for idx in 0..256 {
            let lam = PauliString::from_index(4, idx);
            let digits: Vec<usize> = lam.labels().iter().map(|&l| l as usize).collect();
            assert!((lifted.evaluate(&digits).unwrap() - m.value(&lam).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn lift_of_constant_is_constant() {
        let lifted = lift_to_pauli_mps(&PeriodicMps::constant(3, 2, 1.0)).unwrap();
        assert!((lifted.sum_all() - 4096.0).abs() < 1e-9);
        assert!((lifted.frobenius_sq() - 4096.0).abs() < 1e-9);
    }

    #[test]
    fn missing_inverse_is_an_error() {
        let ch = Channel::new(4, Depth::Finite(2)).unwrap();
        let alpha = PeriodicMps::constant(4, 4, 1.0);
        assert!(matches!(apply_channel(&alpha, &ch, true, None), Err(Error::MissingInverse)));
        assert!(apply_channel(&alpha, &ch, false, None).is_ok());
    }
}
