//! Variational element-wise inversion of a signature MPS.
//!
//! Given `m` (the channel eigenvalues over pair signatures) we look for a
//! periodic MPS `v` of small bond dimension minimizing
//! `C_0(v) = Σ_x (m(x) v(x) − 1)²`. The cost is quadratic in every single
//! site matrix, so we sweep over sites and physical indices solving one
//! least-squares problem at a time. `√C_0` bounds `max_x |m(x) v(x) − 1|`,
//! which heralds the accuracy of the inverse.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::EigenvalueMps;
use crate::error::{Error, Result};
use crate::mps::{PeriodicMps, SiteTensor};

/// Sign-exhaustive cost evaluation is used up to this many sites.
pub const EXHAUSTIVE_SITES: usize = 12;

const CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularization {
    None,
    /// Pull every site towards the site average (translation invariance).
    Translational,
    /// Penalize the squared norm of the site matrices.
    Norm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaRule {
    /// `α` is reset to the mean squared error `C_0 / 2^N` at the start of every sweep.
    Adaptive,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    /// Bond dimensions to pass through; the last is the target.
    pub bonds: Vec<usize>,
    pub eps_stop: f64,
    pub max_sweeps: usize,
    pub regularization: Regularization,
    pub alpha: AlphaRule,
    /// Sweeps without a relative improvement of `stall_tolerance` before growing the bond.
    pub stall_sweeps: usize,
    pub stall_tolerance: f64,
}

impl InversionConfig {
    pub fn new(bond: usize) -> Self {
        Self {
            bonds: vec![bond],
            eps_stop: 1e-12,
            max_sweeps: 500,
            regularization: Regularization::Translational,
            alpha: AlphaRule::Adaptive,
            stall_sweeps: 10,
            stall_tolerance: 1e-3,
        }
    }

    pub fn with_growth(bonds: Vec<usize>) -> Self {
        Self { bonds, ..Self::new(1) }
    }

    fn validate(&self) -> Result<()> {
        if self.bonds.is_empty() || self.bonds.contains(&0) {
            return Err(Error::Precondition("bond dimensions must be positive".into()));
        }
        if self.bonds.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Precondition("bond schedule must not shrink".into()));
        }
        if !(self.eps_stop > 0.0) {
            return Err(Error::Precondition("stopping threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    pub v: PeriodicMps,
    /// `C_0` of the returned `v`, exhaustive when the ring is small enough.
    pub final_cost: f64,
    pub herald_epsilon: f64,
    pub heralded: bool,
    pub sweeps_used: usize,
    pub cost_history: Vec<f64>,
    /// Sweeps in which the regularized objective rose at fixed `α`.
    pub descent_violations: usize,
}

fn transfer(a: &SiteTensor, b: &SiteTensor, c: Option<(&SiteTensor, &SiteTensor)>) -> DMatrix<f64> {
    let mut out: Option<DMatrix<f64>> = None;
    for k in 0..a.len() {
        let mut t = a[k].kronecker(&b[k]);
        if let Some((c, d)) = c {
            t = t.kronecker(&c[k]).kronecker(&d[k]);
        }
        out = Some(match out {
            None => t,
            Some(o) => o + t,
        });
    }
    out.expect("physical dimension is positive")
}

fn check_shapes(m: &PeriodicMps, v: &PeriodicMps) -> Result<()> {
    if m.len() != v.len() || m.phys_dims() != v.phys_dims() {
        return Err(Error::Shape("m and v must share sites and physical dimensions".into()));
    }
    Ok(())
}

/// `(tr Π Σ M⊗M⊗V⊗V, tr Π Σ M⊗V)`.
fn cost_terms(m: &PeriodicMps, v: &PeriodicMps) -> (f64, f64) {
    let mut quad: Option<DMatrix<f64>> = None;
    let mut lin: Option<DMatrix<f64>> = None;
    for j in 0..m.len() {
        let t2 = transfer(m.site(j), m.site(j), Some((v.site(j), v.site(j))));
        let t1 = transfer(m.site(j), v.site(j), None);
        quad = Some(quad.map_or(t2.clone(), |q| q * t2));
        lin = Some(lin.map_or(t1.clone(), |l| l * t1));
    }
    (quad.expect("non-empty").trace(), lin.expect("non-empty").trace())
}


/// `C_0 = Σ_x (m v − 1)²` by ring contraction.
pub fn cost0(m: &PeriodicMps, v: &PeriodicMps) -> Result<f64> {
    check_shapes(m, v)?;
    let (quad, lin) = cost_terms(m, v);
    let total: usize = m.phys_dims().iter().product();
    let c = quad - 2.0 * lin + total as f64;
    let scale = quad.abs().max(2.0 * lin.abs()).max(total as f64);
    if c.abs() < 1e-15 * scale {
        log::warn!("contracted cost {c:e} is below the precision of its terms ({scale:e})");
    }
    Ok(c)
}

/// `C_0` by summing over every index string.
pub fn exhaustive_cost(m: &PeriodicMps, v: &PeriodicMps) -> Result<f64> {
    check_shapes(m, v)?;
    let (mv, vv) = (m.to_dense(), v.to_dense());
    Ok(mv.iter().zip(&vv).map(|(a, b)| (a * b - 1.0).powi(2)).sum())
}

/// `max_x |m(x) v(x) − 1|` by enumeration.
pub fn max_abs_error(m: &PeriodicMps, v: &PeriodicMps) -> Result<f64> {
    check_shapes(m, v)?;
    let (mv, vv) = (m.to_dense(), v.to_dense());
    Ok(mv.iter().zip(&vv).map(|(a, b)| (a * b - 1.0).abs()).fold(0.0, f64::max))
}

fn site_mean(v: &PeriodicMps, k: usize) -> DMatrix<f64> {
    let mut s = v.site(0)[k].clone() * 0.0;
    for j in 0..v.len() {
        s += &v.site(j)[k];
    }
    s / v.len() as f64
}

/// Regularizer `R(V)`.
pub fn regularizer(v: &PeriodicMps, mode: Regularization) -> f64 {
    match mode {
        Regularization::None => 0.0,
        Regularization::Norm => (0..v.len()).flat_map(|j| v.site(j).iter().map(|x| x.norm_squared())).sum(),
        Regularization::Translational => {
            if v.bond_dims().windows(2).any(|w| w[0] != w[1]) {
                return f64::INFINITY;
            }
            (0..v.site(0).len())
                .map(|k| {
                    let mean = site_mean(v, k);
                    (0..v.len()).map(|j| (&v.site(j)[k] - &mean).norm_squared()).sum::<f64>()
                })
                .sum()
        }
    }
}

/// Weight of `R` in the objective minimized for a given `α`.
///
/// For the translational mode the local step drops the dependence of the
/// mean on the site being updated; the result is the exact local form of
/// `(1 − 1/N)·R`, so descent is monitored against that weight.
fn effective_weight(mode: Regularization, alpha: f64, n_sites: usize) -> f64 {
    match mode {
        Regularization::None => 0.0,
        Regularization::Norm => alpha,
        Regularization::Translational => alpha * (1.0 - 1.0 / n_sites as f64),
    }
}

/// `C_0 + α R(V)`.
pub fn cost(m: &PeriodicMps, v: &PeriodicMps, alpha: f64, mode: Regularization) -> Result<f64> {
    let c = cost0(m, v)?;
    if alpha == 0.0 || mode == Regularization::None {
        return Ok(c);
    }
    Ok(c + alpha * regularizer(v, mode))
}

/// Ring product of transfer matrices of all sites except `j`, starting at `j+1`.
fn environment(transfers: &[DMatrix<f64>], j: usize) -> DMatrix<f64> {
    let n = transfers.len();
    let dim = transfers[j].ncols();
    let mut env = DMatrix::identity(dim, dim);
    for i in 1..n {
        env *= &transfers[(j + i) % n];
    }
    env
}

fn quadratic_from_envs(
    mk: &DMatrix<f64>,
    env2: &DMatrix<f64>,
    env1: &DMatrix<f64>,
    chi_l: usize,
    chi_r: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let (ml, mr) = mk.shape();
    let size = chi_l * chi_r;
    let mut a = DMatrix::zeros(size, size);
    // env2 rows: ((e·mr + e')·χr + b)·χr + b'; cols: ((c·ml + c')·χl + a)·χl + a'
    for c in 0..ml {
        for e in 0..mr {
            let m1 = mk[(c, e)];
            if m1 == 0.0 {
                continue;
            }
            for cp in 0..ml {
                for ep in 0..mr {
                    let w = m1 * mk[(cp, ep)];
                    if w == 0.0 {
                        continue;
                    }
                    let row0 = (e * mr + ep) * chi_r * chi_r;
                    let col0 = (c * ml + cp) * chi_l * chi_l;
                    for x in 0..chi_l {
                        for b in 0..chi_r {
                            for xp in 0..chi_l {
                                for bp in 0..chi_r {
                                    a[(x * chi_r + b, xp * chi_r + bp)] +=
                                        w * env2[(row0 + b * chi_r + bp, col0 + x * chi_l + xp)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut bvec = DVector::zeros(size);
    for c in 0..ml {
        for e in 0..mr {
            let w = mk[(c, e)];
            if w == 0.0 {
                continue;
            }
            for x in 0..chi_l {
                for b in 0..chi_r {
                    bvec[x * chi_r + b] -= 2.0 * w * env1[(e * chi_r + b, c * chi_l + x)];
                }
            }
        }
    }
    (a, bvec)
}

/// `A`, `B` with `Σ_{x: x_j = k} (m v − 1)² = XᵀAX + BᵀX + 2^{N−1}` as a
/// function of `X = vec(V_k^j)` (row-major).
pub fn local_quadratic(m: &PeriodicMps, v: &PeriodicMps, j: usize, k: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_shapes(m, v)?;
    if j >= m.len() || k >= m.site(j).len() {
        return Err(Error::Precondition(format!("no site {j} index {k}")));
    }
    let t2: Vec<_> = (0..m.len()).map(|i| transfer(m.site(i), m.site(i), Some((v.site(i), v.site(i))))).collect();
    let t1: Vec<_> = (0..m.len()).map(|i| transfer(m.site(i), v.site(i), None)).collect();
    let (chi_l, chi_r) = v.site(j)[0].shape();
    Ok(quadratic_from_envs(&m.site(j)[k], &environment(&t2, j), &environment(&t1, j), chi_l, chi_r))
}

/// Add the regularizer's local form for site `j`, index `k`.
pub fn add_regularization(
    a: &mut DMatrix<f64>,
    b: &mut DVector<f64>,
    v: &PeriodicMps,
    j: usize,
    k: usize,
    mode: Regularization,
    alpha: f64,
) {
    let n = v.len() as f64;
    match mode {
        Regularization::None => {}
        Regularization::Norm => {
            for i in 0..a.nrows() {
                a[(i, i)] += alpha;
            }
        }
        Regularization::Translational => {
            let shift = alpha * (1.0 - 1.0 / n).powi(2);
            for i in 0..a.nrows() {
                a[(i, i)] += shift;
            }
            let (rows, cols) = v.site(j)[k].shape();
            let mut others = DMatrix::zeros(rows, cols);
            for i in (0..v.len()).filter(|&i| i != j) {
                others += &v.site(i)[k];
            }
            let coeff = 2.0 * alpha / n * (1.0 - 1.0 / n);
            for r in 0..rows {
                for c in 0..cols {
                    b[r * cols + c] -= coeff * others[(r, c)];
                }
            }
        }
    }
}

/// `XᵀAX + BᵀX`.
pub fn local_value(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (x.transpose() * a * x)[(0, 0)] + b.dot(x)
}

/// Minimum-norm solution of `2AX + B = 0` with a relative spectral cutoff.
pub fn local_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |acc, &e| acc.max(e.abs()));
    let mut x = DVector::zeros(b.len());
    if top > 0.0 {
        let proj = eig.eigenvectors.transpose() * b;
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam.abs() > CUTOFF * top {
                x -= eig.eigenvectors.column(i) * (0.5 * proj[i] / lam);
            }
        }
    }
    let residual = (a * &x * 2.0 + b).norm();
    let tolerance = 1e-8 * (b.norm() + top * x.norm()).max(f64::MIN_POSITIVE);
    if residual > tolerance {
        return Err(Error::SingularSystem(residual));
    }
    Ok(x)
}

fn random_ansatz<R: Rng + ?Sized>(m: &PeriodicMps, bond: usize, rng: &mut R) -> PeriodicMps {
    let sites: Vec<SiteTensor> = m
        .phys_dims()
        .iter()
        .map(|&p| (0..p).map(|_| DMatrix::from_fn(bond, bond, |_, _| rng.random_range(-1.0..=1.0))).collect())
        .collect();
    let mut v = PeriodicMps::new(sites).expect("uniform bonds");
    let dims = m.phys_dims();
    let mut target = 0.0;
    let mut current = 0.0;
    for _ in 0..100 {
        let x: Vec<usize> = dims.iter().map(|&p| rng.random_range(0..p)).collect();
        target += 1.0 / m.evaluate(&x).expect("valid digits");
        current += v.evaluate(&x).expect("valid digits").abs();
    }
    if current > 0.0 {
        let s = (target / current).powf(1.0 / m.len() as f64);
        for j in 0..v.len() {
            for mat in v.site_mut(j) {
                *mat *= s;
            }
        }
    }
    v
}

fn grow<R: Rng + ?Sized>(v: &PeriodicMps, bond: usize, rng: &mut R) -> PeriodicMps {
    let sites = (0..v.len())
        .map(|j| {
            v.site(j)
                .iter()
                .map(|old| {
                    let mut m = DMatrix::from_fn(bond, bond, |_, _| 1e-6 * rng.random_range(-1.0..=1.0));
                    m.view_mut((0, 0), old.shape()).copy_from(old);
                    m
                })
                .collect()
        })
        .collect();
    PeriodicMps::new(sites).expect("uniform bonds")
}

fn best_cost(m: &PeriodicMps, v: &PeriodicMps) -> f64 {
    if m.len() <= EXHAUSTIVE_SITES {
        exhaustive_cost(m, v).expect("compatible")
    } else {
        cost0(m, v).expect("compatible")
    }
}

/// One sweep over all sites and physical indices at fixed `α`.
fn sweep(m: &PeriodicMps, v: &mut PeriodicMps, mode: Regularization, alpha: f64) {
    let n = m.len();
    let t2 = |v: &PeriodicMps, i: usize| transfer(m.site(i), m.site(i), Some((v.site(i), v.site(i))));
    let t1 = |v: &PeriodicMps, i: usize| transfer(m.site(i), v.site(i), None);
    // suffix[i] = T_i ··· T_{n−1}; prefix = T_0 ··· T_{j−1} with updated sites.
    let mut suffix2: Vec<Option<DMatrix<f64>>> = vec![None; n + 1];
    let mut suffix1: Vec<Option<DMatrix<f64>>> = vec![None; n + 1];
    for i in (1..n).rev() {
        let (a, b) = (t2(v, i), t1(v, i));
        suffix2[i] = Some(match &suffix2[i + 1] {
            None => a,
            Some(s) => a * s,
        });
        suffix1[i] = Some(match &suffix1[i + 1] {
            None => b,
            Some(s) => b * s,
        });
    }
    let mut prefix2: Option<DMatrix<f64>> = None;
    let mut prefix1: Option<DMatrix<f64>> = None;
    for j in 0..n {
        let join = |s: &Option<DMatrix<f64>>, p: &Option<DMatrix<f64>>, dim: usize| match (s, p) {
            (Some(s), Some(p)) => s * p,
            (Some(s), None) => s.clone(),
            (None, Some(p)) => p.clone(),
            (None, None) => DMatrix::identity(dim, dim),
        };
        let (chi_l, chi_r) = v.site(j)[0].shape();
        let dim2 = m.site(j)[0].nrows().pow(2) * chi_l * chi_l;
        let dim1 = m.site(j)[0].nrows() * chi_l;
        let env2 = join(&suffix2[j + 1], &prefix2, dim2);
        let env1 = join(&suffix1[j + 1], &prefix1, dim1);
        for k in 0..m.site(j).len() {
            let (mut a, mut b) = quadratic_from_envs(&m.site(j)[k], &env2, &env1, chi_l, chi_r);
            add_regularization(&mut a, &mut b, v, j, k, mode, alpha);
            let current = DVector::from_row_slice(v.site(j)[k].transpose().as_slice());
            let Ok(x) = local_solve(&a, &b) else {
                log::debug!("site {j} index {k}: singular local system, step skipped");
                continue;
            };
            let (before, after) = (local_value(&a, &b, &current), local_value(&a, &b, &x));
            if after <= before {
                v.site_mut(j)[k] = DMatrix::from_row_slice(chi_l, chi_r, x.as_slice());
            }
        }
        let (a, b) = (t2(v, j), t1(v, j));
        prefix2 = Some(match prefix2 {
            None => a,
            Some(p) => p * a,
        });
        prefix1 = Some(match prefix1 {
            None => b,
            Some(p) => p * b,
        });
    }
}

/// Invert the channel eigenvalues of a finite-depth brickwork.
pub fn invert<R: Rng + ?Sized>(m: &EigenvalueMps, cfg: &InversionConfig, rng: &mut R) -> Result<InversionResult> {
    invert_mps(m.inner(), cfg, rng)
}

/// Invert any strictly positive MPS elementwise.
pub fn invert_mps<R: Rng + ?Sized>(m: &PeriodicMps, cfg: &InversionConfig, rng: &mut R) -> Result<InversionResult> {
    cfg.validate()?;
    let mut stage = 0;
    let mut v = random_ansatz(m, cfg.bonds[0], rng);
    let mut history = vec![best_cost(m, &v)];
    let mut best = (history[0], v.clone());
    let mut stage_start = 0;
    let mut sweeps = 0;
    let mut violations = 0;
    let total = m.phys_dims().iter().product::<usize>() as f64;
    while sweeps < cfg.max_sweeps && best.0 > cfg.eps_stop {
        let c0 = *history.last().expect("non-empty");
        let alpha = match cfg.alpha {
            AlphaRule::Adaptive => c0 / total,
            AlphaRule::Fixed(a) => a,
        };
        let weight = effective_weight(cfg.regularization, alpha, m.len());
        let before = c0 + weight * regularizer(&v, cfg.regularization);
        sweep(m, &mut v, cfg.regularization, alpha);
        sweeps += 1;
        let c = best_cost(m, &v);
        let after = c + weight * regularizer(&v, cfg.regularization);
        if after > before * (1.0 + 1e-9) + 1e-13 * total {
            log::warn!("regularized cost rose from {before:e} to {after:e} in sweep {sweeps}");
            violations += 1;
        }
        history.push(c);
        if c < best.0 {
            best = (c, v.clone());
        }
        let window = cfg.stall_sweeps.max(1);
        let stalled = sweeps - stage_start >= window && {
            let old = history[history.len() - 1 - window];
            old - c <= cfg.stall_tolerance * old
        };
        if stalled && stage + 1 < cfg.bonds.len() {
            stage += 1;
            stage_start = sweeps;
            v = grow(&best.1, cfg.bonds[stage], rng);
            log::debug!("growing bond to {} after {sweeps} sweeps at cost {c:e}", cfg.bonds[stage]);
        }
    }
    let (final_cost, v) = best;
    let final_cost = final_cost.max(0.0);
    Ok(InversionResult {
        v,
        final_cost,
        herald_epsilon: final_cost.sqrt(),
        heralded: final_cost <= cfg.eps_stop,
        sweeps_used: sweeps,
        cost_history: history,
        descent_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn random_mps(n: usize, bond: usize, seed: u64, positive: bool) -> PeriodicMps {
        let mut rng = stream_rng(seed, 0);
        let sites = (0..n)
            .map(|_| {
                (0..2)
                    .map(|_| {
                        DMatrix::from_fn(bond, bond, |_, _| {
                            if positive {
                                rng.random_range(0.1..1.0)
                            } else {
                                rng.random_range(-1.0..1.0)
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        PeriodicMps::new(sites).unwrap()
    }

    #[test]
    fn exact_inverse_has_zero_cost() {
        let m = PeriodicMps::product(&vec![vec![1.0, 0.25]; 4]).unwrap();
        let v = PeriodicMps::product(&vec![vec![1.0, 4.0]; 4]).unwrap();
        assert!(cost0(&m, &v).unwrap().abs() < 1e-9);
    }

    #[test]
    fn zero_inverse_costs_two_to_the_n() {
        let m = random_mps(5, 2, 1, true);
        let v = PeriodicMps::product(&vec![vec![0.0, 0.0]; 5]).unwrap();
        assert!((cost0(&m, &v).unwrap() - 32.0).abs() < 1e-12);
    }

    #[test]
    fn contraction_matches_dense_sum() {
        let m = random_mps(6, 2, 2, false);
        let v = random_mps(6, 3, 3, false);
        let (a, b) = (cost0(&m, &v).unwrap(), exhaustive_cost(&m, &v).unwrap());
        assert!((a - b).abs() < 1e-9 * b.abs());
    }

    #[test]
    fn local_quadratic_reproduces_cost() {
        let m = random_mps(5, 2, 4, true);
        let v = random_mps(5, 2, 5, false);
        let (mv, vv) = (m.to_dense(), v.to_dense());
        for j in 0..5 {
            for k in 0..2 {
                let (a, b) = local_quadratic(&m, &v, j, k).unwrap();
                let min_eig = a.clone().symmetric_eigen().eigenvalues.min();
                assert!(min_eig > -1e-10);
                let x = DVector::from_row_slice(v.site(j)[k].transpose().as_slice());
                let restricted: f64 = (0..32usize)
                    .filter(|idx| (idx >> j) & 1 == k)
                    .map(|idx| (mv[idx] * vv[idx] - 1.0).powi(2))
                    .sum();
                let q = local_value(&a, &b, &x) + 16.0;
                assert!((q - restricted).abs() < 1e-9 * restricted.max(1.0), "{q} vs {restricted}");
            }
        }
    }

    #[test]
    fn regularized_shift() {
        let m = random_mps(4, 2, 6, true);
        let v = random_mps(4, 2, 7, false);
        let (a0, b0) = local_quadratic(&m, &v, 1, 0).unwrap();
        let (mut a, mut b) = (a0.clone(), b0.clone());
        add_regularization(&mut a, &mut b, &v, 1, 0, Regularization::Translational, 0.5);
        let shift = 0.5 * (1.0f64 - 0.25).powi(2);
        assert!(((&a - &a0) - DMatrix::identity(4, 4) * shift).norm() < 1e-14);
        // the shifted quadratic is the local form of C_0 + α(1 − 1/N) R
        let x = DVector::from_row_slice(v.site(1)[0].transpose().as_slice());
        let mut w = v.clone();
        w.site_mut(1)[0] *= 1.7;
        let y = DVector::from_row_slice(w.site(1)[0].transpose().as_slice());
        let weight = effective_weight(Regularization::Translational, 0.5, 4);
        let lhs = local_value(&a, &b, &y) - local_value(&a, &b, &x);
        let rhs = cost(&m, &w, weight, Regularization::Translational).unwrap()
            - cost(&m, &v, weight, Regularization::Translational).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn translational_regularizer_vanishes_only_for_equal_sites() {
        let site: SiteTensor = vec![DMatrix::from_element(2, 2, 0.3), DMatrix::identity(2, 2)];
        let equal = PeriodicMps::uniform(site, 4).unwrap();
        assert!(regularizer(&equal, Regularization::Translational) < 1e-30);
        let mut unequal = equal.clone();
        unequal.site_mut(2)[1][(0, 1)] = 0.5;
        assert!(regularizer(&unequal, Regularization::Translational) > 1e-3);
    }

    #[test]
    fn solve_identity_system() {
        let a = DMatrix::identity(3, 3);
        let b = DVector::from_element(3, -2.0);
        let x = local_solve(&a, &b).unwrap();
        assert!((x - DVector::from_element(3, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn solve_rank_deficient_system() {
        let u = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 2.0, 1.0, -1.0]);
        let a = &u * u.transpose();
        let b = &a * DVector::from_row_slice(&[1.0, -1.0, 0.5, 2.0]);
        let x = local_solve(&a, &b).unwrap();
        assert!((&a * &x * 2.0 + &b).norm() < 1e-9);
        // kernel directions do not change the local cost
        let kernel = a.clone().symmetric_eigen();
        let i = kernel.eigenvalues.imin();
        let y = &x + kernel.eigenvectors.column(i) * 3.0;
        assert!((local_value(&a, &b, &x) - local_value(&a, &b, &y)).abs() < 1e-9);
        let inconsistent = DVector::from_row_slice(&[1.0, 0.0, 0.0, 0.0]) + kernel.eigenvectors.column(i);
        assert!(matches!(local_solve(&a, &(&b + inconsistent)), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn all_ones_is_inverted() {
        let m = PeriodicMps::constant(4, 2, 1.0);
        let r = invert_mps(&m, &InversionConfig::new(1), &mut stream_rng(0, 0)).unwrap();
        assert!(r.final_cost < 1e-12, "{}", r.final_cost);
        assert!(r.heralded);
    }
}
