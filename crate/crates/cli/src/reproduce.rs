//! Desk-scale versions of the GHZ fidelity, Pauli norm and Hamiltonian sweeps.
//! Each writes one CSV row per data point.

use std::collections::HashMap;
use std::io::Write;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use shallow_shadows::brickwork::{BrickworkSpec, Depth};
use shallow_shadows::channel::Channel;
use shallow_shadows::norms::{ls_norm_sq, sparse_upper_sq, stabilizer_projector_norm_sq, tilde_coefficients};
use shallow_shadows::pauli::PauliString;
use shallow_shadows::records::acquire_range;
use shallow_shadows::shadows::{inverse_eigenvalues, sparse_values, SparseObservable};
use shallow_shadows::stabilizer::StabilizerState;

use crate::ensemble::pair_channel;
use crate::error::Result;

/// Exact second moments enumerate all `4^n` coefficients; skip them beyond this.
const MAX_EXACT_MOMENT_QUBITS: usize = 8;

#[derive(Serialize)]
struct FidelityRow {
    depth: Depth,
    rep: usize,
    estimate: f64,
    /// Two standard errors of the mean from the exact second moment.
    two_sme: Option<f64>,
    within: Option<bool>,
}

pub struct FidelityArgs<'a> {
    pub n: usize,
    pub depths: &'a [Depth],
    pub reps: usize,
    pub shots: usize,
    pub seed: u64,
}

pub fn ghz_fidelity<W: Write>(a: &FidelityArgs, cache: Option<&std::path::Path>, out: W) -> Result<()> {
    let ghz = StabilizerState::ghz(a.n);
    let proj = SparseObservable::stabilizer_projector(&ghz)?;
    let mut w = csv::Writer::from_writer(out);
    for (i, &depth) in a.depths.iter().enumerate() {
        let ch = Channel::new(a.n, depth)?;
        let bound = match pair_channel(a.n, depth, cache).and_then(|tau| Ok(stabilizer_projector_norm_sq(&ghz, &ch, &tau)?)) {
            Ok(b) => Some(b),
            Err(e) => {
                warn!("d={depth}: no projector norm: {e}");
                None
            }
        };
        let two_sme = bound.map(|b| 2.0 * (b / a.shots as f64).sqrt());
        let inv_t = inverse_eigenvalues(&proj, &ch)?;
        let spec = BrickworkSpec::new(a.n, depth, a.seed.wrapping_add(i as u64))?;
        let estimates: Vec<f64> = (0..a.reps)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let snaps = acquire_range(&ghz, &spec, (rep * a.shots) as u64, a.shots)?;
                let values = sparse_values(&proj, &snaps, &inv_t)?;
                Ok(values.iter().sum::<f64>() / a.shots as f64)
            })
            .collect::<Result<_>>()?;
        let mut inside = 0;
        for (rep, &estimate) in estimates.iter().enumerate() {
            let within = two_sme.map(|s| (estimate - 1.0).abs() <= s);
            inside += usize::from(within == Some(true));
            w.serialize(FidelityRow { depth, rep, estimate, two_sme, within })?;
        }
        info!("d={depth}: {inside}/{} estimates within 2 SME", a.reps);
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct NormRow {
    depth: Depth,
    k: usize,
    norm_sq: f64,
    /// Ratio to the global-ensemble value `2^n + 1`.
    relative_to_global: f64,
}

pub fn pauli_norms<W: Write>(n: usize, depths: &[Depth], out: W) -> Result<()> {
    let global = 2f64.powi(n as i32) + 1.0;
    let rows: Vec<Vec<NormRow>> = depths
        .par_iter()
        .map(|&depth| -> Result<Vec<NormRow>> {
            let ch = Channel::new(n, depth)?;
            (1..=n)
                .map(|k| {
                    let mut labels = vec![0u8; n];
                    labels[..k].fill(2);
                    let norm_sq = 1.0 / ch.t(&PauliString::from_labels(labels, false))?;
                    Ok(NormRow { depth, k, norm_sq, relative_to_global: norm_sq / global })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows.into_iter().flatten() {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct HamiltonianRow {
    depth: Depth,
    exact: f64,
    estimate: f64,
    standard_error: f64,
    sample_variance: f64,
    ls_norm_sq: f64,
    triangle_bound: f64,
    /// `‖O‖²_LS + tr(ρ Õ) − tr(ρ O)²`, small systems only.
    exact_variance: Option<f64>,
}

pub struct HamiltonianArgs<'a> {
    pub n: usize,
    pub depths: &'a [Depth],
    pub shots: usize,
    pub seed: u64,
}

pub fn hamiltonian<W: Write>(a: &HamiltonianArgs, cache: Option<&std::path::Path>, out: W) -> Result<()> {
    let ghz = StabilizerState::ghz(a.n);
    let h = SparseObservable::cluster_hamiltonian(a.n)?;
    let signs: HashMap<usize, f64> = ghz.group_elements().iter().map(|g| (g.index(), g.sign())).collect();
    let exact: f64 = h.terms().iter().map(|(c, p)| c * signs.get(&p.index()).copied().unwrap_or(0.0)).sum();
    let rows: Vec<HamiltonianRow> = a
        .depths
        .par_iter()
        .enumerate()
        .map(|(i, &depth)| -> Result<HamiltonianRow> {
            let ch = Channel::new(a.n, depth)?;
            let ls = ls_norm_sq(&h, &ch)?;
            let moment = || -> Result<f64> {
                let tilde = tilde_coefficients(&h, &ch, &pair_channel(a.n, depth, cache)?)?;
                let on_state: f64 =
                    tilde.iter().enumerate().map(|(j, c)| c * signs.get(&j).copied().unwrap_or(0.0)).sum();
                Ok(ls + on_state - exact * exact)
            };
            let exact_variance = if a.n > MAX_EXACT_MOMENT_QUBITS {
                None
            } else {
                moment().map_err(|e| warn!("d={depth}: no exact variance: {e}")).ok()
            };
            let spec = BrickworkSpec::new(a.n, depth, a.seed.wrapping_add(i as u64))?;
            let snaps = acquire_range(&ghz, &spec, 0, a.shots)?;
            let values = sparse_values(&h, &snaps, &inverse_eigenvalues(&h, &ch)?)?;
            let m = values.len() as f64;
            let estimate = values.iter().sum::<f64>() / m;
            let sample_variance = values.iter().map(|v| (v - estimate).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            Ok(HamiltonianRow {
                depth,
                exact,
                estimate,
                standard_error: (sample_variance / m).sqrt(),
                sample_variance,
                ls_norm_sq: ls,
                triangle_bound: sparse_upper_sq(&h, &ch)?,
                exact_variance,
            })
        })
        .collect::<Result<_>>()?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
