//! Channels, joint eigenvalues and inverses, built on demand.

use std::path::Path;

use log::info;
use shallow_shadows::brickwork::Depth;
use shallow_shadows::channel::tau::{build_tau_mps_with, GammaKernel, PairChannel, MAX_TAU_DEPTH};
use shallow_shadows::channel::Channel;
use shallow_shadows::inverse::{invert, InversionResult};
use shallow_shadows::rng::stream_rng;
use shallow_shadows::shadows::ShadowInverse;

use crate::config::InversionSpec;
use crate::error::{usage, CliError, Result};

/// Joint eigenvalues, reading the two-qubit kernel from `cache` when given.
pub fn pair_channel(n: usize, depth: Depth, cache: Option<&Path>) -> Result<PairChannel> {
    match (depth, cache) {
        (Depth::Finite(d), Some(dir)) if (1..=MAX_TAU_DEPTH).contains(&d) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::File { path: dir.display().to_string(), source })?;
            let kernel = GammaKernel::load_or_build(dir)?;
            Ok(PairChannel::Brickwork(build_tau_mps_with(n, d, &kernel)?))
        }
        _ => Ok(PairChannel::new(n, depth)?),
    }
}

pub fn run_inversion(channel: &Channel, spec: &InversionSpec) -> Result<InversionResult> {
    let Channel::Brickwork(m) = channel else {
        return usage("only finite depths d >= 1 need a variational inverse");
    };
    let cfg = spec.to_config()?;
    let result = invert(m, &cfg, &mut stream_rng(spec.seed, 0))?;
    info!(
        "inversion: {} sweeps, C0 {:e}, herald epsilon {:e}",
        result.sweeps_used, result.final_cost, result.herald_epsilon
    );
    Ok(result)
}

/// The closed form where one exists, else a fresh inversion.
pub fn shadow_inverse(channel: &Channel, spec: &InversionSpec) -> Result<ShadowInverse> {
    if let Some(exact) = ShadowInverse::exact(channel) {
        return Ok(exact);
    }
    let result = run_inversion(channel, spec)?;
    if !result.heralded {
        return Err(CliError::NotHeralded(result.herald_epsilon));
    }
    Ok(ShadowInverse::from_inversion(&result)?)
}
