use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use shallow_shadows::brickwork::{BrickworkSpec, Depth};
use shallow_shadows::channel::tau::PairChannel;
use shallow_shadows::channel::Channel;
use shallow_shadows::inverse::InversionResult;
use shallow_shadows::norms::{
    frobenius_bound_sq, pauli_report, sparse_report, stabilizer_report, statmech_report, NormReport, DEFAULT_BOND_CAP,
};
use shallow_shadows::pauli::PauliString;
use shallow_shadows::records::{acquire_range, read_records, write_records, Snapshot};
use shallow_shadows::shadows::{estimate_sparse, shallow_values, Direction, EstimationReport, MomConfig, ShadowInverse};

use crate::config::{hash_hex, Estimator, ExperimentConfig, InversionSpec, Observable, ObservableSpec, StateSpec};
use crate::ensemble::{pair_channel, run_inversion, shadow_inverse};
use crate::error::{usage, CliError, Result};

pub fn parse_pauli(s: &str, n: usize) -> Result<PauliString> {
    let p: PauliString = s.parse()?;
    if p.n() != n {
        return usage(format!("{s} acts on {} qubits, expected {n}", p.n()));
    }
    Ok(p)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::File { path: path.display().to_string(), source })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| CliError::File { path: path.display().to_string(), source })
}

pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            serde_json::to_writer_pretty(&mut w, value)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            serde_json::to_writer_pretty(&mut w, value)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn channel(n: usize, depth: Depth, paulis: &[String], save: Option<&Path>) -> Result<()> {
    if paulis.is_empty() && save.is_none() {
        return usage("nothing to do: pass --pauli or --save");
    }
    let ch = Channel::new(n, depth)?;
    for s in paulis {
        println!("{s}\t{}", ch.t(&parse_pauli(s, n)?)?);
    }
    if let Some(path) = save {
        ch.pauli_mps().save(path)?;
        info!("wrote eigenvalue MPS to {}", path.display());
    }
    Ok(())
}

pub fn tau(n: usize, depth: Depth, pairs: &[String], save: Option<&Path>, cache: Option<&Path>) -> Result<()> {
    if pairs.is_empty() && save.is_none() {
        return usage("nothing to do: pass --pair or --save");
    }
    let tau = pair_channel(n, depth, cache)?;
    for s in pairs {
        let Some((a, b)) = s.split_once(',') else {
            return usage(format!("pair {s:?} must look like P,Q"));
        };
        println!("{a}\t{b}\t{}", tau.tau(&parse_pauli(a, n)?, &parse_pauli(b, n)?)?);
    }
    if let Some(path) = save {
        let PairChannel::Brickwork(m) = &tau else {
            return usage("depth 0 and infinite depth have closed forms and no stored MPS");
        };
        m.inner().save(path)?;
    }
    Ok(())
}

/// On-disk inversion: the settings that produced it next to the result.
#[derive(Serialize, Deserialize)]
pub struct InverseFile {
    pub n: usize,
    pub d: Depth,
    pub config_hash: String,
    pub inversion: InversionSpec,
    pub result: InversionResult,
}

pub fn invert(n: usize, depth: Depth, spec: &InversionSpec, out: Option<&Path>) -> Result<()> {
    let ch = Channel::new(n, depth)?;
    let result = run_inversion(&ch, spec)?;
    let config_hash = hash_hex(&[serde_json::to_vec(&(n, depth, spec))?.as_slice()]);
    let (heralded, eps) = (result.heralded, result.herald_epsilon);
    let file = InverseFile { n, d: depth, config_hash, inversion: spec.clone(), result };
    match out {
        Some(path) => {
            write_json(&file, Some(path))?;
            println!(
                "{}",
                serde_json::json!({
                    "heralded": heralded,
                    "herald_epsilon": eps,
                    "final_cost": file.result.final_cost,
                    "sweeps_used": file.result.sweeps_used,
                })
            );
        }
        None => write_json(&file, None)?,
    }
    if !heralded {
        return Err(CliError::NotHeralded(eps));
    }
    Ok(())
}

pub fn load_inverse_file(path: &Path, n: usize, depth: Depth) -> Result<InversionResult> {
    let file: InverseFile = serde_json::from_reader(open(path)?)?;
    if file.n != n || file.d != depth {
        return usage(format!(
            "{} inverts n={}, d={}; records have n={n}, d={depth}",
            path.display(),
            file.n,
            file.d
        ));
    }
    Ok(file.result)
}

pub struct SampleArgs<'a> {
    pub n: usize,
    pub depth: Depth,
    pub state: &'a StateSpec,
    pub count: usize,
    pub seed: u64,
    pub first: u64,
    pub explicit: bool,
}

pub fn sample(a: &SampleArgs, out: Option<&Path>) -> Result<Vec<Snapshot>> {
    let state = a.state.build(a.n)?;
    let spec = BrickworkSpec::new(a.n, a.depth, a.seed)?;
    let mut snaps = acquire_range(&state, &spec, a.first, a.count)?;
    if a.explicit {
        snaps = snaps.into_iter().map(Snapshot::with_explicit_circuit).collect::<shallow_shadows::Result<_>>()?;
    }
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write_records(&mut w, &snaps)?;
            w.flush()?;
        }
        None => write_records(io::stdout().lock(), &snaps)?,
    }
    Ok(snaps)
}

pub fn load_records(path: &Path) -> Result<Vec<Snapshot>> {
    let snaps = read_records(open(path)?)?;
    let Some(first) = snaps.first() else {
        return usage(format!("{} holds no snapshots", path.display()));
    };
    if let Some(s) = snaps.iter().find(|s| s.n != first.n || s.d != first.d) {
        return usage(format!("mixed records: n={}, d={} next to n={}, d={}", first.n, first.d, s.n, s.d));
    }
    Ok(snaps)
}

/// Estimation output with enough context to audit it.
#[derive(Debug, Serialize)]
pub struct Report {
    pub config_hash: String,
    pub n: usize,
    pub d: Depth,
    pub estimator: Estimator,
    #[serde(flatten)]
    pub estimation: EstimationReport,
    pub norm: Option<NormReport>,
}

pub struct EstimateArgs<'a> {
    pub blocks: usize,
    pub estimator: Estimator,
    pub direction: Direction,
    pub inverse: Option<&'a Path>,
    pub inversion: &'a InversionSpec,
    pub cache: Option<&'a Path>,
}

pub fn estimate(obs: &Observable, snaps: &[Snapshot], a: &EstimateArgs, config_hash: String) -> Result<Report> {
    let (n, depth) = (snaps[0].n, snaps[0].d);
    let ch = Channel::new(n, depth)?;
    let mom = MomConfig { blocks: a.blocks };
    let estimator = match (a.estimator, &obs.sparse) {
        (Estimator::Auto | Estimator::Sparse, Some(_)) => Estimator::Sparse,
        (Estimator::Sparse, None) => return usage("observable has no sparse form; use the mps estimator"),
        _ => Estimator::Mps,
    };
    let stored = a.inverse.map(|p| load_inverse_file(p, n, depth)).transpose()?;
    let resolve = || resolve_inverse(&ch, stored.as_ref(), a.inversion);
    let mut inverse = None;
    let mut estimation = match (estimator, &obs.sparse) {
        (Estimator::Sparse, Some(o)) => estimate_sparse(o, snaps, &ch, mom)?,
        _ => {
            let inv = resolve()?;
            let values = shallow_values(&obs.mps, snaps, &inv, a.direction)?;
            let report = EstimationReport::from_values(&values, mom, inv.herald_epsilon())?;
            inverse = Some(inv);
            report
        }
    };
    let norm = match norm_bound(obs, &ch, depth, inverse.as_ref(), resolve, a.cache) {
        Ok(r) => Some(r),
        Err(e) => {
            warn!("no shadow-norm bound: {e}");
            None
        }
    };
    estimation.variance_bound = norm.as_ref().map(|r| r.worst_case_upper_sq);
    Ok(Report { config_hash, n, d: depth, estimator, estimation, norm })
}

fn norm_bound(
    obs: &Observable,
    ch: &Channel,
    depth: Depth,
    inverse: Option<&ShadowInverse>,
    resolve: impl FnOnce() -> Result<ShadowInverse>,
    cache: Option<&Path>,
) -> Result<NormReport> {
    let n = ch.n();
    if let Some(state) = &obs.projector_of {
        return Ok(stabilizer_report(state, ch, &pair_channel(n, depth, cache)?)?);
    }
    if let Some(o) = &obs.sparse {
        return Ok(sparse_report(o, ch)?);
    }
    let owned;
    let inverse = match inverse {
        Some(i) => i,
        None => {
            owned = resolve()?;
            &owned
        }
    };
    Ok(frobenius_bound_sq(&obs.mps, &pair_channel(n, depth, cache)?, inverse, DEFAULT_BOND_CAP)?)
}

/// A stored inversion unless the closed form applies.
fn resolve_inverse(ch: &Channel, stored: Option<&InversionResult>, spec: &InversionSpec) -> Result<ShadowInverse> {
    match stored {
        Some(r) if ShadowInverse::exact(ch).is_none() => {
            if !r.heralded {
                return Err(CliError::NotHeralded(r.herald_epsilon));
            }
            Ok(ShadowInverse::from_inversion(r)?)
        }
        _ => shadow_inverse(ch, spec),
    }
}

/// Hash of the estimation settings together with the records they read.
pub fn estimate_hash(obs: &ObservableSpec, a: &EstimateArgs, records: &Path) -> Result<String> {
    let settings = serde_json::to_vec(&(obs, a.blocks, a.estimator, a.direction, a.inversion))?;
    let data = std::fs::read(records).map_err(|source| CliError::File { path: records.display().to_string(), source })?;
    let mut parts = vec![settings.as_slice(), data.as_slice()];
    let inverse_data;
    if let Some(p) = a.inverse {
        inverse_data = std::fs::read(p).map_err(|source| CliError::File { path: p.display().to_string(), source })?;
        parts.push(&inverse_data);
    }
    Ok(hash_hex(&parts))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum NormChoice {
    /// Pick from the observable: Pauli, stabilizer projector, sparse, then MPS.
    Auto,
    Pauli,
    Sparse,
    Frobenius,
    Stabilizer,
    Statmech,
}

pub struct NormArgs<'a> {
    pub method: NormChoice,
    pub pauli: Option<&'a str>,
    pub alpha: f64,
    pub c: f64,
    pub inverse: Option<&'a Path>,
    pub inversion: &'a InversionSpec,
    pub cache: Option<&'a Path>,
}

pub fn norm(n: usize, depth: Depth, obs: Option<&ObservableSpec>, a: &NormArgs) -> Result<NormReport> {
    let ch = Channel::new(n, depth)?;
    let method = match (a.method, a.pauli, obs) {
        (NormChoice::Auto, Some(_), _) => NormChoice::Pauli,
        (NormChoice::Auto, None, Some(spec)) => {
            let o = spec.build(n)?;
            if o.projector_of.is_some() {
                NormChoice::Stabilizer
            } else if o.sparse.is_some() {
                NormChoice::Sparse
            } else {
                NormChoice::Frobenius
            }
        }
        (NormChoice::Auto, None, None) => return usage("pass --pauli or an observable"),
        (m, _, _) => m,
    };
    let need_obs = || -> Result<Observable> {
        match obs {
            Some(spec) => spec.build(n),
            None => usage("this method needs an observable"),
        }
    };
    let need_pauli = || -> Result<PauliString> {
        match a.pauli {
            Some(s) => parse_pauli(s, n),
            None => usage("this method needs --pauli"),
        }
    };
    Ok(match method {
        NormChoice::Pauli => pauli_report(&need_pauli()?, &ch)?,
        NormChoice::Statmech => statmech_report(&need_pauli()?, depth, a.alpha, a.c)?,
        NormChoice::Sparse => match need_obs()?.sparse {
            Some(o) => sparse_report(&o, &ch)?,
            None => return usage("observable has no sparse form"),
        },
        NormChoice::Stabilizer => match need_obs()?.projector_of {
            Some(state) => stabilizer_report(&state, &ch, &pair_channel(n, depth, a.cache)?)?,
            None => return usage("observable is not a stabilizer projector"),
        },
        NormChoice::Frobenius => {
            let o = need_obs()?;
            let stored = a.inverse.map(|p| load_inverse_file(p, n, depth)).transpose()?;
            let inverse = resolve_inverse(&ch, stored.as_ref(), a.inversion)?;
            frobenius_bound_sq(&o.mps, &pair_channel(n, depth, a.cache)?, &inverse, DEFAULT_BOND_CAP)?
        }
        NormChoice::Auto => unreachable!("resolved above"),
    })
}

pub struct RunOutput {
    pub report: Report,
    pub path: Option<PathBuf>,
}

/// Sample, estimate and bound in one go.
pub fn run(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<RunOutput> {
    cfg.validate()?;
    let config_hash = cfg.hash()?;
    let obs = cfg.observable.build(cfg.n)?;
    let state = cfg.state.build(cfg.n)?;
    let spec = BrickworkSpec::new(cfg.n, cfg.d, cfg.seed)?;
    info!("sampling {} snapshots at n={}, d={}", cfg.shots, cfg.n, cfg.d);
    let snaps = acquire_range(&state, &spec, 0, cfg.shots)?;
    let args = EstimateArgs {
        blocks: cfg.blocks,
        estimator: cfg.estimator,
        direction: Direction::Auto,
        inverse: None,
        inversion: &cfg.inversion,
        cache,
    };
    let report = estimate(&obs, &snaps, &args, config_hash)?;
    Ok(RunOutput { report, path: cfg.output.clone() })
}
