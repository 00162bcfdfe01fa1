mod common;

use common::*;
use shallow_shadows::brickwork::{BrickworkSpec, Circuit, Depth};
use shallow_shadows::channel::tau::PairChannel;
use shallow_shadows::channel::Channel;
use shallow_shadows::dense;
use shallow_shadows::inverse::{invert, InversionConfig};
use shallow_shadows::norms::{
    frobenius_bound_sq, ls_norm_sq, sparse_upper_sq, statmech_correction, statmech_preconditions, DEFAULT_BOND_CAP,
};
use shallow_shadows::records::acquire;
use shallow_shadows::rng::stream_rng;
use shallow_shadows::shadows::*;
use shallow_shadows::stabilizer::{measure_all, StabilizerState};

#[test]
fn measurement_frequencies_match_dense_simulation() {
    let mut rng = stream_rng(51, 0);
    for depth in [Depth::Finite(1), Depth::Finite(2), Depth::Infinite] {
        let state = random_stabilizer_state(4, &mut rng);
        let circuit = Circuit::sample(4, depth, &mut rng).unwrap();
        // global circuits have no gate list, so evolve the tableau instead
        let amp = match dense::circuit_unitary(&circuit) {
            Ok(u) => u * dense::stabilizer_vector(&state).unwrap(),
            Err(_) => dense::stabilizer_vector(&state.evolve(&circuit).unwrap()).unwrap(),
        };
        let shots = 20_000;
        let mut counts = [0usize; 16];
        for _ in 0..shots {
            let b = measure_all(&state, &circuit, &mut rng).unwrap();
            counts[b.iter().enumerate().map(|(q, &x)| (x as usize) << q).sum::<usize>()] += 1;
        }
        let (mut chi2, mut dof) = (0.0, 0usize);
        for (idx, &c) in counts.iter().enumerate() {
            let p = amp[idx].norm_sqr();
            if p < 1e-12 {
                assert_eq!(c, 0, "{depth:?}: outcome {idx} has zero probability");
                continue;
            }
            let e = p * shots as f64;
            chi2 += (c as f64 - e).powi(2) / e;
            dof += 1;
        }
        let dof = dof.saturating_sub(1).max(1) as f64;
        assert!(chi2 <= dof + 3.0 * (2.0 * dof).sqrt(), "{depth:?}: χ² = {chi2} with {dof} dof");
    }
}

#[test]
fn sparse_estimator_is_unbiased() {
    let mut rng = stream_rng(52, 0);
    for d in 0..=2 {
        let depth = Depth::Finite(d);
        let state = random_stabilizer_state(4, &mut rng);
        // include some stabilizers so the expectation is not trivially zero
        let mut terms: Vec<_> = random_sparse(4, 3, &mut rng).terms().to_vec();
        for g in state.group_elements().into_iter().skip(1).take(2) {
            terms.push((0.8, g));
        }
        let o = SparseObservable::new(4, terms).unwrap();
        let exact = dense_expectation(&o, &state);
        let ch = Channel::new(4, depth).unwrap();
        let snaps = acquire(&state, &BrickworkSpec::new(4, depth, 100 + d as u64).unwrap(), 100_000).unwrap();
        let values = sparse_values(&o, &snaps, &inverse_eigenvalues(&o, &ch).unwrap()).unwrap();
        let (mean, err) = mean_and_stderr(&values);
        assert!((mean - exact).abs() <= 4.0 * err, "d={d}: {mean} ± {err} vs {exact}");
    }
}

#[test]
fn sparse_and_shallow_estimators_agree() {
    let mut rng = stream_rng(53, 0);
    for (d, exact_inverse) in [(1, true), (2, false), (3, false)] {
        let depth = Depth::Finite(d);
        let ch = Channel::new(6, depth).unwrap();
        let inverse = if exact_inverse {
            ShadowInverse::exact(&ch).unwrap()
        } else {
            let Channel::Brickwork(m) = &ch else { unreachable!() };
            let r = invert(m, &InversionConfig::with_growth(vec![2, 3, 4]), &mut stream_rng(5, 0)).unwrap();
            ShadowInverse::from_inversion(&r).unwrap()
        };
        let o = random_sparse(6, 5, &mut rng);
        let shallow = ShallowObservable::from_sparse(&o).unwrap();
        let state = random_stabilizer_state(6, &mut rng);
        let snaps = acquire(&state, &BrickworkSpec::new(6, depth, 9).unwrap(), 300).unwrap();
        let a = sparse_values(&o, &snaps, &inverse_eigenvalues(&o, &ch).unwrap()).unwrap();
        let b = shallow_values(&shallow, &snaps, &inverse, Direction::Observable).unwrap();
        let c = shallow_values(&shallow, &snaps, &inverse, Direction::Snapshot).unwrap();
        let tol = inverse.herald_epsilon() * operator_norm(&o) + 1e-9;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean(&a) - mean(&b)).abs() <= tol, "d={d}");
        for (x, y) in b.iter().zip(&c) {
            assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
        }
    }
}

#[test]
fn empirical_variance_below_norm_bounds() {
    let mut rng = stream_rng(54, 0);
    for d in 0..=2 {
        let depth = Depth::Finite(d);
        let ch = Channel::new(4, depth).unwrap();
        let tau = PairChannel::new(4, depth).unwrap();
        let o = random_sparse(4, 4, &mut rng);
        let state = random_stabilizer_state(4, &mut rng);
        let snaps = acquire(&state, &BrickworkSpec::new(4, depth, 200 + d as u64).unwrap(), 20_000).unwrap();
        let var = sample_variance(&sparse_values(&o, &snaps, &inverse_eigenvalues(&o, &ch).unwrap()).unwrap());
        let triangle = sparse_upper_sq(&o, &ch).unwrap();
        // a few percent of slack covers the sampling error of the variance
        assert!(var <= 1.05 * triangle, "d={d}: {var} > {triangle}");
        let inverse = ShadowInverse::exact(&ch).unwrap_or_else(|| {
            let Channel::Brickwork(m) = &ch else { unreachable!() };
            ShadowInverse::from_inversion(&invert(m, &InversionConfig::new(2), &mut stream_rng(1, 0)).unwrap()).unwrap()
        });
        let fro = frobenius_bound_sq(&ShallowObservable::from_sparse(&o).unwrap(), &tau, &inverse, DEFAULT_BOND_CAP);
        if let Ok(r) = fro {
            assert!(r.ls_norm_sq <= r.worst_case_upper_sq);
            assert!(var <= 1.05 * r.worst_case_upper_sq, "d={d}: {var} > {}", r.worst_case_upper_sq);
        }
    }
}

#[test]
fn median_of_means_reports() {
    let ch = Channel::new(4, Depth::Finite(1)).unwrap();
    let o = SparseObservable::from_strings(&[(1.0, "ZZII")]).unwrap();
    let snaps = acquire(&StabilizerState::ghz(4), &BrickworkSpec::new(4, Depth::Finite(1), 3).unwrap(), 6000).unwrap();
    let r = estimate_sparse(&o, &snaps, &ch, MomConfig { blocks: 6 }).unwrap();
    assert_eq!(r.block_means.len(), 6);
    assert!((r.estimate - 1.0).abs() < 0.2);
    assert!(matches!(estimate_sparse(&o, &snaps[..5999], &ch, MomConfig { blocks: 6 }), Err(shallow_shadows::Error::BlockCount { .. })));
}

#[test]
fn deep_circuits_cost_at_most_twice_the_frobenius_norm() {
    let (n, alpha, c) = (10, 1.5, 2.2);
    let mut rng = stream_rng(57, 0);
    for d in [6, 8] {
        statmech_preconditions(n, d, alpha, c).unwrap();
        let ch = Channel::new(n, Depth::Finite(d)).unwrap();
        let limit = 2.0 * (1.0 + statmech_correction(n, alpha, c));
        for terms in [1, 3, 10] {
            let o = random_sparse(n, terms, &mut rng);
            let ratio = ls_norm_sq(&o, &ch).unwrap() / o.frobenius_sq();
            assert!(ratio <= limit, "d={d}, {terms} terms: ratio {ratio}");
        }
    }
}
