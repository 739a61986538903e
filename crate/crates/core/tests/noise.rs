mod common;

use common::{all_mixed, random_mixed};
use gdsbp::matrix::{gds_repeated, parse_gds};
use gdsbp::noise::{
    classify_residual, exact_posterior, exact_posterior_oracle, sample_bits, sample_pauli, sample_trial,
    sample_weight_at_most, sample_weight_exact, stream_rng, weight_count,
};
use gdsbp::{rotated_toric, NoiseModel, Pauli, PauliVector, ResidualClass};
use proptest::prelude::*;
use rand::Rng;

fn within_sigmas(count: u64, total: u64, p: f64, k: f64) -> bool {
    let mean = total as f64 * p;
    let sd = (total as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean).abs() <= k * sd
}

#[test]
fn depolarizing_frequencies() {
    let n = 200_000;
    let e = sample_pauli(n, 0.3, &mut stream_rng(51, 0, 0, 0));
    for (p, want) in [(Pauli::I, 0.7), (Pauli::X, 0.1), (Pauli::Y, 0.1), (Pauli::Z, 0.1)] {
        let c = e.symbols().iter().filter(|s| **s == p).count() as u64;
        assert!(within_sigmas(c, n as u64, want, 5.0), "{p}: {c}");
    }
    let bits = sample_bits(n, 0.2, &mut stream_rng(51, 0, 0, 1));
    let c = bits.iter().filter(|b| **b).count() as u64;
    assert!(within_sigmas(c, n as u64, 0.2, 5.0));
}

#[test]
fn weight_counts_match_enumeration() {
    for (n, m) in [(1, 0), (2, 1), (3, 2), (2, 3)] {
        let all = all_mixed(n, m);
        for w in 0..=n + m {
            let brute = all.iter().filter(|x| x.weight() == w).count();
            assert_eq!(weight_count(n, m, w), brute as f64, "n={n} m={m} w={w}");
        }
    }
}

#[test]
fn exact_weight_sampling_is_uniform() {
    let (n, m, w) = (2, 1, 2);
    let support: Vec<_> = all_mixed(n, m).into_iter().filter(|x| x.weight() == w).collect();
    assert_eq!(support.len(), 15);
    let total = 150_000u64;
    let mut counts = vec![0u64; support.len()];
    let mut rng = stream_rng(52, 0, 0, 0);
    for _ in 0..total {
        let x = sample_weight_exact(n, m, w, &mut rng).unwrap();
        counts[support.iter().position(|y| *y == x).unwrap()] += 1;
    }
    for c in counts {
        assert!(within_sigmas(c, total, 1.0 / 15.0, 5.0), "{c}");
    }

    let mut rng = stream_rng(53, 0, 0, 0);
    let total = 60_000u64;
    let mut by_weight = [0u64; 3];
    for _ in 0..total {
        by_weight[sample_weight_at_most(n, m, 2, false, &mut rng).unwrap().weight()] += 1;
    }
    // weight 1: 3·2 + 1 = 7 vectors, weight 2: 15
    assert_eq!(by_weight[0], 0);
    assert!(within_sigmas(by_weight[1], total, 7.0 / 22.0, 5.0));
    assert!(within_sigmas(by_weight[2], total, 15.0 / 22.0, 5.0));
}

#[test]
fn trials_are_reproducible_per_index() {
    let code = rotated_toric(4).unwrap();
    let noise = NoiseModel::new(0.05, 0.05, 3).unwrap();
    let a = sample_trial(&code, &noise, true, 7, 11);
    let b = sample_trial(&code, &noise, true, 7, 11);
    let c = sample_trial(&code, &noise, true, 7, 12);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.rounds(), 4);
    assert!(a.syndrome_flips.len() == 3);
}

#[test]
fn oracle_matches_direct_enumeration() {
    let h = parse_gds("GDS 2 2 3\n0:X 1:Z b0\n0:Z b1\n1:Y b0 b1\n").unwrap();
    let noise = NoiseModel::new(0.2, 0.1, 1).unwrap();
    let all = all_mixed(2, 2);
    let prob = |x: &gdsbp::MixedVector| -> f64 {
        let q: f64 = x.pauli.symbols().iter().map(|p| if p.is_identity() { 0.8 } else { 0.2 / 3.0 }).product();
        let b: f64 = x.bits.iter().map(|b| if *b { 0.1 } else { 0.9 }).product();
        q * b
    };
    let mut rng = stream_rng(54, 0, 0, 0);
    for _ in 0..10 {
        let s = h.syndrome(&random_mixed(2, 2, &mut rng)).unwrap();
        let exact = exact_posterior_oracle(&h, &s, &noise).unwrap();
        let matching: Vec<_> = all.iter().filter(|x| h.syndrome(x).unwrap() == s).collect();
        let evidence: f64 = matching.iter().map(|x| prob(x)).sum();
        assert!((exact.log_evidence - evidence.ln()).abs() < 1e-12);
        for j in 0..2 {
            let marg = |p: Pauli| -> f64 { matching.iter().filter(|x| x.pauli.get(j) == p).map(|x| prob(x)).sum() };
            for (k, w) in Pauli::NON_IDENTITY.iter().enumerate() {
                let want = (marg(Pauli::I) / marg(*w)).ln();
                assert!((exact.quaternary[j][k] - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
            let zero: f64 = matching.iter().filter(|x| !x.bits[j]).map(|x| prob(x)).sum();
            let want = (zero / (evidence - zero)).ln();
            assert!((exact.binary[j] - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
        let best = matching.iter().map(|x| prob(x)).fold(0.0, f64::max);
        assert!((prob(&exact.map_candidate) - best).abs() < 1e-15);
    }
}

#[test]
fn oracle_refuses_large_instances() {
    let code = rotated_toric(4).unwrap();
    let h = gds_repeated(code.h(), 1).unwrap();
    let prior = gdsbp::init_from_rates(16, 16, 0.1, 0.1).unwrap();
    assert!(exact_posterior(&h, &vec![false; 16], &prior).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classification_ignores_stabilizer_injection(seed in any::<u64>()) {
        let code = rotated_toric(4).unwrap();
        let mut rng = stream_rng(seed, 0, 0, 0);
        let e = sample_pauli(16, 0.2, &mut rng);
        let est = sample_pauli(16, 0.2, &mut rng);
        let base = classify_residual(&code, std::slice::from_ref(&e), std::slice::from_ref(&est)).unwrap();
        let mut injected = est.clone();
        for row in code.h().to_paulis() {
            if rng.gen_bool(0.5) {
                injected.mul_assign(&row).unwrap();
            }
        }
        let again = classify_residual(&code, std::slice::from_ref(&e), std::slice::from_ref(&injected)).unwrap();
        prop_assert_eq!(base, again);
        // the exact error, up to stabilizers, always succeeds
        let mut fixed = e.clone();
        for row in code.h().to_paulis().iter().take(3) {
            fixed.mul_assign(row).unwrap();
        }
        prop_assert_eq!(
            classify_residual(&code, std::slice::from_ref(&e), std::slice::from_ref(&fixed)).unwrap(),
            ResidualClass::Success
        );
    }
}

#[test]
fn logical_residual_fails() {
    let code = rotated_toric(4).unwrap();
    // a weight-4 logical found by search must not be a stabilizer
    let e = PauliVector::identity(16);
    let mut logical = PauliVector::identity(16);
    let rows = code.h().to_paulis();
    'outer: for col in 0..4 {
        for p in Pauli::NON_IDENTITY {
            let mut cand = PauliVector::identity(16);
            for row in 0..4 {
                cand.set(row * 4 + col, p);
            }
            if rows.iter().all(|r| !r.bilinear(&cand).unwrap()) && !code.is_stabilizer(&cand) {
                logical = cand;
                break 'outer;
            }
        }
    }
    assert_eq!(logical.weight(), 4);
    assert_eq!(
        classify_residual(&code, &[e], &[logical]).unwrap(),
        ResidualClass::LogicalFailure
    );
}
