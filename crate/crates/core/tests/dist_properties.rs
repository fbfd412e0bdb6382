mod common;

use common::{max_abs_diff, prob_vector, simplex};
use noisecorr::dist::{eigs_to_pauli_rates, inverse_wht, observed_to_averaged_rates, project_simplex, wht};
use noisecorr::sim::{clifford_average, NoiseModel};
use noisecorr::{PartitionLayout, PauliErrorRates, ProbVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wht_round_trip(k in 1usize..=14, seed in any::<u64>()) {
        let v: Vec<f64> = (0..1u64 << k).map(|i| ((i.wrapping_mul(seed | 1) >> 7) % 2001) as f64 / 1000.0 - 1.0).collect();
        let back = inverse_wht(&wht(&v).unwrap()).unwrap();
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        prop_assert!(max_abs_diff(&v, &back) / scale <= 1e-12);
    }

    #[test]
    fn transform_commutes_with_marginalisation(p in (1usize..=10).prop_flat_map(prob_vector), mask in any::<u16>()) {
        let k = p.k();
        let mut keep: Vec<usize> = (0..k).filter(|i| (mask >> i) & 1 == 1).collect();
        if keep.is_empty() {
            keep.push(k - 1);
        }
        let a = p.marginalize(&keep).unwrap().to_eigenvalues();
        let b = p.to_eigenvalues().marginalize(&keep).unwrap();
        prop_assert!(max_abs_diff(a.values(), b.values()) <= 1e-14);
    }

    #[test]
    fn simplex_projection_satisfies_kkt(v in prop::collection::vec(-2.0f64..2.0, 1..64)) {
        let out = project_simplex(&v).unwrap();
        prop_assert!((out.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        // θ recovered from any positive coordinate must explain every coordinate
        let i = out.iter().position(|&x| x > 0.0).unwrap();
        let theta = v[i] - out[i];
        for (o, x) in out.iter().zip(&v) {
            prop_assert!((o - (x - theta).max(0.0)).abs() <= 1e-12);
        }
    }

    #[test]
    fn conversion_identities(n in 1usize..=4, w in simplex(256)) {
        let rates = PauliErrorRates::new(n, {
            let v = &w[..1 << (2 * n)];
            let s: f64 = v.iter().sum();
            v.iter().map(|x| x / s).collect()
        }).unwrap();
        let back = PauliErrorRates::rates_from_eigenvalues(&rates.eigenvalues(), n);
        prop_assert!(max_abs_diff(&back, rates.values()) <= 1e-12);
        let averaged = clifford_average(&NoiseModel::explicit(rates.clone()), &PartitionLayout::singletons(n)).unwrap();
        prop_assert!((averaged.values()[0] - 1.0).abs() <= 1e-12);
        prop_assert!(averaged.values().iter().all(|l| l.abs() <= 1.0 + 1e-12));
        let via_n = observed_to_averaged_rates(&averaged.to_probabilities().unwrap()).unwrap();
        let via_w = eigs_to_pauli_rates(&averaged).unwrap().reduce();
        prop_assert!(max_abs_diff(&via_n, &via_w) <= 1e-10);
        prop_assert!(max_abs_diff(&via_n, &rates.reduce()) <= 1e-10);
        prop_assert!((via_n.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn projection_does_not_commute_with_marginalisation() {
    // transform output of a noisy estimate can leave the simplex
    let raw = [0.5, -0.2, 0.4, 0.3];
    let layout = PartitionLayout::singletons(2);
    let project_then_marginalise = ProbVector::from_projection(layout.clone(), &raw).unwrap().marginalize(&[0]).unwrap();
    let marginalise_then_project = project_simplex(&[raw[0] + raw[2], raw[1] + raw[3]]).unwrap();
    let gap = max_abs_diff(project_then_marginalise.values(), &marginalise_then_project);
    assert!(gap > 0.1, "{gap}");
}

#[test]
fn rejects_non_power_of_two() {
    assert!(wht(&[1.0, 2.0, 3.0]).is_err());
    assert!(wht(&[]).is_err());
}
