mod common;

use std::collections::BTreeMap;

use common::{log_log_slope, max_abs_diff, triples};
use noisecorr::protocol::{empirical_distributions, reconstruct, reconstruct_from_distributions, reconstruct_marginal, FitOptions, Threshold};
use noisecorr::sim::{
    clifford_average, sample_experiment, sequence_distribution, NoiseModel, SamplingMode, Schedule, SpamModel,
};
use noisecorr::{EigenvalueVector, PartitionLayout};
use proptest::prelude::*;

fn schedule(lengths: Vec<u32>, sequences: usize, shots: u64, seed: u64) -> Schedule {
    Schedule { lengths, sequences_per_length: sequences, shots, seed, mode: SamplingMode::Dense }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn product_models_average_to_products(t in (1usize..=6).prop_flat_map(|k| triples(k, 0.2))) {
        let k = t.len();
        let lam = clifford_average(&NoiseModel::per_qubit(t.clone()).unwrap(), &PartitionLayout::singletons(k)).unwrap();
        prop_assert!((lam.values()[0] - 1.0).abs() <= 1e-12);
        // per-qubit averaged eigenvalue: 1 − 4/3 · (total error)
        let single: Vec<f64> = t.iter().map(|&(x, y, z)| 1.0 - 4.0 / 3.0 * (x + y + z)).collect();
        for (b, l) in lam.values().iter().enumerate() {
            let want: f64 = (0..k).filter(|i| (b >> i) & 1 == 1).map(|i| single[i]).product();
            prop_assert!((l - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn exact_data_recovers_eigenvalues(t in (1usize..=5).prop_flat_map(|k| triples(k, 0.1))) {
        let k = t.len();
        let layout = PartitionLayout::singletons(k);
        let lam = clifford_average(&NoiseModel::per_qubit(t).unwrap(), &layout).unwrap();
        let spam = SpamModel::ideal(k);
        let dists: BTreeMap<u32, _> = [1u32, 2, 4, 8]
            .into_iter()
            .map(|m| (m, sequence_distribution(&lam, &spam, m as i64).unwrap()))
            .collect();
        let res = reconstruct_from_distributions(&dists, &FitOptions::default()).unwrap();
        prop_assert!(max_abs_diff(res.eigenvalues.values(), lam.values()) <= 1e-9);
    }

    #[test]
    fn spam_only_moves_the_prefactor(
        t in (1usize..=4).prop_flat_map(|k| triples(k, 0.05)),
        flips in prop::collection::vec((0.0f64..0.1, 0.0f64..0.1), 4),
    ) {
        let k = t.len();
        let layout = PartitionLayout::singletons(k);
        let lam = clifford_average(&NoiseModel::per_qubit(t).unwrap(), &layout).unwrap();
        let spam = SpamModel::new(flips[..k].iter().map(|f| f.0).collect(), flips[..k].iter().map(|f| f.1).collect()).unwrap();
        let fit = |spam: &SpamModel| {
            let dists: BTreeMap<u32, _> = [1u32, 2, 4, 8, 16]
                .into_iter()
                .map(|m| (m, sequence_distribution(&lam, spam, m as i64).unwrap()))
                .collect();
            reconstruct_from_distributions(&dists, &FitOptions::default()).unwrap()
        };
        let (clean, dirty) = (fit(&SpamModel::ideal(k)), fit(&spam));
        for (a, b) in clean.fits.iter().zip(&dirty.fits) {
            prop_assert!((a.p - b.p).abs() <= 1e-9);
        }
    }

    #[test]
    fn reconstruction_ignores_sequence_order(seed in any::<u64>()) {
        let layout = PartitionLayout::singletons(3);
        let model = NoiseModel::per_qubit(vec![(0.01, 0.0, 0.02), (0.005, 0.005, 0.005), (0.03, 0.0, 0.0)]).unwrap();
        let rec = sample_experiment(&model, &SpamModel::ideal(3), &layout, &schedule(vec![1, 4, 16], 5, 300, seed)).unwrap();
        let shuffled = rec.with_sequence_order(|m, n| (0..n).map(|i| (i * 3 + m as usize) % n).collect());
        prop_assert_ne!(&shuffled, &rec);
        let (a, b) = (reconstruct(&rec, &FitOptions::default()).unwrap(), reconstruct(&shuffled, &FitOptions::default()).unwrap());
        prop_assert!(max_abs_diff(a.eigenvalues.values(), b.eigenvalues.values()) <= 1e-12);
    }
}

#[test]
fn marginal_reconstruction_matches_restriction() {
    let k = 6;
    let layout = PartitionLayout::singletons(k);
    let model = NoiseModel::per_qubit(vec![(0.01, 0.005, 0.002); k]).unwrap();
    let spam = SpamModel::new(vec![0.02; k], vec![0.03; k]).unwrap();
    let rec = sample_experiment(&model, &spam, &layout, &schedule(vec![1, 2, 4, 8, 16], 10, 2000, 4)).unwrap();
    let keep = [1, 3, 4];
    // a fixed threshold constant makes both routes fit identical series
    let fixed = FitOptions { threshold: Threshold::Fixed(1.0 / 16.0), ..FitOptions::default() };
    let full = reconstruct(&rec, &fixed).unwrap().eigenvalues.marginalize(&keep).unwrap();
    let part = reconstruct_marginal(&rec, &keep, &fixed).unwrap().eigenvalues;
    assert!(max_abs_diff(full.values(), part.values()) <= 1e-12);
    let uniform = FitOptions::default();
    let full = reconstruct(&rec, &uniform).unwrap().eigenvalues.marginalize(&keep).unwrap();
    let part = reconstruct_marginal(&rec, &keep, &uniform).unwrap().eigenvalues;
    assert!(max_abs_diff(full.values(), part.values()) <= 1e-2);
}

#[test]
fn frequencies_converge_at_root_shots() {
    let layout = PartitionLayout::singletons(2);
    let model = NoiseModel::per_qubit(vec![(0.02, 0.01, 0.0), (0.0, 0.02, 0.03)]).unwrap();
    let spam = SpamModel::new(vec![0.01, 0.02], vec![0.02, 0.01]).unwrap();
    let lam = clifford_average(&model, &layout).unwrap();
    let exact = sequence_distribution(&lam, &spam, 4).unwrap();
    let shots = [100u64, 1_000, 10_000, 100_000, 1_000_000];
    let errors: Vec<f64> = shots
        .iter()
        .map(|&n| {
            let rec = sample_experiment(&model, &spam, &layout, &schedule(vec![4], 200, n, n)).unwrap();
            let tables = rec.sequences(4).unwrap();
            // RMS over sequences of the marginal error-frequency deviation of set 0
            let ms: f64 = tables
                .iter()
                .map(|t| {
                    let f = t.iter().filter(|(o, _)| o.bit(0)).map(|(_, &c)| c).sum::<u64>() as f64 / n as f64;
                    (f - exact.values()[1] - exact.values()[3]).powi(2)
                })
                .sum::<f64>()
                / tables.len() as f64;
            ms.sqrt()
        })
        .collect();
    let slope = log_log_slope(&shots.map(|s| s as f64), &errors);
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}, errors {errors:?}");
}

#[test]
fn fitted_infidelity_precision_scales_with_budget() {
    let layout = PartitionLayout::singletons(1);
    let model = NoiseModel::per_qubit(vec![(0.01, 0.01, 0.01)]).unwrap();
    let truth = clifford_average(&model, &layout).unwrap().values()[1];
    let budgets = [100u64, 1_000, 10_000, 100_000];
    let errors: Vec<f64> = budgets
        .iter()
        .map(|&shots| {
            let ms: f64 = (0..100u64)
                .map(|s| {
                    let rec = sample_experiment(&model, &SpamModel::ideal(1), &layout, &schedule(vec![1, 4, 8, 16], 4, shots, s)).unwrap();
                    let p = reconstruct(&rec, &FitOptions::default()).unwrap().fits[1].p;
                    (((1.0 - p) - (1.0 - truth)) / (1.0 - truth)).powi(2)
                })
                .sum::<f64>()
                / 100.0;
            ms.sqrt()
        })
        .collect();
    let slope = log_log_slope(&budgets.map(|b| b as f64), &errors);
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}, errors {errors:?}");
}

#[test]
fn empirical_distributions_average_sequences() {
    let layout = PartitionLayout::singletons(2);
    let rec = sample_experiment(
        &NoiseModel::identity(2),
        &SpamModel::new(vec![0.0, 0.0], vec![0.3, 0.0]).unwrap(),
        &layout,
        &schedule(vec![3, 9], 4, 10_000, 1),
    )
    .unwrap();
    let d = &empirical_distributions(&rec).unwrap()[&3];
    assert!((d.values()[1] - 0.3).abs() < 0.02);
    assert_eq!(d.values()[2] + d.values()[3], 0.0);
    // readout error alone is pure prefactor: no decay
    let lam: EigenvalueVector = reconstruct(&rec, &FitOptions::default()).unwrap().eigenvalues;
    assert!(lam.values().iter().all(|l| (l - 1.0).abs() < 1e-2), "{:?}", lam.values());
}
