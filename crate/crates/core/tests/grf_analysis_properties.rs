mod common;

use common::{max_abs_diff, prob_vector, simplex, triples};
use noisecorr::analysis::{
    conditional_mutual_information, correlation_matrix, entropy, fidelity_from_eigs, hellinger, jsd, kl,
    mutual_information, tvd, LogBase,
};
use noisecorr::bootstrap::{ensemble, percentile_ci, BootstrapOptions};
use noisecorr::dist::{eigs_to_pauli_rates, observed_to_averaged_rates};
use noisecorr::grf::{chain_distances, chain_distances_mc, fit_grf, grf_eval, grf_to_dense, JunctionChain};
use noisecorr::protocol::FitOptions;
use noisecorr::sim::{clifford_average, compose_pair_channel, sample_experiment, NoiseModel, SamplingMode, Schedule, SpamModel};
use noisecorr::{PartitionLayout, PauliErrorRates, ProbVector};
use proptest::prelude::*;

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let (c, s) = (1.0 / (t * t + 1.0).sqrt(), t / (t * t + 1.0).sqrt());
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

fn chain_and_truth(k: usize) -> impl Strategy<Value = (JunctionChain, ProbVector)> {
    (2usize..=3).prop_flat_map(move |w| {
        let chain = JunctionChain::sliding(k, w.min(k)).unwrap();
        prob_vector(k).prop_map(move |p| (chain.clone(), p))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distances_vanish_only_on_equal_arguments(p in (1usize..=8).prop_flat_map(prob_vector), q in simplex(256)) {
        let n = p.values().len();
        let s: f64 = q[..n].iter().sum();
        let q = ProbVector::new(p.layout().clone(), q[..n].iter().map(|x| x / s).collect()).unwrap();
        prop_assert!(jsd(&p, &p, LogBase::Two).unwrap() <= 1e-12);
        prop_assert!(hellinger(&p, &p).unwrap() <= 1e-12);
        prop_assert!(tvd(&p, &p).unwrap() <= 1e-12);
        prop_assert!(kl(&p, &p).unwrap() <= 1e-12);
        if max_abs_diff(p.values(), q.values()) > 1e-6 {
            prop_assert!(jsd(&p, &q, LogBase::Two).unwrap() > 0.0);
            prop_assert!(hellinger(&p, &q).unwrap() > 0.0);
            prop_assert!(kl(&p, &q).unwrap() > 0.0);
        }
        prop_assert!(jsd(&p, &q, LogBase::Two).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn information_bounds_and_psd_correlation(p in (2usize..=6).prop_flat_map(prob_vector)) {
        let k = p.k();
        for a in 0..k {
            for b in a + 1..k {
                let mi = mutual_information(&p, &[a], &[b]).unwrap();
                let bound = entropy(&p, &[a]).unwrap().min(entropy(&p, &[b]).unwrap());
                prop_assert!(mi >= -1e-12 && mi <= bound + 1e-12);
            }
        }
        let c = correlation_matrix(&p);
        for i in 0..k {
            for j in 0..k {
                prop_assert_eq!(c.matrix[i][j], c.matrix[j][i]);
                prop_assert!(c.matrix[i][j].abs() <= 1.0 + 1e-12);
            }
        }
        prop_assert!(symmetric_eigenvalues(c.matrix.clone()).iter().all(|&e| e >= -1e-9));
    }

    #[test]
    fn fidelity_matches_dense_pauli_rates(t in triples(3, 0.2), c in 0.0f64..0.05, mask in 1u8..8) {
        let base = PauliErrorRates::product(&t).unwrap();
        let pair: Vec<f64> = (0..16).map(|j| if j == 0 { 1.0 - c } else { c / 15.0 }).collect();
        let rates = compose_pair_channel(&base, 0, 2, &pair).unwrap();
        let lam = clifford_average(&NoiseModel::explicit(rates), &PartitionLayout::singletons(3)).unwrap();
        let subset: Vec<usize> = (0..3).filter(|i| (mask >> i) & 1 == 1).collect();
        let f = fidelity_from_eigs(&lam, &subset).unwrap();
        let sub = lam.marginalize(&subset).unwrap();
        let p_identity = eigs_to_pauli_rates(&sub).unwrap().values()[0];
        let d = (1u64 << subset.len()) as f64;
        prop_assert!((f.f - (d * p_identity + 1.0) / (d + 1.0)).abs() <= 1e-12);
    }

    #[test]
    fn grf_is_normalised_markov_and_idempotent((chain, global) in (3usize..=10).prop_flat_map(chain_and_truth)) {
        let k = global.k();
        let model = fit_grf(&global, &chain).unwrap();
        let total: f64 = (0..1usize << k)
            .map(|i| grf_eval(&model, &(0..k).map(|b| (i >> b) & 1 == 1).collect::<Vec<_>>()).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let dense = grf_to_dense(&model).unwrap();
        for (i, sep) in chain.separators().iter().enumerate() {
            let mut left: Vec<usize> = chain.cliques()[..=i].iter().flatten().copied().filter(|s| !sep.contains(s)).collect();
            let mut right: Vec<usize> = chain.cliques()[i + 1..].iter().flatten().copied().filter(|s| !sep.contains(s)).collect();
            left.sort_unstable();
            left.dedup();
            right.sort_unstable();
            right.dedup();
            if !left.is_empty() && !right.is_empty() {
                prop_assert!(conditional_mutual_information(&dense, &left, &right, sep).unwrap().abs() <= 1e-9);
            }
        }
        let again = fit_grf(&dense, &chain).unwrap();
        for (a, b) in model.clique_marginals.iter().zip(&again.clique_marginals) {
            prop_assert!(max_abs_diff(a.values(), b.values()) <= 1e-6);
        }
    }

    #[test]
    fn streaming_distances_track_dense(
        (chain, p) in (4usize..=8).prop_flat_map(chain_and_truth),
        seed in any::<u64>(),
    ) {
        let k = p.k();
        let q = ProbVector::new(p.layout().clone(), {
            let mut v: Vec<f64> = p.values().iter().enumerate().map(|(i, x)| x * (1.0 + 0.5 * ((i * 7 + 3) % 5) as f64)).collect();
            let s: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= s);
            v
        }).unwrap();
        let (mp, mq) = (fit_grf(&p, &chain).unwrap(), fit_grf(&q, &chain).unwrap());
        let exact = chain_distances(&mp, &mq, 0, seed).unwrap();
        prop_assert!(exact.exact && k <= 16);
        let (dp, dq) = (grf_to_dense(&mp).unwrap(), grf_to_dense(&mq).unwrap());
        prop_assert!((exact.jsd - jsd(&dp, &dq, LogBase::Two).unwrap()).abs() <= 1e-12);
        let mc = chain_distances_mc(&mp, &mq, 20_000, seed).unwrap();
        prop_assert!((mc.hellinger - exact.hellinger).abs() <= 1e-12);
        prop_assert!((mc.jsd - exact.jsd).abs() <= 6.0 * mc.jsd_se + 1e-9, "{} vs {} ± {}", mc.jsd, exact.jsd, mc.jsd_se);
        prop_assert!((mc.tvd - exact.tvd).abs() <= 6.0 * mc.tvd_se + 1e-9);
    }

    #[test]
    fn percentile_intervals_nest(values in prop::collection::vec(-5.0f64..5.0, 10..400), a in 0.05f64..0.9, b in 0.05f64..0.9) {
        let (lo, hi) = (a.min(b), a.max(b));
        let narrow = percentile_ci(&values, lo).unwrap();
        let wide = percentile_ci(&values, hi).unwrap();
        prop_assert!(wide.lo <= narrow.lo && narrow.hi <= wide.hi);
    }
}

#[test]
fn observed_and_averaged_correlations_share_signs() {
    for seed in 0..20u64 {
        let t: Vec<(f64, f64, f64)> = (0..4).map(|q| {
            let e = 0.01 + 0.01 * ((seed + q) % 3) as f64;
            (e / 2.0, e / 3.0, e / 6.0)
        }).collect();
        let base = PauliErrorRates::product(&t).unwrap();
        let pair: Vec<f64> = (0..16).map(|j| if j == 0 { 0.97 } else { 0.002 }).collect();
        let a = (seed % 4) as usize;
        let b = ((seed + 1 + seed / 4) % 4) as usize;
        let rates = if a == b { base } else { compose_pair_channel(&base, a, b, &pair).unwrap() };
        let lam = clifford_average(&NoiseModel::explicit(rates), &PartitionLayout::singletons(4)).unwrap();
        let observed = lam.to_probabilities().unwrap();
        let averaged = ProbVector::new(observed.layout().clone(), observed_to_averaged_rates(&observed).unwrap()).unwrap();
        let (co, ca) = (correlation_matrix(&observed).matrix, correlation_matrix(&averaged).matrix);
        for i in 0..4 {
            for j in 0..4 {
                if co[i][j].abs() > 1e-9 || ca[i][j].abs() > 1e-9 {
                    assert_eq!(co[i][j].signum(), ca[i][j].signum(), "seed {seed} cell ({i},{j}): {} vs {}", co[i][j], ca[i][j]);
                }
            }
        }
    }
}

#[test]
fn ensembles_do_not_depend_on_thread_count() {
    let layout = PartitionLayout::singletons(3);
    let model = NoiseModel::per_qubit(vec![(0.01, 0.0, 0.01), (0.0, 0.02, 0.0), (0.005, 0.005, 0.005)]).unwrap();
    let schedule = Schedule { lengths: vec![1, 4, 12], sequences_per_length: 4, shots: 500, seed: 3, mode: SamplingMode::Dense };
    let rec = sample_experiment(&model, &SpamModel::ideal(3), &layout, &schedule).unwrap();
    let opts = BootstrapOptions { n_reps: 64, seed: 11, fit: FitOptions::default(), ..BootstrapOptions::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| ensemble(&rec, &opts).unwrap())
    };
    let (one, many) = (run(1), run(6));
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&many).unwrap());
}
