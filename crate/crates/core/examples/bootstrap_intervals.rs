//! Bootstrap confidence intervals for eigenvalues, error rates, correlations
//! and the JSD to a GRF approximation.

use noisecorr::bootstrap::{correlation_matrix_ci, ensemble, jsd_ci, BootstrapOptions, JsdMode, ONE_SIGMA};
use noisecorr::grf::JunctionChain;
use noisecorr::sim::{sample_experiment, NoiseModel, SamplingMode, Schedule, SpamModel};
use noisecorr::PartitionLayout;

fn main() -> noisecorr::Result<()> {
    let layout = PartitionLayout::singletons(3);
    let model = NoiseModel::per_qubit(vec![(0.006, 0.004, 0.01), (0.008, 0.002, 0.002), (0.004, 0.004, 0.004)])?;
    let spam = SpamModel::new(vec![0.01; 3], vec![0.02; 3])?;
    let schedule = Schedule { lengths: vec![1, 4, 8, 16], sequences_per_length: 20, shots: 500, seed: 3, mode: SamplingMode::Dense };
    let record = sample_experiment(&model, &spam, &layout, &schedule)?;

    let ens = ensemble(&record, &BootstrapOptions { n_reps: 300, seed: 42, ..Default::default() })?;
    let summary = ens.summary(ONE_SIGMA)?;
    println!("{}", serde_json::to_string_pretty(&summary.eigenvalues).expect("serialisable"));

    let (lo, hi) = correlation_matrix_ci(&ens, ONE_SIGMA)?;
    println!("corr(0,1) in [{:.4}, {:.4}]", lo[0][1], hi[0][1]);

    let chain = JunctionChain::sliding(3, 2)?;
    // resampling noise adds spurious structure to every replicate, so the
    // replicate JSDs sit above the point estimate and may exclude it
    let jsd = jsd_ci(&ens, &chain, JsdMode::Both, ONE_SIGMA)?;
    println!("JSD to chain GRF: {:.3e} in [{:.3e}, {:.3e}]", jsd.point, jsd.lo, jsd.hi);
    Ok(())
}
