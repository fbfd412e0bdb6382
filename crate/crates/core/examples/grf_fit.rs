//! Fit Gibbs random fields on junction chains of different widths and
//! compare them with the full distribution.

use noisecorr::analysis::LogBase;
use noisecorr::grf::{compare_grf, fit_grf, grf_eval, JunctionChain};
use noisecorr::sim::{clifford_average, RandomNoise};
use noisecorr::PartitionLayout;

fn main() -> noisecorr::Result<()> {
    let n = 6;
    let noise = RandomNoise {
        n_qubits: n,
        error_range: (0.005, 0.02),
        correlated_pairs: vec![(0, 1), (2, 5)],
        correlated_strength: 0.02,
    };
    let lambda = clifford_average(&noise.build(11)?, &PartitionLayout::singletons(n))?;
    let global = lambda.to_probabilities()?;

    for width in [1, 2, 3] {
        let chain = JunctionChain::sliding(n, width)?;
        let model = fit_grf(&global, &chain)?;
        let jsd = compare_grf(&global, &model, LogBase::Two)?;
        let p0 = grf_eval(&model, &[false; 6])?;
        println!("cliques of {width}: JSD = {jsd:.3e}, P(no error) = {p0:.6} (true {:.6})", global.values()[0]);
    }
    // the long-range pair (2, 5) only enters once a clique spans it
    let chain = JunctionChain::new(vec![vec![0, 1], vec![1, 2, 5], vec![2, 3, 5], vec![3, 4, 5]], n)?;
    let model = fit_grf(&global, &chain)?;
    println!("custom chain: JSD = {:.3e}", compare_grf(&global, &model, LogBase::Two)?);
    Ok(())
}
