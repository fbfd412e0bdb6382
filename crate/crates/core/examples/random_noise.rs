//! Random ground-truth models: per-qubit, with correlated pairs, and the
//! chain form used for large registers.

use noisecorr::analysis::correlation_matrix;
use noisecorr::sim::{clifford_average, NoiseSpec, RandomNoise};
use noisecorr::PartitionLayout;

fn main() -> noisecorr::Result<()> {
    let mut noise = RandomNoise { n_qubits: 4, error_range: (0.002, 0.015), correlated_pairs: vec![], correlated_strength: 0.0 };
    for (pairs, strength) in [(vec![], 0.0), (vec![(0, 3)], 0.02)] {
        noise.correlated_pairs = pairs;
        noise.correlated_strength = strength;
        let lambda = clifford_average(&noise.build(5)?, &PartitionLayout::singletons(4))?;
        let corr = correlation_matrix(&lambda.to_probabilities()?);
        println!("pairs {:?}: corr(0,3) = {:.4}", noise.correlated_pairs, corr.matrix[0][3]);
    }
    let big = RandomNoise { n_qubits: 14, correlated_pairs: vec![(3, 4), (9, 10)], correlated_strength: 0.015, ..noise };
    let model = big.build(14)?;
    println!("14 qubits as chain: {}", matches!(model.spec, NoiseSpec::Chain(_)));
    Ok(())
}
