//! Correlation, mutual information and fidelities of a distribution with one
//! injected two-qubit correlation.

use noisecorr::analysis::{correlation_matrix, fidelity_from_eigs, mutual_information};
use noisecorr::dist::PauliErrorRates;
use noisecorr::sim::{clifford_average, inject_correlation, NoiseModel};
use noisecorr::PartitionLayout;

fn main() -> noisecorr::Result<()> {
    let base = PauliErrorRates::product(&[(0.01, 0.004, 0.006), (0.003, 0.008, 0.004), (0.005, 0.005, 0.005)])?;
    // extra correlated Z⊗Z error between qubits 0 and 2
    let rates = inject_correlation(&base, "ZIZ", 0.01)?;
    let layout = PartitionLayout::singletons(3);
    let lambda = clifford_average(&NoiseModel::explicit(rates), &layout)?;
    let observed = lambda.to_probabilities()?;

    let corr = correlation_matrix(&observed);
    println!("correlation matrix:\n{}", corr.to_csv());
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let mi = mutual_information(&observed, &[a], &[b])?;
        println!("I({a};{b}) = {:.3e} nats ({:.3e} bits)", mi, mi / std::f64::consts::LN_2);
    }
    for subset in [vec![0], vec![1], vec![2], vec![0, 1, 2]] {
        let f = fidelity_from_eigs(&lambda, &subset)?;
        println!("subset {subset:?}: F = {:.6}, r = {:.3e}", f.f, f.r);
    }
    Ok(())
}
