//! Pauli labels, Walsh–Hadamard transforms and the rate/eigenvalue
//! conversions.

use noisecorr::dist::{
    eigs_to_pauli_rates, inverse_wht, observed_to_averaged_rates, pauli_index, pauli_label, parse_pauli_label,
    wht, PauliErrorRates,
};
use noisecorr::sim::{clifford_average, NoiseModel};
use noisecorr::PartitionLayout;

fn main() -> noisecorr::Result<()> {
    let label = "XZ";
    let idx = pauli_index(&parse_pauli_label(label)?);
    println!("{label} has index {idx}; index 6 is {}", pauli_label(6, 2));

    let v = vec![0.9, 0.05, 0.03, 0.02];
    let t = wht(&v)?;
    println!("wht {v:?} -> {t:?} -> {:?}", inverse_wht(&t)?);

    let rates = PauliErrorRates::product(&[(0.01, 0.02, 0.005), (0.003, 0.0, 0.012)])?;
    println!("rate of {label}: {:.3e}", rates.rate(label)?);
    let lambda = clifford_average(&NoiseModel::explicit(rates), &PartitionLayout::singletons(2))?;
    let observed = lambda.to_probabilities()?;
    println!("averaged eigenvalues {:?}", lambda.values());
    println!("observed rates       {:?}", observed.values());
    println!("averaged Pauli rates {:?}", observed_to_averaged_rates(&observed)?);
    println!("twirled channel      {:?}", eigs_to_pauli_rates(&lambda)?.values());
    Ok(())
}
