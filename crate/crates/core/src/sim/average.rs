//! Clifford averaging of Pauli channels over a partition.

use crate::dist::{pauli_index, EigenvalueVector, Pauli, PauliErrorRates};
use crate::error::{Error, Result};
use crate::layout::PartitionLayout;

use super::model::{NoiseModel, NoiseSpec};

/// Averaged eigenvalue of each irrep label `{I, Σ}^k` of `layout` after
/// twirling every set by its own Clifford group.
///
/// A `Σ` on a single qubit averages the three non-identity eigenvalues; on a
/// pair it averages the fifteen non-identity pair eigenvalues; mixed labels
/// average over the products of those sectors (weights `3` and `15` per set).
pub fn clifford_average(model: &NoiseModel, layout: &PartitionLayout) -> Result<EigenvalueVector> {
    model.validate()?;
    if layout.n_qubits() > model.n_qubits {
        return Err(Error::Shape(format!(
            "layout spans {} qubits, model has {}",
            layout.n_qubits(),
            model.n_qubits
        )));
    }
    let dim = layout.dim()?;
    if let NoiseSpec::PerQubit(triples) = &model.spec {
        let factors = layout
            .sets()
            .iter()
            .map(|set| match set.as_slice() {
                [q] => {
                    let (x, y, z) = triples[*q];
                    let sigma = 1.0 - 4.0 / 3.0 * (x + y + z);
                    Ok(sigma)
                }
                _ => {
                    let rates = PauliErrorRates::product(&[triples[set[0]], triples[set[1]]])?;
                    let mut lam = rates.eigenvalues();
                    if let Some(pn) = &model.pair_noise {
                        let pn = PauliErrorRates::new(2, pn.clone())?.eigenvalues();
                        lam.iter_mut().zip(&pn).for_each(|(a, b)| *a *= b);
                    }
                    Ok(lam[1..].iter().sum::<f64>() / 15.0)
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        let values = (0..dim)
            .map(|b| {
                factors
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (b >> i) & 1 == 1)
                    .map(|(_, f)| f)
                    .product()
            })
            .collect();
        return EigenvalueVector::new(layout.clone(), values);
    }

    // general path: eigenvalues of the Pauli marginal on the layout's qubits
    let mut qubits: Vec<usize> = layout.sets().iter().flatten().copied().collect();
    qubits.sort_unstable();
    let local = |q: usize| qubits.binary_search(&q).expect("qubit in layout");
    let rates = model.marginal_rates(&qubits)?;
    let r = qubits.len();
    let mut lam = rates.eigenvalues();
    if let Some(pn) = &model.pair_noise {
        let pn = PauliErrorRates::new(2, pn.clone())?.eigenvalues();
        for set in layout.sets().iter().filter(|s| s.len() == 2) {
            let (a, b) = (local(set[0]), local(set[1]));
            for (i, l) in lam.iter_mut().enumerate() {
                let pa = Pauli::from_code(i >> (2 * a));
                let pb = Pauli::from_code(i >> (2 * b));
                *l *= pn[pauli_index(&[pa, pb])];
            }
        }
    }
    let set_digits: Vec<Vec<usize>> = layout
        .sets()
        .iter()
        .map(|s| s.iter().map(|&q| local(q)).collect())
        .collect();
    let mut sums = vec![0.0; dim];
    let mut counts = vec![0usize; dim];
    for (i, l) in lam.iter().enumerate() {
        let label = set_digits.iter().enumerate().fold(0, |acc, (s, digits)| {
            let on = digits.iter().any(|&d| (i >> (2 * d)) & 3 != 0);
            acc | (usize::from(on) << s)
        });
        sums[label] += l;
        counts[label] += 1;
    }
    debug_assert_eq!(counts.iter().sum::<usize>(), 1 << (2 * r));
    let values = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    EigenvalueVector::new(layout.clone(), values)
}
