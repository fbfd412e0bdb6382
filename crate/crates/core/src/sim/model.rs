//! Ground-truth noise models and SPAM.

use serde::{Deserialize, Serialize};

use crate::dist::{PauliErrorRates, DEFAULT_SMALL_N_CAP};
use crate::error::{Error, Result};

/// Markov chain over per-qubit Pauli labels: `initial` is the distribution
/// of qubit 0 and `transitions[q][a][b]` is `P(P_{q+1} = b | P_q = a)`.
///
/// Used for registers too large for an explicit `4^n` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliChain {
    pub initial: [f64; 4],
    pub transitions: Vec<[[f64; 4]; 4]>,
}

impl PauliChain {
    pub fn n_qubits(&self) -> usize {
        self.transitions.len() + 1
    }

    fn validate(&self) -> Result<()> {
        check_row(&self.initial, "chain initial distribution")?;
        for (q, t) in self.transitions.iter().enumerate() {
            for row in t {
                check_row(row, &format!("chain transition {q}"))?;
            }
        }
        Ok(())
    }

    /// Joint distribution of the Paulis on `qubits` (ascending), as a
    /// `4^r` vector in the local ordering (`qubits[j]` ↔ base-4 digit `j`).
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        let r = qubits.len();
        if r > DEFAULT_SMALL_N_CAP {
            return Err(Error::TooLarge { what: "chain marginal", n: r, cap: DEFAULT_SMALL_N_CAP });
        }
        if qubits.windows(2).any(|w| w[0] >= w[1]) || qubits.last().is_some_and(|&q| q >= self.n_qubits()) {
            return Err(Error::Argument(format!("invalid qubit list {qubits:?}")));
        }
        // forward pass carrying the joint over selected qubits seen so far
        // together with the current qubit's label
        let mut joint: Vec<[f64; 4]> = vec![self.initial];
        let mut digits = 0usize;
        for q in 0..self.n_qubits() {
            if q > 0 {
                let t = &self.transitions[q - 1];
                joint = joint
                    .iter()
                    .map(|cur| {
                        let mut next = [0.0; 4];
                        for a in 0..4 {
                            for b in 0..4 {
                                next[b] += cur[a] * t[a][b];
                            }
                        }
                        next
                    })
                    .collect();
            }
            if qubits.contains(&q) {
                // split on current label: new digit at position `digits`
                let mut expanded = vec![[0.0; 4]; joint.len() * 4];
                for (idx, cur) in joint.iter().enumerate() {
                    for a in 0..4 {
                        expanded[idx + (a << (2 * digits))][a] = cur[a];
                    }
                }
                joint = expanded;
                digits += 1;
            }
        }
        Ok(joint.iter().map(|cur| cur.iter().sum()).collect())
    }
}

fn check_row(row: &[f64; 4], what: &str) -> Result<()> {
    if row.iter().any(|v| !(*v >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Model(format!("{what} is not a probability vector: {row:?}")));
    }
    Ok(())
}

/// How the per-layer Pauli error distribution is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSpec {
    /// Independent qubits; entry `q` is `(p_x, p_y, p_z)` of qubit `q`.
    PerQubit(Vec<(f64, f64, f64)>),
    /// Full `4^n` table for small registers.
    Explicit(PauliErrorRates),
    /// Markov chain over Pauli labels for large registers.
    Chain(PauliChain),
}

/// Per-layer Pauli noise of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub n_qubits: usize,
    pub spec: NoiseSpec,
    /// Extra two-qubit Pauli error rates (16 entries, labels over the pair
    /// with its first qubit as digit 0) applied to every two-qubit set of the
    /// layout in every layer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_noise: Option<Vec<f64>>,
}

impl NoiseModel {
    pub fn per_qubit(triples: Vec<(f64, f64, f64)>) -> Result<Self> {
        let model = Self { n_qubits: triples.len(), spec: NoiseSpec::PerQubit(triples), pair_noise: None };
        model.validate()?;
        Ok(model)
    }

    pub fn explicit(rates: PauliErrorRates) -> Self {
        Self { n_qubits: rates.n_qubits(), spec: NoiseSpec::Explicit(rates), pair_noise: None }
    }

    pub fn chain(chain: PauliChain) -> Result<Self> {
        let model = Self { n_qubits: chain.n_qubits(), spec: NoiseSpec::Chain(chain), pair_noise: None };
        model.validate()?;
        Ok(model)
    }

    /// Noiseless register.
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            spec: NoiseSpec::PerQubit(vec![(0.0, 0.0, 0.0); n_qubits]),
            pair_noise: None,
        }
    }

    pub fn with_pair_noise(mut self, rates: Vec<f64>) -> Result<Self> {
        self.pair_noise = Some(rates);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.spec {
            NoiseSpec::PerQubit(triples) => {
                if triples.len() != self.n_qubits {
                    return Err(Error::Model(format!(
                        "{} triples for {} qubits",
                        triples.len(),
                        self.n_qubits
                    )));
                }
                for (q, &(x, y, z)) in triples.iter().enumerate() {
                    if x < 0.0 || y < 0.0 || z < 0.0 || x + y + z >= 1.0 || !(x + y + z).is_finite() {
                        return Err(Error::Model(format!(
                            "qubit {q}: invalid Pauli triple ({x}, {y}, {z})"
                        )));
                    }
                }
            }
            NoiseSpec::Explicit(rates) => {
                if rates.n_qubits() != self.n_qubits {
                    return Err(Error::Model("explicit rates do not match n_qubits".into()));
                }
                // re-check in case the table was deserialised
                PauliErrorRates::new(rates.n_qubits(), rates.values().to_vec())?;
            }
            NoiseSpec::Chain(chain) => {
                if chain.n_qubits() != self.n_qubits {
                    return Err(Error::Model("chain length does not match n_qubits".into()));
                }
                chain.validate()?;
            }
        }
        if let Some(pn) = &self.pair_noise {
            PauliErrorRates::new(2, pn.clone())
                .map_err(|e| Error::Model(format!("pair noise: {e}")))?;
        }
        Ok(())
    }

    /// Pauli error distribution restricted to `qubits` (ascending), in the
    /// local ordering.
    pub(crate) fn marginal_rates(&self, qubits: &[usize]) -> Result<PauliErrorRates> {
        let r = qubits.len();
        let values = match &self.spec {
            NoiseSpec::PerQubit(triples) => {
                let sub: Vec<_> = qubits.iter().map(|&q| triples[q]).collect();
                return PauliErrorRates::product(&sub);
            }
            NoiseSpec::Explicit(rates) => {
                if r > DEFAULT_SMALL_N_CAP {
                    return Err(Error::TooLarge { what: "Pauli marginal", n: r, cap: DEFAULT_SMALL_N_CAP });
                }
                let mut out = vec![0.0; 1 << (2 * r)];
                for (i, v) in rates.values().iter().enumerate() {
                    let j = qubits
                        .iter()
                        .enumerate()
                        .fold(0, |acc, (d, &q)| acc | (((i >> (2 * q)) & 3) << (2 * d)));
                    out[j] += v;
                }
                out
            }
            NoiseSpec::Chain(chain) => chain.marginal(qubits)?,
        };
        // re-normalise away accumulated rounding
        let sum: f64 = values.iter().sum();
        PauliErrorRates::new(r, values.into_iter().map(|v| v / sum).collect())
    }
}

/// State-preparation and readout bit-flip probabilities per qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpamModel {
    pub prep_flip: Vec<f64>,
    pub readout_flip: Vec<f64>,
}

impl SpamModel {
    pub fn new(prep_flip: Vec<f64>, readout_flip: Vec<f64>) -> Result<Self> {
        let spam = Self { prep_flip, readout_flip };
        spam.validate()?;
        Ok(spam)
    }

    /// No SPAM error on `n` qubits.
    pub fn ideal(n_qubits: usize) -> Self {
        Self { prep_flip: vec![0.0; n_qubits], readout_flip: vec![0.0; n_qubits] }
    }

    pub fn n_qubits(&self) -> usize {
        self.prep_flip.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.prep_flip.len() != self.readout_flip.len() {
            return Err(Error::Model("prep and readout lists differ in length".into()));
        }
        for &e in self.prep_flip.iter().chain(&self.readout_flip) {
            if !(0.0..0.5).contains(&e) {
                return Err(Error::Model(format!("SPAM flip probability {e} outside [0, 0.5)")));
            }
        }
        Ok(())
    }

    /// Attenuation of the Z-type eigenvalue of one qubit.
    pub fn qubit_attenuation(&self, q: usize) -> f64 {
        (1.0 - 2.0 * self.prep_flip[q]) * (1.0 - 2.0 * self.readout_flip[q])
    }

    /// Attenuation of the `Σ` label of a set: the single-qubit factor, or for
    /// a pair the mean over its three Z-type operators.
    pub fn set_attenuation(&self, set: &[usize]) -> f64 {
        match set {
            [q] => self.qubit_attenuation(*q),
            [a, b] => {
                let (x, y) = (self.qubit_attenuation(*a), self.qubit_attenuation(*b));
                (x + y + x * y) / 3.0
            }
            _ => unreachable!("sets hold one or two qubits"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(NoiseModel::per_qubit(vec![(0.5, 0.3, 0.3)]).is_err());
        assert!(NoiseModel::per_qubit(vec![(-0.1, 0.0, 0.0)]).is_err());
        assert!(NoiseModel::per_qubit(vec![(0.01, 0.02, 0.03)]).is_ok());
        assert!(SpamModel::new(vec![0.5], vec![0.0]).is_err());
        assert!(SpamModel::new(vec![0.1], vec![0.0, 0.0]).is_err());
        assert!(NoiseModel::identity(2).with_pair_noise(vec![0.5; 16]).is_err());
    }

    #[test]
    fn chain_marginal_matches_enumeration() {
        let t = [
            [0.9, 0.04, 0.03, 0.03],
            [0.5, 0.3, 0.1, 0.1],
            [0.6, 0.1, 0.2, 0.1],
            [0.7, 0.1, 0.1, 0.1],
        ];
        let chain = PauliChain { initial: [0.91, 0.03, 0.03, 0.03], transitions: vec![t; 3] };
        // brute-force joint over 4 qubits
        let mut joint = vec![0.0; 256];
        for (i, slot) in joint.iter_mut().enumerate() {
            let d: Vec<usize> = (0..4).map(|q| (i >> (2 * q)) & 3).collect();
            *slot = chain.initial[d[0]] * t[d[0]][d[1]] * t[d[1]][d[2]] * t[d[2]][d[3]];
        }
        let m = chain.marginal(&[1, 3]).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let brute: f64 = (0..256)
                    .filter(|i| (i >> 2) & 3 == a && (i >> 6) & 3 == b)
                    .map(|i| joint[i])
                    .sum();
                assert!((m[a + 4 * b] - brute).abs() < 1e-14);
            }
        }
        assert!(chain.marginal(&[3, 1]).is_err());
    }

    #[test]
    fn spam_attenuation() {
        let spam = SpamModel::new(vec![0.1, 0.0], vec![0.05, 0.2]).unwrap();
        assert!((spam.qubit_attenuation(0) - 0.8 * 0.9).abs() < 1e-15);
        let (x, y) = (0.72, 0.6);
        assert!((spam.set_attenuation(&[0, 1]) - (x + y + x * y) / 3.0).abs() < 1e-15);
    }
}
