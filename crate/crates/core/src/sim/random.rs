//! Random ground-truth models for simulation studies.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{PauliErrorRates, DEFAULT_SMALL_N_CAP};
use crate::error::{Error, Result};
use crate::rng::stream;

use super::model::{NoiseModel, PauliChain};

/// Single-qubit Pauli product up to phase, on codes `I=0, X=1, Y=2, Z=3`.
#[inline]
pub(crate) fn compose_codes(a: usize, b: usize) -> usize {
    // symplectic (x, z) bits: X=(1,0) Y=(1,1) Z=(0,1)
    const TO: [usize; 4] = [0b00, 0b01, 0b11, 0b10];
    const FROM: [usize; 4] = [0, 1, 3, 2];
    FROM[TO[a] ^ TO[b]]
}

/// Follows `rates` by an extra two-qubit channel on qubits `(a, b)`;
/// `pair[j]` is the rate of the pair Pauli with digit 0 on `a`.
pub fn compose_pair_channel(rates: &PauliErrorRates, a: usize, b: usize, pair: &[f64]) -> Result<PauliErrorRates> {
    let n = rates.n_qubits();
    if a >= n || b >= n || a == b {
        return Err(Error::Model(format!("pair ({a}, {b}) invalid for {n} qubits")));
    }
    PauliErrorRates::new(2, pair.to_vec())?;
    let mut out = vec![0.0; rates.values().len()];
    for (i, &v) in rates.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (pa, pb) = ((i >> (2 * a)) & 3, (i >> (2 * b)) & 3);
        let rest = i & !(3 << (2 * a)) & !(3 << (2 * b));
        for (j, &w) in pair.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let na = compose_codes(pa, j & 3);
            let nb = compose_codes(pb, j >> 2);
            out[rest | (na << (2 * a)) | (nb << (2 * b))] += v * w;
        }
    }
    let s: f64 = out.iter().sum();
    PauliErrorRates::new(n, out.into_iter().map(|v| v / s).collect())
}

/// Independent qubits with total error per qubit uniform in `error_range`,
/// split at random over X, Y and Z, optionally followed by correlated
/// two-qubit errors (uniform over the 15 non-identity pair Paulis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomNoise {
    pub n_qubits: usize,
    pub error_range: (f64, f64),
    #[serde(default)]
    pub correlated_pairs: Vec<(usize, usize)>,
    /// Probability per layer of a correlated error on each listed pair.
    #[serde(default)]
    pub correlated_strength: f64,
}

impl RandomNoise {
    pub fn build(&self, seed: u64) -> Result<NoiseModel> {
        let (lo, hi) = self.error_range;
        if !(0.0 <= lo && lo <= hi && hi < 0.75) {
            return Err(Error::Config(format!("error_range {:?} must satisfy 0 <= lo <= hi < 0.75", self.error_range)));
        }
        if !(0.0..1.0).contains(&self.correlated_strength) {
            return Err(Error::Config("correlated_strength must lie in [0, 1)".into()));
        }
        if self.n_qubits == 0 {
            return Err(Error::Config("n_qubits must be positive".into()));
        }
        let triples = self.draw_triples(seed);
        if self.correlated_pairs.is_empty() || self.correlated_strength == 0.0 {
            return NoiseModel::per_qubit(triples);
        }
        let c = self.correlated_strength;
        let pair: Vec<f64> = (0..16).map(|j| if j == 0 { 1.0 - c } else { c / 15.0 }).collect();
        if self.n_qubits > DEFAULT_SMALL_N_CAP {
            return self.chain_model(&triples, &pair);
        }
        let mut rates = PauliErrorRates::product(&triples)?;
        for &(a, b) in &self.correlated_pairs {
            rates = compose_pair_channel(&rates, a, b, &pair)?;
        }
        let model = NoiseModel::explicit(rates);
        model.validate()?;
        Ok(model)
    }

    fn draw_triples(&self, seed: u64) -> Vec<(f64, f64, f64)> {
        let (lo, hi) = self.error_range;
        let mut rng = stream(seed, &[0x5eed_0001]);
        (0..self.n_qubits)
            .map(|_| {
                let e = rng.random_range(lo..=hi);
                let w: [f64; 3] = [rng.random::<f64>() + 0.1, rng.random::<f64>() + 0.1, rng.random::<f64>() + 0.1];
                let s = w[0] + w[1] + w[2];
                (e * w[0] / s, e * w[1] / s, e * w[2] / s)
            })
            .collect()
    }

    /// Large registers: disjoint neighbouring pairs keep the label
    /// distribution a Markov chain, so no `4^n` table is needed.
    fn chain_model(&self, triples: &[(f64, f64, f64)], pair: &[f64]) -> Result<NoiseModel> {
        let mut partner = vec![None; self.n_qubits];
        for &(a, b) in &self.correlated_pairs {
            let (a, b) = (a.min(b), a.max(b));
            if b >= self.n_qubits || b != a + 1 || partner[a].is_some() || partner[b].is_some() {
                return Err(Error::Config(format!(
                    "above {DEFAULT_SMALL_N_CAP} qubits correlated pairs must be disjoint neighbours, got ({a}, {b})"
                )));
            }
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        let joint = |q: usize| compose_pair_channel(&PauliErrorRates::product(&[triples[q], triples[q + 1]])?, 0, 1, pair);
        // marginal of qubit q, including its share of a pair that starts at q
        let marginal = |q: usize| -> Result<[f64; 4]> {
            if partner[q] == Some(q + 1) {
                let mut m = [0.0; 4];
                for (i, v) in joint(q)?.values().iter().enumerate() {
                    m[i & 3] += v;
                }
                Ok(m)
            } else {
                let (x, y, z) = triples[q];
                Ok([1.0 - x - y - z, x, y, z])
            }
        };
        let mut transitions = Vec::with_capacity(self.n_qubits - 1);
        for q in 0..self.n_qubits - 1 {
            if partner[q] == Some(q + 1) {
                let j = joint(q)?;
                let mut t = [[0.0; 4]; 4];
                for (a, row) in t.iter_mut().enumerate() {
                    let total: f64 = (0..4).map(|b| j.values()[a | (b << 2)]).sum();
                    for (b, v) in row.iter_mut().enumerate() {
                        *v = j.values()[a | (b << 2)] / total;
                    }
                }
                transitions.push(t);
            } else {
                transitions.push([marginal(q + 1)?; 4]);
            }
        }
        let initial = marginal(0)?;
        NoiseModel::chain(PauliChain { initial, transitions })
    }
}
