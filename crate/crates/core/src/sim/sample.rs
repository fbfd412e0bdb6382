//! Sequence outcome distributions and shot sampling.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{inverse_transform, EigenvalueVector, PauliErrorRates, ProbVector};
use crate::error::{Error, Result};
use crate::layout::PartitionLayout;
use crate::rng::{multinomial, stream};

use super::average::clifford_average;
use super::model::{NoiseModel, NoiseSpec, SpamModel};
use super::random::compose_codes;
use super::record::{CountTable, ExperimentRecord, Outcome};

/// Largest `k` for which the dense sampler is chosen automatically.
pub const DENSE_SAMPLING_MAX_K: usize = 16;

/// Distribution of observed error patterns after a length-`m` sequence:
/// the inverse transform of `A ∘ λ^{∘m}`, with `A` the SPAM attenuation.
pub fn sequence_distribution(lambda: &EigenvalueVector, spam: &SpamModel, m: i64) -> Result<ProbVector> {
    if m < 0 {
        return Err(Error::Argument(format!("sequence length {m} is negative")));
    }
    let layout = lambda.layout();
    check_spam(spam, layout)?;
    let atten: Vec<f64> = layout.sets().iter().map(|s| spam.set_attenuation(s)).collect();
    let decayed: Vec<f64> = lambda
        .values()
        .iter()
        .enumerate()
        .map(|(b, l)| {
            let a: f64 = atten.iter().enumerate().filter(|(i, _)| (b >> i) & 1 == 1).map(|(_, a)| a).product();
            a * l.powi(m as i32)
        })
        .collect();
    let raw = inverse_transform(layout, &decayed);
    if let Some(v) = raw.iter().find(|v| **v < -1e-12) {
        return Err(Error::Distribution(format!(
            "eigenvalues give a negative outcome probability {v}"
        )));
    }
    if raw.iter().any(|v| *v < 0.0) {
        ProbVector::from_projection(layout.clone(), &raw)
    } else {
        ProbVector::new(layout.clone(), raw)
    }
}

fn check_spam(spam: &SpamModel, layout: &PartitionLayout) -> Result<()> {
    spam.validate()?;
    if spam.n_qubits() < layout.n_qubits() {
        return Err(Error::Model(format!(
            "SPAM model covers {} qubits, layout needs {}",
            spam.n_qubits(),
            layout.n_qubits()
        )));
    }
    Ok(())
}

/// How [`sample_experiment`] draws outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Dense multinomial when `k` is small, shot-level otherwise.
    #[default]
    Auto,
    /// Multinomial over the `2^k` pattern distribution of each length.
    Dense,
    /// Per-shot Monte Carlo of Pauli errors through twirled layers; works
    /// for registers of any size.
    Shots,
}

/// Parameters of a simulated experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub lengths: Vec<u32>,
    pub sequences_per_length: usize,
    pub shots: u64,
    pub seed: u64,
    #[serde(default)]
    pub mode: SamplingMode,
}

/// Simulates a twirled benchmarking experiment.
///
/// Every `(m, sequence)` pair draws from its own random stream, so the record
/// is identical for any thread count.
pub fn sample_experiment(
    model: &NoiseModel,
    spam: &SpamModel,
    layout: &PartitionLayout,
    schedule: &Schedule,
) -> Result<ExperimentRecord> {
    if schedule.shots == 0 {
        return Err(Error::Argument("shots must be at least 1".into()));
    }
    if schedule.lengths.is_empty() {
        return Err(Error::Argument("no sequence lengths".into()));
    }
    if schedule.sequences_per_length == 0 {
        return Err(Error::Argument("sequences_per_length must be at least 1".into()));
    }
    let mut lengths = schedule.lengths.clone();
    lengths.sort_unstable();
    if lengths.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Argument("sequence lengths must be distinct".into()));
    }
    check_spam(spam, layout)?;
    model.validate()?;
    if layout.n_qubits() > model.n_qubits {
        return Err(Error::Shape("layout larger than the noise model".into()));
    }
    let layout = layout.clone().with_n_qubits(model.n_qubits)?;

    let dense = match schedule.mode {
        SamplingMode::Dense => Some(clifford_average(model, &layout)?),
        SamplingMode::Shots => None,
        SamplingMode::Auto if layout.k() <= DENSE_SAMPLING_MAX_K => clifford_average(model, &layout).ok(),
        SamplingMode::Auto => None,
    };

    let tasks: Vec<(u32, usize)> = lengths
        .iter()
        .flat_map(|&m| (0..schedule.sequences_per_length).map(move |s| (m, s)))
        .collect();

    let tables: Vec<CountTable> = match &dense {
        Some(lambda) => {
            let dists = lengths
                .iter()
                .map(|&m| Ok((m, sequence_distribution(lambda, spam, m as i64)?)))
                .collect::<Result<BTreeMap<u32, ProbVector>>>()?;
            tasks
                .par_iter()
                .map(|&(m, s)| {
                    let mut rng = stream(schedule.seed, &[m as u64, s as u64]);
                    dense_table(&mut rng, &layout, &dists[&m], schedule.shots)
                })
                .collect()
        }
        None => {
            let sampler = ShotSampler::new(model, spam, &layout)?;
            tasks
                .par_iter()
                .map(|&(m, s)| {
                    let mut rng = stream(schedule.seed, &[m as u64, s as u64]);
                    sampler.table(&mut rng, m, schedule.shots)
                })
                .collect()
        }
    };

    let mut data: BTreeMap<u32, Vec<CountTable>> = BTreeMap::new();
    for ((m, _), table) in tasks.into_iter().zip(tables) {
        data.entry(m).or_default().push(table);
    }
    ExperimentRecord::new(layout, schedule.shots, Some(schedule.seed), data)
}

/// Multinomial draw over patterns, expanded to register outcomes. An error
/// on a pair set is spread uniformly over its three non-trivial bit patterns.
fn dense_table<R: Rng>(rng: &mut R, layout: &PartitionLayout, dist: &ProbVector, shots: u64) -> CountTable {
    let counts = multinomial(rng, shots, dist.values());
    let n = layout.n_qubits();
    let mut table = CountTable::new();
    for (pattern, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut base = Outcome::zeros(n);
        let mut error_pairs = Vec::new();
        for (i, set) in layout.sets().iter().enumerate() {
            if (pattern >> i) & 1 == 1 {
                match set.as_slice() {
                    [q] => base.set_bit(*q, true),
                    _ => error_pairs.push((set[0], set[1])),
                }
            }
        }
        if error_pairs.is_empty() {
            *table.entry(base).or_insert(0) += c;
            continue;
        }
        let variants = 3usize.pow(error_pairs.len() as u32);
        let split = multinomial(rng, c, &vec![1.0 / variants as f64; variants]);
        for (v, &cv) in split.iter().enumerate() {
            if cv == 0 {
                continue;
            }
            let mut o = base.clone();
            let mut code = v;
            for &(a, b) in &error_pairs {
                let bits = code % 3 + 1;
                code /= 3;
                o.set_bit(a, bits & 1 == 1);
                o.set_bit(b, bits & 2 == 2);
            }
            *table.entry(o).or_insert(0) += cv;
        }
    }
    table
}

/// Per-layer Pauli error source for shot-level sampling. Paulis are kept as
/// symplectic bit pairs `(x, z)` per qubit.
enum LayerSource {
    PerQubit(Vec<[f64; 3]>),
    Explicit { n: usize, cdf: Vec<f64> },
    Chain { initial: [f64; 3], transitions: Vec<[[f64; 3]; 4]> },
}

/// Cumulative thresholds of a 4-outcome distribution (last one implied).
fn cum3(p: &[f64; 4]) -> [f64; 3] {
    [p[0], p[0] + p[1], p[0] + p[1] + p[2]]
}

fn pick4<R: Rng>(rng: &mut R, cum: &[f64; 3]) -> usize {
    let u: f64 = rng.random();
    cum.iter().position(|&c| u < c).unwrap_or(3)
}

/// Symplectic x-bit of a Pauli code (X and Y flip a Z-basis readout).
#[inline]
fn x_bit(code: usize) -> bool {
    code == 1 || code == 2
}

struct ShotSampler {
    source: LayerSource,
    pair_noise_cdf: Option<Vec<f64>>,
    layout: PartitionLayout,
    prep: Vec<f64>,
    readout: Vec<f64>,
}

impl ShotSampler {
    fn new(model: &NoiseModel, spam: &SpamModel, layout: &PartitionLayout) -> Result<Self> {
        let source = match &model.spec {
            NoiseSpec::PerQubit(triples) => {
                LayerSource::PerQubit(triples.iter().map(|&(x, y, z)| cum3(&[1.0 - x - y - z, x, y, z])).collect())
            }
            NoiseSpec::Explicit(rates) => LayerSource::Explicit { n: rates.n_qubits(), cdf: cdf(rates.values()) },
            NoiseSpec::Chain(chain) => LayerSource::Chain {
                initial: cum3(&chain.initial),
                transitions: chain
                    .transitions
                    .iter()
                    .map(|t| [cum3(&t[0]), cum3(&t[1]), cum3(&t[2]), cum3(&t[3])])
                    .collect(),
            },
        };
        Ok(Self {
            source,
            pair_noise_cdf: model.pair_noise.as_deref().map(cdf),
            layout: layout.clone(),
            prep: spam.prep_flip.clone(),
            readout: spam.readout_flip.clone(),
        })
    }

    fn layer<R: Rng>(&self, rng: &mut R, paulis: &mut [usize]) {
        match &self.source {
            LayerSource::PerQubit(cums) => {
                for (p, cum) in paulis.iter_mut().zip(cums) {
                    *p = pick4(rng, cum);
                }
            }
            LayerSource::Explicit { n, cdf } => {
                let idx = pick(rng, cdf);
                for (q, p) in paulis.iter_mut().enumerate().take(*n) {
                    *p = (idx >> (2 * q)) & 3;
                }
            }
            LayerSource::Chain { initial, transitions } => {
                let mut cur = pick4(rng, initial);
                paulis[0] = cur;
                for (q, t) in transitions.iter().enumerate() {
                    cur = pick4(rng, &t[cur]);
                    paulis[q + 1] = cur;
                }
            }
        }
        if let Some(cdf) = &self.pair_noise_cdf {
            for set in self.layout.sets().iter().filter(|s| s.len() == 2) {
                let idx = pick(rng, cdf);
                paulis[set[0]] = compose_codes(paulis[set[0]], idx & 3);
                paulis[set[1]] = compose_codes(paulis[set[1]], (idx >> 2) & 3);
            }
        }
    }

    fn shot<R: Rng>(&self, rng: &mut R, m: u32, paulis: &mut [usize]) -> Outcome {
        let mut out = Outcome::zeros(self.layout.n_qubits());
        for _ in 0..m {
            self.layer(rng, paulis);
            for set in self.layout.sets() {
                match set.as_slice() {
                    [q] => {
                        // a twirled non-identity error is uniform over X, Y, Z
                        if paulis[*q] != 0 && rng.random::<f64>() < 2.0 / 3.0 {
                            out.flip(*q);
                        }
                    }
                    _ => {
                        let (a, b) = (set[0], set[1]);
                        if paulis[a] != 0 || paulis[b] != 0 {
                            let u = rng.random_range(1..16usize);
                            if x_bit(u & 3) {
                                out.flip(a);
                            }
                            if x_bit(u >> 2) {
                                out.flip(b);
                            }
                        }
                    }
                }
            }
        }
        for q in self.layout.sets().iter().flatten() {
            if rng.random::<f64>() < self.prep[*q] {
                out.flip(*q);
            }
            if rng.random::<f64>() < self.readout[*q] {
                out.flip(*q);
            }
        }
        out
    }

    fn table<R: Rng>(&self, rng: &mut R, m: u32, shots: u64) -> CountTable {
        let mut paulis = vec![0usize; self.layout.n_qubits().max(self.n_model_qubits())];
        let mut table = CountTable::new();
        for _ in 0..shots {
            *table.entry(self.shot(rng, m, &mut paulis)).or_insert(0) += 1;
        }
        table
    }

    fn n_model_qubits(&self) -> usize {
        match &self.source {
            LayerSource::PerQubit(c) => c.len(),
            LayerSource::Explicit { n, .. } => *n,
            LayerSource::Chain { transitions, .. } => transitions.len() + 1,
        }
    }
}

fn cdf(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

fn pick<R: Rng>(rng: &mut R, cdf: &[f64]) -> usize {
    let u: f64 = rng.random::<f64>() * cdf.last().copied().unwrap_or(1.0);
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Moves probability mass onto `label`, taking it from (or returning it to)
/// the identity entry.
pub fn inject_correlation(rates: &PauliErrorRates, label: &str, new_mass: f64) -> Result<PauliErrorRates> {
    if !(0.0..1.0).contains(&new_mass) {
        return Err(Error::Argument(format!("new mass {new_mass} outside [0, 1)")));
    }
    let idx = rates.index_of(label)?;
    if idx == 0 {
        return Err(Error::Argument("cannot inject onto the identity label".into()));
    }
    let mut out = rates.clone();
    let delta = new_mass - out.values()[idx];
    let identity = out.values()[0] - delta;
    if identity < 0.0 {
        return Err(Error::Distribution(format!(
            "identity rate would become {identity}"
        )));
    }
    out.values_mut()[idx] = new_mass;
    out.values_mut()[0] = identity;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn table_eigs() -> EigenvalueVector {
        EigenvalueVector::new(PartitionLayout::singletons(2), vec![1.0, 0.93, 0.94, 0.8742]).unwrap()
    }

    #[test]
    fn sequence_distribution_examples() {
        let spam = SpamModel::ideal(2);
        let p = sequence_distribution(&table_eigs(), &spam, 1).unwrap();
        assert!(close(p.values(), &[0.93605, 0.03395, 0.02895, 0.00105], 1e-12));
        let p = sequence_distribution(&table_eigs(), &spam, 0).unwrap();
        assert!(close(p.values(), &[1.0, 0.0, 0.0, 0.0], 1e-15));
        let p = sequence_distribution(&table_eigs(), &spam, 2000).unwrap();
        assert!(close(p.values(), &[0.25; 4], 1e-12));
        assert!(sequence_distribution(&table_eigs(), &spam, -1).is_err());
    }

    #[test]
    fn inject_table_workflow() {
        let rates = PauliErrorRates::product(&[(0.0175, 0.0275, 0.0075), (0.015, 0.005, 0.025)]).unwrap();
        let altered = inject_correlation(&rates, "XY", 0.006).unwrap();
        assert!((altered.rate("II").unwrap() - 0.899275).abs() < 1e-15);
        assert_eq!(altered.rate("XY").unwrap(), 0.006);
        assert_eq!(altered.rate("ZZ").unwrap(), rates.rate("ZZ").unwrap());
        let same = inject_correlation(&rates, "XY", rates.rate("XY").unwrap()).unwrap();
        assert_eq!(same.rate("II").unwrap(), rates.rate("II").unwrap());
        let lam = clifford_average(&NoiseModel::explicit(altered), &PartitionLayout::singletons(2)).unwrap();
        assert!(close(lam.values(), &[1.0, 0.92255, 0.93255, 0.869_233_333_333_333_3], 1e-12));
        assert!(inject_correlation(&rates, "XY", 0.99).is_err());
    }

    #[test]
    fn noiseless_experiment_is_all_zeros() {
        let layout = PartitionLayout::singletons(3);
        let schedule = Schedule { lengths: vec![1, 5], sequences_per_length: 2, shots: 100, seed: 1, mode: SamplingMode::Auto };
        for mode in [SamplingMode::Dense, SamplingMode::Shots] {
            let rec = sample_experiment(
                &NoiseModel::identity(3),
                &SpamModel::ideal(3),
                &layout,
                &Schedule { mode, ..schedule.clone() },
            )
            .unwrap();
            for tables in rec.data().values() {
                for t in tables {
                    assert_eq!(t.len(), 1);
                    assert_eq!(t[&Outcome::zeros(3)], 100);
                }
            }
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let model = NoiseModel::per_qubit(vec![(0.01, 0.02, 0.01); 3]).unwrap();
        let layout = PartitionLayout::new(vec![vec![0], vec![1, 2]], 3).unwrap();
        let schedule = Schedule { lengths: vec![1, 3, 7], sequences_per_length: 4, shots: 500, seed: 42, mode: SamplingMode::Auto };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_experiment(&model, &SpamModel::ideal(3), &layout, &schedule).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
