//! Non-parametric bootstrap of experiment records through the full
//! reconstruction pipeline.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{correlation_matrix, LogBase};
use crate::error::{Error, Result};
use crate::grf::{compare_grf, fit_grf, JunctionChain};
use crate::protocol::{average_patterns, pattern_counts, reconstruct_from_distributions, FitOptions, ReconstructionResult};
use crate::rng::{multinomial, stream};
use crate::sim::{CountTable, ExperimentRecord};

/// One-sigma coverage.
pub const ONE_SIGMA: f64 = 0.6827;

/// What a replicate draws from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    /// Each sequence is redrawn from its own empirical distribution.
    #[default]
    PerSequence,
    /// Each sequence is redrawn from the distribution pooled over all
    /// sequences at its length.
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapOptions {
    pub n_reps: usize,
    pub seed: u64,
    pub mode: ResampleMode,
    pub level: f64,
    pub fit: FitOptions,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self { n_reps: 1000, seed: 0, mode: ResampleMode::PerSequence, level: ONE_SIGMA, fit: FitOptions::default() }
    }
}

/// Redraws `shots` outcomes for every sequence of `rec`.
pub fn resample(rec: &ExperimentRecord, seed: u64) -> Result<ExperimentRecord> {
    resample_with(rec, seed, ResampleMode::PerSequence)
}

pub fn resample_with(rec: &ExperimentRecord, seed: u64, mode: ResampleMode) -> Result<ExperimentRecord> {
    let shots = rec.shots();
    let data: BTreeMap<u32, Vec<CountTable>> = rec
        .data()
        .iter()
        .map(|(&m, tables)| {
            let pooled;
            let source: Vec<&CountTable> = match mode {
                ResampleMode::PerSequence => tables.iter().collect(),
                ResampleMode::Pooled => {
                    let mut p = CountTable::new();
                    for t in tables {
                        for (o, &c) in t {
                            *p.entry(o.clone()).or_insert(0) += c;
                        }
                    }
                    pooled = p;
                    vec![&pooled; tables.len()]
                }
            };
            let out = source
                .iter()
                .enumerate()
                .map(|(s, table)| {
                    let mut rng = stream(seed, &[m as u64, s as u64]);
                    let outcomes: Vec<_> = table.keys().collect();
                    let probs: Vec<f64> = table.values().map(|&c| c as f64).collect();
                    multinomial(&mut rng, shots, &probs)
                        .into_iter()
                        .zip(outcomes)
                        .filter(|(c, _)| *c > 0)
                        .map(|(c, o)| (o.clone(), c))
                        .collect()
                })
                .collect();
            (m, out)
        })
        .collect();
    ExperimentRecord::new(rec.layout().clone(), shots, rec.seed(), data)
}

/// Sparse multinomial redraw of one coarse-grained pattern table.
fn redraw<R: Rng>(rng: &mut R, counts: &[u64], total: u64) -> Vec<u64> {
    let nz: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
    let probs: Vec<f64> = nz.iter().map(|&i| counts[i] as f64).collect();
    let mut out = vec![0u64; counts.len()];
    for (i, c) in nz.into_iter().zip(multinomial(rng, total, &probs)) {
        out[i] = c;
    }
    out
}

/// Point reconstruction plus `n_reps` bootstrap replicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapEnsemble {
    pub point: ReconstructionResult,
    pub replicates: Vec<ReconstructionResult>,
    pub seed: u64,
    pub mode: ResampleMode,
}

/// Runs resample → reconstruct `n_reps` times in parallel. Replicate `r`
/// uses the stream keyed by `(seed, r)`; output does not depend on the
/// thread count.
pub fn ensemble(rec: &ExperimentRecord, options: &BootstrapOptions) -> Result<BootstrapEnsemble> {
    if options.n_reps < 2 {
        return Err(Error::Argument("n_reps must be at least 2".into()));
    }
    let keep: Vec<usize> = (0..rec.layout().k()).collect();
    let layout = rec.layout().select(&keep)?;
    let counts = pattern_counts(rec, &keep)?;
    let point = reconstruct_from_distributions(&average_patterns(&layout, &counts)?, &options.fit)?;
    let sources: BTreeMap<u32, Vec<Vec<u64>>> = match options.mode {
        ResampleMode::PerSequence => counts.clone(),
        ResampleMode::Pooled => counts
            .iter()
            .map(|(&m, seqs)| {
                let mut pooled = vec![0u64; seqs[0].len()];
                for s in seqs {
                    pooled.iter_mut().zip(s).for_each(|(a, b)| *a += b);
                }
                (m, vec![pooled; seqs.len()])
            })
            .collect(),
    };
    let shots = rec.shots();
    let replicates = (0..options.n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(options.seed, &[r as u64]);
            let drawn: BTreeMap<u32, Vec<Vec<u64>>> = sources
                .iter()
                .map(|(&m, seqs)| (m, seqs.iter().map(|c| redraw(&mut rng, c, shots)).collect()))
                .collect();
            reconstruct_from_distributions(&average_patterns(&layout, &drawn)?, &options.fit)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BootstrapEnsemble { point, replicates, seed: options.seed, mode: options.mode })
}

/// Percentile interval with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// Non-finite values left out before ranking.
    pub excluded: usize,
}

/// 1-based order-statistic ranks `(ceil(nα), floor(n(1−α)))` with
/// `α = (1 − level)/2`, clamped to `[1, n]`; `n = 1000` at one sigma gives
/// the 159th and 841st values.
pub fn percentile_ranks(n: usize, level: f64) -> (usize, usize) {
    let alpha = (1.0 - level) / 2.0;
    let nf = n as f64;
    // tolerate representation error in nα
    let lo = ((nf * alpha) - 1e-9).ceil().max(1.0) as usize;
    let hi = ((nf * (1.0 - alpha)) + 1e-9).floor().min(nf) as usize;
    (lo.min(n), hi.max(lo.min(n)))
}

pub fn percentile_ci(values: &[f64], level: f64) -> Result<Interval> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::Argument(format!("confidence level {level} outside (0, 1)")));
    }
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    let excluded = values.len() - v.len();
    if v.is_empty() {
        return Err(Error::Numeric("no finite values for a percentile interval".into()));
    }
    v.sort_by(f64::total_cmp);
    let (lo, hi) = percentile_ranks(v.len(), level);
    Ok(Interval { lo: v[lo - 1], hi: v[hi - 1], excluded })
}

/// `{point, lo, hi, level, n_reps}` for one statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub n_reps: usize,
    #[serde(skip_serializing_if = "is_zero")]
    pub excluded: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl BootstrapEnsemble {
    pub fn n_reps(&self) -> usize {
        self.replicates.len()
    }

    /// Interval of any scalar functional of a reconstruction.
    pub fn ci<F>(&self, level: f64, statistic: F) -> Result<StatSummary>
    where
        F: Fn(&ReconstructionResult) -> f64,
    {
        let values: Vec<f64> = self.replicates.iter().map(&statistic).collect();
        let iv = percentile_ci(&values, level)?;
        Ok(StatSummary {
            point: statistic(&self.point),
            lo: iv.lo,
            hi: iv.hi,
            level,
            n_reps: self.n_reps(),
            excluded: iv.excluded,
        })
    }

    /// Intervals of every eigenvalue, observed rate and correlation cell.
    pub fn summary(&self, level: f64) -> Result<EnsembleSummary> {
        let dim = self.point.eigenvalues.values().len();
        let eigenvalues = (0..dim)
            .map(|j| self.ci(level, |r| r.eigenvalues.values()[j]))
            .collect::<Result<_>>()?;
        let observed_rates = (0..dim)
            .map(|j| self.ci(level, |r| r.observed_rates.values()[j]))
            .collect::<Result<_>>()?;
        let (lo, hi) = correlation_matrix_ci(self, level)?;
        let point = correlation_matrix(&self.point.observed_rates).matrix;
        Ok(EnsembleSummary {
            level,
            n_reps: self.n_reps(),
            seed: self.seed,
            mode: self.mode,
            eigenvalues,
            observed_rates,
            correlation: CorrelationCi { point, lo, hi },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCi {
    pub point: Vec<Vec<f64>>,
    pub lo: Vec<Vec<f64>>,
    pub hi: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub level: f64,
    pub n_reps: usize,
    pub seed: u64,
    pub mode: ResampleMode,
    pub eigenvalues: Vec<StatSummary>,
    pub observed_rates: Vec<StatSummary>,
    pub correlation: CorrelationCi,
}

/// Cellwise percentile bounds of the correlation matrix. The bound matrices
/// are generally not themselves valid correlation matrices.
pub fn correlation_matrix_ci(ens: &BootstrapEnsemble, level: f64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mats: Vec<Vec<Vec<f64>>> = ens
        .replicates
        .iter()
        .map(|r| correlation_matrix(&r.observed_rates).matrix)
        .collect();
    let k = ens.point.eigenvalues.k();
    let mut lo = vec![vec![0.0; k]; k];
    let mut hi = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let cell: Vec<f64> = mats.iter().map(|m| m[i][j]).collect();
            let iv = percentile_ci(&cell, level)?;
            lo[i][j] = iv.lo;
            hi[i][j] = iv.hi;
        }
    }
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JsdMode {
    /// GRF fitted once to the point estimate, compared to every replicate.
    FixedModel,
    /// GRF refitted to each replicate and compared to that replicate.
    PerReplicateModel,
    /// The wider of the two intervals.
    #[default]
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsdInterval {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub mode: JsdMode,
    pub fixed: Option<Interval>,
    pub per_replicate: Option<Interval>,
}

/// Interval of the base-2 JSD between the reconstructed distribution and its
/// GRF approximation on `chain`.
pub fn jsd_ci(ens: &BootstrapEnsemble, chain: &JunctionChain, mode: JsdMode, level: f64) -> Result<JsdInterval> {
    let global = &ens.point.observed_rates;
    let fixed_model = fit_grf(global, chain)?;
    let point = compare_grf(global, &fixed_model, LogBase::Two)?;
    let fixed = matches!(mode, JsdMode::FixedModel | JsdMode::Both)
        .then(|| {
            let v = ens
                .replicates
                .par_iter()
                .map(|r| compare_grf(&r.observed_rates, &fixed_model, LogBase::Two))
                .collect::<Result<Vec<_>>>()?;
            percentile_ci(&v, level)
        })
        .transpose()?;
    let per_replicate = matches!(mode, JsdMode::PerReplicateModel | JsdMode::Both)
        .then(|| {
            let v = ens
                .replicates
                .par_iter()
                .map(|r| compare_grf(&r.observed_rates, &fit_grf(&r.observed_rates, chain)?, LogBase::Two))
                .collect::<Result<Vec<_>>>()?;
            percentile_ci(&v, level)
        })
        .transpose()?;
    let (lo, hi) = match (fixed, per_replicate) {
        (Some(a), Some(b)) => (a.lo.min(b.lo), a.hi.max(b.hi)),
        (Some(a), None) | (None, Some(a)) => (a.lo, a.hi),
        (None, None) => unreachable!("mode selects at least one interval"),
    };
    Ok(JsdInterval { point, lo, hi, level, mode, fixed, per_replicate })
}
