//! Reconstruction of averaged eigenvalues and observed error rates from
//! sequence data.
//!
//! Pipeline: coarse-grain outcomes to set-error patterns, average over
//! sequences at each length, transform, fit `A p^m` per index, assemble the
//! eigenvalues from the fitted `p`, invert and project onto the simplex.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{forward_transform, EigenvalueVector, ProbVector};
use crate::error::{Error, Result};
use crate::layout::PartitionLayout;
use crate::sim::{CountTable, ExperimentRecord};

/// Additive constant of the discard threshold `(v_first + c) / 4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Threshold {
    /// `c = 1/2^k`, the uniform-distribution floor.
    #[default]
    Uniform,
    /// A fixed constant; `Fixed(1.0 / 16.0)` reproduces the 14-qubit runs.
    Fixed(f64),
}

impl Threshold {
    pub fn constant(self, k: usize) -> f64 {
        match self {
            Threshold::Uniform => 0.5f64.powi(k as i32),
            Threshold::Fixed(c) => c,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub threshold: Threshold,
    /// Smallest-`m` points always kept, and the minimum number of positive
    /// values a fit needs.
    pub min_points: usize,
    /// Polish the log-linear estimate with Gauss–Newton on the raw residuals.
    pub nonlinear: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { threshold: Threshold::Uniform, min_points: 3, nonlinear: false }
    }
}

/// Fitted `A p^m` for one transformed index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub index: usize,
    #[serde(rename = "A")]
    pub a: f64,
    pub p: f64,
    pub points_used: usize,
    /// Sum of squared residuals `Σ (v − A p^m)^2` over the points used.
    pub residual: f64,
    pub failed: bool,
    /// Threshold the series was compared against.
    pub threshold: f64,
    /// First length excluded by the threshold rule, if any.
    pub cutoff: Option<u32>,
    /// Retained lengths whose value was not positive.
    pub dropped_nonpositive: Vec<u32>,
}

impl DecayFit {
    fn fixed(index: usize) -> Self {
        Self {
            index,
            a: 1.0,
            p: 1.0,
            points_used: 0,
            residual: 0.0,
            failed: false,
            threshold: 0.0,
            cutoff: None,
            dropped_nonpositive: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub eigenvalues: EigenvalueVector,
    /// Inverse transform of the eigenvalues before projection.
    pub observed_raw: Vec<f64>,
    pub observed_rates: ProbVector,
    pub fits: Vec<DecayFit>,
    pub diagnostics: Vec<String>,
}

impl ReconstructionResult {
    /// `index,bits,eigenvalue,A,observed_rate` rows; `bits` lists set 0 as
    /// the rightmost character.
    pub fn to_csv(&self) -> String {
        let k = self.eigenvalues.k();
        let mut out = String::from("index,bits,eigenvalue,A,observed_rate\n");
        for (j, fit) in self.fits.iter().enumerate() {
            out.push_str(&format!(
                "{j},{:0k$b},{},{},{}\n",
                j,
                self.eigenvalues.values()[j],
                fit.a,
                self.observed_rates.values()[j],
            ));
        }
        out
    }

    pub fn failed_indices(&self) -> Vec<usize> {
        self.fits.iter().filter(|f| f.failed).map(|f| f.index).collect()
    }
}

/// Pattern index of `outcome` on `sets`: bit `i` is set iff some qubit of
/// `sets[i]` reads 1.
fn coarse_grain_table(table: &CountTable, sets: &[&[usize]], dim: usize) -> Vec<u64> {
    let mut out = vec![0u64; dim];
    for (o, &c) in table {
        let idx = sets
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, s)| acc | (usize::from(s.iter().any(|&q| o.bit(q))) << i));
        out[idx] += c;
    }
    out
}

/// Per-sequence pattern counts on the listed sets, keyed by length.
pub(crate) fn pattern_counts(rec: &ExperimentRecord, keep: &[usize]) -> Result<BTreeMap<u32, Vec<Vec<u64>>>> {
    let layout = rec.layout().select(keep)?;
    let dim = layout.dim()?;
    let sets: Vec<&[usize]> = layout.sets().iter().map(Vec::as_slice).collect();
    Ok(rec
        .data()
        .iter()
        .map(|(&m, tables)| (m, tables.iter().map(|t| coarse_grain_table(t, &sets, dim)).collect()))
        .collect())
}

/// Equal-weight sequence average of normalised pattern counts.
pub(crate) fn average_patterns(
    layout: &PartitionLayout,
    counts: &BTreeMap<u32, Vec<Vec<u64>>>,
) -> Result<BTreeMap<u32, ProbVector>> {
    let dim = layout.dim()?;
    counts
        .iter()
        .map(|(&m, seqs)| {
            let mut avg = vec![0.0; dim];
            let mut used = 0usize;
            for c in seqs {
                let total: u64 = c.iter().sum();
                if total == 0 {
                    continue;
                }
                used += 1;
                for (a, &v) in avg.iter_mut().zip(c) {
                    *a += v as f64 / total as f64;
                }
            }
            if used == 0 {
                return Err(Error::Record(format!("no shots at length {m}")));
            }
            avg.iter_mut().for_each(|a| *a /= used as f64);
            Ok((m, ProbVector::new(layout.clone(), avg)?))
        })
        .collect()
}

/// Empirical pattern distribution at every length, over all sets.
pub fn empirical_distributions(rec: &ExperimentRecord) -> Result<BTreeMap<u32, ProbVector>> {
    let keep: Vec<usize> = (0..rec.layout().k()).collect();
    empirical_marginals(rec, &keep)
}

/// Empirical pattern distributions restricted to the listed sets. Equivalent
/// to marginalising [`empirical_distributions`] but never touches the full
/// `2^k` space.
pub fn empirical_marginals(rec: &ExperimentRecord, keep: &[usize]) -> Result<BTreeMap<u32, ProbVector>> {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let layout = rec.layout().select(&keep)?;
    average_patterns(&layout, &pattern_counts(rec, &keep)?)
}

/// Fits `A p^m` to every index of the transformed series.
///
/// `series[m]` holds the `2^k` transformed values at length `m`.
pub fn fit_decays(series: &BTreeMap<u32, Vec<f64>>, options: &FitOptions) -> Result<Vec<DecayFit>> {
    if series.len() < 2 {
        return Err(Error::Argument(format!("need at least 2 lengths, got {}", series.len())));
    }
    if options.min_points < 2 {
        return Err(Error::Argument("min_points must be at least 2".into()));
    }
    let dim = series.values().next().map_or(0, Vec::len);
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    if series.values().any(|v| v.len() != dim) {
        return Err(Error::Shape("series entries differ in length".into()));
    }
    let k = dim.trailing_zeros() as usize;
    let c = options.threshold.constant(k);
    let lengths: Vec<u32> = series.keys().copied().collect();
    let columns: Vec<Vec<f64>> = (0..dim).map(|j| series.values().map(|v| v[j]).collect()).collect();
    Ok(columns
        .par_iter()
        .enumerate()
        .map(|(j, values)| {
            if j == 0 {
                DecayFit::fixed(0)
            } else {
                fit_one(j, &lengths, values, c, options)
            }
        })
        .collect())
}

fn fit_one(index: usize, lengths: &[u32], values: &[f64], c: f64, options: &FitOptions) -> DecayFit {
    let threshold = (values[0] + c) / 4.0;
    let first_below = values.iter().position(|&v| v < threshold);
    let retained = first_below.unwrap_or(values.len()).max(options.min_points).min(values.len());
    let cutoff = (retained < values.len()).then(|| lengths[retained]);
    let mut ms = Vec::new();
    let mut vs = Vec::new();
    let mut dropped = Vec::new();
    for (&m, &v) in lengths[..retained].iter().zip(&values[..retained]) {
        if v > 0.0 && v.is_finite() {
            ms.push(m as f64);
            vs.push(v);
        } else {
            dropped.push(m);
        }
    }
    let mut fit = DecayFit {
        index,
        a: 0.0,
        p: 0.0,
        points_used: ms.len(),
        residual: f64::NAN,
        failed: true,
        threshold,
        cutoff,
        dropped_nonpositive: dropped,
    };
    if ms.len() < options.min_points.min(lengths.len()) || ms.len() < 2 {
        return fit;
    }
    let Some((mut a, mut p)) = log_linear_fit(&ms, &vs) else {
        return fit;
    };
    if options.nonlinear {
        (a, p) = gauss_newton(&ms, &vs, a, p);
    }
    fit.a = a;
    fit.p = p;
    fit.residual = sse(&ms, &vs, a, p);
    fit.failed = false;
    fit
}

/// Weighted least squares of `ln v = ln A + m ln p` with weights `v^2`,
/// which makes log residuals approximate the raw ones.
fn log_linear_fit(ms: &[f64], vs: &[f64]) -> Option<(f64, f64)> {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&m, &v) in ms.iter().zip(vs) {
        let w = v * v;
        let y = v.ln();
        sw += w;
        sx += w * m;
        sy += w * y;
        sxx += w * m * m;
        sxy += w * m * y;
    }
    let det = sw * sxx - sx * sx;
    if !(det.abs() > 1e-300) {
        return None;
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    let (a, p) = (intercept.exp(), slope.exp());
    (a.is_finite() && p.is_finite()).then_some((a, p))
}

fn sse(ms: &[f64], vs: &[f64], a: f64, p: f64) -> f64 {
    ms.iter().zip(vs).map(|(&m, &v)| (v - a * p.powf(m)).powi(2)).sum()
}

fn gauss_newton(ms: &[f64], vs: &[f64], mut a: f64, mut p: f64) -> (f64, f64) {
    let mut cost = sse(ms, vs, a, p);
    for _ in 0..50 {
        let (mut jtj00, mut jtj01, mut jtj11, mut g0, mut g1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&m, &v) in ms.iter().zip(vs) {
            let pm = p.powf(m);
            let da = pm;
            let dp = a * m * p.powf(m - 1.0);
            let r = v - a * pm;
            jtj00 += da * da;
            jtj01 += da * dp;
            jtj11 += dp * dp;
            g0 += da * r;
            g1 += dp * r;
        }
        let det = jtj00 * jtj11 - jtj01 * jtj01;
        if !(det.abs() > 1e-300) {
            break;
        }
        let step_a = (jtj11 * g0 - jtj01 * g1) / det;
        let step_p = (jtj00 * g1 - jtj01 * g0) / det;
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let (na, np) = (a + t * step_a, p + t * step_p);
            if np > 0.0 {
                let nc = sse(ms, vs, na, np);
                if nc < cost {
                    a = na;
                    p = np;
                    improved = cost - nc > 1e-15 * cost.max(1e-300);
                    cost = nc;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (a, p)
}

/// Full reconstruction over every set of the record's layout.
pub fn reconstruct(rec: &ExperimentRecord, options: &FitOptions) -> Result<ReconstructionResult> {
    let keep: Vec<usize> = (0..rec.layout().k()).collect();
    reconstruct_marginal(rec, &keep, options)
}

/// Reconstruction on the listed sets only (ascending set order); cost is
/// independent of the number of discarded sets.
pub fn reconstruct_marginal(
    rec: &ExperimentRecord,
    keep: &[usize],
    options: &FitOptions,
) -> Result<ReconstructionResult> {
    let dists = empirical_marginals(rec, keep)?;
    reconstruct_from_distributions(&dists, options)
}

/// Runs the transform, fit, inverse and projection steps on per-length
/// empirical distributions sharing one layout.
pub fn reconstruct_from_distributions(
    dists: &BTreeMap<u32, ProbVector>,
    options: &FitOptions,
) -> Result<ReconstructionResult> {
    let layout = dists
        .values()
        .next()
        .ok_or(Error::Empty("empirical distributions"))?
        .layout()
        .clone();
    if dists.values().any(|d| d.layout() != &layout) {
        return Err(Error::Shape("distributions use different layouts".into()));
    }
    let series: BTreeMap<u32, Vec<f64>> = dists
        .iter()
        .map(|(&m, d)| (m, forward_transform(&layout, d.values())))
        .collect();
    let fits = fit_decays(&series, options)?;
    let mut diagnostics = vec![format!(
        "threshold (v_first + {}) / 4 with v_first taken at m = {}",
        options.threshold.constant(layout.k()),
        series.keys().next().expect("at least two lengths")
    )];
    for f in &fits {
        if f.failed {
            diagnostics.push(format!(
                "index {}: fit failed with {} positive points; eigenvalue set to 0",
                f.index, f.points_used
            ));
        }
        if let Some(m) = f.cutoff {
            diagnostics.push(format!("index {}: lengths from m = {m} discarded", f.index));
        }
        if !f.dropped_nonpositive.is_empty() {
            diagnostics.push(format!(
                "index {}: non-positive values dropped at m = {:?}",
                f.index, f.dropped_nonpositive
            ));
        }
    }
    let eigenvalues = EigenvalueVector::new(layout.clone(), fits.iter().map(|f| f.p).collect())?;
    let observed_raw = eigenvalues.to_probability_values();
    if observed_raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite reconstructed rates".into()));
    }
    let observed_rates = ProbVector::from_projection(layout, &observed_raw)?;
    Ok(ReconstructionResult { eigenvalues, observed_raw, observed_rates, fits, diagnostics })
}
