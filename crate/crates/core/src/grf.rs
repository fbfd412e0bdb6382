//! Gibbs random fields over set-error variables, factorised along a junction
//! chain: `p(x) = Π_t p_{C_t}(x_{C_t}) / Π_t p_{S_t}(x_{S_t})` with
//! `S_t = C_t ∩ C_{t+1}`.
//!
//! Distances between two chain models are computed without tabulating the
//! `2^k` patterns: Hellinger exactly by a forward pass, JSD and TVD by Monte
//! Carlo over the mixture.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{hellinger_values, js_kernel, jsd_values, tvd_values, LogBase};
use crate::dist::ProbVector;
use crate::error::{Error, Result};
use crate::layout::{gather_bits, PartitionLayout};
use crate::protocol::{reconstruct_marginal, FitOptions};
use crate::rng::{multinomial, stream};
use crate::sim::ExperimentRecord;

pub const DEFAULT_MAX_CLIQUE: usize = 4;
/// Entries below this are raised to it before renormalising.
pub const FLOOR: f64 = 1e-12;
/// Largest separator disagreement tolerated after calibration.
pub const CONSISTENCY_TOL: f64 = 1e-6;
pub const CALIBRATION_MAX_ITER: usize = 100;
/// Largest `k` accepted by [`grf_to_dense`].
pub const DENSE_CAP: usize = 20;
/// Largest `k` for which distances are computed densely.
pub const DENSE_DISTANCE_MAX_K: usize = 16;

/// Ordered cliques of set indices obeying the running-intersection property.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct JunctionChain {
    cliques: Vec<Vec<usize>>,
    separators: Vec<Vec<usize>>,
    k: usize,
    max_clique: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    cliques: Vec<Vec<usize>>,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    max_clique: Option<usize>,
}

impl TryFrom<RawChain> for JunctionChain {
    type Error = Error;

    fn try_from(raw: RawChain) -> Result<Self> {
        let k = raw
            .k
            .unwrap_or_else(|| raw.cliques.iter().flatten().map(|&i| i + 1).max().unwrap_or(0));
        JunctionChain::with_max_clique(raw.cliques, k, raw.max_clique.unwrap_or(DEFAULT_MAX_CLIQUE))
    }
}

impl From<JunctionChain> for RawChain {
    fn from(c: JunctionChain) -> Self {
        RawChain { cliques: c.cliques, k: Some(c.k), max_clique: Some(c.max_clique) }
    }
}

impl JunctionChain {
    pub fn new(cliques: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        Self::with_max_clique(cliques, k, DEFAULT_MAX_CLIQUE)
    }

    pub fn with_max_clique(cliques: Vec<Vec<usize>>, k: usize, max_clique: usize) -> Result<Self> {
        if cliques.is_empty() {
            return Err(Error::Empty("junction chain"));
        }
        let mut cliques = cliques;
        let mut last_seen = vec![None::<usize>; k];
        for (t, c) in cliques.iter_mut().enumerate() {
            if c.is_empty() {
                return Err(Error::Layout(format!("clique {t} is empty")));
            }
            if c.len() > max_clique {
                return Err(Error::Layout(format!(
                    "clique {t} has {} sets, bound is {max_clique}",
                    c.len()
                )));
            }
            c.sort_unstable();
            if c.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Layout(format!("clique {t} repeats a set")));
            }
            for &i in c.iter() {
                if i >= k {
                    return Err(Error::SetIndex { index: i, len: k });
                }
                // running intersection: a set's cliques must be consecutive
                if let Some(prev) = last_seen[i] {
                    if prev + 1 != t {
                        return Err(Error::Layout(format!(
                            "set {i} appears in cliques {prev} and {t} but not in between"
                        )));
                    }
                }
                last_seen[i] = Some(t);
            }
        }
        if let Some(i) = last_seen.iter().position(Option::is_none) {
            return Err(Error::Layout(format!("set {i} is in no clique")));
        }
        let separators = cliques
            .windows(2)
            .map(|w| w[0].iter().copied().filter(|i| w[1].contains(i)).collect())
            .collect();
        Ok(Self { cliques, separators, k, max_clique })
    }

    /// Overlapping windows `{i, …, i+width−1}` sliding by one set.
    pub fn sliding(k: usize, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::Argument("clique width must be at least 1".into()));
        }
        if k <= width {
            return Self::with_max_clique(vec![(0..k).collect()], k, width.max(DEFAULT_MAX_CLIQUE));
        }
        let cliques = (0..=k - width).map(|i| (i..i + width).collect()).collect();
        Self::with_max_clique(cliques, k, width.max(DEFAULT_MAX_CLIQUE))
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn separators(&self) -> &[Vec<usize>] {
        &self.separators
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Bit positions of `sep` inside clique `t`.
    fn positions(&self, t: usize, sep: &[usize]) -> Vec<usize> {
        sep.iter()
            .map(|i| self.cliques[t].binary_search(i).expect("separator inside clique"))
            .collect()
    }
}

/// Chain-factorised distribution over the `k` set-error variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrfModel {
    pub layout: PartitionLayout,
    pub chain: JunctionChain,
    /// Marginal of clique `t`; bit `j` is the `j`-th smallest set of the clique.
    pub clique_marginals: Vec<ProbVector>,
    pub separator_marginals: Vec<Vec<f64>>,
    pub max_inconsistency: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    geometry: Geometry,
}

/// Cached bit positions of the separators inside their cliques.
#[derive(Clone, Debug, Default, PartialEq)]
struct Geometry {
    prev: Vec<Vec<usize>>,
    next: Vec<Vec<usize>>,
}

impl Geometry {
    fn of(chain: &JunctionChain) -> Self {
        let r = chain.len();
        let prev = (0..r)
            .map(|t| if t == 0 { Vec::new() } else { chain.positions(t, &chain.separators[t - 1]) })
            .collect();
        let next = (0..r)
            .map(|t| if t + 1 == r { Vec::new() } else { chain.positions(t, &chain.separators[t]) })
            .collect();
        Self { prev, next }
    }
}

fn floor_normalise(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(FLOOR));
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

fn project(values: &[f64], pos: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << pos.len()];
    for (i, &v) in values.iter().enumerate() {
        out[gather_bits(i, pos)] += v;
    }
    out
}

impl GrfModel {
    /// Builds a model from per-clique marginals, flooring, then calibrating
    /// separators by averaging the adjacent estimates and rescaling.
    pub fn from_marginals(layout: PartitionLayout, chain: JunctionChain, marginals: Vec<Vec<f64>>) -> Result<Self> {
        if layout.k() != chain.k() {
            return Err(Error::Shape(format!("layout has {} sets, chain {}", layout.k(), chain.k())));
        }
        if marginals.len() != chain.len() {
            return Err(Error::Shape(format!("{} marginals for {} cliques", marginals.len(), chain.len())));
        }
        let mut tables = marginals;
        for (t, m) in tables.iter_mut().enumerate() {
            if m.len() != 1 << chain.cliques[t].len() {
                return Err(Error::Shape(format!("clique {t} marginal has {} entries", m.len())));
            }
            if m.iter().any(|v| !v.is_finite() || *v < -1e-9) {
                return Err(Error::Distribution(format!("clique {t} marginal has invalid entries")));
            }
            floor_normalise(m);
        }
        let geometry = Geometry::of(&chain);
        let mut warnings = Vec::new();
        let mut gap = separator_gap(&tables, &geometry);
        let mut iter = 0;
        while gap > CONSISTENCY_TOL && iter < CALIBRATION_MAX_ITER {
            for t in 0..chain.len() - 1 {
                let (pl, pr) = (&geometry.next[t], &geometry.prev[t + 1]);
                let left = project(&tables[t], pl);
                let right = project(&tables[t + 1], pr);
                let target: Vec<f64> = left.iter().zip(&right).map(|(a, b)| 0.5 * (a + b)).collect();
                rescale(&mut tables[t], pl, &left, &target);
                rescale(&mut tables[t + 1], pr, &right, &target);
            }
            gap = separator_gap(&tables, &geometry);
            iter += 1;
        }
        if gap > CONSISTENCY_TOL {
            warnings.push(format!(
                "separator marginals still differ by {gap:.3e} after {iter} calibration passes"
            ));
        }
        let separator_marginals = (0..chain.len().saturating_sub(1))
            .map(|t| {
                let left = project(&tables[t], &geometry.next[t]);
                let right = project(&tables[t + 1], &geometry.prev[t + 1]);
                left.iter().zip(&right).map(|(a, b)| 0.5 * (a + b)).collect()
            })
            .collect();
        let clique_marginals = tables
            .into_iter()
            .enumerate()
            .map(|(t, v)| ProbVector::new(layout.select(&chain.cliques[t])?, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layout, chain, clique_marginals, separator_marginals, max_inconsistency: gap, warnings, geometry })
    }

    pub fn k(&self) -> usize {
        self.chain.k()
    }

    fn geometry(&self) -> std::borrow::Cow<'_, Geometry> {
        if self.geometry.prev.len() == self.chain.len() {
            std::borrow::Cow::Borrowed(&self.geometry)
        } else {
            std::borrow::Cow::Owned(Geometry::of(&self.chain))
        }
    }

    fn local_index(&self, t: usize, pattern: &[bool]) -> usize {
        self.chain.cliques[t]
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &i)| acc | (usize::from(pattern[i]) << j))
    }

    /// `ln p(pattern)`.
    pub fn log_eval(&self, pattern: &[bool]) -> Result<f64> {
        if pattern.len() != self.k() {
            return Err(Error::Shape(format!("pattern has {} bits, model {}", pattern.len(), self.k())));
        }
        let g = self.geometry();
        let mut lp = 0.0;
        for t in 0..self.chain.len() {
            let local = self.local_index(t, pattern);
            lp += self.clique_marginals[t].values()[local].ln();
            if t + 1 < self.chain.len() {
                lp -= self.separator_marginals[t][gather_bits(local, &g.next[t])].ln();
            }
        }
        Ok(lp)
    }

    /// Draws a pattern by sequential conditioning along the chain.
    pub fn sample<R: Rng>(&self, rng: &mut R, pattern: &mut [bool]) {
        let g = self.geometry();
        for t in 0..self.chain.len() {
            let clique = &self.chain.cliques[t];
            let values = self.clique_marginals[t].values();
            let fixed = &g.prev[t];
            let sep_state = gather_bits(self.local_index(t, pattern), fixed);
            let matches = |local: usize| gather_bits(local, fixed) == sep_state;
            let total: f64 = (0..values.len()).filter(|&l| matches(l)).map(|l| values[l]).sum();
            let mut u = rng.random::<f64>() * total;
            let mut chosen = None;
            for (l, &v) in values.iter().enumerate() {
                if matches(l) {
                    chosen = Some(l);
                    if u < v {
                        break;
                    }
                    u -= v;
                }
            }
            let l = chosen.expect("at least one compatible state");
            for (j, &i) in clique.iter().enumerate() {
                pattern[i] = (l >> j) & 1 == 1;
            }
        }
    }
}

fn rescale(table: &mut [f64], pos: &[usize], current: &[f64], target: &[f64]) {
    for (i, v) in table.iter_mut().enumerate() {
        let s = gather_bits(i, pos);
        if current[s] > 0.0 {
            *v *= target[s] / current[s];
        }
    }
}

fn separator_gap(tables: &[Vec<f64>], g: &Geometry) -> f64 {
    (0..tables.len().saturating_sub(1))
        .map(|t| {
            let a = project(&tables[t], &g.next[t]);
            let b = project(&tables[t + 1], &g.prev[t + 1]);
            a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Model from a full distribution by exact marginalisation.
pub fn fit_grf(global: &ProbVector, chain: &JunctionChain) -> Result<GrfModel> {
    fit_grf_with(global.layout(), chain, |clique| Ok(global.marginalize(clique)?.into_values()))
}

/// Model from a per-clique marginal estimator (called in parallel).
pub fn fit_grf_with<F>(layout: &PartitionLayout, chain: &JunctionChain, estimate: F) -> Result<GrfModel>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    let marginals = chain
        .cliques()
        .par_iter()
        .map(|c| estimate(c))
        .collect::<Result<Vec<_>>>()?;
    GrfModel::from_marginals(layout.clone(), chain.clone(), marginals)
}

/// Model whose clique marginals come from marginal reconstructions of `rec`.
pub fn fit_grf_from_record(rec: &ExperimentRecord, chain: &JunctionChain, options: &FitOptions) -> Result<GrfModel> {
    fit_grf_with(rec.layout(), chain, |clique| {
        Ok(reconstruct_marginal(rec, clique, options)?.observed_rates.into_values())
    })
}

pub fn grf_eval(model: &GrfModel, pattern: &[bool]) -> Result<f64> {
    Ok(model.log_eval(pattern)?.exp())
}

fn bits_of(idx: usize, k: usize) -> Vec<bool> {
    (0..k).map(|i| (idx >> i) & 1 == 1).collect()
}

pub fn grf_to_dense(model: &GrfModel) -> Result<ProbVector> {
    grf_to_dense_capped(model, DENSE_CAP)
}

pub fn grf_to_dense_capped(model: &GrfModel, cap: usize) -> Result<ProbVector> {
    let k = model.k();
    if k > cap {
        return Err(Error::TooLarge { what: "dense GRF table", n: k, cap });
    }
    let values: Vec<f64> = (0..1usize << k)
        .into_par_iter()
        .map(|idx| model.log_eval(&bits_of(idx, k)).map(f64::exp))
        .collect::<Result<_>>()?;
    let s: f64 = values.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::Numeric(format!("GRF table sums to {s}")));
    }
    ProbVector::new(model.layout.clone(), values)
}

/// JSD between a measured distribution and the GRF built on the same sets.
pub fn compare_grf(global: &ProbVector, model: &GrfModel, base: LogBase) -> Result<f64> {
    if global.layout() != &model.layout {
        return Err(Error::Shape("global distribution and model use different layouts".into()));
    }
    jsd_values(global.values(), grf_to_dense(model)?.values(), base)
}

/// Distances between two models on the same chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDistances {
    /// Base-2 Jensen–Shannon distance.
    pub jsd: f64,
    pub hellinger: f64,
    pub tvd: f64,
    /// Standard errors of the Monte Carlo estimates (0 when exact).
    pub jsd_se: f64,
    pub tvd_se: f64,
    pub samples: usize,
    pub exact: bool,
}

/// Exact Hellinger distance by a forward pass over `√(p q)`.
pub fn hellinger_streaming(p: &GrfModel, q: &GrfModel) -> Result<f64> {
    same_chain(p, q)?;
    let g = p.geometry();
    let chain = &p.chain;
    let mut alpha = vec![1.0];
    for t in 0..chain.len() {
        let pc = p.clique_marginals[t].values();
        let qc = q.clique_marginals[t].values();
        let next_len = 1usize << g.next[t].len();
        let mut next = vec![0.0; next_len];
        for l in 0..pc.len() {
            let mut f = alpha[gather_bits(l, &g.prev[t])] * (pc[l] * qc[l]).sqrt();
            if t + 1 < chain.len() {
                let s = gather_bits(l, &g.next[t]);
                f /= (p.separator_marginals[t][s] * q.separator_marginals[t][s]).sqrt();
                next[s] += f;
            } else {
                next[0] += f;
            }
        }
        alpha = next;
    }
    Ok((1.0 - alpha[0]).max(0.0).sqrt())
}

fn same_chain(p: &GrfModel, q: &GrfModel) -> Result<()> {
    if p.chain.cliques() != q.chain.cliques() {
        return Err(Error::Shape("models use different junction chains".into()));
    }
    Ok(())
}

/// JSD, Hellinger and TVD between two chain models. Dense when
/// `k ≤ DENSE_DISTANCE_MAX_K`; otherwise Hellinger is exact and JSD/TVD are
/// estimated from `samples` draws of the mixture `(p + q)/2`.
pub fn chain_distances(p: &GrfModel, q: &GrfModel, samples: usize, seed: u64) -> Result<ChainDistances> {
    same_chain(p, q)?;
    if p.k() <= DENSE_DISTANCE_MAX_K {
        let (dp, dq) = (grf_to_dense_capped(p, DENSE_DISTANCE_MAX_K)?, grf_to_dense_capped(q, DENSE_DISTANCE_MAX_K)?);
        return Ok(ChainDistances {
            jsd: jsd_values(dp.values(), dq.values(), LogBase::Two)?,
            hellinger: hellinger_values(dp.values(), dq.values())?,
            tvd: tvd_values(dp.values(), dq.values())?,
            jsd_se: 0.0,
            tvd_se: 0.0,
            samples: 0,
            exact: true,
        });
    }
    chain_distances_mc(p, q, samples, seed)
}

/// Monte Carlo route of [`chain_distances`] regardless of `k`.
pub fn chain_distances_mc(p: &GrfModel, q: &GrfModel, samples: usize, seed: u64) -> Result<ChainDistances> {
    same_chain(p, q)?;
    if samples < 2 {
        return Err(Error::Argument("need at least 2 Monte Carlo samples".into()));
    }
    let k = p.k();
    let mut rng = stream(seed, &[0x6a5d]);
    let mut x = vec![false; k];
    let (mut js, mut js2, mut tv, mut tv2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        if rng.random::<bool>() {
            p.sample(&mut rng, &mut x);
        } else {
            q.sample(&mut rng, &mut x);
        }
        let t = ((p.log_eval(&x)? - q.log_eval(&x)?) / 2.0).tanh();
        let h = 0.5 * js_kernel(t) / std::f64::consts::LN_2;
        js += h;
        js2 += h * h;
        tv += t.abs();
        tv2 += t * t;
    }
    let n = samples as f64;
    let se = |s: f64, s2: f64| ((s2 / n - (s / n).powi(2)).max(0.0) / (n - 1.0)).sqrt();
    let div = js / n;
    let jsd = div.max(0.0).sqrt();
    // delta method for the square root
    let jsd_se = if jsd > 0.0 { se(js, js2) / (2.0 * jsd) } else { 0.0 };
    Ok(ChainDistances {
        jsd,
        hellinger: hellinger_streaming(p, q)?,
        tvd: tv / n,
        jsd_se,
        tvd_se: se(tv, tv2),
        samples,
        exact: false,
    })
}

/// Generator and budget of the chain-scaling experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainScalingConfig {
    pub lengths: Vec<usize>,
    pub instances: usize,
    pub shots_per_marginal: u64,
    pub seed: u64,
    /// Per-site error probability drawn uniformly from this range.
    pub error_range: (f64, f64),
    /// Nearest-neighbour Pearson correlation drawn uniformly from this range.
    pub coupling_range: (f64, f64),
    /// Monte Carlo draws per JSD/TVD estimate when `L > 16`.
    pub mc_samples: usize,
}

impl Default for ChainScalingConfig {
    fn default() -> Self {
        Self {
            lengths: vec![4, 8, 16, 25, 50, 75, 100],
            instances: 20,
            shots_per_marginal: 10_000,
            seed: 2020,
            error_range: (0.01, 0.05),
            coupling_range: (0.0, 0.3),
            mc_samples: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub length: usize,
    pub jsd_mean: f64,
    pub jsd_std: f64,
    pub hellinger_mean: f64,
    pub hellinger_std: f64,
}

/// Least-squares fit of `y = a f(L)` through the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub a: f64,
    /// Coefficient of determination about the mean of `y`.
    pub r2: f64,
}

pub fn fit_through_origin(x: &[f64], y: &[f64]) -> ScalingFit {
    let a = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|a| a * a).sum::<f64>();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(y).map(|(a_, b)| (b - a * a_).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - mean).powi(2)).sum();
    ScalingFit { a, r2: 1.0 - ss_res / ss_tot }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainScalingReport {
    pub config: ChainScalingConfig,
    pub rows: Vec<ScalingRow>,
    pub jsd_sqrt: ScalingFit,
    pub jsd_linear: ScalingFit,
    pub hellinger_sqrt: ScalingFit,
    pub hellinger_linear: ScalingFit,
}

impl ChainScalingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("L,jsd_mean,jsd_std,hellinger_mean,hellinger_std\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.length, r.jsd_mean, r.jsd_std, r.hellinger_mean, r.hellinger_std
            ));
        }
        out
    }
}

/// Random binary Markov chain of length `l` as a GRF on pair cliques.
pub fn random_chain_truth<R: Rng>(rng: &mut R, l: usize, cfg: &ChainScalingConfig) -> Result<GrfModel> {
    let (e0, e1) = cfg.error_range;
    let (c0, c1) = cfg.coupling_range;
    if !(0.0 < e0 && e0 <= e1 && e1 < 0.5) {
        return Err(Error::Config(format!("error_range {:?} must lie in (0, 0.5)", cfg.error_range)));
    }
    if !(0.0 <= c0 && c0 <= c1 && c1 < 1.0) {
        return Err(Error::Config(format!("coupling_range {:?} must lie in [0, 1)", cfg.coupling_range)));
    }
    let layout = PartitionLayout::singletons(l);
    let rates: Vec<f64> = (0..l).map(|_| rng.random_range(e0..=e1)).collect();
    if l == 1 {
        let chain = JunctionChain::new(vec![vec![0]], 1)?;
        return GrfModel::from_marginals(layout, chain, vec![vec![1.0 - rates[0], rates[0]]]);
    }
    let chain = JunctionChain::sliding(l, 2)?;
    let marginals = (0..l - 1)
        .map(|i| {
            let (a, b) = (rates[i], rates[i + 1]);
            let rho = rng.random_range(c0..=c1);
            let p11 = (a * b + rho * (a * (1.0 - a) * b * (1.0 - b)).sqrt()).min(a.min(b));
            // bit 0 = site i, bit 1 = site i+1
            vec![1.0 - a - b + p11, a - p11, b - p11, p11]
        })
        .collect();
    GrfModel::from_marginals(layout, chain, marginals)
}

/// Truth-vs-estimate distances as a function of chain length with a fixed
/// sample budget per clique marginal.
pub fn chain_scaling_experiment(cfg: &ChainScalingConfig) -> Result<ChainScalingReport> {
    if cfg.lengths.is_empty() || cfg.instances == 0 || cfg.shots_per_marginal == 0 {
        return Err(Error::Config("lengths, instances and shots_per_marginal must be non-empty/positive".into()));
    }
    if let Some(&l) = cfg.lengths.iter().find(|&&l| l == 0) {
        return Err(Error::Config(format!("chain length {l} must be positive")));
    }
    let rows = cfg
        .lengths
        .iter()
        .map(|&l| {
            let results = (0..cfg.instances)
                .into_par_iter()
                .map(|inst| {
                    let mut rng = stream(cfg.seed, &[l as u64, inst as u64]);
                    let truth = random_chain_truth(&mut rng, l, cfg)?;
                    let estimate = fit_grf_with(&truth.layout, &truth.chain, |clique| {
                        let t = truth.chain.cliques().iter().position(|c| c == clique).expect("own clique");
                        let mut r = stream(cfg.seed, &[l as u64, inst as u64, 1 + t as u64]);
                        let counts = multinomial(&mut r, cfg.shots_per_marginal, truth.clique_marginals[t].values());
                        Ok(counts.iter().map(|&c| c as f64 / cfg.shots_per_marginal as f64).collect())
                    })?;
                    let seed = cfg.seed ^ ((l as u64) << 32 | inst as u64);
                    chain_distances(&truth, &estimate, cfg.mc_samples, seed)
                })
                .collect::<Result<Vec<_>>>()?;
            let stats = |f: fn(&ChainDistances) -> f64| {
                let v: Vec<f64> = results.iter().map(f).collect();
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
                (mean, var.sqrt())
            };
            let (jm, js) = stats(|d| d.jsd);
            let (hm, hs) = stats(|d| d.hellinger);
            Ok(ScalingRow { length: l, jsd_mean: jm, jsd_std: js, hellinger_mean: hm, hellinger_std: hs })
        })
        .collect::<Result<Vec<_>>>()?;
    let ls: Vec<f64> = rows.iter().map(|r| r.length as f64).collect();
    let sq: Vec<f64> = ls.iter().map(|l| l.sqrt()).collect();
    let jy: Vec<f64> = rows.iter().map(|r| r.jsd_mean).collect();
    let hy: Vec<f64> = rows.iter().map(|r| r.hellinger_mean).collect();
    Ok(ChainScalingReport {
        config: cfg.clone(),
        jsd_sqrt: fit_through_origin(&sq, &jy),
        jsd_linear: fit_through_origin(&ls, &jy),
        hellinger_sqrt: fit_through_origin(&sq, &hy),
        hellinger_linear: fit_through_origin(&ls, &hy),
        rows,
    })
}
