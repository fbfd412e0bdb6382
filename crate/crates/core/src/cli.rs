//! Run configuration and the batch commands behind the `noisecorr` binary.
//!
//! Every command reads a [`RunConfig`] (TOML or JSON), writes its results
//! into `output_dir` atomically, and stamps each file with the config hash
//! and seed so a rerun can be checked bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    correlation_matrix, covariance_matrix, fidelity_from_eigs, matrix_csv, mutual_information, set_label, LogBase,
};
use crate::bootstrap::{ensemble, jsd_ci, BootstrapOptions, JsdMode, ResampleMode, ONE_SIGMA};
use crate::error::{Error, Result};
use crate::grf::{chain_scaling_experiment, compare_grf, fit_grf, fit_grf_from_record, ChainScalingConfig, JunctionChain};
use crate::layout::PartitionLayout;
use crate::protocol::{reconstruct, FitOptions, ReconstructionResult};
use crate::sim::{
    clifford_average, sample_experiment, CountTable, ExperimentRecord, NoiseModel, Outcome, RandomNoise, SamplingMode,
    Schedule, SpamModel,
};

/// Twirled sets; `sets` wins over `n_qubits` (which means all singletons).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    pub sets: Option<Vec<Vec<usize>>>,
    pub n_qubits: Option<usize>,
}

impl LayoutConfig {
    pub fn build(&self) -> Result<PartitionLayout> {
        match (&self.sets, self.n_qubits) {
            (Some(sets), n) => {
                let needed = sets.iter().flatten().map(|&q| q + 1).max().unwrap_or(0);
                PartitionLayout::new(sets.clone(), n.unwrap_or(needed))
            }
            (None, Some(n)) if n > 0 => Ok(PartitionLayout::singletons(n)),
            _ => Err(Error::Config("layout needs `sets` or a positive `n_qubits`".into())),
        }
    }
}

/// Either a fully specified model or a random one drawn from the run seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub model: Option<NoiseModel>,
    pub random: Option<RandomNoise>,
}

impl NoiseConfig {
    pub fn build(&self, seed: u64) -> Result<NoiseModel> {
        match (&self.model, &self.random) {
            (Some(m), None) => {
                m.validate()?;
                Ok(m.clone())
            }
            (None, Some(r)) => r.build(seed),
            _ => Err(Error::Config("noise needs exactly one of `model` or `random`".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub lengths: Vec<u32>,
    pub sequences_per_length: usize,
    pub shots: u64,
    #[serde(default)]
    pub mode: SamplingMode,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Base of the JSD values reported by `grf` and `bootstrap`.
    pub log_base: LogBase,
    /// Set groups to report fidelities for; every single set when empty.
    pub fidelity_subsets: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrfConfig {
    pub cliques: Vec<Vec<usize>>,
    #[serde(default = "default_max_clique")]
    pub max_clique: usize,
}

fn default_max_clique() -> usize {
    crate::grf::DEFAULT_MAX_CLIQUE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub n_reps: usize,
    pub mode: ResampleMode,
    pub level: f64,
    pub jsd_mode: JsdMode,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { n_reps: 1000, mode: ResampleMode::PerSequence, level: ONE_SIGMA, jsd_mode: JsdMode::Both }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Every random stream of the run derives from this value.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub layout: Option<LayoutConfig>,
    pub noise: Option<NoiseConfig>,
    pub spam: Option<SpamModel>,
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    pub grf: Option<GrfConfig>,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    /// The experiment's own `seed` field is replaced by the run seed.
    pub chain_scaling: Option<ChainScalingConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: default_output_dir(),
            layout: None,
            noise: None,
            spam: None,
            schedule: None,
            fit: FitOptions::default(),
            analysis: AnalysisConfig::default(),
            grf: None,
            bootstrap: BootstrapConfig::default(),
            chain_scaling: None,
        }
    }
}

impl RunConfig {
    /// Parses TOML or JSON, chosen by extension (`.json`, otherwise TOML).
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if is_json { Self::from_json(&text)? } else { Self::from_toml(&text)? };
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every section that is present, before any computation.
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        };
        let layout = self.layout.as_ref().map(LayoutConfig::build).transpose().map_err(cfg_err)?;
        if let Some(noise) = &self.noise {
            let model = noise.build(self.seed).map_err(cfg_err)?;
            if let Some(l) = &layout {
                if l.n_qubits() > model.n_qubits {
                    return Err(Error::Config(format!(
                        "layout spans {} qubits but the noise model has {}",
                        l.n_qubits(),
                        model.n_qubits
                    )));
                }
            }
        }
        if let Some(spam) = &self.spam {
            spam.validate().map_err(cfg_err)?;
        }
        if let Some(s) = &self.schedule {
            if s.lengths.is_empty() || s.sequences_per_length == 0 || s.shots == 0 {
                return Err(Error::Config("schedule needs lengths, sequences_per_length >= 1 and shots >= 1".into()));
            }
        }
        if self.fit.min_points < 2 {
            return Err(Error::Config("fit.min_points must be at least 2".into()));
        }
        if let (Some(g), Some(l)) = (&self.grf, &layout) {
            self.chain_for(g, l.k()).map_err(cfg_err)?;
        }
        let b = &self.bootstrap;
        if b.n_reps < 2 || !(0.0 < b.level && b.level < 1.0) {
            return Err(Error::Config("bootstrap needs n_reps >= 2 and level in (0, 1)".into()));
        }
        Ok(())
    }

    fn chain_for(&self, g: &GrfConfig, k: usize) -> Result<JunctionChain> {
        JunctionChain::with_max_clique(g.cliques.clone(), k, g.max_clique)
    }

    /// SHA-256 of the canonical JSON form of the configuration; the output
    /// directory is left out so relocated reruns carry the same hash.
    pub fn hash(&self) -> String {
        let located = Self { output_dir: PathBuf::new(), ..self.clone() };
        let canonical = serde_json::to_vec(&located).expect("config serialises");
        hex::encode(Sha256::digest(&canonical))
    }

    fn require<'a, T>(&self, v: &'a Option<T>, name: &str) -> Result<&'a T> {
        v.as_ref().ok_or_else(|| Error::Config(format!("config has no `{name}` section")))
    }
}

/// Process exit status for an error: 2 config, 3 data, 4 numeric.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Argument(_) | Error::Model(_) | Error::Layout(_) | Error::TooLarge { .. } => 2,
        Error::Numeric(_) => 4,
        _ => 3,
    }
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let file_name = path.file_name().ok_or(Error::Empty("output file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// JSON envelope carried by every output file.
#[derive(Serialize, Deserialize)]
pub struct Stamped<T> {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub result: T,
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    command: &'static str,
    hash: String,
    written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig, command: &'static str) -> Self {
        Self { cfg, command, hash: cfg.hash(), written: Vec::new() }
    }

    fn json<T: Serialize>(&mut self, name: &str, result: &T) -> Result<()> {
        let env = Stamped { command: self.command.to_string(), config_hash: self.hash.clone(), seed: self.cfg.seed, result };
        let mut text = serde_json::to_string_pretty(&env)?;
        text.push('\n');
        self.raw(name, text.as_bytes())
    }

    /// CSV preceded by a `#` comment line with the stamp.
    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let text = format!("# command={} config_hash={} seed={}\n{body}", self.command, self.hash, self.cfg.seed);
        self.raw(name, text.as_bytes())
    }

    fn raw(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.cfg.output_dir.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }
}

/// Reads an [`ExperimentRecord`] written by `simulate` or `ingest` (bare or
/// inside the output envelope).
pub fn read_record(path: &Path) -> Result<ExperimentRecord> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let inner = match value.get("result") {
        Some(r) if value.get("config_hash").is_some() => r.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(inner)?)
}

/// Samples a record from the configured model and writes it together with
/// the ground-truth averaged eigenvalues.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let layout = cfg.require(&cfg.layout, "layout")?.build()?;
    let model = cfg.require(&cfg.noise, "noise")?.build(cfg.seed)?;
    let s = cfg.require(&cfg.schedule, "schedule")?;
    let spam = cfg.spam.clone().unwrap_or_else(|| SpamModel::ideal(model.n_qubits));
    let schedule = Schedule {
        lengths: s.lengths.clone(),
        sequences_per_length: s.sequences_per_length,
        shots: s.shots,
        seed: cfg.seed,
        mode: s.mode,
    };
    let rec = sample_experiment(&model, &spam, &layout, &schedule)?;
    let mut w = Writer::new(cfg, "simulate");
    w.json("record.json", &rec)?;
    if let Ok(truth) = clifford_average(&model, rec.layout()) {
        w.json("truth_eigenvalues.json", &truth)?;
        w.csv("truth_eigenvalues.csv", &format!("index,value\n{}", truth.to_csv()))?;
    }
    Ok(w.written)
}

/// Bit order of outcome strings in an ingested counts file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BitOrder {
    /// Character 0 is qubit 0 (reversed on ingestion).
    Qubit0First,
    /// Rightmost character is qubit 0, the native order.
    #[default]
    Qubit0Last,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum IngestFormat {
    /// A record as written by `simulate`.
    Native,
    /// Per-sequence count dictionaries as exported from a device.
    Counts,
}

/// Device-style export: one entry per executed sequence.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsFile {
    layout: Option<Vec<Vec<usize>>>,
    n_qubits: Option<usize>,
    shots: Option<u64>,
    bit_order: Option<BitOrder>,
    sequences: Vec<CountsEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsEntry {
    length: u32,
    counts: BTreeMap<String, u64>,
}

/// Converts a counts-dictionary export into a record. `order` overrides the
/// file's declared bit order.
pub fn ingest_counts(text: &str, order: Option<BitOrder>) -> Result<(ExperimentRecord, Vec<String>)> {
    let file: CountsFile = serde_json::from_str(text).map_err(|e| Error::Record(e.to_string()))?;
    if file.sequences.is_empty() {
        return Err(Error::Record("no sequences".into()));
    }
    let mut log = Vec::new();
    let order = match (order, file.bit_order) {
        (Some(o), _) => o,
        (None, Some(o)) => o,
        (None, None) => {
            log.push("no bit order declared; assuming qubit0_last".into());
            BitOrder::Qubit0Last
        }
    };
    let width = file.sequences[0].counts.keys().next().map_or(0, String::len);
    let n = file.n_qubits.unwrap_or(width);
    let layout = match file.layout {
        Some(sets) => PartitionLayout::new(sets, n)?,
        None => PartitionLayout::singletons(n),
    };
    let shots = match file.shots {
        Some(s) => s,
        None => file.sequences[0].counts.values().sum(),
    };
    let mut data: BTreeMap<u32, Vec<CountTable>> = BTreeMap::new();
    for (s, entry) in file.sequences.iter().enumerate() {
        let mut table = CountTable::new();
        for (bits, &c) in &entry.counts {
            if bits.len() != n {
                return Err(Error::Record(format!("sequence {s}: outcome {bits:?} has {} bits, expected {n}", bits.len())));
            }
            let o = Outcome::parse(bits)?;
            let o = if order == BitOrder::Qubit0First { o.reversed() } else { o };
            *table.entry(o).or_insert(0) += c;
        }
        data.entry(entry.length).or_default().push(table);
    }
    if order == BitOrder::Qubit0First {
        log.push("outcome strings reversed from qubit0_first to qubit0_last".into());
    }
    let rec = ExperimentRecord::new(layout, shots, None, data)?;
    log.push(format!(
        "{} sequences over {} lengths, {} shots each",
        file.sequences.len(),
        rec.lengths().len(),
        shots
    ));
    Ok((rec, log))
}

#[derive(Serialize)]
struct IngestLog {
    source: String,
    format: String,
    messages: Vec<String>,
}

pub fn cmd_ingest(cfg: &RunConfig, path: &Path, format: IngestFormat, order: Option<BitOrder>) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(path)?;
    let (rec, messages) = match format {
        IngestFormat::Native => (read_record(path)?, vec!["native record".to_string()]),
        IngestFormat::Counts => ingest_counts(&text, order)?,
    };
    let mut w = Writer::new(cfg, "ingest");
    w.json("record.json", &rec)?;
    w.json(
        "ingest_log.json",
        &IngestLog { source: path.display().to_string(), format: format!("{format:?}").to_lowercase(), messages },
    )?;
    Ok(w.written)
}

fn record_layout_check(cfg: &RunConfig, rec: &ExperimentRecord) -> Result<()> {
    if let Some(l) = &cfg.layout {
        let want = l.build()?;
        if want.sets() != rec.layout().sets() {
            return Err(Error::Config(format!(
                "config layout {:?} differs from the record's {:?}",
                want.sets(),
                rec.layout().sets()
            )));
        }
    }
    Ok(())
}

fn numeric_guard(res: &ReconstructionResult) -> Result<()> {
    if res.eigenvalues.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("reconstruction produced non-finite eigenvalues".into()));
    }
    Ok(())
}

pub fn cmd_reconstruct(cfg: &RunConfig, rec: &ExperimentRecord) -> Result<Vec<PathBuf>> {
    record_layout_check(cfg, rec)?;
    let res = reconstruct(rec, &cfg.fit)?;
    numeric_guard(&res)?;
    let mut w = Writer::new(cfg, "reconstruct");
    w.json("reconstruction.json", &res)?;
    w.csv("reconstruction.csv", &res.to_csv())?;
    Ok(w.written)
}

#[derive(Serialize)]
struct MiRow {
    a: String,
    b: String,
    mi_nats: f64,
}

#[derive(Serialize)]
struct FidelityRow {
    sets: Vec<usize>,
    fidelity: f64,
    infidelity: f64,
}

#[derive(Serialize)]
struct AnalysisReport {
    labels: Vec<String>,
    correlation: Vec<Vec<f64>>,
    zero_variance: Vec<bool>,
    hinton: Vec<(usize, usize, f64)>,
    covariance: Vec<Vec<f64>>,
    mutual_information: Vec<MiRow>,
    fidelities: Vec<FidelityRow>,
}

pub fn cmd_analyze(cfg: &RunConfig, rec: &ExperimentRecord) -> Result<Vec<PathBuf>> {
    record_layout_check(cfg, rec)?;
    let res = reconstruct(rec, &cfg.fit)?;
    numeric_guard(&res)?;
    let p = &res.observed_rates;
    let layout = p.layout();
    let k = p.k();
    let corr = correlation_matrix(p);
    let cov = covariance_matrix(p);
    let labels: Vec<String> = layout.sets().iter().map(|s| set_label(s)).collect();
    let mut mi = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            mi.push(MiRow { a: labels[a].clone(), b: labels[b].clone(), mi_nats: mutual_information(p, &[a], &[b])? });
        }
    }
    let subsets = if cfg.analysis.fidelity_subsets.is_empty() {
        (0..k).map(|i| vec![i]).collect()
    } else {
        cfg.analysis.fidelity_subsets.clone()
    };
    let fidelities = subsets
        .into_iter()
        .map(|s| {
            let f = fidelity_from_eigs(&res.eigenvalues, &s)?;
            Ok(FidelityRow { sets: s, fidelity: f.f, infidelity: f.r })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut w = Writer::new(cfg, "analyze");
    w.csv("correlation.csv", &corr.to_csv())?;
    w.csv("covariance.csv", &matrix_csv(layout, &cov))?;
    let mut mi_csv = String::from("a,b,mi_nats\n");
    for r in &mi {
        mi_csv.push_str(&format!("{},{},{}\n", r.a, r.b, r.mi_nats));
    }
    w.csv("mutual_information.csv", &mi_csv)?;
    let mut f_csv = String::from("sets,fidelity,infidelity\n");
    for r in &fidelities {
        let s: Vec<String> = r.sets.iter().map(usize::to_string).collect();
        f_csv.push_str(&format!("{},{},{}\n", s.join(" "), r.fidelity, r.infidelity));
    }
    w.csv("fidelity.csv", &f_csv)?;
    let report = AnalysisReport {
        labels,
        hinton: corr.hinton_triplets(),
        correlation: corr.matrix,
        zero_variance: corr.zero_variance,
        covariance: cov,
        mutual_information: mi,
        fidelities,
    };
    w.json("analysis.json", &report)?;
    Ok(w.written)
}

#[derive(Serialize)]
struct GrfReport {
    log_base: LogBase,
    /// JSD between the global reconstruction and the GRF of its marginals.
    jsd_global_first: f64,
    /// JSD between the global reconstruction and the GRF built from
    /// per-clique marginal reconstructions.
    jsd_marginal_first: f64,
    warnings: Vec<String>,
}

pub fn cmd_grf(cfg: &RunConfig, rec: &ExperimentRecord) -> Result<Vec<PathBuf>> {
    record_layout_check(cfg, rec)?;
    let g = cfg.require(&cfg.grf, "grf")?;
    let chain = cfg.chain_for(g, rec.layout().k()).map_err(|e| Error::Config(e.to_string()))?;
    let res = reconstruct(rec, &cfg.fit)?;
    numeric_guard(&res)?;
    let global_model = fit_grf(&res.observed_rates, &chain)?;
    let marginal_model = fit_grf_from_record(rec, &chain, &cfg.fit)?;
    let base = cfg.analysis.log_base;
    let report = GrfReport {
        log_base: base,
        jsd_global_first: compare_grf(&res.observed_rates, &global_model, base)?,
        jsd_marginal_first: compare_grf(&res.observed_rates, &marginal_model, base)?,
        warnings: global_model.warnings.iter().chain(&marginal_model.warnings).cloned().collect(),
    };
    let mut w = Writer::new(cfg, "grf");
    w.json("grf_model.json", &marginal_model)?;
    w.json("grf.json", &report)?;
    Ok(w.written)
}

pub fn cmd_bootstrap(cfg: &RunConfig, rec: &ExperimentRecord) -> Result<Vec<PathBuf>> {
    record_layout_check(cfg, rec)?;
    let b = &cfg.bootstrap;
    let options = BootstrapOptions { n_reps: b.n_reps, seed: cfg.seed, mode: b.mode, level: b.level, fit: cfg.fit.clone() };
    let ens = ensemble(rec, &options)?;
    numeric_guard(&ens.point)?;
    let summary = ens.summary(b.level)?;
    let mut w = Writer::new(cfg, "bootstrap");
    w.json("bootstrap_summary.json", &summary)?;
    let mut csv = String::from("statistic,index,point,lo,hi,level,n_reps\n");
    for (name, rows) in [("eigenvalue", &summary.eigenvalues), ("observed_rate", &summary.observed_rates)] {
        for (j, s) in rows.iter().enumerate() {
            csv.push_str(&format!("{name},{j},{},{},{},{},{}\n", s.point, s.lo, s.hi, s.level, s.n_reps));
        }
    }
    w.csv("bootstrap_ci.csv", &csv)?;
    if let Some(g) = &cfg.grf {
        let chain = cfg.chain_for(g, rec.layout().k()).map_err(|e| Error::Config(e.to_string()))?;
        let iv = jsd_ci(&ens, &chain, b.jsd_mode, b.level)?;
        w.json("bootstrap_jsd.json", &iv)?;
    }
    Ok(w.written)
}

pub fn cmd_chain_scaling(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut sc = cfg.chain_scaling.clone().unwrap_or_default();
    sc.seed = cfg.seed;
    let report = chain_scaling_experiment(&sc)?;
    let mut w = Writer::new(cfg, "chain-scaling");
    w.json("chain_scaling.json", &report)?;
    w.csv("chain_scaling.csv", &report.to_csv())?;
    Ok(w.written)
}
