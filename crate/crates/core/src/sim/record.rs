//! Experiment records: per-length, per-sequence outcome counts.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::layout::PartitionLayout;

/// Measured bit string of an `n`-qubit register. Rendered with qubit 0 as the
/// rightmost character.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    n_bits: usize,
    words: Vec<u64>,
}

impl Outcome {
    pub fn zeros(n_bits: usize) -> Self {
        Self { n_bits, words: vec![0; n_bits.div_ceil(64).max(1)] }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    #[inline]
    pub fn bit(&self, q: usize) -> bool {
        (self.words[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, q: usize, value: bool) {
        let mask = 1u64 << (q % 64);
        if value {
            self.words[q / 64] |= mask;
        } else {
            self.words[q / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, q: usize) {
        self.words[q / 64] ^= 1u64 << (q % 64);
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Self::zeros(s.len());
        for (q, c) in s.chars().rev().enumerate() {
            match c {
                '0' => {}
                '1' => out.set_bit(q, true),
                other => {
                    return Err(Error::Record(format!("invalid bit {other:?} in outcome {s:?}")));
                }
            }
        }
        Ok(out)
    }

    /// Bit string with qubit order reversed (qubit 0 becomes leftmost).
    pub fn reversed(&self) -> Self {
        let mut out = Self::zeros(self.n_bits);
        for q in 0..self.n_bits {
            out.set_bit(self.n_bits - 1 - q, self.bit(q));
        }
        out
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.n_bits).rev().map(|q| if self.bit(q) { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Outcome::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Outcome counts of one sequence.
pub type CountTable = BTreeMap<Outcome, u64>;

/// Synthetic or ingested experiment data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord", into = "RawRecord")]
pub struct ExperimentRecord {
    layout: PartitionLayout,
    shots: u64,
    seed: Option<u64>,
    data: BTreeMap<u32, Vec<CountTable>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    layout: PartitionLayout,
    n_qubits: usize,
    shots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    data: BTreeMap<u32, Vec<CountTable>>,
}

impl TryFrom<RawRecord> for ExperimentRecord {
    type Error = Error;

    fn try_from(raw: RawRecord) -> Result<Self> {
        let layout = raw.layout.with_n_qubits(raw.n_qubits)?;
        ExperimentRecord::new(layout, raw.shots, raw.seed, raw.data)
    }
}

impl From<ExperimentRecord> for RawRecord {
    fn from(rec: ExperimentRecord) -> Self {
        RawRecord {
            n_qubits: rec.layout.n_qubits(),
            layout: rec.layout,
            shots: rec.shots,
            seed: rec.seed,
            data: rec.data,
        }
    }
}

impl ExperimentRecord {
    /// Validates that every table holds `shots` counts of `n_qubits`-bit
    /// outcomes.
    pub fn new(
        layout: PartitionLayout,
        shots: u64,
        seed: Option<u64>,
        data: BTreeMap<u32, Vec<CountTable>>,
    ) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Record("shots must be at least 1".into()));
        }
        if data.is_empty() {
            return Err(Error::Record("no sequence lengths".into()));
        }
        let n = layout.n_qubits();
        let mut bad = Vec::new();
        for (m, tables) in &data {
            if tables.is_empty() {
                return Err(Error::Record(format!("no sequences at length {m}")));
            }
            for (s, table) in tables.iter().enumerate() {
                if let Some(o) = table.keys().find(|o| o.n_bits() != n) {
                    return Err(Error::Record(format!(
                        "outcome {o} at length {m}, sequence {s} has {} bits, expected {n}",
                        o.n_bits()
                    )));
                }
                let total: u64 = table.values().sum();
                if total != shots {
                    bad.push(format!("m={m} seq={s} ({total})"));
                }
            }
        }
        if !bad.is_empty() {
            return Err(Error::Record(format!(
                "counts do not sum to {shots} shots: {}",
                bad.join(", ")
            )));
        }
        Ok(Self { layout, shots, seed, data })
    }

    pub fn layout(&self) -> &PartitionLayout {
        &self.layout
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn lengths(&self) -> Vec<u32> {
        self.data.keys().copied().collect()
    }

    pub fn data(&self) -> &BTreeMap<u32, Vec<CountTable>> {
        &self.data
    }

    pub fn sequences(&self, m: u32) -> Option<&[CountTable]> {
        self.data.get(&m).map(Vec::as_slice)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Same record with the order of sequences at each length permuted by
    /// `perm(m, count)`; used to check order invariance.
    pub fn with_sequence_order<F>(&self, mut perm: F) -> Self
    where
        F: FnMut(u32, usize) -> Vec<usize>,
    {
        let data = self
            .data
            .iter()
            .map(|(&m, tables)| {
                let order = perm(m, tables.len());
                (m, order.into_iter().map(|i| tables[i].clone()).collect())
            })
            .collect();
        Self { data, ..self.clone() }
    }
}
