//! Partition of the register into twirled sets.
//!
//! Set `i` of a layout owns bit `i` of every pattern index, least-significant
//! bit first. A set holds one qubit (single-qubit twirl) or two qubits (a
//! pair twirled by the two-qubit Clifford group).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered disjoint partition of (a subset of) the qubits into twirled sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct PartitionLayout {
    sets: Vec<Vec<usize>>,
    n_qubits: usize,
}

impl PartitionLayout {
    /// Builds a layout over `n_qubits` qubits, validating disjointness and range.
    pub fn new(sets: Vec<Vec<usize>>, n_qubits: usize) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Layout("layout needs at least one set".into()));
        }
        let mut seen = vec![false; n_qubits];
        for set in &sets {
            if set.is_empty() || set.len() > 2 {
                return Err(Error::Layout(format!(
                    "sets must hold one or two qubits, got {set:?}"
                )));
            }
            for &q in set {
                if q >= n_qubits {
                    return Err(Error::Layout(format!(
                        "qubit {q} outside register of {n_qubits}"
                    )));
                }
                if seen[q] {
                    return Err(Error::Layout(format!("qubit {q} appears twice")));
                }
                seen[q] = true;
            }
        }
        Ok(Self { sets, n_qubits })
    }

    /// One set per qubit, set `i` = qubit `i`.
    pub fn singletons(n_qubits: usize) -> Self {
        Self::new((0..n_qubits).map(|q| vec![q]).collect(), n_qubits)
            .expect("singleton layout is valid")
    }

    /// Same sets over a (possibly larger) register.
    pub fn with_n_qubits(mut self, n_qubits: usize) -> Result<Self> {
        if n_qubits < self.n_qubits {
            return Err(Error::Layout(format!(
                "register of {n_qubits} qubits cannot hold layout over {}",
                self.n_qubits
            )));
        }
        self.n_qubits = n_qubits;
        Ok(self)
    }

    /// Number of sets, `k`.
    pub fn k(&self) -> usize {
        self.sets.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &[usize] {
        &self.sets[i]
    }

    /// Dimension `d = 2^{|s|}` of the Hilbert space of set `i`.
    pub fn set_dim(&self, i: usize) -> usize {
        1 << self.sets[i].len()
    }

    pub fn is_all_singletons(&self) -> bool {
        self.sets.iter().all(|s| s.len() == 1)
    }

    /// Length of vectors indexed by patterns over this layout.
    pub fn dim(&self) -> Result<usize> {
        if self.k() >= usize::BITS as usize {
            return Err(Error::TooLarge {
                what: "dense pattern vector",
                n: self.k(),
                cap: usize::BITS as usize - 1,
            });
        }
        Ok(1usize << self.k())
    }

    /// Validates a list of set indices (non-empty, in range, no repeats).
    pub fn check_keep(&self, keep: &[usize]) -> Result<()> {
        if keep.is_empty() {
            return Err(Error::Empty("set selection"));
        }
        let mut seen = vec![false; self.k()];
        for &i in keep {
            if i >= self.k() {
                return Err(Error::SetIndex { index: i, len: self.k() });
            }
            if seen[i] {
                return Err(Error::Argument(format!("set {i} selected twice")));
            }
            seen[i] = true;
        }
        Ok(())
    }

    /// Layout holding only the listed sets, in the listed order.
    pub fn select(&self, keep: &[usize]) -> Result<Self> {
        self.check_keep(keep)?;
        Ok(Self {
            sets: keep.iter().map(|&i| self.sets[i].clone()).collect(),
            n_qubits: self.n_qubits,
        })
    }

    /// For each qubit, the set owning it (if any).
    pub fn owner_of_qubits(&self) -> Vec<Option<usize>> {
        let mut owner = vec![None; self.n_qubits];
        for (i, set) in self.sets.iter().enumerate() {
            for &q in set {
                owner[q] = Some(i);
            }
        }
        owner
    }
}

impl TryFrom<Vec<Vec<usize>>> for PartitionLayout {
    type Error = Error;

    fn try_from(sets: Vec<Vec<usize>>) -> Result<Self> {
        let n = sets.iter().flatten().map(|&q| q + 1).max().unwrap_or(0);
        Self::new(sets, n)
    }
}

impl From<PartitionLayout> for Vec<Vec<usize>> {
    fn from(layout: PartitionLayout) -> Self {
        layout.sets
    }
}

/// Gathers the bits at `positions` of `index` into a compact index.
#[inline]
pub(crate) fn gather_bits(index: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &p)| acc | (((index >> p) & 1) << j))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlap_and_range() {
        assert!(PartitionLayout::new(vec![vec![0], vec![0, 1]], 2).is_err());
        assert!(PartitionLayout::new(vec![vec![3]], 2).is_err());
        assert!(PartitionLayout::new(vec![], 2).is_err());
        assert!(PartitionLayout::new(vec![vec![0, 1, 2]], 3).is_err());
    }

    #[test]
    fn json_round_trip_is_list_of_lists() {
        let layout = PartitionLayout::new(vec![vec![0], vec![1, 2]], 3).unwrap();
        let s = serde_json::to_string(&layout).unwrap();
        assert_eq!(s, "[[0],[1,2]]");
        let back: PartitionLayout = serde_json::from_str(&s).unwrap();
        assert_eq!(back, layout);
    }

    #[test]
    fn select_keeps_order() {
        let layout = PartitionLayout::singletons(4);
        let sub = layout.select(&[2, 0]).unwrap();
        assert_eq!(sub.sets(), &[vec![2], vec![0]]);
        assert!(layout.select(&[4]).is_err());
        assert!(layout.select(&[]).is_err());
    }

    #[test]
    fn gather() {
        assert_eq!(gather_bits(0b1010, &[1, 3]), 0b11);
        assert_eq!(gather_bits(0b1010, &[0, 2]), 0);
        assert_eq!(gather_bits(0b0100, &[2, 0]), 0b01);
    }
}
