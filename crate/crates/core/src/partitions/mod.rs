//! Partitions of a sample and the similarity measures that compare them.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StadionError};

mod contingency;
mod measures;

pub use contingency::{
    contingency, contingency_with_cap, pair_counts, ContingencyTable, PairCounts, DEFAULT_TABLE_CAP,
};
pub use measures::{compare, compare_table, expected_mutual_information, MeasureId, Orientation};

/// Hard labels `0..k` for `N ≥ 1` samples. Some of the `k` clusters may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(StadionError::InvalidPartition("no samples".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(StadionError::InvalidPartition(format!(
                "label {bad} is not below k = {k}"
            )));
        }
        Ok(Self { labels, k })
    }

    /// `k` is taken as one more than the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        Self::new(labels, k)
    }

    /// Every sample in cluster 0.
    pub fn trivial(n: usize) -> Result<Self> {
        Self::new(vec![0; n], 1)
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Cluster sizes `N_k`, indexed by label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn n_nonempty(&self) -> usize {
        self.sizes().iter().filter(|&&s| s > 0).count()
    }

    /// Sample indices of each cluster, in increasing order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// Relabels clusters in order of first appearance and drops empty ones.
    pub fn canonical(&self) -> Partition {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        Partition { labels, k: next }
    }

    /// Labels of the samples at `indices` (repetitions allowed), keeping `k`.
    pub fn restrict(&self, indices: &[usize]) -> Partition {
        Partition {
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            k: self.k,
        }
    }

    /// Same grouping of samples, regardless of label names.
    pub fn equivalent(&self, other: &Partition) -> bool {
        self.len() == other.len() && self.canonical().labels == other.canonical().labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks_labels() {
        assert!(Partition::new(vec![0, 1, 2], 2).is_err());
        assert!(Partition::new(vec![], 1).is_err());
        let p = Partition::new(vec![0, 0, 2], 4).unwrap();
        assert_eq!(p.sizes(), vec![2, 0, 1, 0]);
        assert_eq!(p.n_nonempty(), 2);
        assert_eq!(p.sizes().iter().sum::<usize>(), p.len());
    }

    #[test]
    fn canonical_relabels_by_first_appearance() {
        let p = Partition::from_labels(vec![3, 3, 1, 0, 1]).unwrap();
        let c = p.canonical();
        assert_eq!(c.labels(), &[0, 0, 1, 2, 1]);
        assert_eq!(c.k(), 3);
        assert!(p.equivalent(&c));
        assert!(!p.equivalent(&Partition::trivial(5).unwrap()));
    }

    #[test]
    fn members_and_restrict() {
        let p = Partition::from_labels(vec![1, 0, 1]).unwrap();
        assert_eq!(p.members(), vec![vec![1], vec![0, 2]]);
        assert_eq!(p.restrict(&[2, 2, 1]).labels(), &[1, 1, 0]);
    }
}
