use serde::Serialize;

use super::Partition;
use crate::error::{Result, StadionError};

/// Largest `K` or `K'` accepted by [`contingency`].
pub const DEFAULT_TABLE_CAP: usize = 4096;

/// Dense `K × K'` co-occurrence counts `N_kk' = |C_k ∩ C'_k'|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    /// Builds a table from explicit counts (row-major). Mainly for tests and oracles.
    pub fn from_counts(rows: usize, cols: usize, counts: Vec<u64>) -> Result<Self> {
        if rows == 0 || cols == 0 || counts.len() != rows * cols {
            return Err(StadionError::InvalidPartition(format!(
                "{} counts cannot fill a {rows}x{cols} table",
                counts.len()
            )));
        }
        let mut row_sums = vec![0; rows];
        let mut col_sums = vec![0; cols];
        for r in 0..rows {
            for c in 0..cols {
                let v = counts[r * cols + c];
                row_sums[r] += v;
                col_sums[c] += v;
            }
        }
        let total = row_sums.iter().sum();
        if total == 0 {
            return Err(StadionError::InvalidPartition("empty table".into()));
        }
        Ok(Self {
            rows,
            cols,
            counts,
            row_sums,
            col_sums,
            total,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.counts[r * self.cols + c]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn transpose(&self) -> ContingencyTable {
        let mut counts = vec![0; self.counts.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                counts[c * self.rows + r] = self.get(r, c);
            }
        }
        ContingencyTable {
            rows: self.cols,
            cols: self.rows,
            counts,
            row_sums: self.col_sums.clone(),
            col_sums: self.row_sums.clone(),
            total: self.total,
        }
    }

    /// True when both partitions group the samples identically, i.e. every
    /// non-empty row and column holds exactly one non-zero cell.
    pub fn is_matching(&self) -> bool {
        let nonzero_rows = self.row_sums.iter().filter(|&&s| s > 0).count();
        let nonzero_cols = self.col_sums.iter().filter(|&&s| s > 0).count();
        let nonzero_cells = self.counts.iter().filter(|&&v| v > 0).count();
        nonzero_cells == nonzero_rows && nonzero_cells == nonzero_cols
    }

    /// Number of non-empty clusters on each side.
    pub fn occupied(&self) -> (usize, usize) {
        (
            self.row_sums.iter().filter(|&&s| s > 0).count(),
            self.col_sums.iter().filter(|&&s| s > 0).count(),
        )
    }
}

/// Pair tallies over all `N(N−1)/2` unordered pairs of samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    /// Together in both partitions.
    pub n11: u64,
    /// Apart in both partitions.
    pub n00: u64,
    /// Together in the first partition only.
    pub n10: u64,
    /// Together in the second partition only.
    pub n01: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.n11 + self.n00 + self.n10 + self.n01
    }
}

pub fn contingency(a: &Partition, b: &Partition) -> Result<ContingencyTable> {
    contingency_with_cap(a, b, DEFAULT_TABLE_CAP)
}

pub fn contingency_with_cap(a: &Partition, b: &Partition, cap: usize) -> Result<ContingencyTable> {
    if a.len() != b.len() {
        return Err(StadionError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (rows, cols) = (a.k(), b.k());
    if rows > cap || cols > cap {
        return Err(StadionError::TableTooLarge { rows, cols, cap });
    }
    let mut counts = vec![0u64; rows * cols];
    let mut row_sums = vec![0u64; rows];
    let mut col_sums = vec![0u64; cols];
    for (&r, &c) in a.labels().iter().zip(b.labels()) {
        counts[r * cols + c] += 1;
        row_sums[r] += 1;
        col_sums[c] += 1;
    }
    Ok(ContingencyTable {
        rows,
        cols,
        counts,
        row_sums,
        col_sums,
        total: a.len() as u64,
    })
}

#[inline]
pub(crate) fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

pub fn pair_counts(t: &ContingencyTable) -> PairCounts {
    let n11: u64 = t.counts.iter().map(|&v| choose2(v)).sum();
    let same_a: u64 = t.row_sums.iter().map(|&v| choose2(v)).sum();
    let same_b: u64 = t.col_sums.iter().map(|&v| choose2(v)).sum();
    let n10 = same_a - n11;
    let n01 = same_b - n11;
    let n00 = choose2(t.total) - n11 - n10 - n01;
    PairCounts { n11, n00, n10, n01 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(labels: &[usize]) -> Partition {
        Partition::from_labels(labels.to_vec()).unwrap()
    }

    #[test]
    fn identical_partitions_give_diagonal() {
        let t = contingency(&p(&[0, 0, 1, 1]), &p(&[0, 0, 1, 1])).unwrap();
        assert_eq!(t.counts(), &[2, 0, 0, 2]);
        assert!(t.is_matching());
    }

    #[test]
    fn crossed_partitions_fill_every_cell() {
        let t = contingency(&p(&[0, 0, 1, 1]), &p(&[0, 1, 0, 1])).unwrap();
        assert_eq!(t.counts(), &[1, 1, 1, 1]);
        assert_eq!(t.row_sums(), &[2, 2]);
        assert_eq!(t.col_sums(), &[2, 2]);
        assert!(!t.is_matching());
    }

    #[test]
    fn one_versus_singletons() {
        let t = contingency(&p(&[0, 0, 0]), &p(&[0, 1, 2])).unwrap();
        assert_eq!((t.rows(), t.cols()), (1, 3));
        assert_eq!(t.counts(), &[1, 1, 1]);
    }

    #[test]
    fn length_mismatch_and_cap() {
        assert!(matches!(
            contingency(&p(&[0, 1]), &p(&[0])),
            Err(StadionError::LengthMismatch { left: 2, right: 1 })
        ));
        assert!(matches!(
            contingency_with_cap(&p(&[0, 1, 2]), &p(&[0, 0, 0]), 2),
            Err(StadionError::TableTooLarge { .. })
        ));
    }

    #[test]
    fn pair_counts_of_worked_tables() {
        let diag = ContingencyTable::from_counts(2, 2, vec![2, 0, 0, 2]).unwrap();
        assert_eq!(
            pair_counts(&diag),
            PairCounts {
                n11: 2,
                n00: 4,
                n10: 0,
                n01: 0
            }
        );
        let ones = ContingencyTable::from_counts(2, 2, vec![1, 1, 1, 1]).unwrap();
        assert_eq!(
            pair_counts(&ones),
            PairCounts {
                n11: 0,
                n00: 2,
                n10: 2,
                n01: 2
            }
        );
        let single = ContingencyTable::from_counts(1, 1, vec![7]).unwrap();
        assert_eq!(
            pair_counts(&single),
            PairCounts {
                n11: 21,
                n00: 0,
                n10: 0,
                n01: 0
            }
        );
    }

    #[test]
    fn transpose_swaps_margins() {
        let t = contingency(&p(&[0, 0, 1, 2]), &p(&[1, 0, 0, 0])).unwrap();
        let tt = t.transpose();
        assert_eq!(tt.row_sums(), t.col_sums());
        assert_eq!(tt.get(1, 2), t.get(2, 1));
        let pc = pair_counts(&t);
        let pt = pair_counts(&tt);
        assert_eq!((pc.n10, pc.n01), (pt.n01, pt.n10));
    }
}
