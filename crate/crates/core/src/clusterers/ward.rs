//! Ward linkage by nearest-neighbour chain.
//!
//! Dissimilarities are Ward merge costs: for clusters `A` and `B` the
//! increase in within-cluster sum of squares caused by merging them,
//! `|A||B| / (|A| + |B|) · ‖c_A − c_B‖²`. They are kept in a condensed
//! upper-triangular matrix and updated with the Lance–Williams recurrence.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, StadionError};
use crate::partitions::Partition;

use super::kmeans::sq_dist;

/// Default largest N accepted, bounding the N(N−1)/2 distance state.
pub const DEFAULT_WARD_CAP: usize = 20_000;

/// One agglomeration step. Ids `0..N` are samples; the cluster created by
/// step `t` gets id `N + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    /// Increase of the within-cluster sum of squares.
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    n_samples: usize,
    merges: Vec<Merge>,
}

struct Condensed {
    n: usize,
    data: Vec<f64>,
}

impl Condensed {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        lo
    }
}

/// Full Ward dendrogram with `N − 1` merges in non-decreasing height order.
pub fn ward_merge_sequence(x: &Dataset) -> Result<Dendrogram> {
    ward_with_cap(x, DEFAULT_WARD_CAP)
}

pub fn ward_with_cap(x: &Dataset, cap: usize) -> Result<Dendrogram> {
    let n = x.n_samples();
    if n > cap {
        return Err(StadionError::SampleCap { n, cap });
    }
    if n == 1 {
        return Ok(Dendrogram {
            n_samples: 1,
            merges: Vec::new(),
        });
    }
    let mut dist = Condensed {
        n,
        data: vec![0.0; n * (n - 1) / 2],
    };
    for i in 0..n {
        for j in i + 1..n {
            dist.set(i, j, 0.5 * sq_dist(x.row(i), x.row(j)));
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    // (slot a, slot b, height): slots are representative sample indices.
    let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(n - 1);
    let mut chain: Vec<usize> = Vec::with_capacity(n);

    while raw.len() < n - 1 {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("an active cluster"));
        }
        let (a, b) = loop {
            let a = *chain.last().unwrap();
            let prev = if chain.len() >= 2 {
                Some(chain[chain.len() - 2])
            } else {
                None
            };
            // Nearest active neighbour of a; the previous chain element wins
            // ties so that the chain terminates on reciprocal pairs.
            let mut best = prev;
            let mut best_d = prev.map_or(f64::INFINITY, |p| dist.get(a, p));
            for c in 0..n {
                if !active[c] || c == a {
                    continue;
                }
                let d = dist.get(a, c);
                if d < best_d {
                    best_d = d;
                    best = Some(c);
                }
            }
            let c = best.expect("at least two active clusters");
            if Some(c) == prev {
                chain.pop();
                chain.pop();
                break (a, c);
            }
            chain.push(c);
        };
        let d_ab = dist.get(a, b);
        let (keep, drop) = if a < b { (a, b) } else { (b, a) };
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in 0..n {
            if !active[k] || k == a || k == b {
                continue;
            }
            let nk = size[k] as f64;
            let v = ((na + nk) * dist.get(k, a) + (nb + nk) * dist.get(k, b) - nk * d_ab)
                / (na + nb + nk);
            dist.set(k, keep, v);
        }
        active[drop] = false;
        size[keep] += size[drop];
        raw.push((a, b, d_ab));
    }

    // NN-chain finds merges out of order; Ward is reducible, so sorting by
    // height yields a valid agglomeration sequence.
    raw.sort_by(|x, y| x.2.total_cmp(&y.2));
    let mut uf = UnionFind::new(n);
    let mut cluster_id: Vec<usize> = (0..n).collect();
    let mut cluster_size = vec![1usize; n];
    let merges = raw
        .into_iter()
        .enumerate()
        .map(|(t, (a, b, h))| {
            let (ra, rb) = (uf.find(a), uf.find(b));
            let (ia, ib) = (cluster_id[ra], cluster_id[rb]);
            let s = cluster_size[ra] + cluster_size[rb];
            let root = uf.union(ra, rb);
            cluster_id[root] = n + t;
            cluster_size[root] = s;
            Merge {
                left: ia.min(ib),
                right: ia.max(ib),
                height: h,
                size: s,
            }
        })
        .collect();
    Ok(Dendrogram {
        n_samples: n,
        merges,
    })
}

impl Dendrogram {
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Partition into `k` clusters from the first `N − k` merges, labelled
    /// in order of each cluster's first sample.
    pub fn cut(&self, k: usize) -> Result<Partition> {
        let n = self.n_samples;
        if k == 0 || k > n {
            return Err(StadionError::TooManyClusters { k, n });
        }
        // Map each id to a representative sample, then union samples.
        let mut rep: Vec<usize> = (0..n).collect();
        let mut uf = UnionFind::new(n);
        for m in &self.merges[..n - k] {
            let r = uf.union(rep[m.left], rep[m.right]);
            rep.push(r);
        }
        let labels: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        Ok(Partition::from_labels(labels)?.canonical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Dataset {
        let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        Dataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn pair_merges_at_half_squared_distance() {
        let d = ward_merge_sequence(&line(&[0.0, 3.0])).unwrap();
        assert_eq!(d.merges().len(), 1);
        assert_eq!(d.merges()[0].height, 4.5);
        assert_eq!(d.merges()[0].size, 2);
    }

    #[test]
    fn collinear_points_merge_closest_first() {
        // Costs: {0,1} 0.5, {1,10} 40.5, {0,10} 50.
        let d = ward_merge_sequence(&line(&[0.0, 1.0, 10.0])).unwrap();
        let first = d.merges()[0];
        assert_eq!((first.left, first.right), (0, 1));
        assert_eq!(first.height, 0.5);
        // Merging {0,1} (centroid 0.5) with {10}: 2·1/3 · 9.5².
        let second = d.merges()[1];
        assert_eq!((second.left, second.right), (2, 3));
        assert!((second.height - 2.0 / 3.0 * 90.25).abs() < 1e-12);
    }

    #[test]
    fn cuts() {
        let d = ward_merge_sequence(&line(&[0.0, 0.2, 5.0, 5.1, 9.0])).unwrap();
        assert_eq!(d.cut(5).unwrap().labels(), &[0, 1, 2, 3, 4]);
        assert_eq!(d.cut(3).unwrap().labels(), &[0, 0, 1, 1, 2]);
        assert_eq!(d.cut(1).unwrap().labels(), &[0; 5]);
        assert!(d.cut(6).is_err());
    }

    #[test]
    fn single_sample() {
        let d = ward_merge_sequence(&line(&[1.0])).unwrap();
        assert!(d.merges().is_empty());
        assert_eq!(d.cut(1).unwrap().labels(), &[0]);
    }

    #[test]
    fn sample_cap() {
        assert!(matches!(
            ward_with_cap(&line(&[0.0, 1.0, 2.0]), 2),
            Err(StadionError::SampleCap { n: 3, cap: 2 })
        ));
    }
}
