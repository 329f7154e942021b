//! Lloyd's K-means with K-means++ seeding and best-of-I restarts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, StadionError};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    KMeansPlusPlus,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub n_runs: usize,
    pub max_iters: usize,
    /// Largest center displacement (Euclidean) accepted as converged.
    pub tolerance: f64,
    pub init: Init,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            n_runs: 35,
            max_iters: 300,
            tolerance: 1e-6,
            init: Init::KMeansPlusPlus,
        }
    }
}

impl KMeansOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(StadionError::InvalidConfig(
                "n_runs must be at least 1".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(StadionError::InvalidConfig(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(StadionError::InvalidConfig(
                "tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one Lloyd run from a given initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydRun {
    /// Row-major `k × p`.
    pub centers: Vec<f64>,
    pub labels: Vec<usize>,
    pub cost: f64,
    /// Cost after every assignment step, final assignment included.
    pub cost_trace: Vec<f64>,
    pub n_iter: usize,
}

/// Best of `n_runs` restarts. `run_costs[r]` is the final cost of restart `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub best: LloydRun,
    pub best_run: usize,
    pub run_costs: Vec<f64>,
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center; ties go to the lowest index.
#[inline]
pub(crate) fn nearest(point: &[f64], centers: &[f64], p: usize) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.chunks_exact(p).enumerate() {
        let d = sq_dist(point, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// Number of distinct rows, counting no further than `limit`.
pub(crate) fn distinct_rows(x: &Dataset, limit: usize) -> usize {
    let mut keys: Vec<Vec<u64>> = x
        .rows()
        .map(|r| r.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    keys.sort_unstable();
    let mut count = 0;
    for i in 0..keys.len() {
        if i == 0 || keys[i] != keys[i - 1] {
            count += 1;
            if count >= limit {
                break;
            }
        }
    }
    count
}

/// K-means++ seeding: the first center is a uniformly chosen point, each
/// following one is drawn with probability proportional to its squared
/// distance to the nearest chosen center. If every remaining weight is zero
/// the next center is drawn uniformly among points not chosen yet.
pub fn kmeanspp_init<R: Rng + ?Sized>(x: &Dataset, k: usize, rng: &mut R) -> Result<Vec<f64>> {
    let n = x.n_samples();
    let p = x.n_features();
    if k == 0 || k > n {
        return Err(StadionError::TooManyClusters { k, n });
    }
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut d2: Vec<f64> = x.rows().map(|r| sq_dist(r, x.row(first))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        taken[next] = true;
        let row = x.row(next);
        for (i, r) in x.rows().enumerate() {
            let d = sq_dist(r, row);
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    let mut centers = Vec::with_capacity(k * p);
    for &i in &chosen {
        centers.extend_from_slice(x.row(i));
    }
    Ok(centers)
}

/// `k` distinct points drawn uniformly without replacement.
pub fn random_init<R: Rng + ?Sized>(x: &Dataset, k: usize, rng: &mut R) -> Result<Vec<f64>> {
    let n = x.n_samples();
    if k == 0 || k > n {
        return Err(StadionError::TooManyClusters { k, n });
    }
    let picks = rand::seq::index::sample(rng, n, k);
    let mut centers = Vec::with_capacity(k * x.n_features());
    for i in picks.iter() {
        centers.extend_from_slice(x.row(i));
    }
    Ok(centers)
}

fn assign(x: &Dataset, centers: &[f64], labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let p = x.n_features();
    let mut cost = 0.0;
    for (i, row) in x.rows().enumerate() {
        let (c, d) = nearest(row, centers, p);
        labels[i] = c;
        dists[i] = d;
        cost += d;
    }
    cost
}

/// Moves, for each empty cluster, the point farthest from its center into it.
/// Returns whether anything changed.
fn repair_empty(
    x: &Dataset,
    k: usize,
    centers: &mut [f64],
    labels: &mut [usize],
    dists: &mut [f64],
) -> bool {
    let p = x.n_features();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut changed = false;
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &d) in dists.iter().enumerate() {
            if sizes[labels[i]] > 1 && d > far_d {
                far_d = d;
                far = Some(i);
            }
        }
        let Some(i) = far else { break };
        sizes[labels[i]] -= 1;
        labels[i] = c;
        sizes[c] = 1;
        dists[i] = 0.0;
        centers[c * p..(c + 1) * p].copy_from_slice(x.row(i));
        changed = true;
    }
    changed
}

fn update_centers(x: &Dataset, k: usize, labels: &[usize], centers: &mut [f64]) -> f64 {
    let p = x.n_features();
    let mut sums = vec![0.0; k * p];
    let mut counts = vec![0usize; k];
    for (row, &l) in x.rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l * p..(l + 1) * p].iter_mut().zip(row) {
            *s += v;
        }
    }
    let mut shift: f64 = 0.0;
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        let inv = 1.0 / counts[c] as f64;
        let mut d = 0.0;
        for j in 0..p {
            let m = sums[c * p + j] * inv;
            d += (m - centers[c * p + j]).powi(2);
            centers[c * p + j] = m;
        }
        shift = shift.max(d.sqrt());
    }
    shift
}

/// Lloyd iterations from `centers` until the largest center move is within
/// tolerance or `max_iters` updates were made. The returned labels are the
/// nearest-center assignment of the returned centers.
pub fn lloyd(x: &Dataset, mut centers: Vec<f64>, opts: &KMeansOptions) -> LloydRun {
    let n = x.n_samples();
    let p = x.n_features();
    let k = centers.len() / p;
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut cost_trace = Vec::new();
    let mut n_iter = 0;
    loop {
        let cost = assign(x, &centers, &mut labels, &mut dists);
        check_monotone(&cost_trace, cost);
        cost_trace.push(cost);
        repair_empty(x, k, &mut centers, &mut labels, &mut dists);
        let shift = update_centers(x, k, &labels, &mut centers);
        n_iter += 1;
        if shift <= opts.tolerance || n_iter >= opts.max_iters {
            break;
        }
    }
    let mut cost = assign(x, &centers, &mut labels, &mut dists);
    check_monotone(&cost_trace, cost);
    cost_trace.push(cost);
    // A final assignment can in principle empty a cluster; repair and
    // reassign until every center owns a point.
    let mut guard = 0;
    while repair_empty(x, k, &mut centers, &mut labels, &mut dists) && guard < k {
        cost = assign(x, &centers, &mut labels, &mut dists);
        check_monotone(&cost_trace, cost);
        cost_trace.push(cost);
        guard += 1;
    }
    LloydRun {
        centers,
        labels,
        cost,
        cost_trace,
        n_iter,
    }
}

#[inline]
fn check_monotone(trace: &[f64], cost: f64) {
    if let Some(&prev) = trace.last() {
        debug_assert!(
            cost <= prev + 1e-9 * prev.abs().max(1.0),
            "k-means cost increased from {prev} to {cost}"
        );
    }
}

/// Work (N·K·runs) above which restarts are spread over the thread pool.
const PARALLEL_RUNS_THRESHOLD: usize = 200_000;

/// Best of `opts.n_runs` seeded restarts. Restart `r` draws from the stream
/// `[KMEANS_RUN, r]` of `seed`; ties in cost go to the lower run index.
pub fn kmeans(x: &Dataset, k: usize, opts: &KMeansOptions, seed: u64) -> Result<KMeansFit> {
    opts.validate()?;
    let n = x.n_samples();
    if k == 0 || k > n {
        return Err(StadionError::TooManyClusters { k, n });
    }
    if k > 1 {
        let distinct = distinct_rows(x, k);
        if distinct < k {
            return Err(StadionError::NotEnoughDistinctPoints { k, distinct });
        }
    }
    let one_run = |r: usize| -> Result<LloydRun> {
        let mut rng = seeds::rng_for(seed, &[seeds::stream::KMEANS_RUN, r as u64]);
        let init = match opts.init {
            Init::KMeansPlusPlus => kmeanspp_init(x, k, &mut rng)?,
            Init::Random => random_init(x, k, &mut rng)?,
        };
        Ok(lloyd(x, init, opts))
    };
    let runs: Vec<LloydRun> = if n * k * opts.n_runs >= PARALLEL_RUNS_THRESHOLD {
        (0..opts.n_runs)
            .into_par_iter()
            .map(one_run)
            .collect::<Result<_>>()?
    } else {
        (0..opts.n_runs).map(one_run).collect::<Result<_>>()?
    };
    let run_costs: Vec<f64> = runs.iter().map(|r| r.cost).collect();
    let best_run = run_costs.iter().enumerate().fold(
        0,
        |best, (i, &c)| if c < run_costs[best] { i } else { best },
    );
    let best = runs.into_iter().nth(best_run).expect("at least one run");
    Ok(KMeansFit {
        best,
        best_run,
        run_costs,
    })
}
