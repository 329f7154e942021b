//! Internal validity indices used as baselines for choosing K.
//!
//! All distances are Euclidean. With `c_k` the centroid of cluster `C_k`,
//! `c` the global centroid and `WGSS = Σ_k Σ_{i∈C_k} ‖x_i − c_k‖²`:
//!
//! - silhouette: mean over points of `(b − a) / max(a, b)`, `a` the mean
//!   distance to the other members of the own cluster, `b` the smallest mean
//!   distance to another cluster; points in singleton clusters score 0.
//! - Davies–Bouldin: `(1/K) Σ_k max_{l≠k} (S_k + S_l) / ‖c_k − c_l‖`, with
//!   `S_k` the mean distance of `C_k` to `c_k`.
//! - Calinski–Harabasz: `(BGSS / (K − 1)) / (WGSS / (N − K))`, with
//!   `BGSS = Σ_k N_k ‖c_k − c‖²`.
//! - Dunn: smallest distance between points of different clusters over the
//!   largest cluster diameter.
//! - Xie–Beni: `(WGSS / N)` over the squared smallest distance between points
//!   of different clusters.
//! - Ray–Turi: `(WGSS / N)` over the squared smallest centroid distance.
//! - Wemmert–Gancarski: `(1/N) Σ_k max(0, N_k − Σ_{i∈C_k} R_i)` with
//!   `R_i = ‖x_i − c_k‖ / min_{l≠k} ‖x_i − c_l‖`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clusterers::{self, ClustererConfig};
use crate::dataset::Dataset;
use crate::error::{Result, StadionError};
use crate::partitions::Partition;

/// Default largest N for the indices that need all pairwise distances.
pub const DEFAULT_PAIRWISE_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexId {
    Silhouette,
    DaviesBouldin,
    CalinskiHarabasz,
    Dunn,
    XieBeni,
    RayTuri,
    WemmertGancarski,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexOrientation {
    Maximize,
    Minimize,
}

impl IndexId {
    pub const ALL: [IndexId; 7] = [
        IndexId::Silhouette,
        IndexId::DaviesBouldin,
        IndexId::CalinskiHarabasz,
        IndexId::Dunn,
        IndexId::XieBeni,
        IndexId::RayTuri,
        IndexId::WemmertGancarski,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IndexId::Silhouette => "silhouette",
            IndexId::DaviesBouldin => "davies_bouldin",
            IndexId::CalinskiHarabasz => "calinski_harabasz",
            IndexId::Dunn => "dunn",
            IndexId::XieBeni => "xie_beni",
            IndexId::RayTuri => "ray_turi",
            IndexId::WemmertGancarski => "wemmert_gancarski",
        }
    }

    pub fn orientation(self) -> IndexOrientation {
        match self {
            IndexId::DaviesBouldin | IndexId::XieBeni | IndexId::RayTuri => {
                IndexOrientation::Minimize
            }
            _ => IndexOrientation::Maximize,
        }
    }

    fn needs_pairwise(self) -> bool {
        matches!(self, IndexId::Silhouette | IndexId::Dunn | IndexId::XieBeni)
    }

    /// True when `a` is a strictly better score than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self.orientation() {
            IndexOrientation::Maximize => a > b,
            IndexOrientation::Minimize => a < b,
        }
    }
}

impl fmt::Display for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndexId {
    type Err = StadionError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        IndexId::ALL
            .into_iter()
            .find(|id| id.name() == key)
            .ok_or_else(|| StadionError::InvalidParams(format!("unknown validity index {s:?}")))
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    clusterers::kmeans::sq_dist(a, b).sqrt()
}

struct Groups {
    members: Vec<Vec<usize>>,
    centroids: Vec<Vec<f64>>,
}

fn groups(id: IndexId, x: &Dataset, p: &Partition) -> Result<Groups> {
    if p.len() != x.n_samples() {
        return Err(StadionError::LengthMismatch {
            left: p.len(),
            right: x.n_samples(),
        });
    }
    let members = p.members();
    if members.iter().any(|m| m.is_empty()) {
        return Err(StadionError::InvalidPartition(
            "validity indices need non-empty clusters".into(),
        ));
    }
    if members.len() < 2 {
        return Err(StadionError::SingleCluster { index: id.name() });
    }
    let pdim = x.n_features();
    let centroids = members
        .iter()
        .map(|m| {
            let mut c = vec![0.0; pdim];
            for &i in m {
                for (cj, v) in c.iter_mut().zip(x.row(i)) {
                    *cj += v;
                }
            }
            c.iter_mut().for_each(|v| *v /= m.len() as f64);
            c
        })
        .collect();
    Ok(Groups { members, centroids })
}

fn wgss(x: &Dataset, g: &Groups) -> f64 {
    g.members
        .iter()
        .zip(&g.centroids)
        .map(|(m, c)| {
            m.iter()
                .map(|&i| clusterers::kmeans::sq_dist(x.row(i), c))
                .sum::<f64>()
        })
        .sum()
}

fn min_between_points(x: &Dataset, p: &Partition) -> f64 {
    let labels = p.labels();
    let mut best = f64::INFINITY;
    for i in 0..x.n_samples() {
        for j in i + 1..x.n_samples() {
            if labels[i] != labels[j] {
                best = best.min(dist(x.row(i), x.row(j)));
            }
        }
    }
    best
}

fn degenerate(id: IndexId, reason: &'static str) -> StadionError {
    StadionError::DegenerateIndex {
        index: id.name(),
        reason,
    }
}

fn silhouette(x: &Dataset, p: &Partition, g: &Groups) -> f64 {
    let n = x.n_samples();
    let k = g.members.len();
    let labels = p.labels();
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..n {
        let own = labels[i];
        if g.members[own].len() == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[labels[j]] += dist(x.row(i), x.row(j));
            }
        }
        let a = sums[own] / (g.members[own].len() - 1) as f64;
        let b = (0..k)
            .filter(|&l| l != own)
            .map(|l| sums[l] / g.members[l].len() as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

fn davies_bouldin(x: &Dataset, g: &Groups) -> Result<f64> {
    let k = g.members.len();
    let scatter: Vec<f64> = g
        .members
        .iter()
        .zip(&g.centroids)
        .map(|(m, c)| m.iter().map(|&i| dist(x.row(i), c)).sum::<f64>() / m.len() as f64)
        .collect();
    let mut total = 0.0;
    for a in 0..k {
        let mut worst = f64::NEG_INFINITY;
        for b in 0..k {
            if a == b {
                continue;
            }
            let sep = dist(&g.centroids[a], &g.centroids[b]);
            if sep == 0.0 {
                return Err(degenerate(
                    IndexId::DaviesBouldin,
                    "two clusters share a centroid",
                ));
            }
            worst = worst.max((scatter[a] + scatter[b]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

fn calinski_harabasz(x: &Dataset, g: &Groups) -> Result<f64> {
    let n = x.n_samples();
    let k = g.members.len();
    if n <= k {
        return Err(degenerate(
            IndexId::CalinskiHarabasz,
            "needs more samples than clusters",
        ));
    }
    let pdim = x.n_features();
    let mut mean = vec![0.0; pdim];
    for r in x.rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n as f64);
    let bgss: f64 = g
        .members
        .iter()
        .zip(&g.centroids)
        .map(|(m, c)| m.len() as f64 * clusterers::kmeans::sq_dist(c, &mean))
        .sum();
    let w = wgss(x, g);
    if w == 0.0 {
        return Err(degenerate(
            IndexId::CalinskiHarabasz,
            "zero within-cluster dispersion",
        ));
    }
    Ok((bgss / (k - 1) as f64) / (w / (n - k) as f64))
}

fn dunn(x: &Dataset, p: &Partition, g: &Groups) -> Result<f64> {
    let mut diameter: f64 = 0.0;
    for m in &g.members {
        for (a, &i) in m.iter().enumerate() {
            for &j in &m[a + 1..] {
                diameter = diameter.max(dist(x.row(i), x.row(j)));
            }
        }
    }
    if diameter == 0.0 {
        return Err(degenerate(IndexId::Dunn, "every cluster has zero diameter"));
    }
    Ok(min_between_points(x, p) / diameter)
}

fn xie_beni(x: &Dataset, p: &Partition, g: &Groups) -> Result<f64> {
    let sep = min_between_points(x, p);
    if sep == 0.0 {
        return Err(degenerate(
            IndexId::XieBeni,
            "points of different clusters coincide",
        ));
    }
    Ok(wgss(x, g) / x.n_samples() as f64 / (sep * sep))
}

fn ray_turi(x: &Dataset, g: &Groups) -> Result<f64> {
    let k = g.members.len();
    let mut sep = f64::INFINITY;
    for a in 0..k {
        for b in a + 1..k {
            sep = sep.min(clusterers::kmeans::sq_dist(
                &g.centroids[a],
                &g.centroids[b],
            ));
        }
    }
    if sep == 0.0 {
        return Err(degenerate(
            IndexId::RayTuri,
            "two clusters share a centroid",
        ));
    }
    Ok(wgss(x, g) / x.n_samples() as f64 / sep)
}

fn wemmert_gancarski(x: &Dataset, g: &Groups) -> Result<f64> {
    let k = g.members.len();
    let mut total = 0.0;
    for (a, m) in g.members.iter().enumerate() {
        let mut ratio_sum = 0.0;
        for &i in m {
            let own = dist(x.row(i), &g.centroids[a]);
            let other = (0..k)
                .filter(|&b| b != a)
                .map(|b| dist(x.row(i), &g.centroids[b]))
                .fold(f64::INFINITY, f64::min);
            if other == 0.0 {
                return Err(degenerate(
                    IndexId::WemmertGancarski,
                    "a point sits on another centroid",
                ));
            }
            ratio_sum += own / other;
        }
        total += (m.len() as f64 - ratio_sum).max(0.0);
    }
    Ok(total / x.n_samples() as f64)
}

/// Score of partition `p` of `x` under index `id`. Needs K ≥ 2 non-empty
/// clusters.
pub fn internal_index(id: IndexId, x: &Dataset, p: &Partition) -> Result<f64> {
    internal_index_with_cap(id, x, p, DEFAULT_PAIRWISE_CAP)
}

/// As [`internal_index`], refusing pairwise indices above `cap` samples.
pub fn internal_index_with_cap(id: IndexId, x: &Dataset, p: &Partition, cap: usize) -> Result<f64> {
    let g = groups(id, x, p)?;
    if id.needs_pairwise() && x.n_samples() > cap {
        return Err(StadionError::SampleCap {
            n: x.n_samples(),
            cap,
        });
    }
    match id {
        IndexId::Silhouette => Ok(silhouette(x, p, &g)),
        IndexId::DaviesBouldin => davies_bouldin(x, &g),
        IndexId::CalinskiHarabasz => calinski_harabasz(x, &g),
        IndexId::Dunn => dunn(x, p, &g),
        IndexId::XieBeni => xie_beni(x, p, &g),
        IndexId::RayTuri => ray_turi(x, &g),
        IndexId::WemmertGancarski => wemmert_gancarski(x, &g),
    }
}

/// Best K among the candidate `partitions` with K ≥ 2, ties to the smaller
/// K. Partitions on which the index is degenerate are passed over.
pub fn select_k_by_index_on(id: IndexId, x: &Dataset, partitions: &[Partition]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    let mut candidates: Vec<&Partition> = partitions.iter().filter(|p| p.k() >= 2).collect();
    candidates.sort_by_key(|p| p.k());
    if candidates.is_empty() {
        return Err(StadionError::SingleCluster { index: id.name() });
    }
    for p in candidates {
        let score = match internal_index(id, x, p) {
            Ok(s) if s.is_finite() => s,
            Ok(_) | Err(StadionError::DegenerateIndex { .. }) => continue,
            Err(e) => return Err(e),
        };
        match best {
            Some((_, b)) if !id.better(score, b) => {}
            _ => best = Some((p.k(), score)),
        }
    }
    best.map(|(k, _)| k)
        .ok_or_else(|| degenerate(id, "undefined for every candidate partition"))
}

/// Fits `alg` for every K in `2..=k_max` and returns the best K under `id`.
pub fn select_k_by_index(
    id: IndexId,
    alg: &ClustererConfig,
    x: &Dataset,
    k_max: usize,
) -> Result<usize> {
    if k_max < 2 {
        return Err(StadionError::SingleCluster { index: id.name() });
    }
    let ks: Vec<usize> = (2..=k_max).collect();
    let partitions = clusterers::fit_many(alg, x, &ks)
        .into_iter()
        .map(|m| m.map(|m| m.partition))
        .collect::<Result<Vec<_>>>()?;
    select_k_by_index_on(id, x, &partitions)
}
