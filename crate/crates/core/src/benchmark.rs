//! Comparing K-selection methods on labelled datasets.
//!
//! Each method picks K̂ from the same per-K reference partitions; its
//! performance on a dataset is the ARI between the ground truth and the
//! partition with K̂ clusters. Across datasets, a method scores a win when
//! K̂ equals the true number of classes, and its ARIs are ranked against
//! the other methods (rank 1 is best, ties share the midpoint rank).

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{select_k_by_index_on, IndexId};
use crate::clusterers::{self, ClustererConfig};
use crate::dataset::LabeledDataset;
use crate::error::{Result, StadionError};
use crate::partitions::{compare, MeasureId, Partition};
use crate::stability::{select_k, Aggregation, GridChoice, StabilityParams};

pub const RESULT_SUFFIX: &str = ".result.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Method {
    StadionMax,
    StadionMean,
    Index(IndexId),
}

impl Method {
    pub fn all() -> Vec<Method> {
        let mut v = vec![Method::StadionMax, Method::StadionMean];
        v.extend(IndexId::ALL.into_iter().map(Method::Index));
        v
    }

    pub fn name(&self) -> String {
        match self {
            Method::StadionMax => "stadion_max".into(),
            Method::StadionMean => "stadion_mean".into(),
            Method::Index(id) => id.name().into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.name()
    }
}

impl TryFrom<String> for Method {
    type Error = StadionError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Method {
    type Err = StadionError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stadion_max" | "stadion-max" => Ok(Method::StadionMax),
            "stadion_mean" | "stadion-mean" => Ok(Method::StadionMean),
            other => other.parse().map(Method::Index),
        }
    }
}

/// `K⋆ + 20` rounded down to a multiple of ten.
pub fn default_k_max(k_star: usize) -> usize {
    (k_star + 20) / 10 * 10
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub algorithm: ClustererConfig,
    pub params: StabilityParams,
    pub grid: GridChoice,
    /// `None` uses [`default_k_max`] of each dataset's class count.
    pub k_max: Option<usize>,
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub k_hat: Option<usize>,
    pub ari: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetResult {
    pub name: String,
    pub n_samples: usize,
    pub n_features: usize,
    pub k_star: usize,
    pub k_max: usize,
    pub results: Vec<MethodResult>,
}

impl DatasetResult {
    pub fn get(&self, method: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

fn failed(method: Method, e: &StadionError) -> MethodResult {
    MethodResult {
        method,
        k_hat: None,
        ari: None,
        error: Some(e.to_string()),
    }
}

fn scored(
    method: Method,
    k_hat: usize,
    truth: &Partition,
    partitions: &[Partition],
) -> MethodResult {
    let Some(p) = partitions.iter().find(|p| p.k() == k_hat) else {
        return failed(
            method,
            &StadionError::Benchmark(format!("no partition with K = {k_hat}")),
        );
    };
    match compare(MeasureId::ARI1, truth, p) {
        Ok(ari) => MethodResult {
            method,
            k_hat: Some(k_hat),
            ari: Some(ari),
            error: None,
        },
        Err(e) => failed(method, &e),
    }
}

/// Runs every configured method on one dataset. Method failures are
/// recorded in the result rather than returned.
pub fn run_dataset(
    name: &str,
    data: &LabeledDataset,
    cfg: &BenchmarkConfig,
) -> Result<DatasetResult> {
    let x = if data.data.is_standardized() {
        data.data.clone()
    } else {
        data.data.standardize()?
    };
    let truth = &data.labels;
    let k_star = truth.n_nonempty();
    let k_max = cfg
        .k_max
        .unwrap_or_else(|| default_k_max(k_star))
        .min(x.n_samples());
    let wants_stadion = cfg
        .methods
        .iter()
        .any(|m| matches!(m, Method::StadionMax | Method::StadionMean));
    let report = wants_stadion.then(|| {
        select_k(
            &cfg.algorithm,
            &x,
            k_max,
            &cfg.grid,
            &cfg.params,
            Aggregation::Max,
        )
    });
    let partitions: Result<Vec<Partition>> = match &report {
        Some(Ok(r)) => Ok(r.references.clone()),
        _ => {
            let ks: Vec<usize> = (1..=k_max).collect();
            clusterers::fit_many(&cfg.algorithm, &x, &ks)
                .into_iter()
                .map(|m| m.map(|m| m.partition))
                .collect()
        }
    };
    let mut results = Vec::new();
    for &method in &cfg.methods {
        let r = match method {
            Method::StadionMax | Method::StadionMean => {
                match report.as_ref().expect("stadion requested") {
                    Ok(rep) => {
                        let agg = if method == Method::StadionMax {
                            Aggregation::Max
                        } else {
                            Aggregation::Mean
                        };
                        scored(method, rep.k_hat_for(agg), truth, &rep.references)
                    }
                    Err(e) => failed(method, e),
                }
            }
            Method::Index(id) => match &partitions {
                Ok(parts) => match select_k_by_index_on(id, &x, parts) {
                    Ok(k) => scored(method, k, truth, parts),
                    Err(e) => failed(method, &e),
                },
                Err(e) => failed(method, e),
            },
        };
        if let Some(e) = &r.error {
            log::warn!("{name}: {method} failed: {e}");
        }
        results.push(r);
    }
    Ok(DatasetResult {
        name: name.to_string(),
        n_samples: x.n_samples(),
        n_features: x.n_features(),
        k_star,
        k_max,
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub wins: usize,
    pub mean_rank: f64,
    pub mean_ari: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub n_datasets: usize,
    pub datasets: Vec<String>,
    pub methods: Vec<MethodSummary>,
}

/// Ranks `values` descending, 1 for the best, ties sharing the mean of the
/// ranks they span. `None` sorts below every value.
pub fn midpoint_ranks(values: &[Option<f64>]) -> Vec<f64> {
    let key = |v: Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| key(values[b]).total_cmp(&key(values[a])));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && key(values[order[j + 1]]) == key(values[order[i]]) {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mid;
        }
        i = j + 1;
    }
    ranks
}

/// Wins and average ARI ranks over datasets. Methods are taken from the
/// first dataset; a method missing from another dataset counts as failed.
pub fn summarize(results: &[DatasetResult]) -> BenchmarkSummary {
    let methods: Vec<Method> = results
        .first()
        .map(|r| r.results.iter().map(|m| m.method).collect())
        .unwrap_or_default();
    let mut wins = vec![0usize; methods.len()];
    let mut rank_sum = vec![0.0; methods.len()];
    let mut ari_sum = vec![0.0; methods.len()];
    let mut ari_n = vec![0usize; methods.len()];
    let mut failures = vec![0usize; methods.len()];
    for d in results {
        let aris: Vec<Option<f64>> = methods
            .iter()
            .map(|&m| d.get(m).and_then(|r| r.ari))
            .collect();
        for (i, r) in midpoint_ranks(&aris).into_iter().enumerate() {
            rank_sum[i] += r;
        }
        for (i, &m) in methods.iter().enumerate() {
            match d.get(m) {
                Some(r) if r.error.is_none() => {
                    if r.k_hat == Some(d.k_star) {
                        wins[i] += 1;
                    }
                    if let Some(a) = r.ari {
                        ari_sum[i] += a;
                        ari_n[i] += 1;
                    }
                }
                _ => failures[i] += 1,
            }
        }
    }
    let n = results.len();
    BenchmarkSummary {
        n_datasets: n,
        datasets: results.iter().map(|r| r.name.clone()).collect(),
        methods: methods
            .iter()
            .enumerate()
            .map(|(i, &method)| MethodSummary {
                method,
                wins: wins[i],
                mean_rank: if n == 0 { 0.0 } else { rank_sum[i] / n as f64 },
                mean_ari: (ari_n[i] > 0).then(|| ari_sum[i] / ari_n[i] as f64),
                failures: failures[i],
            })
            .collect(),
    }
}

pub fn result_json(result: &DatasetResult) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(result).map_err(|e| StadionError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn summary_json(summary: &BenchmarkSummary) -> Result<String> {
    let mut s = serde_json::to_string_pretty(summary)
        .map_err(|e| StadionError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Reads every `*.result.json` in `dir`, in file-name order.
pub fn load_results(dir: &Path) -> Result<Vec<DatasetResult>> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| StadionError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(RESULT_SUFFIX))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| StadionError::io(p, e))?;
            serde_json::from_str(&text)
                .map_err(|e| StadionError::Benchmark(format!("{}: {e}", p.display())))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_max_rule() {
        assert_eq!(default_k_max(3), 20);
        assert_eq!(default_k_max(1), 20);
        assert_eq!(default_k_max(10), 30);
        assert_eq!(default_k_max(19), 30);
    }

    #[test]
    fn midpoint_ties() {
        assert_eq!(
            midpoint_ranks(&[Some(0.5), Some(0.9), Some(0.5), None]),
            vec![2.5, 1.0, 2.5, 4.0]
        );
        assert_eq!(midpoint_ranks(&[Some(1.0), Some(1.0)]), vec![1.5, 1.5]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::all() {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }

    fn result(
        name: &str,
        k_star: usize,
        rows: &[(Method, Option<usize>, Option<f64>)],
    ) -> DatasetResult {
        DatasetResult {
            name: name.into(),
            n_samples: 10,
            n_features: 2,
            k_star,
            k_max: 20,
            results: rows
                .iter()
                .map(|&(method, k_hat, ari)| MethodResult {
                    method,
                    k_hat,
                    ari,
                    error: ari.is_none().then(|| "failed".to_string()),
                })
                .collect(),
        }
    }

    #[test]
    fn summary_counts() {
        let a = Method::StadionMax;
        let b = Method::Index(IndexId::Silhouette);
        let rs = vec![
            result("d1", 3, &[(a, Some(3), Some(1.0)), (b, Some(2), Some(0.6))]),
            result("d2", 2, &[(a, Some(2), Some(0.8)), (b, Some(2), Some(0.8))]),
            result("d3", 4, &[(a, Some(3), Some(0.9)), (b, None, None)]),
        ];
        let s = summarize(&rs);
        assert_eq!(s.n_datasets, 3);
        assert_eq!(s.methods[0].wins, 2);
        assert_eq!(s.methods[1].wins, 1);
        assert_eq!(s.methods[0].mean_rank, (1.0 + 1.5 + 1.0) / 3.0);
        assert_eq!(s.methods[1].mean_rank, (2.0 + 1.5 + 2.0) / 3.0);
        assert_eq!(s.methods[1].failures, 1);
    }
}
