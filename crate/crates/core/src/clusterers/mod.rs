//! Clustering algorithms behind one fit/extend contract.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, StadionError};
use crate::partitions::Partition;

pub mod kmeans;
pub mod ward;

pub use kmeans::{kmeanspp_init, lloyd, Init, KMeansFit, KMeansOptions, LloydRun};
pub use ward::{ward_merge_sequence, Dendrogram, Merge, DEFAULT_WARD_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    KMeans,
    Ward,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::Ward => "ward",
        }
    }

    pub fn has_extension(self) -> bool {
        matches!(self, Algorithm::KMeans)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = StadionError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kmeans" | "k-means" => Ok(Algorithm::KMeans),
            "ward" => Ok(Algorithm::Ward),
            other => Err(StadionError::InvalidConfig(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustererConfig {
    pub algorithm: Algorithm,
    pub kmeans: KMeansOptions,
    /// Seed of the algorithm itself. Every fit made with this config uses it,
    /// so the algorithm is a deterministic function of (data, k).
    pub seed: u64,
    pub ward_cap: usize,
}

impl Default for ClustererConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::KMeans,
            kmeans: KMeansOptions::default(),
            seed: 0,
            ward_cap: DEFAULT_WARD_CAP,
        }
    }
}

impl ClustererConfig {
    pub fn kmeans(seed: u64) -> Self {
        Self {
            seed,
            ..Default::default()
        }
    }

    pub fn ward() -> Self {
        Self {
            algorithm: Algorithm::Ward,
            ..Default::default()
        }
    }

    pub fn with_runs(mut self, n_runs: usize) -> Self {
        self.kmeans.n_runs = n_runs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.kmeans.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    /// Row-major `k × p`.
    pub centers: Vec<f64>,
    pub n_features: usize,
    /// Sum of squared distances to the assigned centers.
    pub cost: f64,
    pub best_run: usize,
    pub run_costs: Vec<f64>,
    pub cost_trace: Vec<f64>,
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centers.len() / self.n_features
    }

    pub fn center(&self, c: usize) -> &[f64] {
        &self.centers[c * self.n_features..(c + 1) * self.n_features]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelDetail {
    KMeans(KMeansModel),
    Ward(Dendrogram),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub partition: Partition,
    pub detail: ModelDetail,
}

impl FittedModel {
    pub fn algorithm(&self) -> Algorithm {
        match self.detail {
            ModelDetail::KMeans(_) => Algorithm::KMeans,
            ModelDetail::Ward(_) => Algorithm::Ward,
        }
    }

    pub fn kmeans(&self) -> Option<&KMeansModel> {
        match &self.detail {
            ModelDetail::KMeans(m) => Some(m),
            ModelDetail::Ward(_) => None,
        }
    }

    /// Assigns each row of `x_new` to its nearest center (squared Euclidean,
    /// ties to the lowest index). Only center-based models extend.
    pub fn extend(&self, x_new: &Dataset) -> Result<Partition> {
        let ModelDetail::KMeans(m) = &self.detail else {
            return Err(StadionError::NoExtensionOperator("ward linkage"));
        };
        if x_new.n_features() != m.n_features {
            return Err(StadionError::DimensionMismatch {
                expected: m.n_features,
                found: x_new.n_features(),
            });
        }
        let labels = x_new
            .rows()
            .map(|r| kmeans::nearest(r, &m.centers, m.n_features).0)
            .collect();
        Partition::new(labels, m.k())
    }
}

/// Clusters `x` into `k` groups.
pub fn fit(cfg: &ClustererConfig, x: &Dataset, k: usize) -> Result<FittedModel> {
    let n = x.n_samples();
    if k == 0 || k > n {
        return Err(StadionError::TooManyClusters { k, n });
    }
    if !x.is_standardized() {
        log::warn!("fitting {} on unstandardized data", cfg.algorithm);
    }
    match cfg.algorithm {
        Algorithm::KMeans => {
            let fit = kmeans::kmeans(x, k, &cfg.kmeans, cfg.seed)?;
            let run = fit.best;
            Ok(FittedModel {
                partition: Partition::new(run.labels, k)?,
                detail: ModelDetail::KMeans(KMeansModel {
                    centers: run.centers,
                    n_features: x.n_features(),
                    cost: run.cost,
                    best_run: fit.best_run,
                    run_costs: fit.run_costs,
                    cost_trace: run.cost_trace,
                }),
            })
        }
        Algorithm::Ward => {
            let dendrogram = ward::ward_with_cap(x, cfg.ward_cap)?;
            Ok(FittedModel {
                partition: dendrogram.cut(k)?,
                detail: ModelDetail::Ward(dendrogram),
            })
        }
    }
}

/// Fits every `k` in `ks`, sharing the dendrogram for Ward. Entries that
/// cannot be fitted carry their error.
pub fn fit_many(cfg: &ClustererConfig, x: &Dataset, ks: &[usize]) -> Vec<Result<FittedModel>> {
    match cfg.algorithm {
        Algorithm::KMeans => ks.iter().map(|&k| fit(cfg, x, k)).collect(),
        Algorithm::Ward => {
            let n = x.n_samples();
            match ward::ward_with_cap(x, cfg.ward_cap) {
                Ok(d) => ks
                    .iter()
                    .map(|&k| {
                        if k == 0 || k > n {
                            return Err(StadionError::TooManyClusters { k, n });
                        }
                        Ok(FittedModel {
                            partition: d.cut(k)?,
                            detail: ModelDetail::Ward(d.clone()),
                        })
                    })
                    .collect(),
                Err(e) => {
                    let msg = e.to_string();
                    ks.iter()
                        .map(|_| Err(StadionError::InvalidDataset(msg.clone())))
                        .collect()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::from_rows(&[[0.0, 0.0], [0.2, 0.1], [5.0, 5.0], [5.1, 4.8], [9.0, 0.0]])
            .unwrap()
            .standardize()
            .unwrap()
    }

    #[test]
    fn k1_center_is_global_mean() {
        let x = toy();
        let m = fit(&ClustererConfig::kmeans(1), &x, 1).unwrap();
        let km = m.kmeans().unwrap();
        for j in 0..2 {
            let mean = x.column(j).iter().sum::<f64>() / 5.0;
            assert!((km.center(0)[j] - mean).abs() < 1e-12);
        }
        assert_eq!(m.partition.labels(), &[0; 5]);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let x = toy();
        let m = fit(&ClustererConfig::kmeans(3), &x, 5).unwrap();
        assert_eq!(m.partition.n_nonempty(), 5);
        assert!(m.kmeans().unwrap().cost < 1e-24);
        let w = fit(&ClustererConfig::ward(), &x, 5).unwrap();
        assert_eq!(w.partition.labels(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn too_many_clusters() {
        assert!(matches!(
            fit(&ClustererConfig::kmeans(0), &toy(), 6),
            Err(StadionError::TooManyClusters { k: 6, n: 5 })
        ));
    }

    #[test]
    fn extend_reproduces_training_labels() {
        let x = toy();
        let m = fit(&ClustererConfig::kmeans(7), &x, 3).unwrap();
        assert_eq!(m.extend(&x).unwrap(), m.partition);
    }

    #[test]
    fn extend_ties_go_to_lowest_index() {
        let model = FittedModel {
            partition: Partition::from_labels(vec![0, 1]).unwrap(),
            detail: ModelDetail::KMeans(KMeansModel {
                centers: vec![-1.0, 0.0, 1.0, 0.0],
                n_features: 2,
                cost: 0.0,
                best_run: 0,
                run_costs: vec![0.0],
                cost_trace: vec![0.0],
            }),
        };
        let mid = Dataset::from_rows(&[[0.0, 3.0], [0.5, 0.0]]).unwrap();
        assert_eq!(model.extend(&mid).unwrap().labels(), &[0, 1]);
        let wrong_dim = Dataset::from_rows(&[[0.0]]).unwrap();
        assert!(model.extend(&wrong_dim).is_err());
    }

    #[test]
    fn single_center_labels_everything_zero() {
        let model = FittedModel {
            partition: Partition::trivial(1).unwrap(),
            detail: ModelDetail::KMeans(KMeansModel {
                centers: vec![0.0, 0.0],
                n_features: 2,
                cost: 0.0,
                best_run: 0,
                run_costs: vec![0.0],
                cost_trace: vec![0.0],
            }),
        };
        assert_eq!(model.extend(&toy()).unwrap().labels(), &[0; 5]);
    }

    #[test]
    fn ward_has_no_extension() {
        let x = toy();
        let w = fit(&ClustererConfig::ward(), &x, 2).unwrap();
        assert!(matches!(
            w.extend(&x),
            Err(StadionError::NoExtensionOperator(_))
        ));
    }

    #[test]
    fn fit_is_deterministic() {
        let x = toy();
        let cfg = ClustererConfig::kmeans(11);
        assert_eq!(fit(&cfg, &x, 3).unwrap(), fit(&cfg, &x, 3).unwrap());
    }

    #[test]
    fn fit_many_matches_fit_for_ward() {
        let x = toy();
        let cfg = ClustererConfig::ward();
        let many = fit_many(&cfg, &x, &[1, 2, 3]);
        for (k, m) in [1, 2, 3].into_iter().zip(many) {
            assert_eq!(m.unwrap().partition, fit(&cfg, &x, k).unwrap().partition);
        }
    }
}
