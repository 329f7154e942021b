//! Between- and within-cluster stability, Stadion paths and selection of K.
//!
//! Randomness is derived per evaluation cell from the master seed:
//! between-cluster perturbation `d` at grid index `i` uses path
//! `[1, i, d]` (shared by every K), and the within-cluster perturbation of
//! the cluster of the K-reference whose smallest sample index is `a`,
//! re-clustered into K' clusters, uses `[2, K, a, K', i, d]`. Neither
//! evaluation order nor cluster labels change results.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clusterers::{self, Algorithm, ClustererConfig, FittedModel};
use crate::dataset::Dataset;
use crate::error::{Result, StadionError};
use crate::partitions::{compare, MeasureId, Orientation, Partition};
use crate::perturbation::{perturb_with, EpsilonGrid, NoiseKind, NoiseSpec};
use crate::seeds::{self, stream};

pub mod calibrate;

pub use calibrate::{calibrate_eps_max, Calibration};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "STADION_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Re-fit the algorithm on every perturbed copy.
    Standard,
    /// Label perturbed copies with the reference model's extension operator.
    Extended,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Extended => "extended",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = StadionError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(Variant::Standard),
            "extended" => Ok(Variant::Extended),
            other => Err(StadionError::InvalidParams(format!(
                "unknown variant {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Max,
    Mean,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Max => "max",
            Aggregation::Mean => "mean",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aggregation {
    type Err = StadionError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" => Ok(Aggregation::Max),
            "mean" => Ok(Aggregation::Mean),
            other => Err(StadionError::InvalidParams(format!(
                "unknown aggregation {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityParams {
    /// Perturbations per grid point (D).
    pub d: usize,
    /// Sub-cluster counts (Ω) used for within-cluster stability.
    pub omega: Vec<usize>,
    pub measure: MeasureId,
    pub noise: NoiseKind,
    pub variant: Variant,
    pub seed: u64,
    /// Worker threads; `None` reads `STADION_THREADS`, then uses all cores.
    /// Never affects results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for StabilityParams {
    fn default() -> Self {
        Self {
            d: 10,
            omega: (2..=10).collect(),
            measure: MeasureId::ARI1,
            noise: NoiseKind::Uniform,
            variant: Variant::Standard,
            seed: 0,
            threads: None,
        }
    }
}

impl StabilityParams {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(StadionError::InvalidParams("D must be at least 1".into()));
        }
        if self.omega.is_empty() {
            return Err(StadionError::InvalidParams(
                "omega must not be empty".into(),
            ));
        }
        if self.omega.iter().any(|&k| k < 2) {
            return Err(StadionError::InvalidParams(
                "omega values must be at least 2".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(StadionError::InvalidParams(
                "thread count must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Rejects the extended variant for algorithms without an extension operator.
    pub fn check_variant(&self, alg: &ClustererConfig) -> Result<()> {
        if self.variant == Variant::Extended && !alg.algorithm.has_extension() {
            return Err(StadionError::NoExtensionOperator(match alg.algorithm {
                Algorithm::Ward => "ward linkage",
                Algorithm::KMeans => "k-means",
            }));
        }
        Ok(())
    }

    fn omega_sorted(&self) -> Vec<usize> {
        let mut o = self.omega.clone();
        o.sort_unstable();
        o.dedup();
        o
    }

    /// Worker count after consulting the environment.
    pub fn worker_threads(&self) -> Option<usize> {
        self.threads.or_else(|| {
            std::env::var(THREADS_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&t| t > 0)
        })
    }

    pub(crate) fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.worker_threads() {
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| StadionError::InvalidParams(format!("thread pool: {e}")))?;
                Ok(pool.install(job))
            }
            None => Ok(job()),
        }
    }
}

/// Similarity oriented so that larger always means more stable.
fn oriented(measure: MeasureId, a: &Partition, b: &Partition) -> Result<f64> {
    let v = compare(measure, a, b)?;
    Ok(match measure.orientation() {
        Orientation::Similarity => v,
        Orientation::Dissimilarity => -v,
    })
}

/// Score of one perturbation. `Ok(None)` marks a perturbed copy the
/// algorithm could not cluster (possible only for bootstrap samples with too
/// few distinct points); it scores 0.
fn one_perturbation(
    alg: &ClustererConfig,
    x: &Dataset,
    reference: &FittedModel,
    k: usize,
    eps: f64,
    params: &StabilityParams,
    path: &[u64],
) -> Result<Option<f64>> {
    let noise = NoiseSpec {
        kind: params.noise,
        epsilon: eps,
    };
    if noise.kind != NoiseKind::Bootstrap && eps == 0.0 {
        // Both fits and extensions of the unperturbed data reproduce the reference.
        return oriented(params.measure, &reference.partition, &reference.partition).map(Some);
    }
    let mut rng = seeds::rng_for(params.seed, path);
    let perturbed = perturb_with(x, &noise, &mut rng)?;
    let labels = match params.variant {
        Variant::Extended => reference.extend(&perturbed.data)?,
        Variant::Standard => match clusterers::fit(alg, &perturbed.data, k) {
            Ok(m) => m.partition,
            Err(StadionError::NotEnoughDistinctPoints { .. }) if perturbed.indices.is_some() => {
                return Ok(None)
            }
            Err(e) => return Err(e),
        },
    };
    let target = match &perturbed.indices {
        Some(idx) => reference.partition.restrict(idx),
        None => reference.partition.clone(),
    };
    oriented(params.measure, &target, &labels).map(Some)
}

#[derive(Debug, Clone, Copy, Default)]
struct CellScore {
    value: f64,
    failed: usize,
}

fn between_cell(
    alg: &ClustererConfig,
    x: &Dataset,
    reference: &FittedModel,
    k: usize,
    eps: f64,
    params: &StabilityParams,
    prefix: &[u64],
) -> Result<CellScore> {
    let mut sum = 0.0;
    let mut failed = 0;
    let mut path = prefix.to_vec();
    path.push(0);
    for d in 0..params.d {
        *path.last_mut().unwrap() = d as u64;
        match one_perturbation(alg, x, reference, k, eps, params, &path)? {
            Some(v) => sum += v,
            None => failed += 1,
        }
    }
    Ok(CellScore {
        value: sum / params.d as f64,
        failed,
    })
}

/// Mean similarity between `reference` (the fit of `alg` on `x` with `k`
/// clusters) and the partitions of `D` perturbed copies at amplitude `eps`,
/// whose noise comes from grid slot `eps_index`.
pub fn stab_between(
    alg: &ClustererConfig,
    x: &Dataset,
    reference: &FittedModel,
    k: usize,
    eps: f64,
    eps_index: usize,
    params: &StabilityParams,
) -> Result<f64> {
    params.validate()?;
    params.check_variant(alg)?;
    if eps < 0.0 {
        return Err(StadionError::NegativeEpsilon(eps));
    }
    between_cell(
        alg,
        x,
        reference,
        k,
        eps,
        params,
        &[stream::BETWEEN, eps_index as u64],
    )
    .map(|c| c.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedOmega {
    pub k: usize,
    pub cluster: usize,
    pub k_prime: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
struct SubReference {
    /// Smallest sample index in the cluster; names the cluster's noise
    /// streams independently of its label.
    anchor: usize,
    size: usize,
    data: Dataset,
    /// Fitted sub-models for the retained Ω values.
    models: Vec<(usize, FittedModel)>,
}

/// A reference clustering with the re-clusterings of each of its clusters.
#[derive(Debug, Clone)]
pub struct Reference {
    pub k: usize,
    pub model: FittedModel,
    clusters: Vec<SubReference>,
    pub skipped: Vec<SkippedOmega>,
}

impl Reference {
    /// Fits `alg` inside every cluster of `model` for each K' in Ω.
    pub fn build(
        alg: &ClustererConfig,
        x: &Dataset,
        model: FittedModel,
        params: &StabilityParams,
    ) -> Result<Self> {
        let (clusters, skipped) = sub_references(alg, x, &model.partition, params)?;
        Ok(Self {
            k: model.partition.k(),
            model,
            clusters,
            skipped,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.model.partition
    }
}

fn sub_references(
    alg: &ClustererConfig,
    x: &Dataset,
    partition: &Partition,
    params: &StabilityParams,
) -> Result<(Vec<SubReference>, Vec<SkippedOmega>)> {
    let omega = params.omega_sorted();
    let k = partition.k();
    let mut clusters = Vec::new();
    let mut skipped = Vec::new();
    for (c, members) in partition.members().into_iter().enumerate() {
        let Some(&anchor) = members.first() else {
            return Err(StadionError::InvalidPartition(format!(
                "reference cluster {c} is empty"
            )));
        };
        let data = x.subset(&members);
        let n_k = members.len();
        let usable: Vec<usize> = omega.iter().copied().filter(|&kp| kp <= n_k).collect();
        for &kp in omega.iter().filter(|&&kp| kp > n_k) {
            skipped.push(SkippedOmega {
                k,
                cluster: c,
                k_prime: kp,
                reason: format!("K' exceeds the cluster size {n_k}"),
            });
        }
        let mut models = Vec::new();
        for (kp, fitted) in usable
            .iter()
            .copied()
            .zip(clusterers::fit_many(alg, &data, &usable))
        {
            match fitted {
                Ok(m) => models.push((kp, m)),
                Err(StadionError::NotEnoughDistinctPoints { distinct, .. }) => {
                    skipped.push(SkippedOmega {
                        k,
                        cluster: c,
                        k_prime: kp,
                        reason: format!("cluster has only {distinct} distinct points"),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        clusters.push(SubReference {
            anchor,
            size: n_k,
            data,
            models,
        });
    }
    clusters.sort_by_key(|c| c.anchor);
    if !skipped.is_empty() {
        log::debug!("K={k}: {} omega entries skipped", skipped.len());
    }
    Ok((clusters, skipped))
}

fn within_cell(
    alg: &ClustererConfig,
    k: usize,
    clusters: &[SubReference],
    eps: f64,
    eps_index: usize,
    params: &StabilityParams,
) -> Result<CellScore> {
    let n: usize = clusters.iter().map(|c| c.size).sum();
    let mut total = 0.0;
    let mut failed = 0;
    for sub in clusters {
        if sub.models.is_empty() {
            total += (sub.size as f64 / n as f64) * trivial_score(params.measure, sub.size)?;
            continue;
        }
        let mut acc = 0.0;
        for (kp, model) in &sub.models {
            let prefix = [
                stream::WITHIN,
                k as u64,
                sub.anchor as u64,
                *kp as u64,
                eps_index as u64,
            ];
            let cell = between_cell(alg, &sub.data, model, *kp, eps, params, &prefix)?;
            acc += cell.value;
            failed += cell.failed;
        }
        total += (sub.size as f64 / n as f64) * (acc / sub.models.len() as f64);
    }
    Ok(CellScore {
        value: total,
        failed,
    })
}

/// A cluster too small for any K' in Ω cannot be split further, so it is
/// scored as perfectly stable: the measure's value for identical partitions.
fn trivial_score(measure: MeasureId, size: usize) -> Result<f64> {
    let p = Partition::from_labels((0..size).collect())?;
    oriented(measure, &p, &p)
}

/// Size-weighted mean, over the clusters of `reference`, of the mean over Ω
/// of the between-cluster stability of re-clustering that cluster.
pub fn stab_within(
    alg: &ClustererConfig,
    x: &Dataset,
    reference: &Partition,
    eps: f64,
    eps_index: usize,
    params: &StabilityParams,
) -> Result<f64> {
    params.validate()?;
    params.check_variant(alg)?;
    if eps < 0.0 {
        return Err(StadionError::NegativeEpsilon(eps));
    }
    if reference.len() != x.n_samples() {
        return Err(StadionError::LengthMismatch {
            left: reference.len(),
            right: x.n_samples(),
        });
    }
    let (clusters, _) = sub_references(alg, x, reference, params)?;
    within_cell(alg, reference.k(), &clusters, eps, eps_index, params).map(|c| c.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StadionPath {
    pub k: usize,
    pub epsilons: Vec<f64>,
    pub stab_b: Vec<f64>,
    pub stab_w: Vec<f64>,
    pub stadion: Vec<f64>,
}

impl StadionPath {
    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }

    fn truncated(&self, m: usize) -> StadionPath {
        StadionPath {
            k: self.k,
            epsilons: self.epsilons[..m].to_vec(),
            stab_b: self.stab_b[..m].to_vec(),
            stab_w: self.stab_w[..m].to_vec(),
            stadion: self.stadion[..m].to_vec(),
        }
    }

    /// `(stab_b, stab_w, stadion)` under `agg`. For `Max` the triple is taken
    /// at the first grid point attaining the maximal Stadion.
    pub fn aggregate(&self, agg: Aggregation) -> (f64, f64, f64) {
        match agg {
            Aggregation::Max => {
                let mut best = 0;
                for i in 1..self.len() {
                    if self.stadion[i] > self.stadion[best] {
                        best = i;
                    }
                }
                (self.stab_b[best], self.stab_w[best], self.stadion[best])
            }
            Aggregation::Mean => {
                let m = self.len() as f64;
                let b = self.stab_b.iter().sum::<f64>() / m;
                let w = self.stab_w.iter().sum::<f64>() / m;
                (b, w, b - w)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub skipped_omega: Vec<SkippedOmega>,
    /// Bootstrap copies that could not be clustered (scored 0).
    pub failed_perturbations: usize,
    pub calibrated_eps_max: Option<f64>,
    /// True when calibration found no ε where K=1 wins and fell back to √p.
    pub calibration_fallback: bool,
    pub eps_max: f64,
    pub standardized_input: bool,
}

/// Paths for every K plus the fitted references.
#[derive(Debug, Clone)]
pub struct PathSet {
    pub grid: EpsilonGrid,
    pub paths: Vec<StadionPath>,
    pub references: Vec<Reference>,
    pub failed_perturbations: usize,
}

impl PathSet {
    pub fn skipped(&self) -> Vec<SkippedOmega> {
        self.references
            .iter()
            .flat_map(|r| r.skipped.iter().cloned())
            .collect()
    }
}

/// Fits the reference for every K in `1..=k_max` along with its
/// within-cluster re-clusterings.
pub fn build_references(
    alg: &ClustererConfig,
    x: &Dataset,
    k_max: usize,
    params: &StabilityParams,
) -> Result<Vec<Reference>> {
    params.validate()?;
    alg.validate()?;
    params.check_variant(alg)?;
    if k_max == 0 {
        return Err(StadionError::InvalidParams(
            "k_max must be at least 1".into(),
        ));
    }
    let ks: Vec<usize> = (1..=k_max).collect();
    params.run(|| {
        let models = match alg.algorithm {
            Algorithm::Ward => clusterers::fit_many(alg, x, &ks),
            Algorithm::KMeans => ks.par_iter().map(|&k| clusterers::fit(alg, x, k)).collect(),
        };
        models
            .into_par_iter()
            .map(|m| Reference::build(alg, x, m?, params))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Evaluates Stab_B, Stab_W and Stadion for every reference at every grid
/// point.
pub fn paths_for_references(
    alg: &ClustererConfig,
    x: &Dataset,
    references: Vec<Reference>,
    grid: &EpsilonGrid,
    params: &StabilityParams,
) -> Result<PathSet> {
    params.validate()?;
    params.check_variant(alg)?;
    let m = grid.len();
    let cells: Vec<(usize, usize)> = (0..references.len())
        .flat_map(|r| (0..m).map(move |i| (r, i)))
        .collect();
    let scores = params.run(|| {
        cells
            .par_iter()
            .map(|&(r, i)| {
                let reference = &references[r];
                let eps = grid.values()[i];
                let b = between_cell(
                    alg,
                    x,
                    &reference.model,
                    reference.k,
                    eps,
                    params,
                    &[stream::BETWEEN, i as u64],
                )?;
                let w = within_cell(alg, reference.k, &reference.clusters, eps, i, params)?;
                Ok((b, w))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut failed = 0;
    let paths = references
        .iter()
        .enumerate()
        .map(|(r, reference)| {
            let row = &scores[r * m..(r + 1) * m];
            failed += row.iter().map(|(b, w)| b.failed + w.failed).sum::<usize>();
            let stab_b: Vec<f64> = row.iter().map(|(b, _)| b.value).collect();
            let stab_w: Vec<f64> = row.iter().map(|(_, w)| w.value).collect();
            let stadion = stab_b.iter().zip(&stab_w).map(|(b, w)| b - w).collect();
            StadionPath {
                k: reference.k,
                epsilons: grid.values().to_vec(),
                stab_b,
                stab_w,
                stadion,
            }
        })
        .collect();
    Ok(PathSet {
        grid: grid.clone(),
        paths,
        references,
        failed_perturbations: failed,
    })
}

/// Stadion paths for `K = 1..=k_max`, one reference per K reused across the
/// whole grid.
pub fn stadion_paths(
    alg: &ClustererConfig,
    x: &Dataset,
    k_max: usize,
    grid: &EpsilonGrid,
    params: &StabilityParams,
) -> Result<PathSet> {
    if !x.is_standardized() {
        log::warn!("computing stability paths on unstandardized data");
    }
    let references = build_references(alg, x, k_max, params)?;
    paths_for_references(alg, x, references, grid, params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridChoice {
    Fixed(EpsilonGrid),
    /// Grid of length `m` up to a calibrated ε_max.
    Auto {
        m: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub max: f64,
    pub mean: f64,
    pub mean_stab_b: f64,
    pub mean_stab_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub clusterer_seed: u64,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub algorithm: ClustererConfig,
    pub params: StabilityParams,
    pub aggregation: Aggregation,
    pub k_hat: usize,
    pub k_hat_max: usize,
    pub k_hat_mean: usize,
    pub scores: Vec<KScore>,
    pub paths: Vec<StadionPath>,
    pub references: Vec<Partition>,
    pub diagnostics: Diagnostics,
    pub provenance: Provenance,
}

impl SelectionReport {
    pub fn k_hat_for(&self, agg: Aggregation) -> usize {
        match agg {
            Aggregation::Max => self.k_hat_max,
            Aggregation::Mean => self.k_hat_mean,
        }
    }

    pub fn reference(&self, k: usize) -> Option<&Partition> {
        self.references.get(k.checked_sub(1)?)
    }

    /// Candidate K values ordered from best to worst under `agg`, ties to
    /// the smaller K.
    pub fn ranking(&self, agg: Aggregation) -> Vec<usize> {
        let mut order: Vec<&KScore> = self.scores.iter().collect();
        order.sort_by(|a, b| {
            let (sa, sb) = match agg {
                Aggregation::Max => (a.max, b.max),
                Aggregation::Mean => (a.mean, b.mean),
            };
            sb.total_cmp(&sa).then(a.k.cmp(&b.k))
        });
        order.into_iter().map(|s| s.k).collect()
    }
}

/// Index of the largest value, ties to the first.
pub(crate) fn argmax_first(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Paths over a fixed or calibrated grid.
#[derive(Debug, Clone)]
pub struct GridPaths {
    pub set: PathSet,
    /// ε_max found by calibration, when the grid was `Auto`.
    pub calibrated_eps_max: Option<f64>,
    pub calibration_fallback: bool,
}

/// Computes the paths for `grid`. An `Auto` grid is calibrated first and the
/// calibration paths are cut at the chosen ε_max.
pub fn paths_for_grid(
    alg: &ClustererConfig,
    x: &Dataset,
    k_max: usize,
    grid: &GridChoice,
    params: &StabilityParams,
) -> Result<GridPaths> {
    match grid {
        GridChoice::Fixed(g) => Ok(GridPaths {
            set: stadion_paths(alg, x, k_max, g, params)?,
            calibrated_eps_max: None,
            calibration_fallback: false,
        }),
        GridChoice::Auto { m } => {
            let cal = calibrate::calibrate_eps_max(alg, x, k_max, params, *m)?;
            let keep = cal.paths.grid.count_up_to(cal.eps_max).max(2);
            let set = cal.paths;
            let grid = EpsilonGrid::new(set.grid.values()[..keep].to_vec())?;
            let paths = set.paths.iter().map(|p| p.truncated(keep)).collect();
            Ok(GridPaths {
                set: PathSet {
                    grid,
                    paths,
                    references: set.references,
                    failed_perturbations: set.failed_perturbations,
                },
                calibrated_eps_max: Some(cal.eps_max),
                calibration_fallback: !cal.found,
            })
        }
    }
}

/// Full selection: paths, per-K aggregates and the selected K for both
/// aggregation rules.
pub fn select_k(
    alg: &ClustererConfig,
    x: &Dataset,
    k_max: usize,
    grid: &GridChoice,
    params: &StabilityParams,
    aggregation: Aggregation,
) -> Result<SelectionReport> {
    let g = paths_for_grid(alg, x, k_max, grid, params)?;
    Ok(report_from_paths(
        alg,
        x,
        g.set,
        params,
        aggregation,
        g.calibrated_eps_max,
        g.calibration_fallback,
    ))
}

pub(crate) fn report_from_paths(
    alg: &ClustererConfig,
    x: &Dataset,
    set: PathSet,
    params: &StabilityParams,
    aggregation: Aggregation,
    calibrated: Option<f64>,
    fallback: bool,
) -> SelectionReport {
    let scores: Vec<KScore> = set
        .paths
        .iter()
        .map(|p| {
            let (_, _, max) = p.aggregate(Aggregation::Max);
            let (b, w, mean) = p.aggregate(Aggregation::Mean);
            KScore {
                k: p.k,
                max,
                mean,
                mean_stab_b: b,
                mean_stab_w: w,
            }
        })
        .collect();
    let k_hat_max = scores[argmax_first(scores.iter().map(|s| s.max)).unwrap_or(0)].k;
    let k_hat_mean = scores[argmax_first(scores.iter().map(|s| s.mean)).unwrap_or(0)].k;
    let diagnostics = Diagnostics {
        skipped_omega: set.skipped(),
        failed_perturbations: set.failed_perturbations,
        calibrated_eps_max: calibrated,
        calibration_fallback: fallback,
        eps_max: set.grid.eps_max(),
        standardized_input: x.is_standardized(),
    };
    SelectionReport {
        algorithm: alg.clone(),
        params: StabilityParams {
            threads: None,
            ..params.clone()
        },
        aggregation,
        k_hat: match aggregation {
            Aggregation::Max => k_hat_max,
            Aggregation::Mean => k_hat_mean,
        },
        k_hat_max,
        k_hat_mean,
        scores,
        paths: set.paths,
        references: set
            .references
            .into_iter()
            .map(|r| r.model.partition)
            .collect(),
        diagnostics,
        provenance: Provenance {
            master_seed: params.seed,
            clusterer_seed: alg.seed,
            rule: seeds::RULE.to_string(),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeOffRow {
    pub k: usize,
    pub stab_b: f64,
    pub stab_w: f64,
    pub stadion: f64,
}

/// Per-K `(Stab_B, Stab_W, Stadion)` aggregated by the report's rule.
pub fn trade_off_table(report: &SelectionReport) -> Vec<TradeOffRow> {
    report
        .paths
        .iter()
        .map(|p| {
            let (stab_b, stab_w, stadion) = p.aggregate(report.aggregation);
            TradeOffRow {
                k: p.k,
                stab_b,
                stab_w,
                stadion,
            }
        })
        .collect()
}
