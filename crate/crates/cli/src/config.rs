//! Run configuration: built-in defaults, then an optional key=value file
//! with `[section]` headers, then command-line flags.
//!
//! ```text
//! [data]
//! path = blobs.csv
//! labels_col = 2
//! [stability]
//! kmax = 10
//! omega = 2..10
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use stadion::benchmark::Method;
use stadion::clusterers::{Algorithm, ClustererConfig};
use stadion::dataset::CsvOptions;
use stadion::partitions::MeasureId;
use stadion::perturbation::{default_grid, EpsilonGrid, NoiseKind};
use stadion::stability::{Aggregation, GridChoice, StabilityParams, Variant};

use crate::Failure;

/// Every recognised key, its default (if any) and a short description.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    (
        "data.path",
        None,
        "input CSV file, or directory of CSV files for benchmark",
    ),
    (
        "data.labels_col",
        None,
        "zero-based index of the ground-truth label column",
    ),
    ("data.delimiter", Some(","), "field delimiter, one byte"),
    (
        "data.header",
        Some("false"),
        "whether the first row is a header",
    ),
    ("clusterer.algorithm", Some("kmeans"), "kmeans or ward"),
    (
        "clusterer.runs",
        Some("35"),
        "k-means restarts, best cost kept",
    ),
    (
        "stability.variant",
        Some("standard"),
        "standard or extended",
    ),
    (
        "stability.kmax",
        None,
        "largest K; defaults to K*+20 rounded down to ten when labels are known",
    ),
    ("stability.d", Some("10"), "perturbations per noise level"),
    (
        "stability.omega",
        Some("2..10"),
        "sub-cluster counts, a..b or a comma list",
    ),
    (
        "stability.noise",
        Some("uniform"),
        "uniform, gaussian or bootstrap",
    ),
    (
        "stability.measure",
        Some("ARI1"),
        "partition similarity measure",
    ),
    (
        "stability.agg",
        Some("max"),
        "path aggregation, max or mean",
    ),
    ("grid.m", Some("21"), "number of noise levels"),
    (
        "grid.eps_max",
        None,
        "largest noise level, a number or auto; defaults to sqrt(p)",
    ),
    ("run.seed", Some("0"), "master seed"),
    (
        "run.threads",
        None,
        "worker threads; defaults to STADION_THREADS, then all cores",
    ),
    ("output.out", Some("stadion-out"), "output directory"),
    (
        "output.emit",
        Some("csv,json"),
        "artifacts to write: csv, svg, json",
    ),
    (
        "benchmark.methods",
        Some("all"),
        "comma list of methods, or all",
    ),
];

pub type Overrides = Vec<(&'static str, String)>;

/// Raw key=value settings after layering.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn defaults() -> Self {
        let values = KEYS
            .iter()
            .filter_map(|(k, d, _)| d.map(|d| (k.to_string(), d.to_string())))
            .collect();
        Self { values }
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), Failure> {
        let ini = ini::Ini::load_from_file(path).map_err(|e| {
            Failure::config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let Some(section) = section else {
                    return Err(Failure::config(format!(
                        "{}: key {key:?} appears before any [section]",
                        path.display()
                    )));
                };
                let full = format!("{section}.{key}");
                if !KEYS.iter().any(|(k, _, _)| *k == full) {
                    return Err(Failure::config(format!(
                        "{}: unknown key {full:?}",
                        path.display()
                    )));
                }
                self.values.insert(full, value.trim().to_string());
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, overrides: Overrides) {
        for (k, v) in overrides {
            self.values.insert(k.to_string(), v);
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .filter(|v| !v.is_empty())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Failure::config(format!("{key} = {v:?}: {e}")))
            })
            .transpose()
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| Failure::config(format!("{key} is required")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsMax {
    SqrtP,
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Emit {
    pub csv: bool,
    pub svg: bool,
    pub json: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub csv: CsvOptions,
    pub clusterer: ClustererConfig,
    pub params: StabilityParams,
    pub aggregation: Aggregation,
    pub k_max: Option<usize>,
    pub grid_m: usize,
    pub eps_max: EpsMax,
    pub out: PathBuf,
    pub emit: Emit,
    pub methods: Vec<Method>,
}

fn parse_omega(s: &str) -> Result<Vec<usize>, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s:?}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

fn parse_emit(s: &str) -> Result<Emit, String> {
    let mut emit = Emit::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.to_ascii_lowercase().as_str() {
            "csv" => emit.csv = true,
            "svg" => emit.svg = true,
            "json" => emit.json = true,
            other => return Err(format!("unknown artifact {other:?}")),
        }
    }
    Ok(emit)
}

fn parse_methods(s: &str) -> Result<Vec<Method>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::all());
    }
    s.split(',')
        .map(|m| m.trim().parse::<Method>().map_err(|e| e.to_string()))
        .collect()
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<Self, Failure> {
        let delimiter: String = s.require("data.delimiter")?;
        let delimiter = match delimiter.as_bytes() {
            [b] => *b,
            _ if delimiter == "\\t" || delimiter == "tab" => b'\t',
            _ => {
                return Err(Failure::config(format!(
                    "data.delimiter = {delimiter:?} is not one byte"
                )))
            }
        };
        let csv = CsvOptions {
            delimiter,
            has_header: s.require("data.header")?,
            label_column: s.parse("data.labels_col")?,
        };

        let seed: u64 = s.require("run.seed")?;
        let algorithm: Algorithm = s.require("clusterer.algorithm")?;
        let mut clusterer = match algorithm {
            Algorithm::KMeans => {
                ClustererConfig::kmeans(seed).with_runs(s.require("clusterer.runs")?)
            }
            Algorithm::Ward => ClustererConfig::ward(),
        };
        clusterer.seed = seed;
        clusterer
            .validate()
            .map_err(|e| Failure::config(e.to_string()))?;

        let omega_raw: String = s.require("stability.omega")?;
        let omega = parse_omega(&omega_raw)
            .map_err(|e| Failure::config(format!("stability.omega: {e}")))?;
        let params = StabilityParams {
            d: s.require("stability.d")?,
            omega,
            measure: s.require::<MeasureId>("stability.measure")?,
            noise: s.require::<NoiseKind>("stability.noise")?,
            variant: s.require::<Variant>("stability.variant")?,
            seed,
            threads: s.parse("run.threads")?,
        };
        params
            .validate()
            .map_err(|e| Failure::config(e.to_string()))?;
        params
            .check_variant(&clusterer)
            .map_err(|e| Failure::config(e.to_string()))?;

        let k_max: Option<usize> = s.parse("stability.kmax")?;
        if k_max == Some(0) {
            return Err(Failure::config("stability.kmax must be at least 1"));
        }
        let grid_m: usize = s.require("grid.m")?;
        if grid_m < 2 {
            return Err(Failure::config("grid.m must be at least 2"));
        }
        let eps_max = match s.get("grid.eps_max") {
            None => EpsMax::SqrtP,
            Some(v) if v.eq_ignore_ascii_case("auto") => EpsMax::Auto,
            Some(v) => match v.parse::<f64>() {
                Ok(e) if e.is_finite() && e > 0.0 => EpsMax::Value(e),
                _ => {
                    return Err(Failure::config(format!(
                        "grid.eps_max = {v:?}: expected auto or a positive number"
                    )))
                }
            },
        };

        let emit_raw: String = s.require("output.emit")?;
        let methods_raw: String = s.require("benchmark.methods")?;
        Ok(Self {
            data: s.parse("data.path")?,
            csv,
            clusterer,
            params,
            aggregation: s.require("stability.agg")?,
            k_max,
            grid_m,
            eps_max,
            out: s.require("output.out")?,
            emit: parse_emit(&emit_raw)
                .map_err(|e| Failure::config(format!("output.emit: {e}")))?,
            methods: parse_methods(&methods_raw)
                .map_err(|e| Failure::config(format!("benchmark.methods: {e}")))?,
        })
    }

    pub fn grid(&self, n_features: usize) -> Result<GridChoice, Failure> {
        let fixed = match self.eps_max {
            EpsMax::Auto => return Ok(GridChoice::Auto { m: self.grid_m }),
            EpsMax::SqrtP => default_grid(n_features, self.grid_m, None),
            EpsMax::Value(e) => EpsilonGrid::linear(e, self.grid_m),
        };
        fixed
            .map(GridChoice::Fixed)
            .map_err(|e| Failure::config(e.to_string()))
    }
}
