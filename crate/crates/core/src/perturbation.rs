//! Additive-noise perturbation and the noise-amplitude grid.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, StadionError};
use crate::seeds;

pub use crate::stability::calibrate::{calibrate_eps_max, Calibration};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// i.i.d. `U(−ε, +ε)` per entry.
    Uniform,
    /// i.i.d. `N(0, ε²)` per entry: ε is the standard deviation.
    Gaussian,
    /// N rows drawn with replacement; ε is ignored.
    Bootstrap,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Uniform => "uniform",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Bootstrap => "bootstrap",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = StadionError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(NoiseKind::Uniform),
            "gaussian" | "normal" => Ok(NoiseKind::Gaussian),
            "bootstrap" => Ok(NoiseKind::Bootstrap),
            other => Err(StadionError::InvalidParams(format!(
                "unknown noise kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub epsilon: f64,
}

impl NoiseSpec {
    pub fn uniform(epsilon: f64) -> Self {
        Self {
            kind: NoiseKind::Uniform,
            epsilon,
        }
    }

    pub fn gaussian(epsilon: f64) -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            epsilon,
        }
    }

    pub fn bootstrap() -> Self {
        Self {
            kind: NoiseKind::Bootstrap,
            epsilon: 0.0,
        }
    }
}

/// A perturbed copy. For bootstrap, `indices[i]` is the source row of row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    pub data: Dataset,
    pub indices: Option<Vec<usize>>,
}

pub fn perturb(x: &Dataset, spec: &NoiseSpec, seed: u64) -> Result<Perturbed> {
    perturb_with(x, spec, &mut seeds::rng_for(seed, &[]))
}

pub(crate) fn perturb_with<R: Rng + ?Sized>(
    x: &Dataset,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<Perturbed> {
    if !(spec.epsilon >= 0.0) || !spec.epsilon.is_finite() {
        return Err(StadionError::NegativeEpsilon(spec.epsilon));
    }
    let eps = spec.epsilon;
    match spec.kind {
        NoiseKind::Bootstrap => {
            let n = x.n_samples();
            let indices: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            Ok(Perturbed {
                data: x.subset(&indices),
                indices: Some(indices),
            })
        }
        _ if eps == 0.0 => Ok(Perturbed {
            data: x.clone(),
            indices: None,
        }),
        NoiseKind::Uniform => {
            let values = x
                .values()
                .iter()
                .map(|&v| v + eps * (2.0 * rng.random::<f64>() - 1.0))
                .collect();
            Ok(Perturbed {
                data: x.with_values(values),
                indices: None,
            })
        }
        NoiseKind::Gaussian => {
            let values = x
                .values()
                .iter()
                .map(|&v| {
                    let z: f64 = StandardNormal.sample(rng);
                    v + eps * z
                })
                .collect();
            Ok(Perturbed {
                data: x.with_values(values),
                indices: None,
            })
        }
    }
}

/// Strictly increasing noise amplitudes starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonGrid {
    values: Vec<f64>,
}

impl EpsilonGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(StadionError::InvalidGrid(
                "at least two points are required".into(),
            ));
        }
        if values[0] != 0.0 {
            return Err(StadionError::InvalidGrid(
                "the first amplitude must be 0".into(),
            ));
        }
        if values
            .windows(2)
            .any(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(StadionError::InvalidGrid(
                "amplitudes must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self { values })
    }

    /// `m` evenly spaced points on `[0, eps_max]`.
    pub fn linear(eps_max: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(StadionError::InvalidGrid(format!(
                "grid length {m} is below 2"
            )));
        }
        if !(eps_max > 0.0 && eps_max.is_finite()) {
            return Err(StadionError::InvalidGrid(format!(
                "eps_max {eps_max} must be positive"
            )));
        }
        let step = eps_max / (m - 1) as f64;
        let mut values: Vec<f64> = (0..m).map(|i| i as f64 * step).collect();
        values[m - 1] = eps_max;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eps_max(&self) -> f64 {
        *self.values.last().expect("non-empty grid")
    }

    /// Number of leading grid points not above `eps_max` (at least 1).
    pub fn count_up_to(&self, eps_max: f64) -> usize {
        self.values
            .iter()
            .take_while(|&&e| e <= eps_max)
            .count()
            .max(1)
    }
}

pub const DEFAULT_GRID_LEN: usize = 21;

/// Linear grid on `[0, eps_max]`, with `eps_max = √p` unless given.
pub fn default_grid(p: usize, m: usize, eps_max: Option<f64>) -> Result<EpsilonGrid> {
    if p == 0 {
        return Err(StadionError::InvalidGrid(
            "dimension must be positive".into(),
        ));
    }
    EpsilonGrid::linear(eps_max.unwrap_or((p as f64).sqrt()), m)
}
