//! Data-driven choice of ε_max: the noise level at which the data stop
//! being clusterable, i.e. where K=1 becomes the best solution.

use crate::clusterers::ClustererConfig;
use crate::dataset::Dataset;
use crate::error::{Result, StadionError};
use crate::perturbation::EpsilonGrid;

use super::{stadion_paths, PathSet, StabilityParams};

#[derive(Debug, Clone)]
pub struct Calibration {
    pub eps_max: f64,
    /// False when no grid point qualified and `eps_max` fell back to √p.
    pub found: bool,
    /// Paths over the whole search grid `[0, 2√p]`.
    pub paths: PathSet,
}

/// Searches a grid of `2(m − 1) + 1` points on `[0, 2√p]` for the smallest
/// ε > 0 at which the K=1 Stadion strictly exceeds that of every K in
/// `2..=k_max`.
pub fn calibrate_eps_max(
    alg: &ClustererConfig,
    x: &Dataset,
    k_max: usize,
    params: &StabilityParams,
    m: usize,
) -> Result<Calibration> {
    if k_max < 2 {
        return Err(StadionError::InvalidParams(
            "calibration needs at least two candidate values of K".into(),
        ));
    }
    if m < 2 {
        return Err(StadionError::InvalidGrid(format!(
            "grid length {m} is below 2"
        )));
    }
    let root_p = (x.n_features() as f64).sqrt();
    let grid = EpsilonGrid::linear(2.0 * root_p, 2 * (m - 1) + 1)?;
    let paths = stadion_paths(alg, x, k_max, &grid, params)?;
    let hit = (1..grid.len()).find(|&i| {
        let one = paths.paths[0].stadion[i];
        paths.paths[1..].iter().all(|p| one > p.stadion[i])
    });
    let (eps_max, found) = match hit {
        Some(i) => (grid.values()[i], true),
        None => {
            log::warn!(
                "no noise level up to {:.4} makes K=1 best; using {root_p:.4}",
                grid.eps_max()
            );
            (root_p, false)
        }
    };
    Ok(Calibration {
        eps_max,
        found,
        paths,
    })
}
