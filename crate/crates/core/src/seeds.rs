//! Seed splitting.
//!
//! Every random draw in the crate comes from a ChaCha8 stream whose seed is
//! derived from a master seed and a path of integers naming the draw
//! (stream tag, then indices such as K, grid index and perturbation index).
//! Two cells of the evaluation lattice never share a stream, and a cell's
//! stream does not depend on the order in which cells are evaluated.
//!
//! The rule is: `h = mix(master ^ SALT)`, then for each path element `v`,
//! `h = mix(h ^ mix(v + GOLDEN))`, where `mix` is the SplitMix64 finalizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SALT: u64 = 0x5AD1_0000_5EED_0001;

/// Stream tags, the first element of every derivation path.
pub mod stream {
    /// Between-cluster perturbations: path `[BETWEEN, grid index, d]`.
    pub const BETWEEN: u64 = 1;
    /// Within-cluster perturbations: path `[WITHIN, K, first sample of the cluster, K', grid index, d]`.
    pub const WITHIN: u64 = 2;
    /// K-means restarts: path `[KMEANS_RUN, run index]` from the clusterer seed.
    pub const KMEANS_RUN: u64 = 3;
    /// Synthetic data generation: path `[GENERATOR]`.
    pub const GENERATOR: u64 = 4;
}

/// Human-readable statement of the derivation rule, embedded in reports.
pub const RULE: &str = "h = splitmix64(master ^ 0x5AD100005EED0001); for v in path: h = splitmix64(h ^ splitmix64(v + 0x9E3779B97F4A7C15)); rng = ChaCha8(h). \
paths: between [1, eps_index, d]; within [2, K, smallest sample index of the cluster, K', eps_index, d]; kmeans restart [3, run] from the clusterer seed; generator [4]. with a calibrated eps_max, eps_index counts points of the calibration grid on [0, 2*sqrt(p)]";

#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master ^ SALT), |h, &v| {
        mix(h ^ mix(v.wrapping_add(GOLDEN)))
    })
}

pub fn rng_for(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, path))
}
