//! Synthetic labelled fixtures.
//!
//! Every generator is a pure function of `(spec, seed)`. Rows are emitted
//! class by class, so labels are contiguous blocks in class order.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, LabeledDataset};
use crate::error::{Result, StadionError};
use crate::partitions::Partition;
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Isotropic Gaussians, one per center.
    GaussianBlobs {
        centers: Vec<Vec<f64>>,
        stds: Vec<f64>,
        counts: Vec<usize>,
    },
    /// Uniform on `[0, 1]^dim`; a single class.
    UniformCube { dim: usize, n: usize },
    /// Uniform directions on the unit sphere in `dim` dimensions, with radius
    /// drawn uniformly from `[1 - thickness/2, 1 + thickness/2]`; a single class.
    SphereSurface {
        dim: usize,
        n: usize,
        thickness: f64,
    },
    /// Two parallel elongated Gaussians in 2-D: unit marginal variances with
    /// the given correlation, centers offset by `separation` along the minor axis.
    CorrelatedGaussians {
        n: usize,
        correlation: f64,
        separation: f64,
    },
    /// Three stroke-drawn letter shapes in 2-D. The first two stand side by
    /// side `close_gap` apart; the third sits `far_gap` above them, centered.
    /// Points are jittered with a Gaussian of sd `jitter`.
    LettersLike {
        n: usize,
        close_gap: f64,
        far_gap: f64,
        jitter: f64,
    },
}

impl GeneratorSpec {
    /// `n` points split as evenly as possible across `centers`, all with sd `std`.
    pub fn balanced_blobs(centers: Vec<Vec<f64>>, std: f64, n: usize) -> Self {
        let k = centers.len().max(1);
        let counts = (0..k).map(|i| n / k + usize::from(i < n % k)).collect();
        GeneratorSpec::GaussianBlobs {
            stds: vec![std; centers.len()],
            centers,
            counts,
        }
    }

    /// Three well-separated unit-variance blobs in the plane.
    pub fn three_blobs(n: usize) -> Self {
        Self::balanced_blobs(
            vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![5.0, 9.0]],
            1.0,
            n,
        )
    }

    /// One standard Gaussian in `dim` dimensions.
    pub fn single_gaussian(dim: usize, n: usize) -> Self {
        Self::balanced_blobs(vec![vec![0.0; dim]], 1.0, n)
    }

    /// Points on a thin spherical shell in 3-D, a non-clusterable golfball analogue.
    pub fn golfball(n: usize) -> Self {
        GeneratorSpec::SphereSurface {
            dim: 3,
            n,
            thickness: 0.02,
        }
    }

    /// Two correlated Gaussians that K-means separates only at K = 2.
    pub fn two_correlated_gaussians(n: usize) -> Self {
        GeneratorSpec::CorrelatedGaussians {
            n,
            correlation: 0.9,
            separation: 5.0,
        }
    }

    /// Three letter-shaped clusters, two of them close together.
    pub fn letters(n: usize) -> Self {
        GeneratorSpec::LettersLike {
            n,
            close_gap: 0.6,
            far_gap: 2.0,
            jitter: 0.2,
        }
    }

    /// One large diffuse cluster and three small ones in its corner, two of
    /// which nearly touch. K-means at K = 4 prefers cutting the large cluster
    /// over separating the touching pair.
    pub fn four_clusters_corner() -> Self {
        GeneratorSpec::GaussianBlobs {
            centers: vec![
                vec![0.0, 0.0],
                vec![6.5, 6.5],
                vec![7.3, 6.5],
                vec![6.5, -6.5],
            ],
            stds: vec![1.5, 0.2, 0.2, 0.3],
            counts: vec![700, 60, 60, 80],
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(StadionError::InvalidGenerator(m.to_string()));
        match self {
            GeneratorSpec::GaussianBlobs {
                centers,
                stds,
                counts,
            } => {
                if centers.is_empty() {
                    return bad("at least one center is required");
                }
                if stds.len() != centers.len() || counts.len() != centers.len() {
                    return bad("centers, stds and counts must have equal lengths");
                }
                let dim = centers[0].len();
                if dim == 0 || centers.iter().any(|c| c.len() != dim) {
                    return bad("centers must share a positive dimension");
                }
                if centers.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("centers must be finite");
                }
                if stds.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
                    return bad("standard deviations must be positive");
                }
                if counts.contains(&0) {
                    return bad("counts must be positive");
                }
            }
            GeneratorSpec::UniformCube { dim, n } => {
                if *dim == 0 || *n == 0 {
                    return bad("dim and n must be positive");
                }
            }
            GeneratorSpec::SphereSurface { dim, n, thickness } => {
                if *dim < 2 || *n == 0 {
                    return bad("sphere needs dim >= 2 and n > 0");
                }
                if !(0.0..2.0).contains(thickness) {
                    return bad("thickness must lie in [0, 2)");
                }
            }
            GeneratorSpec::CorrelatedGaussians {
                n,
                correlation,
                separation,
            } => {
                if *n < 2 {
                    return bad("n must be at least 2");
                }
                if !(correlation.abs() < 1.0) {
                    return bad("correlation must lie in (-1, 1)");
                }
                if !(separation.is_finite() && *separation >= 0.0) {
                    return bad("separation must be non-negative");
                }
            }
            GeneratorSpec::LettersLike {
                n,
                close_gap,
                far_gap,
                jitter,
            } => {
                if *n < 3 {
                    return bad("n must be at least 3");
                }
                if !(*close_gap >= 0.0 && *far_gap >= 0.0) {
                    return bad("gaps must be non-negative");
                }
                if !(*jitter > 0.0 && jitter.is_finite()) {
                    return bad("jitter must be positive");
                }
            }
        }
        Ok(())
    }
}

pub fn gen_synthetic(spec: &GeneratorSpec, seed: u64) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = seeds::rng_for(seed, &[seeds::stream::GENERATOR]);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    match spec {
        GeneratorSpec::GaussianBlobs {
            centers,
            stds,
            counts,
        } => {
            for (class, ((c, &s), &m)) in centers.iter().zip(stds).zip(counts).enumerate() {
                for _ in 0..m {
                    rows.push(c.iter().map(|&mu| mu + s * normal(&mut rng)).collect());
                    labels.push(class);
                }
            }
        }
        GeneratorSpec::UniformCube { dim, n } => {
            for _ in 0..*n {
                rows.push((0..*dim).map(|_| rng.random::<f64>()).collect());
                labels.push(0);
            }
        }
        GeneratorSpec::SphereSurface { dim, n, thickness } => {
            for _ in 0..*n {
                let dir = loop {
                    let v: Vec<f64> = (0..*dim).map(|_| normal(&mut rng)).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        break v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
                    }
                };
                let r = 1.0 + thickness * (rng.random::<f64>() - 0.5);
                rows.push(dir.into_iter().map(|x| r * x).collect());
                labels.push(0);
            }
        }
        GeneratorSpec::CorrelatedGaussians {
            n,
            correlation,
            separation,
        } => {
            // Principal axes of [[1, ρ], [ρ, 1]] are the diagonals.
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let major_sd = (1.0 + correlation).sqrt();
            let minor_sd = (1.0 - correlation).sqrt();
            for class in 0..2 {
                let count = n / 2 + usize::from(class == 0 && n % 2 == 1);
                let offset = if class == 0 { -0.5 } else { 0.5 } * separation;
                for _ in 0..count {
                    let a = major_sd * normal(&mut rng);
                    let b = minor_sd * normal(&mut rng) + offset;
                    rows.push(vec![h * (a - b), h * (a + b)]);
                    labels.push(class);
                }
            }
        }
        GeneratorSpec::LettersLike {
            n,
            close_gap,
            far_gap,
            jitter,
        } => {
            let half = 0.5 * (LETTER_WIDTH + close_gap);
            let offsets = [(0.0, 0.0), (2.0 * half, 0.0), (half, 1.0 + far_gap)];
            for (class, strokes) in LETTERS.iter().enumerate() {
                let count = n / 3 + usize::from(class < n % 3);
                let lengths: Vec<f64> = strokes
                    .iter()
                    .map(|&((ax, ay), (bx, by))| (bx - ax).hypot(by - ay))
                    .collect();
                let total: f64 = lengths.iter().sum();
                for _ in 0..count {
                    let mut t = rng.random::<f64>() * total;
                    let mut s = 0;
                    while s + 1 < strokes.len() && t > lengths[s] {
                        t -= lengths[s];
                        s += 1;
                    }
                    let ((ax, ay), (bx, by)) = strokes[s];
                    let f = (t / lengths[s]).clamp(0.0, 1.0);
                    let x = ax + f * (bx - ax) + jitter * normal(&mut rng) + offsets[class].0;
                    let y = ay + f * (by - ay) + jitter * normal(&mut rng) + offsets[class].1;
                    rows.push(vec![x, y]);
                    labels.push(class);
                }
            }
        }
    }
    let data = Dataset::from_rows(&rows)?;
    let labels = Partition::from_labels(labels)?;
    LabeledDataset::new(data, labels)
}

#[inline]
fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

const LETTER_WIDTH: f64 = 0.8;

type Stroke = ((f64, f64), (f64, f64));

/// "N", "Z" and "V" drawn in a 0.8 × 1 box.
const LETTERS: [&[Stroke]; 3] = [
    &[
        ((0.0, 0.0), (0.0, 1.0)),
        ((0.0, 1.0), (0.8, 0.0)),
        ((0.8, 0.0), (0.8, 1.0)),
    ],
    &[
        ((0.0, 1.0), (0.8, 1.0)),
        ((0.8, 1.0), (0.0, 0.0)),
        ((0.0, 0.0), (0.8, 0.0)),
    ],
    &[((0.0, 1.0), (0.4, 0.0)), ((0.4, 0.0), (0.8, 1.0))],
];
