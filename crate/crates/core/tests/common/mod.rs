//! Reference implementations used as oracles by the integration tests.
//! They work from raw label vectors and never touch contingency tables.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use stadion::dataset::Dataset;
use stadion::partitions::{MeasureId, Partition};

pub fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn partition(labels: &[usize]) -> Partition {
    Partition::from_labels(labels.to_vec()).unwrap()
}

pub fn gaussian_rows<R: Rng>(rng: &mut R, n: usize, p: usize) -> Dataset {
    let values: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(rng)).collect();
    Dataset::from_flat(n, p, values).unwrap()
}

/// `(n11, n10, n01, n00)` by visiting every pair once.
pub fn pair_counts(a: &[usize], b: &[usize]) -> (u64, u64, u64, u64) {
    let (mut n11, mut n10, mut n01, mut n00) = (0, 0, 0, 0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1,
                (true, false) => n10 += 1,
                (false, true) => n01 += 1,
                (false, false) => n00 += 1,
            }
        }
    }
    (n11, n10, n01, n00)
}

pub fn pair_measure(m: MeasureId, a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let (n11, n10, n01, n00) = pair_counts(a, b);
    let same = n10 == 0 && n01 == 0;
    let (n11, n10, n01, n00) = (n11 as i128, n10 as i128, n01 as i128, n00 as i128);
    let pairs = n11 + n10 + n01 + n00;
    match m {
        MeasureId::RI => (n11 + n00) as f64 / pairs as f64,
        MeasureId::ARI1 => {
            let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
            if den == 0 {
                f64::from(u8::from(same))
            } else {
                (2 * (n00 * n11 - n01 * n10)) as f64 / den as f64
            }
        }
        MeasureId::ARI2 => {
            // Σ n_ij² = N + 2·n11, Σ a_i² = N + 2·(n11 + n10), Σ b_j² = N + 2·(n11 + n01).
            let nf = n as f64;
            let cells = nf + 2.0 * n11 as f64;
            let a2 = nf + 2.0 * (n11 + n10) as f64;
            let b2 = nf + 2.0 * (n11 + n01) as f64;
            let expected = a2 * b2 / (nf * nf);
            let den = 0.5 * (a2 + b2) - expected;
            if den.abs() <= 1e-12 * (a2 + b2) {
                f64::from(u8::from(same))
            } else {
                (cells - expected) / den
            }
        }
        MeasureId::FM => {
            let den = (n11 + n10) * (n11 + n01);
            if den == 0 {
                0.0
            } else {
                n11 as f64 / (den as f64).sqrt()
            }
        }
        MeasureId::JACC => {
            let den = n11 + n10 + n01;
            if den == 0 {
                0.0
            } else {
                n11 as f64 / den as f64
            }
        }
        _ => panic!("{m} is not pair counting"),
    }
}

fn counts<K: Ord + Copy>(keys: impl Iterator<Item = K>) -> BTreeMap<K, f64> {
    let mut m = BTreeMap::new();
    for k in keys {
        *m.entry(k).or_insert(0.0) += 1.0;
    }
    m
}

fn entropy_of(c: &BTreeMap<impl Ord, f64>, n: f64) -> f64 {
    c.values().map(|&v| -(v / n) * (v / n).ln()).sum()
}

pub struct Info {
    pub ha: f64,
    pub hb: f64,
    pub joint: f64,
    pub mi: f64,
}

/// Entropies and mutual information from the empirical joint distribution.
pub fn info(a: &[usize], b: &[usize]) -> Info {
    let n = a.len() as f64;
    let ca = counts(a.iter().copied());
    let cb = counts(b.iter().copied());
    let cab = counts(a.iter().copied().zip(b.iter().copied()));
    let mi = cab
        .iter()
        .map(|(&(i, j), &v)| {
            let pij = v / n;
            pij * (pij / ((ca[&i] / n) * (cb[&j] / n))).ln()
        })
        .sum();
    Info {
        ha: entropy_of(&ca, n),
        hb: entropy_of(&cb, n),
        joint: entropy_of(&cab, n),
        mi,
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Expected MI under random permutation of `b`, by summing the
/// hypergeometric distribution of every cell.
pub fn emi(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let nf = n as f64;
    let ca = counts(a.iter().copied());
    let cb = counts(b.iter().copied());
    let mut total = 0.0;
    for &ai in ca.values() {
        for &bj in cb.values() {
            let (ai, bj) = (ai as usize, bj as usize);
            let lo = (ai + bj).saturating_sub(n).max(1);
            for nij in lo..=ai.min(bj) {
                let log_p = ln_factorial(ai)
                    + ln_factorial(bj)
                    + ln_factorial(n - ai)
                    + ln_factorial(n - bj)
                    - ln_factorial(n)
                    - ln_factorial(nij)
                    - ln_factorial(ai - nij)
                    - ln_factorial(bj - nij)
                    - ln_factorial(n + nij - ai - bj);
                let x = nij as f64;
                total += log_p.exp() * (x / nf) * (nf * x / (ai as f64 * bj as f64)).ln();
            }
        }
    }
    total
}

pub fn info_measure(m: MeasureId, a: &[usize], b: &[usize]) -> f64 {
    let Info { ha, hb, joint, mi } = info(a, b);
    let both_trivial = ha == 0.0 && hb == 0.0;
    let hmax = ha.max(hb);
    let norm = |num: f64, den: f64| {
        if both_trivial {
            1.0
        } else if den == 0.0 {
            0.0
        } else {
            num / den
        }
    };
    match m {
        MeasureId::MI => mi,
        MeasureId::NMI1 => norm(mi, hmax),
        MeasureId::NMI2 => norm(mi, ha.min(hb)),
        MeasureId::NMI3 => norm(mi, (ha * hb).sqrt()),
        MeasureId::NMI4 => norm(2.0 * mi, ha + hb),
        MeasureId::NMI5 => norm(mi, joint),
        MeasureId::VI => ha + hb - 2.0 * mi,
        MeasureId::NVI => 1.0 - norm(mi, joint),
        MeasureId::ID => hmax - mi,
        MeasureId::NID => 1.0 - norm(mi, hmax),
        MeasureId::AMI => {
            if hmax == 0.0 {
                return 1.0;
            }
            let e = emi(a, b);
            let den = hmax - e;
            if den.abs() <= 1e-12 * hmax.max(1.0) {
                let (_, n10, n01, _) = pair_counts(a, b);
                f64::from(u8::from(n10 == 0 && n01 == 0))
            } else {
                (mi - e) / den
            }
        }
        _ => panic!("{m} is not information based"),
    }
}

/// Mean and standard error of MI over `reps` random permutations of `b`.
pub fn permutation_mi<R: Rng>(a: &[usize], b: &[usize], reps: usize, rng: &mut R) -> (f64, f64) {
    let mut shuffled = b.to_vec();
    let samples: Vec<f64> = (0..reps)
        .map(|_| {
            shuffled.shuffle(rng);
            info(a, &shuffled).mi
        })
        .collect();
    let r = reps as f64;
    let mean = samples.iter().sum::<f64>() / r;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Within-cluster sum of squares of `labels` around their centroids.
pub fn wcss(x: &Dataset, labels: &[usize]) -> f64 {
    let p = x.n_features();
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sums = vec![0.0; k * p];
    let mut sizes = vec![0usize; k];
    for (row, &l) in x.rows().zip(labels) {
        sizes[l] += 1;
        for j in 0..p {
            sums[l * p + j] += row[j];
        }
    }
    x.rows()
        .zip(labels)
        .map(|(row, &l)| {
            (0..p)
                .map(|j| (row[j] - sums[l * p + j] / sizes[l] as f64).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Sum of squared distances from each row to its assigned center.
pub fn cost_to_centers(x: &Dataset, centers: &[f64], labels: &[usize]) -> f64 {
    let p = x.n_features();
    x.rows()
        .zip(labels)
        .map(|(row, &l)| {
            (0..p)
                .map(|j| (row[j] - centers[l * p + j]).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Ward merge heights by exhaustive search over all cluster pairs, in merge
/// order. Only for small N.
pub fn naive_ward_heights(x: &Dataset) -> Vec<f64> {
    let p = x.n_features();
    let mut clusters: Vec<(Vec<f64>, usize)> = x.rows().map(|r| (r.to_vec(), 1)).collect();
    let mut heights = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (ci, ni) = &clusters[i];
                let (cj, nj) = &clusters[j];
                let d2: f64 = (0..p).map(|t| (ci[t] - cj[t]).powi(2)).sum();
                let delta = (*ni * *nj) as f64 / (*ni + *nj) as f64 * d2;
                if delta < best.0 {
                    best = (delta, i, j);
                }
            }
        }
        let (delta, i, j) = best;
        let (cj, nj) = clusters.remove(j);
        let (ci, ni) = &mut clusters[i];
        let total = (*ni + nj) as f64;
        for t in 0..p {
            ci[t] = (ci[t] * *ni as f64 + cj[t] * nj as f64) / total;
        }
        *ni += nj;
        heights.push(delta);
    }
    heights
}
