//! Pair-counting and information-theoretic partition comparison.
//!
//! All logarithms are natural, so MI, VI and ID are in nats. `0 · log 0 = 0`.
//!
//! Degenerate conventions:
//! * both partitions have a single non-empty cluster: ratio-normalized
//!   similarities return 1 and normalized distances 0;
//! * ARI (both variants) with a zero denominator returns 1 when the two
//!   partitions group the samples identically, else 0. Two all-singleton
//!   partitions therefore score 1;
//! * FM and Jaccard with no co-clustered pairs on either side return 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::contingency::{choose2, contingency, pair_counts, ContingencyTable};
use super::Partition;
use crate::error::{Result, StadionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureId {
    RI,
    ARI1,
    ARI2,
    FM,
    JACC,
    MI,
    AMI,
    VI,
    NVI,
    ID,
    NID,
    NMI1,
    NMI2,
    NMI3,
    NMI4,
    NMI5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Similarity,
    Dissimilarity,
}

impl MeasureId {
    pub const ALL: [MeasureId; 16] = [
        MeasureId::RI,
        MeasureId::ARI1,
        MeasureId::ARI2,
        MeasureId::FM,
        MeasureId::JACC,
        MeasureId::MI,
        MeasureId::AMI,
        MeasureId::VI,
        MeasureId::NVI,
        MeasureId::ID,
        MeasureId::NID,
        MeasureId::NMI1,
        MeasureId::NMI2,
        MeasureId::NMI3,
        MeasureId::NMI4,
        MeasureId::NMI5,
    ];

    pub fn orientation(self) -> Orientation {
        match self {
            MeasureId::VI | MeasureId::NVI | MeasureId::ID | MeasureId::NID => {
                Orientation::Dissimilarity
            }
            _ => Orientation::Similarity,
        }
    }

    pub fn is_pair_counting(self) -> bool {
        matches!(
            self,
            MeasureId::RI | MeasureId::ARI1 | MeasureId::ARI2 | MeasureId::FM | MeasureId::JACC
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::RI => "RI",
            MeasureId::ARI1 => "ARI1",
            MeasureId::ARI2 => "ARI2",
            MeasureId::FM => "FM",
            MeasureId::JACC => "JACC",
            MeasureId::MI => "MI",
            MeasureId::AMI => "AMI",
            MeasureId::VI => "VI",
            MeasureId::NVI => "NVI",
            MeasureId::ID => "ID",
            MeasureId::NID => "NID",
            MeasureId::NMI1 => "NMI1",
            MeasureId::NMI2 => "NMI2",
            MeasureId::NMI3 => "NMI3",
            MeasureId::NMI4 => "NMI4",
            MeasureId::NMI5 => "NMI5",
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureId {
    type Err = StadionError;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        let alias = match upper.as_str() {
            "ARI" => "ARI1",
            "NMI" => "NMI4",
            "JACCARD" => "JACC",
            other => other,
        };
        MeasureId::ALL
            .into_iter()
            .find(|m| m.name() == alias)
            .ok_or_else(|| StadionError::InvalidParams(format!("unknown measure {s:?}")))
    }
}

/// Scores the agreement of two index-aligned partitions.
pub fn compare(m: MeasureId, a: &Partition, b: &Partition) -> Result<f64> {
    let t = contingency(a, b)?;
    Ok(compare_table(m, &t))
}

pub fn compare_table(m: MeasureId, t: &ContingencyTable) -> f64 {
    if m.is_pair_counting() {
        pair_measure(m, t)
    } else {
        info_measure(m, t)
    }
}

fn pair_measure(m: MeasureId, t: &ContingencyTable) -> f64 {
    if t.total() < 2 {
        // No pairs at all: the two partitions are trivially identical.
        return 1.0;
    }
    let pc = pair_counts(t);
    let (n11, n00, n10, n01) = (
        pc.n11 as i128,
        pc.n00 as i128,
        pc.n10 as i128,
        pc.n01 as i128,
    );
    let pairs = choose2(t.total()) as i128;
    match m {
        MeasureId::RI => (n00 + n11) as f64 / pairs as f64,
        MeasureId::ARI1 => {
            let num = 2 * (n00 * n11 - n01 * n10);
            let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
            if den == 0 {
                matching_convention(t)
            } else {
                num as f64 / den as f64
            }
        }
        MeasureId::ARI2 => ari_morey_agresti(t),
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
        _ => unreachable!("not a pair-counting measure"),
    }
}

fn matching_convention(t: &ContingencyTable) -> f64 {
    if t.is_matching() {
        1.0
    } else {
        0.0
    }
}

/// Adjusted Rand index with the Morey–Agresti (1984) expectation
/// `E[Σ N_kk'²] ≈ Σ a_k² · Σ b_k'² / N²`:
///
/// `(Σ N_kk'² − Σa²Σb²/N²) / (½(Σa² + Σb²) − Σa²Σb²/N²)`.
fn ari_morey_agresti(t: &ContingencyTable) -> f64 {
    let sq = |v: &[u64]| v.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>();
    let cells = sq(t.counts());
    let a2 = sq(t.row_sums());
    let b2 = sq(t.col_sums());
    let n = t.total() as f64;
    let expected = a2 * b2 / (n * n);
    let den = 0.5 * (a2 + b2) - expected;
    if den.abs() <= 1e-12 * (a2 + b2) {
        matching_convention(t)
    } else {
        (cells - expected) / den
    }
}

/// Entropy (nats) of the distribution given by `counts / total`, summed over
/// counts in ascending order so equal multisets give bit-identical results.
fn entropy(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    let mut c: Vec<u64> = counts.filter(|&v| v > 0).collect();
    c.sort_unstable();
    let n = total as f64;
    // −Σ p ln p is exactly 0 for a single non-empty cluster.
    c.iter()
        .map(|&v| {
            let p = v as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0)
}

struct InfoTerms {
    ha: f64,
    hb: f64,
    joint: f64,
    mi: f64,
}

fn info_terms(t: &ContingencyTable) -> InfoTerms {
    let n = t.total();
    let ha = entropy(t.row_sums().iter().copied(), n);
    let hb = entropy(t.col_sums().iter().copied(), n);
    let joint = entropy(t.counts().iter().copied(), n);
    let mi = (ha + hb - joint).clamp(0.0, ha.min(hb));
    InfoTerms { ha, hb, joint, mi }
}

fn info_measure(m: MeasureId, t: &ContingencyTable) -> f64 {
    let InfoTerms { ha, hb, joint, mi } = info_terms(t);
    let hmax = ha.max(hb);
    let hmin = ha.min(hb);
    let ratio = |num: f64, den: f64| {
        if den > 0.0 {
            (num / den).clamp(0.0, 1.0)
        } else if hmax > 0.0 {
            // One side is trivial, so nothing is shared.
            0.0
        } else {
            1.0
        }
    };
    match m {
        MeasureId::MI => mi,
        MeasureId::NMI1 => ratio(mi, hmax),
        MeasureId::NMI2 => ratio(mi, hmin),
        MeasureId::NMI3 => ratio(mi, (ha * hb).sqrt()),
        MeasureId::NMI4 => ratio(2.0 * mi, ha + hb),
        MeasureId::NMI5 => ratio(mi, joint),
        MeasureId::VI => (joint - mi).max(0.0),
        MeasureId::NVI => 1.0 - ratio(mi, joint),
        MeasureId::ID => (hmax - mi).max(0.0),
        MeasureId::NID => 1.0 - ratio(mi, hmax),
        MeasureId::AMI => {
            if hmax == 0.0 {
                return 1.0;
            }
            let emi = expected_mutual_information(t);
            let den = hmax - emi;
            if den.abs() <= 1e-12 * hmax.max(1.0) {
                matching_convention(t)
            } else {
                (mi - emi) / den
            }
        }
        _ => unreachable!("not an information measure"),
    }
}

/// Expected mutual information (nats) of two partitions with the table's
/// margins under the hypergeometric (permutation) model.
///
/// Exact summation over every cell's support `max(1, a+b−N) ..= min(a, b)`,
/// with the hypergeometric weight evaluated in log space.
pub fn expected_mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.total() as usize;
    let log_fact = log_factorials(n);
    let nf = n as f64;
    // Each (a, b) term is symmetric in a and b; summing over the sorted
    // multiset of (min, max) pairs makes the result symmetric bit for bit.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for &a in t.row_sums().iter().filter(|&&a| a > 0) {
        for &b in t.col_sums().iter().filter(|&&b| b > 0) {
            let (a, b) = (a as usize, b as usize);
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs.sort_unstable();
    let mut emi = 0.0;
    for (a, b) in pairs {
        let lo = (a + b).saturating_sub(n).max(1);
        let hi = a.min(b);
        let fixed = log_fact[a] + log_fact[b] + log_fact[n - a] + log_fact[n - b] - log_fact[n];
        for nij in lo..=hi {
            let x = nij as f64;
            let log_p = fixed
                - log_fact[nij]
                - log_fact[a - nij]
                - log_fact[b - nij]
                - log_fact[n + nij - a - b];
            emi += (x / nf) * (nf * x / (a as f64 * b as f64)).ln() * log_p.exp();
        }
    }
    emi
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(labels: &[usize]) -> Partition {
        Partition::from_labels(labels.to_vec()).unwrap()
    }

    #[test]
    fn ari_worked_examples() {
        let x = p(&[0, 0, 1, 1, 2, 2, 2]);
        assert_eq!(compare(MeasureId::ARI1, &x, &x).unwrap(), 1.0);
        // Pairs: n11 = 0, n10 = 2, n01 = 2, n00 = 2 → 2(0 − 4) / (4·2 + 4·2).
        let v = compare(MeasureId::ARI1, &p(&[0, 0, 1, 1]), &p(&[0, 1, 0, 1])).unwrap();
        assert_eq!(v, -0.5);
        let ri = compare(MeasureId::RI, &p(&[0, 0, 1, 1]), &p(&[0, 1, 0, 1])).unwrap();
        assert!((ri - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ari_relabel_invariant() {
        let a = p(&[0, 0, 1, 1, 2, 2, 0]);
        let b = p(&[1, 1, 0, 2, 2, 0, 0]);
        let b_relabel = p(&[2, 2, 1, 0, 0, 1, 1]);
        assert_eq!(
            compare(MeasureId::ARI1, &a, &b).unwrap(),
            compare(MeasureId::ARI1, &a, &b_relabel).unwrap()
        );
    }

    #[test]
    fn degenerate_conventions() {
        let one = p(&[0, 0, 0, 0]);
        let singles = p(&[0, 1, 2, 3]);
        for m in MeasureId::ALL {
            let v = compare(m, &one, &one).unwrap();
            let expected = match m {
                MeasureId::MI | MeasureId::VI | MeasureId::NVI | MeasureId::ID | MeasureId::NID => {
                    0.0
                }
                _ => 1.0,
            };
            assert_eq!(v, expected, "{m} on two trivial partitions");
        }
        assert_eq!(compare(MeasureId::ARI1, &singles, &singles).unwrap(), 1.0);
        assert_eq!(compare(MeasureId::ARI2, &singles, &singles).unwrap(), 1.0);
        assert_eq!(compare(MeasureId::FM, &singles, &singles).unwrap(), 0.0);
        assert_eq!(compare(MeasureId::JACC, &singles, &singles).unwrap(), 0.0);
        assert_eq!(compare(MeasureId::ARI1, &one, &singles).unwrap(), 0.0);
        assert_eq!(compare(MeasureId::NMI2, &one, &singles).unwrap(), 0.0);
        assert_eq!(compare(MeasureId::AMI, &one, &singles).unwrap(), 0.0);
        // N = 1: nothing to disagree on.
        assert_eq!(compare(MeasureId::RI, &p(&[0]), &p(&[0])).unwrap(), 1.0);
    }

    #[test]
    fn self_comparison() {
        let x = p(&[0, 1, 1, 2, 0, 2, 2, 3]);
        let y = p(&[3, 0, 0, 1, 3, 1, 1, 2]);
        for m in MeasureId::ALL {
            let v = compare(m, &x, &y).unwrap();
            match m {
                MeasureId::VI | MeasureId::NVI | MeasureId::ID | MeasureId::NID => {
                    assert_eq!(v, 0.0, "{m}")
                }
                MeasureId::MI => assert!(v > 0.0),
                _ => assert!((v - 1.0).abs() < 1e-12, "{m}: {v}"),
            }
        }
    }

    #[test]
    fn measure_names_round_trip() {
        for m in MeasureId::ALL {
            assert_eq!(m.name().parse::<MeasureId>().unwrap(), m);
        }
        assert_eq!("ari".parse::<MeasureId>().unwrap(), MeasureId::ARI1);
        assert!("xyz".parse::<MeasureId>().is_err());
        assert_eq!(MeasureId::VI.orientation(), Orientation::Dissimilarity);
        assert_eq!(MeasureId::NMI2.orientation(), Orientation::Similarity);
    }

    #[test]
    fn emi_trivial_and_small() {
        let t = ContingencyTable::from_counts(1, 1, vec![5]).unwrap();
        assert_eq!(expected_mutual_information(&t), 0.0);
        // 2×2 margins (2,2) with N = 4: the cell count is hypergeometric on
        // {0, 1, 2} with probabilities 1/6, 4/6, 1/6. MI is 0 at the centre
        // and ln 2 at the two extremes, so E[MI] = ln 2 / 3.
        let t = ContingencyTable::from_counts(2, 2, vec![2, 0, 0, 2]).unwrap();
        let emi = expected_mutual_information(&t);
        assert!((emi - 2f64.ln() / 3.0).abs() < 1e-14, "{emi}");
    }

    #[test]
    fn ari2_close_to_ari1_for_large_samples() {
        let a: Vec<usize> = (0..2000).map(|i| i % 3).collect();
        let b: Vec<usize> = (0..2000)
            .map(|i| if i % 7 == 0 { (i + 1) % 3 } else { i % 3 })
            .collect();
        let (a, b) = (p(&a), p(&b));
        let v1 = compare(MeasureId::ARI1, &a, &b).unwrap();
        let v2 = compare(MeasureId::ARI2, &a, &b).unwrap();
        assert!((v1 - v2).abs() < 1e-3, "{v1} vs {v2}");
    }
}
