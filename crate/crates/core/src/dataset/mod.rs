//! Numeric datasets: CSV ingestion, per-column standardization and
//! synthetic fixtures.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StadionError};
use crate::partitions::Partition;

pub mod synth;

pub use synth::{gen_synthetic, GeneratorSpec};

/// Per-column statistics recorded by [`Dataset::standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Columns whose raw variance was zero. These are mapped to all-zeros.
    pub zero_variance: Vec<bool>,
}

impl ColumnScaling {
    pub fn has_zero_variance(&self) -> bool {
        self.zero_variance.iter().any(|&z| z)
    }
}

/// Coordinate system of a dataset's values.
///
/// Row subsets and perturbed copies of a standardized dataset keep the
/// `Standardized` tag: they live in the parent's coordinates even though
/// their own column moments are no longer exactly 0 and 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Scaling {
    Raw,
    Standardized(ColumnScaling),
}

/// Dense row-major N×p matrix of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n_samples: usize,
    n_features: usize,
    scaling: Scaling,
}

impl Dataset {
    pub fn from_flat(n_samples: usize, n_features: usize, values: Vec<f64>) -> Result<Self> {
        if n_samples == 0 || n_features == 0 {
            return Err(StadionError::InvalidDataset(format!(
                "shape {n_samples}x{n_features} must be at least 1x1"
            )));
        }
        if values.len() != n_samples * n_features {
            return Err(StadionError::InvalidDataset(format!(
                "{} values cannot fill a {n_samples}x{n_features} matrix",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(StadionError::InvalidDataset(format!(
                "non-finite value at row {}, column {}",
                pos / n_features,
                pos % n_features
            )));
        }
        Ok(Self {
            values,
            n_samples,
            n_features,
            scaling: Scaling::Raw,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n * p);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != p {
                return Err(StadionError::Ragged {
                    row: i + 1,
                    expected: p,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::from_flat(n, p, values)
    }

    #[inline]
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn scaling(&self) -> &Scaling {
        &self.scaling
    }

    pub fn is_standardized(&self) -> bool {
        matches!(self.scaling, Scaling::Standardized(_))
    }

    /// Rows at `indices` (repetitions allowed), in the given order, sharing
    /// this dataset's coordinate system.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let p = self.n_features;
        let mut values = Vec::with_capacity(indices.len() * p);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            values,
            n_samples: indices.len(),
            n_features: p,
            scaling: self.scaling.clone(),
        }
    }

    /// Same shape and coordinate system with new values. Used for perturbed copies.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Dataset {
        debug_assert_eq!(values.len(), self.values.len());
        Dataset {
            values,
            n_samples: self.n_samples,
            n_features: self.n_features,
            scaling: self.scaling.clone(),
        }
    }

    /// Z-scores every column with the unbiased (N−1) standard deviation.
    ///
    /// Zero-variance columns (and every column when N = 1) become all-zeros
    /// and are flagged in the returned [`ColumnScaling`].
    pub fn standardize(&self) -> Result<Dataset> {
        if self.is_standardized() {
            return Err(StadionError::AlreadyStandardized);
        }
        let n = self.n_samples;
        let p = self.n_features;
        let mut means = vec![0.0; p];
        let mut stds = vec![0.0; p];
        let mut zero_variance = vec![false; p];
        for j in 0..p {
            let mean = self.rows().map(|r| r[j]).sum::<f64>() / n as f64;
            let ss: f64 = self.rows().map(|r| (r[j] - mean).powi(2)).sum();
            let std = if n > 1 {
                (ss / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            means[j] = mean;
            stds[j] = std;
            // A column of identical values can leave round-off residue; treat
            // anything below this relative level as constant.
            zero_variance[j] = std <= 1e-14 * mean.abs().max(1.0);
        }
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(p) {
            for j in 0..p {
                row[j] = if zero_variance[j] {
                    0.0
                } else {
                    (row[j] - means[j]) / stds[j]
                };
            }
        }
        if zero_variance.iter().any(|&z| z) {
            log::warn!("zero-variance columns mapped to zero: {zero_variance:?}");
        }
        Ok(Dataset {
            values,
            n_samples: n,
            n_features: p,
            scaling: Scaling::Standardized(ColumnScaling {
                means,
                stds,
                zero_variance,
            }),
        })
    }

    /// Maps standardized values back to raw units. Zero-variance columns
    /// return to their constant.
    pub fn unstandardize(&self) -> Result<Dataset> {
        let Scaling::Standardized(s) = &self.scaling else {
            return Err(StadionError::InvalidDataset(
                "dataset is not standardized".into(),
            ));
        };
        let p = self.n_features;
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(p) {
            for j in 0..p {
                row[j] = if s.zero_variance[j] {
                    s.means[j]
                } else {
                    row[j] * s.stds[j] + s.means[j]
                };
            }
        }
        Ok(Dataset {
            values,
            n_samples: self.n_samples,
            n_features: p,
            scaling: Scaling::Raw,
        })
    }

    /// The values (and optionally a trailing label column) as CSV without a
    /// header, using shortest round-trip float formatting.
    pub fn to_csv(&self, labels: Option<&Partition>) -> Result<String> {
        if let Some(l) = labels {
            if l.len() != self.n_samples {
                return Err(StadionError::LengthMismatch {
                    left: self.n_samples,
                    right: l.len(),
                });
            }
        }
        let mut out = String::with_capacity(self.values.len() * 20);
        for (i, row) in self.rows().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{v:?}"));
            }
            if let Some(l) = labels {
                out.push(',');
                out.push_str(&l.labels()[i].to_string());
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Writes [`Dataset::to_csv`] atomically.
    pub fn write_csv(&self, path: &Path, labels: Option<&Partition>) -> Result<()> {
        crate::report::write_atomic(path, self.to_csv(labels)?.as_bytes())
    }
}

/// A dataset with its ground-truth partition.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: Dataset,
    pub labels: Partition,
}

impl LabeledDataset {
    pub fn new(data: Dataset, labels: Partition) -> Result<Self> {
        if labels.len() != data.n_samples() {
            return Err(StadionError::LengthMismatch {
                left: data.n_samples(),
                right: labels.len(),
            });
        }
        Ok(Self { data, labels })
    }

    /// Number of ground-truth classes.
    pub fn n_classes(&self) -> usize {
        self.labels.k()
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Zero-based index of the ground-truth label column.
    pub label_column: Option<usize>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: false,
            label_column: None,
        }
    }
}

/// Result of [`load_csv`]: raw values plus labels when a label column was given.
#[derive(Debug, Clone)]
pub struct CsvData {
    pub data: Dataset,
    pub labels: Option<Partition>,
}

impl CsvData {
    pub fn into_labeled(self) -> Option<LabeledDataset> {
        let data = self.data;
        self.labels.map(|labels| LabeledDataset { data, labels })
    }
}

/// Reads a delimited text file. Rows are reported 1-based by line number.
/// Labels are re-encoded to `0..K⋆` in order of first appearance.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<CsvData> {
    let text = fs::read(path).map_err(|e| StadionError::io(path, e))?;
    parse_csv(&text, options)
}

pub fn parse_csv(bytes: &[u8], options: &CsvOptions) -> Result<CsvData> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut width: Option<usize> = None;
    let mut values = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut n = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| StadionError::Csv {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(n + 1, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(StadionError::Ragged {
                row,
                expected,
                found: record.len(),
            });
        }
        if let Some(lc) = options.label_column {
            if lc >= expected {
                return Err(StadionError::LabelColumnOutOfRange {
                    index: lc,
                    columns: expected,
                });
            }
        }
        for (column, field) in record.iter().enumerate() {
            if Some(column) == options.label_column {
                raw_labels.push(field.to_string());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| StadionError::Parse {
                row,
                column: column + 1,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(StadionError::Parse {
                    row,
                    column: column + 1,
                    value: field.to_string(),
                });
            }
            values.push(v);
        }
        n += 1;
    }
    let Some(width) = width else {
        return Err(StadionError::Empty);
    };
    let p = width - usize::from(options.label_column.is_some());
    if p == 0 {
        return Err(StadionError::InvalidDataset(
            "no feature columns besides the label column".into(),
        ));
    }
    let data = Dataset::from_flat(n, p, values)?;
    let labels = options
        .label_column
        .map(|_| encode_labels(&raw_labels))
        .transpose()?;
    Ok(CsvData { data, labels })
}

fn encode_labels(raw: &[String]) -> Result<Partition> {
    let mut codes: HashMap<&str, usize> = HashMap::new();
    let labels: Vec<usize> = raw
        .iter()
        .map(|s| {
            let next = codes.len();
            *codes.entry(s.as_str()).or_insert(next)
        })
        .collect();
    Partition::from_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, label_column: Option<usize>) -> Result<CsvData> {
        parse_csv(
            text.as_bytes(),
            &CsvOptions {
                label_column,
                ..Default::default()
            },
        )
    }

    #[test]
    fn parses_plain_matrix() {
        let d = parse("1,2\n3,4\n5,6", None).unwrap();
        assert_eq!(d.data.n_samples(), 3);
        assert_eq!(d.data.n_features(), 2);
        assert_eq!(d.data.row(2), &[5.0, 6.0]);
        assert!(d.labels.is_none());
    }

    #[test]
    fn splits_label_column() {
        let d = parse("1,2\n3,4\n5,6", Some(1)).unwrap();
        assert_eq!(d.data.n_features(), 1);
        assert_eq!(d.labels.unwrap().labels(), &[0, 1, 2]);
    }

    #[test]
    fn labels_encoded_by_first_appearance() {
        let d = parse("1,b\n2,a\n3,b\n4,c", Some(1)).unwrap();
        let l = d.labels.unwrap();
        assert_eq!(l.labels(), &[0, 1, 0, 2]);
        assert_eq!(l.k(), 3);
    }

    #[test]
    fn malformed_row_is_named() {
        match parse("a,b", None) {
            Err(StadionError::Parse { row, column, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(column, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse("1,2\n3,x", None) {
            Err(StadionError::Parse { row, column, .. }) => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_and_empty_inputs() {
        assert!(matches!(
            parse("1,2\n3", None),
            Err(StadionError::Ragged {
                row: 2,
                expected: 2,
                found: 1
            })
        ));
        assert!(matches!(parse("", None), Err(StadionError::Empty)));
        assert!(matches!(
            parse("1,2", Some(2)),
            Err(StadionError::LabelColumnOutOfRange {
                index: 2,
                columns: 2
            })
        ));
    }

    #[test]
    fn header_and_delimiter() {
        let d = parse_csv(
            b"x;y\n1;2\n3;4\n",
            &CsvOptions {
                delimiter: b';',
                has_header: true,
                label_column: None,
            },
        )
        .unwrap();
        assert_eq!(d.data.values(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn standardize_unit_column() {
        let d = Dataset::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let s = d.standardize().unwrap();
        assert_eq!(s.column(0), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_column_is_zeroed_and_flagged() {
        let d = Dataset::from_rows(&[[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]).unwrap();
        let s = d.standardize().unwrap();
        assert_eq!(s.column(0), vec![0.0, 0.0, 0.0]);
        let Scaling::Standardized(cs) = s.scaling() else {
            panic!()
        };
        assert_eq!(cs.zero_variance, vec![true, false]);
        assert!(cs.has_zero_variance());
    }

    #[test]
    fn double_standardization_rejected() {
        let d = Dataset::from_rows(&[[1.0], [2.0]]).unwrap();
        let s = d.standardize().unwrap();
        assert!(matches!(
            s.standardize(),
            Err(StadionError::AlreadyStandardized)
        ));
    }

    #[test]
    fn unstandardize_inverts() {
        let d = Dataset::from_rows(&[[1.0, 7.0], [2.0, 7.0], [9.0, 7.0]]).unwrap();
        let back = d.standardize().unwrap().unstandardize().unwrap();
        for (a, b) in back.values().iter().zip(d.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Dataset::from_flat(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Dataset::from_flat(0, 2, vec![]).is_err());
    }

    #[test]
    fn subset_keeps_coordinate_system() {
        let d = Dataset::from_rows(&[[1.0], [2.0], [3.0]])
            .unwrap()
            .standardize()
            .unwrap();
        let s = d.subset(&[2, 2, 0]);
        assert_eq!(s.n_samples(), 3);
        assert_eq!(s.column(0), vec![1.0, 1.0, -1.0]);
        assert!(s.is_standardized());
    }
}
