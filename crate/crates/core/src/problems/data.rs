use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Row-major feature matrix plus one label per row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub n: usize,
    pub d: usize,
    pub features: Vec<f64>,
    pub labels: Vec<f64>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(n: usize, d: usize, features: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.len() != n * d || labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: features.len(),
            });
        }
        if let Some(index) = features.iter().chain(&labels).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "dataset entry",
                index,
            });
        }
        let feature_names = (1..=d).map(|k| format!("x{k}")).collect();
        Ok(Self {
            n,
            d,
            features,
            labels,
            feature_names,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    /// Split off the last `fraction` of rows (at least one row on each side).
    pub fn split(&self, fraction: f64) -> Result<(Dataset, Dataset)> {
        let held = ((self.n as f64 * fraction).round() as usize).clamp(1, self.n.saturating_sub(1));
        if self.n < 2 {
            return Err(Error::EmptyDataset);
        }
        let cut = self.n - held;
        let mut train = Dataset::new(
            cut,
            self.d,
            self.features[..cut * self.d].to_vec(),
            self.labels[..cut].to_vec(),
        )?;
        let mut test = Dataset::new(
            held,
            self.d,
            self.features[cut * self.d..].to_vec(),
            self.labels[cut..].to_vec(),
        )?;
        train.feature_names = self.feature_names.clone();
        test.feature_names = self.feature_names.clone();
        Ok((train, test))
    }
}

/// Two Gaussian blobs centred at `±(separation/2) u`, `u = (1, ..., 1)/sqrt(d)`;
/// labels are fair coin flips in `{0, 1}`.
pub fn generate_synthetic_classification(
    n: usize,
    d: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::EmptyDataset);
    }
    if !separation.is_finite() {
        return Err(Error::InvalidConfig("separation must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = 0.5 * separation / (d as f64).sqrt();
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let positive: bool = rng.random_bool(0.5);
        let sign = if positive { 1.0 } else { -1.0 };
        for _ in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(z + sign * shift);
        }
        labels.push(if positive { 1.0 } else { 0.0 });
    }
    Dataset::new(n, d, features, labels)
}

/// Read a numeric CSV with a header row. Error coordinates are 1-based,
/// rows counted over data lines (the header is not row 1).
pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column)
}

pub(crate) fn read_csv<R: std::io::Read>(reader: R, label_column: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.trim().to_string())
        .collect();
    let d = feature_names.len();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(Error::CsvParse {
                row,
                column: record.len().min(headers.len()) + 1,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (c, cell) in record.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| Error::CsvParse {
                row,
                column: c + 1,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(Error::CsvParse {
                    row,
                    column: c + 1,
                    message: format!("non-finite cell {cell:?}"),
                });
            }
            if c == label_idx {
                labels.push(value);
            } else {
                features.push(value);
            }
        }
    }
    let n = labels.len();
    if d == 0 {
        return Err(Error::InvalidConfig("csv has no feature columns".into()));
    }
    let mut ds = Dataset::new(n, d, features, labels)?;
    ds.feature_names = feature_names;
    Ok(ds)
}

/// Write features then a trailing `label` column.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = dataset.feature_names.clone();
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..dataset.n {
        let mut rec: Vec<String> = dataset.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(dataset.labels[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let a = generate_synthetic_classification(10, 2, 5.0, 7).unwrap();
        let b = generate_synthetic_classification(10, 2, 5.0, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_classification(10, 2, 5.0, 8).unwrap();
        assert_ne!(a, c);
        assert!(a.labels.iter().all(|y| *y == 0.0 || *y == 1.0));
    }

    #[test]
    fn separation_moves_class_means_apart() {
        let ds = generate_synthetic_classification(4000, 3, 4.0, 1).unwrap();
        let mut sums = [0.0; 2];
        let mut counts = [0usize; 2];
        for i in 0..ds.n {
            let c = ds.labels[i] as usize;
            sums[c] += ds.row(i).iter().sum::<f64>();
            counts[c] += 1;
        }
        // mean of coordinate sum is ±(sep/2) sqrt(d)
        let gap = sums[1] / counts[1] as f64 - sums[0] / counts[0] as f64;
        assert!((gap - 4.0 * 3f64.sqrt()).abs() < 0.3, "gap {gap}");
    }

    #[test]
    fn parses_small_csv() {
        let text = "a,b,label\n1.0,2.0,1\n3,4.5,0\n";
        let ds = read_csv(text.as_bytes(), "label").unwrap();
        assert_eq!((ds.n, ds.d), (2, 2));
        assert_eq!(ds.features, vec![1.0, 2.0, 3.0, 4.5]);
        assert_eq!(ds.labels, vec![1.0, 0.0]);
        assert_eq!(ds.feature_names, vec!["a", "b"]);
    }

    #[test]
    fn label_column_may_be_anywhere() {
        let text = "y,a\n0,1.5\n1,2.5\n";
        let ds = read_csv(text.as_bytes(), "y").unwrap();
        assert_eq!(ds.features, vec![1.5, 2.5]);
        assert_eq!(ds.labels, vec![0.0, 1.0]);
    }

    #[test]
    fn non_numeric_cell_reports_location() {
        let text = "a,b,label\n1,2,0\n3,4,1\n5,abc,0\n";
        match read_csv(text.as_bytes(), "label") {
            Err(Error::CsvParse { row, column, .. }) => assert_eq!((row, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_label_and_empty_file() {
        assert!(matches!(
            read_csv("a,b\n1,2\n".as_bytes(), "label"),
            Err(Error::MissingLabelColumn(_))
        ));
        assert!(matches!(
            read_csv("a,label\n".as_bytes(), "label"),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn csv_round_trip() {
        let ds = generate_synthetic_classification(25, 3, 2.0, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_csv(&ds, &path).unwrap();
        assert_eq!(load_csv(&path, "label").unwrap(), ds);
    }
}
