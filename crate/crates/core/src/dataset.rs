//! Fixed-length labelled time series.
//!
//! The on-disk format is the UCR archive text layout: one series per line,
//! the class label first and then the `P` values, separated by tabs or
//! commas. Blank lines are ignored. Labels are numeric and get remapped to
//! contiguous class ids `1..=Z` in ascending order of their original value.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bspline::sample_grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    split: Split,
    series: Vec<Vec<f64>>,
    labels: Vec<usize>,
    /// `label_map[z - 1]` is the original label of class id `z`.
    label_map: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    pub split: Split,
    pub n_series: usize,
    pub series_length: usize,
    pub n_classes: usize,
    pub class_counts: Vec<usize>,
    pub single_class: bool,
}

impl Dataset {
    /// Builds a dataset from raw labels, deriving the class-id map from them.
    pub fn from_original_labels(
        name: impl Into<String>,
        split: Split,
        series: Vec<Vec<f64>>,
        original: &[f64],
    ) -> Result<Self> {
        let map = label_map_of(original.iter().copied())?;
        Self::with_label_map(name, split, series, original, map)
    }

    /// Builds a dataset whose labels are looked up in an existing map, so a
    /// test split gets the same class ids as its train split.
    pub fn with_label_map(
        name: impl Into<String>,
        split: Split,
        series: Vec<Vec<f64>>,
        original: &[f64],
        label_map: Vec<f64>,
    ) -> Result<Self> {
        let labels = original
            .iter()
            .map(|l| {
                label_map
                    .iter()
                    .position(|m| m == l)
                    .map(|z| z + 1)
                    .ok_or_else(|| Error::InvalidDataset(format!("label {l} is not in the label map")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_class_ids(name, split, series, labels, label_map)
    }

    /// Builds a dataset from class ids already in `1..=label_map.len()`.
    pub fn from_class_ids(
        name: impl Into<String>,
        split: Split,
        series: Vec<Vec<f64>>,
        labels: Vec<usize>,
        label_map: Vec<f64>,
    ) -> Result<Self> {
        let ds = Self {
            name: name.into(),
            split,
            series,
            labels,
            label_map,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidDataset(msg));
        if self.series.is_empty() {
            return invalid("no series".into());
        }
        if self.labels.len() != self.series.len() {
            return invalid(format!("{} labels for {} series", self.labels.len(), self.series.len()));
        }
        let p = self.series[0].len();
        if p < 2 {
            return invalid(format!("series length {p} is below 2"));
        }
        for (i, s) in self.series.iter().enumerate() {
            if s.len() != p {
                return invalid(format!("series {i} has length {}, expected {p}", s.len()));
            }
            if s.iter().any(|v| !v.is_finite()) {
                return invalid(format!("series {i} has a non-finite value"));
            }
        }
        if self.label_map.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("label map must be strictly increasing".into());
        }
        let z = self.label_map.len();
        if let Some(&l) = self.labels.iter().find(|&&l| l == 0 || l > z) {
            return Err(Error::InvalidLabel { label: l, n_classes: z });
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn series(&self) -> &[Vec<f64>] {
        &self.series
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_map(&self) -> &[f64] {
        &self.label_map
    }

    pub fn n_series(&self) -> usize {
        self.series.len()
    }

    pub fn series_length(&self) -> usize {
        self.series[0].len()
    }

    pub fn n_classes(&self) -> usize {
        self.label_map.len()
    }

    pub fn original_label(&self, i: usize) -> f64 {
        self.label_map[self.labels[i] - 1]
    }

    pub fn summary(&self) -> DatasetSummary {
        let mut class_counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            class_counts[l - 1] += 1;
        }
        DatasetSummary {
            name: self.name.clone(),
            split: self.split,
            n_series: self.n_series(),
            series_length: self.series_length(),
            n_classes: self.n_classes(),
            single_class: class_counts.iter().filter(|&&c| c > 0).count() == 1,
            class_counts,
        }
    }

    /// Writes the dataset in tab-separated UCR form with original labels.
    pub fn write_ucr<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, s) in self.series.iter().enumerate() {
            write!(w, "{}", format_label(self.original_label(i)))?;
            for v in s {
                // shortest representation that parses back to the same f64
                write!(w, "\t{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save_ucr(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_ucr(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)
    }
}

fn format_label(l: f64) -> String {
    if l.fract() == 0.0 && l.abs() < 1e15 {
        format!("{}", l as i64)
    } else {
        format!("{l}")
    }
}

fn label_map_of(labels: impl Iterator<Item = f64>) -> Result<Vec<f64>> {
    let mut map: Vec<f64> = labels.collect();
    if map.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidDataset("non-finite label".into()));
    }
    map.sort_by(f64::total_cmp);
    map.dedup();
    Ok(map)
}

/// Raw records parsed from UCR text, before label remapping.
#[derive(Debug, Clone)]
pub struct UcrRecords {
    pub series: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

/// Parses UCR text. Errors name the 1-based line and field.
pub fn parse_ucr<R: BufRead>(reader: R) -> Result<UcrRecords> {
    let mut series = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: "<input>".into(),
            source,
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut values = Vec::with_capacity(width.unwrap_or(0));
        let mut label = None;
        for (field, token) in line.split(['\t', ',']).map(str::trim).enumerate() {
            let parsed: f64 = token.parse().map_err(|_| Error::Parse {
                line: line_no,
                field: field + 1,
                token: token.to_string(),
            })?;
            if !parsed.is_finite() {
                return Err(Error::NonFinite {
                    line: line_no,
                    field: field + 1,
                    token: token.to_string(),
                });
            }
            if label.is_none() {
                label = Some(parsed);
            } else {
                values.push(parsed);
            }
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::RaggedRow {
                    line: line_no,
                    expected: w,
                    found: values.len(),
                })
            }
            Some(_) => {}
        }
        labels.push(label.expect("a non-empty line has at least one field"));
        series.push(values);
    }
    Ok(UcrRecords { series, labels })
}

fn read_records(path: &Path) -> Result<UcrRecords> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_ucr(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Dataset name and split inferred from `<Name>_TRAIN.<ext>` / `<Name>_TEST.<ext>`.
fn name_and_split(path: &Path) -> (String, Split) {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let upper = stem.to_ascii_uppercase();
    if upper.ends_with("_TEST") {
        (stem[..stem.len() - 5].to_string(), Split::Test)
    } else if upper.ends_with("_TRAIN") {
        (stem[..stem.len() - 6].to_string(), Split::Train)
    } else {
        (stem, Split::Train)
    }
}

/// Loads one UCR file with its own label map.
pub fn load_ucr(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let records = read_records(path)?;
    let (name, split) = name_and_split(path);
    Dataset::from_original_labels(name, split, records.series, &records.labels)
}

/// Loads a train/test pair with a shared label map built from both files,
/// so class ids agree across the splits.
pub fn load_ucr_pair(train: impl AsRef<Path>, test: impl AsRef<Path>) -> Result<(Dataset, Dataset)> {
    let (train, test) = (train.as_ref(), test.as_ref());
    let tr = read_records(train)?;
    let te = read_records(test)?;
    let map = label_map_of(tr.labels.iter().chain(&te.labels).copied())?;
    let (name, _) = name_and_split(train);
    let train_ds = Dataset::with_label_map(name.clone(), Split::Train, tr.series, &tr.labels, map.clone())?;
    let test_ds = Dataset::with_label_map(name, Split::Test, te.series, &te.labels, map)?;
    if train_ds.series_length() != test_ds.series_length() {
        return Err(Error::InvalidDataset(format!(
            "train series length {} differs from test length {}",
            train_ds.series_length(),
            test_ds.series_length()
        )));
    }
    Ok((train_ds, test_ds))
}

/// Two-class sine dataset: class 1 is `sin(2 pi t)`, class 2 is `sin(4 pi t)`,
/// each plus i.i.d. Gaussian noise, on the grid `t_p = p / (P - 1)`.
///
/// `n_per_class` series are drawn per class; the first `ceil(n/2)` of each
/// class go to the train split and the rest to the test split. Rows
/// alternate between the classes.
pub fn synth_dataset(n_per_class: usize, length: usize, noise_sd: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_per_class < 2 {
        return Err(Error::InvalidConfig(format!(
            "n_per_class must be >= 2 so both splits are nonempty, got {n_per_class}"
        )));
    }
    if length < 8 {
        return Err(Error::InvalidConfig(format!(
            "series length must be >= 8, got {length}"
        )));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise_sd must be finite and >= 0, got {noise_sd}"
        )));
    }
    let grid = sample_grid(length)?;
    let noise = Normal::new(0.0, noise_sd).expect("validated noise level");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prototype = |class: usize, t: f64| (2.0 * std::f64::consts::PI * class as f64 * t).sin();

    // draw class 1 series then class 2 series, in index order
    let mut pools: Vec<Vec<Vec<f64>>> = Vec::with_capacity(2);
    for class in 1..=2 {
        let pool = (0..n_per_class)
            .map(|_| {
                grid.iter()
                    .map(|&t| {
                        let e = if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                        prototype(class, t) + e
                    })
                    .collect()
            })
            .collect();
        pools.push(pool);
    }

    let n_train = n_per_class.div_ceil(2);
    let build = |range: std::ops::Range<usize>, split: Split| {
        let mut series = Vec::new();
        let mut labels = Vec::new();
        for i in range {
            for (class, pool) in pools.iter().enumerate() {
                series.push(pool[i].clone());
                labels.push(class + 1);
            }
        }
        Dataset::from_class_ids("synthetic", split, series, labels, vec![1.0, 2.0])
    };
    Ok((
        build(0..n_train, Split::Train)?,
        build(n_train..n_per_class, Split::Test)?,
    ))
}
