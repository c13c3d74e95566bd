//! Experiment configuration, read from TOML.
//!
//! ```toml
//! output_dir = "results"
//! models = ["RF", "RST-B", "RST-R", "RST-BB", "RST-RB"]
//! seeds = [0, 1, 2, 3, 4]
//!
//! [rst]
//! n_estimators = 100
//! o_min = 3
//! o_max = 9
//! k_min = 11
//! k_max = 50
//!
//! [[datasets]]
//! kind = "ucr"
//! name = "ItalyPowerDemand"
//! root = "/data/UCRArchive_2018"
//!
//! [[datasets]]
//! kind = "synthetic"
//! n_per_class = 50
//! length = 64
//! noise_sd = 0.3
//! ```

use std::path::{Path, PathBuf};

use rst_core::dataset::{load_ucr_pair, synth_dataset};
use rst_core::{Dataset, RfConfig, RstConfig, Split};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::model::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic {
        #[serde(default = "default_synth_name")]
        name: String,
        n_per_class: usize,
        length: usize,
        noise_sd: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Archive layout `<root>/<name>/<name>_TRAIN.tsv`, or explicit file paths.
    Ucr {
        name: String,
        root: Option<PathBuf>,
        train: Option<PathBuf>,
        test: Option<PathBuf>,
    },
}

fn default_synth_name() -> String {
    "synthetic".into()
}

impl DatasetSpec {
    pub fn name(&self) -> &str {
        match self {
            DatasetSpec::Synthetic { name, .. } | DatasetSpec::Ucr { name, .. } => name,
        }
    }

    /// Train and test splits.
    pub fn load(&self) -> Result<(Dataset, Dataset)> {
        match self {
            DatasetSpec::Synthetic {
                name,
                n_per_class,
                length,
                noise_sd,
                seed,
            } => {
                let (train, test) = synth_dataset(*n_per_class, *length, *noise_sd, *seed)?;
                Ok((rename(train, name)?, rename(test, name)?))
            }
            DatasetSpec::Ucr {
                name,
                root,
                train,
                test,
            } => {
                let (train, test) = ucr_paths(name, root.as_deref(), train.as_deref(), test.as_deref())?;
                let (a, b) = load_ucr_pair(train, test)?;
                Ok((rename(a, name)?, rename(b, name)?))
            }
        }
    }
}

fn ucr_paths(name: &str, root: Option<&Path>, train: Option<&Path>, test: Option<&Path>) -> Result<(PathBuf, PathBuf)> {
    match (root, train, test) {
        (_, Some(tr), Some(te)) => Ok((tr.to_path_buf(), te.to_path_buf())),
        (Some(root), None, None) => Ok((
            root.join(name).join(format!("{name}_TRAIN.tsv")),
            root.join(name).join(format!("{name}_TEST.tsv")),
        )),
        _ => Err(BenchError::Config(format!(
            "dataset {name:?}: give either `root` or both `train` and `test`"
        ))),
    }
}

fn rename(ds: Dataset, name: &str) -> Result<Dataset> {
    if ds.name() == name {
        return Ok(ds);
    }
    let split: Split = ds.split();
    let labels = ds.labels().to_vec();
    let map = ds.label_map().to_vec();
    Ok(Dataset::from_class_ids(name, split, ds.series().to_vec(), labels, map)?)
}

/// Which split the diversity report walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitChoice {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSpec>,
    pub models: Vec<Model>,
    pub seeds: Vec<u64>,
    /// Ensemble sizes evaluated by `sweep`, ascending.
    pub sweep_grid: Vec<usize>,
    /// Ensemble sizes timed by `time`, ascending.
    pub timing_sizes: Vec<usize>,
    pub timing_repeats: usize,
    /// Worker threads for fits during timing; 1 gives single-thread times.
    pub timing_workers: usize,
    pub output_dir: PathBuf,
    pub grid_size: usize,
    pub diversity_split: SplitChoice,
    /// Adds diversity means to every RST run record.
    pub record_diversity: bool,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub rst: RstConfig,
    pub rf: RfConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: vec![DatasetSpec::Synthetic {
                name: default_synth_name(),
                n_per_class: 50,
                length: 64,
                noise_sd: 0.3,
                seed: 0,
            }],
            models: Model::ALL.to_vec(),
            seeds: vec![0],
            sweep_grid: vec![5, 10, 25, 50, 100, 200, 500],
            timing_sizes: vec![50, 100, 200],
            timing_repeats: 3,
            timing_workers: 1,
            output_dir: PathBuf::from("results"),
            grid_size: rst_core::diversity::DEFAULT_GRID_SIZE,
            diversity_split: SplitChoice::Train,
            record_diversity: false,
            workers: 0,
            rst: RstConfig::default(),
            rf: RfConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(BenchError::io(path))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.datasets.is_empty() {
            return fail("no datasets");
        }
        if self.models.is_empty() {
            return fail("model list is empty");
        }
        if self.seeds.is_empty() {
            return fail("seed list is empty");
        }
        for (name, grid) in [("sweep_grid", &self.sweep_grid), ("timing_sizes", &self.timing_sizes)] {
            if grid.is_empty() || grid.contains(&0) || grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(BenchError::Config(format!(
                    "{name} must be nonempty, positive and strictly increasing"
                )));
            }
        }
        if self.timing_repeats == 0 {
            return fail("timing_repeats must be >= 1");
        }
        if self.timing_workers == 0 {
            return fail("timing_workers must be >= 1");
        }
        if self.grid_size < 2 {
            return fail("grid_size must be >= 2");
        }
        self.rst.validate()?;
        if self.rf.n_estimators == 0 {
            return fail("rf.n_estimators must be >= 1");
        }
        Ok(())
    }
}
