//! Experiment drivers. Each driver walks the (dataset, model, seed) grid in
//! config order; a failure inside one cell is recorded in that cell's rows
//! and the remaining cells still run.

use std::time::Instant;

use rayon::ThreadPoolBuilder;
use rst_core::diversity::ensemble_diversity_report;
use rst_core::{Dataset, Ensemble};
use serde::Serialize;

use crate::config::{ExperimentConfig, SplitChoice};
use crate::error::{BenchError, Result};
use crate::model::Model;

/// One trained-and-evaluated cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub dataset: String,
    pub model: String,
    pub swapped_label: String,
    pub seed: u64,
    pub n_estimators: usize,
    pub accuracy: Option<f64>,
    pub fit_seconds: Option<f64>,
    pub predict_seconds: Option<f64>,
    pub order_min: Option<usize>,
    pub order_max: Option<usize>,
    pub basis_min: Option<usize>,
    pub basis_max: Option<usize>,
    pub clamped: Option<usize>,
    pub distinct_bases: Option<usize>,
    pub mean_d: Option<f64>,
    pub mean_qd: Option<f64>,
    pub mean_vf: Option<f64>,
    pub error: Option<String>,
}

impl RunRecord {
    fn empty(dataset: &str, model: Model, seed: u64, n_estimators: usize) -> Self {
        Self {
            dataset: dataset.to_string(),
            model: model.name().to_string(),
            swapped_label: model.swapped_label().to_string(),
            seed,
            n_estimators,
            accuracy: None,
            fit_seconds: None,
            predict_seconds: None,
            order_min: None,
            order_max: None,
            basis_min: None,
            basis_max: None,
            clamped: None,
            distinct_bases: None,
            mean_d: None,
            mean_qd: None,
            mean_vf: None,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub dataset: String,
    pub model: String,
    pub seed: u64,
    pub n_estimators: usize,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRecord {
    pub dataset: String,
    pub model: String,
    pub n_estimators: usize,
    pub repeats: usize,
    pub workers: usize,
    pub median_seconds: Option<f64>,
    pub min_seconds: Option<f64>,
    pub max_seconds: Option<f64>,
    /// Median is at least 90% of the previous size's median.
    pub monotone_within_band: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityRow {
    pub dataset: String,
    pub model: String,
    pub seed: u64,
    pub split: String,
    /// Observation index, or `mean` for the dataset summary row.
    pub observation: String,
    pub pairwise_d: Option<f64>,
    pub quadratic_qd: Option<f64>,
    pub functional_variance_vf: Option<f64>,
    pub error: Option<String>,
}

/// Relative slack allowed when checking that fit time grows with `T`.
pub const TIMING_BAND: f64 = 0.10;

/// Runs `f` on a pool with `workers` threads (0 means all cores).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}

fn load_error(name: &str, e: &BenchError) -> BenchError {
    BenchError::Dataset {
        name: name.to_string(),
        reason: e.to_string(),
    }
}

fn n_estimators(cfg: &ExperimentConfig, model: Model) -> usize {
    match model {
        Model::Rf => cfg.rf.n_estimators,
        Model::Rst(_) => cfg.rst.n_estimators,
    }
}

fn fit(cfg: &ExperimentConfig, model: Model, train: &Dataset, n: usize, seed: u64) -> Result<Ensemble> {
    model.fit(train, &cfg.rst, &cfg.rf, n, seed)
}

fn pick<'a>(split: SplitChoice, train: &'a Dataset, test: &'a Dataset) -> &'a Dataset {
    match split {
        SplitChoice::Train => train,
        SplitChoice::Test => test,
    }
}

/// Fits every (dataset, model, seed) cell on the train split and scores it
/// on the test split.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    with_workers(cfg.workers, || {
        let mut records = Vec::new();
        for spec in &cfg.datasets {
            let data = spec.load();
            for &model in &cfg.models {
                for &seed in &cfg.seeds {
                    let mut rec = RunRecord::empty(spec.name(), model, seed, n_estimators(cfg, model));
                    let outcome = match &data {
                        Ok((train, test)) => run_cell(cfg, model, seed, train, test, &mut rec),
                        Err(e) => Err(load_error(spec.name(), e)),
                    };
                    if let Err(e) = outcome {
                        rec.error = Some(e.to_string());
                    }
                    records.push(rec);
                }
            }
        }
        records
    })
}

fn run_cell(
    cfg: &ExperimentConfig,
    model: Model,
    seed: u64,
    train: &Dataset,
    test: &Dataset,
    rec: &mut RunRecord,
) -> Result<()> {
    let start = Instant::now();
    let ens = fit(cfg, model, train, rec.n_estimators, seed)?;
    rec.fit_seconds = Some(start.elapsed().as_secs_f64());
    let start = Instant::now();
    let pred = ens.predict_batch(test)?;
    rec.predict_seconds = Some(start.elapsed().as_secs_f64());
    rec.accuracy = Some(pred.accuracy);
    if let Some(s) = ens.theta_summary() {
        rec.order_min = Some(s.order_min);
        rec.order_max = Some(s.order_max);
        rec.basis_min = Some(s.num_basis_min);
        rec.basis_max = Some(s.num_basis_max);
        rec.clamped = Some(s.clamped);
        rec.distinct_bases = Some(s.distinct_bases);
        if cfg.record_diversity && ens.n_members() >= 2 {
            let report = ensemble_diversity_report(&ens, pick(cfg.diversity_split, train, test), cfg.grid_size)?;
            rec.mean_d = Some(report.mean_pairwise);
            rec.mean_qd = Some(report.mean_quadratic);
            rec.mean_vf = Some(report.mean_variance);
        }
    }
    Ok(())
}

/// Accuracy of the first-`T` vote for each `T` in the sweep grid, from one
/// ensemble of `max(grid)` members per (dataset, model, seed).
pub fn sweep_estimators(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let grid = &cfg.sweep_grid;
    let t_max = *grid.last().expect("validated nonempty");
    with_workers(cfg.workers, || {
        let mut out = Vec::new();
        for spec in &cfg.datasets {
            let data = spec.load();
            for &model in &cfg.models {
                for &seed in &cfg.seeds {
                    let accs = match &data {
                        Ok((train, test)) => {
                            fit(cfg, model, train, t_max, seed).and_then(|ens| Ok(ens.prefix_accuracies(test, grid)?))
                        }
                        Err(e) => Err(load_error(spec.name(), e)),
                    };
                    for (i, &t) in grid.iter().enumerate() {
                        out.push(SweepRecord {
                            dataset: spec.name().to_string(),
                            model: model.name().to_string(),
                            seed,
                            n_estimators: t,
                            accuracy: accs.as_ref().ok().map(|a| a[i]),
                            error: accs.as_ref().err().map(ToString::to_string),
                        });
                    }
                }
            }
        }
        out
    })
}

/// Median of a nonempty sample; mean of the middle pair for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Wall-clock seconds of `repeats` fits with `n` members. Covers basis
/// construction, coefficient fitting and tree growth; the data is already
/// in memory.
pub fn time_fits(
    cfg: &ExperimentConfig,
    model: Model,
    train: &Dataset,
    n: usize,
    seed: u64,
    repeats: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(BenchError::Config("ensemble size must be >= 1".into()));
    }
    (0..repeats)
        .map(|_| {
            let start = Instant::now();
            let ens = fit(cfg, model, train, n, seed)?;
            let secs = start.elapsed().as_secs_f64();
            drop(ens);
            Ok(secs)
        })
        .collect()
}

/// Median fit time per (dataset, model, size) on `timing_workers` threads,
/// using the first configured seed.
pub fn time_fit(cfg: &ExperimentConfig) -> Result<Vec<TimingRecord>> {
    cfg.validate()?;
    let seed = cfg.seeds[0];
    with_workers(cfg.timing_workers, || {
        let mut out = Vec::new();
        for spec in &cfg.datasets {
            let data = spec.load();
            for &model in &cfg.models {
                let mut previous: Option<f64> = None;
                for &n in &cfg.timing_sizes {
                    let times = match &data {
                        Ok((train, _)) => time_fits(cfg, model, train, n, seed, cfg.timing_repeats),
                        Err(e) => Err(load_error(spec.name(), e)),
                    };
                    let med = times.as_ref().ok().and_then(|t| median(t));
                    let within = match (previous, med) {
                        (Some(p), Some(m)) => Some(m >= p * (1.0 - TIMING_BAND)),
                        (None, Some(_)) => Some(true),
                        _ => None,
                    };
                    if med.is_some() {
                        previous = med;
                    }
                    out.push(TimingRecord {
                        dataset: spec.name().to_string(),
                        model: model.name().to_string(),
                        n_estimators: n,
                        repeats: cfg.timing_repeats,
                        workers: cfg.timing_workers,
                        median_seconds: med,
                        min_seconds: times.as_ref().ok().and_then(|t| t.iter().copied().reduce(f64::min)),
                        max_seconds: times.as_ref().ok().and_then(|t| t.iter().copied().reduce(f64::max)),
                        monotone_within_band: within,
                        error: times.err().map(|e| e.to_string()),
                    });
                }
            }
        }
        out
    })
}

/// Per-observation diversity rows plus one `mean` row per (dataset, model),
/// for every spline model in the config, using the first configured seed.
pub fn diversity_report_cmd(cfg: &ExperimentConfig) -> Result<Vec<DiversityRow>> {
    cfg.validate()?;
    let seed = cfg.seeds[0];
    let split = match cfg.diversity_split {
        SplitChoice::Train => "train",
        SplitChoice::Test => "test",
    };
    with_workers(cfg.workers, || {
        let mut out = Vec::new();
        for spec in &cfg.datasets {
            let data = spec.load();
            for &model in cfg.models.iter().filter(|m| m.variant().is_some()) {
                let row = |observation: String, values: Option<(f64, f64, f64)>, error: Option<String>| DiversityRow {
                    dataset: spec.name().to_string(),
                    model: model.name().to_string(),
                    seed,
                    split: split.to_string(),
                    observation,
                    pairwise_d: values.map(|v| v.0),
                    quadratic_qd: values.map(|v| v.1),
                    functional_variance_vf: values.map(|v| v.2),
                    error,
                };
                let report = match &data {
                    Ok((train, test)) => fit(cfg, model, train, cfg.rst.n_estimators, seed).and_then(|ens| {
                        Ok(ensemble_diversity_report(
                            &ens,
                            pick(cfg.diversity_split, train, test),
                            cfg.grid_size,
                        )?)
                    }),
                    Err(e) => Err(load_error(spec.name(), e)),
                };
                match report {
                    Ok(r) => {
                        for (i, o) in r.per_observation.iter().enumerate() {
                            out.push(row(i.to_string(), Some((o.pairwise, o.quadratic, o.variance)), None));
                        }
                        out.push(row(
                            "mean".into(),
                            Some((r.mean_pairwise, r.mean_quadratic, r.mean_variance)),
                            None,
                        ));
                    }
                    Err(e) => out.push(row("mean".into(), None, Some(e.to_string()))),
                }
            }
        }
        out
    })
}
