use rst_bench::experiment::{diversity_report_cmd, run_experiment, sweep_estimators, time_fit, time_fits};
use rst_bench::report::AccuracyTable;
use rst_bench::{DatasetSpec, ExperimentConfig, Model};
use rst_core::{dataset::synth_dataset, Ensemble, RstConfig, Variant};

fn synthetic(n_per_class: usize, length: usize, seed: u64) -> DatasetSpec {
    DatasetSpec::Synthetic {
        name: "synthetic".into(),
        n_per_class,
        length,
        noise_sd: 0.3,
        seed,
    }
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        datasets: vec![synthetic(20, 48, 0)],
        models: vec![Model::Rst(Variant::RstR)],
        seeds: vec![0],
        rst: RstConfig {
            n_estimators: 20,
            ..RstConfig::default()
        },
        ..ExperimentConfig::default()
    }
}

#[test]
fn single_synthetic_run_is_accurate() {
    let cfg = ExperimentConfig {
        datasets: vec![synthetic(50, 64, 0)],
        models: vec![Model::Rst(Variant::RstR)],
        ..ExperimentConfig::default()
    };
    let records = run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert!(r.error.is_none());
    assert!(r.accuracy.unwrap() >= 0.95, "{:?}", r.accuracy);
    assert!(r.fit_seconds.unwrap() >= 0.0 && r.predict_seconds.unwrap() >= 0.0);
    assert!(r.order_min.unwrap() >= 3 && r.order_max.unwrap() <= 9);
    assert!(r.basis_min.unwrap() >= 11 && r.basis_max.unwrap() <= 50);
}

#[test]
fn reruns_reproduce_accuracies() {
    let cfg = ExperimentConfig {
        seeds: vec![3, 4],
        ..small_config()
    };
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.len(), 2);
    let accs = |rs: &[rst_bench::experiment::RunRecord]| rs.iter().map(|r| r.accuracy).collect::<Vec<_>>();
    assert_eq!(accs(&a), accs(&b));
}

#[test]
fn failing_dataset_does_not_hide_others() {
    let cfg = ExperimentConfig {
        datasets: vec![
            DatasetSpec::Ucr {
                name: "Missing".into(),
                root: Some("/nonexistent".into()),
                train: None,
                test: None,
            },
            synthetic(10, 32, 1),
        ],
        models: vec![Model::Rf, Model::Rst(Variant::RstB)],
        seeds: vec![0, 1],
        ..small_config()
    };
    let records = run_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 8);
    for r in &records[..4] {
        assert_eq!(r.dataset, "Missing");
        assert!(r.accuracy.is_none());
        assert!(r.error.as_deref().unwrap().contains("Missing"));
    }
    for r in &records[4..] {
        assert!(r.error.is_none() && r.accuracy.is_some());
    }
}

#[test]
fn pivot_cells_are_record_means() {
    let cfg = ExperimentConfig {
        models: vec![Model::Rst(Variant::RstR), Model::Rf],
        seeds: vec![0, 1, 2],
        datasets: vec![
            synthetic(10, 32, 2),
            DatasetSpec::Synthetic {
                name: "noisy".into(),
                n_per_class: 10,
                length: 32,
                noise_sd: 1.5,
                seed: 2,
            },
        ],
        ..small_config()
    };
    let records = run_experiment(&cfg).unwrap();
    let table = AccuracyTable::from_records(&records);
    assert_eq!(table.models, ["RF", "RST-R"]);
    for d in ["synthetic", "noisy"] {
        for m in ["RF", "RST-R"] {
            let accs: Vec<f64> = records
                .iter()
                .filter(|r| r.dataset == d && r.model == m)
                .map(|r| r.accuracy.unwrap())
                .collect();
            let mean = accs.iter().sum::<f64>() / accs.len() as f64;
            assert!((table.cell(d, m).unwrap() - mean).abs() <= 1e-12);
        }
    }
}

#[test]
fn sweep_endpoint_matches_a_full_run() {
    let cfg = ExperimentConfig {
        sweep_grid: vec![20],
        models: vec![Model::Rst(Variant::RstRB), Model::Rf],
        ..small_config()
    };
    let cfg = ExperimentConfig {
        rf: rst_core::RfConfig {
            n_estimators: 20,
            ..cfg.rf.clone()
        },
        ..cfg
    };
    let sweep = sweep_estimators(&cfg).unwrap();
    let run = run_experiment(&cfg).unwrap();
    assert_eq!(sweep.len(), run.len());
    for (s, r) in sweep.iter().zip(&run) {
        assert_eq!((s.model.as_str(), s.n_estimators), (r.model.as_str(), r.n_estimators));
        assert_eq!(s.accuracy, r.accuracy);
    }
}

#[test]
fn sweep_prefixes_replay_fresh_training() {
    let cfg = ExperimentConfig {
        sweep_grid: vec![1, 3, 8],
        models: vec![Model::Rst(Variant::RstR)],
        datasets: vec![synthetic(6, 24, 5)],
        seeds: vec![9],
        ..small_config()
    };
    let sweep = sweep_estimators(&cfg).unwrap();
    let (train, test) = synth_dataset(6, 24, 0.3, 5).unwrap();
    for row in &sweep {
        let fresh = Ensemble::fit_rst(
            &train,
            &RstConfig {
                n_estimators: row.n_estimators,
                master_seed: 9,
                ..RstConfig::for_variant(Variant::RstR)
            },
        )
        .unwrap();
        assert_eq!(row.accuracy, Some(fresh.predict_batch(&test).unwrap().accuracy));
    }
}

#[test]
fn timing_rejects_empty_ensembles() {
    let cfg = small_config();
    let (train, _) = cfg.datasets[0].load().unwrap();
    assert!(time_fits(&cfg, Model::Rst(Variant::RstB), &train, 0, 0, 1).is_err());
    let t = time_fits(&cfg, Model::Rst(Variant::RstB), &train, 1, 0, 2).unwrap();
    assert_eq!(t.len(), 2);
    assert!(t.iter().all(|&s| s > 0.0));

    let bad = ExperimentConfig {
        timing_sizes: vec![0, 10],
        ..small_config()
    };
    assert!(time_fit(&bad).is_err());
}

#[test]
fn timing_records_cover_the_size_grid() {
    let cfg = ExperimentConfig {
        timing_sizes: vec![2, 4],
        timing_repeats: 3,
        ..small_config()
    };
    let rows = time_fit(&cfg).unwrap();
    assert_eq!(rows.iter().map(|r| r.n_estimators).collect::<Vec<_>>(), [2, 4]);
    for r in &rows {
        assert_eq!((r.repeats, r.workers), (3, 1));
        let (lo, med, hi) = (
            r.min_seconds.unwrap(),
            r.median_seconds.unwrap(),
            r.max_seconds.unwrap(),
        );
        assert!(lo <= med && med <= hi);
        assert!(r.monotone_within_band.is_some());
    }
}

#[test]
fn diversity_rows_per_observation_plus_mean() {
    let cfg = ExperimentConfig {
        models: vec![Model::Rf, Model::Rst(Variant::RstR), Model::Rst(Variant::RstB)],
        grid_size: 200,
        ..small_config()
    };
    let rows = diversity_report_cmd(&cfg).unwrap();
    let (train, _) = cfg.datasets[0].load().unwrap();
    let n = train.n_series();
    assert_eq!(rows.len(), 2 * (n + 1));
    for model in ["RST-R", "RST-B"] {
        let mine: Vec<_> = rows.iter().filter(|r| r.model == model).collect();
        assert_eq!(mine.len(), n + 1);
        let mean = mine.last().unwrap();
        assert_eq!(mean.observation, "mean");
        assert!(mean.pairwise_d.unwrap() > 0.0);
    }

    let fixed = ExperimentConfig {
        rst: RstConfig {
            n_estimators: 5,
            o_min: 3,
            o_max: 3,
            k_min: 5,
            k_max: 5,
            ..RstConfig::default()
        },
        models: vec![Model::Rst(Variant::RstR)],
        grid_size: 100,
        ..small_config()
    };
    for r in diversity_report_cmd(&fixed).unwrap() {
        assert_eq!(r.pairwise_d, Some(0.0));
    }
}
