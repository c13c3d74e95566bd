use rst_core::dataset::synth_dataset;
use rst_core::{Ensemble, RfConfig, RstConfig, Variant};

fn config(variant: Variant, seed: u64) -> RstConfig {
    RstConfig {
        master_seed: seed,
        ..RstConfig::for_variant(variant)
    }
}

#[test]
fn rst_separates_the_synthetic_classes() {
    let (train, test) = synth_dataset(50, 64, 0.3, 0).unwrap();
    for variant in [Variant::RstR, Variant::RstB] {
        let ens = Ensemble::fit_rst(&train, &config(variant, 0)).unwrap();
        assert_eq!(ens.n_members(), 100);
        let acc = ens.predict_batch(&test).unwrap().accuracy;
        assert!(acc >= 0.95, "{variant}: {acc}");
    }
}

#[test]
fn forest_separates_the_synthetic_classes() {
    let (train, test) = synth_dataset(50, 64, 0.3, 0).unwrap();
    let rf = Ensemble::fit_rf_baseline(&train, 100, None, 0).unwrap();
    let acc = rf.predict_batch(&test).unwrap().accuracy;
    assert!(acc >= 0.90, "{acc}");
    let same = Ensemble::fit_rf(
        &train,
        &RfConfig {
            n_estimators: 100,
            ..RfConfig::default()
        },
    )
    .unwrap();
    assert_eq!(
        same.predict_batch(&test).unwrap().labels,
        rf.predict_batch(&test).unwrap().labels
    );
}

#[test]
fn every_variant_is_reproducible() {
    let (train, test) = synth_dataset(20, 64, 0.3, 5).unwrap();
    for variant in Variant::ALL {
        let cfg = RstConfig {
            n_estimators: 30,
            ..config(variant, 17)
        };
        let a = Ensemble::fit_rst(&train, &cfg).unwrap().predict_batch(&test).unwrap();
        let b = Ensemble::fit_rst(&train, &cfg).unwrap().predict_batch(&test).unwrap();
        assert_eq!(a.labels, b.labels, "{variant}");
    }
}

#[test]
fn votes_sum_to_the_ensemble_size() {
    let (train, test) = synth_dataset(10, 32, 0.5, 2).unwrap();
    let ens = Ensemble::fit_rst(
        &train,
        &RstConfig {
            n_estimators: 25,
            k_max: 32,
            ..config(Variant::RstRB, 3)
        },
    )
    .unwrap();
    for s in test.series() {
        let votes = ens.member_votes(s).unwrap();
        let mut tally = [0usize; 2];
        for v in &votes {
            tally[v - 1] += 1;
        }
        assert_eq!(tally.iter().sum::<usize>(), 25);
    }
}

#[test]
fn short_series_clamp_the_basis_count() {
    let (train, test) = synth_dataset(10, 24, 0.3, 4).unwrap();
    let ens = Ensemble::fit_rst(&train, &config(Variant::RstR, 4)).unwrap();
    let summary = ens.theta_summary().unwrap();
    assert!(summary.num_basis_max <= 24);
    assert!(summary.clamped > 0);
    for m in ens.members() {
        let th = m.theta().unwrap();
        assert_eq!(th.clamped, th.drawn_num_basis > 24);
    }
    ens.predict_batch(&test).unwrap();
}
