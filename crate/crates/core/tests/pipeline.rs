use ppaas_core::dataset::{read_csv, stratified_folds, LabelColumn};
use ppaas_core::orchestrator::{release_loop, select_best, PoolConfig};
use ppaas_core::perturbation::{rotation_perturb, Perturbator};
use ppaas_core::synthetic;
use ppaas_core::utility_metric::{cross_validated_accuracy, Classifier};

#[test]
fn blobs_release_at_default_threshold() {
    let d = synthetic::blobs(7).zscore_normalize().unwrap();
    let cfg = PoolConfig {
        seed: 7,
        fi_threshold: 0.8,
        max_rounds: 3,
        ..PoolConfig::default()
    };
    let out = release_loop(&d, &cfg).unwrap();
    assert!(out.report.released);
    assert!(out.report.rounds_used <= 3);
    for round in &out.report.rounds {
        assert_eq!(round.instances.len(), cfg.perturbators.len());
    }
    let w = select_best(&out.report).unwrap();
    assert_eq!(Some(w), out.report.winner);
    let best = out.report.instance(w).unwrap();
    let released = out.released().unwrap();
    assert_eq!(Some(&released.provenance), best.provenance.as_ref());
    let again = Perturbator::apply(&best.perturbator, &d, released.provenance.seed, cfg.bin_width).unwrap();
    assert_eq!(again.to_csv_bytes(), released.to_csv_bytes());
}

#[test]
fn csv_round_trip_keeps_values() {
    let d = synthetic::gaussian(30, 3, 2);
    let mut buf = Vec::new();
    d.write_csv(&mut buf).unwrap();
    let back = read_csv(buf.as_slice(), &LabelColumn::Last, "rt").unwrap();
    for (a, b) in d.features().iter().zip(back.features().iter()) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
    assert_eq!(d.labels(), back.labels());
}

#[test]
fn knn_accuracy_survives_rotation() {
    let d = synthetic::blobs(3).zscore_normalize().unwrap();
    let plan = stratified_folds(&d, 5, 3).unwrap();
    let knn = Classifier::knn();
    let base = cross_validated_accuracy(d.features(), d.labels(), &knn, &plan).unwrap().accuracy;
    let p = rotation_perturb(&d, 10, 3).unwrap();
    let rotated = cross_validated_accuracy(&p.features, &p.labels, &knn, &plan).unwrap().accuracy;
    assert!((base - rotated).abs() < 0.02, "{base} vs {rotated}");
}

#[test]
fn shuffled_labels_sit_at_chance() {
    let d = synthetic::gaussian(400, 4, 9).zscore_normalize().unwrap();
    let plan = stratified_folds(&d, 5, 1).unwrap();
    for c in Classifier::default_pool() {
        let acc = cross_validated_accuracy(d.features(), d.labels(), &c, &plan).unwrap().accuracy;
        assert!((acc - 0.5).abs() <= 0.1, "{} {acc}", c.name());
    }
}
