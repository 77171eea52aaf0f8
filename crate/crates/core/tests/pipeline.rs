//! Small end-to-end runs: training behaviour, determinism and file round trips.

use mnd_core::data::{
    compute_prototypes, generate_synthetic, load_feature_csv, load_prototypes, write_feature_csv,
    write_prototypes, SyntheticConfig,
};
use mnd_core::evaluation::roc_from_labels;
use mnd_core::inference::{load_scores, score_dataset, write_scores, InferenceConfig};
use mnd_core::network::{checkpoint_to_string, load_checkpoint, save_checkpoint};
use mnd_core::numerics::RngStream;
use mnd_core::training::{train, TrainConfig};

fn small_data() -> SyntheticConfig {
    SyntheticConfig {
        dim: 16,
        known_classes: 4,
        novel_classes: 3,
        samples_per_class: 40,
        cluster_std: 0.6,
        ..Default::default()
    }
}

fn small_train(g: f64, steps: usize) -> TrainConfig {
    TrainConfig {
        g,
        steps,
        batch_size: 32,
        hidden1: 64,
        hidden2: 32,
        seed: 5,
        ..Default::default()
    }
}

#[test]
fn smoothed_loss_falls_during_training() {
    let data = generate_synthetic::<f64>(&small_data()).unwrap();
    let out = train(&data.train, &small_train(1000.0, 600)).unwrap();
    assert_eq!(out.history.len(), 600);
    let (head, tail) = (out.history.head_total(100), out.history.tail_total(100));
    assert!(tail < 0.5 * head, "head {head} tail {tail}");
    assert!(out
        .history
        .records
        .iter()
        .all(|r| r.total.is_finite() && r.total >= 0.0));
}

#[test]
fn same_seed_gives_identical_checkpoints() {
    let data = generate_synthetic::<f64>(&small_data()).unwrap();
    let cfg = small_train(1000.0, 40);
    let a = train(&data.train, &cfg).unwrap();
    let b = train(&data.train, &cfg).unwrap();
    assert_eq!(
        checkpoint_to_string(&a.params, &[]),
        checkpoint_to_string(&b.params, &[])
    );
    let c = train(&data.train, &TrainConfig { seed: 6, ..cfg }).unwrap();
    assert_ne!(
        checkpoint_to_string(&a.params, &[]),
        checkpoint_to_string(&c.params, &[])
    );
}

#[test]
fn heavy_mixing_weight_fits_the_support_more_closely() {
    let data = generate_synthetic::<f64>(&small_data()).unwrap();
    let heavy = train(&data.train, &small_train(1000.0, 800)).unwrap();
    let light = train(&data.train, &small_train(1.0, 800)).unwrap();
    let (h, l) = (
        heavy.history.tail_nonzero(100),
        light.history.tail_nonzero(100),
    );
    assert!(h < l, "g=1000 {h} vs g=1 {l}");
}

#[test]
fn scores_survive_a_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let synth = small_data();
    let k = synth.known_classes;
    let data = generate_synthetic::<f64>(&synth).unwrap();
    let header = vec!["round trip".to_string()];

    let (train_path, test_path) = (dir.path().join("train.csv"), dir.path().join("test.csv"));
    write_feature_csv(&train_path, &data.train, &header).unwrap();
    write_feature_csv(&test_path, &data.test(), &header).unwrap();
    let train_ds = load_feature_csv::<f64>(&train_path, k).unwrap();
    let test_ds = load_feature_csv::<f64>(&test_path, k).unwrap();
    // Loading normalizes each row again, which may move the last bit.
    assert_eq!(train_ds.labels(), data.train.labels());
    let drift = train_ds
        .features()
        .as_slice()
        .iter()
        .zip(data.train.features().as_slice())
        .map(|(a, b)| (a - b).abs());
    assert!(drift.fold(0.0, f64::max) <= 1e-15);

    let trained = train(&train_ds, &small_train(1000.0, 100)).unwrap();
    let protos = compute_prototypes(&train_ds, 1, 25, &mut RngStream::new(0)).unwrap();
    let (ckpt, proto_path) = (dir.path().join("ckpt.txt"), dir.path().join("protos.csv"));
    save_checkpoint(&trained.params, &ckpt, &header).unwrap();
    write_prototypes(&proto_path, &protos, &header).unwrap();
    let params = load_checkpoint::<f64>(&ckpt).unwrap();
    let loaded_protos = load_prototypes::<f64>(&proto_path, k).unwrap();
    assert_eq!(params, trained.params);

    let cfg = InferenceConfig::default();
    let direct = score_dataset(&trained.params, &protos, &data.test(), None, &cfg, 1).unwrap();
    let reloaded = score_dataset(&params, &loaded_protos, &test_ds, None, &cfg, 3).unwrap();
    assert_eq!(direct.len(), reloaded.len());
    for (a, b) in direct.iter().zip(&reloaded) {
        assert_eq!(
            (a.sample_index, a.true_label),
            (b.sample_index, b.true_label)
        );
        assert!((a.membership_score - b.membership_score).abs() <= 1e-12);
    }

    let scores_path = dir.path().join("scores.csv");
    write_scores(&scores_path, &reloaded, &header).unwrap();
    let back = load_scores(&scores_path).unwrap();
    assert_eq!(back, reloaded);

    let values: Vec<f64> = back.iter().map(|s| s.membership_score).collect();
    let labels: Vec<usize> = back.iter().map(|s| s.true_label).collect();
    let roc = roc_from_labels(&values, &labels).unwrap();
    assert_eq!(roc.n_known, 4 * 40);
    assert_eq!(roc.n_novel, 3 * 40);
    assert!(roc.auc > 0.5, "auc {}", roc.auc);
}
