//! Seeded end-to-end checks: embedding shapes, classifier invariants and
//! frozen artifacts. Set `EECLASS_BLESS=1` to rewrite the golden files.

mod common;

use std::path::PathBuf;

use common::*;
use eeclass::classify::{self, Forest, Hyper, Lda, Method, Qda, Svm};
use eeclass::embed::{self, Embedded2D, EmbeddingKind};
use eeclass::eval::{self, SuiteConfig};
use eeclass::extremality::{ExtremalityIndex, IndexKind};
use eeclass::fdata::{self, FunctionalDataset, Group, SplitSpec};
use eeclass::stats;
use eeclass::synth;
use rand::seq::SliceRandom;
use rand::Rng;

fn experiment(id: u32, n_per_group: usize, seed: u64) -> FunctionalDataset {
    let spec = synth::experiment_preset(id).unwrap().with_size(n_per_group, 100);
    synth::generate_experiment(&spec, seed).unwrap()
}

fn golden(name: &str, actual: &str) {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    if std::env::var_os("EECLASS_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with EECLASS_BLESS=1)", path.display()));
    assert!(expected == actual, "{name} differs from the frozen copy");
}

fn mean_abs_diagonal_gap(e: &Embedded2D) -> f64 {
    e.points.iter().map(|p| (p[0] - p[1]).abs()).sum::<f64>() / e.len() as f64
}

#[test]
fn experiment_1_points_hug_the_diagonal() {
    let data = experiment(1, 200, 11);
    for kind in [EmbeddingKind::EeMei, EmbeddingKind::DdFm] {
        let e = embed::embed(&data, &data, kind).unwrap();
        let gap = mean_abs_diagonal_gap(&e);
        assert!(gap <= 0.1, "{kind}: mean |u - v| = {gap}");
    }
}

/// Group A lies below group B, so B curves almost never sit above an A
/// curve: B points collapse towards u = 0 while A points keep u >= 1/n.
/// The extreme curves of the two groups still touch, so the check is on
/// the share of (A, B) pairs ordered correctly rather than on the min/max.
#[test]
fn experiment_3_separates_on_u() {
    let mut separated = 0;
    for seed in 0..20 {
        let data = experiment(3, 200, seed);
        let e = embed::embed(&data, &data, EmbeddingKind::EeMei).unwrap();
        let u_of = |g: Group| -> Vec<f64> {
            e.points.iter().zip(&e.labels).filter(|(_, &l)| l == g).map(|(p, _)| p[0]).collect()
        };
        let (a, b) = (u_of(Group::A), u_of(Group::B));
        let ordered = a.iter().map(|x| b.iter().filter(|&y| y < x).count()).sum::<usize>();
        let share = ordered as f64 / (a.len() * b.len()) as f64;
        if share >= 0.99 {
            separated += 1;
        }
    }
    assert!(separated >= 19, "{separated}/20 seeds separated");
}

#[test]
fn experiment_3_curves_rarely_cross() {
    let data = experiment(3, 100, 5);
    let a: Vec<&[f64]> = data.indices_of(Group::A).into_iter().map(|i| data.row(i)).collect();
    let b: Vec<&[f64]> = data.indices_of(Group::B).into_iter().map(|i| data.row(i)).collect();
    let mut above = 0;
    for x in &a {
        for y in &b {
            if x.iter().zip(y.iter()).all(|(p, q)| q - p > 0.0) {
                above += 1;
            }
        }
    }
    let share = above as f64 / (a.len() * b.len()) as f64;
    assert!(share >= 0.99, "{share}");
}

#[test]
fn training_members_meet_floor_on_own_axis() {
    let data = experiment(2, 50, 3);
    for kind in [EmbeddingKind::EeMei, EmbeddingKind::EeMhi] {
        let e = embed::embed(&data, &data, kind).unwrap();
        for (p, g) in e.points.iter().zip(&e.labels) {
            assert!(p[g.index()] >= 1.0 / 50.0);
            assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

#[test]
fn held_out_curves_are_plain_reflections() {
    let data = experiment(2, 40, 4);
    let (train, test) = fdata::split(&data, &SplitSpec::new(0.8, 4, true).unwrap()).unwrap();
    let mei = embed::embed(&test, &train, EmbeddingKind::EeMei).unwrap();
    let mhi = embed::embed(&test, &train, EmbeddingKind::EeMhi).unwrap();
    for (p, q) in mei.points.iter().zip(&mhi.points) {
        assert!((p[0] + q[0] - 1.0).abs() < 1e-12);
        assert!((p[1] + q[1] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn parallel_and_serial_indexes_agree_bitwise() {
    let data = experiment(6, 60, 9);
    let index = ExtremalityIndex::new(&data);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    for kind in IndexKind::ALL {
        let par = index.evaluate_all(kind, &data).unwrap();
        let one = serial.install(|| index.evaluate_all(kind, &data).unwrap());
        assert_eq!(par, one);
    }
}

fn blobs(seed: u64, n: usize) -> (Vec<[f64; 2]>, Vec<Group>) {
    let mut rng = test_rng(seed);
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let g = if i % 2 == 0 { Group::A } else { Group::B };
        let c = if g == Group::A { [0.3, 0.6] } else { [0.6, 0.4] };
        points.push([c[0] + rng.random_range(-0.25..0.25), c[1] + rng.random_range(-0.25..0.25)]);
        labels.push(g);
    }
    (points, labels)
}

#[test]
fn lda_boundary_is_crossed_at_most_once() {
    let (points, labels) = blobs(21, 80);
    let model = Lda::fit(&points, &labels).unwrap();
    let mut rng = test_rng(22);
    for _ in 0..200 {
        let a = [rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)];
        let b = [rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)];
        let labels: Vec<Group> = (0..=100)
            .map(|s| {
                let t = s as f64 / 100.0;
                model.predict_one([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
            })
            .collect();
        let changes = labels.windows(2).filter(|w| w[0] != w[1]).count();
        assert!(changes <= 1);
    }
}

#[test]
fn shared_covariance_qda_predicts_like_lda() {
    let (points, labels) = blobs(23, 60);
    let lda = Lda::fit(&points, &labels).unwrap();
    let qda = Qda::fit(&points, &labels, true).unwrap();
    for i in 0..=40 {
        for j in 0..=40 {
            let x = [i as f64 / 40.0, j as f64 / 40.0];
            assert_eq!(lda.predict_one(x), qda.predict_one(x), "{x:?}");
        }
    }
}

#[test]
fn knn_and_svm_ignore_power_of_two_rescaling() {
    let (points, labels) = blobs(24, 60);
    let (queries, _) = blobs(25, 100);
    let scale = |p: &[f64; 2]| [p[0] * 8.0, p[1] * 0.25];
    let scaled: Vec<[f64; 2]> = points.iter().map(scale).collect();
    let hyper = Hyper::default();
    for method in [Method::Knn, Method::Svm] {
        let a = classify::train(&points, &labels, method, &hyper, 1).unwrap();
        let b = classify::train(&scaled, &labels, method, &hyper, 1).unwrap();
        let qs: Vec<[f64; 2]> = queries.iter().map(scale).collect();
        assert_eq!(a.predict(&queries), b.predict(&qs), "{method}");
    }
}

#[test]
fn svm_meets_kkt_on_embedded_data() {
    let data = experiment(2, 60, 2);
    let e = embed::embed(&data, &data, EmbeddingKind::EeMei).unwrap();
    let svm = Svm::fit(&e.points, &e.labels, &Hyper::default()).unwrap();
    assert!(svm.max_kkt_violation() <= 2e-3, "{}", svm.max_kkt_violation());
    assert!(svm.support_count() > 0);
}

#[test]
fn forest_is_reproducible_and_seed_sensitive() {
    let (points, labels) = blobs(26, 80);
    let hyper = Hyper { trees: 50, ..Hyper::default() };
    let a = Forest::fit(&points, &labels, &hyper, 5).unwrap();
    let b = Forest::fit(&points, &labels, &hyper, 5).unwrap();
    let c = Forest::fit(&points, &labels, &hyper, 6).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn predictions_do_not_depend_on_thread_count() {
    let (points, labels) = blobs(27, 60);
    let (queries, _) = blobs(28, 200);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    for method in Method::ALL {
        let model = classify::train(&points, &labels, method, &Hyper::default(), 3).unwrap();
        let one = serial.install(|| model.predict(&queries));
        assert_eq!(model.predict(&queries), one, "{method}");
    }
}

#[test]
fn shuffled_labels_score_near_chance() {
    let mut accs = Vec::new();
    for seed in 1..=3 {
        let data = experiment(1, 60, seed);
        let mut labels = data.labels().to_vec();
        labels.shuffle(&mut test_rng(seed));
        let rows = rows_of(&data);
        let shuffled = FunctionalDataset::from_rows(data.grid().clone(), &rows, labels).unwrap();
        let hyper = Hyper { trees: 50, ..Hyper::default() };
        for r in eval::kfold_cv_methods(&shuffled, EmbeddingKind::EeMei, &Method::ALL, &hyper, 5, seed).unwrap() {
            accs.push(r.summary.mean);
        }
    }
    let mean = stats::mean(&accs);
    assert!((0.35..=0.65).contains(&mean), "{mean}");
}

#[test]
fn report_statistics_recompute_from_folds() {
    let config = SuiteConfig {
        seeds: vec![3, 4],
        n_per_group: 30,
        grid_points: 40,
        folds: 4,
        hyper: Hyper { trees: 25, ..Hyper::default() },
        ..SuiteConfig::default()
    };
    let report = eval::run_suite(&[2], &config).unwrap();
    assert_eq!(report.cells.len(), 2 * 3 * 5);
    for cell in &report.cells {
        let s = stats::Summary::of(&cell.cv.fold_accuracies);
        assert!((s.mean - cell.cv.summary.mean).abs() <= 1e-12);
        assert!((s.median - cell.cv.summary.median).abs() <= 1e-12);
    }
    // the long CSV carries enough to rebuild every pooled mean
    let folds = eval::folds_csv(&report);
    for row in report.summary() {
        let accs: Vec<f64> = folds
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect::<Vec<_>>())
            .filter(|f| f[1] == row.kind.name() && f[2] == row.method.name())
            .map(|f| f[5].parse().unwrap())
            .collect();
        assert_eq!(accs.len(), 2 * 4);
        assert!((stats::mean(&accs) - row.cv.mean).abs() <= 1e-12);
    }
}

#[test]
fn golden_experiment_2_points() {
    let data = experiment(2, 20, 7);
    let e = embed::embed(&data, &data, EmbeddingKind::EeMei).unwrap();
    golden("experiment2_ee_mei_seed7.csv", &embed::emit_points_csv(&e));
}

#[test]
fn golden_experiment_3_svg() {
    let data = experiment(3, 20, 7);
    let e = embed::embed(&data, &data, EmbeddingKind::EeMei).unwrap();
    golden("experiment3_ee_mei_seed7.svg", &embed::emit_svg(&e, 480, 480).unwrap());
}

#[test]
fn golden_experiment_1_dataset_round_trip() {
    let data = experiment(1, 5, 7);
    let text = fdata::to_csv_string(&data);
    golden("experiment1_seed7.csv", &text);
    let back = fdata::parse_csv(text.as_bytes()).unwrap();
    assert_eq!(back, data);
    assert_eq!(fdata::to_csv_string(&back), text);
}
