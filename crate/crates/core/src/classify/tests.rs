use super::*;
use ndarray::array;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Box constraints and `Σ α y = 0` for every class.
fn assert_feasible(model: &SvmModel) {
    for b in &model.classes {
        let sum: f64 = b.coef.iter().sum();
        assert!(sum.abs() < 1e-6, "class {} Σαy = {sum}", b.class);
        for &a in &b.coef {
            assert!(a.abs() > 0.0 && a.abs() <= model.c * (1.0 + 1e-12), "α = {a}");
        }
    }
}

fn blobs(per_class: usize, centres: &[(f64, f64)], spread: f64, seed: u64) -> (Array2<f64>, Vec<u16>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).unwrap();
    let n = per_class * centres.len();
    let mut x = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % centres.len();
        x[[i, 0]] = centres[c].0 + noise.sample(&mut rng);
        x[[i, 1]] = centres[c].1 + noise.sample(&mut rng);
        labels.push(c as u16);
    }
    (x, labels)
}

fn params(c: f64, gamma: f64) -> SvmParams {
    SvmParams {
        c,
        gamma,
        ..SvmParams::default()
    }
}

#[test]
fn solves_xor() {
    let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
    let y = [0u16, 0, 1, 1];
    let model = train(x.view(), &y, &params(10.0, 1.0)).unwrap();
    assert_feasible(&model);
    assert!(model.unconverged().is_empty());
    assert_eq!(predict(&model, x.view()).unwrap().labels, y);
}

#[test]
fn separable_blobs() {
    let (x, y) = blobs(100, &[(-3.0, 0.0), (3.0, 0.0)], 0.5, 1);
    let model = train(x.view(), &y, &params(10.0, 0.5)).unwrap();
    assert_feasible(&model);
    let pred = predict(&model, x.view()).unwrap();
    assert_eq!(pred.accuracy(&y), 1.0);
    for b in &model.classes {
        assert!(b.coef.len() < 40, "{} support vectors", b.coef.len());
    }
    assert!(pred.decision.iter().all(|v| v.is_finite()));
}

#[test]
fn conflicting_duplicates_stay_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let base = Array2::from_shape_fn((15, 3), |_| rng.random::<f64>());
    let mut x = Array2::zeros((30, 3));
    let mut y = Vec::new();
    for i in 0..30 {
        x.row_mut(i).assign(&base.row(i % 15));
        y.push((i / 15) as u16);
    }
    let model = train(x.view(), &y, &params(2.0, 1.0)).unwrap();
    assert_feasible(&model);
    assert!(predict(&model, x.view()).unwrap().decision.iter().all(|v| v.is_finite()));
}

#[test]
fn free_support_vectors_sit_on_margin() {
    let (x, y) = blobs(60, &[(-1.0, 0.0), (1.0, 0.0), (0.0, 1.5)], 0.7, 3);
    let model = train(x.view(), &y, &params(5.0, 0.8)).unwrap();
    assert_feasible(&model);
    for b in &model.classes {
        for (k, &a) in b.coef.iter().enumerate() {
            if a.abs() < model.c * (1.0 - 1e-9) {
                let side = if a > 0.0 { 1.0 } else { -1.0 };
                let f = b.decision(b.support.row(k).as_slice().unwrap(), model.gamma);
                assert!((side * f - 1.0).abs() < 1e-2, "class {} sv {k}: {f}", b.class);
            }
        }
    }
}

#[test]
fn gamma_scaling_matches_feature_scaling() {
    let (x, y) = blobs(20, &[(-1.0, 0.0), (1.0, 0.5)], 0.8, 4);
    let s: f64 = 3.0;
    let scaled = x.mapv(|v| v * s.sqrt());
    // solved tightly so both runs reach the same optimum
    let tight = |gamma| SvmParams {
        tol: 1e-10,
        ..params(3.0, gamma)
    };
    let a = train(x.view(), &y, &tight(0.4 * s)).unwrap();
    let b = train(scaled.view(), &y, &tight(0.4)).unwrap();
    let (probe, _) = blobs(10, &[(0.0, 0.0)], 1.5, 5);
    let da = predict(&a, probe.view()).unwrap();
    let db = predict(&b, probe.mapv(|v| v * s.sqrt()).view()).unwrap();
    assert_eq!(da.labels, db.labels);
    for (u, v) in da.decision.iter().zip(db.decision.iter()) {
        assert!((u - v).abs() < 1e-6, "{u} vs {v}");
    }
}

#[test]
fn cached_rows_match_full_gram() {
    let (x, y) = blobs(30, &[(-1.0, 0.0), (1.0, 0.0), (0.0, 1.0)], 0.6, 6);
    let full = train(x.view(), &y, &params(4.0, 0.7)).unwrap();
    let tiny = SvmParams {
        cache_bytes: 8 * 90 * 3,
        ..params(4.0, 0.7)
    };
    let cached = train(x.view(), &y, &tiny).unwrap();
    assert_eq!(full, cached);
}

#[test]
fn empty_class_decision_is_bias() {
    let model = SvmModel {
        gamma: 1.0,
        c: 1.0,
        dims: 2,
        classes: vec![
            BinarySvm {
                class: 0,
                sv_indices: vec![],
                support: Array2::zeros((0, 2)),
                coef: vec![],
                bias: -0.25,
                iterations: 0,
                converged: true,
            },
            BinarySvm {
                class: 3,
                sv_indices: vec![],
                support: Array2::zeros((0, 2)),
                coef: vec![],
                bias: -0.25,
                iterations: 0,
                converged: true,
            },
        ],
    };
    let p = predict(&model, array![[1.0, 2.0]].view()).unwrap();
    assert_eq!(p.decision[[0, 0]], -0.25);
    // equal decisions resolve to the lower class id
    assert_eq!(p.labels, vec![0]);
    assert!(matches!(
        predict(&model, array![[1.0, 2.0, 3.0]].view()),
        Err(ClassifyError::WidthMismatch { expected: 2, got: 3 })
    ));
}

#[test]
fn rejects_bad_input() {
    let x = array![[0.0], [1.0]];
    assert!(matches!(train(x.view(), &[1, 1], &SvmParams::default()), Err(ClassifyError::SingleClass(1))));
    assert!(matches!(train(x.view(), &[0, 1], &params(0.0, 1.0)), Err(ClassifyError::NonPositive("c"))));
    assert!(matches!(train(x.view(), &[0, 1], &params(1.0, -1.0)), Err(ClassifyError::NonPositive("gamma"))));
    let bad = array![[0.0], [f64::NAN]];
    assert!(matches!(train(bad.view(), &[0, 1], &SvmParams::default()), Err(ClassifyError::NonFinite(1))));
}

#[test]
fn iteration_cap_sets_warning() {
    let (x, y) = blobs(50, &[(-0.2, 0.0), (0.2, 0.0)], 1.0, 7);
    let p = SvmParams {
        max_kernel_evals: 400,
        ..params(100.0, 1.0)
    };
    let model = train(x.view(), &y, &p).unwrap();
    assert_eq!(model.unconverged(), vec![0, 1]);
    assert_feasible(&model);
}

#[test]
fn folds_are_stratified() {
    let labels: Vec<u16> = (0..30).map(|i| (i % 3) as u16).collect();
    let f = stratified_folds(&labels, 5).unwrap();
    for fold in 0..5 {
        for class in 0..3 {
            let n = (0..30).filter(|&i| f[i] == fold && labels[i] == class).count();
            assert_eq!(n, 2);
        }
    }
    let skew: Vec<u16> = (0..12).map(|i| if i < 3 { 1 } else { 0 }).collect();
    assert!(matches!(stratified_folds(&skew, 4), Err(ClassifyError::ClassTooSmall { class: 1, .. })));
    assert!(matches!(stratified_folds(&skew, 1), Err(ClassifyError::BadFolds { .. })));
}

#[test]
fn cross_validation_finds_good_cell() {
    let (x, y) = blobs(20, &[(-2.0, 0.0), (2.0, 0.0), (0.0, 2.5)], 0.5, 8);
    let cv = cross_validate(x.view(), &y, &[10.0], &[1e4, 0.5], 5, &SvmParams::default()).unwrap();
    assert_eq!((cv.best_c, cv.best_gamma), (10.0, 0.5));
    assert_eq!(cv.cells.len(), 2);
    let good = cv.cells.iter().find(|c| c.gamma == 0.5).unwrap();
    assert!(good.mean_accuracy > 0.95);
}

#[test]
fn cross_validation_ties_prefer_small_values() {
    let (x, y) = blobs(10, &[(-5.0, 0.0), (5.0, 0.0)], 0.3, 9);
    let cv = cross_validate(x.view(), &y, &[20.0, 5.0], &[0.5, 0.2], 5, &SvmParams::default()).unwrap();
    assert!(cv.cells.iter().all(|c| c.mean_accuracy == 1.0));
    assert_eq!((cv.best_c, cv.best_gamma), (5.0, 0.2));
}

#[test]
fn leave_one_out_runs() {
    let (x, y) = blobs(10, &[(-2.0, 0.0), (2.0, 0.0)], 0.5, 10);
    let cv = cross_validate(x.view(), &y, &[1.0], &[0.5], 20, &SvmParams::default()).unwrap();
    assert_eq!(cv.cells[0].fold_accuracy.len(), 20);
}
