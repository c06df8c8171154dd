//! Extraction, selection and classification with and without the log
//! nonlinearity, over a few training sizes and seeds.
//!
//! Uses CIFAR-10 under `$DTSCATTER_DATA` when present (1000 training and
//! 1000 test images), synthetic textures otherwise.

use dtscatter::classify::SvmParams;
use dtscatter::cli::DATA_ENV;
use dtscatter::data::{load_cifar, stratified_indices, stratified_subsample, synthetic_textures, CifarVariant, Split};
use dtscatter::dtcwt::load_default_filters;
use dtscatter::pipeline::{extract_matrix, fit_pipeline};
use dtscatter::scatter::{Extractor, LogParams, ScatterConfig};
use ndarray::Axis;

fn main() {
    let (train, test, sizes, per_class) = match std::env::var_os(DATA_ENV) {
        Some(root) => {
            let (tr, te) = load_cifar(root.as_ref(), CifarVariant::Cifar10).expect("dataset");
            let tr = stratified_subsample(&tr, 1000, 0).unwrap();
            let te = stratified_subsample(&te, 1000, 0).unwrap();
            (tr, te, vec![300, 1000], 108)
        }
        None => (
            synthetic_textures(10, 60, 1.0, 1, Split::Train),
            synthetic_textures(10, 10, 1.0, 2, Split::Test),
            vec![100, 300],
            20,
        ),
    };
    let filters = load_default_filters();
    let configs = [
        ("log", ScatterConfig::default()),
        ("no-log", ScatterConfig { log: LogParams::off(), ..Default::default() }),
    ];
    for (name, config) in configs {
        let extractor = Extractor::new(config, filters.clone()).unwrap();
        let (x, y, report) = extract_matrix(&extractor, &train, None).unwrap();
        let (xt, yt, _) = extract_matrix(&extractor, &test, None).unwrap();
        println!("{name}: {} dims, {:.1} ms per image", report.dims, report.mean_image_seconds * 1e3);
        for &n in &sizes {
            for seed in 1..=3 {
                let idx = stratified_indices(&y, 10, n, seed).unwrap();
                let labels: Vec<u16> = idx.iter().map(|&i| y[i]).collect();
                let fitted = fit_pipeline(x.select(Axis(0), &idx).view(), &labels, per_class, &SvmParams::default())
                    .unwrap();
                println!(
                    "  n={n:<5} seed={seed} selected={:<5} accuracy={:.3}",
                    fitted.selection.union.len(),
                    fitted.score(xt.view(), &yt).unwrap()
                );
            }
        }
    }
}
