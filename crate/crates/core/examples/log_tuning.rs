//! Chooses the per-scale log offsets on a sample of images and reports how
//! much each choice symmetrizes the envelope distribution.
//!
//! Uses CIFAR-10 under `$DTSCATTER_DATA` when present, synthetic textures
//! otherwise.

use dtscatter::cli::DATA_ENV;
use dtscatter::data::{load_cifar, stratified_subsample, synthetic_textures, CifarVariant, Split};
use dtscatter::dtcwt::load_default_filters;
use dtscatter::scatter::{default_log_grid, tune_log_params, ScatterConfig};

fn main() {
    let set = match std::env::var_os(DATA_ENV) {
        Some(root) => {
            let (train, _) = load_cifar(root.as_ref(), CifarVariant::Cifar10).expect("dataset");
            stratified_subsample(&train, 200, 0).expect("subsample")
        }
        None => synthetic_textures(10, 20, 1.0, 0, Split::Train),
    };
    let images: Vec<_> = (0..set.len()).map(|i| set.image(i)).collect();
    let report = tune_log_params(&images, &ScatterConfig::default(), &load_default_filters(), &default_log_grid())
        .expect("tuning");

    println!("scale      k   |mean-median|   skew before   skew after");
    for s in &report.scales {
        println!(
            "{:>5} {:>6.2}   {:>13.4}   {:>11.3}   {:>10.3}",
            s.scale, s.k, s.mean_median_gap, s.skewness_before, s.skewness_after
        );
    }
}
