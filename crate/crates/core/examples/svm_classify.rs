//! One-versus-rest RBF SVM on three Gaussian blobs, with a small
//! cross-validated grid search.

use dtscatter::classify::{cross_validate, predict, train, SvmParams};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn blobs(per_class: usize, seed: u64) -> (Array2<f64>, Vec<u16>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.8).unwrap();
    let centres = [[0.0, 0.0], [3.0, 0.0], [1.5, 2.5]];
    let n = per_class * centres.len();
    let labels: Vec<u16> = (0..n).map(|i| (i / per_class) as u16).collect();
    let x = Array2::from_shape_fn((n, 2), |(i, d)| centres[labels[i] as usize][d] + noise.sample(&mut rng));
    (x, labels)
}

fn main() {
    let (x, y) = blobs(40, 1);
    let (xt, yt) = blobs(100, 2);

    let base = SvmParams { gamma: 0.5, c: 1.0, ..Default::default() };
    let cv = cross_validate(x.view(), &y, &[0.1, 1.0, 10.0], &[0.1, 0.5, 2.0], 5, &base).unwrap();
    for cell in &cv.cells {
        println!("c={:<5} gamma={:<4} cv accuracy {:.3}", cell.c, cell.gamma, cell.mean_accuracy);
    }

    let params = SvmParams { c: cv.best_c, gamma: cv.best_gamma, ..base };
    let model = train(x.view(), &y, &params).unwrap();
    for b in &model.classes {
        println!(
            "class {}: {} support vectors, bias {:.3}, {} iterations",
            b.class,
            b.sv_indices.len(),
            b.bias,
            b.iterations
        );
    }
    println!("test accuracy {:.3}", predict(&model, xt.view()).unwrap().accuracy(&yt));
}
