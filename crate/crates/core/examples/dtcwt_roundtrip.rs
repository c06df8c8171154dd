//! Forward and inverse 2-D transform of a random image, with the energy held
//! in each scale and orientation.

use dtscatter::dtcwt::{forward, inverse, load_default_filters, Plane, ORIENTATION_DEGREES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let filters = load_default_filters();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let image = Plane::from_fn(64, 64, |_, _| rng.random::<f64>());

    let pyramid = forward(&image, 4, &filters).expect("forward transform");
    let rebuilt = inverse(&pyramid, &filters).expect("inverse transform");
    let err = image
        .as_slice()
        .iter()
        .zip(rebuilt.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("max reconstruction error: {err:.2e}");

    for (j, bands) in pyramid.subbands.iter().enumerate() {
        let energies: Vec<String> = bands
            .iter()
            .zip(ORIENTATION_DEGREES)
            .map(|(b, deg)| format!("{deg:>3}°={:.2}", b.abs().norm().powi(2)))
            .collect();
        println!("scale {} ({}x{}): {}", j + 1, bands[0].height(), bands[0].width(), energies.join(" "));
    }
    println!("lowpass {}x{}", pyramid.lowpass.height(), pyramid.lowpass.width());
}
