//! Relative change of the scattering vector under small diagonal shifts,
//! compared with the change in the raw pixels.

use dtscatter::dtcwt::{load_default_filters, Plane};
use dtscatter::scatter::{scatter_layers, Resolution, ScatterConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn relative(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let base: f64 = a.iter().map(|x| x * x).sum();
    (diff / base).sqrt()
}

fn main() {
    let filters = load_default_filters();
    let config = ScatterConfig {
        resolutions: vec![Resolution::new(64, 5)],
        channels: 1,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let image = Plane::from_fn(64, 64, |_, _| rng.random::<f64>());
    let base = scatter_layers(&image, &config, &filters).unwrap().flatten();

    println!("shift  pixels  scattering");
    for s in 1..=4isize {
        let shifted = image.circular_shift(s, s);
        let feats = scatter_layers(&shifted, &config, &filters).unwrap().flatten();
        println!(
            "{s:>5}  {:.3}   {:.3}",
            relative(image.as_slice(), shifted.as_slice()),
            relative(&base, &feats)
        );
    }
}
