//! Labelled synthetic textures in CIFAR layout, for demos and tests when the
//! real dataset is absent.

use super::{LabeledImageSet, Split, CIFAR_SIDE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// `per_class` images for each of `classes` classes. Class `c` is a grating
/// at angle `πc/classes` with a class-specific frequency; phase, contrast,
/// colour and frequency jitter are random, and pixel noise is added.
pub fn synthetic_textures(classes: usize, per_class: usize, noise: f64, seed: u64, split: Split) -> LabeledImageSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixel_noise = Normal::new(0.0, noise.max(0.0)).expect("finite noise");
    let n = CIFAR_SIDE;
    let mut pixels = Vec::with_capacity(classes * per_class * 3 * n * n);
    let mut labels = Vec::with_capacity(classes * per_class);
    for i in 0..classes * per_class {
        let c = i % classes;
        let theta = std::f64::consts::PI * c as f64 / classes as f64;
        let base = 0.08 + 0.2 * ((3 * c) % classes) as f64 / classes as f64;
        let freq = base * rng.random_range(0.9..1.1);
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let contrast = rng.random_range(0.2..0.45);
        let tint: [f64; 3] = [rng.random_range(0.3..0.7), rng.random_range(0.3..0.7), rng.random_range(0.3..0.7)];
        let (s, co) = theta.sin_cos();
        for t in tint {
            for r in 0..n {
                for col in 0..n {
                    let u = co * col as f64 + s * r as f64;
                    let v = t + contrast * (std::f64::consts::TAU * freq * u + phase).sin()
                        + pixel_noise.sample(&mut rng);
                    pixels.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
                }
            }
        }
        labels.push(c as u16);
    }
    LabeledImageSet::new(pixels, labels, classes, split).expect("consistent sizes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_seeded() {
        let a = synthetic_textures(4, 3, 0.1, 5, Split::Train);
        assert_eq!(a.len(), 12);
        assert_eq!(a.class_counts(), vec![3; 4]);
        assert_eq!(a, synthetic_textures(4, 3, 0.1, 5, Split::Train));
        assert_ne!(a, synthetic_textures(4, 3, 0.1, 6, Split::Train));
    }
}
