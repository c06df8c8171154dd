//! Scattering-time benchmarks.

use super::PipelineError;
use crate::dtcwt::{forward, FilterSet, Plane, ORIENTATIONS};
use crate::image::ColorImage;
use crate::scatter::{log_transform, modulus, smooth_to_invariance, Extractor, Resolution, ScatterConfig, SecondLayerRule};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub stage: String,
    pub mean_seconds: f64,
    /// Sample standard deviation; zero for a single sample.
    pub std_seconds: f64,
    pub samples: usize,
}

impl StageStats {
    pub fn from_samples(stage: &str, samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 {
            samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        StageStats {
            stage: stage.to_string(),
            mean_seconds: mean,
            std_seconds: var.sqrt(),
            samples: n,
        }
    }
}

pub const STAGES: [&str; 6] = ["forward", "modulus", "log", "smoothing", "layer2", "total"];

fn random_plane(rng: &mut ChaCha8Rng, side: usize) -> Plane {
    Plane::from_fn(side, side, |_, _| rng.random())
}

/// Times each stage of one single-channel scattering pass at `res`,
/// `iterations` times on fresh random planes.
pub fn bench_stages(
    config: &ScatterConfig,
    res: Resolution,
    filters: &FilterSet,
    iterations: usize,
    seed: u64,
) -> Result<Vec<StageStats>, PipelineError> {
    if iterations == 0 {
        return Err(PipelineError::Usage("iterations must be at least 1".into()));
    }
    let config = ScatterConfig {
        resolutions: vec![res],
        ..config.clone()
    };
    config.validate()?;
    let (levels, big_j) = (res.levels, res.j());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![Vec::with_capacity(iterations); STAGES.len()];
    for _ in 0..iterations {
        let image = random_plane(&mut rng, res.side);
        let mut t = [0.0; 6];

        let s = Instant::now();
        let pyramid = forward(&image, levels, filters)?;
        t[0] = s.elapsed().as_secs_f64();

        let s = Instant::now();
        let mut u1 = modulus(&pyramid);
        t[1] = s.elapsed().as_secs_f64();

        let s = Instant::now();
        for env in &mut u1 {
            if let Some(k) = config.log_offset(env.scale, levels) {
                env.values = log_transform(&env.values, k)?;
            }
        }
        t[2] = s.elapsed().as_secs_f64();

        let s = Instant::now();
        let mut kept = vec![smooth_to_invariance(&image, 0, big_j, filters)?];
        for env in &u1 {
            kept.push(smooth_to_invariance(&env.values, env.scale, big_j, filters)?);
        }
        t[3] = s.elapsed().as_secs_f64();

        let s = Instant::now();
        if config.second_layer == SecondLayerRule::IncreasingScale {
            for env in u1.iter().filter(|e| e.scale < levels) {
                let p = forward(&env.values, levels - env.scale, filters)?;
                for u2 in modulus(&p) {
                    kept.push(smooth_to_invariance(&u2.values, env.scale + u2.scale, big_j, filters)?);
                }
            }
        }
        t[4] = s.elapsed().as_secs_f64();
        std::hint::black_box(&kept);

        t[5] = t[..5].iter().sum();
        for (acc, v) in samples.iter_mut().zip(t) {
            acc.push(v);
        }
    }
    Ok(STAGES.iter().zip(&samples).map(|(name, s)| StageStats::from_samples(name, s)).collect())
}

/// First-layer envelopes computed the Fourier way: one full-size FFT of the
/// image, then a pointwise product and inverse FFT per band, without
/// decimation.
pub struct FftReference {
    side: usize,
    bands: Vec<Vec<Complex64>>,
    forward_fft: Arc<dyn Fft<f64>>,
    inverse_fft: Arc<dyn Fft<f64>>,
}

impl FftReference {
    /// Oriented Gaussian bands matching the wavelet scales and orientations.
    pub fn new(side: usize, scales: usize) -> Self {
        let mut planner = FftPlanner::new();
        let freq = |k: usize| {
            let k = k as f64;
            let n = side as f64;
            2.0 * std::f64::consts::PI * if k < n / 2.0 { k } else { k - n } / n
        };
        let mut bands = Vec::with_capacity(scales * ORIENTATIONS);
        for j in 0..scales {
            let xi = 0.75 * std::f64::consts::PI / f64::powi(2.0, j as i32);
            let sigma = 0.4 * xi;
            for r in 0..ORIENTATIONS {
                let theta = (15.0 + 30.0 * r as f64).to_radians();
                let (cy, cx) = (xi * theta.sin(), xi * theta.cos());
                let mut h = Vec::with_capacity(side * side);
                for ky in 0..side {
                    for kx in 0..side {
                        let d2 = (freq(ky) - cy).powi(2) + (freq(kx) - cx).powi(2);
                        h.push(Complex64::new((-d2 / (2.0 * sigma * sigma)).exp(), 0.0));
                    }
                }
                bands.push(h);
            }
        }
        FftReference {
            side,
            bands,
            forward_fft: planner.plan_fft_forward(side),
            inverse_fft: planner.plan_fft_inverse(side),
        }
    }

    fn fft2(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.side;
        fft.process(data);
        let mut col = vec![Complex64::default(); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            fft.process(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn envelopes(&self, image: &Plane) -> Vec<Plane> {
        let n = self.side;
        let mut spectrum: Vec<Complex64> = image.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft2(&mut spectrum, &self.forward_fft);
        let scale = 1.0 / (n * n) as f64;
        self.bands
            .iter()
            .map(|h| {
                let mut prod: Vec<Complex64> = spectrum.iter().zip(h).map(|(a, b)| a * b).collect();
                self.fft2(&mut prod, &self.inverse_fft);
                Plane::from_vec(n, n, prod.iter().map(|z| z.norm() * scale).collect())
            })
            .collect()
    }
}

/// `(spatial, fft)` timings of first-layer envelopes on `side²` planes.
pub fn compare_first_layer(
    side: usize,
    levels: usize,
    filters: &FilterSet,
    iterations: usize,
    seed: u64,
) -> Result<(StageStats, StageStats), PipelineError> {
    if iterations == 0 {
        return Err(PipelineError::Usage("iterations must be at least 1".into()));
    }
    let reference = FftReference::new(side, levels);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut spatial, mut fourier) = (Vec::new(), Vec::new());
    for _ in 0..iterations {
        let image = random_plane(&mut rng, side);
        let s = Instant::now();
        std::hint::black_box(modulus(&forward(&image, levels, filters)?));
        spatial.push(s.elapsed().as_secs_f64());
        let s = Instant::now();
        std::hint::black_box(reference.envelopes(&image));
        fourier.push(s.elapsed().as_secs_f64());
    }
    Ok((
        StageStats::from_samples("dtcwt first layer", &spatial),
        StageStats::from_samples("fft per band", &fourier),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionTiming {
    pub label: String,
    pub per_image_seconds: f64,
}

/// Per-image extraction time for each single resolution of `config` and for
/// all of them together. Configurations are timed in interleaved rounds on a
/// single thread and the median round is kept.
pub fn bench_resolutions(
    config: &ScatterConfig,
    filters: &FilterSet,
    image_count: usize,
    rounds: usize,
    seed: u64,
) -> Result<Vec<ResolutionTiming>, PipelineError> {
    if image_count == 0 || rounds == 0 {
        return Err(PipelineError::Usage("image count and rounds must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images: Vec<ColorImage> = (0..image_count)
        .map(|_| ColorImage::new((0..config.channels).map(|_| random_plane(&mut rng, 32)).collect()))
        .collect();
    let mut setups = Vec::new();
    for (i, res) in config.resolutions.iter().enumerate() {
        let single = ScatterConfig {
            resolutions: vec![*res],
            ..config.clone()
        };
        setups.push((format!("R{} ({}x{}, {} levels)", i + 1, res.side, res.side, res.levels), single));
    }
    if config.resolutions.len() > 1 {
        let label = (1..=config.resolutions.len()).map(|i| format!("R{i}")).collect::<Vec<_>>().join("+");
        setups.push((label, config.clone()));
    }
    let extractors = setups
        .iter()
        .map(|(_, c)| Extractor::new(c.clone(), filters.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut per_round = vec![Vec::with_capacity(rounds); setups.len()];
    for _ in 0..rounds {
        for (ex, acc) in extractors.iter().zip(per_round.iter_mut()) {
            let s = Instant::now();
            for img in &images {
                std::hint::black_box(ex.extract_values(img)?);
            }
            acc.push(s.elapsed().as_secs_f64() / image_count as f64);
        }
    }
    Ok(setups
        .into_iter()
        .zip(per_round)
        .map(|((label, _), mut t)| {
            t.sort_by(f64::total_cmp);
            ResolutionTiming {
                label,
                per_image_seconds: t[t.len() / 2],
            }
        })
        .collect())
}

/// `|t(all) − Σ t(single)| / Σ t(single)` for a [`bench_resolutions`] result
/// with at least two resolutions.
pub fn additivity_error(timings: &[ResolutionTiming]) -> Option<f64> {
    let (combined, singles) = timings.split_last()?;
    if singles.len() < 2 {
        return None;
    }
    let sum: f64 = singles.iter().map(|t| t.per_image_seconds).sum();
    Some((combined.per_image_seconds - sum).abs() / sum)
}

pub fn stages_markdown(title: &str, stats: &[StageStats]) -> String {
    let mut out = format!("### {title}\n\n| stage | mean (ms) | std (ms) | samples |\n|---|---:|---:|---:|\n");
    for s in stats {
        let _ = writeln!(
            out,
            "| {} | {:.4} | {:.4} | {} |",
            s.stage,
            s.mean_seconds * 1e3,
            s.std_seconds * 1e3,
            s.samples
        );
    }
    out
}

pub fn resolutions_markdown(timings: &[ResolutionTiming]) -> String {
    let mut out = String::from("### Per-image scattering time\n\n| configuration | seconds / image |\n|---|---:|\n");
    for t in timings {
        let _ = writeln!(out, "| {} | {:.5} |", t.label, t.per_image_seconds);
    }
    if let Some(e) = additivity_error(timings) {
        let _ = writeln!(out, "\ncombined vs. sum of singles: {:.1}% apart", e * 100.0);
    }
    out
}
