use super::envelope::{log_transform, modulus, tune_log_param, EnvelopePlane, LogParamReport};
use super::smooth::smooth_to_invariance;
use super::upsample::upsample;
use super::{FeatureDescriptor, LogMode, Resolution, ScatterConfig, ScatterError, SecondLayerRule};
use crate::dtcwt::{forward, FilterSet, Plane, ORIENTATIONS};
use crate::image::ColorImage;
use rayon::prelude::*;
use std::sync::Arc;

/// Smoothed coefficient planes of one channel at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterLayers {
    pub s0: Plane,
    /// `(j1, r1, plane)` ordered by scale then orientation.
    pub s1: Vec<(usize, usize, Plane)>,
    /// `(j1, j2, r1, r2, plane)` ordered by scale path then orientation path.
    pub s2: Vec<(usize, usize, usize, usize, Plane)>,
}

impl ScatterLayers {
    /// Every coefficient in flattening order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.s0.as_slice().to_vec();
        for (.., p) in &self.s1 {
            out.extend_from_slice(p.as_slice());
        }
        for (.., p) in &self.s2 {
            out.extend_from_slice(p.as_slice());
        }
        out
    }
}

fn resolution_for(config: &ScatterConfig, plane: &Plane) -> Result<Resolution, ScatterError> {
    config
        .resolutions
        .iter()
        .find(|r| r.side == plane.height() && r.side == plane.width())
        .copied()
        .ok_or(ScatterError::ResolutionMismatch {
            height: plane.height(),
            width: plane.width(),
        })
}

fn check_log_resolved(config: &ScatterConfig) -> Result<(), ScatterError> {
    if config.log.mode == LogMode::Auto {
        return Err(ScatterError::InvalidConfig(
            "log offsets are set to auto; tune them before extracting".into(),
        ));
    }
    Ok(())
}

fn first_layer(
    plane: &Plane,
    res: &Resolution,
    config: &ScatterConfig,
    filters: &FilterSet,
) -> Result<Vec<EnvelopePlane>, ScatterError> {
    let pyramid = forward(plane, res.levels, filters)?;
    modulus(&pyramid)
        .into_iter()
        .map(|mut env| {
            if let Some(k) = config.log_offset(env.scale, res.levels) {
                env.values = log_transform(&env.values, k)?;
            }
            Ok(env)
        })
        .collect()
}

/// Unsmoothed first-layer envelopes `U1` of a single-channel image, with the
/// log applied at every scale except the coarsest when enabled.
pub fn first_layer_envelopes(
    image: &Plane,
    config: &ScatterConfig,
    filters: &FilterSet,
) -> Result<Vec<EnvelopePlane>, ScatterError> {
    config.validate()?;
    check_log_resolved(config)?;
    let res = resolution_for(config, image)?;
    first_layer(image, &res, config, filters)
}

/// Scattering planes for one single-channel image whose side matches a
/// configured resolution.
pub fn scatter_layers(image: &Plane, config: &ScatterConfig, filters: &FilterSet) -> Result<ScatterLayers, ScatterError> {
    config.validate()?;
    check_log_resolved(config)?;
    let res = resolution_for(config, image)?;
    let (levels, big_j) = (res.levels, res.j());

    let s0 = smooth_to_invariance(image, 0, big_j, filters)?;
    let u1 = first_layer(image, &res, config, filters)?;

    let mut s1 = Vec::with_capacity(u1.len());
    for env in &u1 {
        s1.push((env.scale, env.orientation, smooth_to_invariance(&env.values, env.scale, big_j, filters)?));
    }

    let mut s2 = Vec::new();
    if config.second_layer == SecondLayerRule::IncreasingScale {
        for env in u1.iter().filter(|e| e.scale < levels) {
            let j1 = env.scale;
            let pyramid = forward(&env.values, levels - j1, filters)?;
            for u2 in modulus(&pyramid) {
                let j2 = j1 + u2.scale;
                let plane = smooth_to_invariance(&u2.values, j2, big_j, filters)?;
                s2.push((j1, j2, env.orientation, u2.orientation, plane));
            }
        }
        s2.sort_by_key(|&(j1, j2, r1, r2, _)| (j1, j2, r1, r2));
    }
    Ok(ScatterLayers { s0, s1, s2 })
}

/// Descriptor of every feature, in vector order.
pub fn feature_layout(config: &ScatterConfig) -> Vec<FeatureDescriptor> {
    let channels = config.channels;
    let log_on = config.log.enabled();
    let mut out = Vec::new();
    for (ri, res) in config.resolutions.iter().enumerate() {
        let cells = res.cells_per_side();
        let levels = res.levels;
        let mut push = |layer: u8, j1: Option<usize>, j2: Option<usize>, r1: Option<usize>, r2: Option<usize>, logged: bool| {
            for row in 0..cells {
                for col in 0..cells {
                    for channel in 0..channels {
                        out.push(FeatureDescriptor {
                            resolution: ri as u8,
                            layer,
                            j1: j1.map(|v| v as u8),
                            j2: j2.map(|v| v as u8),
                            r1: r1.map(|v| v as u8),
                            r2: r2.map(|v| v as u8),
                            row: row as u16,
                            col: col as u16,
                            channel: channel as u8,
                            log_applied: logged,
                        });
                    }
                }
            }
        };
        push(0, None, None, None, None, false);
        for j1 in 1..=levels {
            for r1 in 0..ORIENTATIONS {
                push(1, Some(j1), None, Some(r1), None, log_on && j1 < levels);
            }
        }
        if config.second_layer == SecondLayerRule::IncreasingScale {
            for j1 in 1..levels {
                for j2 in j1 + 1..=levels {
                    for r1 in 0..ORIENTATIONS {
                        for r2 in 0..ORIENTATIONS {
                            push(2, Some(j1), Some(j2), Some(r1), Some(r2), log_on);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Flat feature vector with its shared index map.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterFeatureVector {
    pub values: Vec<f64>,
    pub index_map: Arc<[FeatureDescriptor]>,
}

/// Reusable feature extractor for one configuration.
#[derive(Debug, Clone)]
pub struct Extractor {
    config: ScatterConfig,
    filters: FilterSet,
    layout: Arc<[FeatureDescriptor]>,
}

impl Extractor {
    pub fn new(config: ScatterConfig, filters: FilterSet) -> Result<Self, ScatterError> {
        config.validate()?;
        check_log_resolved(&config)?;
        let layout = feature_layout(&config).into();
        Ok(Extractor { config, filters, layout })
    }

    pub fn config(&self) -> &ScatterConfig {
        &self.config
    }

    pub fn filters(&self) -> &FilterSet {
        &self.filters
    }

    pub fn layout(&self) -> &Arc<[FeatureDescriptor]> {
        &self.layout
    }

    /// Vector length, fixed by the configuration.
    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    pub fn extract_values(&self, image: &ColorImage) -> Result<Vec<f64>, ScatterError> {
        if image.channel_count() != self.config.channels {
            return Err(ScatterError::ChannelCount {
                expected: self.config.channels,
                got: image.channel_count(),
            });
        }
        let channels = self.config.channels;
        let mut out = Vec::with_capacity(self.len());
        for res in &self.config.resolutions {
            let resized = upsample(image, res.side)?;
            let per_channel = resized
                .channels()
                .iter()
                .map(|p| scatter_layers(p, &self.config, &self.filters).map(|l| l.flatten()))
                .collect::<Result<Vec<_>, _>>()?;
            let block = per_channel[0].len();
            for i in 0..block {
                for ch in per_channel.iter().take(channels) {
                    out.push(ch[i]);
                }
            }
        }
        debug_assert_eq!(out.len(), self.len());
        Ok(out)
    }

    pub fn extract(&self, image: &ColorImage) -> Result<ScatterFeatureVector, ScatterError> {
        Ok(ScatterFeatureVector {
            values: self.extract_values(image)?,
            index_map: self.layout.clone(),
        })
    }

    /// Extracts every image in parallel; output order follows input order.
    pub fn extract_batch(&self, images: &[ColorImage]) -> Result<Vec<Vec<f64>>, ScatterError> {
        images.par_iter().map(|img| self.extract_values(img)).collect()
    }
}

/// One-shot extraction; prefer [`Extractor`] for many images.
pub fn extract_features(
    image: &ColorImage,
    config: &ScatterConfig,
    filters: &FilterSet,
) -> Result<ScatterFeatureVector, ScatterError> {
    Extractor::new(config.clone(), filters.clone())?.extract(image)
}

/// Chooses `k_j` for every logged scale from first-layer envelopes of
/// `images` at the deepest configured resolution.
pub fn tune_log_params(
    images: &[ColorImage],
    config: &ScatterConfig,
    filters: &FilterSet,
    grid: &[f64],
) -> Result<LogParamReport, ScatterError> {
    if images.is_empty() {
        return Err(ScatterError::EmptyInput("log tuning images"));
    }
    let res = *config
        .resolutions
        .iter()
        .max_by_key(|r| r.levels)
        .ok_or_else(|| ScatterError::InvalidConfig("no resolutions".into()))?;
    let raw = ScatterConfig {
        log: super::LogParams::off(),
        ..config.clone()
    };
    let per_image: Vec<Vec<Vec<f64>>> = images
        .par_iter()
        .map(|img| {
            let mut by_scale = vec![Vec::new(); res.levels - 1];
            for p in upsample(img, res.side)?.channels() {
                for env in first_layer(p, &res, &raw, filters)? {
                    if env.scale < res.levels {
                        by_scale[env.scale - 1].extend_from_slice(env.values.as_slice());
                    }
                }
            }
            Ok(by_scale)
        })
        .collect::<Result<_, ScatterError>>()?;

    let mut report = LogParamReport::default();
    for j in 0..res.levels - 1 {
        let samples: Vec<f64> = per_image.iter().flat_map(|s| s[j].iter().copied()).collect();
        let (_, mut scale_report) = tune_log_param(&samples, grid)?;
        scale_report.scale = j + 1;
        report.scales.push(scale_report);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::super::{LogParams, ScatterConfig};
    use super::*;
    use crate::dtcwt::load_default_filters;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn random_plane(rng: &mut ChaCha8Rng, n: usize) -> Plane {
        Plane::from_fn(n, n, |_, _| rng.random())
    }

    fn random_image(rng: &mut ChaCha8Rng) -> ColorImage {
        ColorImage::new((0..3).map(|_| random_plane(rng, 32)).collect())
    }

    #[test]
    fn constant_image_has_zero_detail_layers() {
        let f = load_default_filters();
        let cfg = ScatterConfig {
            log: LogParams::off(),
            ..ScatterConfig::default()
        };
        let l = scatter_layers(&Plane::filled(64, 64, 0.4), &cfg, &f).unwrap();
        assert!(l.s0.as_slice().iter().all(|&v| (v - 0.4).abs() < 1e-12));
        assert!(l.s1.iter().all(|(.., p)| p.as_slice().iter().all(|v| v.abs() < 1e-10)));
        assert!(l.s2.iter().all(|(.., p)| p.as_slice().iter().all(|v| v.abs() < 1e-10)));
    }

    #[test]
    fn constant_image_with_log_gives_log_k() {
        let f = load_default_filters();
        let cfg = ScatterConfig::default();
        let l = scatter_layers(&Plane::filled(64, 64, 0.4), &cfg, &f).unwrap();
        for (j, _, p) in &l.s1 {
            let want = cfg.log_offset(*j, 5).map_or(0.0, f64::ln);
            assert!(p.as_slice().iter().all(|v| (v - want).abs() < 1e-9), "scale {j}");
        }
        assert!(l.s2.iter().all(|(.., p)| p.as_slice().iter().all(|v| v.abs() < 1e-9)));
    }

    #[test]
    fn second_layer_paths_follow_rule() {
        let f = load_default_filters();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l = scatter_layers(&random_plane(&mut rng, 64), &ScatterConfig::default(), &f).unwrap();
        let paths: HashSet<(usize, usize)> = l.s2.iter().map(|&(a, b, ..)| (a, b)).collect();
        let want: HashSet<(usize, usize)> = (1..=5).flat_map(|a| (a + 1..=5).map(move |b| (a, b))).collect();
        assert_eq!(paths, want);
        assert_eq!(paths.len(), 10);
        assert_eq!(l.s2.len(), 10 * 36);
        assert!(l.s2.iter().all(|(.., p)| p.height() == 2 && p.width() == 2));
        assert_eq!(l.s1.len(), 30);
    }

    #[test]
    fn rejects_unconfigured_size() {
        let f = load_default_filters();
        let err = scatter_layers(&Plane::zeros(40, 40), &ScatterConfig::default(), &f);
        assert!(matches!(err, Err(ScatterError::ResolutionMismatch { .. })));
    }

    #[test]
    fn default_vector_length() {
        let layout = feature_layout(&ScatterConfig::default());
        // R1: (4 + 5*6*4 + 10*36*4) * 3, R2: (9 + 4*6*9 + 6*36*9) * 3
        assert_eq!(layout.len(), 4692 + 6507);
    }

    #[test]
    fn layout_matches_extraction_and_is_unique() {
        let f = load_default_filters();
        let ex = Extractor::new(ScatterConfig::default(), f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = ex.extract(&random_image(&mut rng)).unwrap();
        assert_eq!(v.values.len(), v.index_map.len());
        let set: HashSet<_> = v.index_map.iter().collect();
        assert_eq!(set.len(), v.index_map.len());
    }

    #[test]
    fn identical_images_identical_vectors() {
        let f = load_default_filters();
        let ex = Extractor::new(ScatterConfig::default(), f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let img = random_image(&mut rng);
        let a = ex.extract_values(&img).unwrap();
        let b = ex.extract_values(&img.clone()).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn replicated_grey_gives_identical_channels() {
        let f = load_default_filters();
        let ex = Extractor::new(ScatterConfig::default(), f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let img = ColorImage::replicate(random_plane(&mut rng, 32), 3);
        let v = ex.extract_values(&img).unwrap();
        for chunk in v.chunks_exact(3) {
            assert_eq!(chunk[0], chunk[1]);
            assert_eq!(chunk[1], chunk[2]);
        }
    }

    #[test]
    fn coarsest_scale_bypasses_log() {
        let cfg = ScatterConfig::default();
        for d in feature_layout(&cfg) {
            let levels = cfg.resolutions[d.resolution as usize].levels as u8;
            match d.layer {
                0 => assert!(!d.log_applied),
                1 => assert_eq!(d.log_applied, d.j1.unwrap() < levels),
                _ => assert!(d.log_applied && d.j1.unwrap() < levels),
            }
        }
        let off = ScatterConfig {
            log: LogParams::off(),
            ..cfg
        };
        assert!(feature_layout(&off).iter().all(|d| !d.log_applied));
    }

    #[test]
    fn coarsest_scale_values_ignore_k() {
        // Changing k at every logged scale must leave the coarsest S1 planes alone.
        let f = load_default_filters();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_plane(&mut rng, 64);
        let a = scatter_layers(&x, &ScatterConfig::default(), &f).unwrap();
        let mut cfg = ScatterConfig::default();
        cfg.log.k = vec![0.5, 0.5, 0.5, 0.5];
        let b = scatter_layers(&x, &cfg, &f).unwrap();
        for ((j, _, pa), (_, _, pb)) in a.s1.iter().zip(&b.s1) {
            assert_eq!(*j == 5, pa == pb, "scale {j}");
        }
    }

    #[test]
    fn channel_count_checked() {
        let f = load_default_filters();
        let ex = Extractor::new(ScatterConfig::default(), f).unwrap();
        let img = ColorImage::replicate(Plane::zeros(32, 32), 1);
        assert!(matches!(ex.extract(&img), Err(ScatterError::ChannelCount { expected: 3, got: 1 })));
    }

    #[test]
    fn auto_log_must_be_resolved() {
        let cfg = ScatterConfig {
            log: LogParams::auto(),
            ..ScatterConfig::default()
        };
        assert!(Extractor::new(cfg.clone(), load_default_filters()).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let imgs: Vec<ColorImage> = (0..2).map(|_| random_image(&mut rng)).collect();
        let report = tune_log_params(&imgs, &cfg, &load_default_filters(), &super::super::default_log_grid()).unwrap();
        assert_eq!(report.scales.len(), 4);
        assert_eq!(report.scales[0].sample_count, 2 * 3 * 6 * 32 * 32);
        let tuned = ScatterConfig {
            log: LogParams::fixed(report.ks()),
            ..cfg
        };
        assert!(Extractor::new(tuned, load_default_filters()).is_ok());
    }

    fn shift_ratio(x: &Plane, levels: usize, big_j: usize, shift: isize, f: &FilterSet) -> f64 {
        let mut res = Resolution::new(x.height(), levels);
        res.invariance_scale = Some(big_j);
        let cfg = ScatterConfig {
            resolutions: vec![res],
            channels: 1,
            ..ScatterConfig::default()
        };
        let a = scatter_layers(x, &cfg, f).unwrap().flatten();
        let b = scatter_layers(&x.circular_shift(shift, shift), &cfg, f).unwrap().flatten();
        let d: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        d / a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn invariance_improves_with_j() {
        let f = load_default_filters();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let images: Vec<Plane> = (0..20).map(|_| random_plane(&mut rng, 64)).collect();
        let mut prev = f64::INFINITY;
        for big_j in 2..=5 {
            let mean = images.iter().map(|x| shift_ratio(x, 2, big_j, 2, &f)).sum::<f64>() / 20.0;
            assert!(mean <= prev, "J={big_j}: {mean} > {prev}");
            prev = mean;
        }
    }
}
