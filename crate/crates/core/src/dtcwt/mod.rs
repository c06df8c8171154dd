//! Two-dimensional dual-tree complex wavelet transform.
//!
//! The forward transform produces six oriented complex subbands per level
//! (15°, 45°, 75°, 105°, 135°, 165°) plus a real lowpass plane. Angles give
//! the orientation of the stripes a band responds to, measured
//! counter-clockwise from the horizontal axis with rows running downward.
//!
//! Level 1 is undecimated in the filter domain; its complex coefficients are
//! formed from 2×2 quads of the real outputs (the odd/even split that
//! separates the two trees). Levels 2 and above decimate with Q-shift
//! filters. Subband `j` has shape `⌈h/2^j⌉ × ⌈w/2^j⌉`; the lowpass of a
//! `J`-level transform holds both trees interleaved at `2⌈h/2^J⌉ × 2⌈w/2^J⌉`.

mod filters;
pub(crate) mod lowlevel;
mod plane;

pub use filters::{load_default_filters, FilterSet};
pub use plane::{ComplexPlane, Plane};

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

/// Number of oriented subbands per level.
pub const ORIENTATIONS: usize = 6;

/// Band orientations in degrees, in subband order.
pub const ORIENTATION_DEGREES: [f64; ORIENTATIONS] = [15.0, 45.0, 75.0, 105.0, 135.0, 165.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DtcwtError {
    #[error("levels must be at least 1")]
    NoLevels,
    #[error("{height}x{width} input is too small for {levels} levels (needs at least {min} per side)")]
    DimensionTooSmall {
        height: usize,
        width: usize,
        levels: usize,
        min: usize,
    },
    #[error("input contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("pyramid shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Output of one forward transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DtcwtPyramid {
    /// `subbands[j - 1][r]` is scale `j`, orientation `r`.
    pub subbands: Vec<[ComplexPlane; ORIENTATIONS]>,
    pub lowpass: Plane,
    /// Input shape before odd-size extension, `(height, width)`.
    pub original_shape: (usize, usize),
}

impl DtcwtPyramid {
    pub fn levels(&self) -> usize {
        self.subbands.len()
    }

    /// Pyramid of the same shape with every coefficient zero.
    pub fn zeros_like(&self) -> Self {
        DtcwtPyramid {
            subbands: self
                .subbands
                .iter()
                .map(|bands| bands.clone().map(|b| ComplexPlane::zeros(b.height(), b.width())))
                .collect(),
            lowpass: Plane::zeros(self.lowpass.height(), self.lowpass.width()),
            original_shape: self.original_shape,
        }
    }
}

/// Result of the one-dimensional dual-tree analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtcwt1d {
    /// Complex detail sequence per level, finest first.
    pub details: Vec<Vec<Complex64>>,
    pub lowpass: Vec<f64>,
    pub original_len: usize,
}

fn check_finite(values: &[f64]) -> Result<(), DtcwtError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(DtcwtError::NonFinite(i)),
        None => Ok(()),
    }
}

/// Pairs of real quads to complex coefficients: returns the `p - q` and
/// `p + q` bands.
fn quads_to_complex(y: &Plane) -> (ComplexPlane, ComplexPlane) {
    let h = y.height() / 2;
    let w = y.width() / 2;
    let mut lo = ComplexPlane::zeros(h, w);
    let mut hi = ComplexPlane::zeros(h, w);
    for r in 0..h {
        for c in 0..w {
            let a = y.get(2 * r, 2 * c);
            let b = y.get(2 * r, 2 * c + 1);
            let cc = y.get(2 * r + 1, 2 * c);
            let d = y.get(2 * r + 1, 2 * c + 1);
            let p = Complex64::new(a, b) * FRAC_1_SQRT_2;
            let q = Complex64::new(d, -cc) * FRAC_1_SQRT_2;
            lo.set(r, c, p - q);
            hi.set(r, c, p + q);
        }
    }
    (lo, hi)
}

/// Inverse of [`quads_to_complex`].
fn complex_to_quads(first: &ComplexPlane, second: &ComplexPlane) -> Plane {
    let (h, w) = (first.height(), first.width());
    let mut x = Plane::zeros(2 * h, 2 * w);
    for r in 0..h {
        for c in 0..w {
            let p = (first.get(r, c) + second.get(r, c)) * FRAC_1_SQRT_2;
            let q = (first.get(r, c) - second.get(r, c)) * FRAC_1_SQRT_2;
            x.set(2 * r, 2 * c, p.re);
            x.set(2 * r, 2 * c + 1, p.im);
            x.set(2 * r + 1, 2 * c, q.im);
            x.set(2 * r + 1, 2 * c + 1, -q.re);
        }
    }
    x
}

/// Duplicates the first and last row (and/or column) so both sides are
/// multiples of 4 before a Q-shift decimation.
fn pad_to_multiple_of_four(p: Plane) -> Plane {
    let mut p = p;
    if p.height() % 4 != 0 {
        p = p.extend_rows();
    }
    if p.width() % 4 != 0 {
        p = p.extend_cols();
    }
    p
}

fn validate_image(image: &Plane, levels: usize) -> Result<(), DtcwtError> {
    if levels == 0 {
        return Err(DtcwtError::NoLevels);
    }
    let min = 1usize << levels;
    if image.height() < min || image.width() < min {
        return Err(DtcwtError::DimensionTooSmall {
            height: image.height(),
            width: image.width(),
            levels,
            min,
        });
    }
    check_finite(image.as_slice())
}

/// Forward 2D transform to `levels` scales.
pub fn forward(image: &Plane, levels: usize, filters: &FilterSet) -> Result<DtcwtPyramid, DtcwtError> {
    validate_image(image, levels)?;
    let original_shape = (image.height(), image.width());
    let mut x = image.clone();
    if x.height() % 2 == 1 {
        x = x.append_last_row();
    }
    if x.width() % 2 == 1 {
        x = x.append_last_col();
    }

    let h0o = &filters.level1_lowpass;
    let h1o = &filters.level1_highpass;
    let lo = x.map_cols(|c| lowlevel::filter(c, h0o));
    let hi = x.map_cols(|c| lowlevel::filter(c, h1o));
    let mut lolo = lo.map_rows(|r| lowlevel::filter(r, h0o));

    let mut subbands = Vec::with_capacity(levels);
    subbands.push(assemble_bands(
        &hi.map_rows(|r| lowlevel::filter(r, h0o)),
        &lo.map_rows(|r| lowlevel::filter(r, h1o)),
        &hi.map_rows(|r| lowlevel::filter(r, h1o)),
    ));

    let (h0a, h0b) = (&filters.qshift_lowpass_a, &filters.qshift_lowpass_b);
    let (h1a, h1b) = (&filters.qshift_highpass_a, &filters.qshift_highpass_b);
    for _ in 1..levels {
        let padded = pad_to_multiple_of_four(lolo);
        let lo = padded.map_cols(|c| lowlevel::filter_decimate(c, h0b, h0a));
        let hi = padded.map_cols(|c| lowlevel::filter_decimate(c, h1b, h1a));
        lolo = lo.map_rows(|r| lowlevel::filter_decimate(r, h0b, h0a));
        subbands.push(assemble_bands(
            &hi.map_rows(|r| lowlevel::filter_decimate(r, h0b, h0a)),
            &lo.map_rows(|r| lowlevel::filter_decimate(r, h1b, h1a)),
            &hi.map_rows(|r| lowlevel::filter_decimate(r, h1b, h1a)),
        ));
    }

    Ok(DtcwtPyramid {
        subbands,
        lowpass: lolo,
        original_shape,
    })
}

/// `hl`: vertical highpass, horizontal lowpass (bands 15° and 165°);
/// `lh`: vertical lowpass, horizontal highpass (75°, 105°);
/// `hh`: diagonal (45°, 135°).
fn assemble_bands(hl: &Plane, lh: &Plane, hh: &Plane) -> [ComplexPlane; ORIENTATIONS] {
    let (b15, b165) = quads_to_complex(hl);
    let (b75, b105) = quads_to_complex(lh);
    let (b45, b135) = quads_to_complex(hh);
    [b15, b45, b75, b105, b135, b165]
}

/// Inverse 2D transform.
pub fn inverse(pyramid: &DtcwtPyramid, filters: &FilterSet) -> Result<Plane, DtcwtError> {
    let levels = pyramid.levels();
    if levels == 0 {
        return Err(DtcwtError::NoLevels);
    }
    for (j, bands) in pyramid.subbands.iter().enumerate() {
        let (h, w) = (bands[0].height(), bands[0].width());
        if bands.iter().any(|b| b.height() != h || b.width() != w) {
            return Err(DtcwtError::ShapeMismatch(format!(
                "level {} bands have differing shapes",
                j + 1
            )));
        }
    }
    let coarsest = &pyramid.subbands[levels - 1][0];
    if levels > 1
        && (pyramid.lowpass.height() != 2 * coarsest.height()
            || pyramid.lowpass.width() != 2 * coarsest.width())
    {
        return Err(DtcwtError::ShapeMismatch(format!(
            "lowpass is {}x{}, expected {}x{}",
            pyramid.lowpass.height(),
            pyramid.lowpass.width(),
            2 * coarsest.height(),
            2 * coarsest.width()
        )));
    }

    let (g0a, g0b) = (&filters.qshift_synth_lowpass_a, &filters.qshift_synth_lowpass_b);
    let (g1a, g1b) = (&filters.qshift_synth_highpass_a, &filters.qshift_synth_highpass_b);
    let mut z = pyramid.lowpass.clone();
    for level in (2..=levels).rev() {
        let bands = &pyramid.subbands[level - 1];
        let hl = complex_to_quads(&bands[0], &bands[5]);
        let lh = complex_to_quads(&bands[2], &bands[3]);
        let hh = complex_to_quads(&bands[1], &bands[4]);
        let y1 = z
            .map_cols(|c| lowlevel::filter_interpolate(c, g0b, g0a))
            .add(&hl.map_cols(|c| lowlevel::filter_interpolate(c, g1b, g1a)));
        let y2 = lh
            .map_cols(|c| lowlevel::filter_interpolate(c, g0b, g0a))
            .add(&hh.map_cols(|c| lowlevel::filter_interpolate(c, g1b, g1a)));
        z = y1
            .map_rows(|r| lowlevel::filter_interpolate(r, g0b, g0a))
            .add(&y2.map_rows(|r| lowlevel::filter_interpolate(r, g1b, g1a)));

        let next = &pyramid.subbands[level - 2][0];
        let (th, tw) = (2 * next.height(), 2 * next.width());
        if z.height() != th {
            z = z.crop(1, 0, z.height().saturating_sub(2), z.width());
        }
        if z.width() != tw {
            z = z.crop(0, 1, z.height(), z.width().saturating_sub(2));
        }
        if z.height() != th || z.width() != tw {
            return Err(DtcwtError::ShapeMismatch(format!(
                "level {level} reconstructs to {}x{}, expected {th}x{tw}",
                z.height(),
                z.width()
            )));
        }
    }

    let bands = &pyramid.subbands[0];
    if z.height() != 2 * bands[0].height() || z.width() != 2 * bands[0].width() {
        return Err(DtcwtError::ShapeMismatch("level 1 does not match lowpass".into()));
    }
    let (g0o, g1o) = (&filters.level1_synth_lowpass, &filters.level1_synth_highpass);
    let hl = complex_to_quads(&bands[0], &bands[5]);
    let lh = complex_to_quads(&bands[2], &bands[3]);
    let hh = complex_to_quads(&bands[1], &bands[4]);
    let y1 = z
        .map_cols(|c| lowlevel::filter(c, g0o))
        .add(&hl.map_cols(|c| lowlevel::filter(c, g1o)));
    let y2 = lh
        .map_cols(|c| lowlevel::filter(c, g0o))
        .add(&hh.map_cols(|c| lowlevel::filter(c, g1o)));
    let z = y1
        .map_rows(|r| lowlevel::filter(r, g0o))
        .add(&y2.map_rows(|r| lowlevel::filter(r, g1o)));

    let (oh, ow) = pyramid.original_shape;
    if oh > z.height() || ow > z.width() || z.height() - oh > 1 || z.width() - ow > 1 {
        return Err(DtcwtError::ShapeMismatch(format!(
            "original shape {oh}x{ow} incompatible with {}x{}",
            z.height(),
            z.width()
        )));
    }
    Ok(z.crop(0, 0, oh, ow))
}

/// One-dimensional dual-tree analysis.
pub fn decompose_1d(signal: &[f64], levels: usize, filters: &FilterSet) -> Result<Dtcwt1d, DtcwtError> {
    if levels == 0 {
        return Err(DtcwtError::NoLevels);
    }
    let min = 1usize << levels;
    if signal.len() < min {
        return Err(DtcwtError::DimensionTooSmall {
            height: 1,
            width: signal.len(),
            levels,
            min,
        });
    }
    check_finite(signal)?;
    let mut x = signal.to_vec();
    if x.len() % 2 == 1 {
        x.push(*x.last().unwrap());
    }
    let to_complex = |hi: &[f64]| -> Vec<Complex64> {
        hi.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
    };
    let hi = lowlevel::filter(&x, &filters.level1_highpass);
    let mut lo = lowlevel::filter(&x, &filters.level1_lowpass);
    let mut details = vec![to_complex(&hi)];
    for _ in 1..levels {
        if lo.len() % 4 != 0 {
            let (first, last) = (lo[0], lo[lo.len() - 1]);
            lo.insert(0, first);
            lo.push(last);
        }
        let hi = lowlevel::filter_decimate(&lo, &filters.qshift_highpass_b, &filters.qshift_highpass_a);
        lo = lowlevel::filter_decimate(&lo, &filters.qshift_lowpass_b, &filters.qshift_lowpass_a);
        details.push(to_complex(&hi));
    }
    Ok(Dtcwt1d {
        details,
        lowpass: lo,
        original_len: signal.len(),
    })
}

/// Inverse of [`decompose_1d`].
pub fn reconstruct_1d(coeffs: &Dtcwt1d, filters: &FilterSet) -> Result<Vec<f64>, DtcwtError> {
    let levels = coeffs.details.len();
    if levels == 0 {
        return Err(DtcwtError::NoLevels);
    }
    let to_real = |d: &[Complex64]| -> Vec<f64> { d.iter().flat_map(|z| [z.re, z.im]).collect() };
    let mut lo = coeffs.lowpass.clone();
    for level in (2..=levels).rev() {
        let hi = to_real(&coeffs.details[level - 1]);
        if hi.len() != lo.len() {
            return Err(DtcwtError::ShapeMismatch(format!(
                "level {level}: detail length {} vs lowpass {}",
                hi.len(),
                lo.len()
            )));
        }
        let a = lowlevel::filter_interpolate(&lo, &filters.qshift_synth_lowpass_b, &filters.qshift_synth_lowpass_a);
        let b = lowlevel::filter_interpolate(&hi, &filters.qshift_synth_highpass_b, &filters.qshift_synth_highpass_a);
        lo = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let target = 2 * coeffs.details[level - 2].len();
        if lo.len() != target {
            lo = lo[1..lo.len() - 1].to_vec();
        }
        if lo.len() != target {
            return Err(DtcwtError::ShapeMismatch(format!("level {level} length {}", lo.len())));
        }
    }
    let hi = to_real(&coeffs.details[0]);
    if hi.len() != lo.len() {
        return Err(DtcwtError::ShapeMismatch("level 1 length mismatch".into()));
    }
    let a = lowlevel::filter(&lo, &filters.level1_synth_lowpass);
    let b = lowlevel::filter(&hi, &filters.level1_synth_highpass);
    let mut out: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    if coeffs.original_len > out.len() || out.len() - coeffs.original_len > 1 {
        return Err(DtcwtError::ShapeMismatch("original length incompatible".into()));
    }
    out.truncate(coeffs.original_len);
    Ok(out)
}

#[cfg(test)]
mod tests;
