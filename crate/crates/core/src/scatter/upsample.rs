//! Catmull-Rom bicubic upsampling.

use super::ScatterError;
use crate::dtcwt::Plane;
use crate::image::ColorImage;

#[inline]
fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, t: f64) -> f64 {
    p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)))
}

/// Sample `line` at integer `i`, extending linearly past either end so that
/// affine signals are reproduced exactly up to the border.
#[inline]
fn sample_extended(line: &[f64], i: isize) -> f64 {
    let n = line.len() as isize;
    if n == 1 {
        return line[0];
    }
    if i < 0 {
        line[0] + (i as f64) * (line[1] - line[0])
    } else if i >= n {
        let last = line[(n - 1) as usize];
        last + ((i - n + 1) as f64) * (last - line[(n - 2) as usize])
    } else {
        line[i as usize]
    }
}

fn resample_line(line: &[f64], out_len: usize) -> Vec<f64> {
    let scale = line.len() as f64 / out_len as f64;
    (0..out_len)
        .map(|k| {
            // pixel-centre alignment
            let src = (k as f64 + 0.5) * scale - 0.5;
            let base = src.floor();
            let t = src - base;
            let b = base as isize;
            catmull_rom(
                sample_extended(line, b - 1),
                sample_extended(line, b),
                sample_extended(line, b + 1),
                sample_extended(line, b + 2),
                t,
            )
        })
        .collect()
}

/// Resizes one plane to `height × width` without clamping.
pub(crate) fn resize_plane(plane: &Plane, height: usize, width: usize) -> Plane {
    let rows = if width == plane.width() {
        plane.clone()
    } else {
        plane.map_rows(|r| resample_line(r, width))
    };
    if height == plane.height() {
        rows
    } else {
        rows.map_cols(|c| resample_line(c, height))
    }
}

/// Upsamples every channel to `target_side × target_side` and clamps to
/// `[0, 1]`.
pub fn upsample(image: &ColorImage, target_side: usize) -> Result<ColorImage, ScatterError> {
    if target_side < image.height() || target_side < image.width() {
        return Err(ScatterError::Downscale {
            from: image.height().max(image.width()),
            to: target_side,
        });
    }
    Ok(ColorImage::new(
        image
            .channels()
            .iter()
            .map(|p| resize_plane(p, target_side, target_side).map(|v| v.clamp(0.0, 1.0)))
            .collect(),
    ))
}
