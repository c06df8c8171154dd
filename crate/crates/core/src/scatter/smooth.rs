use super::ScatterError;
use crate::dtcwt::lowlevel;
use crate::dtcwt::{FilterSet, Plane};

fn lowpass_halve(line: &[f64], h: &[f64]) -> Vec<f64> {
    lowlevel::filter(line, h).into_iter().step_by(2).collect()
}

/// Averages a plane sampled at spacing `2^current_scale` down to spacing
/// `2^target_scale` by repeating the level-1 lowpass (unit DC gain) and
/// keeping even samples. Each step maps `n` samples to `⌈n/2⌉`.
pub fn smooth_to_invariance(
    plane: &Plane,
    current_scale: usize,
    target_scale: usize,
    filters: &FilterSet,
) -> Result<Plane, ScatterError> {
    if target_scale < current_scale {
        return Err(ScatterError::ScaleOrder {
            current: current_scale,
            target: target_scale,
        });
    }
    let h = filters.level1_lowpass_a();
    let mut out = plane.clone();
    for _ in current_scale..target_scale {
        out = out.map_rows(|r| lowpass_halve(r, h)).map_cols(|c| lowpass_halve(c, h));
    }
    Ok(out)
}
