use super::ScatterError;
use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

/// Standard deviations below this map their column to zero.
pub const STD_FLOOR: f64 = 1e-12;

/// Per-column training statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
}

impl FeatureStats {
    pub fn fit(data: &Array2<f64>) -> Result<Self, ScatterError> {
        if data.nrows() < 2 {
            return Err(ScatterError::EmptyInput("normalization needs at least two rows"));
        }
        let mean = data.mean_axis(Axis(0)).expect("nonempty").to_vec();
        let std = data.std_axis(Axis(0), 0.0).to_vec();
        Ok(FeatureStats { mean, std })
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    /// Z-scores `data` in place with these statistics.
    pub fn apply(&self, data: &mut Array2<f64>) -> Result<(), ScatterError> {
        if data.ncols() != self.dims() {
            return Err(ScatterError::InvalidConfig(format!(
                "feature width {} does not match statistics width {}",
                data.ncols(),
                self.dims()
            )));
        }
        for mut row in data.rows_mut() {
            for ((v, &m), &s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = if s < STD_FLOOR { 0.0 } else { (*v - m) / s };
            }
        }
        Ok(())
    }

    /// Statistics restricted to `columns`, in that order.
    pub fn select(&self, columns: &[usize]) -> FeatureStats {
        FeatureStats {
            mean: columns.iter().map(|&c| self.mean[c]).collect(),
            std: columns.iter().map(|&c| self.std[c]).collect(),
        }
    }
}

/// Z-scores every column with statistics from `data` itself.
pub fn normalize_features(data: &Array2<f64>) -> Result<(Array2<f64>, FeatureStats), ScatterError> {
    let stats = FeatureStats::fit(data)?;
    let mut out = data.clone();
    stats.apply(&mut out)?;
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |(_, c)| rng.random::<f64>() * (c + 1) as f64 + c as f64)
    }

    #[test]
    fn columns_have_zero_mean_unit_std() {
        let (z, _) = normalize_features(&random(50, 7, 1)).unwrap();
        for col in z.columns() {
            let m = col.mean().unwrap();
            let s = col.std(0.0);
            assert!(m.abs() < 1e-9);
            assert!((s - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_column_becomes_zero() {
        let mut x = random(10, 3, 2);
        x.column_mut(1).fill(4.2);
        let (z, stats) = normalize_features(&x).unwrap();
        assert!(z.column(1).iter().all(|&v| v == 0.0));
        assert!(stats.std[1] < STD_FLOOR);
    }

    #[test]
    fn reapplying_training_stats_reproduces_moments() {
        let x = random(40, 5, 3);
        let (z, stats) = normalize_features(&x).unwrap();
        let mut again = x.clone();
        stats.apply(&mut again).unwrap();
        assert_eq!(again, z);
        let refit = FeatureStats::fit(&again).unwrap();
        assert!(refit.mean.iter().all(|m| m.abs() < 1e-9));
        assert!(refit.std.iter().all(|s| (s - 1.0).abs() < 1e-6));
    }

    #[test]
    fn select_matches_columns() {
        let x = random(20, 6, 4);
        let stats = FeatureStats::fit(&x).unwrap();
        let sub = stats.select(&[4, 1]);
        assert_eq!(sub.mean, vec![stats.mean[4], stats.mean[1]]);
    }

    #[test]
    fn errors() {
        assert!(normalize_features(&Array2::zeros((1, 3))).is_err());
        let stats = FeatureStats::fit(&random(5, 3, 5)).unwrap();
        assert!(stats.apply(&mut Array2::zeros((2, 4))).is_err());
    }
}
