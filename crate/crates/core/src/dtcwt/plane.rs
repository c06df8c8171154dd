use num_complex::Complex64;

/// Single-channel real raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn zeros(height: usize, width: usize) -> Self {
        Plane {
            height,
            width,
            data: vec![0.0; height * width],
        }
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        Plane {
            height,
            width,
            data: vec![value; height * width],
        }
    }

    /// Panics if `data.len() != height * width`.
    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), height * width, "plane data length");
        Plane { height, width, data }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Plane { height, width, data }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise sum; panics on shape mismatch.
    pub fn add(&self, other: &Plane) -> Plane {
        assert_eq!((self.height, self.width), (other.height, other.width));
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// Applies `f` to every row; all outputs must share one length.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Plane {
        let mut data = Vec::new();
        let mut width = 0;
        for r in 0..self.height {
            let out = f(self.row(r));
            width = out.len();
            data.extend_from_slice(&out);
        }
        Plane {
            height: self.height,
            width,
            data,
        }
    }

    /// Applies `f` to every column; all outputs must share one length.
    pub fn map_cols(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Plane {
        let mut col = vec![0.0; self.height];
        let mut out_cols = Vec::with_capacity(self.width);
        for c in 0..self.width {
            for (r, v) in col.iter_mut().enumerate() {
                *v = self.data[r * self.width + c];
            }
            out_cols.push(f(&col));
        }
        let height = out_cols.first().map_or(0, Vec::len);
        let mut data = vec![0.0; height * self.width];
        for (c, oc) in out_cols.iter().enumerate() {
            for (r, &v) in oc.iter().enumerate() {
                data[r * self.width + c] = v;
            }
        }
        Plane {
            height,
            width: self.width,
            data,
        }
    }

    /// Sub-rectangle starting at `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Plane {
        Plane::from_fn(height, width, |r, c| self.get(row + r, col + c))
    }

    pub(crate) fn append_last_row(&self) -> Plane {
        Plane::from_fn(self.height + 1, self.width, |r, c| self.get(r.min(self.height - 1), c))
    }

    pub(crate) fn append_last_col(&self) -> Plane {
        Plane::from_fn(self.height, self.width + 1, |r, c| self.get(r, c.min(self.width - 1)))
    }

    /// Duplicates the first and last rows.
    pub(crate) fn extend_rows(&self) -> Plane {
        Plane::from_fn(self.height + 2, self.width, |r, c| {
            self.get(r.saturating_sub(1).min(self.height - 1), c)
        })
    }

    pub(crate) fn extend_cols(&self) -> Plane {
        Plane::from_fn(self.height, self.width + 2, |r, c| {
            self.get(r, c.saturating_sub(1).min(self.width - 1))
        })
    }

    /// Circular shift by `(dy, dx)` pixels: output `(r, c)` takes input
    /// `(r - dy, c - dx)`.
    pub fn circular_shift(&self, dy: isize, dx: isize) -> Plane {
        let (h, w) = (self.height as isize, self.width as isize);
        Plane::from_fn(self.height, self.width, |r, c| {
            let sr = (r as isize - dy).rem_euclid(h) as usize;
            let sc = (c as isize - dx).rem_euclid(w) as usize;
            self.get(sr, sc)
        })
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Complex raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPlane {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl ComplexPlane {
    pub fn zeros(height: usize, width: usize) -> Self {
        ComplexPlane {
            height,
            width,
            data: vec![Complex64::new(0.0, 0.0); height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), height * width, "plane data length");
        ComplexPlane { height, width, data }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.width + col] = v;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Elementwise magnitude.
    pub fn abs(&self) -> Plane {
        Plane::from_vec(self.height, self.width, self.data.iter().map(|z| z.norm()).collect())
    }

    pub fn real(&self) -> Plane {
        Plane::from_vec(self.height, self.width, self.data.iter().map(|z| z.re).collect())
    }
}
