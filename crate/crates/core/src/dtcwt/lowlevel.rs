//! One-dimensional filtering kernels with symmetric extension.
//!
//! All routines take one line of samples and write one line of output. The
//! 2D transform applies them along columns and rows of a [`Plane`].
//!
//! [`Plane`]: super::Plane

/// Index into a length-`n` line under half-sample symmetric extension
/// (end samples repeated).
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - 1 - m) as usize
    } else {
        m as usize
    }
}

/// Valid-mode convolution of `seq` with `h` accumulated into `out`:
/// `out[k] += sum_i h[i] * seq[k + m - 1 - i]`.
#[inline]
fn convolve_valid_into(seq: &[f64], h: &[f64], out: &mut [f64]) {
    let m = h.len();
    debug_assert_eq!(out.len() + m - 1, seq.len());
    for (k, o) in out.iter_mut().enumerate() {
        let window = &seq[k..k + m];
        let mut acc = 0.0;
        for (i, &c) in h.iter().enumerate() {
            acc += c * window[m - 1 - i];
        }
        *o += acc;
    }
}

/// Undecimated filtering. Output length is `x.len()` for odd-length filters
/// and `x.len() + 1` for even-length ones.
pub(crate) fn filter(x: &[f64], h: &[f64]) -> Vec<f64> {
    let r = x.len();
    let m = h.len();
    let m2 = (m / 2) as isize;
    let ext: Vec<f64> = (-m2..r as isize + m2).map(|i| x[reflect(i, r)]).collect();
    let mut out = vec![0.0; ext.len() + 1 - m];
    convolve_valid_into(&ext, h, &mut out);
    out
}

/// Decimate-by-two filtering with a Q-shift pair. `ha` acts on the odd
/// samples and `hb` on the even ones; the outputs are interleaved.
/// `x.len()` must be a multiple of 4.
pub(crate) fn filter_decimate(x: &[f64], ha: &[f64], hb: &[f64]) -> Vec<f64> {
    let r = x.len();
    let m = ha.len();
    debug_assert!(r % 4 == 0 && m % 2 == 0 && hb.len() == m);
    let mi = m as isize;
    let xe: Vec<usize> = (-mi..r as isize + mi).map(|i| reflect(i, r)).collect();
    let t: Vec<usize> = (5..r + 2 * m - 2).step_by(4).collect();

    let hao: Vec<f64> = ha.iter().step_by(2).copied().collect();
    let hae: Vec<f64> = ha.iter().skip(1).step_by(2).copied().collect();
    let hbo: Vec<f64> = hb.iter().step_by(2).copied().collect();
    let hbe: Vec<f64> = hb.iter().skip(1).step_by(2).copied().collect();

    let gather = |off: usize| -> Vec<f64> { t.iter().map(|&ti| x[xe[ti - off]]).collect() };

    let half = r / 2;
    let quarter = r / 4;
    let mut ya = vec![0.0; quarter];
    let mut yb = vec![0.0; quarter];
    convolve_valid_into(&gather(1), &hao, &mut ya);
    convolve_valid_into(&gather(3), &hae, &mut ya);
    convolve_valid_into(&gather(0), &hbo, &mut yb);
    convolve_valid_into(&gather(2), &hbe, &mut yb);

    let same_sign = ha.iter().zip(hb).map(|(a, b)| a * b).sum::<f64>() > 0.0;
    let mut y = vec![0.0; half];
    for k in 0..quarter {
        if same_sign {
            y[2 * k] = ya[k];
            y[2 * k + 1] = yb[k];
        } else {
            y[2 * k + 1] = ya[k];
            y[2 * k] = yb[k];
        }
    }
    y
}

/// Interpolate-by-two filtering with a Q-shift synthesis pair, the inverse
/// companion of [`filter_decimate`]. `x.len()` must be even.
pub(crate) fn filter_interpolate(x: &[f64], ha: &[f64], hb: &[f64]) -> Vec<f64> {
    let r = x.len();
    let m = ha.len();
    debug_assert!(r % 2 == 0 && m % 2 == 0 && hb.len() == m);
    let m2 = m / 2;
    let mut y = vec![0.0; 2 * r];
    if x.iter().all(|&v| v == 0.0) {
        return y;
    }
    let m2i = m2 as isize;
    let xe: Vec<usize> = (-m2i..r as isize + m2i).map(|i| reflect(i, r)).collect();
    let same_sign = ha.iter().zip(hb).map(|(a, b)| a * b).sum::<f64>() > 0.0;

    let hao: Vec<f64> = ha.iter().step_by(2).copied().collect();
    let hae: Vec<f64> = ha.iter().skip(1).step_by(2).copied().collect();
    let hbo: Vec<f64> = hb.iter().step_by(2).copied().collect();
    let hbe: Vec<f64> = hb.iter().skip(1).step_by(2).copied().collect();

    let n_out = r / 2;
    let mut bufs = [
        vec![0.0; n_out],
        vec![0.0; n_out],
        vec![0.0; n_out],
        vec![0.0; n_out],
    ];
    let gather = |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&ti| x[xe[ti]]).collect() };

    if m2 % 2 == 0 {
        let t: Vec<usize> = (3..r + m).step_by(2).collect();
        let (ta, tb): (Vec<usize>, Vec<usize>) = if same_sign {
            (t.clone(), t.iter().map(|v| v - 1).collect())
        } else {
            (t.iter().map(|v| v - 1).collect(), t.clone())
        };
        let ta2: Vec<usize> = ta.iter().map(|v| v - 2).collect();
        let tb2: Vec<usize> = tb.iter().map(|v| v - 2).collect();
        convolve_valid_into(&gather(&tb2), &hae, &mut bufs[0]);
        convolve_valid_into(&gather(&ta2), &hbe, &mut bufs[1]);
        convolve_valid_into(&gather(&tb), &hao, &mut bufs[2]);
        convolve_valid_into(&gather(&ta), &hbo, &mut bufs[3]);
    } else {
        let t: Vec<usize> = (2..r + m - 1).step_by(2).collect();
        let (ta, tb): (Vec<usize>, Vec<usize>) = if same_sign {
            (t.clone(), t.iter().map(|v| v - 1).collect())
        } else {
            (t.iter().map(|v| v - 1).collect(), t.clone())
        };
        let xa = gather(&ta);
        let xb = gather(&tb);
        convolve_valid_into(&xb, &hao, &mut bufs[0]);
        convolve_valid_into(&xa, &hbo, &mut bufs[1]);
        convolve_valid_into(&xb, &hae, &mut bufs[2]);
        convolve_valid_into(&xa, &hbe, &mut bufs[3]);
    }
    for k in 0..n_out {
        for (p, buf) in bufs.iter().enumerate() {
            y[4 * k + p] = buf[k];
        }
    }
    y
}
