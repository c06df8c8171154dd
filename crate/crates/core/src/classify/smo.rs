use super::kernel::RowSource;

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

pub(crate) struct BinarySolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: u64,
    pub converged: bool,
}

/// Dual SMO for one binary problem with labels `y ∈ {−1, +1}`.
///
/// Each iteration picks the maximal violating pair and solves the two-variable
/// subproblem in closed form. Every kernel row consumed counts `n`
/// evaluations toward `max_kernel_evals`, whether or not it was cached, so
/// results do not depend on the cache size.
pub(crate) fn solve(src: &mut RowSource<'_>, y: &[f64], c: f64, tol: f64, max_kernel_evals: u64) -> BinarySolution {
    let n = y.len();
    debug_assert_eq!(src.len(), n);
    let mut alpha = vec![0.0; n];
    // Gradient of ½αᵀQα − eᵀα with Q_ij = y_i y_j K_ij.
    let mut grad = vec![-1.0; n];
    let mut iterations = 0u64;
    let mut kernel_evals = 0u64;
    let mut converged = false;

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt < 0.0 && a < c) || (yt > 0.0 && a > 0.0);

    loop {
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min <= tol {
            converged = true;
            break;
        }
        if kernel_evals + 2 * n as u64 > max_kernel_evals {
            break;
        }
        kernel_evals += 2 * n as u64;
        iterations += 1;

        let ki = src.row(i);
        let kj = src.row(j);
        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * ki[j];
        let (mut ai, mut aj) = (ai_old, aj_old);
        if y[i] != y[j] {
            let mut quad = 2.0 + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut quad = 2.0 - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - ai_old, aj - aj_old);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    BinarySolution {
        bias: -rho(&alpha, &grad, y, c),
        alpha,
        iterations,
        converged,
    }
}

/// Threshold from free support vectors, or the midpoint of the feasible
/// interval when none are free.
fn rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        match (ub.is_finite(), lb.is_finite()) {
            (true, true) => 0.5 * (ub + lb),
            (true, false) => ub,
            (false, true) => lb,
            (false, false) => 0.0,
        }
    }
}
