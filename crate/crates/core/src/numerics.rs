//! Small numerical helpers shared by the statistics and thermodynamics code.

use std::f64::consts::FRAC_PI_2;

/// `2 ln cos(pi d / 2n)`, i.e. the log of one round's survival probability
/// for a pattern at distance `d`. Returns `-inf` at `d == n`.
#[inline]
pub fn log_cos_sq(d: usize, n: usize) -> f64 {
    debug_assert!(d <= n && n > 0);
    if d == n {
        return f64::NEG_INFINITY;
    }
    log_cos_sq_frac(d as f64 / n as f64)
}

/// `2 ln cos(pi x / 2)` for a relative distance `x` in `[0, 1]`.
#[inline]
pub fn log_cos_sq_frac(x: f64) -> f64 {
    if x >= 1.0 {
        return f64::NEG_INFINITY;
    }
    // near x = 1 cos loses relative precision; sin of the complement does not
    let c = if x > 0.5 {
        ((1.0 - x) * FRAC_PI_2).sin()
    } else {
        (x * FRAC_PI_2).cos()
    };
    2.0 * c.ln()
}

/// `cos^{2b}(pi d / 2n)` evaluated as `exp(b * 2 ln cos)`. Uses `0^0 = 1`, so
/// `b == 0` gives exactly 1 for every distance.
#[inline]
pub fn cos_power(d: usize, n: usize, b: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    (b * log_cos_sq(d, n)).exp()
}

/// `b * 2 ln cos(...)` with the `0 * -inf = 0` convention at `b == 0`.
#[inline]
pub fn log_cos_power(d: usize, n: usize, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        b * log_cos_sq(d, n)
    }
}

/// `ln sum exp(x_i)`; `-inf` for an empty slice or all `-inf` entries.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// Normalized `exp(x_i) / sum exp(x_j)`, computed with max subtraction.
/// Returns `None` when every entry is `-inf`.
pub fn softmax(xs: &[f64]) -> Option<Vec<f64>> {
    let lse = logsumexp(xs);
    if lse == f64::NEG_INFINITY {
        return None;
    }
    Some(xs.iter().map(|&x| (x - lse).exp()).collect())
}
