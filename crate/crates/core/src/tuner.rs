//! Choosing `b` and `T` for a target corruption tolerance and efficiency.
//!
//! To recognize and identify inputs with up to `epsilon * n` corrupted bits
//! with efficiency `nu`, pick the smallest integer `b` with
//! `D(b, epsilon n) - epsilon <= 1 - nu` and a threshold
//! `T >= 1 / cos^{2b}(pi D / 2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::log_cos_sq_frac;
use crate::thermo::{AverageModel, Mode, Thermo};

/// Upper limit of the doubling search.
pub const MAX_B: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunePlan {
    pub epsilon: f64,
    pub nu: f64,
    pub n: usize,
    /// Minimal distance used, `round(epsilon * n)`.
    pub d: usize,
    pub b: u64,
    /// Repetition threshold; `None` when it exceeds `i64::MAX`.
    #[serde(rename = "T")]
    pub threshold: Option<u64>,
    /// `log10` of the lower bound `1 / cos^{2b}(pi D / 2)`.
    pub log10_t_bound: f64,
    pub achieved_d: f64,
}

impl TunePlan {
    pub fn is_practical(&self) -> bool {
        self.threshold.is_some()
    }
}

/// `(T, log10 bound)` for the smallest integer `T` with
/// `T cos^{2b}(pi D / 2) >= 1`, computed from logs.
pub fn threshold_for(b: u64, distance: f64) -> (Option<u64>, f64) {
    // ln(1 / cos^{2b}) = -b * 2 ln cos
    let ln_bound = -(b as f64) * log_cos_sq_frac(distance);
    let log10 = ln_bound / std::f64::consts::LN_10;
    if !ln_bound.is_finite() || ln_bound >= (i64::MAX as f64).ln() {
        return (None, log10);
    }
    let mut t = ln_bound.exp().ceil().max(1.0) as u64;
    while (t as f64).ln() < ln_bound {
        t += 1;
    }
    (Some(t), log10)
}

pub fn tune(n: usize, epsilon: f64, nu: f64) -> Result<TunePlan> {
    tune_with_mode(n, epsilon, nu, Mode::ExactSum)
}

pub fn tune_with_mode(n: usize, epsilon: f64, nu: f64, mode: Mode) -> Result<TunePlan> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::invalid(format!(
            "epsilon must lie in [0, 1), got {epsilon}"
        )));
    }
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::invalid(format!("nu must lie in [0, 1], got {nu}")));
    }
    let model = AverageModel::from_fraction(n, epsilon)?;
    let target = epsilon + (1.0 - nu);
    if model.delta() >= target {
        return Err(Error::Infeasible(format!(
            "D never drops below d/n = {}, but the criterion needs D <= {target}",
            model.delta()
        )));
    }
    let thermo = Thermo::new(model, mode);
    let dist = |b: u64| thermo.effective_distance(b as f64);
    let meets = |d: f64| d - epsilon <= 1.0 - nu;

    let (b, achieved) = {
        let d1 = dist(1)?;
        if meets(d1) {
            (1, d1)
        } else {
            let mut lo = 1u64;
            let mut hi = 2u64;
            let mut d_hi = dist(hi)?;
            while !meets(d_hi) {
                if hi >= MAX_B {
                    return Err(Error::Infeasible(format!(
                        "criterion not met for any b <= {MAX_B}"
                    )));
                }
                lo = hi;
                hi *= 2;
                d_hi = dist(hi)?;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                let d_mid = dist(mid)?;
                if meets(d_mid) {
                    hi = mid;
                    d_hi = d_mid;
                } else {
                    lo = mid;
                }
            }
            (hi, d_hi)
        }
    };
    let (threshold, log10_t_bound) = threshold_for(b, achieved);
    Ok(TunePlan {
        epsilon,
        nu,
        n,
        d: model.d(),
        b,
        threshold,
        log10_t_bound,
        achieved_d: achieved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_efficiency_needs_one_qbit() {
        let plan = tune(1000, 0.05, 0.0).unwrap();
        assert_eq!(plan.b, 1);
        assert!(plan.threshold.unwrap() >= 1);
    }

    #[test]
    fn threshold_bound_example() {
        let (t, log10) = threshold_for(10_000, 0.02);
        let t = t.unwrap();
        let ln_p = 10_000.0 * log_cos_sq_frac(0.02);
        assert!((t as f64).ln() + ln_p >= 0.0);
        assert!(((t - 1) as f64).ln() + ln_p < 0.0);
        assert!((log10 - (-ln_p / std::f64::consts::LN_10)).abs() < 1e-12);
    }

    #[test]
    fn impractical_threshold_reports_log() {
        let (t, log10) = threshold_for(1 << 30, 0.5);
        assert!(t.is_none());
        assert!(log10 > 18.0);
    }

    #[test]
    fn validation_and_infeasibility() {
        assert!(tune(100, 1.0, 0.5).is_err());
        assert!(tune(100, 0.1, 1.5).is_err());
        assert!(matches!(tune(100, 0.1, 1.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn minimal_and_monotone() {
        let n = 2000;
        let mut last_b = 0;
        for nu in [0.5, 0.7, 0.9, 0.95] {
            let plan = tune(n, 0.02, nu).unwrap();
            assert!(plan.achieved_d - plan.epsilon <= 1.0 - nu);
            if plan.b > 1 {
                let t = Thermo::new(AverageModel::new(n, plan.d).unwrap(), Mode::ExactSum);
                let prev = t.effective_distance((plan.b - 1) as f64).unwrap();
                assert!(prev - plan.epsilon > 1.0 - nu);
            }
            assert!(plan.b >= last_b);
            last_b = plan.b;
        }
    }
}
