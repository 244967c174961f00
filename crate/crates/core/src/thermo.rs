//! Thermodynamics of the averaged memory.
//!
//! With the input normalized to all zeros, a memory is summarized by its
//! minimal distance `d`. Averaging the level occupations `lambda_j`
//! (`j = d..=n`) uniformly over the probability simplex gives each level the
//! same weight `1/M`, `M = n - d + 1`, so the relative partition function is
//!
//! ```text
//! z(b) = Z_av / p = (1/M) sum_{j=d}^{n} cos^{2b}(pi j / 2n),    z(0) = 1.
//! ```
//!
//! From it:
//!
//! * free energy `F = -(1/b) ln z`,
//! * internal energy `U = <E>` under the Boltzmann weights `exp(-b E_j)`,
//! * entropy `S = b (U - F) = -dF/dt` with `t = 1/b` (always `<= 0`),
//! * effective distance `D = (2/pi) arccos(exp(-F/2))`, equivalently
//!   `z = cos^{2b}(pi D / 2)`.
//!
//! `D` is the order parameter: about `2/3` in the disordered high-temperature
//! phase, `d/n` in the ordered low-temperature phase.
//!
//! Two evaluation modes exist. [`Mode::ExactSum`] adds all `M` levels;
//! [`Mode::Integral`] replaces the sum with
//! `(1/(1-d/n)) int_{d/n}^1 cos^{2b}(pi x / 2) dx`, which is the large-`n`
//! limit. The two differ by an `O(1/n)` endpoint correction.

use std::f64::consts::{LN_2, PI};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{log_cos_sq, log_cos_sq_frac};
use crate::quadrature::{integrate_with_breakpoints, QuadOptions};

const CHUNK: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ExactSum,
    Integral,
}

/// Average memory of width `n` whose closest stored pattern sits at distance
/// `d` from the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AverageModel {
    n: usize,
    d: usize,
}

impl AverageModel {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if d >= n {
            return Err(Error::invalid(format!("need d < n, got d = {d}, n = {n}")));
        }
        Ok(AverageModel { n, d })
    }

    /// `d = round(fraction * n)`.
    pub fn from_fraction(n: usize, fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::invalid(format!(
                "d/n must lie in [0, 1), got {fraction}"
            )));
        }
        Self::new(n, (fraction * n as f64).round() as usize)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of distance levels `M = n - d + 1`.
    pub fn levels(&self) -> usize {
        self.n - self.d + 1
    }

    /// Relative minimal distance `d / n`.
    pub fn delta(&self) -> f64 {
        self.d as f64 / self.n as f64
    }
}

/// Energy at relative distance `x`: `-2 ln cos(pi x / 2)`.
#[inline]
fn energy_frac(x: f64) -> f64 {
    -log_cos_sq_frac(x)
}

/// `(2/pi) arccos(exp(-F/2))`, written to stay accurate for small `F`.
pub fn distance_from_free_energy(f: f64) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    if f == f64::INFINITY {
        return 1.0;
    }
    // arccos(e^{-u}) = 2 asin(sqrt((1 - e^{-u}) / 2))
    let s = (-(-0.5 * f).exp_m1() / 2.0).sqrt().min(1.0);
    (4.0 / PI) * s.asin()
}

/// Thermodynamic state at one inverse temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub b: f64,
    /// `Z_av / p`.
    pub z_rel: f64,
    pub f: f64,
    pub u: f64,
    pub s: f64,
    pub d: f64,
}

/// Reductions of the Boltzmann weights `w = exp(-b (E - E_min))` needed by
/// every potential.
struct Moments {
    /// Lowest energy `E_min`.
    e_min: f64,
    /// `ln((1/M) sum w)`, the log partition function relative to `E_min`.
    ln_mean_w: f64,
    /// `sum w E / sum w`.
    u: f64,
}

/// Evaluator for one model and mode. In exact-sum mode the energy table is
/// built once and reused across temperatures.
#[derive(Clone, Debug)]
pub struct Thermo {
    model: AverageModel,
    mode: Mode,
    /// `E_j - E_d` for `j = d..n` (the `j = n` level has infinite energy and
    /// is handled separately).
    gaps: Vec<f64>,
    energies: Vec<f64>,
}

impl Thermo {
    pub fn new(model: AverageModel, mode: Mode) -> Self {
        let (gaps, energies) = match mode {
            Mode::ExactSum => {
                let (n, d) = (model.n, model.d);
                let energies: Vec<f64> = (d..n)
                    .into_par_iter()
                    .with_min_len(CHUNK)
                    .map(|j| -log_cos_sq(j, n))
                    .collect();
                let e_min = energies[0];
                let gaps = energies.iter().map(|e| e - e_min).collect();
                (gaps, energies)
            }
            Mode::Integral => (Vec::new(), Vec::new()),
        };
        Thermo {
            model,
            mode,
            gaps,
            energies,
        }
    }

    pub fn model(&self) -> AverageModel {
        self.model
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn moments(&self, b: f64) -> Moments {
        debug_assert!(b > 0.0);
        match self.mode {
            Mode::ExactSum => self.moments_sum(b),
            Mode::Integral => self.moments_integral(b),
        }
    }

    fn moments_sum(&self, b: f64) -> Moments {
        // Partial sums per chunk, combined in order so results do not
        // depend on scheduling.
        let partials: Vec<(f64, f64, f64)> = self
            .gaps
            .par_chunks(CHUNK)
            .zip(self.energies.par_chunks(CHUNK))
            .map(|(gaps, energies)| {
                let (mut sw, mut sm1, mut swe) = (0.0, 0.0, 0.0);
                for (&g, &e) in gaps.iter().zip(energies) {
                    let x = -b * g;
                    let w = x.exp();
                    sm1 += if x > -0.5 { x.exp_m1() } else { w - 1.0 };
                    sw += w;
                    swe += w * e;
                }
                (sw, sm1, swe)
            })
            .collect();
        let (sw, sm1, swe) = partials
            .iter()
            .fold((0.0, 0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1, a.2 + p.2));
        let m = self.model.levels() as f64;
        // The j = n level contributes w = 0, i.e. w - 1 = -1.
        let ln_mean_w = if sw > 0.5 * m {
            ((sm1 - 1.0) / m).ln_1p()
        } else {
            sw.ln() - m.ln()
        };
        Moments {
            e_min: self.energies[0],
            ln_mean_w,
            u: swe / sw,
        }
    }

    fn moments_integral(&self, b: f64) -> Moments {
        let delta = self.model.delta();
        let e_min = energy_frac(delta);
        let weight = |x: f64| (-b * (energy_frac(x) - e_min)).exp();
        let breaks = self.breakpoints(b);
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-13,
            max_intervals: 20_000,
        };
        let zw = integrate_with_breakpoints(weight, delta, 1.0, &breaks, opts);
        let ew = integrate_with_breakpoints(
            |x| {
                let w = weight(x);
                if w == 0.0 {
                    0.0
                } else {
                    w * energy_frac(x)
                }
            },
            delta,
            1.0,
            &breaks,
            opts,
        );
        Moments {
            e_min,
            ln_mean_w: zw.value.ln() - (1.0 - delta).ln(),
            u: ew.value / zw.value,
        }
    }

    /// Subdivision points that resolve the weight's decay near `x = d/n`.
    fn breakpoints(&self, b: f64) -> Vec<f64> {
        let delta = self.model.delta();
        let half = 0.5 * PI * delta;
        let slope = PI * half.tan();
        let curvature = 0.5 * PI * PI / (half.cos() * half.cos());
        let width = (1.0 / (b * slope)).min((2.0 / (b * curvature)).sqrt());
        let mut out: Vec<f64> = [0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0]
            .iter()
            .map(|k| delta + k * width)
            .filter(|&x| x < 1.0)
            .collect();
        out.push(0.5 * (1.0 + delta));
        out.sort_by(f64::total_cmp);
        out
    }

    /// `ln z(b)`; exactly 0 at `b = 0`.
    pub fn ln_z_relative(&self, b: f64) -> f64 {
        assert!(b >= 0.0, "b must be non-negative");
        if b == 0.0 {
            return 0.0;
        }
        let m = self.moments(b);
        -b * m.e_min + m.ln_mean_w
    }

    /// `z(b) = Z_av / p`.
    pub fn z_relative(&self, b: f64) -> f64 {
        self.ln_z_relative(b).exp()
    }

    pub fn point(&self, b: f64) -> Result<ThermoPoint> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!(
                "b must be positive and finite, got {b}; use high_temperature_limits for b = 0"
            )));
        }
        let m = self.moments(b);
        let ln_z = -b * m.e_min + m.ln_mean_w;
        let f = m.e_min - m.ln_mean_w / b;
        let s = b * (m.u - f);
        Ok(ThermoPoint {
            b,
            z_rel: ln_z.exp(),
            f,
            u: m.u,
            s,
            d: distance_from_free_energy(f),
        })
    }

    pub fn free_energy(&self, b: f64) -> Result<f64> {
        Ok(self.point(b)?.f)
    }

    pub fn internal_energy(&self, b: f64) -> Result<f64> {
        Ok(self.point(b)?.u)
    }

    pub fn entropy(&self, b: f64) -> Result<f64> {
        Ok(self.point(b)?.s)
    }

    pub fn effective_distance(&self, b: f64) -> Result<f64> {
        Ok(self.point(b)?.d)
    }

    /// Leading Laplace estimate of `int_{d/n}^1 exp(-b (E(x) - E(d/n))) dx`
    /// for large `b`: `1 / (b E'(d/n))` for `d > 0`, `1 / sqrt(pi b)` for
    /// `d = 0`.
    pub fn laplace_weight_integral(&self, b: f64) -> f64 {
        let delta = self.model.delta();
        if self.model.d == 0 {
            1.0 / (PI * b).sqrt()
        } else {
            1.0 / (b * PI * (0.5 * PI * delta).tan())
        }
    }
}

/// `t -> infinity` reference values of the averaged memory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HighTemperatureLimits {
    /// `F(t = inf) = U(t = inf) = (1/(1 - d/n)) int_{d/n}^1 -2 ln cos(pi x/2) dx`.
    pub f_inf: f64,
    /// `(2/pi) arccos(exp(-F_inf / 2))`.
    pub d_inf: f64,
    /// First-order expansion `(1 + d/n) 2 ln 2`.
    pub f_linear: f64,
    /// First-order expansion `2/3 + (2 ln 2 / (pi sqrt 3)) d/n`.
    pub d_linear: f64,
    pub quad_error: f64,
}

/// Slope of the first-order expansion of `D(t = inf)` in `d/n`.
pub fn high_temperature_distance_slope() -> f64 {
    2.0 * LN_2 / (PI * 3f64.sqrt())
}

pub fn high_temperature_limits(model: &AverageModel) -> HighTemperatureLimits {
    let delta = model.delta();
    let r = integrate_with_breakpoints(
        energy_frac,
        delta,
        1.0,
        &[0.5 * (1.0 + delta)],
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-14,
            max_intervals: 20_000,
        },
    );
    let f_inf = r.value / (1.0 - delta);
    HighTemperatureLimits {
        f_inf,
        d_inf: distance_from_free_energy(f_inf),
        f_linear: (1.0 + delta) * 2.0 * LN_2,
        d_linear: 2.0 / 3.0 + high_temperature_distance_slope() * delta,
        quad_error: r.error / (1.0 - delta),
    }
}

/// Grid of inverse temperatures for a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BGrid {
    pub min: f64,
    pub max: f64,
    /// Points per decade for log spacing; total points for linear spacing.
    pub density: usize,
    pub log: bool,
}

impl BGrid {
    pub fn log(min: f64, max: f64, points_per_decade: usize) -> Self {
        BGrid {
            min,
            max,
            density: points_per_decade,
            log: true,
        }
    }

    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        BGrid {
            min,
            max,
            density: points,
            log: false,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 < b_min < b_max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.density == 0 {
            return Err(Error::invalid("grid density must be positive"));
        }
        let count = if self.log {
            ((self.max / self.min).log10() * self.density as f64).round() as usize + 1
        } else {
            self.density
        }
        .max(2);
        let (lo, hi) = if self.log {
            (self.min.ln(), self.max.ln())
        } else {
            (self.min, self.max)
        };
        Ok((0..count)
            .map(|k| {
                if k == count - 1 {
                    return self.max;
                }
                let v = lo + (hi - lo) * k as f64 / (count - 1) as f64;
                if self.log {
                    v.exp()
                } else {
                    v
                }
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(flatten)]
    pub point: ThermoPoint,
    /// `S` mapped to `[0, 1]`: 1 at `S = 0`, 0 at the grid minimum.
    pub s_rescaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: usize,
    pub d: usize,
    pub mode: Mode,
    /// Where `D` crosses `(D_inf + d/n) / 2`, if it does on the grid.
    pub b_cr: Option<f64>,
    /// `D` at the smallest grid `b`.
    pub d_low_b: f64,
    /// `D` at the largest grid `b`.
    pub d_high_b: f64,
    pub d_inf: f64,
    pub d_ordered: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// Linear interpolation in `ln b` of the first crossing of `level` by a
/// non-increasing sequence `(b_i, D_i)`.
pub fn crossing(points: &[(f64, f64)], level: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((b0, d0), (b1, d1)) = (w[0], w[1]);
        if d0 >= level && d1 <= level && d0 > d1 {
            let frac = (d0 - level) / (d0 - d1);
            Some((b0.ln() + frac * (b1.ln() - b0.ln())).exp())
        } else if d0 == level {
            Some(b0)
        } else {
            None
        }
    })
}

pub fn sweep(thermo: &Thermo, grid: &[f64]) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::invalid("empty b grid"));
    }
    if grid.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::invalid("b grid must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("b grid must be strictly increasing"));
    }
    let points = grid
        .iter()
        .map(|&b| thermo.point(b))
        .collect::<Result<Vec<_>>>()?;
    let s_min = points.iter().map(|p| p.s).fold(0.0, f64::min);
    let rows = points
        .iter()
        .map(|&point| SweepRow {
            point,
            s_rescaled: if s_min < 0.0 {
                (point.s - s_min) / -s_min
            } else {
                1.0
            },
        })
        .collect();

    let model = thermo.model();
    let limits = high_temperature_limits(&model);
    let ordered = model.delta();
    let curve: Vec<(f64, f64)> = points.iter().map(|p| (p.b, p.d)).collect();
    Ok(SweepResult {
        rows,
        summary: SweepSummary {
            n: model.n(),
            d: model.d(),
            mode: thermo.mode(),
            b_cr: crossing(&curve, 0.5 * (limits.d_inf + ordered)),
            d_low_b: points[0].d,
            d_high_b: points[points.len() - 1].d,
            d_inf: limits.d_inf,
            d_ordered: ordered,
        },
    })
}

pub const CSV_HEADER: &str = "b,F,U,S,S_rescaled,D";

/// Twelve significant digits in scientific notation.
pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &result.rows {
        let p = &r.point;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            format_sig12(p.b),
            format_sig12(p.f),
            format_sig12(p.u),
            format_sig12(p.s),
            format_sig12(r.s_rescaled),
            format_sig12(p.d)
        )?;
    }
    Ok(())
}

/// One parsed CSV row: `[b, F, U, S, S_rescaled, D]`.
pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<[f64; 6]>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if idx == 0 {
            if line.trim() != CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header {CSV_HEADER:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
        let row: [f64; 6] = fields.try_into().map_err(|_| Error::Parse {
            line: lineno,
            message: "expected 6 columns".into(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}
