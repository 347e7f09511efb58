//! Weibull inclusion probability and maximum-likelihood tail fitting.
//!
//! Each extreme vector models the distances to its nearest negatives with a
//! two-parameter Weibull. The inclusion probability of a query at distance
//! `d` is `exp(-(d / scale)^shape)`, which is 1 at the anchor itself and
//! decays towards 0 with distance.
//!
//! Fitting maximizes the likelihood by Newton iteration on the shape alone;
//! for a fixed shape `k` the scale has the closed form
//! `scale = (mean(t_i^k))^(1/k)`. The profile score
//!
//! ```text
//! g(k) = 1/k + mean(ln t) - sum(t^k ln t) / sum(t^k)
//! ```
//!
//! is strictly decreasing in `k`, so a bracketed Newton iteration always
//! converges to the unique root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distances below this are raised to it before fitting.
pub const MIN_TAIL_DISTANCE: f64 = 1e-12;
pub const DEFAULT_MIN_SHAPE: f64 = 1e-3;
pub const DEFAULT_MAX_SHAPE: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    pub shape: f64,
    pub scale: f64,
    /// Largest raw (unscaled) distance in the tail; radius of the update sphere.
    pub max_tail_distance: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64, max_tail_distance: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidConfig(format!("weibull shape must be > 0, got {shape}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidConfig(format!("weibull scale must be > 0, got {scale}")));
        }
        if !(max_tail_distance >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "max tail distance must be >= 0, got {max_tail_distance}"
            )));
        }
        Ok(Self {
            shape,
            scale,
            max_tail_distance,
        })
    }

    /// Inclusion probability of a point at distance `d` from the anchor.
    #[inline]
    pub fn psi(&self, d: f64) -> f64 {
        psi(self.shape, self.scale, d)
    }
}

/// `exp(-(d / scale)^shape)`.
#[inline]
pub fn psi(shape: f64, scale: f64, d: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    (-(d / scale).powf(shape)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullFit {
    pub shape: f64,
    pub scale: f64,
    /// True when the tail had no spread and the shape was set to the cap.
    pub degenerate: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub min_shape: f64,
    pub max_shape: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            min_shape: DEFAULT_MIN_SHAPE,
            max_shape: DEFAULT_MAX_SHAPE,
            max_iterations: 100,
            tolerance: 1e-9,
        }
    }
}

/// Maximum-likelihood Weibull fit with default options.
pub fn fit_weibull(tail: &[f64]) -> Result<WeibullFit> {
    fit_weibull_with(tail, &FitOptions::default())
}

pub fn fit_weibull_with(tail: &[f64], opts: &FitOptions) -> Result<WeibullFit> {
    if tail.is_empty() {
        return Err(Error::EmptyTail);
    }
    let mut values = Vec::with_capacity(tail.len());
    for &t in tail {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidTailValue(t));
        }
        values.push(t.max(MIN_TAIL_DISTANCE));
    }

    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    if min == max {
        return Ok(WeibullFit {
            shape: opts.max_shape,
            scale: max,
            degenerate: true,
            iterations: 0,
        });
    }

    // Work on t / max: every log is <= 0 and t^k never overflows.
    let logs: Vec<f64> = values.iter().map(|t| (t / max).ln()).collect();
    let n = logs.len() as f64;
    let mean_log = logs.iter().sum::<f64>() / n;
    let profile = ProfileScore { logs: &logs, mean_log };

    let (lo_g, _) = profile.eval(opts.min_shape);
    if lo_g <= 0.0 {
        return Ok(finish(opts.min_shape, max, &logs, 0));
    }
    let (hi_g, _) = profile.eval(opts.max_shape);
    if hi_g >= 0.0 {
        return Ok(finish(opts.max_shape, max, &logs, 0));
    }

    let mut lo = opts.min_shape;
    let mut hi = opts.max_shape;
    let mut k = moment_estimate(&values).clamp(lo, hi);
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let (g, dg) = profile.eval(k);
        if g == 0.0 {
            break;
        }
        if g > 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let mut next = k - g / dg;
        if !(next > lo && next < hi) {
            // Newton left the bracket; bisect geometrically instead.
            next = (lo * hi).sqrt();
        }
        let step = (next - k).abs();
        k = next;
        if step <= opts.tolerance * k.max(1.0) {
            break;
        }
    }
    Ok(finish(k, max, &logs, iterations))
}

fn finish(shape: f64, max: f64, logs: &[f64], iterations: usize) -> WeibullFit {
    let n = logs.len() as f64;
    let mean_pow = logs.iter().map(|l| (shape * l).exp()).sum::<f64>() / n;
    WeibullFit {
        shape,
        scale: max * mean_pow.powf(1.0 / shape),
        degenerate: false,
        iterations,
    }
}

struct ProfileScore<'a> {
    logs: &'a [f64],
    mean_log: f64,
}

impl ProfileScore<'_> {
    /// Returns `(g(k), g'(k))`.
    fn eval(&self, k: f64) -> (f64, f64) {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &l in self.logs {
            let w = (k * l).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        let m1 = s1 / s0;
        let m2 = s2 / s0;
        let g = 1.0 / k + self.mean_log - m1;
        let dg = -1.0 / (k * k) - (m2 - m1 * m1).max(0.0);
        (g, dg)
    }
}

/// Method-of-moments starting point from the coefficient of variation.
fn moment_estimate(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let cv = var.sqrt() / mean;
    if cv > 0.0 && cv.is_finite() {
        cv.powf(-1.086)
    } else {
        1.0
    }
}

/// Weibull log-likelihood of `values` under `(shape, scale)`.
pub fn log_likelihood(values: &[f64], shape: f64, scale: f64) -> f64 {
    values
        .iter()
        .map(|&t| {
            let z = t / scale;
            shape.ln() - scale.ln() + (shape - 1.0) * z.ln() - z.powf(shape)
        })
        .sum()
}
