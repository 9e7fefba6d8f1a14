//! Exponential decay of the horizon gap along a trajectory.

use super::integrate::Trajectory;
use crate::error::{Error, Result};

pub const MIN_WINDOW_SAMPLES: usize = 20;

/// Band of horizon-gap values used for fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for GapWindow {
    fn default() -> Self {
        Self { lo: 1e-8, hi: 1e-3 }
    }
}

impl GapWindow {
    pub fn contains(&self, gap: f64) -> bool {
        gap >= self.lo && gap <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub lambda: f64,
    /// Largest deviation of `log gap` from the fitted line, per unit of
    /// `tau` covered by the window; small when the gap is exponential up
    /// to a sub-exponential factor.
    pub residual_slope: f64,
    pub samples: usize,
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r2)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    (a, b, r2)
}

pub fn estimate_decay(traj: &Trajectory, window: GapWindow) -> Result<DecayFit> {
    let (tau, log_gap): (Vec<f64>, Vec<f64>) = traj
        .samples
        .iter()
        .filter(|s| window.contains(s.gap))
        .map(|s| (s.tau, s.gap.ln()))
        .unzip();
    if tau.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::InsufficientWindow {
            found: tau.len(),
            required: MIN_WINDOW_SAMPLES,
        });
    }
    let (a, b, _) = linear_fit(&tau, &log_gap);
    let span = tau[tau.len() - 1] - tau[0];
    let worst = tau
        .iter()
        .zip(&log_gap)
        .map(|(t, l)| (l - a - b * t).abs())
        .fold(0.0, f64::max);
    Ok(DecayFit {
        lambda: -b,
        residual_slope: if span > 0.0 { worst / span } else { f64::INFINITY },
        samples: tau.len(),
    })
}
