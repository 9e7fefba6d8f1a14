//! Blow-up profiles from horizon-converging trajectories: the blow-up time
//! (with a tail extrapolation past the last sample) and the rates
//! `y_i ~ C (t_max - t)^{-alpha_i / k}`.

use crate::aqh::HomogeneityType;
use crate::dynamics::decay::{estimate_decay, linear_fit, GapWindow, MIN_WINDOW_SAMPLES};
use crate::dynamics::{Equilibrium, StopReason, Trajectory};
use crate::embedding::Chart;
use crate::error::{Error, Result};

/// Equilibria farther than this (max-norm, chart coordinates) from the end
/// point are not considered shadowed.
pub const TARGET_RADIUS: f64 = 0.1;
/// Chart coordinates below this at the end point count as vanishing.
const VANISHING_TOL: f64 = 1e-6;
/// Samples closer to `t_max` than this (relative to `max(1, |t_max|)`) are
/// left out of rate fits: `t_max - t` is dominated by rounding of `t` there,
/// which matters once `k > 1` pushes the remaining time below `gap^k`.
const REMAINING_FLOOR: f64 = 1e-11;
/// Minimum number of samples in the tail fit.
const TAIL_MIN_SAMPLES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmaxEstimate {
    pub t_max: f64,
    pub tail: f64,
    pub tail_fraction: f64,
}

/// `t_max = t(tau_end) + int_{tau_end}^inf dt/dtau`, with the remaining
/// integral taken from an exponential fit `dt/dtau ~ A e^{-k lambda tau}`
/// over the last decade of the horizon gap.
pub fn estimate_tmax(traj: &Trajectory, lambda_decay: f64, k: f64) -> Result<TmaxEstimate> {
    if traj.stop_reason != StopReason::HorizonReached {
        return Err(Error::NotConverged(traj.stop_reason.as_str().into()));
    }
    if !(lambda_decay > 0.0 && k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "decay rate and order must be positive (lambda = {lambda_decay}, k = {k})"
        )));
    }
    let last = traj.last();
    let rate = k * lambda_decay;
    let cutoff = 10.0 * last.gap;
    let mut tail_samples: Vec<_> = traj
        .samples
        .iter()
        .filter(|s| s.gap <= cutoff && s.dt_dtau > 0.0)
        .collect();
    if tail_samples.len() < TAIL_MIN_SAMPLES {
        let start = traj.samples.len().saturating_sub(TAIL_MIN_SAMPLES);
        tail_samples = traj.samples[start..].iter().filter(|s| s.dt_dtau > 0.0).collect();
    }
    let tail = if tail_samples.is_empty() {
        0.0
    } else {
        let log_a = tail_samples.iter().map(|s| s.dt_dtau.ln() + rate * s.tau).sum::<f64>() / tail_samples.len() as f64;
        (log_a - rate * last.tau).exp() / rate
    };
    let t_max = last.t + tail;
    let elapsed = t_max - traj.samples[0].t;
    Ok(TmaxEstimate {
        t_max,
        tail,
        tail_fraction: if elapsed > 0.0 { tail / elapsed } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub fitted_exponent: f64,
    pub r2: f64,
    pub leading_coefficient: f64,
    pub samples: usize,
}

/// Regresses `ln|y_i|` on `ln(t_max - t)` over the gap window.
pub fn fit_rate(
    traj: &Trajectory,
    t_max: f64,
    component: usize,
    htype: &HomogeneityType,
    window: GapWindow,
) -> Result<RateFit> {
    if component >= htype.dim() || htype.alpha()[component] == 0 {
        return Err(Error::InvalidInput(format!(
            "component {component} is not a scaled variable"
        )));
    }
    let lead = match &traj.chart {
        Chart::Directional(c) => Some(c.index()),
        Chart::Parabolic(_) => None,
    };
    if Some(component) != lead && traj.last().coords[component].abs() < VANISHING_TOL {
        return Err(Error::VanishingComponent { component });
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut sign = 0.0;
    let floor = REMAINING_FLOOR * t_max.abs().max(1.0);
    for s in traj.samples.iter().filter(|s| window.contains(s.gap)) {
        let remaining = t_max - s.t;
        if !(remaining > floor) {
            continue;
        }
        let yi = traj.chart.project(&s.coords)?[component];
        if yi == 0.0 {
            continue;
        }
        sign = yi.signum();
        x.push(remaining.ln());
        y.push(yi.abs().ln());
    }
    if x.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::InsufficientWindow {
            found: x.len(),
            required: MIN_WINDOW_SAMPLES,
        });
    }
    let (a, b, r2) = linear_fit(&x, &y);
    Ok(RateFit {
        fitted_exponent: b,
        r2,
        leading_coefficient: sign * a.exp(),
        samples: x.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateOutcome {
    Fitted(RateFit),
    /// The profile component tends to zero; no rate is claimed.
    Vanishing,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentRate {
    pub index: usize,
    pub predicted_exponent: f64,
    pub outcome: RateOutcome,
}

impl ComponentRate {
    pub fn fit(&self) -> Option<&RateFit> {
        match &self.outcome {
            RateOutcome::Fitted(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub t_max: f64,
    pub t_max_tail_fraction: f64,
    pub lambda_decay: f64,
    pub residual_slope: f64,
    pub components: Vec<ComponentRate>,
    pub type1_confirmed: bool,
    pub target: Equilibrium,
}

/// The equilibrium nearest to the trajectory's end point, if within
/// [`TARGET_RADIUS`].
pub fn nearest_target<'a>(traj: &Trajectory, targets: &'a [Equilibrium]) -> Option<&'a Equilibrium> {
    let end = &traj.last().coords;
    targets
        .iter()
        .map(|e| (e.distance(end), e))
        .filter(|(d, _)| *d < TARGET_RADIUS)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, e)| e)
}

pub fn build_report(traj: &Trajectory, targets: &[Equilibrium], htype: &HomogeneityType) -> Result<BlowupReport> {
    let target = nearest_target(traj, targets)
        .ok_or(Error::NoTargetFound { radius: TARGET_RADIUS })?
        .clone();
    let window = GapWindow::default();
    let decay = estimate_decay(traj, window)?;
    let tmax = estimate_tmax(traj, decay.lambda, htype.k())?;

    let components: Vec<ComponentRate> = htype
        .i_alpha()
        .iter()
        .map(|&i| ComponentRate {
            index: i,
            predicted_exponent: htype.predicted_exponent(i),
            outcome: match fit_rate(traj, tmax.t_max, i, htype, window) {
                Ok(f) => RateOutcome::Fitted(f),
                Err(Error::VanishingComponent { .. }) => RateOutcome::Vanishing,
                Err(e) => RateOutcome::Failed(e.to_string()),
            },
        })
        .collect();

    let fitted: Vec<_> = components.iter().filter_map(|c| c.fit().map(|f| (c, f))).collect();
    let type1_confirmed = !fitted.is_empty()
        && components.iter().all(|c| !matches!(c.outcome, RateOutcome::Failed(_)))
        && fitted.iter().all(|(c, f)| {
            f.r2 > 0.999 && (f.fitted_exponent - c.predicted_exponent).abs() < 0.05 * c.predicted_exponent.abs()
        });

    Ok(BlowupReport {
        t_max: tmax.t_max,
        t_max_tail_fraction: tmax.tail_fraction,
        lambda_decay: decay.lambda,
        residual_slope: decay.residual_slope,
        components,
        type1_confirmed,
        target,
    })
}
