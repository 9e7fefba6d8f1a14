//! Dormand–Prince 5(4) on the augmented state `(coords, t)`, so the
//! original time is reconstructed at the same order as the flow itself.

use crate::desingularize::DesingField;
use crate::embedding::Chart;
use crate::error::{Error, Result};

const MIN_STEP: f64 = 1e-15;
/// Points this far past the horizon are accepted as rounding of a horizon point.
const GAP_ROUNDING: f64 = 1e-14;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
// PI exponents (Hairer, Nørsett & Wanner II.4, beta = 0.04)
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

// The field is autonomous in tau, so the stage nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub tau_max: f64,
    /// Stop once the horizon gap drops below this; `0` integrates through
    /// to `tau_max` without horizon checks.
    pub horizon_eps: f64,
    /// Upper bound on the step in `tau`, which also keeps the output dense.
    pub max_step: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            tau_max: 200.0,
            horizon_eps: 1e-12,
            max_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub tau: f64,
    pub coords: Vec<f64>,
    pub t: f64,
    pub dt_dtau: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    HorizonReached,
    TauExhausted,
    LeftDomain,
    Diverged,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::HorizonReached => "horizon_reached",
            StopReason::TauExhausted => "tau_exhausted",
            StopReason::LeftDomain => "left_domain",
            StopReason::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub chart: Chart,
    pub samples: Vec<Sample>,
    pub stop_reason: StopReason,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

struct Rhs<'a> {
    field: &'a DesingField,
    check_gap: bool,
}

impl Rhs<'_> {
    /// `(g(x), dt/dtau)` packed as one vector.
    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        let n = z.len() - 1;
        let x = &z[..n];
        if self.check_gap && self.field.horizon_gap(x) < 0.0 {
            return Err(Error::ChartDomain("stage left the chart".into()));
        }
        let g = self.field.eval(x)?;
        out[..n].copy_from_slice(&g);
        out[n] = self.field.time_factor(x)?;
        if out.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain("non-finite field value".into()))
        }
    }
}

fn axpy(z: &[f64], h: f64, terms: &[(f64, &[f64])], out: &mut [f64]) {
    for i in 0..z.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = z[i] + h * acc;
    }
}

fn error_norm(z: &[f64], znew: &[f64], err: &[f64], c: &Controls) -> f64 {
    let sum: f64 = z
        .iter()
        .zip(znew)
        .zip(err)
        .map(|((a, b), e)| {
            let sc = c.abs_tol + c.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / z.len() as f64).sqrt()
}

fn sample(field: &DesingField, tau: f64, z: &[f64], dt_dtau: f64) -> Sample {
    let n = z.len() - 1;
    Sample {
        tau,
        coords: z[..n].to_vec(),
        t: z[n],
        dt_dtau,
        gap: field.horizon_gap(&z[..n]),
    }
}

/// Integrates `dx/dtau = g(x)`, `dt/dtau = time factor` from `(x0, t0)`.
pub fn integrate(field: &DesingField, x0: &[f64], t0: f64, controls: &Controls) -> Result<Trajectory> {
    let n = field.dim();
    if x0.len() != n {
        return Err(Error::InvalidInput(format!(
            "initial point has dimension {}, field has {}",
            x0.len(),
            n
        )));
    }
    if !(controls.rel_tol > 0.0 && controls.abs_tol > 0.0 && controls.tau_max >= 0.0 && controls.max_step > 0.0) {
        return Err(Error::InvalidInput("integration controls must be positive".into()));
    }
    if field.horizon_gap(x0) < -GAP_ROUNDING {
        return Err(Error::ChartDomain("initial point lies outside the chart".into()));
    }

    let rhs = Rhs {
        field,
        check_gap: controls.horizon_eps > 0.0,
    };
    let m = n + 1;
    let mut z = x0.to_vec();
    z.push(t0);
    let mut k1 = vec![0.0; m];
    rhs.eval(&z, &mut k1)?;

    let chart = field.chart().clone();
    let mut samples = vec![sample(field, 0.0, &z, k1[n])];
    let finish = |samples: Vec<Sample>, reason| Trajectory {
        chart: chart.clone(),
        samples,
        stop_reason: reason,
    };
    if controls.horizon_eps > 0.0 && samples[0].gap < controls.horizon_eps {
        return Ok(finish(samples, StopReason::HorizonReached));
    }

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; m],
        vec![0.0; m],
        vec![0.0; m],
        vec![0.0; m],
        vec![0.0; m],
        vec![0.0; m],
    );
    let mut stage = vec![0.0; m];
    let mut znew = vec![0.0; m];
    let mut err = vec![0.0; m];

    let mut tau = 0.0;
    let mut h = initial_step(&z, &k1, controls);
    let mut err_old: f64 = 1e-4;
    let mut rejected = false;

    while tau < controls.tau_max {
        let last = tau + h >= controls.tau_max;
        if last {
            h = controls.tau_max - tau;
        }
        let attempt: Result<f64> = (|| {
            axpy(&z, h, &[(A21, &k1)], &mut stage);
            rhs.eval(&stage, &mut k2)?;
            axpy(&z, h, &[(A31, &k1), (A32, &k2)], &mut stage);
            rhs.eval(&stage, &mut k3)?;
            axpy(&z, h, &[(A41, &k1), (A42, &k2), (A43, &k3)], &mut stage);
            rhs.eval(&stage, &mut k4)?;
            axpy(&z, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &mut stage);
            rhs.eval(&stage, &mut k5)?;
            axpy(
                &z,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                &mut stage,
            );
            rhs.eval(&stage, &mut k6)?;
            axpy(
                &z,
                h,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                &mut znew,
            );
            rhs.eval(&znew, &mut k7)?;
            for i in 0..m {
                err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            Ok(error_norm(&z, &znew, &err, controls))
        })();

        match attempt {
            Ok(e) if e.is_finite() && e <= 1.0 => {
                tau = if last { controls.tau_max } else { tau + h };
                std::mem::swap(&mut z, &mut znew);
                std::mem::swap(&mut k1, &mut k7);
                if z.iter().any(|v| !v.is_finite()) {
                    return Ok(finish(samples, StopReason::Diverged));
                }
                let s = sample(field, tau, &z, k1[n]);
                let gap = s.gap;
                samples.push(s);
                if controls.horizon_eps > 0.0 && gap < controls.horizon_eps {
                    return Ok(finish(samples, StopReason::HorizonReached));
                }
                let e = e.max(1e-10);
                let mut fac = e.powf(ALPHA) / err_old.powf(BETA) / SAFETY;
                fac = fac.clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut hnew = h / fac;
                if rejected {
                    hnew = hnew.min(h);
                }
                h = hnew.min(controls.max_step);
                err_old = e;
                rejected = false;
            }
            Ok(e) if e.is_finite() => {
                let fac = (e.powf(ALPHA) / SAFETY).min(1.0 / FAC_MIN);
                h /= fac;
                rejected = true;
            }
            Ok(_) | Err(Error::ChartDomain(_)) | Err(Error::Domain(_)) => {
                h *= 0.25;
                rejected = true;
                if h < MIN_STEP {
                    return Ok(finish(samples, StopReason::LeftDomain));
                }
                continue;
            }
            Err(other) => return Err(other),
        }
        if h < MIN_STEP {
            if z.iter().any(|v| v.abs() > 1e100) {
                return Ok(finish(samples, StopReason::Diverged));
            }
            return Err(Error::StepFailure { tau, step: h });
        }
    }
    Ok(finish(samples, StopReason::TauExhausted))
}

fn initial_step(z: &[f64], f: &[f64], c: &Controls) -> f64 {
    let scaled = |v: &[f64]| -> f64 {
        let s: f64 = v
            .iter()
            .zip(z)
            .map(|(a, b)| (a / (c.abs_tol + c.rel_tol * b.abs())).powi(2))
            .sum();
        (s / v.len() as f64).sqrt()
    };
    let d0 = scaled(z);
    let d1 = scaled(f);
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.clamp(1e-8, c.max_step)
}
