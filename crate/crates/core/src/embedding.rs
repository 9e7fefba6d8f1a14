//! Charts that bring infinity to a finite horizon.
//!
//! The parabolic chart is global: `y_j = kappa^{alpha_j} x_j` with
//! `kappa = 1 / (1 - P(x))` and `P(x) = sum_{i in I_alpha} x_i^{2 beta_i}`,
//! so the image is `{P < 1}` and the horizon is `{P = 1}`.
//!
//! A directional chart is local to a half-space `{sign * y_i0 > 0}`:
//! `y_i0 = sign * s^{-alpha_i0}` and `y_j = x_j s^{-alpha_j}`. Its coordinate
//! vector keeps the layout of `y`, with `s` stored in slot `i0`; the horizon
//! is `{s = 0}`.

use crate::aqh::HomogeneityType;
use crate::error::{Error, Result};

const KAPPA_MAX_ITER: usize = 200;
const KAPPA_REL_TOL: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(v: i32) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::InvalidInput(format!("chart sign must be +1 or -1, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicChart {
    htype: HomogeneityType,
}

impl ParabolicChart {
    pub fn new(htype: HomogeneityType) -> Self {
        Self { htype }
    }

    pub fn htype(&self) -> &HomogeneityType {
        &self.htype
    }

    /// `P(x)` and its gradient.
    pub fn horizon_value(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut p = 0.0;
        let mut grad = vec![0.0; x.len()];
        for (&i, &b) in self.htype.i_alpha().iter().zip(self.htype.beta()) {
            let e = 2 * b as i32;
            p += x[i].powi(e);
            grad[i] = e as f64 * x[i].powi(e - 1);
        }
        (p, grad)
    }

    /// `P~(y) = sum_{i in I_alpha} y_i^{2 beta_i}` in original coordinates.
    fn original_norm(&self, y: &[f64]) -> f64 {
        self.horizon_value(y).0
    }

    /// Unique root `kappa >= 1` of `kappa^{2c} - kappa^{2c-1} = P~(y)`.
    pub fn solve_kappa(&self, y: &[f64]) -> Result<f64> {
        let target = self.original_norm(y);
        if target == 0.0 {
            return Ok(1.0);
        }
        let two_c = 2 * self.htype.c() as i32;
        let f = |kappa: f64| kappa.powi(two_c - 1) * (kappa - 1.0) - target;
        let df = |kappa: f64| kappa.powi(two_c - 2) * (two_c as f64 * kappa - (two_c - 1) as f64);

        // F is increasing and convex on [1, inf); 1 + P~^{1/2c} already has F >= 0.
        let root = target.powf(1.0 / two_c as f64);
        let mut lo = 1.0;
        let mut hi = 1.0 + root + target;
        let mut kappa = 1.0 + root;
        for _ in 0..KAPPA_MAX_ITER {
            let fk = f(kappa);
            if fk == 0.0 {
                return Ok(kappa);
            }
            if fk > 0.0 {
                hi = kappa;
            } else {
                lo = kappa;
            }
            let mut next = kappa - fk / df(kappa);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - kappa).abs() <= KAPPA_REL_TOL * next {
                return Ok(next);
            }
            kappa = next;
        }
        Err(Error::Convergence {
            iterations: KAPPA_MAX_ITER,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalChart {
    htype: HomogeneityType,
    index: usize,
    sign: Sign,
}

impl DirectionalChart {
    pub fn new(htype: HomogeneityType, index: usize, sign: Sign) -> Result<Self> {
        if index >= htype.dim() || htype.alpha()[index] == 0 {
            return Err(Error::InvalidInput(format!(
                "directional chart index {index} is not a scaled variable"
            )));
        }
        Ok(Self { htype, index, sign })
    }

    pub fn htype(&self) -> &HomogeneityType {
        &self.htype
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Chart {
    Parabolic(ParabolicChart),
    Directional(DirectionalChart),
}

impl From<ParabolicChart> for Chart {
    fn from(c: ParabolicChart) -> Self {
        Chart::Parabolic(c)
    }
}

impl From<DirectionalChart> for Chart {
    fn from(c: DirectionalChart) -> Self {
        Chart::Directional(c)
    }
}

/// A point in chart coordinates together with its distance-like gap to the
/// horizon (`W = 1 - P(x)` or `s`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPoint {
    pub chart: Chart,
    pub coords: Vec<f64>,
    pub horizon_gap: f64,
}

impl EmbeddedPoint {
    /// Inverse of [`Chart::embed`] using the stored gap. Recomputing the
    /// gap from the coordinates (as [`Chart::project`] must) loses about
    /// `ulp / gap` in relative accuracy close to the horizon.
    pub fn project(&self) -> Result<Vec<f64>> {
        self.chart.project_with_gap(&self.coords, self.horizon_gap)
    }
}

impl Chart {
    pub fn htype(&self) -> &HomogeneityType {
        match self {
            Chart::Parabolic(c) => &c.htype,
            Chart::Directional(c) => &c.htype,
        }
    }

    pub fn dim(&self) -> usize {
        self.htype().dim()
    }

    pub fn is_parabolic(&self) -> bool {
        matches!(self, Chart::Parabolic(_))
    }

    /// `W = 1 - P(x)` (parabolic) or `s` (directional).
    pub fn horizon_gap(&self, coords: &[f64]) -> f64 {
        match self {
            Chart::Parabolic(c) => 1.0 - c.horizon_value(coords).0,
            Chart::Directional(c) => coords[c.index],
        }
    }

    /// Gradient of [`Self::horizon_gap`] with respect to the chart coordinates.
    pub fn gap_gradient(&self, coords: &[f64]) -> Vec<f64> {
        match self {
            Chart::Parabolic(c) => {
                let (_, mut g) = c.horizon_value(coords);
                g.iter_mut().for_each(|v| *v = -*v);
                g
            }
            Chart::Directional(c) => {
                let mut g = vec![0.0; coords.len()];
                g[c.index] = 1.0;
                g
            }
        }
    }

    /// Pushes a chart point along its quasi-homogeneous ray onto the horizon.
    /// Returns `None` when the point has no scaled component to scale.
    pub fn to_horizon(&self, coords: &[f64]) -> Option<Vec<f64>> {
        match self {
            Chart::Parabolic(c) => {
                let p = c.horizon_value(coords).0;
                if p <= 0.0 {
                    return None;
                }
                let rho = p.powf(-1.0 / (2.0 * c.htype.c() as f64));
                Some(
                    coords
                        .iter()
                        .zip(c.htype.alpha())
                        .map(|(&x, &a)| x * rho.powi(a as i32))
                        .collect(),
                )
            }
            Chart::Directional(c) => {
                let mut out = coords.to_vec();
                out[c.index] = 0.0;
                Some(out)
            }
        }
    }

    pub fn embed(&self, y: &[f64]) -> Result<EmbeddedPoint> {
        if y.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has dimension {}, chart has {}",
                y.len(),
                self.dim()
            )));
        }
        let alpha = self.htype().alpha();
        match self {
            Chart::Parabolic(c) => {
                let kappa = c.solve_kappa(y)?;
                let coords = y
                    .iter()
                    .zip(alpha)
                    .map(|(&v, &a)| v * kappa.powi(-(a as i32)))
                    .collect();
                Ok(EmbeddedPoint {
                    chart: self.clone(),
                    coords,
                    horizon_gap: 1.0 / kappa,
                })
            }
            Chart::Directional(c) => {
                let lead = c.sign.value() * y[c.index];
                if !(lead > 0.0) {
                    return Err(Error::ChartDomain(format!(
                        "directional chart needs sign * y[{}] > 0, got {}",
                        c.index, y[c.index]
                    )));
                }
                let s = lead.powf(-1.0 / alpha[c.index] as f64);
                let coords = y
                    .iter()
                    .zip(alpha)
                    .enumerate()
                    .map(|(j, (&v, &a))| if j == c.index { s } else { v * s.powi(a as i32) })
                    .collect();
                Ok(EmbeddedPoint {
                    chart: self.clone(),
                    coords,
                    horizon_gap: s,
                })
            }
        }
    }

    /// Inverse of [`Self::embed`] for interior points.
    pub fn project(&self, coords: &[f64]) -> Result<Vec<f64>> {
        self.project_with_gap(coords, self.horizon_gap(coords))
    }

    fn project_with_gap(&self, coords: &[f64], gap: f64) -> Result<Vec<f64>> {
        let alpha = self.htype().alpha();
        if gap == 0.0 {
            return Err(Error::Horizon);
        }
        if gap < 0.0 {
            return Err(Error::ChartDomain(format!("horizon gap {gap} is negative")));
        }
        match self {
            Chart::Parabolic(_) => Ok(coords
                .iter()
                .zip(alpha)
                .map(|(&x, &a)| x * gap.powi(-(a as i32)))
                .collect()),
            Chart::Directional(c) => Ok(coords
                .iter()
                .zip(alpha)
                .enumerate()
                .map(|(j, (&x, &a))| {
                    if j == c.index {
                        c.sign.value() * gap.powi(-(a as i32))
                    } else {
                        x * gap.powi(-(a as i32))
                    }
                })
                .collect()),
        }
    }
}

/// Re-expresses an interior point in another chart.
pub fn transition(point: &EmbeddedPoint, to: &Chart) -> Result<EmbeddedPoint> {
    let y = point.project()?;
    to.embed(&y)
}
