//! Equilibria of the desingularized field on the horizon, and their
//! continuation in a frozen parameter (time, for nonautonomous systems).

use nalgebra::{Complex, DMatrix, DVector};

use super::spectrum::{classify_split, eigenvalues, split_spectrum, Classification, SpectralSplit};
use crate::desingularize::DesingField;
use crate::embedding::Chart;
use crate::error::{Error, Result};

pub const RESIDUAL_TOL: f64 = 1e-10;
pub const HORIZON_TOL: f64 = 1e-12;
const MERGE_TOL: f64 = 1e-8;
const GN_MAX_ITER: usize = 100;
const GN_MAX_HALVINGS: usize = 40;
const GRID_PER_AXIS: usize = 7;
const PARABOLIC_BOX: f64 = 1.05;
const DIRECTIONAL_BOX: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub chart: Chart,
    pub coords: Vec<f64>,
    pub t_slice: Option<f64>,
    pub residual: f64,
    pub jacobian: DMatrix<f64>,
    pub eigenvalues: Vec<Complex<f64>>,
    pub split: SpectralSplit,
    pub classification: Classification,
}

impl Equilibrium {
    /// Evaluates and classifies a candidate point (no solving).
    pub fn at(field: &DesingField, coords: Vec<f64>, tangential_dims: usize) -> Result<Self> {
        let g = field.eval(&coords)?;
        let jacobian = field.jacobian(&coords)?;
        let eigenvalues = eigenvalues(&jacobian)?;
        let split = split_spectrum(&eigenvalues);
        let classification = classify_split(&split, tangential_dims);
        Ok(Self {
            chart: field.chart().clone(),
            t_slice: field.is_nonautonomous().then(|| coords[0]),
            residual: norm(&g),
            coords,
            jacobian,
            eigenvalues,
            split,
            classification,
        })
    }

    pub fn distance(&self, coords: &[f64]) -> f64 {
        max_dist(&self.coords, coords)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// What to hold fixed and where to start looking.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchSpec {
    /// Coordinates held at fixed values (unscaled variables such as time).
    pub frozen: Vec<(usize, f64)>,
    /// Explicit starting points; when empty a seed grid is generated.
    pub seeds: Vec<Vec<f64>>,
    /// Expected number of neutral eigenvalues; defaults to `frozen.len()`.
    pub tangential_dims: Option<usize>,
}

impl SearchSpec {
    pub fn frozen(frozen: Vec<(usize, f64)>) -> Self {
        Self {
            frozen,
            ..Self::default()
        }
    }
}

fn free_indices(field: &DesingField, frozen: &[(usize, f64)]) -> Vec<usize> {
    let skip = match field.chart() {
        Chart::Directional(c) => Some(c.index()),
        Chart::Parabolic(_) => None,
    };
    (0..field.dim())
        .filter(|i| Some(*i) != skip && !frozen.iter().any(|(j, _)| j == i))
        .collect()
}

/// Residual of the horizon-constrained system: all components of `g`,
/// plus `P - 1` in the parabolic chart.
fn system(field: &DesingField, x: &[f64]) -> Result<Vec<f64>> {
    let mut r = field.eval(x)?;
    if field.chart().is_parabolic() {
        r.push(-field.horizon_gap(x));
    }
    Ok(r)
}

fn system_jacobian(field: &DesingField, x: &[f64], free: &[usize]) -> Result<DMatrix<f64>> {
    let jac = field.jacobian(x)?;
    let n = field.dim();
    let rows = if field.chart().is_parabolic() { n + 1 } else { n };
    let mut out = DMatrix::zeros(rows, free.len());
    for (c, &j) in free.iter().enumerate() {
        for i in 0..n {
            out[(i, c)] = jac[(i, j)];
        }
    }
    if field.chart().is_parabolic() {
        let grad = field.chart().gap_gradient(x);
        for (c, &j) in free.iter().enumerate() {
            out[(n, c)] = -grad[j];
        }
    }
    Ok(out)
}

/// Gauss–Newton with backtracking on the free coordinates of `seed`.
pub fn solve_equilibrium(field: &DesingField, seed: &[f64], frozen: &[(usize, f64)]) -> Option<Vec<f64>> {
    let free = free_indices(field, frozen);
    let mut x = seed.to_vec();
    for &(j, v) in frozen {
        x[j] = v;
    }
    if let Chart::Directional(c) = field.chart() {
        x[c.index()] = 0.0;
    }
    let mut r = system(field, &x).ok()?;
    let mut rn = norm(&r);
    for _ in 0..GN_MAX_ITER {
        if rn < 1e-14 {
            break;
        }
        let jac = system_jacobian(field, &x, &free).ok()?;
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
        let delta = jac.svd(true, true).solve(&rhs, 1e-14).ok()?;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..GN_MAX_HALVINGS {
            let mut trial = x.clone();
            for (c, &j) in free.iter().enumerate() {
                trial[j] += step * delta[c];
            }
            if let Ok(rt) = system(field, &trial) {
                let tn = norm(&rt);
                if tn < rn {
                    x = trial;
                    r = rt;
                    rn = tn;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved || delta.norm() * step < 1e-15 * (1.0 + norm(&x)) {
            break;
        }
    }
    let g = field.eval(&x).ok()?;
    let on_horizon = field.horizon_gap(&x).abs() < HORIZON_TOL;
    (norm(&g) < RESIDUAL_TOL && on_horizon && x.iter().all(|v| v.is_finite())).then_some(x)
}

fn grid(free: &[usize], lo: f64, hi: f64, base: &[f64]) -> Vec<Vec<f64>> {
    let step = (hi - lo) / (GRID_PER_AXIS - 1) as f64;
    let total = GRID_PER_AXIS.pow(free.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut p = base.to_vec();
            for &j in free {
                p[j] = lo + step * (code % GRID_PER_AXIS) as f64;
                code /= GRID_PER_AXIS;
            }
            p
        })
        .collect()
}

/// Default seeds: a uniform grid in the free coordinates, pushed radially
/// onto the horizon (parabolic) or placed at `s = 0` (directional).
pub fn default_seeds(field: &DesingField, frozen: &[(usize, f64)]) -> Vec<Vec<f64>> {
    let free = free_indices(field, frozen);
    let mut base = vec![0.0; field.dim()];
    for &(j, v) in frozen {
        base[j] = v;
    }
    match field.chart() {
        Chart::Parabolic(_) => grid(&free, -PARABOLIC_BOX, PARABOLIC_BOX, &base)
            .into_iter()
            .filter_map(|p| field.chart().to_horizon(&p))
            .collect(),
        Chart::Directional(_) => grid(&free, -DIRECTIONAL_BOX, DIRECTIONAL_BOX, &base),
    }
}

/// Solves from every seed, merges duplicates and classifies the results.
pub fn find_horizon_equilibria(field: &DesingField, spec: &SearchSpec) -> Result<Vec<Equilibrium>> {
    let n = field.dim();
    if let Some(&(j, _)) = spec.frozen.iter().find(|(j, _)| *j >= n) {
        return Err(Error::InvalidInput(format!("frozen coordinate {j} out of range")));
    }
    if let Some(s) = spec.seeds.iter().find(|s| s.len() != n) {
        return Err(Error::InvalidInput(format!(
            "seed has dimension {}, field has {n}",
            s.len()
        )));
    }
    let seeds = if spec.seeds.is_empty() {
        default_seeds(field, &spec.frozen)
    } else {
        spec.seeds.clone()
    };
    let tangential = spec.tangential_dims.unwrap_or(spec.frozen.len());

    let mut found: Vec<Vec<f64>> = Vec::new();
    for seed in &seeds {
        if let Some(x) = solve_equilibrium(field, seed, &spec.frozen) {
            if !found.iter().any(|f| max_dist(f, &x) < MERGE_TOL) {
                found.push(x);
            }
        }
    }
    found.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    found
        .into_iter()
        .map(|x| Equilibrium::at(field, x, tangential))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCurve {
    pub samples: Vec<Equilibrium>,
    /// `(max Re, min |Re|)` over all normal (non-neutral) eigenvalues.
    pub normal_spectrum_bounds: (f64, f64),
}

/// Natural-parameter continuation in coordinate 0 (the time variable):
/// each slice is solved from the previous solution.
pub fn trace_equilibrium_curve(
    field: &DesingField,
    t_range: (f64, f64),
    t_step: f64,
    seed: &[f64],
) -> Result<EquilibriumCurve> {
    if !field.is_nonautonomous() {
        return Err(Error::InvalidInput("curve continuation needs a time variable".into()));
    }
    if !(t_step > 0.0) || !(t_range.1 >= t_range.0) {
        return Err(Error::InvalidInput("invalid continuation range".into()));
    }
    if seed.len() != field.dim() {
        return Err(Error::InvalidInput(format!(
            "seed has dimension {}, field has {}",
            seed.len(),
            field.dim()
        )));
    }
    let alpha = field.htype().alpha();
    let others: Vec<usize> = (1..field.dim()).filter(|&j| alpha[j] == 0).collect();
    let steps = ((t_range.1 - t_range.0) / t_step).round().max(0.0) as usize;

    let mut prev = seed.to_vec();
    let mut samples = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = if i == steps {
            t_range.1
        } else {
            t_range.0 + i as f64 * t_step
        };
        let mut frozen = vec![(0, t)];
        frozen.extend(others.iter().map(|&j| (j, seed[j])));
        let mut start = prev.clone();
        start[0] = t;
        let x = solve_equilibrium(field, &start, &frozen).ok_or(Error::CurveBreak { t })?;
        if i > 0 && max_dist(&x, &prev) > 10.0 * t_step * norm(&x).max(1.0) {
            return Err(Error::CurveBreak { t });
        }
        samples.push(Equilibrium::at(field, x.clone(), frozen.len())?);
        prev = x;
    }

    let mut max_re = f64::NEG_INFINITY;
    let mut min_abs = f64::INFINITY;
    for eq in &samples {
        for &i in eq.split.stable.iter().chain(&eq.split.unstable) {
            let re = eq.eigenvalues[i].re;
            max_re = max_re.max(re);
            min_abs = min_abs.min(re.abs());
        }
    }
    Ok(EquilibriumCurve {
        samples,
        normal_spectrum_bounds: (max_re, min_abs),
    })
}
