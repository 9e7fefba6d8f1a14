//! Orchestration: horizon equilibria, equilibrium curves and blow-up runs.

use horizon_core::{
    build_report, check_nonresonance, find_horizon_equilibria, integrate, trace_equilibrium_curve, BlowupReport,
    Equilibrium, EquilibriumCurve, SearchSpec, StopReason, Trajectory,
};
use rayon::prelude::*;

use crate::config::{AnalysisConfig, Problem, RunConfig};

/// Imaginary parts below this count as real when testing non-resonance.
const REAL_EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SliceResult {
    /// Values of the unscaled coordinates.
    pub slice: Vec<f64>,
    pub equilibria: Result<Vec<Equilibrium>, String>,
}

#[derive(Debug, Clone)]
pub struct CurveResult {
    pub range: [f64; 2],
    pub step: f64,
    pub curve: Result<EquilibriumCurve, String>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub index: usize,
    pub trajectory: Option<Trajectory>,
    pub report: Result<BlowupReport, String>,
}

impl RunResult {
    pub fn stop_reason(&self) -> Option<StopReason> {
        self.trajectory.as_ref().map(|t| t.stop_reason)
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub slices: Vec<SliceResult>,
    pub curves: Vec<CurveResult>,
    pub runs: Vec<RunResult>,
}

impl Analysis {
    /// 0 when every run produced a report, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.runs.iter().all(|r| r.report.is_ok()) {
            0
        } else {
            2
        }
    }
}

/// Sternberg–Sell check (N = 1) on the normal spectrum, when it is real.
pub fn nonresonant(eq: &Equilibrium) -> Option<bool> {
    let normal: Vec<usize> = eq.split.stable.iter().chain(&eq.split.unstable).copied().collect();
    if normal.is_empty() || normal.iter().any(|&i| eq.eigenvalues[i].im.abs() > REAL_EIG_TOL) {
        return None;
    }
    let re: Vec<f64> = normal.iter().map(|&i| eq.eigenvalues[i].re).collect();
    Some(check_nonresonance(&re, 1).holds)
}

fn frozen(problem: &Problem, values: &[f64]) -> Result<Vec<(usize, f64)>, String> {
    let idx = problem.unscaled();
    if values.len() != idx.len() {
        return Err(format!(
            "slice has {} values, the field has {} unscaled coordinates",
            values.len(),
            idx.len()
        ));
    }
    Ok(idx.into_iter().zip(values.iter().copied()).collect())
}

/// Slices to search: configured ones, else the unscaled coordinates of the
/// first run's initial point, else all zeros.
fn slices(config: &AnalysisConfig, problem: &Problem) -> Vec<Vec<f64>> {
    if let Some(eq) = &config.equilibria {
        return eq.slices.clone();
    }
    let idx = problem.unscaled();
    match config.runs.first() {
        Some(r) => vec![idx.iter().map(|&i| r.initial[i]).collect()],
        None => vec![vec![0.0; idx.len()]],
    }
}

pub fn horizon_equilibria(config: &AnalysisConfig, problem: &Problem) -> Vec<SliceResult> {
    let seeds = config.equilibria.as_ref().map(|e| e.seeds.clone()).unwrap_or_default();
    slices(config, problem)
        .into_iter()
        .map(|slice| {
            let equilibria = frozen(problem, &slice).and_then(|frozen| {
                let mut spec = SearchSpec::frozen(frozen);
                spec.seeds = seeds.clone();
                if !spec.seeds.is_empty() {
                    // explicit seeds supplement the default grid
                    spec.seeds.extend(horizon_core::dynamics::equilibria::default_seeds(
                        &problem.desing,
                        &spec.frozen,
                    ));
                }
                find_horizon_equilibria(&problem.desing, &spec).map_err(|e| e.to_string())
            });
            match &equilibria {
                Ok(v) => log::info!("slice {slice:?}: {} horizon equilibria", v.len()),
                Err(e) => log::warn!("slice {slice:?}: {e}"),
            }
            SliceResult { slice, equilibria }
        })
        .collect()
}

pub fn equilibrium_curves(config: &AnalysisConfig, problem: &Problem) -> Vec<CurveResult> {
    config
        .curves
        .iter()
        .map(|c| CurveResult {
            range: c.range,
            step: c.step,
            curve: trace_equilibrium_curve(&problem.desing, (c.range[0], c.range[1]), c.step, &c.seed)
                .map_err(|e| e.to_string()),
        })
        .collect()
}

/// One blow-up run: embed, integrate to the horizon, and profile against
/// the equilibrium solved at the final slice from the end point.
pub fn execute_run(problem: &Problem, run: &RunConfig, index: usize) -> RunResult {
    let fail = |trajectory, e: String| {
        log::warn!("run {index}: {e}");
        RunResult {
            index,
            trajectory,
            report: Err(e),
        }
    };
    let x0 = match problem.chart.embed(&run.initial) {
        Ok(p) => p.coords,
        Err(e) => return fail(None, e.to_string()),
    };
    let t0 = run.t0.unwrap_or(if problem.field.is_nonautonomous() {
        run.initial[0]
    } else {
        0.0
    });
    let traj = match integrate(&problem.desing, &x0, t0, &run.controls()) {
        Ok(t) => t,
        Err(e) => return fail(None, e.to_string()),
    };
    log::info!(
        "run {index}: {} after {} steps (tau = {})",
        traj.stop_reason.as_str(),
        traj.samples.len() - 1,
        traj.last().tau
    );
    if traj.stop_reason != StopReason::HorizonReached {
        let e = horizon_core::Error::NotConverged(traj.stop_reason.as_str().into()).to_string();
        return fail(Some(traj), e);
    }
    let end = traj.last().coords.clone();
    let frozen: Vec<(usize, f64)> = problem.unscaled().into_iter().map(|i| (i, end[i])).collect();
    let spec = SearchSpec {
        frozen,
        seeds: vec![end],
        tangential_dims: None,
    };
    let report = find_horizon_equilibria(&problem.desing, &spec)
        .and_then(|targets| build_report(&traj, &targets, &problem.htype))
        .map_err(|e| e.to_string());
    match report {
        Ok(r) => RunResult {
            index,
            trajectory: Some(traj),
            report: Ok(r),
        },
        Err(e) => fail(Some(traj), e),
    }
}

/// Runs are independent and are scheduled on `jobs` threads (0: all cores).
pub fn run_all(config: &AnalysisConfig, problem: &Problem, jobs: usize) -> Vec<RunResult> {
    let work = || -> Vec<RunResult> {
        config
            .runs
            .par_iter()
            .enumerate()
            .map(|(i, r)| execute_run(problem, r, i))
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(work),
        Err(e) => {
            log::warn!("thread pool unavailable ({e}); running serially");
            config
                .runs
                .iter()
                .enumerate()
                .map(|(i, r)| execute_run(problem, r, i))
                .collect()
        }
    }
}

pub fn analyze(config: &AnalysisConfig, problem: &Problem, jobs: usize) -> Analysis {
    Analysis {
        slices: horizon_equilibria(config, problem),
        curves: equilibrium_curves(config, problem),
        runs: run_all(config, problem, jobs),
    }
}
