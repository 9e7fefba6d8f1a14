//! CSV and JSON artifacts. Floats use the shortest representation that
//! parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use horizon_core::{Chart, Equilibrium, RateOutcome, Trajectory};
use serde::Serialize;

use crate::config::{Format, Problem};
use crate::pipeline::{nonresonant, Analysis, CurveResult, RunResult, SliceResult};

pub const EQUILIBRIA_CSV: &str = "equilibria.csv";
pub const REPORT_JSON: &str = "report.json";

pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_string()
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn trajectory_file(index: usize) -> String {
    format!("run_{index:03}.csv")
}

/// One row per stored state: the initial point, then one per accepted step.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.chart.dim();
    let mut out = String::from("tau,t");
    for i in 0..n {
        let _ = write!(out, ",coord_{i}");
    }
    out.push_str(",horizon_gap\n");
    for s in &traj.samples {
        out.push_str(&fmt_float(s.tau));
        out.push(',');
        out.push_str(&fmt_float(s.t));
        for c in &s.coords {
            out.push(',');
            out.push_str(&fmt_float(*c));
        }
        out.push(',');
        out.push_str(&fmt_float(s.gap));
        out.push('\n');
    }
    out
}

pub fn equilibria_csv(dim: usize, slices: &[SliceResult]) -> String {
    let mut out = String::from("slice,index");
    for i in 0..dim {
        let _ = write!(out, ",coord_{i}");
    }
    out.push_str(",residual,classification,nonresonant");
    for i in 0..dim {
        let _ = write!(out, ",eig_re_{i},eig_im_{i}");
    }
    out.push('\n');
    for (k, s) in slices.iter().enumerate() {
        let Ok(eqs) = &s.equilibria else { continue };
        for (j, e) in eqs.iter().enumerate() {
            let _ = write!(out, "{k},{j}");
            for c in &e.coords {
                let _ = write!(out, ",{}", fmt_float(*c));
            }
            let nr = match nonresonant(e) {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            };
            let _ = write!(out, ",{},{},{nr}", fmt_float(e.residual), e.classification.as_str());
            for l in &e.eigenvalues {
                let _ = write!(out, ",{},{}", fmt_float(l.re), fmt_float(l.im));
            }
            out.push('\n');
        }
    }
    out
}

#[derive(Serialize)]
struct ChartJson {
    kind: &'static str,
    index: Option<usize>,
    sign: Option<i32>,
}

impl From<&Chart> for ChartJson {
    fn from(c: &Chart) -> Self {
        match c {
            Chart::Parabolic(_) => Self {
                kind: "parabolic",
                index: None,
                sign: None,
            },
            Chart::Directional(d) => Self {
                kind: "directional",
                index: Some(d.index()),
                sign: Some(d.sign().value() as i32),
            },
        }
    }
}

#[derive(Serialize)]
struct HomogeneityJson {
    alpha: Vec<u32>,
    k: f64,
    beta: Vec<u32>,
    c: u32,
}

#[derive(Serialize)]
struct EquilibriumJson {
    coords: Vec<f64>,
    t_slice: Option<f64>,
    residual: f64,
    eigenvalues: Vec<[f64; 2]>,
    classification: &'static str,
    spectral_gap: f64,
    nonresonant: Option<bool>,
}

impl From<&Equilibrium> for EquilibriumJson {
    fn from(e: &Equilibrium) -> Self {
        Self {
            coords: e.coords.clone(),
            t_slice: e.t_slice,
            residual: e.residual,
            eigenvalues: e.eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
            classification: e.classification.as_str(),
            spectral_gap: e.split.gap,
            nonresonant: nonresonant(e),
        }
    }
}

#[derive(Serialize)]
struct SliceJson {
    slice: Vec<f64>,
    error: Option<String>,
    equilibria: Vec<EquilibriumJson>,
}

#[derive(Serialize)]
struct CurveJson {
    range: [f64; 2],
    step: f64,
    error: Option<String>,
    /// `[max Re, min |Re|]` over the normal eigenvalues along the curve.
    normal_spectrum_bounds: Option<[f64; 2]>,
    points: Vec<EquilibriumJson>,
}

#[derive(Serialize)]
struct ComponentJson {
    index: usize,
    variable: String,
    predicted_exponent: f64,
    status: &'static str,
    fitted_exponent: Option<f64>,
    r2: Option<f64>,
    leading_coefficient: Option<f64>,
    samples: Option<usize>,
    error: Option<String>,
}

#[derive(Serialize)]
struct BlowupJson {
    t_max: f64,
    t_max_tail_fraction: f64,
    lambda_decay: f64,
    residual_slope: f64,
    type1_confirmed: bool,
    target: EquilibriumJson,
    components: Vec<ComponentJson>,
}

#[derive(Serialize)]
struct RunJson {
    index: usize,
    status: &'static str,
    stop_reason: Option<&'static str>,
    accepted_steps: Option<usize>,
    tau_end: Option<f64>,
    trajectory_csv: Option<String>,
    error: Option<String>,
    blowup: Option<BlowupJson>,
}

#[derive(Serialize)]
struct ReportJson {
    schema: u32,
    variables: Vec<String>,
    homogeneity: HomogeneityJson,
    chart: ChartJson,
    equilibria: Vec<SliceJson>,
    curves: Vec<CurveJson>,
    runs: Vec<RunJson>,
}

fn slice_json(s: &SliceResult) -> SliceJson {
    let (error, equilibria) = match &s.equilibria {
        Ok(v) => (None, v.iter().map(EquilibriumJson::from).collect()),
        Err(e) => (Some(e.clone()), vec![]),
    };
    SliceJson {
        slice: s.slice.clone(),
        error,
        equilibria,
    }
}

fn curve_json(c: &CurveResult) -> CurveJson {
    match &c.curve {
        Ok(curve) => CurveJson {
            range: c.range,
            step: c.step,
            error: None,
            normal_spectrum_bounds: Some([curve.normal_spectrum_bounds.0, curve.normal_spectrum_bounds.1]),
            points: curve.samples.iter().map(EquilibriumJson::from).collect(),
        },
        Err(e) => CurveJson {
            range: c.range,
            step: c.step,
            error: Some(e.clone()),
            normal_spectrum_bounds: None,
            points: vec![],
        },
    }
}

fn run_json(problem: &Problem, r: &RunResult, csv: bool) -> RunJson {
    let names = problem.field.variable_names();
    let blowup = r.report.as_ref().ok().map(|b| BlowupJson {
        t_max: b.t_max,
        t_max_tail_fraction: b.t_max_tail_fraction,
        lambda_decay: b.lambda_decay,
        residual_slope: b.residual_slope,
        type1_confirmed: b.type1_confirmed,
        target: (&b.target).into(),
        components: b
            .components
            .iter()
            .map(|c| {
                let (status, fit, error) = match &c.outcome {
                    RateOutcome::Fitted(f) => ("fitted", Some(f), None),
                    RateOutcome::Vanishing => ("vanishing", None, None),
                    RateOutcome::Failed(e) => ("failed", None, Some(e.clone())),
                };
                ComponentJson {
                    index: c.index,
                    variable: names[c.index].clone(),
                    predicted_exponent: c.predicted_exponent,
                    status,
                    fitted_exponent: fit.map(|f| f.fitted_exponent),
                    r2: fit.map(|f| f.r2),
                    leading_coefficient: fit.map(|f| f.leading_coefficient),
                    samples: fit.map(|f| f.samples),
                    error,
                }
            })
            .collect(),
    });
    RunJson {
        index: r.index,
        status: if r.report.is_ok() { "ok" } else { "failed" },
        stop_reason: r.stop_reason().map(|s| s.as_str()),
        accepted_steps: r.trajectory.as_ref().map(|t| t.samples.len() - 1),
        tau_end: r.trajectory.as_ref().map(|t| t.last().tau),
        trajectory_csv: (csv && r.trajectory.is_some()).then(|| trajectory_file(r.index)),
        error: r.report.as_ref().err().cloned(),
        blowup,
    }
}

pub fn report_json(problem: &Problem, analysis: &Analysis, csv: bool) -> String {
    let h = &problem.htype;
    let report = ReportJson {
        schema: crate::config::SCHEMA_VERSION,
        variables: problem.field.variable_names().to_vec(),
        homogeneity: HomogeneityJson {
            alpha: h.alpha().to_vec(),
            k: h.k(),
            beta: h.beta().to_vec(),
            c: h.c(),
        },
        chart: (&problem.chart).into(),
        equilibria: analysis.slices.iter().map(slice_json).collect(),
        curves: analysis.curves.iter().map(curve_json).collect(),
        runs: analysis.runs.iter().map(|r| run_json(problem, r, csv)).collect(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

/// Writes the requested artifacts; returns the paths written.
pub fn write_artifacts(
    dir: &Path,
    formats: &[Format],
    problem: &Problem,
    analysis: &Analysis,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = formats.contains(&Format::Csv);
    let mut written = Vec::new();
    if csv {
        let p = dir.join(EQUILIBRIA_CSV);
        fs::write(&p, equilibria_csv(problem.chart.dim(), &analysis.slices))?;
        written.push(p);
        for r in &analysis.runs {
            if let Some(t) = &r.trajectory {
                let p = dir.join(trajectory_file(r.index));
                fs::write(&p, trajectory_csv(t))?;
                written.push(p);
            }
        }
    }
    if formats.contains(&Format::Json) {
        let p = dir.join(REPORT_JSON);
        fs::write(&p, report_json(problem, analysis, csv))?;
        written.push(p);
    }
    Ok(written)
}
