//! Analysis configuration: JSON layout, defaults and validation.

use horizon_core::{
    classify_monomials, infer_type, Chart, DesingField, DirectionalChart, FieldSpec, HomogeneityType, Monomial,
    ParabolicChart, Sign,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    /// `pointer` is a JSON pointer into the config document (empty for the root).
    #[error("schema error at '{pointer}': {message}")]
    Schema { pointer: String, message: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown example '{0}'")]
    UnknownExample(String),
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub schema: u32,
    pub field: FieldConfig,
    pub homogeneity: HomogeneityConfig,
    pub chart: ChartConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibria: Option<EquilibriaConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveConfig>,
    #[serde(default)]
    pub runs: Vec<RunConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub variables: Vec<String>,
    #[serde(default)]
    pub nonautonomous: bool,
    /// One list of monomials per variable.
    pub components: Vec<Vec<MonomialConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialConfig {
    pub coeff: f64,
    pub exponents: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum HomogeneityConfig {
    Explicit {
        alpha: Vec<u32>,
        k: f64,
    },
    Infer {
        #[serde(default = "default_alpha_max")]
        alpha_max: u32,
    },
}

fn default_alpha_max() -> u32 {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChartConfig {
    Parabolic,
    Directional { index: usize, sign: i32 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriaConfig {
    /// Values of the unscaled coordinates, in index order, one entry per slice.
    pub slices: Vec<Vec<f64>>,
    /// Extra starting points (full coordinate vectors in the chart).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub range: [f64; 2],
    pub step: f64,
    /// Starting point in chart coordinates at `range[0]`.
    pub seed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Initial point in the original coordinates.
    pub initial: Vec<f64>,
    /// Initial time; for nonautonomous fields it defaults to `initial[0]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_horizon_eps")]
    pub horizon_eps: f64,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
}

fn default_tau_max() -> f64 {
    200.0
}
fn default_rel_tol() -> f64 {
    1e-10
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_horizon_eps() -> f64 {
    1e-12
}
fn default_max_step() -> f64 {
    horizon_core::Controls::default().max_step
}

impl RunConfig {
    pub fn new(initial: Vec<f64>, t0: Option<f64>) -> Self {
        Self {
            initial,
            t0,
            tau_max: default_tau_max(),
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            horizon_eps: default_horizon_eps(),
            max_step: default_max_step(),
        }
    }

    pub fn controls(&self) -> horizon_core::Controls {
        horizon_core::Controls {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            tau_max: self.tau_max,
            horizon_eps: self.horizon_eps,
            max_step: self.max_step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_directory() -> String {
    "horizon-out".into()
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn escape_token(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    path.iter()
        .filter_map(|seg| match seg {
            Segment::Seq { index } => Some(format!("/{index}")),
            Segment::Map { key } => Some(format!("/{}", escape_token(key))),
            Segment::Enum { .. } | Segment::Unknown => None,
        })
        .collect()
}

/// Parses and validates a config document.
pub fn parse_config(text: &[u8]) -> Result<AnalysisConfig, ConfigError> {
    let text = std::str::from_utf8(text).map_err(|e| schema("", format!("not UTF-8: {e}")))?;
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: AnalysisConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        schema(pointer, e.into_inner().to_string())
    })?;
    validate(&config)?;
    Ok(config)
}

pub fn to_json(config: &AnalysisConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s
}

/// Structural checks that do not need the numerical machinery.
pub fn validate(config: &AnalysisConfig) -> Result<(), ConfigError> {
    if config.schema != SCHEMA_VERSION {
        return Err(schema(
            "/schema",
            format!("unsupported schema version {}", config.schema),
        ));
    }
    let f = &config.field;
    let n = f.variables.len();
    if n == 0 {
        return Err(schema("/field/variables", "at least one variable is required"));
    }
    for (i, v) in f.variables.iter().enumerate() {
        if f.variables[..i].contains(v) {
            return Err(schema(
                format!("/field/variables/{i}"),
                format!("duplicate variable '{v}'"),
            ));
        }
    }
    if f.components.len() != n {
        return Err(schema(
            "/field/components",
            format!("{} components for {n} variables", f.components.len()),
        ));
    }
    for (i, comp) in f.components.iter().enumerate() {
        for (j, m) in comp.iter().enumerate() {
            let at = format!("/field/components/{i}/{j}");
            if !m.coeff.is_finite() {
                return Err(schema(format!("{at}/coeff"), "coefficient must be finite"));
            }
            if m.exponents.len() != n {
                return Err(schema(
                    format!("{at}/exponents"),
                    format!("{} exponents, expected {n}", m.exponents.len()),
                ));
            }
            if m.exponents.iter().any(|e| !e.is_finite()) {
                return Err(schema(format!("{at}/exponents"), "exponents must be finite"));
            }
        }
    }
    if f.nonautonomous {
        let c0 = &f.components[0];
        let unit = c0.len() == 1 && c0[0].coeff == 1.0 && c0[0].exponents.iter().all(|&e| e == 0.0);
        if !unit {
            return Err(schema(
                "/field/components/0",
                "a nonautonomous field must have the time equation t' = 1 as component 0",
            ));
        }
    }

    match &config.homogeneity {
        HomogeneityConfig::Explicit { alpha, k } => {
            if alpha.len() != n {
                return Err(schema(
                    "/homogeneity/alpha",
                    format!("{} entries for {n} variables", alpha.len()),
                ));
            }
            if alpha.iter().all(|&a| a == 0) {
                return Err(schema("/homogeneity/alpha", "type must not be identically zero"));
            }
            if f.nonautonomous && alpha[0] != 0 {
                return Err(schema("/homogeneity/alpha/0", "the time variable must be unscaled"));
            }
            if !(k.is_finite() && *k > 0.0) {
                return Err(schema("/homogeneity/k", "order offset k must be positive"));
            }
            if let ChartConfig::Directional { index, .. } = config.chart {
                if index < n && alpha[index] == 0 {
                    return Err(schema("/chart/index", "directional index must be a scaled variable"));
                }
            }
        }
        HomogeneityConfig::Infer { alpha_max } => {
            if *alpha_max < 1 {
                return Err(schema("/homogeneity/alpha_max", "alpha_max must be at least 1"));
            }
        }
    }
    if let ChartConfig::Directional { index, sign } = config.chart {
        if index >= n {
            return Err(schema("/chart/index", format!("index {index} out of range")));
        }
        if sign != 1 && sign != -1 {
            return Err(schema("/chart/sign", "sign must be 1 or -1"));
        }
    }

    if let Some(eq) = &config.equilibria {
        for (i, s) in eq.seeds.iter().enumerate() {
            if s.len() != n {
                return Err(schema(
                    format!("/equilibria/seeds/{i}"),
                    format!("expected {n} coordinates"),
                ));
            }
        }
    }
    for (i, c) in config.curves.iter().enumerate() {
        let at = format!("/curves/{i}");
        if !f.nonautonomous {
            return Err(schema(at, "equilibrium curves need a nonautonomous field"));
        }
        if !(c.step > 0.0) || !(c.range[1] >= c.range[0]) {
            return Err(schema(format!("{at}/range"), "need range[0] <= range[1] and step > 0"));
        }
        if c.seed.len() != n {
            return Err(schema(format!("{at}/seed"), format!("expected {n} coordinates")));
        }
    }
    for (i, r) in config.runs.iter().enumerate() {
        let at = format!("/runs/{i}");
        if r.initial.len() != n {
            return Err(schema(format!("{at}/initial"), format!("expected {n} coordinates")));
        }
        if r.initial.iter().any(|v| !v.is_finite()) {
            return Err(schema(format!("{at}/initial"), "coordinates must be finite"));
        }
        for (name, v) in [("rel_tol", r.rel_tol), ("abs_tol", r.abs_tol), ("max_step", r.max_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(schema(format!("{at}/{name}"), "must be positive"));
            }
        }
        if !(r.tau_max.is_finite() && r.tau_max >= 0.0) {
            return Err(schema(format!("{at}/tau_max"), "must be nonnegative"));
        }
        if !(r.horizon_eps.is_finite() && r.horizon_eps >= 0.0) {
            return Err(schema(format!("{at}/horizon_eps"), "must be nonnegative"));
        }
        if let Some(t0) = r.t0 {
            if !t0.is_finite() {
                return Err(schema(format!("{at}/t0"), "must be finite"));
            }
            if f.nonautonomous && t0 != r.initial[0] {
                return Err(schema(
                    format!("{at}/t0"),
                    "for a nonautonomous field t0 must equal the time coordinate",
                ));
            }
        }
    }
    if config.output.directory.is_empty() {
        return Err(schema("/output/directory", "must not be empty"));
    }
    Ok(())
}

/// The numerical objects a config describes.
#[derive(Debug, Clone)]
pub struct Problem {
    pub field: FieldSpec,
    pub htype: HomogeneityType,
    pub chart: Chart,
    pub desing: DesingField,
}

impl Problem {
    /// Indices with `alpha_i = 0` (held fixed when searching the horizon).
    pub fn unscaled(&self) -> Vec<usize> {
        (0..self.htype.dim()).filter(|&i| self.htype.alpha()[i] == 0).collect()
    }
}

/// Builds field, type, chart and desingularized field; initial points are
/// checked against the chart domain.
pub fn build_problem(config: &AnalysisConfig) -> Result<Problem, ConfigError> {
    let f = &config.field;
    let mut components = Vec::with_capacity(f.components.len());
    for (i, comp) in f.components.iter().enumerate() {
        let mut ms = Vec::with_capacity(comp.len());
        for (j, m) in comp.iter().enumerate() {
            let mono = Monomial::new(m.coeff, m.exponents.clone())
                .map_err(|e| schema(format!("/field/components/{i}/{j}"), e.to_string()))?;
            ms.push(mono);
        }
        components.push(ms);
    }
    let field = FieldSpec::new(f.variables.clone(), components, f.nonautonomous)
        .map_err(|e| schema("/field", e.to_string()))?;

    let htype = match &config.homogeneity {
        HomogeneityConfig::Explicit { alpha, k } => {
            let h = HomogeneityType::new(alpha.clone(), *k).map_err(|e| schema("/homogeneity", e.to_string()))?;
            classify_monomials(&field, &h).map_err(|e| schema("/homogeneity", e.to_string()))?;
            h
        }
        HomogeneityConfig::Infer { alpha_max } => {
            let mut found = infer_type(&field, *alpha_max).map_err(|e| schema("/homogeneity", e.to_string()))?;
            if let ChartConfig::Directional { index, .. } = config.chart {
                found.retain(|h| h.alpha()[index] > 0);
            }
            if found.is_empty() {
                return Err(schema(
                    "/homogeneity",
                    "no inferred type scales the chart's directional variable",
                ));
            }
            log::info!("inferred type alpha = {:?}, k = {}", found[0].alpha(), found[0].k());
            found.swap_remove(0)
        }
    };

    let chart: Chart = match config.chart {
        ChartConfig::Parabolic => ParabolicChart::new(htype.clone()).into(),
        ChartConfig::Directional { index, sign } => {
            let sign = Sign::from_value(sign).map_err(|e| schema("/chart/sign", e.to_string()))?;
            DirectionalChart::new(htype.clone(), index, sign)
                .map_err(|e| schema("/chart/index", e.to_string()))?
                .into()
        }
    };
    let desing = DesingField::new(&field, &chart).map_err(|e| schema("/field", e.to_string()))?;

    for (i, r) in config.runs.iter().enumerate() {
        chart
            .embed(&r.initial)
            .map_err(|e| schema(format!("/runs/{i}/initial"), e.to_string()))?;
    }
    Ok(Problem {
        field,
        htype,
        chart,
        desing,
    })
}
