//! Built-in example systems, emitted as ready-to-run configs.

use crate::config::{
    AnalysisConfig, ChartConfig, ConfigError, CurveConfig, EquilibriaConfig, FieldConfig, HomogeneityConfig,
    MonomialConfig, OutputConfig, RunConfig, SCHEMA_VERSION,
};

pub const EXAMPLES: [(&str, &str); 4] = [
    ("painleve1", "Painleve I, u'' = 6u^2 + t (parabolic chart)"),
    (
        "kk_dafermos",
        "Dafermos profile of the Keyfitz-Kranser system (directional chart on u2, params: --epsilon)",
    ),
    (
        "selfsimilar",
        "self-similar very fast diffusion profile (directional chart on u, params: --m --beta --alpha-ss)",
    ),
    (
        "mems",
        "quenching MEMS profile in reciprocal form (directional chart w < 0, params: --n-dim --p --q)",
    ),
];

/// Optional example parameters; unset values take the example defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExampleParams {
    pub epsilon: Option<f64>,
    pub m: Option<f64>,
    pub beta: Option<f64>,
    pub alpha_ss: Option<f64>,
    pub n_dim: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

impl ExampleParams {
    fn given(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let pairs = [
            ("epsilon", self.epsilon),
            ("m", self.m),
            ("beta", self.beta),
            ("alpha-ss", self.alpha_ss),
            ("n-dim", self.n_dim),
            ("p", self.p),
            ("q", self.q),
        ];
        for (name, val) in pairs {
            if val.is_some() {
                v.push(name);
            }
        }
        v
    }

    fn only(&self, example: &str, allowed: &[&str]) -> Result<(), ConfigError> {
        match self.given().into_iter().find(|p| !allowed.contains(p)) {
            Some(p) => Err(ConfigError::Domain(format!("{example} does not take --{p}"))),
            None => Ok(()),
        }
    }
}

pub fn list_examples() -> Vec<&'static str> {
    EXAMPLES.iter().map(|(n, _)| *n).collect()
}

pub fn emit_example(name: &str, params: &ExampleParams) -> Result<AnalysisConfig, ConfigError> {
    match name {
        "painleve1" => {
            params.only(name, &[])?;
            Ok(painleve1())
        }
        "kk_dafermos" => {
            params.only(name, &["epsilon"])?;
            kk_dafermos(params.epsilon.unwrap_or(0.0))
        }
        "selfsimilar" => {
            params.only(name, &["m", "beta", "alpha-ss"])?;
            let m = params.m.unwrap_or(-1.0);
            let beta = params.beta.unwrap_or(-1.0);
            // 2 beta = (1 - m) alpha - 1
            let alpha_ss = params.alpha_ss.unwrap_or((2.0 * beta + 1.0) / (1.0 - m));
            selfsimilar(m, beta, alpha_ss)
        }
        "mems" => {
            params.only(name, &["n-dim", "p", "q"])?;
            mems(
                params.n_dim.unwrap_or(3.0),
                params.p.unwrap_or(2.0),
                params.q.unwrap_or(1.0),
            )
        }
        _ => Err(ConfigError::UnknownExample(name.into())),
    }
}

fn mono(coeff: f64, exponents: &[f64]) -> MonomialConfig {
    MonomialConfig {
        coeff,
        exponents: exponents.to_vec(),
    }
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn config(
    field: FieldConfig,
    alpha: Vec<u32>,
    k: f64,
    chart: ChartConfig,
    slices: Vec<Vec<f64>>,
    curves: Vec<CurveConfig>,
    runs: Vec<RunConfig>,
) -> AnalysisConfig {
    AnalysisConfig {
        schema: SCHEMA_VERSION,
        field,
        homogeneity: HomogeneityConfig::Explicit { alpha, k },
        chart,
        equilibria: Some(EquilibriaConfig { slices, seeds: vec![] }),
        curves,
        runs,
        output: OutputConfig::default(),
    }
}

fn finite(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::Domain(format!("{name} must be finite")))
    }
}

/// `chi' = 1, u' = v, v' = 6u^2 + chi`; type (0, 2, 3), order 2.
fn painleve1() -> AnalysisConfig {
    let field = FieldConfig {
        variables: names(&["chi", "u", "v"]),
        nonautonomous: true,
        components: vec![
            vec![mono(1.0, &[0.0, 0.0, 0.0])],
            vec![mono(1.0, &[0.0, 0.0, 1.0])],
            vec![mono(6.0, &[0.0, 2.0, 0.0]), mono(1.0, &[1.0, 0.0, 0.0])],
        ],
    };
    let u = 17f64.powf(-1.0 / 6.0);
    let v = 2.0 * 17f64.powf(-0.25);
    config(
        field,
        vec![0, 2, 3],
        1.0,
        ChartConfig::Parabolic,
        vec![vec![0.0]],
        vec![CurveConfig {
            range: [0.0, 1.0],
            step: 0.25,
            seed: vec![0.0, u, v],
        }],
        // v0 = 2 u0^{3/2} sits on the blow-up branch v^2 ~ 4u^3
        vec![RunConfig::new(vec![0.0, 10.0, 2.0 * 10f64.powf(1.5)], Some(0.0))],
    )
}

/// Dafermos-profile ODE of the Keyfitz–Kranser system in the self-similar
/// variable `chi`; type (0, 1, 2, 1, 2), order 2.
fn kk_dafermos(eps: f64) -> Result<AnalysisConfig, ConfigError> {
    let eps = finite("epsilon", eps)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(ConfigError::Domain(format!(
            "epsilon must satisfy 0 <= epsilon < 1, got {eps}"
        )));
    }
    let mut chi = vec![];
    let mut w1 = vec![];
    let mut w2 = vec![];
    if eps != 0.0 {
        chi.push(mono(eps, &[0.0; 5]));
        w1.push(mono(-eps, &[0.0, 1.0, 0.0, 0.0, 0.0]));
        w2.push(mono(-eps, &[0.0, 0.0, 1.0, 0.0, 0.0]));
    }
    let field = FieldConfig {
        variables: names(&["chi", "u1", "u2", "w1", "w2"]),
        nonautonomous: false,
        components: vec![
            chi,
            vec![
                mono(1.0, &[0.0, 2.0, 0.0, 0.0, 0.0]),
                mono(-1.0, &[0.0, 0.0, 1.0, 0.0, 0.0]),
                mono(-1.0, &[1.0, 1.0, 0.0, 0.0, 0.0]),
                mono(-1.0, &[0.0, 0.0, 0.0, 1.0, 0.0]),
            ],
            vec![
                mono(1.0 / 3.0, &[0.0, 3.0, 0.0, 0.0, 0.0]),
                mono(-1.0, &[0.0, 1.0, 0.0, 0.0, 0.0]),
                mono(-1.0, &[1.0, 0.0, 1.0, 0.0, 0.0]),
                mono(-1.0, &[0.0, 0.0, 0.0, 0.0, 1.0]),
            ],
            w1,
            w2,
        ],
    };
    Ok(config(
        field,
        vec![0, 1, 2, 1, 2],
        1.0,
        ChartConfig::Directional { index: 2, sign: 1 },
        vec![vec![0.0]],
        vec![],
        vec![RunConfig::new(vec![0.0, 20.0, 100.0, 0.0, 0.0], Some(0.0))],
    ))
}

/// `chi' = 1, u' = u^{1-m} v, v' = -beta chi u^{1-m} v - alpha u`;
/// type (0, 1, 1), order `2 - m`.
fn selfsimilar(m: f64, beta: f64, alpha_ss: f64) -> Result<AnalysisConfig, ConfigError> {
    let (m, beta, alpha_ss) = (finite("m", m)?, finite("beta", beta)?, finite("alpha_ss", alpha_ss)?);
    if !(m < 0.0) {
        return Err(ConfigError::Domain(format!("selfsimilar needs m < 0, got {m}")));
    }
    if !(beta < 0.0) {
        return Err(ConfigError::Domain(format!("selfsimilar needs beta < 0, got {beta}")));
    }
    let field = FieldConfig {
        variables: names(&["chi", "u", "v"]),
        nonautonomous: true,
        components: vec![
            vec![mono(1.0, &[0.0, 0.0, 0.0])],
            vec![mono(1.0, &[0.0, 1.0 - m, 1.0])],
            vec![mono(-beta, &[1.0, 1.0 - m, 1.0]), mono(-alpha_ss, &[0.0, 1.0, 0.0])],
        ],
    };
    // horizon equilibria sit at x_v = -beta chi
    Ok(config(
        field,
        vec![0, 1, 1],
        1.0 - m,
        ChartConfig::Directional { index: 1, sign: 1 },
        vec![vec![1.0]],
        vec![CurveConfig {
            range: [1.0, 2.0],
            step: 0.05,
            seed: vec![1.0, 0.0, -beta],
        }],
        vec![RunConfig::new(vec![1.0, 10.0, 10.0], Some(1.0))],
    ))
}

/// `r' = 1, w' = v, v' = -(n-1)/r v - r^q w^{p+2} + 2 v^2 / w`, the
/// reciprocal `w = 1/u` of the radial MEMS profile; type (0, 2, p+3), order p+2.
fn mems(n: f64, p: f64, q: f64) -> Result<AnalysisConfig, ConfigError> {
    let (n, p, q) = (finite("n_dim", n)?, finite("p", p)?, finite("q", q)?);
    if !(n >= 1.0 && n.fract() == 0.0) {
        return Err(ConfigError::Domain(format!(
            "n_dim must be a positive integer, got {n}"
        )));
    }
    if !(p >= 2.0 && p.fract() == 0.0 && p % 2.0 == 0.0) {
        return Err(ConfigError::Domain(format!(
            "p must be a positive even integer, got {p}"
        )));
    }
    if !(q >= 0.0) {
        return Err(ConfigError::Domain(format!("q must be nonnegative, got {q}")));
    }
    let mut v_terms = Vec::new();
    if n != 1.0 {
        v_terms.push(mono(-(n - 1.0), &[-1.0, 0.0, 1.0]));
    }
    v_terms.push(mono(-1.0, &[q, p + 2.0, 0.0]));
    v_terms.push(mono(2.0, &[0.0, -1.0, 2.0]));
    let field = FieldConfig {
        variables: names(&["r", "w", "v"]),
        nonautonomous: true,
        components: vec![
            vec![mono(1.0, &[0.0, 0.0, 0.0])],
            vec![mono(1.0, &[0.0, 0.0, 1.0])],
            v_terms,
        ],
    };
    // horizon equilibria x = ±r^{q/2} / sqrt((p-1)/2)
    let x1 = 1.0 / ((p - 1.0) / 2.0).sqrt();
    let curve = |seed: f64| CurveConfig {
        range: [1.0, 2.0],
        step: 0.1,
        seed: vec![1.0, 0.0, seed],
    };
    Ok(config(
        field,
        vec![0, 2, p as u32 + 3],
        p + 1.0,
        ChartConfig::Directional { index: 1, sign: -1 },
        vec![vec![1.0]],
        vec![curve(-x1), curve(x1)],
        vec![RunConfig::new(vec![1.0, -10.0, -500.0], Some(1.0))],
    ))
}
