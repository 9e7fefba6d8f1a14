//! Vector fields written as sums of generalized monomials, and the
//! scaling data (type `alpha`, order `k + 1`) that makes them
//! asymptotically quasi-homogeneous at infinity.

use nalgebra::DMatrix;
use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};

type Q = Ratio<i128>;

/// Largest denominator accepted when snapping an exponent to a rational.
const MAX_DENOMINATOR: i128 = 1_000_000;
/// Fallback tolerance for weighted-degree comparisons on irrational data.
const DEGREE_TOL: f64 = 1e-12;

/// `base^exponent` restricted to the real domain.
pub(crate) fn real_pow(base: f64, exponent: f64) -> Result<f64> {
    if exponent == 0.0 {
        return Ok(1.0);
    }
    if exponent.fract() == 0.0 && exponent.abs() < i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(Error::Domain(format!("0^{exponent}")));
        }
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(Error::Domain(format!("({base})^{exponent}")));
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(Error::Domain(format!("0^{exponent}")));
    }
    Ok(base.powf(exponent))
}

pub(crate) fn is_nonnegative_integer(x: f64) -> bool {
    x >= 0.0 && x.fract() == 0.0
}

fn rational(x: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return Some(Q::from_integer(x as i128));
    }
    let r = Q::approximate_float(x)?;
    if r.denom().abs() > MAX_DENOMINATOR {
        return None;
    }
    let back = *r.numer() as f64 / *r.denom() as f64;
    ((back - x).abs() <= 4.0 * f64::EPSILON * x.abs()).then_some(r)
}

/// `k + alpha_i - <m, alpha>`: the power of the horizon gap a monomial picks
/// up under the anisotropic rescaling. Exactly zero for principal monomials.
pub(crate) fn degree_offset(exponents: &[f64], alpha: &[u32], k: f64, alpha_i: u32) -> f64 {
    let exact = (|| {
        let mut acc = rational(k)? + Q::from_integer(alpha_i as i128);
        for (&m, &a) in exponents.iter().zip(alpha) {
            if a != 0 {
                acc -= rational(m)? * Q::from_integer(a as i128);
            }
        }
        Some(acc)
    })();
    match exact {
        Some(q) => *q.numer() as f64 / *q.denom() as f64,
        None => {
            let deg: f64 = exponents.iter().zip(alpha).map(|(&m, &a)| m * a as f64).sum();
            let off = k + alpha_i as f64 - deg;
            if off.abs() < DEGREE_TOL {
                0.0
            } else {
                off
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    coeff: f64,
    exponents: Vec<f64>,
}

impl Monomial {
    pub fn new(coeff: f64, exponents: Vec<f64>) -> Result<Self> {
        if coeff == 0.0 || !coeff.is_finite() {
            return Err(Error::InvalidInput(format!(
                "monomial coefficient must be finite and nonzero, got {coeff}"
            )));
        }
        if let Some(e) = exponents.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite exponent {e}")));
        }
        Ok(Self { coeff, exponents })
    }

    /// The constant monomial `coeff` in `n` variables.
    pub fn constant(coeff: f64, n: usize) -> Result<Self> {
        Self::new(coeff, vec![0.0; n])
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn weighted_degree(&self, alpha: &[u32]) -> f64 {
        self.exponents.iter().zip(alpha).map(|(&m, &a)| m * a as f64).sum()
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let mut v = self.coeff;
        for (&x, &m) in point.iter().zip(&self.exponents) {
            v *= real_pow(x, m)?;
        }
        Ok(v)
    }

    /// Partial derivative with respect to variable `j`.
    pub fn partial(&self, point: &[f64], j: usize) -> Result<f64> {
        let mj = self.exponents[j];
        if mj == 0.0 {
            return Ok(0.0);
        }
        let mut v = self.coeff * mj;
        for (l, (&x, &m)) in point.iter().zip(&self.exponents).enumerate() {
            v *= if l == j { real_pow(x, m - 1.0)? } else { real_pow(x, m)? };
        }
        Ok(v)
    }
}

/// An ODE right-hand side `y' = f(y)` with every `f_i` a finite sum of
/// generalized monomials. When `nonautonomous` is set, variable 0 is the
/// time variable and its equation is `t' = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    variable_names: Vec<String>,
    components: Vec<Vec<Monomial>>,
    nonautonomous: bool,
}

impl FieldSpec {
    pub fn new(variable_names: Vec<String>, components: Vec<Vec<Monomial>>, nonautonomous: bool) -> Result<Self> {
        let n = variable_names.len();
        if n == 0 {
            return Err(Error::InvalidInput("field has no variables".into()));
        }
        if components.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} components for {} variables",
                components.len(),
                n
            )));
        }
        for (i, comp) in components.iter().enumerate() {
            for (j, m) in comp.iter().enumerate() {
                if m.exponents.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "component {i}, monomial {j}: {} exponents, expected {n}",
                        m.exponents.len()
                    )));
                }
            }
        }
        if nonautonomous {
            let c0 = &components[0];
            let is_unit = c0.len() == 1 && c0[0].coeff == 1.0 && c0[0].exponents.iter().all(|&e| e == 0.0);
            if !is_unit {
                return Err(Error::InvalidInput(
                    "nonautonomous field must have t' = 1 as component 0".into(),
                ));
            }
        }
        Ok(Self {
            variable_names,
            components,
            nonautonomous,
        })
    }

    pub fn dim(&self) -> usize {
        self.variable_names.len()
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn components(&self) -> &[Vec<Monomial>] {
        &self.components
    }

    pub fn is_nonautonomous(&self) -> bool {
        self.nonautonomous
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has dimension {}, field has {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        self.components
            .iter()
            .map(|comp| comp.iter().map(|m| m.eval(point)).sum())
            .collect()
    }

    /// Exact Jacobian by the power rule on each monomial.
    pub fn jacobian(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(point)?;
        let n = self.dim();
        let mut jac = DMatrix::zeros(n, n);
        for (i, comp) in self.components.iter().enumerate() {
            for m in comp {
                for j in 0..n {
                    jac[(i, j)] += m.partial(point, j)?;
                }
            }
        }
        Ok(jac)
    }
}

/// `c = lcm{alpha_i > 0}` and the minimal `beta_i = c / alpha_i` over those indices.
pub fn derive_beta(alpha: &[u32]) -> Result<(Vec<u32>, u32)> {
    let positive: Vec<u32> = alpha.iter().copied().filter(|&a| a > 0).collect();
    if positive.is_empty() {
        return Err(Error::InvalidInput("type alpha is identically zero".into()));
    }
    let c = positive.iter().fold(1u32, |acc, &a| acc.lcm(&a));
    Ok((positive.iter().map(|&a| c / a).collect(), c))
}

/// Type `alpha` and order `k + 1` of an asymptotically quasi-homogeneous field.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityType {
    alpha: Vec<u32>,
    k: f64,
    i_alpha: Vec<usize>,
    beta: Vec<u32>,
    c: u32,
}

impl HomogeneityType {
    pub fn new(alpha: Vec<u32>, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "order parameter k must be positive, got {k}"
            )));
        }
        let (beta, c) = derive_beta(&alpha)?;
        let i_alpha = alpha
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| (a > 0).then_some(i))
            .collect();
        Ok(Self {
            alpha,
            k,
            i_alpha,
            beta,
            c,
        })
    }

    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn order(&self) -> f64 {
        self.k + 1.0
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    /// Indices with `alpha_i > 0`, ascending.
    pub fn i_alpha(&self) -> &[usize] {
        &self.i_alpha
    }

    /// `beta` listed in the order of [`Self::i_alpha`].
    pub fn beta(&self) -> &[u32] {
        &self.beta
    }

    pub fn beta_of(&self, i: usize) -> Option<u32> {
        self.i_alpha.iter().position(|&j| j == i).map(|p| self.beta[p])
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    /// Blow-up exponent `-alpha_i / k` predicted for component `i`.
    pub fn predicted_exponent(&self, i: usize) -> f64 {
        -(self.alpha[i] as f64) / self.k
    }

    /// Returns this type with a non-scaled variable inserted at position 0.
    pub fn with_leading_time(&self) -> Self {
        let mut alpha = Vec::with_capacity(self.alpha.len() + 1);
        alpha.push(0);
        alpha.extend_from_slice(&self.alpha);
        Self::new(alpha, self.k).expect("shifting keeps the type admissible")
    }
}

/// Partition of every monomial by weighted degree relative to `k + alpha_i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HomogeneityReport {
    pub principal: Vec<Vec<usize>>,
    pub residual: Vec<Vec<usize>>,
    pub violations: Vec<Vec<usize>>,
}

impl HomogeneityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.iter().all(Vec::is_empty)
    }

    /// True when no component has a principal monomial, i.e. the claimed
    /// order overshoots every term.
    pub fn empty_principal(&self) -> bool {
        self.principal.iter().all(Vec::is_empty)
    }

    pub fn principal_count(&self) -> usize {
        self.principal.iter().map(Vec::len).sum()
    }

    /// Number of scaled components carrying a nonzero principal part.
    pub fn covered_components(&self, htype: &HomogeneityType) -> usize {
        htype
            .i_alpha()
            .iter()
            .filter(|&&i| !self.principal[i].is_empty())
            .count()
    }
}

fn partition(field: &FieldSpec, htype: &HomogeneityType) -> HomogeneityReport {
    let alpha = htype.alpha();
    let mut report = HomogeneityReport::default();
    for (i, comp) in field.components().iter().enumerate() {
        let (mut p, mut r, mut v) = (Vec::new(), Vec::new(), Vec::new());
        for (j, m) in comp.iter().enumerate() {
            let off = degree_offset(m.exponents(), alpha, htype.k(), alpha[i]);
            if off == 0.0 {
                p.push(j);
            } else if off > 0.0 {
                r.push(j);
            } else {
                v.push(j);
            }
        }
        report.principal.push(p);
        report.residual.push(r);
        report.violations.push(v);
    }
    report
}

pub fn classify_monomials(field: &FieldSpec, htype: &HomogeneityType) -> Result<HomogeneityReport> {
    if field.dim() != htype.dim() {
        return Err(Error::InvalidInput(format!(
            "type has {} entries, field has {} variables",
            htype.dim(),
            field.dim()
        )));
    }
    if field.is_nonautonomous() && htype.alpha()[0] != 0 {
        return Err(Error::InvalidInput("time variable must have alpha_0 = 0".into()));
    }
    let report = partition(field, htype);
    let count: usize = report.violations.iter().map(Vec::len).sum();
    if count > 0 {
        let (component, monomial) = report
            .violations
            .iter()
            .enumerate()
            .find_map(|(i, v)| v.first().map(|&j| (i, j)))
            .unwrap();
        return Err(Error::NotAqh {
            count,
            component,
            monomial,
        });
    }
    Ok(report)
}

/// Searches integer types with entries in `[0, alpha_max]`.
///
/// For each primitive `alpha` (gcd 1) the smallest admissible order is
/// `k = max_i max_m (<m, alpha> - alpha_i)`; candidates with `k > 0` are kept.
/// Ranking prefers types whose principal part touches the most scaled
/// components, then the most principal monomials, then the smallest
/// `|alpha|_1`, then the larger `k`.
pub fn infer_type(field: &FieldSpec, alpha_max: u32) -> Result<Vec<HomogeneityType>> {
    if alpha_max < 1 {
        return Err(Error::InvalidInput("alpha_max must be at least 1".into()));
    }
    let n = field.dim();
    let first_free = usize::from(field.is_nonautonomous());
    let mut alpha = vec![0u32; n];
    let mut ranked: Vec<((usize, usize, u32), HomogeneityType)> = Vec::new();

    'enumerate: loop {
        // odometer increment over the free entries
        let mut pos = first_free;
        loop {
            if pos == n {
                break 'enumerate;
            }
            if alpha[pos] < alpha_max {
                alpha[pos] += 1;
                break;
            }
            alpha[pos] = 0;
            pos += 1;
        }

        let g = alpha.iter().fold(0u32, |acc, &a| acc.gcd(&a));
        if g != 1 {
            continue;
        }
        let mut k = f64::NEG_INFINITY;
        for (i, comp) in field.components().iter().enumerate() {
            for m in comp {
                k = k.max(m.weighted_degree(&alpha) - alpha[i] as f64);
            }
        }
        if !(k > DEGREE_TOL) {
            continue;
        }
        // snap k to a short rational so principal terms compare exactly
        let k = rational(k).map_or(k, |q| *q.numer() as f64 / *q.denom() as f64);
        let Ok(htype) = HomogeneityType::new(alpha.clone(), k) else {
            continue;
        };
        let Ok(report) = classify_monomials(field, &htype) else {
            continue;
        };
        let key = (
            report.covered_components(&htype),
            report.principal_count(),
            alpha.iter().sum::<u32>(),
        );
        ranked.push((key, htype));
    }

    if ranked.is_empty() {
        return Err(Error::NoTypeFound { alpha_max });
    }
    ranked.sort_by(|(ka, ta), (kb, tb)| {
        kb.0.cmp(&ka.0)
            .then(kb.1.cmp(&ka.1))
            .then(ka.2.cmp(&kb.2))
            .then(tb.k().total_cmp(&ta.k()))
            .then(ta.alpha().cmp(tb.alpha()))
    });
    Ok(ranked.into_iter().map(|(_, t)| t).collect())
}
