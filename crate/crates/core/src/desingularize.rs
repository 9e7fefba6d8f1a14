//! The desingularized vector field `g`: the original field rescaled into a
//! chart and slowed down by a power of the horizon gap, so that it extends
//! smoothly to (and is tangent to) the horizon.
//!
//! Everything is kept in closed form as sums of extended monomials
//! `coeff * x^m * W^w`, where `W` is the horizon gap recomputed from the
//! chart coordinates on every evaluation.

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::aqh::{degree_offset, is_nonnegative_integer, real_pow, FieldSpec, HomogeneityType, Monomial};
use crate::embedding::{Chart, DirectionalChart, ParabolicChart, Sign};
use crate::error::{Error, Result};

/// Coefficients that cancel below this fraction of their inputs are dropped.
const CANCELLATION_TOL: f64 = 1e-13;
/// Rounding slack for the horizon gap when it carries a fractional power.
const GAP_ROUNDING: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtMonomial {
    pub coeff: f64,
    pub exponents: Vec<f64>,
    /// Power of the horizon gap `W`; always zero in directional charts,
    /// where the gap is itself a coordinate.
    pub w_exp: f64,
}

impl ExtMonomial {
    fn scaled(&self, factor: f64) -> Self {
        Self {
            coeff: self.coeff * factor,
            ..self.clone()
        }
    }

    fn eval(&self, x: &[f64], w: f64) -> Result<f64> {
        let mut v = self.coeff * real_pow(w, self.w_exp)?;
        for (&xj, &m) in x.iter().zip(&self.exponents) {
            v *= real_pow(xj, m)?;
        }
        Ok(v)
    }

    /// Adds the gradient of this term to `row`, with `dw` the gradient of `W`.
    fn accumulate_gradient(&self, x: &[f64], w: f64, dw: &[f64], row: &mut [f64]) -> Result<()> {
        let mut powers = Vec::with_capacity(x.len());
        for (&xj, &m) in x.iter().zip(&self.exponents) {
            powers.push(real_pow(xj, m)?);
        }
        let wpow = real_pow(w, self.w_exp)?;
        for j in 0..x.len() {
            let m = self.exponents[j];
            if m == 0.0 {
                continue;
            }
            let mut v = self.coeff * m * real_pow(x[j], m - 1.0)? * wpow;
            for (l, p) in powers.iter().enumerate() {
                if l != j {
                    v *= p;
                }
            }
            row[j] += v;
        }
        if self.w_exp != 0.0 {
            let dpow = self.w_exp * real_pow(w, self.w_exp - 1.0)?;
            let base: f64 = self.coeff * dpow * powers.iter().product::<f64>();
            for (r, &d) in row.iter_mut().zip(dw) {
                *r += base * d;
            }
        }
        Ok(())
    }
}

/// Sums like terms and drops coefficients that cancel to rounding level.
fn collect(terms: Vec<ExtMonomial>) -> Vec<ExtMonomial> {
    let mut out: Vec<(ExtMonomial, f64)> = Vec::new();
    for t in terms {
        match out
            .iter_mut()
            .find(|(o, _)| o.w_exp == t.w_exp && o.exponents == t.exponents)
        {
            Some((o, scale)) => {
                o.coeff += t.coeff;
                *scale = scale.max(t.coeff.abs());
            }
            None => {
                let s = t.coeff.abs();
                out.push((t, s));
            }
        }
    }
    out.into_iter()
        .filter(|(t, scale)| t.coeff.abs() > CANCELLATION_TOL * scale)
        .map(|(t, _)| t)
        .collect()
}

fn eval_sum(terms: &[ExtMonomial], x: &[f64], w: f64) -> Result<f64> {
    terms.iter().map(|t| t.eval(x, w)).sum()
}

/// Where the time variable of an extended field comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeSource {
    /// Add a fresh variable with this name in front.
    Prepend(String),
    /// Use an existing variable that has no equation of its own (empty
    /// component, `alpha_j = 0`); it is moved to index 0.
    Variable(usize),
}

/// A field whose variable 0 is time, with `t' = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedFieldSpec(FieldSpec);

impl ExtendedFieldSpec {
    pub fn into_inner(self) -> FieldSpec {
        self.0
    }
}

impl Deref for ExtendedFieldSpec {
    type Target = FieldSpec;
    fn deref(&self) -> &FieldSpec {
        &self.0
    }
}

impl TryFrom<FieldSpec> for ExtendedFieldSpec {
    type Error = Error;
    fn try_from(field: FieldSpec) -> Result<Self> {
        if field.is_nonautonomous() {
            Ok(Self(field))
        } else {
            Err(Error::InvalidInput(
                "field has no time variable; use extend_nonautonomous".into(),
            ))
        }
    }
}

/// Makes time an unscaled state variable (`alpha_0 = 0`, `t' = 1`).
pub fn extend_nonautonomous(
    field: &FieldSpec,
    htype: &HomogeneityType,
    time: TimeSource,
) -> Result<(ExtendedFieldSpec, HomogeneityType)> {
    if field.is_nonautonomous() {
        return Err(Error::AlreadyExtended);
    }
    if htype.dim() != field.dim() {
        return Err(Error::InvalidInput(format!(
            "type has dimension {}, field has {}",
            htype.dim(),
            field.dim()
        )));
    }
    let n = field.dim();
    let (order, name): (Vec<Option<usize>>, String) = match time {
        TimeSource::Prepend(name) => (std::iter::once(None).chain((0..n).map(Some)).collect(), name),
        TimeSource::Variable(j) => {
            if j >= n {
                return Err(Error::InvalidInput(format!("time variable {j} out of range")));
            }
            if !field.components()[j].is_empty() || htype.alpha()[j] != 0 {
                return Err(Error::InvalidInput(format!(
                    "variable {j} cannot serve as time: it needs an empty equation and alpha = 0"
                )));
            }
            (
                std::iter::once(None)
                    .chain((0..n).filter(|&i| i != j).map(Some))
                    .collect(),
                field.variable_names()[j].clone(),
            )
        }
    };
    let time_index = time_index_of(&order, n);

    let m = order.len();
    let remap = |exps: &[f64]| -> Vec<f64> {
        order
            .iter()
            .map(|o| match o {
                Some(i) => exps[*i],
                None => time_index.map_or(0.0, |j| exps[j]),
            })
            .collect()
    };

    let mut names = Vec::with_capacity(m);
    let mut components = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    for o in &order {
        match o {
            None => {
                names.push(name.clone());
                components.push(vec![Monomial::constant(1.0, m)?]);
                alpha.push(0);
            }
            Some(i) => {
                names.push(field.variable_names()[*i].clone());
                let comp = field.components()[*i]
                    .iter()
                    .map(|mon| Monomial::new(mon.coeff(), remap(mon.exponents())))
                    .collect::<Result<Vec<_>>>()?;
                components.push(comp);
                alpha.push(htype.alpha()[*i]);
            }
        }
    }
    let extended = FieldSpec::new(names, components, true)?;
    Ok((ExtendedFieldSpec(extended), HomogeneityType::new(alpha, htype.k())?))
}

/// The original index that became the time variable, if any.
fn time_index_of(order: &[Option<usize>], n: usize) -> Option<usize> {
    if order.len() == n + 1 {
        return None;
    }
    (0..n).find(|i| !order.contains(&Some(*i)))
}

/// Value, Jacobian and time factor of `g` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub g: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub dt_dtau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesingField {
    chart: Chart,
    source: FieldSpec,
    rescaled: Vec<Vec<ExtMonomial>>,
    components: Vec<Vec<ExtMonomial>>,
    time_factor: Vec<ExtMonomial>,
}

fn check_dims(field: &FieldSpec, htype: &HomogeneityType) -> Result<()> {
    if htype.dim() != field.dim() {
        return Err(Error::InvalidInput(format!(
            "type has dimension {}, field has {}",
            htype.dim(),
            field.dim()
        )));
    }
    if field.is_nonautonomous() && htype.alpha()[0] != 0 {
        return Err(Error::InvalidInput("time variable must have alpha = 0".into()));
    }
    Ok(())
}

fn require_polynomial_in_scaled(
    mon: &Monomial,
    htype: &HomogeneityType,
    skip: Option<usize>,
    component: usize,
) -> Result<()> {
    for (j, (&m, &a)) in mon.exponents().iter().zip(htype.alpha()).enumerate() {
        if a > 0 && Some(j) != skip && !is_nonnegative_integer(m) {
            return Err(Error::Domain(format!(
                "component {component}: exponent {m} on variable {j}, which changes sign in this chart"
            )));
        }
    }
    Ok(())
}

fn horizon_exponent(mon: &Monomial, htype: &HomogeneityType, i: usize, index: usize) -> Result<f64> {
    let off = degree_offset(mon.exponents(), htype.alpha(), htype.k(), htype.alpha()[i]);
    if off < 0.0 {
        return Err(Error::NegativeWExponent {
            component: i,
            monomial: index,
            exponent: off,
        });
    }
    Ok(off)
}

/// `g = q f~ - G Lambda_alpha x` in the parabolic chart, with
/// `q = 1 - (2c-1)/(2c) W`, `f~_i = W^{k + alpha_i} f_i(kappa^Lambda x)` and
/// `G = sum_{j in I_alpha} x_j^{2 beta_j - 1} / alpha_j f~_j`.
pub fn build_parabolic_desing(field: &FieldSpec, htype: &HomogeneityType) -> Result<DesingField> {
    check_dims(field, htype)?;
    let n = field.dim();
    let alpha = htype.alpha();
    let two_c = 2.0 * htype.c() as f64;
    let a = (two_c - 1.0) / two_c;

    let mut rescaled = Vec::with_capacity(n);
    for (i, comp) in field.components().iter().enumerate() {
        let mut terms = Vec::with_capacity(comp.len());
        for (idx, mon) in comp.iter().enumerate() {
            require_polynomial_in_scaled(mon, htype, None, i)?;
            terms.push(ExtMonomial {
                coeff: mon.coeff(),
                exponents: mon.exponents().to_vec(),
                w_exp: horizon_exponent(mon, htype, i, idx)?,
            });
        }
        rescaled.push(collect(terms));
    }

    let mut big_g = Vec::new();
    for (&j, &b) in htype.i_alpha().iter().zip(htype.beta()) {
        for t in &rescaled[j] {
            let mut e = t.scaled(1.0 / alpha[j] as f64);
            e.exponents[j] += (2 * b - 1) as f64;
            big_g.push(e);
        }
    }

    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms = Vec::new();
        for t in &rescaled[i] {
            terms.push(t.clone());
            let mut wt = t.scaled(-a);
            wt.w_exp += 1.0;
            terms.push(wt);
        }
        if alpha[i] > 0 {
            for t in &big_g {
                let mut e = t.scaled(-(alpha[i] as f64));
                e.exponents[i] += 1.0;
                terms.push(e);
            }
        }
        components.push(collect(terms));
    }

    let zero = vec![0.0; n];
    let time_factor = collect(vec![
        ExtMonomial {
            coeff: 1.0,
            exponents: zero.clone(),
            w_exp: htype.k(),
        },
        ExtMonomial {
            coeff: -a,
            exponents: zero,
            w_exp: htype.k() + 1.0,
        },
    ]);

    Ok(DesingField {
        chart: ParabolicChart::new(htype.clone()).into(),
        source: field.clone(),
        rescaled,
        components,
        time_factor,
    })
}

/// `g` in the directional chart around `sign * y_{i0} -> +infinity`:
/// `s' = -sign/alpha_{i0} s f^_{i0}` and
/// `x_j' = f^_j - sign alpha_j/alpha_{i0} x_j f^_{i0}`, where
/// `f^_i = s^{k + alpha_i} f_i(y)` expressed in `(s, x)`.
pub fn build_directional_desing(field: &FieldSpec, chart: &DirectionalChart) -> Result<DesingField> {
    let htype = chart.htype();
    check_dims(field, htype)?;
    let n = field.dim();
    let alpha = htype.alpha();
    let i0 = chart.index();
    let sigma = chart.sign().value();
    let a0 = alpha[i0] as f64;

    let mut rescaled = Vec::with_capacity(n);
    for (i, comp) in field.components().iter().enumerate() {
        let mut terms = Vec::with_capacity(comp.len());
        for (idx, mon) in comp.iter().enumerate() {
            require_polynomial_in_scaled(mon, htype, Some(i0), i)?;
            let m0 = mon.exponents()[i0];
            let sign_factor = match chart.sign() {
                Sign::Plus => 1.0,
                Sign::Minus if m0.fract() == 0.0 => {
                    if (m0 as i64) % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                Sign::Minus => {
                    return Err(Error::Domain(format!(
                        "component {i}: fractional exponent {m0} on the negative chart variable"
                    )))
                }
            };
            let mut exponents = mon.exponents().to_vec();
            exponents[i0] = horizon_exponent(mon, htype, i, idx)?;
            terms.push(ExtMonomial {
                coeff: mon.coeff() * sign_factor,
                exponents,
                w_exp: 0.0,
            });
        }
        rescaled.push(collect(terms));
    }

    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms = Vec::new();
        if i == i0 {
            for t in &rescaled[i0] {
                let mut e = t.scaled(-sigma / a0);
                e.exponents[i0] += 1.0;
                terms.push(e);
            }
        } else {
            terms.extend(rescaled[i].iter().cloned());
            if alpha[i] > 0 {
                for t in &rescaled[i0] {
                    let mut e = t.scaled(-sigma * alpha[i] as f64 / a0);
                    e.exponents[i] += 1.0;
                    terms.push(e);
                }
            }
        }
        components.push(collect(terms));
    }

    let mut exponents = vec![0.0; n];
    exponents[i0] = htype.k();
    let time_factor = vec![ExtMonomial {
        coeff: 1.0,
        exponents,
        w_exp: 0.0,
    }];

    Ok(DesingField {
        chart: chart.clone().into(),
        source: field.clone(),
        rescaled,
        components,
        time_factor,
    })
}

impl DesingField {
    pub fn new(field: &FieldSpec, chart: &Chart) -> Result<Self> {
        match chart {
            Chart::Parabolic(c) => build_parabolic_desing(field, c.htype()),
            Chart::Directional(c) => build_directional_desing(field, c),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn htype(&self) -> &HomogeneityType {
        self.chart.htype()
    }

    pub fn source(&self) -> &FieldSpec {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn is_nonautonomous(&self) -> bool {
        self.source.is_nonautonomous()
    }

    /// The rescaled field (`f~` or `f^`) before the horizon correction.
    pub fn rescaled(&self) -> &[Vec<ExtMonomial>] {
        &self.rescaled
    }

    pub fn components(&self) -> &[Vec<ExtMonomial>] {
        &self.components
    }

    pub fn time_factor_terms(&self) -> &[ExtMonomial] {
        &self.time_factor
    }

    pub fn horizon_gap(&self, coords: &[f64]) -> f64 {
        self.chart.horizon_gap(coords)
    }

    fn gap(&self, coords: &[f64]) -> Result<f64> {
        if coords.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has dimension {}, field has {}",
                coords.len(),
                self.dim()
            )));
        }
        let w = self.chart.horizon_gap(coords);
        Ok(if w < 0.0 && w > -GAP_ROUNDING { 0.0 } else { w })
    }

    fn gap_for_terms(&self, coords: &[f64]) -> Result<f64> {
        // Directional terms fold the gap into the coordinates.
        Ok(if self.chart.is_parabolic() {
            self.gap(coords)?
        } else {
            self.gap(coords)?;
            1.0
        })
    }

    pub fn eval(&self, coords: &[f64]) -> Result<Vec<f64>> {
        let w = self.gap_for_terms(coords)?;
        self.components.iter().map(|c| eval_sum(c, coords, w)).collect()
    }

    /// `f~` (parabolic) or `f^` (directional) at a chart point.
    pub fn eval_rescaled(&self, coords: &[f64]) -> Result<Vec<f64>> {
        let w = self.gap_for_terms(coords)?;
        self.rescaled.iter().map(|c| eval_sum(c, coords, w)).collect()
    }

    /// `dt/dtau`.
    pub fn time_factor(&self, coords: &[f64]) -> Result<f64> {
        let w = self.gap_for_terms(coords)?;
        eval_sum(&self.time_factor, coords, w)
    }

    pub fn jacobian(&self, coords: &[f64]) -> Result<DMatrix<f64>> {
        let w = self.gap_for_terms(coords)?;
        let n = self.dim();
        let dw = if self.chart.is_parabolic() {
            self.chart.gap_gradient(coords)
        } else {
            vec![0.0; n]
        };
        let mut jac = DMatrix::zeros(n, n);
        let mut row = vec![0.0; n];
        for (i, comp) in self.components.iter().enumerate() {
            row.iter_mut().for_each(|r| *r = 0.0);
            for t in comp {
                t.accumulate_gradient(coords, w, &dw, &mut row)?;
            }
            for (j, &v) in row.iter().enumerate() {
                jac[(i, j)] = v;
            }
        }
        Ok(jac)
    }

    pub fn evaluate(&self, coords: &[f64]) -> Result<Evaluation> {
        Ok(Evaluation {
            g: self.eval(coords)?,
            jacobian: self.jacobian(coords)?,
            dt_dtau: self.time_factor(coords)?,
        })
    }
}
