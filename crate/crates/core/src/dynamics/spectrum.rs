//! Eigenvalue splitting, hyperbolicity and the Sternberg–Sell
//! non-resonance condition for discrete real spectra.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Real parts below this are treated as neutral (tangential).
pub const TOL_NEUTRAL: f64 = 1e-8;
const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 10_000;
const RESONANCE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Sink,
    Source,
    Saddle,
    Nonhyperbolic,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Sink => "sink",
            Classification::Source => "source",
            Classification::Saddle => "saddle",
            Classification::Nonhyperbolic => "nonhyperbolic",
        }
    }
}

/// Eigenvalues ordered by decreasing real part (ties: decreasing imaginary part).
pub fn eigenvalues(jacobian: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !jacobian.is_square() {
        return Err(Error::EigenFailure("matrix is not square".into()));
    }
    if jacobian.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("matrix has non-finite entries".into()));
    }
    let schur = nalgebra::Schur::try_new(jacobian.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::EigenFailure("Schur iteration did not converge".into()))?;
    let mut eigs: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(eigs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSplit {
    pub tangential: Vec<usize>,
    pub stable: Vec<usize>,
    pub unstable: Vec<usize>,
    /// Smallest `|Re lambda|` outside the neutral band (0 if there is none).
    pub gap: f64,
}

pub fn split_spectrum(eigs: &[Complex<f64>]) -> SpectralSplit {
    let mut split = SpectralSplit {
        tangential: vec![],
        stable: vec![],
        unstable: vec![],
        gap: f64::INFINITY,
    };
    for (i, e) in eigs.iter().enumerate() {
        if e.re.abs() < TOL_NEUTRAL {
            split.tangential.push(i);
        } else {
            split.gap = split.gap.min(e.re.abs());
            if e.re < 0.0 {
                split.stable.push(i);
            } else {
                split.unstable.push(i);
            }
        }
    }
    if split.gap.is_infinite() {
        split.gap = 0.0;
    }
    split
}

/// Hyperbolic means exactly `tangential_dims` neutral eigenvalues and a
/// normal gap above `10 * TOL_NEUTRAL`; the type is read off the normal part.
pub fn classify_split(split: &SpectralSplit, tangential_dims: usize) -> Classification {
    let normal = split.stable.len() + split.unstable.len();
    if split.tangential.len() != tangential_dims || normal == 0 || split.gap <= 10.0 * TOL_NEUTRAL {
        return Classification::Nonhyperbolic;
    }
    match (split.stable.is_empty(), split.unstable.is_empty()) {
        (false, true) => Classification::Sink,
        (true, false) => Classification::Source,
        _ => Classification::Saddle,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonResonance {
    pub holds: bool,
    /// The first violating multi-index `m`.
    pub witness: Option<Vec<u32>>,
    /// Index of the eigenvalue it hits, or `None` when `sum m_j lambda_j` vanishes.
    pub resonant_with: Option<usize>,
}

/// Checks that no `sum m_j lambda_j` with `2 <= |m| <= 2N` equals an
/// eigenvalue or vanishes. Multi-indices are scanned by increasing total
/// degree, then in decreasing lexicographic order.
pub fn check_nonresonance(eigs: &[f64], order_n: u32) -> NonResonance {
    let d = eigs.len();
    let ok = NonResonance {
        holds: true,
        witness: None,
        resonant_with: None,
    };
    if d == 0 {
        return ok;
    }
    for degree in 2..=2 * order_n {
        let mut m = vec![0u32; d];
        m[0] = degree;
        loop {
            let mut combo = 0.0;
            let mut scale = 0.0;
            for (mj, lj) in m.iter().zip(eigs) {
                combo += *mj as f64 * lj;
                scale += (*mj as f64 * lj).abs();
            }
            if combo.abs() <= RESONANCE_REL_TOL * scale {
                return NonResonance {
                    holds: false,
                    witness: Some(m),
                    resonant_with: None,
                };
            }
            if let Some(j) = eigs
                .iter()
                .position(|l| (l - combo).abs() <= RESONANCE_REL_TOL * l.abs().max(combo.abs()))
            {
                return NonResonance {
                    holds: false,
                    witness: Some(m),
                    resonant_with: Some(j),
                };
            }
            if !prev_composition(&mut m) {
                break;
            }
        }
    }
    ok
}

/// Steps to the lexicographically previous composition with the same sum.
fn prev_composition(m: &mut [u32]) -> bool {
    let d = m.len();
    // rightmost nonzero entry that is not the last slot
    let Some(i) = (0..d.saturating_sub(1)).rev().find(|&i| m[i] > 0) else {
        return false;
    };
    let tail: u32 = m[i + 1..].iter().sum();
    m[i] -= 1;
    m[i + 1] = tail + 1;
    for v in &mut m[i + 2..] {
        *v = 0;
    }
    true
}
