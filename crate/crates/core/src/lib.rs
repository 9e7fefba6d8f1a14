//! Detection and profiling of finite-time blow-up in polynomial-type ODEs.
//!
//! Infinity is compactified into a horizon (parabolic or directional chart),
//! the field is desingularized there, and blow-up solutions are read off as
//! trajectories converging to hyperbolic equilibria on the horizon.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aqh;
pub mod blowup;
pub mod desingularize;
pub mod dynamics;
pub mod embedding;
pub mod error;

pub use aqh::{classify_monomials, infer_type, FieldSpec, HomogeneityReport, HomogeneityType, Monomial};
pub use blowup::{build_report, estimate_tmax, fit_rate, BlowupReport, ComponentRate, RateFit, RateOutcome};
pub use desingularize::{
    build_directional_desing, build_parabolic_desing, extend_nonautonomous, DesingField, Evaluation, ExtMonomial,
    ExtendedFieldSpec, TimeSource,
};
pub use dynamics::{
    check_nonresonance, estimate_decay, find_horizon_equilibria, integrate, spectrum_classify, trace_equilibrium_curve,
    Classification, Controls, Equilibrium, EquilibriumCurve, GapWindow, SearchSpec, StopReason, Trajectory,
};
pub use embedding::{transition, Chart, DirectionalChart, EmbeddedPoint, ParabolicChart, Sign};
pub use error::{Error, Result};
