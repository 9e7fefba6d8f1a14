//! Flows of the desingularized field and the invariant sets on its horizon.

pub mod decay;
pub mod equilibria;
pub mod integrate;
pub mod spectrum;

pub use decay::{estimate_decay, DecayFit, GapWindow};
pub use equilibria::{
    find_horizon_equilibria, solve_equilibrium, trace_equilibrium_curve, Equilibrium, EquilibriumCurve, SearchSpec,
};
pub use integrate::{integrate, Controls, Sample, StopReason, Trajectory};
pub use spectrum::{
    check_nonresonance, classify_split, eigenvalues, split_spectrum, Classification, NonResonance, SpectralSplit,
};

/// Spectral split and type of an equilibrium for a given number of
/// expected neutral directions.
pub fn spectrum_classify(eq: &Equilibrium, tangential_dims: usize) -> crate::Result<(SpectralSplit, Classification)> {
    let eigs = eigenvalues(&eq.jacobian)?;
    let split = split_spectrum(&eigs);
    let class = classify_split(&split, tangential_dims);
    Ok((split, class))
}
