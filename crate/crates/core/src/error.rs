use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A power was evaluated outside its real domain (`0^negative`, `negative^fractional`).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("field is not asymptotically quasi-homogeneous for the given type: {count} monomial(s) exceed order k + alpha_i (first: component {component}, monomial {monomial})")]
    NotAqh {
        count: usize,
        component: usize,
        monomial: usize,
    },

    #[error("no admissible homogeneity type with entries up to {alpha_max}")]
    NoTypeFound { alpha_max: u32 },

    #[error("root solve did not converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("point outside the chart domain: {0}")]
    ChartDomain(String),

    #[error("point lies on the horizon and has no finite preimage")]
    Horizon,

    #[error("negative horizon exponent {exponent} in component {component} (monomial {monomial})")]
    NegativeWExponent {
        component: usize,
        monomial: usize,
        exponent: f64,
    },

    #[error("field already carries an extended time variable")]
    AlreadyExtended,

    #[error("step size underflow at tau = {tau} (h = {step})")]
    StepFailure { tau: f64, step: f64 },

    #[error("eigenvalue computation failed: {0}")]
    EigenFailure(String),

    #[error("equilibrium continuation lost the branch at t = {t}")]
    CurveBreak { t: f64 },

    #[error("only {found} samples in the fitting window, need at least {required}")]
    InsufficientWindow { found: usize, required: usize },

    #[error("component {component} vanishes along the approach; rate is not determined")]
    VanishingComponent { component: usize },

    #[error("trajectory did not reach the horizon (stopped by {0})")]
    NotConverged(String),

    #[error("no equilibrium within {radius} of the trajectory end point")]
    NoTargetFound { radius: f64 },
}
