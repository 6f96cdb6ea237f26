use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("time vector of hierarchy {times} cannot be paired with a {point} point")]
    Inconsistent { times: String, point: &'static str },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("requested order {requested} exceeds truncation order {available}")]
    TruncationExceeded { requested: usize, available: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("iterates collapsed onto the diagonal: beta1 = {beta1}, beta2 = {beta2}")]
    Collapse { beta1: f64, beta2: f64 },

    #[error("Hessian is singular at the converged point (W11 = {w11:e}, W22 = {w22:e})")]
    SingularHessian { w11: f64, w22: f64 },

    #[error("the point is not a critical point of W (h(beta_{invariant}) = {value:e})")]
    NotCritical { invariant: usize, value: f64 },

    #[error("all Taylor coefficients of h vanish at beta_{invariant}")]
    AllCoefficientsVanish { invariant: usize },

    #[error("Taylor coefficient {order} of h at beta_{invariant} is {value:e}, inside the ambiguity band [{lower:e}, {upper:e}]")]
    ToleranceAmbiguity {
        invariant: usize,
        order: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("nondegeneracy determinant vanishes (|Delta| = {delta:e}); the point lies in a deeper class")]
    DegenerateDelta { delta: f64 },

    #[error("expected {expected} unknowns, got {got}")]
    BadArity { expected: usize, got: usize },

    #[error("no seed converged anywhere on the grid")]
    EmptyLocus,

    #[error("radicand {radicand:e} is negative: no real singular point")]
    RadicandNegative { radicand: f64 },

    #[error("imaginary part collapsed to zero (V = {v:e}): the point left the elliptic regime")]
    RealCollapse { v: f64 },

    #[error("third derivative {value:e} vanishes: deeper singularity")]
    DeeperSingularity { value: f64 },

    #[error("hodograph solve failed at grid node ({x}, {t}): {source}")]
    GridCrossesSingularity {
        x: f64,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Solver failures, as opposed to rejected input.
    pub fn is_solver_failure(&self) -> bool {
        !matches!(
            self,
            Error::InvalidInput(_)
                | Error::Inconsistent { .. }
                | Error::Degenerate(_)
                | Error::TruncationExceeded { .. }
                | Error::BadArity { .. }
                | Error::RadicandNegative { .. }
        )
    }
}
