use thiserror::Error;

/// Errors produced by the entropy, realization and classification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain of a formula, e.g. `phi(0.0)`.
    #[error("{what} out of domain: {value}")]
    OutOfDomain { what: &'static str, value: f64 },

    /// Deformation weight outside `(0, 1]`.
    #[error("theta must lie in (0, 1], got {0}")]
    InvalidTheta(f64),

    /// A coordinate was queried on a point prefix that never revealed it.
    #[error("coordinate {0} is not revealed by the point prefix")]
    Unrevealed(u32),

    /// Group element that is not a word in the declared generators.
    #[error("element {0} is not reachable from the declared generators")]
    UnreachableElement(String),

    /// Target entropy below what the deformation can reach.
    #[error("Unreachable: target {target} is below the undeformed entropy {baseline}")]
    TargetUnreachable { target: f64, baseline: f64 },

    /// The cocycle puts no mass on the deformed coordinate.
    #[error("NoMass: no kappa_x mass on coordinate {n0}; deformation there cannot change entropy")]
    NoMass { n0: u32 },

    /// No admissible budget sequence exists.
    #[error("Infeasible: {0}")]
    Infeasible(String),

    /// Exact enumeration would touch too many coordinates.
    #[error("exact enumeration over {coords} coordinates exceeds the limit of {limit}")]
    TooLarge { coords: usize, limit: usize },

    /// The solver hit a numerical limit (underflow, iteration cap).
    #[error("solver failed: {0}")]
    Solver(String),

    /// Scenario file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Scenario or input violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    /// True for the failures that reflect the mathematics of the input rather
    /// than malformed input.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::Parse(_) | Error::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
