use thiserror::Error;

/// Errors raised by the simulation library.
///
/// Variants split into domain violations (bad inputs, reported before any
/// numerics run) and numeric failures (solver or fit breakdowns).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AwqError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coincident points: the Green's function is singular at R = 0")]
    CoincidentPoints,

    #[error("atoms {first} and {second} are closer than {min_separation} (separation {separation})")]
    AtomsTooClose {
        first: String,
        second: String,
        separation: f64,
        min_separation: f64,
    },

    #[error("eigendecomposition failed: {0}")]
    Eigensolver(String),

    #[error("quasi-momentum assignment is ambiguous: mode {mode} has best ansatz overlap {overlap:.3e}")]
    AmbiguousAssignment { mode: usize, overlap: f64 },

    #[error("lattice sum did not converge after |m| = {max_order} (partial sum {partial_re} + {partial_im}i)")]
    LatticeSumDiverged {
        max_order: i32,
        partial_re: f64,
        partial_im: f64,
    },

    #[error("special function evaluation failed: {0}")]
    SpecialFunction(String),

    #[error("band edge fit needs at least {needed} guided modes, found {found}")]
    InsufficientGuidedModes { needed: usize, found: usize },

    #[error("resonance: {0}")]
    Resonance(String),

    #[error("band edge: {0}")]
    BandEdge(String),

    #[error("non-Markovian regime: {0}")]
    NonMarkovian(String),

    #[error("no relative maximum found before t = {t_max:.4e} (overdamped)")]
    Overdamped { t_max: f64 },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("fit failure: {0}")]
    Fit(String),
}

impl AwqError {
    /// Whether the error comes from invalid user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            AwqError::InvalidConfig(_)
                | AwqError::Domain(_)
                | AwqError::AtomsTooClose { .. }
                | AwqError::CoincidentPoints
        )
    }
}

pub type Result<T, E = AwqError> = std::result::Result<T, E>;
