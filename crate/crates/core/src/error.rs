use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{what} contains a non-finite entry")]
    NonFinite { what: &'static str },

    #[error("{what} is not Hermitian: defect {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { what: &'static str, defect: f64, tol: f64 },

    #[error("{what} is not symmetric: defect {defect:.3e} exceeds {tol:.3e}")]
    NotSymmetric { what: &'static str, defect: f64, tol: f64 },

    #[error("one-body matrix h is not positive definite (smallest eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("{what}: operand not positive semidefinite (eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveSemidefinite { what: &'static str, min_eigenvalue: f64 },

    #[error("h is ill-conditioned: condition number {condition:.3e} exceeds {max:.3e}")]
    IllConditioned { condition: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not diagonalizable: ||G|| = {norm_g:.12} is not below 1")]
    NotDiagonalizable { norm_g: f64 },

    #[error("cannot pair the +/- eigenvalues of A^(1/2) S A^(1/2): eigenvalue {eigenvalue:.3e} is numerically zero")]
    DegeneratePairing { eigenvalue: f64 },

    #[error("ground energy {energy:.12e} lies below the lower bound {bound:.12e}")]
    BoundViolated { energy: f64, bound: f64 },

    #[error("generalized density matrix lost its block structure (defect {defect:.3e})")]
    BlockInconsistency { defect: f64 },

    #[error("invariant violated: {what} (residual {residual:.3e})")]
    InvariantViolated { what: String, residual: f64 },

    #[error("commutative instance out of regime at mode {mode}: |k|/h = {ratio}")]
    OutOfRegime { mode: usize, ratio: f64 },

    #[error("Fock space dimension {dim} exceeds the limit {max}")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("state vector is not normalized (norm {norm:.15})")]
    NotNormalized { norm: f64 },

    #[error("state has weight {mass:.3e} within two levels of the cutoff")]
    CutoffTooTight { mass: f64 },

    #[error("structure defect {defect:.3e} at t = {t} before correction; reduce the step size")]
    DefectBlowup { defect: f64, t: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("norm drift {drift:.3e} at t = {t}")]
    NormDrift { drift: f64, t: f64 },

    #[error("Takagi factorization failed (residual {residual:.3e})")]
    TakagiFailure { residual: f64 },

    #[error("no symmetric generator reproduces the transform (deviation {deviation:.3e})")]
    GaugeObstruction { deviation: f64 },

    #[error("state is not pure quasi-free: ||X||_F + ||Y||_F = {witness:.3e}")]
    NotPure { witness: f64 },

    #[error("could not complete the Bogoliubov transform (residual {residual:.3e})")]
    CompletionFailure { residual: f64 },

    #[error("trajectory grid too coarse: {samples} samples, need at least 3")]
    GridTooCoarse { samples: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the CLI: 2 for rejected input, 3 for a
    /// numerical failure inside the pipeline.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            DimensionMismatch(_)
            | NonFinite { .. }
            | NotHermitian { .. }
            | NotSymmetric { .. }
            | NotPositiveDefinite { .. }
            | InvalidParameter(_)
            | NotDiagonalizable { .. }
            | OutOfRegime { .. }
            | DimensionOverflow { .. }
            | NotNormalized { .. }
            | CutoffTooTight { .. }
            | NotPure { .. }
            | GridTooCoarse { .. }
            | Io(_)
            | Json(_) => 2,
            BoundViolated { .. } | InvariantViolated { .. } => 1,
            NotPositiveSemidefinite { .. }
            | IllConditioned { .. }
            | DegeneratePairing { .. }
            | BlockInconsistency { .. }
            | DefectBlowup { .. }
            | NonFiniteState { .. }
            | NormDrift { .. }
            | TakagiFailure { .. }
            | GaugeObstruction { .. }
            | CompletionFailure { .. } => 3,
        }
    }
}
