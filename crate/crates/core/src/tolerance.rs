//! Numerical thresholds shared by the pipeline.

/// Relative Hermiticity/symmetry tolerance, scaled by the input's max-norm.
pub const SYM_REL: f64 = 1e-10;
/// Largest accepted condition number of `h`.
pub const COND_MAX: f64 = 1e12;
/// `||G||` must stay below `1 - GAP` to be diagonalized.
pub const GAP: f64 = 1e-9;
/// Relative tolerance on symplectic identities.
pub const SYMP: f64 = 1e-8;
/// Relative tolerance on the off-diagonal block after diagonalization.
pub const DIAG: f64 = 1e-8;
/// Absolute tolerance on unit-scale derived quantities.
pub const NUM: f64 = 1e-9;
/// Eigenvalues of `B` closer than `PAIR * ||A||` to zero cannot be paired.
pub const PAIR: f64 = 1e-12;
/// Negative eigenvalues above `-PSD` are clamped to zero in matrix square roots.
pub const PSD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub sym_rel: f64,
    pub cond_max: f64,
    pub gap: f64,
    pub symp: f64,
    pub diag: f64,
    pub num: f64,
    pub pair: f64,
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { sym_rel: SYM_REL, cond_max: COND_MAX, gap: GAP, symp: SYMP, diag: DIAG, num: NUM, pair: PAIR, psd: PSD }
    }
}
