//! Problem data for a bosonic quadratic Hamiltonian.
//!
//! Conventions, fixed once for the whole crate: one orthonormal mode basis,
//! annihilation operators `a_1..a_n`, and
//!
//! ```text
//! H = sum_ij h_ij a+_i a_j + 1/2 sum_ij ( k_ij a+_i a+_j + conj(k_ij) a_i a_j )
//! ```
//!
//! with `h` Hermitian positive definite and `k` complex symmetric. Writing
//! `A = (a_1..a_n, a+_1..a+_n)` for the doubled operator vector,
//! `H = 1/2 A^dagger M A - 1/2 Tr h` where `M = [[h, k], [conj k, conj h]]` is
//! the block operator. Elements of the dual space carry conjugate
//! coordinates, so the antiunitary `J` acts as `(f, g) -> (conj g, conj f)`.

use crate::error::{Error, Result};
use crate::linalg::{self, block2, c64, CMatrix};
use crate::tolerance::{self, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    h: CMatrix,
    k: CMatrix,
}

impl QuadraticHamiltonian {
    /// Validates with the default symmetry tolerance.
    pub fn new(h: CMatrix, k: CMatrix) -> Result<Self> {
        let tol = default_sym_tol(&h, &k);
        validate_hamiltonian(&h, &k, tol)
    }

    /// Real-valued convenience constructor from row-major slices.
    pub fn from_real(n: usize, h: &[f64], k: &[f64]) -> Result<Self> {
        if h.len() != n * n || k.len() != n * n {
            return Err(Error::DimensionMismatch(format!("expected {} entries per matrix", n * n)));
        }
        Self::new(linalg::real_matrix(n, n, h), linalg::real_matrix(n, n, k))
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn k(&self) -> &CMatrix {
        &self.k
    }

    /// `<H>` in a state with density matrices `(gamma, alpha)`.
    pub fn energy(&self, gamma: &CMatrix, alpha: &CMatrix) -> f64 {
        quadratic_energy(&self.h, &self.k, gamma, alpha)
    }
}

/// `Tr(h gamma) + Re Tr(k^dagger alpha)`, the expectation of the normal-ordered
/// Hamiltonian with `gamma_ij = <a+_j a_i>` and `alpha_ij = <a_i a_j>`.
pub fn quadratic_energy(h: &CMatrix, k: &CMatrix, gamma: &CMatrix, alpha: &CMatrix) -> f64 {
    linalg::trace(&(h * gamma)).re + linalg::trace(&(k.adjoint() * alpha)).re
}

pub(crate) fn default_sym_tol(h: &CMatrix, k: &CMatrix) -> f64 {
    tolerance::SYM_REL * linalg::max_abs(h).max(linalg::max_abs(k))
}

/// Check and normalize raw `(h, k)`.
///
/// `h` is Hermitized when its defect is within `tol_sym`; `k` is always
/// replaced by its symmetric part, which leaves the Hamiltonian unchanged.
pub fn validate_hamiltonian(h_raw: &CMatrix, k_raw: &CMatrix, tol_sym: f64) -> Result<QuadraticHamiltonian> {
    let n = h_raw.nrows();
    if n == 0 || !h_raw.is_square() || !k_raw.is_square() || k_raw.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "h is {}x{}, k is {}x{}; both must be square of equal size >= 1",
            h_raw.nrows(),
            h_raw.ncols(),
            k_raw.nrows(),
            k_raw.ncols()
        )));
    }
    if !linalg::all_finite(h_raw) {
        return Err(Error::NonFinite { what: "h" });
    }
    if !linalg::all_finite(k_raw) {
        return Err(Error::NonFinite { what: "k" });
    }
    let defect = linalg::hermitian_defect(h_raw);
    if defect > tol_sym {
        return Err(Error::NotHermitian { what: "h", defect, tol: tol_sym });
    }
    let h = linalg::hermitian_part(h_raw);
    let k = linalg::symmetric_part(k_raw);
    let (vals, _) = linalg::hermitian_eigen(&h);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: vals[0] });
    }
    Ok(QuadraticHamiltonian { h, k })
}

/// The `2n x 2n` block operator together with its mode count.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    n: usize,
    a: CMatrix,
}

impl BlockOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn into_matrix(self) -> CMatrix {
        self.a
    }

    /// Smallest eigenvalue; positive exactly when `||G|| < 1`.
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigen(&self.a).0[0]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }
}

/// Assemble `[[h, k], [conj k, conj h]]` and check Hermiticity and
/// invariance under the conjugate swap.
pub fn build_block_operator(q: &QuadraticHamiltonian) -> Result<BlockOperator> {
    let a = block2(q.h(), q.k(), &q.k().conjugate(), &q.h().conjugate());
    let tol = default_sym_tol(q.h(), q.k()).max(f64::EPSILON);
    let herm = linalg::hermitian_defect(&a);
    if herm > tol {
        return Err(Error::NotHermitian { what: "block operator", defect: herm, tol });
    }
    let swap = linalg::max_abs(&(linalg::conj_swap_matrix(&a) - &a));
    if swap > tol {
        return Err(Error::InvariantViolated { what: "block operator conjugate-swap symmetry".into(), residual: swap });
    }
    Ok(BlockOperator { n: q.n(), a })
}

/// `G = h^{-1/2} k conj(h)^{-1/2}`.
pub fn compute_g(q: &QuadraticHamiltonian) -> Result<CMatrix> {
    compute_g_with(q, &Tolerances::default())
}

pub fn compute_g_with(q: &QuadraticHamiltonian, tol: &Tolerances) -> Result<CMatrix> {
    let inv_sqrt = h_inv_sqrt(q, tol)?;
    Ok(&inv_sqrt * q.k() * inv_sqrt.conjugate())
}

fn h_inv_sqrt(q: &QuadraticHamiltonian, tol: &Tolerances) -> Result<CMatrix> {
    let (vals, vecs) = linalg::hermitian_eigen(q.h());
    let (lo, hi) = (vals[0], vals[vals.len() - 1]);
    let condition = hi / lo;
    if condition > tol.cond_max {
        return Err(Error::IllConditioned { condition, max: tol.cond_max });
    }
    Ok(linalg::spectral_apply(&vals, &vecs, |x| 1.0 / x.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConditionReport {
    /// Operator norm of `G`.
    pub norm_g: f64,
    /// Hilbert-Schmidt norm of `G`.
    pub hs_g: f64,
    /// `||k conj(h)^{-1/2}||_HS`.
    pub hs_kh_half: f64,
    /// `-1/2 ||k conj(h)^{-1/2}||_HS^2`, a lower bound on the spectrum.
    pub lower_bound: f64,
    pub diagonalizable: bool,
    /// Always true at finite dimension.
    pub implementable: bool,
    pub bounded_below: bool,
}

pub fn classify(q: &QuadraticHamiltonian) -> Result<ConditionReport> {
    classify_with(q, &Tolerances::default())
}

pub fn classify_with(q: &QuadraticHamiltonian, tol: &Tolerances) -> Result<ConditionReport> {
    let inv_sqrt = h_inv_sqrt(q, tol)?;
    let g = &inv_sqrt * q.k() * inv_sqrt.conjugate();
    let norm_g = linalg::op_norm(&g);
    let hs_g = linalg::frobenius(&g);
    let hs_kh_half = linalg::frobenius(&(q.k() * inv_sqrt.conjugate()));
    Ok(ConditionReport {
        norm_g,
        hs_g,
        hs_kh_half,
        lower_bound: -0.5 * hs_kh_half * hs_kh_half,
        diagonalizable: norm_g < 1.0 - tol.gap,
        implementable: hs_g.is_finite(),
        bounded_below: norm_g <= 1.0 + tol.gap,
    })
}

/// The `(p, -p)` pair sector of the 1947 weakly interacting Bose gas:
/// `h = (p^2 + rho vhat) I_2`, `k = rho vhat [[0, 1], [1, 0]]`.
pub fn bogoliubov_1947_pair(p: f64, rho: f64, vhat: f64) -> Result<QuadraticHamiltonian> {
    if !(p.is_finite() && rho.is_finite() && vhat.is_finite()) {
        return Err(Error::InvalidParameter("parameters must be finite".into()));
    }
    if p == 0.0 {
        return Err(Error::InvalidParameter("momentum p must be nonzero".into()));
    }
    if rho <= 0.0 {
        return Err(Error::InvalidParameter(format!("density must be positive, got {rho}")));
    }
    if vhat < 0.0 {
        return Err(Error::InvalidParameter(format!("interaction coefficient must be >= 0, got {vhat}")));
    }
    let pair = rho * vhat;
    let diag = p * p + pair;
    let h = linalg::diag_real(&[diag, diag]);
    let k = CMatrix::from_fn(2, 2, |i, j| if i != j { c64(pair, 0.0) } else { linalg::ZERO });
    QuadraticHamiltonian::new(h, k)
}

/// Random instance with complex Hermitian `h`, complex symmetric `k` and
/// `||G||` drawn uniformly from `(0, max_norm_g]`.
pub fn random_instance<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, max_norm_g: f64) -> QuadraticHamiltonian {
    let entry = |rng: &mut R| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let m = CMatrix::from_fn(n, n, |_, _| entry(rng));
    let h = (&m * m.adjoint()).unscale(n as f64) + linalg::identity(n).scale(0.5);
    let raw = CMatrix::from_fn(n, n, |_, _| entry(rng));
    let k = linalg::symmetric_part(&raw);
    let q = QuadraticHamiltonian::new(h, k).expect("random instance is valid");
    let g = linalg::op_norm(&compute_g(&q).expect("well conditioned"));
    let target = max_norm_g * (1.0 - rng.random::<f64>());
    let scale = if g > 0.0 { target / g } else { 0.0 };
    QuadraticHamiltonian { h: q.h, k: q.k.scale(scale) }
}

/// Diagonal real instance with `|k_i| <= max_ratio * h_i`.
pub fn random_diagonal_instance<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, max_ratio: f64) -> (Vec<f64>, Vec<f64>) {
    let h: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
    let k = h.iter().map(|&hi| hi * max_ratio * rng.random_range(-1.0..1.0)).collect();
    (h, k)
}
