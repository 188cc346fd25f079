//! Symplectic diagonalization of the block operator and ground-state data.
//!
//! With `B = M^{1/2} S M^{1/2}` and `Q` the unitary whose columns are the
//! positive eigenvectors `w_i` of `B` followed by their conjugate-swap
//! partners, `V = diag(sqrt l, sqrt l) Q^dagger M^{-1/2}` satisfies
//! `V M V^dagger = diag(l, l)` and `V^dagger S V = S`.
//!
//! The transform acts on the doubled operator vector as `A -> V^dagger A`;
//! the ground state of `H` is the image of the vacuum and its generalized
//! density matrix is `V^dagger diag(0, I) V`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, block, block2, CMatrix};
use crate::model::{self, QuadraticHamiltonian};
use crate::tolerance::Tolerances;

/// A Bogoliubov transformation `[[U, conj V], [V, conj U]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovTransform {
    u: CMatrix,
    v: CMatrix,
    full: CMatrix,
}

impl BogoliubovTransform {
    /// Assemble from blocks. No symplectic check; see [`verify_transform`].
    pub fn from_blocks(u: CMatrix, v: CMatrix) -> Result<Self> {
        if !u.is_square() || u.shape() != v.shape() || u.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "U is {}x{}, V is {}x{}",
                u.nrows(),
                u.ncols(),
                v.nrows(),
                v.ncols()
            )));
        }
        if !linalg::all_finite(&u) || !linalg::all_finite(&v) {
            return Err(Error::NonFinite { what: "transform" });
        }
        let full = block2(&u, &v.conjugate(), &v, &u.conjugate());
        Ok(Self { u, v, full })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_blocks(linalg::identity(n), CMatrix::zeros(n, n)).expect("identity is well formed")
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn full(&self) -> &CMatrix {
        &self.full
    }

    /// `S V^dagger S`, the inverse of a symplectic `V`.
    pub fn inverse(&self) -> Self {
        Self::from_blocks(self.u.adjoint(), -self.v.transpose()).expect("blocks already validated")
    }

    /// Operator norm of the full `2n x 2n` matrix.
    pub fn norm(&self) -> f64 {
        linalg::op_norm(&self.full)
    }

    /// Shale quantity `||V||_HS`.
    pub fn hs_v(&self) -> f64 {
        linalg::frobenius(&self.v)
    }

    /// State obtained by applying the transform to the vacuum.
    pub fn vacuum_image(&self) -> QuasiFreeState {
        let gamma = linalg::hermitian_part(&(self.v.adjoint() * &self.v));
        let alpha = linalg::symmetric_part(&(self.v.adjoint() * self.u.conjugate()));
        QuasiFreeState { gamma, alpha }
    }
}

/// One-particle density matrices `gamma_ij = <a+_j a_i>`, `alpha_ij = <a_i a_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiFreeState {
    pub gamma: CMatrix,
    pub alpha: CMatrix,
}

impl QuasiFreeState {
    pub fn new(gamma: CMatrix, alpha: CMatrix) -> Result<Self> {
        let s = Self::unchecked(gamma, alpha)?;
        s.validate()?;
        Ok(s)
    }

    /// Shape and finiteness checks only.
    pub fn unchecked(gamma: CMatrix, alpha: CMatrix) -> Result<Self> {
        if !gamma.is_square() || gamma.shape() != alpha.shape() || gamma.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "gamma is {}x{}, alpha is {}x{}",
                gamma.nrows(),
                gamma.ncols(),
                alpha.nrows(),
                alpha.ncols()
            )));
        }
        if !linalg::all_finite(&gamma) {
            return Err(Error::NonFinite { what: "gamma" });
        }
        if !linalg::all_finite(&alpha) {
            return Err(Error::NonFinite { what: "alpha" });
        }
        Ok(Self { gamma, alpha })
    }

    pub fn vacuum(n: usize) -> Self {
        Self { gamma: CMatrix::zeros(n, n), alpha: CMatrix::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.gamma.nrows()
    }

    /// `gamma` Hermitian PSD, `alpha` symmetric, generalized density matrix PSD.
    pub fn validate(&self) -> Result<()> {
        let scale = linalg::max_abs(&self.gamma).max(linalg::max_abs(&self.alpha)).max(1.0);
        let tol = 1e-8 * scale;
        let herm = linalg::hermitian_defect(&self.gamma);
        if herm > tol {
            return Err(Error::NotHermitian { what: "gamma", defect: herm, tol });
        }
        let sym = linalg::symmetric_defect(&self.alpha);
        if sym > tol {
            return Err(Error::NotSymmetric { what: "alpha", defect: sym, tol });
        }
        let g_min = linalg::hermitian_eigen(&self.gamma).0[0];
        if g_min < -tol {
            return Err(Error::NotPositiveSemidefinite { what: "gamma", min_eigenvalue: g_min });
        }
        let big_min = linalg::hermitian_eigen(&self.generalized()).0[0];
        if big_min < -tol {
            return Err(Error::NotPositiveSemidefinite { what: "generalized density matrix", min_eigenvalue: big_min });
        }
        Ok(())
    }

    /// `[[gamma, alpha], [alpha^dagger, I + conj gamma]]`.
    pub fn generalized(&self) -> CMatrix {
        let n = self.n();
        block2(&self.gamma, &self.alpha, &self.alpha.adjoint(), &(linalg::identity(n) + self.gamma.conjugate()))
    }

    /// Purity witnesses `X = gamma + gamma^2 - alpha alpha^dagger` and
    /// `Y = gamma alpha - alpha gamma^T`; both vanish on pure quasi-free states.
    pub fn purity_witnesses(&self) -> (CMatrix, CMatrix) {
        let g = &self.gamma;
        let a = &self.alpha;
        let x = g + g * g - a * a.adjoint();
        let y = g * a - a * g.transpose();
        (x, y)
    }

    pub fn purity_defect(&self) -> f64 {
        let (x, y) = self.purity_witnesses();
        linalg::frobenius(&x) + linalg::frobenius(&y)
    }

    /// Max-entry distance on both matrices.
    pub fn distance(&self, other: &Self) -> f64 {
        linalg::max_abs(&(&self.gamma - &other.gamma)).max(linalg::max_abs(&(&self.alpha - &other.alpha)))
    }
}

#[derive(Debug, Clone)]
pub struct DiagonalizationResult {
    pub transform: BogoliubovTransform,
    pub xi: CMatrix,
    pub xi_eigs: Vec<f64>,
    pub ground_energy: f64,
    pub ground_state: QuasiFreeState,
    pub offdiag_residual: f64,
}

pub fn diagonalize(q: &QuadraticHamiltonian) -> Result<DiagonalizationResult> {
    diagonalize_with(q, &Tolerances::default())
}

pub fn diagonalize_with(q: &QuadraticHamiltonian, tol: &Tolerances) -> Result<DiagonalizationResult> {
    let report = model::classify_with(q, tol)?;
    if !report.diagonalizable {
        return Err(Error::NotDiagonalizable { norm_g: report.norm_g });
    }
    let n = q.n();
    let a = model::build_block_operator(q)?.into_matrix();
    let (a_half, a_inv_half) = linalg::pd_sqrt_pair(&a)?;
    let b = &a_half * linalg::symplectic_s(n) * &a_half;
    let (vals, vecs) = linalg::hermitian_eigen(&b);

    let a_norm = linalg::op_norm(&a);
    let lambdas: Vec<f64> = vals[n..].to_vec();
    if let Some(&bad) = lambdas.iter().find(|&&l| l <= tol.pair * a_norm) {
        return Err(Error::DegeneratePairing { eigenvalue: bad });
    }
    let mut q_mat = CMatrix::zeros(2 * n, 2 * n);
    for (i, col) in (n..2 * n).enumerate() {
        let w = vecs.column(col).into_owned();
        let partner = linalg::conj_swap_vector(&w);
        q_mat.set_column(i, &w);
        q_mat.set_column(i + n, &partner);
    }
    let sqrt_l: Vec<f64> = lambdas.iter().chain(lambdas.iter()).map(|l| l.sqrt()).collect();
    let full = linalg::diag_real(&sqrt_l) * q_mat.adjoint() * a_inv_half;
    let transform = BogoliubovTransform::from_blocks(block(&full, 0, 0), block(&full, 1, 0))?;

    let dressed = transform.full() * &a * transform.full().adjoint();
    let xi = linalg::hermitian_part(&block(&dressed, 0, 0));
    let offdiag_residual = linalg::frobenius(&block(&dressed, 0, 1));
    let a_frob = linalg::frobenius(&a);
    if offdiag_residual > tol.diag * a_frob {
        return Err(Error::InvariantViolated {
            what: "off-diagonal block of V M V^dagger".into(),
            residual: offdiag_residual,
        });
    }
    let mut xi_eigs = linalg::hermitian_eigen(&xi).0;
    xi_eigs.sort_by(f64::total_cmp);
    let (ground_state, ground_energy) = ground_state_data_with(q, &transform, tol)?;
    Ok(DiagonalizationResult { transform, xi, xi_eigs, ground_energy, ground_state, offdiag_residual })
}

pub fn ground_state_data(q: &QuadraticHamiltonian, t: &BogoliubovTransform) -> Result<(QuasiFreeState, f64)> {
    ground_state_data_with(q, t, &Tolerances::default())
}

/// Ground-state density matrices `(V^dagger V, sym(V^dagger conj U))` and energy,
/// checked against the lower bound `-1/2 ||k conj(h)^{-1/2}||_HS^2`.
pub fn ground_state_data_with(
    q: &QuadraticHamiltonian,
    t: &BogoliubovTransform,
    tol: &Tolerances,
) -> Result<(QuasiFreeState, f64)> {
    if t.n() != q.n() {
        return Err(Error::DimensionMismatch(format!("transform has {} modes, Hamiltonian {}", t.n(), q.n())));
    }
    let state = t.vacuum_image();
    let energy = q.energy(&state.gamma, &state.alpha);
    let bound = model::classify_with(q, tol)?.lower_bound;
    if energy < bound - tol.num * bound.abs().max(1.0) {
        return Err(Error::BoundViolated { energy, bound });
    }
    Ok((state, energy))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

/// Forward: `Gamma -> V^dagger Gamma V`, the state after applying the
/// transform's unitary. Inverse undoes it.
pub fn transform_state(t: &BogoliubovTransform, s: &QuasiFreeState, direction: Direction) -> Result<QuasiFreeState> {
    if t.n() != s.n() {
        return Err(Error::DimensionMismatch(format!("transform has {} modes, state {}", t.n(), s.n())));
    }
    let n = s.n();
    let big = s.generalized();
    let op = match direction {
        Direction::Forward => t.full().clone(),
        Direction::Inverse => t.inverse().full().clone(),
    };
    let out = op.adjoint() * big * &op;
    let gamma = block(&out, 0, 0);
    let alpha = block(&out, 0, 1);
    let lower_left = block(&out, 1, 0);
    let lower_right = block(&out, 1, 1);
    let defect = linalg::max_abs(&(lower_left - alpha.adjoint()))
        .max(linalg::max_abs(&(lower_right - linalg::identity(n) - gamma.conjugate())));
    let scale = linalg::max_abs(&out).max(1.0);
    if defect > 1e-9 * scale {
        return Err(Error::BlockInconsistency { defect });
    }
    Ok(QuasiFreeState { gamma: linalg::hermitian_part(&gamma), alpha: linalg::symmetric_part(&alpha) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformReport {
    /// `V^dagger S V - S`.
    pub symplectic_left: f64,
    /// `V S V^dagger - S`.
    pub symplectic_right: f64,
    /// `U^dagger U - I - V^dagger V`.
    pub relation_uu: f64,
    /// `U U^dagger - I - conj(V) V^T`.
    pub relation_uu_adj: f64,
    /// Antisymmetric part of `U^T V`.
    pub relation_sym: f64,
    pub max_residual: f64,
    pub hs_v: f64,
    pub norm: f64,
    /// `((1+g)/(1-g))^{1/4} - ||V||`.
    pub norm_bound_slack: f64,
    /// `2 ||G||_HS / (1-g) - ||V||_HS`.
    pub hs_bound_slack: f64,
}

/// Residuals of the symplectic identities and slack of the norm bounds.
pub fn verify_transform(t: &BogoliubovTransform, norm_g: f64, hs_g: f64) -> TransformReport {
    let n = t.n();
    let s = linalg::symplectic_s(n);
    let full = t.full();
    let (u, v) = (t.u(), t.v());
    let id = linalg::identity(n);
    let symplectic_left = linalg::max_abs(&(full.adjoint() * &s * full - &s));
    let symplectic_right = linalg::max_abs(&(full * &s * full.adjoint() - &s));
    let relation_uu = linalg::max_abs(&(u.adjoint() * u - &id - v.adjoint() * v));
    let relation_uu_adj = linalg::max_abs(&(u * u.adjoint() - &id - v.conjugate() * v.transpose()));
    let relation_sym = linalg::symmetric_defect(&(u.transpose() * v));
    let max_residual = [symplectic_left, symplectic_right, relation_uu, relation_uu_adj, relation_sym]
        .into_iter()
        .fold(0.0, f64::max);
    let norm = t.norm();
    let hs_v = t.hs_v();
    let (norm_bound, hs_bound) = if norm_g < 1.0 {
        (((1.0 + norm_g) / (1.0 - norm_g)).powf(0.25), 2.0 * hs_g / (1.0 - norm_g))
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    TransformReport {
        symplectic_left,
        symplectic_right,
        relation_uu,
        relation_uu_adj,
        relation_sym,
        max_residual,
        hs_v,
        norm,
        norm_bound_slack: norm_bound - norm,
        hs_bound_slack: hs_bound - hs_v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, max_abs, real_matrix};
    use crate::model::{bogoliubov_1947_pair, classify, random_instance};
    use rand::SeedableRng;

    fn scalar(h: f64, k: f64) -> QuadraticHamiltonian {
        QuadraticHamiltonian::from_real(1, &[h], &[k]).unwrap()
    }

    #[test]
    fn scalar_values() {
        let r = diagonalize(&scalar(1.0, 0.6)).unwrap();
        assert!((r.xi[(0, 0)].re - 0.8).abs() < 1e-12);
        assert!((r.transform.norm() - 2f64.sqrt()).abs() < 1e-12);
        let u = r.transform.u()[(0, 0)];
        let v = r.transform.v()[(0, 0)];
        assert!((u.norm() - 1.125f64.sqrt()).abs() < 1e-12);
        assert!((v.norm() - 0.125f64.sqrt()).abs() < 1e-12);
        // relative sign is gauge invariant
        assert!(((v / u).re + 1.0 / 3.0).abs() < 1e-12);
        assert!((r.ground_state.gamma[(0, 0)].re - 0.125).abs() < 1e-12);
        assert!((r.ground_state.alpha[(0, 0)].re + 0.375).abs() < 1e-12);
        assert!((r.ground_energy + 0.1).abs() < 1e-12);
        assert!(r.ground_state.purity_defect() < 1e-12);
    }

    #[test]
    fn zero_pairing_is_trivial() {
        let h = real_matrix(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let q = QuadraticHamiltonian::new(h.clone(), CMatrix::zeros(2, 2)).unwrap();
        let r = diagonalize(&q).unwrap();
        assert!(max_abs(r.transform.v()) < 1e-14);
        assert!(r.offdiag_residual < 1e-13);
        assert!(r.ground_energy.abs() < 1e-14);
        let (vals, _) = linalg::hermitian_eigen(&h);
        for (a, b) in r.xi_eigs.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn pair_model_degenerate_spectrum() {
        let q = bogoliubov_1947_pair(1.0, 1.0, 0.5).unwrap();
        let r = diagonalize(&q).unwrap();
        for &x in &r.xi_eigs {
            assert!((x - 2f64.sqrt()).abs() < 1e-12);
        }
        assert!((r.ground_energy - (2f64.sqrt() - 1.5)).abs() < 1e-12);
        let rep = verify_transform(&r.transform, 1.0 / 3.0, (2.0f64).sqrt() / 3.0);
        assert!(rep.max_residual < 1e-12);
    }

    #[test]
    fn rejects_strong_pairing() {
        assert!(matches!(diagonalize(&scalar(1.0, 1.2)), Err(Error::NotDiagonalizable { .. })));
        assert!(matches!(diagonalize(&scalar(1.0, 1.0)), Err(Error::NotDiagonalizable { .. })));
    }

    #[test]
    fn identity_report() {
        let rep = verify_transform(&BogoliubovTransform::identity(3), 0.0, 0.0);
        assert_eq!(rep.max_residual, 0.0);
        assert_eq!(rep.hs_v, 0.0);
        assert!((rep.norm_bound_slack).abs() < 1e-15);
    }

    #[test]
    fn scalar_report() {
        let r = diagonalize(&scalar(1.0, 0.6)).unwrap();
        let rep = verify_transform(&r.transform, 0.6, 0.6);
        assert!((rep.hs_v - 0.125f64.sqrt()).abs() < 1e-12);
        assert!((rep.hs_bound_slack - (3.0 - 0.125f64.sqrt())).abs() < 1e-12);
        // the commutative case saturates the norm bound
        assert!(rep.norm_bound_slack.abs() < 1e-12);
    }

    #[test]
    fn random_instances_pass_all_identities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let q = random_instance(&mut rng, 3, 0.8);
            let c = classify(&q).unwrap();
            let r = diagonalize(&q).unwrap();
            let rep = verify_transform(&r.transform, c.norm_g, c.hs_g);
            assert!(rep.max_residual < 1e-9, "{rep:?}");
            assert!(rep.norm_bound_slack >= -1e-9 && rep.hs_bound_slack >= -1e-9);
            assert!(r.ground_energy >= c.lower_bound - 1e-12);
            assert!(r.ground_state.purity_defect() < 1e-9);
            assert!(r.xi_eigs.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn ground_energy_is_half_trace_shift() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let q = random_instance(&mut rng, 4, 0.7);
            let r = diagonalize(&q).unwrap();
            let shift = 0.5 * (r.xi_eigs.iter().sum::<f64>() - linalg::trace(q.h()).re);
            assert!((r.ground_energy - shift).abs() < 1e-10);
        }
    }

    #[test]
    fn transform_state_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let q = random_instance(&mut rng, 3, 0.6);
        let r = diagonalize(&q).unwrap();
        let vac = QuasiFreeState::vacuum(3);
        let g = transform_state(&r.transform, &vac, Direction::Forward).unwrap();
        assert!(g.distance(&r.ground_state) < 1e-12);
        let back = transform_state(&r.transform, &g, Direction::Inverse).unwrap();
        assert!(back.distance(&vac) < 1e-10);
        let same = transform_state(&BogoliubovTransform::identity(3), &g, Direction::Forward).unwrap();
        assert!(same.distance(&g) < 1e-15);
    }

    #[test]
    fn inverse_is_symplectic_inverse() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let r = diagonalize(&random_instance(&mut rng, 2, 0.5)).unwrap();
        let prod = r.transform.full() * r.transform.inverse().full();
        assert!(max_abs(&(prod - linalg::identity(4))) < 1e-12);
    }

    #[test]
    fn state_validation() {
        let bad = QuasiFreeState::new(linalg::diag_real(&[-0.5]), CMatrix::zeros(1, 1));
        assert!(bad.is_err());
        let nonsym = QuasiFreeState::new(
            CMatrix::zeros(2, 2),
            CMatrix::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) }),
        );
        assert!(matches!(nonsym, Err(Error::NotSymmetric { .. })));
        let thermal = QuasiFreeState::new(linalg::diag_real(&[1.0]), CMatrix::zeros(1, 1)).unwrap();
        let (x, y) = thermal.purity_witnesses();
        assert_eq!(x[(0, 0)].re, 2.0);
        assert_eq!(max_abs(&y), 0.0);
    }
}
