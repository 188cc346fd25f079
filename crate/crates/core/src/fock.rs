//! Truncated bosonic Fock space with a total-number cutoff.
//!
//! Basis states are occupation vectors with `sum n_i <= n_max`, ordered by
//! total number and, within a shell, in descending lexicographic order
//! (`00, 10, 01, 20, 11, 02, ...`). A space with a smaller cutoff is
//! therefore a prefix of one with a larger cutoff.
//!
//! Operators are assembled from the exact action of operator words on
//! occupation vectors, projected back onto the truncated space, so identities
//! like `[a_i, a+_j] = delta_ij` that hold before projection carry over
//! entrywise.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::diag::QuasiFreeState;
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector, SparseMatrix, ZERO};
use crate::model::QuadraticHamiltonian;

pub const DEFAULT_DIM_MAX: usize = 5000;

/// A single ladder operator: `a_mode` or `a+_mode`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub mode: usize,
    pub create: bool,
}

impl Letter {
    pub fn a(mode: usize) -> Self {
        Self { mode, create: false }
    }

    pub fn ad(mode: usize) -> Self {
        Self { mode, create: true }
    }

    pub fn adjoint(self) -> Self {
        Self { mode: self.mode, create: !self.create }
    }
}

#[derive(Debug, Clone)]
pub struct TruncatedFock {
    n_modes: usize,
    n_max: usize,
    basis: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

/// Number of occupation vectors of `modes` modes with total at most `n_max`,
/// saturating on overflow.
pub fn fock_dimension(modes: usize, n_max: usize) -> usize {
    // C(n_max + modes, modes)
    let mut acc: u128 = 1;
    for i in 1..=modes as u128 {
        acc = acc * (n_max as u128 + i) / i;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

fn shell(modes: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if modes == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        shell(modes - 1, total - first, prefix, out);
        prefix.pop();
    }
}

impl TruncatedFock {
    pub fn new(n_modes: usize, n_max: usize) -> Result<Self> {
        Self::with_limit(n_modes, n_max, DEFAULT_DIM_MAX)
    }

    pub fn with_limit(n_modes: usize, n_max: usize, dim_max: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("at least one mode is required".into()));
        }
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!("cutoff must be at least 2, got {n_max}")));
        }
        let dim = fock_dimension(n_modes, n_max);
        if dim > dim_max {
            return Err(Error::DimensionOverflow { dim, max: dim_max });
        }
        let mut basis = Vec::with_capacity(dim);
        for total in 0..=n_max as u32 {
            shell(n_modes, total, &mut Vec::with_capacity(n_modes), &mut basis);
        }
        let index = basis.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Ok(Self { n_modes, n_max, basis, index })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn vacuum(&self) -> CVector {
        self.basis_vector(0)
    }

    pub fn basis_vector(&self, i: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[i] = linalg::ONE;
        v
    }

    /// Apply a word (rightmost letter first) to a basis state, without
    /// truncation. `None` when the result vanishes.
    pub fn word_on_occupation(word: &[Letter], occ: &[u32]) -> Option<(Vec<u32>, f64)> {
        let mut occ = occ.to_vec();
        let mut prod: u128 = 1;
        for l in word.iter().rev() {
            let m = &mut occ[l.mode];
            if l.create {
                *m += 1;
                prod *= *m as u128;
            } else {
                if *m == 0 {
                    return None;
                }
                prod *= *m as u128;
                *m -= 1;
            }
        }
        Some((occ, (prod as f64).sqrt()))
    }

    /// Apply a word to a state vector, projecting the result back onto the
    /// truncated space.
    pub fn apply_word(&self, word: &[Letter], psi: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim());
        for (j, occ) in self.basis.iter().enumerate() {
            let c = psi[j];
            if c == ZERO {
                continue;
            }
            if let Some((target, amp)) = Self::word_on_occupation(word, occ) {
                if let Some(i) = self.index_of(&target) {
                    out[i] += c * amp;
                }
            }
        }
        out
    }

    /// Dense matrix of the projected ladder operator.
    pub fn ladder_matrix(&self, letter: Letter) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (j, occ) in self.basis.iter().enumerate() {
            if let Some((target, amp)) = Self::word_on_occupation(&[letter], occ) {
                if let Some(i) = self.index_of(&target) {
                    m[(i, j)] = c64(amp, 0.0);
                }
            }
        }
        m
    }

    /// Annihilation matrices, one per mode.
    pub fn ladder(&self) -> Vec<CMatrix> {
        (0..self.n_modes).map(|i| self.ladder_matrix(Letter::a(i))).collect()
    }

    /// Largest deviation from the CCR on states at least two below the cutoff,
    /// using products of the truncated ladder matrices.
    pub fn ccr_interior_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let interior: Vec<usize> =
            (0..self.dim()).filter(|&j| self.basis[j].iter().sum::<u32>() as usize + 2 <= self.n_max).collect();
        for &j in &interior {
            let e = self.basis_vector(j);
            for i in 0..self.n_modes {
                for k in 0..self.n_modes {
                    let lhs = self.apply_word(&[Letter::a(i)], &self.apply_word(&[Letter::ad(k)], &e))
                        - self.apply_word(&[Letter::ad(k)], &self.apply_word(&[Letter::a(i)], &e));
                    let expected = if i == k { e.clone() } else { CVector::zeros(self.dim()) };
                    worst = worst.max((lhs - expected).camax());
                    let aa = self.apply_word(&[Letter::a(i)], &self.apply_word(&[Letter::a(k)], &e))
                        - self.apply_word(&[Letter::a(k)], &self.apply_word(&[Letter::a(i)], &e));
                    worst = worst.max(aa.camax());
                }
            }
        }
        worst
    }

    /// Zero-pad a state of a smaller-cutoff space with the same mode count.
    pub fn embed(&self, psi: &CVector, from: &TruncatedFock) -> Result<CVector> {
        if from.n_modes != self.n_modes || from.n_max > self.n_max || psi.len() != from.dim() {
            return Err(Error::DimensionMismatch("cannot embed state into this space".into()));
        }
        let mut out = CVector::zeros(self.dim());
        out.rows_mut(0, psi.len()).copy_from(psi);
        Ok(out)
    }

    /// Weight of `psi` on the top `levels` shells.
    pub fn shell_mass(&self, psi: &CVector, levels: usize) -> f64 {
        let threshold = self.n_max.saturating_sub(levels) + 1;
        self.basis
            .iter()
            .zip(psi.iter())
            .filter(|(occ, _)| occ.iter().sum::<u32>() as usize >= threshold)
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    NormalOrdered,
    Weyl,
}

#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub n_modes: usize,
    pub n_max: usize,
    pub matrix: CMatrix,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Quadratic terms `(coefficient, word)` of the Hamiltonian in the given form.
fn quadratic_terms(h: &CMatrix, k: &CMatrix, form: Form) -> Vec<(Complex64, [Letter; 2])> {
    let n = h.nrows();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            match form {
                Form::NormalOrdered => {
                    terms.push((h[(i, j)], [Letter::ad(i), Letter::a(j)]));
                    terms.push((k[(i, j)] * 0.5, [Letter::ad(i), Letter::ad(j)]));
                    terms.push((k[(i, j)].conj() * 0.5, [Letter::a(i), Letter::a(j)]));
                }
                Form::Weyl => {
                    // 1/2 A^dagger M A with A = (a, a+), M = [[h, k], [conj k, conj h]]
                    terms.push((h[(i, j)] * 0.5, [Letter::ad(i), Letter::a(j)]));
                    terms.push((k[(i, j)] * 0.5, [Letter::ad(i), Letter::ad(j)]));
                    terms.push((k[(i, j)].conj() * 0.5, [Letter::a(i), Letter::a(j)]));
                    terms.push((h[(i, j)].conj() * 0.5, [Letter::a(i), Letter::ad(j)]));
                }
            }
        }
    }
    terms.retain(|(c, _)| *c != ZERO);
    terms
}

fn assemble_rows(h: &CMatrix, k: &CMatrix, f: &TruncatedFock, form: Form) -> Result<Vec<Vec<(usize, Complex64)>>> {
    if h.nrows() != f.n_modes() || !h.is_square() || k.shape() != h.shape() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian has {} modes, Fock space {}",
            h.nrows(),
            f.n_modes()
        )));
    }
    let terms = quadratic_terms(h, k, form);
    let mut rows = vec![Vec::new(); f.dim()];
    for (j, occ) in f.basis().iter().enumerate() {
        for (coef, word) in &terms {
            if let Some((target, amp)) = TruncatedFock::word_on_occupation(word, occ) {
                if let Some(i) = f.index_of(&target) {
                    rows[i].push((j, coef * amp));
                }
            }
        }
    }
    Ok(rows)
}

pub fn assemble(q: &QuadraticHamiltonian, f: &TruncatedFock, form: Form) -> Result<DenseOperator> {
    assemble_matrices(q.h(), q.k(), f, form)
}

/// Same as [`assemble`] for arbitrary `(h, k)`, e.g. time-dependent data.
pub fn assemble_matrices(h: &CMatrix, k: &CMatrix, f: &TruncatedFock, form: Form) -> Result<DenseOperator> {
    let rows = assemble_rows(h, k, f, form)?;
    let mut matrix = CMatrix::zeros(f.dim(), f.dim());
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row {
            matrix[(i, j)] += v;
        }
    }
    Ok(DenseOperator { n_modes: f.n_modes(), n_max: f.n_max(), matrix })
}

pub fn assemble_sparse(h: &CMatrix, k: &CMatrix, f: &TruncatedFock, form: Form) -> Result<SparseMatrix> {
    Ok(SparseMatrix::from_rows(f.dim(), assemble_rows(h, k, f, form)?))
}

/// Lowest `count` eigenvalues, ascending.
pub fn exact_spectrum(op: &DenseOperator, count: usize) -> Vec<f64> {
    let (vals, _) = linalg::hermitian_eigen(&op.matrix);
    vals.into_iter().take(count).collect()
}

/// Lowest eigenvalue and a normalized eigenvector.
pub fn ground_state(op: &DenseOperator) -> (f64, CVector) {
    let (vals, vecs) = linalg::hermitian_eigen(&op.matrix);
    let psi = vecs.column(0).into_owned();
    let norm = psi.norm();
    (vals[0], psi.unscale(norm))
}

/// The lowest `count` values of `e0 + sum_i m_i xi_i` over occupations `m_i >= 0`.
pub fn predicted_levels(e0: f64, xi: &[f64], count: usize) -> Vec<f64> {
    if count == 0 || xi.is_empty() {
        return Vec::new();
    }
    let max_total = (count - 1) as u32;
    let mut levels = Vec::new();
    for total in 0..=max_total {
        let mut shells = Vec::new();
        shell(xi.len(), total, &mut Vec::new(), &mut shells);
        for occ in shells {
            levels.push(e0 + occ.iter().zip(xi).map(|(&m, &x)| m as f64 * x).sum::<f64>());
        }
    }
    levels.sort_by(f64::total_cmp);
    levels.truncate(count);
    levels
}

fn check_normalized(psi: &CVector, f: &TruncatedFock) -> Result<()> {
    if psi.len() != f.dim() {
        return Err(Error::DimensionMismatch(format!("state has length {}, space dimension {}", psi.len(), f.dim())));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// `gamma_ij = <a+_j a_i>`, `alpha_ij = <a_i a_j>` of a Fock-space vector.
pub fn state_density_matrices(psi: &CVector, f: &TruncatedFock) -> Result<QuasiFreeState> {
    check_normalized(psi, f)?;
    Ok(density_matrices_unchecked(psi, f))
}

pub(crate) fn density_matrices_unchecked(psi: &CVector, f: &TruncatedFock) -> QuasiFreeState {
    let n = f.n_modes();
    let lowered: Vec<CVector> = (0..n).map(|i| f.apply_word(&[Letter::a(i)], psi)).collect();
    let gamma = CMatrix::from_fn(n, n, |i, j| lowered[j].dotc(&lowered[i]));
    let alpha = CMatrix::from_fn(n, n, |i, j| psi.dotc(&f.apply_word(&[Letter::a(i)], &lowered[j])));
    QuasiFreeState { gamma, alpha }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WickReport {
    /// Largest odd moment of order 1 or 3.
    pub odd: f64,
    /// Largest deviation of a 4-point moment from its pairing sum.
    pub even: f64,
    pub deviation: f64,
}

/// Weight allowed within two shells of the cutoff before moments are refused.
pub const WICK_SUPPORT_TOL: f64 = 1e-12;

/// Compare all 3- and 4-point moments with Wick's formula.
///
/// Moments are computed exactly by embedding `psi` into a space with two extra
/// shells. Coefficients of `psi` within two shells of its own cutoff must be
/// negligible; otherwise the state is a truncation artifact.
#[allow(clippy::needless_range_loop)]
pub fn wick_check(psi: &CVector, f: &TruncatedFock, max_order: usize) -> Result<WickReport> {
    check_normalized(psi, f)?;
    if !(2..=4).contains(&max_order) {
        return Err(Error::InvalidParameter(format!("max_order must be 2, 3 or 4, got {max_order}")));
    }
    let mass = f.shell_mass(psi, 2);
    if mass > WICK_SUPPORT_TOL {
        return Err(Error::CutoffTooTight { mass });
    }
    let big = TruncatedFock::with_limit(f.n_modes(), f.n_max() + 2, usize::MAX)?;
    let phi = big.embed(psi, f)?;
    let letters: Vec<Letter> = (0..f.n_modes()).flat_map(|i| [Letter::a(i), Letter::ad(i)]).collect();
    let nl = letters.len();

    let single: Vec<CVector> = letters.iter().map(|l| big.apply_word(&[*l], &phi)).collect();
    // right[x][y] = L_x L_y phi, left[x][y] = (L_x L_y)^dagger phi
    let right: Vec<Vec<CVector>> =
        (0..nl).map(|x| (0..nl).map(|y| big.apply_word(&[letters[x]], &single[y])).collect()).collect();
    let adj: Vec<CVector> = letters.iter().map(|l| big.apply_word(&[l.adjoint()], &phi)).collect();
    let left: Vec<Vec<CVector>> =
        (0..nl).map(|x| (0..nl).map(|y| big.apply_word(&[letters[y].adjoint()], &adj[x])).collect()).collect();
    let two = |x: usize, y: usize| phi.dotc(&right[x][y]);

    let mut odd: f64 = 0.0;
    for s in &single {
        odd = odd.max(phi.dotc(s).norm());
    }
    if max_order >= 3 {
        for x in 0..nl {
            for y in 0..nl {
                for z in 0..nl {
                    odd = odd.max(adj[x].dotc(&right[y][z]).norm());
                }
            }
        }
    }
    let mut even: f64 = 0.0;
    if max_order >= 4 {
        for w in 0..nl {
            for x in 0..nl {
                for y in 0..nl {
                    for z in 0..nl {
                        let moment = left[w][x].dotc(&right[y][z]);
                        let pairing = two(w, x) * two(y, z) + two(w, y) * two(x, z) + two(w, z) * two(x, y);
                        even = even.max((moment - pairing).norm());
                    }
                }
            }
        }
    }
    Ok(WickReport { odd, even, deviation: odd.max(even) })
}
