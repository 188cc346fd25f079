//! Dense complex linear algebra used throughout the crate.
//!
//! Everything is built on `nalgebra::DMatrix<Complex64>`. Matrix functions of
//! Hermitian matrices go through the Hermitian eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Build a complex matrix from a real row-major slice.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols, "real_matrix: wrong data length");
    CMatrix::from_fn(rows, cols, |i, j| c64(data[i * cols + j], 0.0))
}

pub fn diag_real(d: &[f64]) -> CMatrix {
    let n = d.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c64(d[i], 0.0) } else { ZERO })
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm (largest singular value).
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let (vals, _) = hermitian_eigen(&gram);
    vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `max |m - m^dagger|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `max |m - m^T|`.
pub fn symmetric_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.transpose()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn symmetric_part(m: &CMatrix) -> CMatrix {
    (m + m.transpose()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is Hermitized first so round-off in the lower triangle cannot
/// leak into the result.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Real symmetric eigendecomposition, eigenvalues ascending.
pub fn real_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// `Q diag(f(lambda)) Q^dagger` for a given eigendecomposition.
pub fn spectral_apply(vals: &[f64], vecs: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let fv = f(v);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    scaled * vecs.adjoint()
}

/// Clamp eigenvalues in `[-tol, 0]` to zero, reject anything more negative.
fn clamp_psd(vals: &mut [f64], tol: f64, what: &'static str) -> Result<()> {
    for v in vals.iter_mut() {
        if *v < -tol {
            return Err(Error::NotPositiveSemidefinite { what, min_eigenvalue: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Square root of a Hermitian positive semidefinite matrix.
pub fn psd_sqrt(m: &CMatrix, tol_psd: f64) -> Result<CMatrix> {
    let (mut vals, vecs) = hermitian_eigen(m);
    clamp_psd(&mut vals, tol_psd, "matrix square root")?;
    Ok(spectral_apply(&vals, &vecs, f64::sqrt))
}

/// `m^{1/2}` and `m^{-1/2}` of a Hermitian positive definite matrix.
pub fn pd_sqrt_pair(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (vals, vecs) = hermitian_eigen(m);
    let min = vals.first().copied().unwrap_or(1.0);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok((spectral_apply(&vals, &vecs, f64::sqrt), spectral_apply(&vals, &vecs, |x| 1.0 / x.sqrt())))
}

/// Inverse of a square matrix via LU; `None` when singular.
pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().try_inverse()
}

/// Assemble `[[a, b], [c, d]]` from four equally sized square blocks.
pub fn block2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

/// Block `(bi, bj)` (each 0 or 1) of a `2n x 2n` matrix.
pub fn block(m: &CMatrix, bi: usize, bj: usize) -> CMatrix {
    let n = m.nrows() / 2;
    m.view((bi * n, bj * n), (n, n)).into_owned()
}

/// `S = diag(I, -I)`.
pub fn symplectic_s(n: usize) -> CMatrix {
    CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            ZERO
        } else if i < n {
            ONE
        } else {
            -ONE
        }
    })
}

/// Conjugate-swap map applied to a vector: `(f, g) -> (conj g, conj f)`.
pub fn conj_swap_vector(v: &CVector) -> CVector {
    let n = v.len() / 2;
    CVector::from_fn(2 * n, |i, _| if i < n { v[i + n].conj() } else { v[i - n].conj() })
}

/// `J M J` for the antiunitary conjugate-swap `J`; equals `P conj(M) P` with
/// `P` the block swap.
pub fn conj_swap_matrix(m: &CMatrix) -> CMatrix {
    let n2 = m.nrows();
    let n = n2 / 2;
    let sw = |i: usize| if i < n { i + n } else { i - n };
    CMatrix::from_fn(n2, n2, |i, j| m[(sw(i), sw(j))].conj())
}

/// Takagi factorization of a complex symmetric matrix: `k = W diag(d) W^T`
/// with `W` unitary and `d >= 0` (descending).
///
/// Uses the real symmetric embedding `[[Re k, Im k], [Im k, -Re k]]`, whose
/// eigenvectors `(u, v)` for eigenvalue `d >= 0` give Takagi vectors
/// `u + i v`. Columns for vanishing `d` are completed by Gram-Schmidt.
pub fn takagi(k: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let n = k.nrows();
    let scale = max_abs(k).max(f64::MIN_POSITIVE);
    let emb = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        let z = k[(i % n, j % n)];
        match (bi, bj) {
            (0, 0) => z.re,
            (0, 1) | (1, 0) => z.im,
            _ => -z.re,
        }
    });
    let (vals, vecs) = real_symmetric_eigen(&emb);
    let zero_tol = 1e-12 * scale * (n as f64);
    let mut cols: Vec<CVector> = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for idx in (0..2 * n).rev() {
        if cols.len() == n || vals[idx] <= zero_tol {
            break;
        }
        let w = CVector::from_fn(n, |i, _| c64(vecs[(i, idx)], vecs[(i + n, idx)]));
        let norm = w.norm();
        cols.push(w.unscale(norm));
        d.push(vals[idx]);
    }
    // complete with an orthonormal basis of the remaining space
    let mut e = 0;
    while cols.len() < n && e < n {
        let mut w = CVector::from_fn(n, |i, _| if i == e { ONE } else { ZERO });
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&w);
                w -= c * proj;
            }
        }
        let norm = w.norm();
        if norm > 1e-6 {
            cols.push(w.unscale(norm));
            d.push(0.0);
        }
        e += 1;
    }
    let w = CMatrix::from_columns(&cols);
    let recon = &w * diag_real(&d) * w.transpose();
    let residual = max_abs(&(&recon - k));
    if residual > 1e-8 * scale.max(1.0) {
        return Err(Error::TakagiFailure { residual });
    }
    Ok((w, d))
}

/// Apply `exp(-i H t)` to a vector by a Taylor series on a sparse `H`,
/// summed until the terms stop contributing.
pub fn expm_apply(h: &SparseMatrix, t: f64, psi: &CVector) -> CVector {
    let mut out = psi.clone();
    let mut term = psi.clone();
    let coeff = c64(0.0, -t);
    let base = psi.norm().max(f64::MIN_POSITIVE);
    for j in 1..200 {
        term = h.mul_vec(&term) * (coeff / j as f64);
        out += &term;
        if term.norm() <= 1e-17 * base {
            break;
        }
    }
    out
}

/// Row-compressed sparse complex matrix, enough for matrix-vector products.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseMatrix {
    pub fn from_dense(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|i| (0..m.ncols()).filter(|&j| m[(i, j)] != ZERO).map(|j| (j, m[(i, j)])).collect())
            .collect();
        Self { dim, rows }
    }

    /// From per-row `(column, value)` lists; duplicates are summed.
    pub fn from_rows(dim: usize, mut rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        for row in rows.iter_mut() {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
            for &(j, a) in row.iter() {
                match merged.last_mut() {
                    Some((lj, la)) if *lj == j => *la += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|&(_, a)| a != ZERO);
            *row = merged;
        }
        Self { dim, rows }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                m[(i, j)] += a;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        CVector::from_iterator(
            self.dim,
            self.rows.iter().map(|row| row.iter().map(|&(j, a)| a * v[j]).sum::<Complex64>()),
        )
    }
}
