//! Pure quasi-free states, Bogoliubov transforms and pairing generators,
//! and the block-commutator residual of a trajectory.
//!
//! A symmetric generator `k = W D W^T` (Takagi) yields
//! `U = W cosh(2D) W^dagger` and `V = -conj(W sinh(2D) W^T)`, the transform
//! whose vacuum image is the pure state with `gamma = V^dagger V`.

use serde::Serialize;

use crate::diag::{BogoliubovTransform, QuasiFreeState};
use crate::dynamics::{DynamicsProblem, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{self, block, block2, c64, CMatrix};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq)]
pub struct PairingGenerator {
    kgen: CMatrix,
}

impl PairingGenerator {
    pub fn new(kgen: CMatrix) -> Result<Self> {
        if !kgen.is_square() || kgen.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!("generator is {}x{}", kgen.nrows(), kgen.ncols())));
        }
        if !linalg::all_finite(&kgen) {
            return Err(Error::NonFinite { what: "generator" });
        }
        let tol = tolerance::SYM_REL * linalg::max_abs(&kgen).max(1.0);
        let defect = linalg::symmetric_defect(&kgen);
        if defect > tol {
            return Err(Error::NotSymmetric { what: "generator", defect, tol });
        }
        Ok(Self { kgen: linalg::symmetric_part(&kgen) })
    }

    pub fn zero(n: usize) -> Self {
        Self { kgen: CMatrix::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.kgen.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.kgen
    }
}

/// Interleaved series `sum ((2k)(2 conj k))^n / (2n)!` and
/// `sum ((2k)(2 conj k))^n (2k) / (2n+1)!`.
pub fn generator_series(g: &PairingGenerator) -> (CMatrix, CMatrix) {
    let n = g.n();
    let two_k = g.matrix().scale(2.0);
    let step = &two_k * two_k.conjugate();
    let mut cosh = linalg::identity(n);
    let mut sinh = two_k.clone();
    let mut term_c = linalg::identity(n);
    let mut term_s = two_k;
    for j in 1..400 {
        let jf = j as f64;
        term_c = &step * &term_c / c64((2.0 * jf - 1.0) * (2.0 * jf), 0.0);
        term_s = &step * &term_s / c64((2.0 * jf) * (2.0 * jf + 1.0), 0.0);
        cosh += &term_c;
        sinh += &term_s;
        if linalg::max_abs(&term_c).max(linalg::max_abs(&term_s)) <= 1e-18 * linalg::max_abs(&cosh) {
            break;
        }
    }
    (cosh, sinh)
}

/// Closed form via Takagi, cross-checked against [`generator_series`].
pub fn generator_to_transform(g: &PairingGenerator) -> Result<BogoliubovTransform> {
    let (w, d) = linalg::takagi(g.matrix())?;
    let ch = linalg::diag_real(&d.iter().map(|x| (2.0 * x).cosh()).collect::<Vec<_>>());
    let sh = linalg::diag_real(&d.iter().map(|x| (2.0 * x).sinh()).collect::<Vec<_>>());
    let u = &w * ch * w.adjoint();
    let sinh_part = &w * sh * w.transpose();
    let (series_c, series_s) = generator_series(g);
    let scale = linalg::max_abs(&u).max(1.0);
    let residual = linalg::max_abs(&(&series_c - &u)).max(linalg::max_abs(&(&series_s - &sinh_part)));
    if residual > 1e-10 * scale {
        return Err(Error::TakagiFailure { residual });
    }
    BogoliubovTransform::from_blocks(linalg::hermitian_part(&u), -sinh_part.conjugate())
}

/// Recover the generator up to the quasiparticle gauge `U -> Q U`,
/// `V -> conj(Q) V`.
pub fn transform_to_generator(t: &BogoliubovTransform) -> Result<PairingGenerator> {
    let u = t.u();
    let p = linalg::psd_sqrt(&(u.adjoint() * u), tolerance::PSD)?;
    let p_inv = linalg::inverse(&p).ok_or(Error::CompletionFailure { residual: f64::INFINITY })?;
    let r = u * p_inv;
    let v_gauged = r.transpose() * t.v();
    let x = -v_gauged.conjugate();
    let deviation = linalg::symmetric_defect(&x);
    let scale = linalg::max_abs(&x).max(1.0);
    if deviation > 1e-8 * scale {
        return Err(Error::GaugeObstruction { deviation });
    }
    let (w, s) = linalg::takagi(&linalg::symmetric_part(&x))?;
    let d: Vec<f64> = s.iter().map(|x| 0.5 * x.asinh()).collect();
    let kgen = &w * linalg::diag_real(&d) * w.transpose();
    let g = PairingGenerator::new(linalg::symmetric_part(&kgen))?;
    let back = generator_to_transform(&g)?.vacuum_image();
    let deviation = back.distance(&t.vacuum_image());
    if deviation > 1e-8 * scale {
        return Err(Error::GaugeObstruction { deviation });
    }
    Ok(g)
}

/// Rebuild `(U, V)` from a pure state: `U = (I + gamma)^{1/2}`,
/// `V = conj(U)^{-1} alpha^dagger`.
pub fn state_to_transform(s: &QuasiFreeState, purity_tol: f64) -> Result<BogoliubovTransform> {
    let witness = s.purity_defect();
    if witness > purity_tol {
        return Err(Error::NotPure { witness });
    }
    let n = s.n();
    let u = linalg::psd_sqrt(&(linalg::identity(n) + &s.gamma), tolerance::PSD)?;
    let u_bar_inv = linalg::inverse(&u.conjugate()).ok_or(Error::CompletionFailure { residual: f64::INFINITY })?;
    let v = u_bar_inv * s.alpha.adjoint();
    let t = BogoliubovTransform::from_blocks(u, v)?;
    let residual = t.vacuum_image().distance(s);
    let scale = linalg::max_abs(&s.gamma).max(linalg::max_abs(&s.alpha)).max(1.0);
    if residual > 1e-8 * scale {
        return Err(Error::CompletionFailure { residual });
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualPoint {
    pub t: f64,
    /// Frobenius norm of the upper-left block, halved.
    pub gamma: f64,
    /// Frobenius norm of the upper-right block, halved.
    pub alpha: f64,
}

impl ResidualPoint {
    pub fn max(&self) -> f64 {
        self.gamma.max(self.alpha)
    }
}

/// `i d/dt L - [M S, L]` with `L = I + 2 S Gamma` and
/// `M(t) = [[h, K], [conj K, conj h]]`, the time derivative taken by centered
/// differences at interior samples.
pub fn tddiag_residual(traj: &Trajectory, p: &DynamicsProblem) -> Result<Vec<ResidualPoint>> {
    let len = traj.len();
    if len < 3 || traj.states.len() != len {
        return Err(Error::GridTooCoarse { samples: len });
    }
    let n = p.n();
    if traj.states.iter().any(|s| s.n() != n) {
        return Err(Error::DimensionMismatch(format!("trajectory states do not have {n} modes")));
    }
    let s_mat = linalg::symplectic_s(n);
    let lambda = |st: &QuasiFreeState| linalg::identity(2 * n) + (&s_mat * st.generalized()).scale(2.0);
    let mut out = Vec::with_capacity(len - 2);
    for i in 1..len - 1 {
        let t = traj.times[i];
        let (h, k) = (p.h_at(t)?, p.k2_at(t)?);
        let m = block2(&h, &k, &k.conjugate(), &h.conjugate());
        let ms = &m * &s_mat;
        let l = lambda(&traj.states[i]);
        let dl = (lambda(&traj.states[i + 1]) - lambda(&traj.states[i - 1])) / c64(traj.times[i + 1] - traj.times[i - 1], 0.0);
        let r = dl * linalg::I - (&ms * &l - &l * &ms);
        out.push(ResidualPoint {
            t,
            gamma: 0.5 * linalg::frobenius(&block(&r, 0, 0)),
            alpha: 0.5 * linalg::frobenius(&block(&r, 0, 1)),
        });
    }
    Ok(out)
}

/// Random symmetric generator with operator norm at most `max_norm`.
pub fn random_generator<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, max_norm: f64) -> PairingGenerator {
    let raw = CMatrix::from_fn(n, n, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let k = linalg::symmetric_part(&raw);
    let norm = linalg::op_norm(&k);
    let target = max_norm * (1.0 - rng.random::<f64>());
    let scaled = if norm > 0.0 { k.scale(target / norm) } else { k };
    PairingGenerator { kgen: scaled }
}
