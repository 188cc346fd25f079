//! Quasi-free dynamics under a time-dependent quadratic Hamiltonian.
//!
//! The density matrices obey
//!
//! ```text
//! i d/dt gamma = h gamma - gamma h + K alpha^dagger - alpha conj(K)
//! i d/dt alpha = h alpha + alpha h^T + K + K gamma^T + gamma K
//! ```
//!
//! for `H(t) = sum h_ij a+_i a_j + 1/2 sum (K_ij a+_i a+_j + h.c.)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diag::QuasiFreeState;
use crate::error::{Error, Result};
use crate::fock::{self, Form, TruncatedFock};
use crate::linalg::{self, CMatrix, CVector, SparseMatrix};
use crate::model::quadratic_energy;
use crate::tolerance;

/// Largest oracle space accepted by [`oracle_evolve`].
pub const ORACLE_DIM_MAX: usize = 2000;
/// Structure defect before correction that aborts integration.
pub const DEFECT_MAX: f64 = 1e-6;
/// Allowed per-step drift of the Fock-space norm.
pub const NORM_DRIFT_MAX: f64 = 1e-10;

/// A time-dependent matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSchedule {
    Constant(CMatrix),
    /// `base + amplitude * sin(omega t)`.
    Sinusoidal { base: CMatrix, amplitude: CMatrix, omega: f64 },
    /// Piecewise-linear interpolation between samples.
    Sampled { times: Vec<f64>, matrices: Vec<CMatrix> },
}

impl MatrixSchedule {
    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(m) => m.nrows(),
            Self::Sinusoidal { base, .. } => base.nrows(),
            Self::Sampled { matrices, .. } => matrices.first().map_or(0, |m| m.nrows()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    fn validate(&self, what: &str) -> Result<()> {
        let shapes: Vec<(usize, usize)> = match self {
            Self::Constant(m) => vec![m.shape()],
            Self::Sinusoidal { base, amplitude, omega } => {
                if !omega.is_finite() {
                    return Err(Error::InvalidParameter(format!("{what}: omega must be finite")));
                }
                vec![base.shape(), amplitude.shape()]
            }
            Self::Sampled { times, matrices } => {
                if times.len() < 2 || times.len() != matrices.len() {
                    return Err(Error::InvalidParameter(format!(
                        "{what}: sampled schedule needs at least 2 samples with one matrix per time"
                    )));
                }
                if !times.windows(2).all(|w| w[1] > w[0]) || times.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidParameter(format!("{what}: sample times must be strictly increasing")));
                }
                matrices.iter().map(|m| m.shape()).collect()
            }
        };
        let (r, c) = shapes[0];
        if r == 0 || r != c || shapes.iter().any(|&s| s != (r, c)) {
            return Err(Error::DimensionMismatch(format!("{what}: matrices must be square of one size")));
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> Result<CMatrix> {
        match self {
            Self::Constant(m) => Ok(m.clone()),
            Self::Sinusoidal { base, amplitude, omega } => Ok(base + amplitude.scale((omega * t).sin())),
            Self::Sampled { times, matrices } => {
                let (first, last) = (times[0], times[times.len() - 1]);
                let slack = 1e-12 * (last - first);
                if t < first - slack || t > last + slack {
                    return Err(Error::InvalidParameter(format!("t = {t} outside sampled range [{first}, {last}]")));
                }
                let t = t.clamp(first, last);
                let i = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[i - 1], times[i]);
                let w = (t - t0) / (t1 - t0);
                Ok(matrices[i - 1].scale(1.0 - w) + matrices[i].scale(w))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsProblem {
    pub h: MatrixSchedule,
    pub k2: MatrixSchedule,
    pub horizon: f64,
    pub dt: f64,
}

impl DynamicsProblem {
    pub fn new(h: MatrixSchedule, k2: MatrixSchedule, horizon: f64, dt: f64) -> Result<Self> {
        let p = Self { h, k2, horizon, dt };
        p.validate()?;
        Ok(p)
    }

    pub fn constant(h: CMatrix, k2: CMatrix, horizon: f64, dt: f64) -> Result<Self> {
        Self::new(MatrixSchedule::Constant(h), MatrixSchedule::Constant(k2), horizon, dt)
    }

    pub fn validate(&self) -> Result<()> {
        self.h.validate("h")?;
        self.k2.validate("K2")?;
        if self.h.dim() != self.k2.dim() {
            return Err(Error::DimensionMismatch(format!("h has {} modes, K2 {}", self.h.dim(), self.k2.dim())));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon {} must be at least dt {}", self.horizon, self.dt)));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.h.dim()
    }

    /// Number of steps; the step actually taken is `horizon / steps`.
    pub fn steps(&self) -> usize {
        ((self.horizon / self.dt).round() as usize).max(1)
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.step();
        (0..=self.steps()).map(|i| i as f64 * dt).collect()
    }

    /// Hermitized `h(t)` after a Hermiticity check.
    pub fn h_at(&self, t: f64) -> Result<CMatrix> {
        let h = self.h.at(t)?;
        if !linalg::all_finite(&h) {
            return Err(Error::NonFinite { what: "h(t)" });
        }
        let tol = tolerance::SYM_REL * linalg::max_abs(&h).max(1.0);
        let defect = linalg::hermitian_defect(&h);
        if defect > tol {
            return Err(Error::NotHermitian { what: "h(t)", defect, tol });
        }
        Ok(linalg::hermitian_part(&h))
    }

    /// Symmetrized `K2(t)` after a symmetry check.
    pub fn k2_at(&self, t: f64) -> Result<CMatrix> {
        let k = self.k2.at(t)?;
        if !linalg::all_finite(&k) {
            return Err(Error::NonFinite { what: "K2(t)" });
        }
        let tol = tolerance::SYM_REL * linalg::max_abs(&k).max(1.0);
        let defect = linalg::symmetric_defect(&k);
        if defect > tol {
            return Err(Error::NotSymmetric { what: "K2(t)", defect, tol });
        }
        Ok(linalg::symmetric_part(&k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub norm_x: f64,
    pub norm_y: f64,
    /// Hermiticity defect of gamma before correction.
    pub herm_defect: f64,
    /// Symmetry defect of alpha before correction.
    pub symm_defect: f64,
    pub tr_gamma: f64,
    pub energy: f64,
}

impl Monitor {
    fn of(s: &QuasiFreeState, h: &CMatrix, k: &CMatrix, herm_defect: f64, symm_defect: f64) -> Self {
        let (x, y) = s.purity_witnesses();
        Self {
            norm_x: linalg::frobenius(&x),
            norm_y: linalg::frobenius(&y),
            herm_defect,
            symm_defect,
            tr_gamma: linalg::trace(&s.gamma).re,
            energy: quadratic_energy(h, k, &s.gamma, &s.alpha),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuasiFreeState>,
    pub monitors: Vec<Monitor>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_purity_defect(&self) -> (f64, f64) {
        self.monitors.iter().fold((0.0, 0.0), |(x, y), m| (x.max(m.norm_x), y.max(m.norm_y)))
    }

    /// Largest Frobenius distance on gamma and on alpha at common samples.
    pub fn max_deviation(&self, other: &Trajectory) -> (f64, f64) {
        self.states.iter().zip(&other.states).fold((0.0, 0.0), |(g, a), (s, o)| {
            (g.max(linalg::frobenius(&(&s.gamma - &o.gamma))), a.max(linalg::frobenius(&(&s.alpha - &o.alpha))))
        })
    }
}

pub fn purity_witnesses(s: &QuasiFreeState) -> (CMatrix, CMatrix) {
    s.purity_witnesses()
}

/// Time derivatives `(d gamma/dt, d alpha/dt)`.
pub fn bogoliubov_rhs(h: &CMatrix, k: &CMatrix, gamma: &CMatrix, alpha: &CMatrix) -> (CMatrix, CMatrix) {
    let mi = Complex64::new(0.0, -1.0);
    let dg = h * gamma - gamma * h + k * alpha.adjoint() - alpha * k.conjugate();
    let da = h * alpha + alpha * h.transpose() + k + k * gamma.transpose() + gamma * k;
    (dg * mi, da * mi)
}

/// Fixed-step RK4 integration sampled at every step.
pub fn evolve(p: &DynamicsProblem, s0: &QuasiFreeState) -> Result<Trajectory> {
    p.validate()?;
    if s0.n() != p.n() {
        return Err(Error::DimensionMismatch(format!("state has {} modes, problem {}", s0.n(), p.n())));
    }
    s0.validate()?;
    let dt = p.step();
    let steps = p.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut monitors = Vec::with_capacity(steps + 1);

    let mut g = s0.gamma.clone();
    let mut a = s0.alpha.clone();
    monitors.push(Monitor::of(s0, &p.h_at(0.0)?, &p.k2_at(0.0)?, 0.0, 0.0));
    times.push(0.0);
    states.push(s0.clone());

    for step in 0..steps {
        let t = step as f64 * dt;
        let (h0, k0) = (p.h_at(t)?, p.k2_at(t)?);
        let (hm, km) = (p.h_at(t + 0.5 * dt)?, p.k2_at(t + 0.5 * dt)?);
        let (h1, k1) = (p.h_at(t + dt)?, p.k2_at(t + dt)?);
        let (g1, a1) = bogoliubov_rhs(&h0, &k0, &g, &a);
        let (g2, a2) = bogoliubov_rhs(&hm, &km, &(&g + g1.scale(0.5 * dt)), &(&a + a1.scale(0.5 * dt)));
        let (g3, a3) = bogoliubov_rhs(&hm, &km, &(&g + g2.scale(0.5 * dt)), &(&a + a2.scale(0.5 * dt)));
        let (g4, a4) = bogoliubov_rhs(&h1, &k1, &(&g + g3.scale(dt)), &(&a + a3.scale(dt)));
        g += (g1 + g2.scale(2.0) + g3.scale(2.0) + g4).scale(dt / 6.0);
        a += (a1 + a2.scale(2.0) + a3.scale(2.0) + a4).scale(dt / 6.0);

        let t_next = (step + 1) as f64 * dt;
        if !linalg::all_finite(&g) || !linalg::all_finite(&a) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        let herm = linalg::hermitian_defect(&g);
        let symm = linalg::symmetric_defect(&a);
        if herm.max(symm) > DEFECT_MAX {
            return Err(Error::DefectBlowup { defect: herm.max(symm), t: t_next });
        }
        g = linalg::hermitian_part(&g);
        a = linalg::symmetric_part(&a);
        let s = QuasiFreeState { gamma: g.clone(), alpha: a.clone() };
        monitors.push(Monitor::of(&s, &h1, &k1, herm, symm));
        times.push(t_next);
        states.push(s);
    }
    Ok(Trajectory { times, states, monitors })
}

/// Exact Fock-space propagation with midpoint exponentials.
///
/// Each step of the problem grid is split into `substeps` midpoint steps
/// `psi <- exp(-i H(t + d/2) d) psi`; densities are recorded on the problem
/// grid so the result lines up with [`evolve`].
pub fn oracle_evolve(p: &DynamicsProblem, f: &TruncatedFock, psi0: &CVector, substeps: usize) -> Result<Trajectory> {
    p.validate()?;
    if f.n_modes() != p.n() || psi0.len() != f.dim() {
        return Err(Error::DimensionMismatch(format!(
            "problem has {} modes, space {} modes and dimension {}, state length {}",
            p.n(),
            f.n_modes(),
            f.dim(),
            psi0.len()
        )));
    }
    if f.dim() > ORACLE_DIM_MAX {
        return Err(Error::DimensionOverflow { dim: f.dim(), max: ORACLE_DIM_MAX });
    }
    let norm0 = psi0.norm();
    if (norm0 - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm: norm0 });
    }
    let substeps = substeps.max(1);
    let dt = p.step();
    let d = dt / substeps as f64;
    let constant = p.h.is_constant() && p.k2.is_constant();
    let fixed: Option<SparseMatrix> = if constant {
        Some(fock::assemble_sparse(&p.h_at(0.0)?, &p.k2_at(0.0)?, f, Form::NormalOrdered)?)
    } else {
        None
    };

    let record = |psi: &CVector, t: f64| -> Result<(QuasiFreeState, Monitor)> {
        let s = fock::density_matrices_unchecked(psi, f);
        let m = Monitor::of(&s, &p.h_at(t)?, &p.k2_at(t)?, linalg::hermitian_defect(&s.gamma), linalg::symmetric_defect(&s.alpha));
        Ok((s, m))
    };

    let mut psi = psi0.clone();
    let (s, m) = record(&psi, 0.0)?;
    let mut times = vec![0.0];
    let mut states = vec![s];
    let mut monitors = vec![m];
    for step in 0..p.steps() {
        for sub in 0..substeps {
            let t_mid = step as f64 * dt + (sub as f64 + 0.5) * d;
            let before = psi.norm();
            psi = match &fixed {
                Some(h) => linalg::expm_apply(h, d, &psi),
                None => {
                    let h = fock::assemble_sparse(&p.h_at(t_mid)?, &p.k2_at(t_mid)?, f, Form::NormalOrdered)?;
                    linalg::expm_apply(&h, d, &psi)
                }
            };
            let after = psi.norm();
            if !after.is_finite() {
                return Err(Error::NonFiniteState { t: t_mid });
            }
            if (after - before).abs() > NORM_DRIFT_MAX {
                return Err(Error::NormDrift { drift: after - before, t: t_mid });
            }
        }
        let t = (step + 1) as f64 * dt;
        let (s, m) = record(&psi, t)?;
        times.push(t);
        states.push(s);
        monitors.push(m);
    }
    Ok(Trajectory { times, states, monitors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::diagonalize;
    use crate::linalg::{c64, diag_real, max_abs, real_matrix};
    use crate::model::{random_instance, QuadraticHamiltonian};
    use rand::SeedableRng;

    fn scalar(x: f64) -> CMatrix {
        real_matrix(1, 1, &[x])
    }

    #[test]
    fn ground_state_is_stationary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for n in 1..4 {
            let q = random_instance(&mut rng, n, 0.8);
            let r = diagonalize(&q).unwrap();
            let (dg, da) = bogoliubov_rhs(q.h(), q.k(), &r.ground_state.gamma, &r.ground_state.alpha);
            assert!(max_abs(&dg) < 1e-10 && max_abs(&da) < 1e-10, "{} {}", max_abs(&dg), max_abs(&da));
        }
    }

    #[test]
    fn free_diagonal_evolution_is_static() {
        let p = DynamicsProblem::constant(diag_real(&[1.0, 2.0]), CMatrix::zeros(2, 2), 1.0, 0.01).unwrap();
        let s0 = QuasiFreeState::new(diag_real(&[0.3, 0.1]), CMatrix::zeros(2, 2)).unwrap();
        let traj = evolve(&p, &s0).unwrap();
        assert_eq!(traj.len(), 101);
        for s in &traj.states {
            assert!(s.distance(&s0) < 1e-14);
        }
    }

    #[test]
    fn short_time_series_from_vacuum() {
        let k = real_matrix(2, 2, &[0.2, 0.5, 0.5, -0.1]);
        let t = 1e-3;
        let p = DynamicsProblem::constant(diag_real(&[1.0, 1.3]), k.clone(), t, t / 10.0).unwrap();
        let traj = evolve(&p, &QuasiFreeState::vacuum(2)).unwrap();
        let last = traj.states.last().unwrap();
        let expected = k.scale(t) * c64(0.0, -1.0);
        assert!(max_abs(&(&last.alpha - expected)) < 5.0 * t * t);
        assert!(max_abs(&last.gamma) < 2.0 * t * t);
    }

    #[test]
    fn purity_is_preserved() {
        let p = DynamicsProblem::constant(scalar(1.0), scalar(0.6), 5.0, 1e-3).unwrap();
        let traj = evolve(&p, &QuasiFreeState::vacuum(1)).unwrap();
        let (x, y) = traj.max_purity_defect();
        assert!(x < 1e-8 && y < 1e-8);
    }

    #[test]
    fn gamma_equation_is_linear_without_pairing() {
        let h = real_matrix(2, 2, &[1.0, 0.4, 0.4, 2.0]);
        let p = DynamicsProblem::constant(h, CMatrix::zeros(2, 2), 2.0, 0.01).unwrap();
        let g1 = diag_real(&[0.5, 0.0]);
        let g2 = real_matrix(2, 2, &[0.2, 0.1, 0.1, 0.7]);
        let mix = g1.scale(0.3) + g2.scale(0.7);
        let z = CMatrix::zeros(2, 2);
        let t1 = evolve(&p, &QuasiFreeState::new(g1, z.clone()).unwrap()).unwrap();
        let t2 = evolve(&p, &QuasiFreeState::new(g2, z.clone()).unwrap()).unwrap();
        let tm = evolve(&p, &QuasiFreeState::new(mix, z).unwrap()).unwrap();
        for i in 0..tm.len() {
            let combo = t1.states[i].gamma.scale(0.3) + t2.states[i].gamma.scale(0.7);
            assert!(max_abs(&(combo - &tm.states[i].gamma)) < 1e-13);
        }
    }

    #[test]
    fn energy_is_conserved_for_static_instance() {
        let q = QuadraticHamiltonian::from_real(1, &[1.0], &[0.6]).unwrap();
        let p = DynamicsProblem::constant(q.h().clone(), q.k().clone(), 3.0, 1e-3).unwrap();
        let traj = evolve(&p, &QuasiFreeState::vacuum(1)).unwrap();
        for m in &traj.monitors {
            assert!(m.energy.abs() < 1e-10);
        }
    }

    #[test]
    fn schedules() {
        let s = MatrixSchedule::Sampled { times: vec![0.0, 1.0, 3.0], matrices: vec![scalar(0.0), scalar(1.0), scalar(5.0)] };
        assert!((s.at(0.5).unwrap()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((s.at(2.0).unwrap()[(0, 0)].re - 3.0).abs() < 1e-15);
        assert!((s.at(3.0).unwrap()[(0, 0)].re - 5.0).abs() < 1e-15);
        assert!(s.at(3.5).is_err());
        let sin = MatrixSchedule::Sinusoidal { base: scalar(0.0), amplitude: scalar(0.3), omega: 1.0 };
        assert!((sin.at(1.0).unwrap()[(0, 0)].re - 0.3 * 1f64.sin()).abs() < 1e-15);
        let bad = DynamicsProblem::constant(real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0]), CMatrix::zeros(2, 2), 1.0, 0.1).unwrap();
        assert!(matches!(evolve(&bad, &QuasiFreeState::vacuum(2)), Err(Error::NotHermitian { .. })));
        assert!(DynamicsProblem::constant(scalar(1.0), scalar(0.0), 1.0, 0.0).is_err());
        assert!(DynamicsProblem::constant(scalar(1.0), scalar(0.0), 0.01, 0.1).is_err());
    }

    #[test]
    fn oracle_matches_free_evolution() {
        let h = real_matrix(2, 2, &[1.0, 0.3, 0.3, 1.5]);
        let p = DynamicsProblem::constant(h, CMatrix::zeros(2, 2), 1.0, 0.01).unwrap();
        let f = TruncatedFock::new(2, 4).unwrap();
        let psi = f.basis_vector(f.index_of(&[1, 0]).unwrap());
        let s0 = QuasiFreeState::new(diag_real(&[1.0, 0.0]), CMatrix::zeros(2, 2)).unwrap();
        let oracle = oracle_evolve(&p, &f, &psi, 1).unwrap();
        let rk = evolve(&p, &s0).unwrap();
        let (dg, da) = oracle.max_deviation(&rk);
        assert!(dg < 1e-9 && da < 1e-12, "{dg} {da}");
    }

    #[test]
    fn oracle_matches_quench() {
        let p = DynamicsProblem::constant(scalar(1.0), scalar(0.6), 1.0, 1e-2).unwrap();
        let f = TruncatedFock::new(1, 40).unwrap();
        let oracle = oracle_evolve(&p, &f, &f.vacuum(), 1).unwrap();
        let rk = evolve(&p, &QuasiFreeState::vacuum(1)).unwrap();
        let (dg, da) = oracle.max_deviation(&rk);
        assert!(dg < 1e-8 && da < 1e-8, "{dg} {da}");
    }

    #[test]
    fn oracle_rejects_large_spaces() {
        let p = DynamicsProblem::constant(diag_real(&[1.0, 1.0]), CMatrix::zeros(2, 2), 1.0, 0.5).unwrap();
        let f = TruncatedFock::new(2, 70).unwrap();
        assert!(matches!(oracle_evolve(&p, &f, &f.vacuum(), 1), Err(Error::DimensionOverflow { .. })));
    }
}
