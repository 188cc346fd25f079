//! Closed forms for diagonal real `h` and `k`, where every mode decouples
//! into a scalar problem with `G_i = k_i / h_i`.

use serde::Serialize;

use crate::diag::{self, QuasiFreeState};
use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix};
use crate::model::QuadraticHamiltonian;

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CommutativeInstance {
    pub h_diag: Vec<f64>,
    pub k_diag: Vec<f64>,
}

impl CommutativeInstance {
    pub fn new(h_diag: Vec<f64>, k_diag: Vec<f64>) -> Result<Self> {
        let c = Self { h_diag, k_diag };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_diag.is_empty() || self.h_diag.len() != self.k_diag.len() {
            return Err(Error::DimensionMismatch(format!(
                "h_diag has {} entries, k_diag {}",
                self.h_diag.len(),
                self.k_diag.len()
            )));
        }
        for (mode, (&h, &k)) in self.h_diag.iter().zip(&self.k_diag).enumerate() {
            if !h.is_finite() || !k.is_finite() {
                return Err(Error::NonFinite { what: "commutative instance" });
            }
            if h <= 0.0 {
                return Err(Error::NotPositiveDefinite { min_eigenvalue: h });
            }
            if k.abs() >= h {
                return Err(Error::OutOfRegime { mode, ratio: k.abs() / h });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.h_diag.len()
    }

    pub fn norm_g(&self) -> f64 {
        self.h_diag.iter().zip(&self.k_diag).map(|(h, k)| k.abs() / h).fold(0.0, f64::max)
    }

    pub fn to_hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        QuadraticHamiltonian::new(linalg::diag_real(&self.h_diag), linalg::diag_real(&self.k_diag))
    }

    /// `(-1/2 sum k^2/h, -1/4 sum k^2/h)`, which brackets the ground energy.
    pub fn energy_bracket(&self) -> (f64, f64) {
        let s: f64 = self.h_diag.iter().zip(&self.k_diag).map(|(h, k)| k * k / h).sum();
        (-0.5 * s, -0.25 * s)
    }
}

#[derive(Debug, Clone)]
pub struct ClosedForm {
    /// Full `2n x 2n` transform.
    pub v_full: CMatrix,
    pub xi_diag: Vec<f64>,
    pub norm_v: f64,
    pub scale: Vec<f64>,
    pub off: Vec<f64>,
    pub ground_energy: f64,
    pub ground_state: QuasiFreeState,
    pub hs_v: f64,
}

/// Per mode: `s = sqrt(1/2 + 1/(2 sqrt(1-G^2)))`, `o = -G/(1 + sqrt(1-G^2))`,
/// and the mode block of `V` is `s [[1, o], [o, 1]]`.
pub fn closed_form_diagonalize(c: &CommutativeInstance) -> Result<ClosedForm> {
    c.validate()?;
    let n = c.n();
    let mut scale = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n);
    let mut xi_diag = Vec::with_capacity(n);
    for (&h, &k) in c.h_diag.iter().zip(&c.k_diag) {
        let g = k / h;
        let root = (1.0 - g * g).sqrt();
        scale.push((0.5 + 0.5 / root).sqrt());
        off.push(-g / (1.0 + root));
        xi_diag.push(((h - k) * (h + k)).sqrt());
    }
    let mut v_full = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        v_full[(i, i)] = c64(scale[i], 0.0);
        v_full[(i + n, i + n)] = c64(scale[i], 0.0);
        v_full[(i, i + n)] = c64(scale[i] * off[i], 0.0);
        v_full[(i + n, i)] = c64(scale[i] * off[i], 0.0);
    }
    let norm_v = scale.iter().zip(&off).map(|(s, o)| s * (1.0 + o.abs())).fold(0.0, f64::max);
    let gamma: Vec<f64> = scale.iter().zip(&off).map(|(s, o)| (s * o).powi(2)).collect();
    let alpha: Vec<f64> = scale.iter().zip(&off).map(|(s, o)| s * s * o).collect();
    let hs_v = gamma.iter().sum::<f64>().sqrt();
    let ground_energy = 0.5 * xi_diag.iter().zip(&c.h_diag).map(|(x, h)| x - h).sum::<f64>();
    let ground_state = QuasiFreeState { gamma: linalg::diag_real(&gamma), alpha: linalg::diag_real(&alpha) };
    Ok(ClosedForm { v_full, xi_diag, norm_v, scale, off, ground_energy, ground_state, hs_v })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareReport {
    pub xi: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub energy: f64,
    pub norm_v: f64,
    pub hs_v: f64,
    pub deviation: f64,
    pub allowed: f64,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.deviation <= self.allowed
    }
}

/// Tolerance for [`oracle_compare`]: `1e-10` up to `||G|| = 0.9`, then
/// growing like `1e-11 / (1 - ||G||)`.
pub fn allowed_deviation(norm_g: f64) -> f64 {
    if norm_g <= 0.9 {
        1e-10
    } else {
        1e-11 / (1.0 - norm_g)
    }
}

/// Compare the generic diagonalizer with the closed form on gauge-invariant data.
pub fn oracle_compare(c: &CommutativeInstance) -> Result<CompareReport> {
    let closed = closed_form_diagonalize(c)?;
    let generic = diag::diagonalize(&c.to_hamiltonian()?)?;
    let mut xi_sorted = closed.xi_diag.clone();
    xi_sorted.sort_by(f64::total_cmp);
    let xi = xi_sorted.iter().zip(&generic.xi_eigs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let gamma = linalg::max_abs(&(&generic.ground_state.gamma - &closed.ground_state.gamma));
    let alpha = linalg::max_abs(&(&generic.ground_state.alpha - &closed.ground_state.alpha));
    let energy = (generic.ground_energy - closed.ground_energy).abs();
    let norm_v = (generic.transform.norm() - closed.norm_v).abs();
    let hs_v = (generic.transform.hs_v() - closed.hs_v).abs();
    let deviation = [xi, gamma, alpha, energy, norm_v, hs_v].into_iter().fold(0.0, f64::max);
    Ok(CompareReport { xi, gamma, alpha, energy, norm_v, hs_v, deviation, allowed: allowed_deviation(c.norm_g()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::{verify_transform, BogoliubovTransform};
    use crate::linalg::block;
    use crate::model::random_diagonal_instance;
    use rand::SeedableRng;

    #[test]
    fn scalar_closed_form() {
        let c = CommutativeInstance::new(vec![1.0], vec![0.6]).unwrap();
        let f = closed_form_diagonalize(&c).unwrap();
        assert!((f.scale[0] - 1.125f64.sqrt()).abs() < 1e-15);
        assert!((f.off[0] + 1.0 / 3.0).abs() < 1e-15);
        assert!((f.xi_diag[0] - 0.8).abs() < 1e-15);
        assert!((f.norm_v - 2f64.sqrt()).abs() < 1e-15);
        assert!((f.ground_energy + 0.1).abs() < 1e-15);
        assert!((f.ground_state.gamma[(0, 0)].re - 0.125).abs() < 1e-15);
        assert!((f.ground_state.alpha[(0, 0)].re + 0.375).abs() < 1e-15);
    }

    #[test]
    fn zero_pairing_is_identity() {
        let c = CommutativeInstance::new(vec![1.0, 3.0], vec![0.0, 0.0]).unwrap();
        let f = closed_form_diagonalize(&c).unwrap();
        assert_eq!(f.v_full, linalg::identity(4));
        assert_eq!(f.xi_diag, vec![1.0, 3.0]);
        let r = oracle_compare(&c).unwrap();
        assert_eq!(r.xi, 0.0);
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn mixed_modes() {
        let c = CommutativeInstance::new(vec![1.0, 2.0], vec![0.6, 0.0]).unwrap();
        let f = closed_form_diagonalize(&c).unwrap();
        assert!((f.hs_v - 0.125f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_regime() {
        assert!(matches!(CommutativeInstance::new(vec![1.0], vec![1.0]), Err(Error::OutOfRegime { mode: 0, .. })));
        assert!(matches!(CommutativeInstance::new(vec![1.0, 2.0], vec![0.1, -2.5]), Err(Error::OutOfRegime { mode: 1, .. })));
        assert!(CommutativeInstance::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn closed_form_is_symplectic() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let (h, k) = random_diagonal_instance(&mut rng, 5, 0.9);
            let c = CommutativeInstance::new(h, k).unwrap();
            let f = closed_form_diagonalize(&c).unwrap();
            let t = BogoliubovTransform::from_blocks(block(&f.v_full, 0, 0), block(&f.v_full, 1, 0)).unwrap();
            assert_eq!(t.full(), &f.v_full);
            let rep = verify_transform(&t, c.norm_g(), 0.0);
            assert!(rep.max_residual < 1e-12);
            assert!((rep.norm - f.norm_v).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_comparison_is_tight() {
        let r = oracle_compare(&CommutativeInstance::new(vec![1.0], vec![0.6]).unwrap()).unwrap();
        assert!(r.deviation < 1e-12, "{r:?}");
    }

    #[test]
    fn random_comparisons() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = 1 + (rand::Rng::random::<u32>(&mut rng) % 6) as usize;
            let (h, k) = random_diagonal_instance(&mut rng, n, 0.9);
            let c = CommutativeInstance::new(h, k).unwrap();
            let r = oracle_compare(&c).unwrap();
            assert!(r.passed(), "{r:?}");
            let (lo, hi) = c.energy_bracket();
            let e = closed_form_diagonalize(&c).unwrap().ground_energy;
            assert!(lo <= e + 1e-14 && e <= hi + 1e-14);
        }
    }
}
