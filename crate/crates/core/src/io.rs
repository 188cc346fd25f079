//! JSON file formats.
//!
//! Matrices are `{"rows": r, "cols": c, "data": [[re, im], ...]}` in row-major
//! order. Floats are written in shortest round-trip form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diag::{BogoliubovTransform, DiagonalizationResult, QuasiFreeState, TransformReport};
use crate::dynamics::{DynamicsProblem, MatrixSchedule, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::model::{self, ConditionReport, QuadraticHamiltonian};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::DimensionMismatch("matrix must have at least one row and column".into()));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix declares {}x{} but has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().any(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(Error::NonFinite { what: "matrix entry" });
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            c64(re, im)
        }))
    }
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let data = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|(i, j)| [m[(i, j)].re, m[(i, j)].im]).collect();
        Self { rows, cols, data }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub h: MatrixJson,
    pub k: MatrixJson,
}

impl HamiltonianFile {
    pub fn to_hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        let h = self.h.to_matrix()?;
        let k = self.k.to_matrix()?;
        let tol = model::default_sym_tol(&h, &k);
        model::validate_hamiltonian(&h, &k, tol)
    }
}

impl From<&QuadraticHamiltonian> for HamiltonianFile {
    fn from(q: &QuadraticHamiltonian) -> Self {
        Self { h: q.h().into(), k: q.k().into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct TransformFile {
    pub U: MatrixJson,
    pub V: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_G: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hs_G: Option<f64>,
}

impl TransformFile {
    pub fn to_transform(&self) -> Result<BogoliubovTransform> {
        BogoliubovTransform::from_blocks(self.U.to_matrix()?, self.V.to_matrix()?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub gamma: MatrixJson,
    pub alpha: MatrixJson,
}

impl StateJson {
    pub fn to_state(&self) -> Result<QuasiFreeState> {
        QuasiFreeState::unchecked(self.gamma.to_matrix()?, self.alpha.to_matrix()?)
    }
}

impl From<&QuasiFreeState> for StateJson {
    fn from(s: &QuasiFreeState) -> Self {
        Self { gamma: (&s.gamma).into(), alpha: (&s.alpha).into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScheduleJson {
    Constant { matrix: MatrixJson },
    Sinusoidal { base: MatrixJson, amplitude: MatrixJson, omega: f64 },
    Sampled { times: Vec<f64>, matrices: Vec<MatrixJson> },
}

impl ScheduleJson {
    pub fn to_schedule(&self) -> Result<MatrixSchedule> {
        Ok(match self {
            Self::Constant { matrix } => MatrixSchedule::Constant(matrix.to_matrix()?),
            Self::Sinusoidal { base, amplitude, omega } => {
                MatrixSchedule::Sinusoidal { base: base.to_matrix()?, amplitude: amplitude.to_matrix()?, omega: *omega }
            }
            Self::Sampled { times, matrices } => MatrixSchedule::Sampled {
                times: times.clone(),
                matrices: matrices.iter().map(MatrixJson::to_matrix).collect::<Result<_>>()?,
            },
        })
    }
}

/// Dynamics input: schedules for `h` and `K2`, horizon, step and an optional
/// initial state (vacuum when absent).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub h: ScheduleJson,
    pub k2: ScheduleJson,
    pub horizon: f64,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<StateJson>,
}

impl ProblemFile {
    pub fn to_problem(&self, horizon: Option<f64>, dt: Option<f64>) -> Result<DynamicsProblem> {
        DynamicsProblem::new(
            self.h.to_schedule()?,
            self.k2.to_schedule()?,
            horizon.unwrap_or(self.horizon),
            dt.unwrap_or(self.dt),
        )
    }

    pub fn initial_state(&self, n: usize) -> Result<QuasiFreeState> {
        match &self.initial {
            Some(s) => {
                let s = s.to_state()?;
                if s.n() != n {
                    return Err(Error::DimensionMismatch(format!("initial state has {} modes, problem {n}", s.n())));
                }
                Ok(s)
            }
            None => Ok(QuasiFreeState::vacuum(n)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub times: Vec<f64>,
    pub states: Vec<StateJson>,
}

impl TrajectoryFile {
    /// States only; monitors are not stored on disk.
    pub fn to_trajectory(&self) -> Result<Trajectory> {
        if self.times.len() != self.states.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} states",
                self.times.len(),
                self.states.len()
            )));
        }
        if !self.times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("trajectory times must be strictly increasing".into()));
        }
        let states = self.states.iter().map(StateJson::to_state).collect::<Result<Vec<_>>>()?;
        Ok(Trajectory { times: self.times.clone(), states, monitors: Vec::new() })
    }
}

impl From<&Trajectory> for TrajectoryFile {
    fn from(t: &Trajectory) -> Self {
        Self { times: t.times.clone(), states: t.states.iter().map(StateJson::from).collect() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub offdiag: f64,
    pub transform: TransformReport,
    pub purity: f64,
}

#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct DiagonalizationJson {
    pub U: MatrixJson,
    pub V: MatrixJson,
    pub xi: MatrixJson,
    pub xi_eigs: Vec<f64>,
    pub ground_energy: f64,
    pub gamma: MatrixJson,
    pub alpha: MatrixJson,
    pub condition: ConditionReport,
    pub residuals: Residuals,
}

impl DiagonalizationJson {
    pub fn new(r: &DiagonalizationResult, condition: ConditionReport) -> Self {
        let transform = crate::diag::verify_transform(&r.transform, condition.norm_g, condition.hs_g);
        Self {
            U: r.transform.u().into(),
            V: r.transform.v().into(),
            xi: (&r.xi).into(),
            xi_eigs: r.xi_eigs.clone(),
            ground_energy: r.ground_energy,
            gamma: (&r.ground_state.gamma).into(),
            alpha: (&r.ground_state.alpha).into(),
            condition,
            residuals: Residuals { offdiag: r.offdiag_residual, transform, purity: r.ground_state.purity_defect() },
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
