//! Command-line front end.
//!
//! Exit status: 0 success, 1 an invariant check failed, 2 rejected input,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::commutative::{self, CommutativeInstance, CompareReport};
use crate::diag::{self, verify_transform};
use crate::dynamics;
use crate::error::{Error, Result};
use crate::fock::{self, Form, TruncatedFock};
use crate::io::{self, DiagonalizationJson, HamiltonianFile, MatrixJson, ProblemFile, TrajectoryFile, TransformFile};
use crate::linalg::{self, CMatrix};
use crate::model::{self, QuadraticHamiltonian};
use crate::tddiag;
use crate::tolerance;

pub const THREADS_ENV: &str = "BOGODIAG_THREADS";

#[derive(Debug, Clone, Parser)]
#[command(name = "bogodiag", version, about = "Diagonalize and evolve bosonic quadratic Hamiltonians")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Symplectic diagonalization of a Hamiltonian file, as JSON.
    Diagonalize,
    /// Fock-space spectrum against the quasiparticle prediction, as CSV.
    Spectrum,
    /// Integrate the density-matrix equations of a problem file, as CSV.
    Evolve,
    /// Brute-force Fock-space checks of a Hamiltonian file, as JSON.
    Oracle,
    /// Run all invariant checks on a Hamiltonian or transform file.
    Verify,
    /// Compare the diagonalizer with the diagonal closed form.
    Example,
    /// Evaluate the two-sided bound by the one-body operator on random instances.
    Probe,
    /// Block-commutator residual of a trajectory, as CSV.
    Tddiag,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Input file (Hamiltonian, transform, problem or diagonal instance).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Total-number cutoff of the Fock space.
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    /// Time step, overriding the problem file.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Time horizon, overriding the problem file.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Number of levels or random instances.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Seed for randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tolerance for invariant checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Trajectory JSON for `tddiag`; computed from the problem when absent.
    #[arg(long, global = true)]
    pub trajectory: Option<PathBuf>,
    /// Also write the per-sample density matrices of `evolve` as JSON.
    #[arg(long, global = true)]
    pub dump_states: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: i32,
    pub output: String,
}

impl RunOutcome {
    fn ok(output: String) -> Self {
        Self { status: 0, output }
    }

    fn checked(output: String, passed: bool) -> Self {
        Self { status: if passed { 0 } else { 1 }, output }
    }
}

/// Parse arguments, run, write output; returns the process exit status.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&config).and_then(|out| emit(&config.options, &out).map(|()| out.status)) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(opts: &Options, out: &RunOutcome) -> Result<()> {
    match &opts.output {
        Some(path) => std::fs::write(path, &out.output)?,
        None => print!("{}", out.output),
    }
    Ok(())
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let o = &config.options;
    match config.command {
        Command::Diagonalize => run_diagonalize(o),
        Command::Spectrum => run_spectrum(o),
        Command::Evolve => run_evolve(o),
        Command::Oracle => run_oracle(o),
        Command::Verify => run_verify(o),
        Command::Example => run_example(o),
        Command::Probe => run_probe(o),
        Command::Tddiag => run_tddiag(o),
    }
}

fn input(o: &Options) -> Result<&Path> {
    o.input.as_deref().ok_or_else(|| Error::InvalidParameter("--input is required".into()))
}

fn seed(o: &Options) -> Result<u64> {
    o.seed.ok_or_else(|| Error::InvalidParameter("--seed is required for randomized runs".into()))
}

fn load_hamiltonian(o: &Options) -> Result<QuadraticHamiltonian> {
    io::read_json::<HamiltonianFile>(input(o)?)?.to_hamiltonian()
}

fn cutoff(o: &Options, default: usize) -> usize {
    o.cutoff.unwrap_or(default)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_diagonalize(o: &Options) -> Result<RunOutcome> {
    let q = load_hamiltonian(o)?;
    let condition = model::classify(&q)?;
    let r = diag::diagonalize(&q)?;
    Ok(RunOutcome::ok(io::to_json(&DiagonalizationJson::new(&r, condition))?))
}

fn run_spectrum(o: &Options) -> Result<RunOutcome> {
    let q = load_hamiltonian(o)?;
    let count = o.count.unwrap_or(3);
    let f = TruncatedFock::new(q.n(), cutoff(o, 20))?;
    let r = diag::diagonalize(&q)?;
    let exact = fock::exact_spectrum(&fock::assemble(&q, &f, Form::NormalOrdered)?, count);
    let predicted = fock::predicted_levels(r.ground_energy, &r.xi_eigs, count);
    let mut out = String::from("level,energy,predicted,abs_error\n");
    for (i, (e, p)) in exact.iter().zip(&predicted).enumerate() {
        let _ = writeln!(out, "{i},{},{},{}", fmt(*e), fmt(*p), fmt((e - p).abs()));
    }
    Ok(RunOutcome::ok(out))
}

fn run_evolve(o: &Options) -> Result<RunOutcome> {
    let file: ProblemFile = io::read_json(input(o)?)?;
    let p = file.to_problem(o.horizon, o.dt)?;
    let s0 = file.initial_state(p.n())?;
    let traj = dynamics::evolve(&p, &s0)?;
    if let Some(path) = &o.dump_states {
        std::fs::write(path, io::to_json(&TrajectoryFile::from(&traj))?)?;
    }
    let mut out = String::from("t,norm_X,norm_Y,herm_defect,symm_defect,tr_gamma,energy\n");
    for (t, m) in traj.times.iter().zip(&traj.monitors) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt(*t),
            fmt(m.norm_x),
            fmt(m.norm_y),
            fmt(m.herm_defect),
            fmt(m.symm_defect),
            fmt(m.tr_gamma),
            fmt(m.energy)
        );
    }
    Ok(RunOutcome::ok(out))
}

#[derive(Serialize)]
struct OracleReport {
    n_modes: usize,
    cutoff: usize,
    dim: usize,
    weyl_identity_defect: f64,
    ccr_interior_defect: f64,
    levels: Vec<f64>,
    predicted: Vec<f64>,
    gamma: MatrixJson,
    alpha: MatrixJson,
    density_deviation: f64,
    purity_defect: f64,
    wick: fock::WickReport,
}

fn run_oracle(o: &Options) -> Result<RunOutcome> {
    let q = load_hamiltonian(o)?;
    let f = TruncatedFock::new(q.n(), cutoff(o, 20))?;
    let normal = fock::assemble(&q, &f, Form::NormalOrdered)?;
    let weyl = fock::assemble(&q, &f, Form::Weyl)?;
    let shift = linalg::identity(f.dim()).scale(0.5 * linalg::trace(q.h()).re);
    let weyl_identity_defect = linalg::max_abs(&(&weyl.matrix - &normal.matrix - shift));
    let r = diag::diagonalize(&q)?;
    let count = o.count.unwrap_or(3);
    let levels = fock::exact_spectrum(&normal, count);
    let predicted = fock::predicted_levels(r.ground_energy, &r.xi_eigs, count);
    let (_, psi) = fock::ground_state(&normal);
    let state = fock::state_density_matrices(&psi, &f)?;
    let wick = fock::wick_check(&psi, &f, 4)?;
    let report = OracleReport {
        n_modes: q.n(),
        cutoff: f.n_max(),
        dim: f.dim(),
        weyl_identity_defect,
        ccr_interior_defect: f.ccr_interior_defect(),
        levels,
        predicted,
        gamma: (&state.gamma).into(),
        alpha: (&state.alpha).into(),
        density_deviation: state.distance(&r.ground_state),
        purity_defect: state.purity_defect(),
        wick,
    };
    Ok(RunOutcome::ok(io::to_json(&report)?))
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    passed: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, limit, passed: value <= limit }
    }

    fn at_least(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, limit, passed: value >= limit }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    kind: &'static str,
    passed: bool,
    checks: Vec<Check>,
}

fn transform_checks(t: &diag::BogoliubovTransform, norms: Option<(f64, f64)>, tol: f64) -> Vec<Check> {
    let rep = verify_transform(t, norms.map_or(0.0, |n| n.0), norms.map_or(0.0, |n| n.1));
    let scale = t.norm().powi(2).max(1.0);
    let mut checks = vec![
        Check::at_most("symplectic V^dagger S V = S", rep.symplectic_left, tol * scale),
        Check::at_most("symplectic V S V^dagger = S", rep.symplectic_right, tol * scale),
        Check::at_most("U^dagger U = I + V^dagger V", rep.relation_uu, tol * scale),
        Check::at_most("U U^dagger = I + conj(V) V^T", rep.relation_uu_adj, tol * scale),
        Check::at_most("U^T V symmetric", rep.relation_sym, tol * scale),
    ];
    if norms.is_some() {
        checks.push(Check::at_least("operator norm bound slack", rep.norm_bound_slack, -tolerance::NUM));
        checks.push(Check::at_least("Hilbert-Schmidt bound slack", rep.hs_bound_slack, -tolerance::NUM));
    }
    checks
}

fn run_verify(o: &Options) -> Result<RunOutcome> {
    let value: Value = io::read_json(input(o)?)?;
    let tol = o.tol.unwrap_or(tolerance::SYMP);
    let report = if value.get("U").is_some() {
        let file: TransformFile = serde_json::from_value(value)?;
        let t = file.to_transform()?;
        let norms = match (file.norm_G, file.hs_G) {
            (Some(a), Some(b)) => Some((a, b)),
            (Some(a), None) => Some((a, f64::INFINITY)),
            _ => None,
        };
        let checks = transform_checks(&t, norms, tol);
        VerifyReport { kind: "transform", passed: checks.iter().all(|c| c.passed), checks }
    } else {
        let file: HamiltonianFile = serde_json::from_value(value)?;
        let q = file.to_hamiltonian()?;
        let c = model::classify(&q)?;
        let a = model::build_block_operator(&q)?;
        let r = diag::diagonalize(&q)?;
        let mut checks = vec![
            Check::at_least("block operator positive", a.min_eigenvalue(), 0.0),
            Check::at_most("off-diagonal block of V M V^dagger", r.offdiag_residual, tol * linalg::frobenius(a.matrix())),
            Check::at_least("ground energy above lower bound", r.ground_energy - c.lower_bound, -tolerance::NUM),
            Check::at_most("ground state purity", r.ground_state.purity_defect(), tol),
            Check::at_least("smallest quasiparticle energy", r.xi_eigs[0], 0.0),
        ];
        checks.extend(transform_checks(&r.transform, Some((c.norm_g, c.hs_g)), tol));
        VerifyReport { kind: "hamiltonian", passed: checks.iter().all(|c| c.passed), checks }
    };
    let passed = report.passed;
    Ok(RunOutcome::checked(io::to_json(&report)?, passed))
}

#[derive(Serialize)]
struct ExampleSingle {
    xi_closed_form: Vec<f64>,
    xi_diagonalizer: Vec<f64>,
    ground_energy: f64,
    energy_bracket: (f64, f64),
    norm_v: f64,
    hs_v: f64,
    comparison: CompareReport,
}

#[derive(Serialize)]
struct ExampleBatch {
    seed: u64,
    instances: usize,
    max_deviation: f64,
    failures: usize,
    reports: Vec<CompareReport>,
}

fn run_example(o: &Options) -> Result<RunOutcome> {
    if let Some(path) = &o.input {
        let c: CommutativeInstance = io::read_json(path)?;
        let closed = commutative::closed_form_diagonalize(&c)?;
        let generic = diag::diagonalize(&c.to_hamiltonian()?)?;
        let comparison = commutative::oracle_compare(&c)?;
        let passed = comparison.passed();
        let report = ExampleSingle {
            xi_closed_form: closed.xi_diag.clone(),
            xi_diagonalizer: generic.xi_eigs,
            ground_energy: closed.ground_energy,
            energy_bracket: c.energy_bracket(),
            norm_v: closed.norm_v,
            hs_v: closed.hs_v,
            comparison,
        };
        return Ok(RunOutcome::checked(io::to_json(&report)?, passed));
    }
    let seed = seed(o)?;
    let count = o.count.unwrap_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<CommutativeInstance> = (0..count)
        .map(|_| {
            let n = rand::Rng::random_range(&mut rng, 1..=8);
            let (h, k) = model::random_diagonal_instance(&mut rng, n, 0.9);
            CommutativeInstance { h_diag: h, k_diag: k }
        })
        .collect();
    let pool = thread_pool()?;
    let reports: Vec<CompareReport> =
        pool.install(|| instances.par_iter().map(commutative::oracle_compare).collect::<Result<_>>())?;
    let failures = reports.iter().filter(|r| !r.passed()).count();
    let batch = ExampleBatch {
        seed,
        instances: count,
        max_deviation: reports.iter().map(|r| r.deviation).fold(0.0, f64::max),
        failures,
        reports,
    };
    Ok(RunOutcome::checked(io::to_json(&batch)?, failures == 0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub n: usize,
    pub delta: f64,
    /// Smallest eigenvalue of `(1+s) dG(h) + s/2 T - H`.
    pub upper: f64,
    /// Smallest eigenvalue of `H - (1+s) dG(h) + s/2 T`.
    pub lower_printed: f64,
    /// Smallest eigenvalue of `H - (1-s) dG(h) + s/2 T`.
    pub lower_variant: f64,
}

#[derive(Serialize)]
struct ProbeReport {
    seed: u64,
    cutoff: usize,
    upper_holds: usize,
    lower_printed_holds: usize,
    lower_variant_holds: usize,
    rows: Vec<ProbeRow>,
}

/// Compressions of the two-sided bound to a truncated Fock space, with
/// `s = sqrt(delta)`, `delta = ||G||^2` and `T = ||k conj(h)^{-1/2}||_HS^2`.
pub fn probe_instance(q: &QuadraticHamiltonian, cutoff: usize) -> Result<ProbeRow> {
    let c = model::classify(q)?;
    let f = TruncatedFock::new(q.n(), cutoff)?;
    let h_op = fock::assemble(q, &f, Form::NormalOrdered)?.matrix;
    let d_op = fock::assemble_matrices(q.h(), &CMatrix::zeros(q.n(), q.n()), &f, Form::NormalOrdered)?.matrix;
    let delta = c.norm_g * c.norm_g;
    let s = delta.sqrt();
    let shift = linalg::identity(f.dim()).scale(0.5 * s * c.hs_kh_half * c.hs_kh_half);
    let min_eig = |m: CMatrix| linalg::hermitian_eigen(&m).0[0];
    Ok(ProbeRow {
        n: q.n(),
        delta,
        upper: min_eig(d_op.scale(1.0 + s) + &shift - &h_op),
        lower_printed: min_eig(&h_op - d_op.scale(1.0 + s) + &shift),
        lower_variant: min_eig(&h_op - d_op.scale(1.0 - s) + &shift),
    })
}

fn run_probe(o: &Options) -> Result<RunOutcome> {
    let seed = seed(o)?;
    let count = o.count.unwrap_or(20);
    let cut = cutoff(o, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<QuadraticHamiltonian> = (0..count)
        .map(|_| {
            let n = rand::Rng::random_range(&mut rng, 1..=2);
            model::random_instance(&mut rng, n, 0.95)
        })
        .collect();
    let pool = thread_pool()?;
    let rows: Vec<ProbeRow> = pool.install(|| instances.par_iter().map(|q| probe_instance(q, cut)).collect::<Result<_>>())?;
    let holds = |f: fn(&ProbeRow) -> f64| rows.iter().filter(|r| f(r) >= -tolerance::NUM).count();
    let report = ProbeReport {
        seed,
        cutoff: cut,
        upper_holds: holds(|r| r.upper),
        lower_printed_holds: holds(|r| r.lower_printed),
        lower_variant_holds: holds(|r| r.lower_variant),
        rows,
    };
    Ok(RunOutcome::ok(io::to_json(&report)?))
}

fn run_tddiag(o: &Options) -> Result<RunOutcome> {
    let file: ProblemFile = io::read_json(input(o)?)?;
    let p = file.to_problem(o.horizon, o.dt)?;
    let traj = match &o.trajectory {
        Some(path) => io::read_json::<TrajectoryFile>(path)?.to_trajectory()?,
        None => dynamics::evolve(&p, &file.initial_state(p.n())?)?,
    };
    let res = tddiag::tddiag_residual(&traj, &p)?;
    let mut out = String::from("t,residual_gamma,residual_alpha\n");
    for r in &res {
        let _ = writeln!(out, "{},{},{}", fmt(r.t), fmt(r.gamma), fmt(r.alpha));
    }
    Ok(RunOutcome::ok(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("bogodiag").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn parses_global_flags_after_subcommand() {
        let c = config(&["spectrum", "--input", "x.json", "--cutoff", "40", "--count", "3"]);
        assert_eq!(c.command, Command::Spectrum);
        assert_eq!(c.options.cutoff, Some(40));
        assert_eq!(c.options.input.as_deref(), Some(Path::new("x.json")));
    }

    #[test]
    fn missing_input_is_bad_input() {
        let err = run(&config(&["diagonalize"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn randomized_commands_need_seed() {
        let err = run(&config(&["probe"])).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
        let err = run(&config(&["example"])).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn probe_is_deterministic() {
        let a = run(&config(&["probe", "--seed", "5", "--count", "4", "--cutoff", "8"])).unwrap();
        let b = run(&config(&["probe", "--seed", "5", "--count", "4", "--cutoff", "8"])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn probe_sides_related_by_pairing_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..3 {
            let q = model::random_instance(&mut rng, 2, 0.9);
            let row = probe_instance(&q, 8).unwrap();
            assert!((row.upper - row.lower_variant).abs() < 1e-9, "{row:?}");
            assert!(row.lower_printed < row.lower_variant);
        }
    }

    #[test]
    fn probe_at_zero_pairing_is_exact() {
        let q = QuadraticHamiltonian::from_real(1, &[1.0], &[0.0]).unwrap();
        let row = probe_instance(&q, 6).unwrap();
        assert_eq!(row.delta, 0.0);
        assert!(row.upper.abs() < 1e-12 && row.lower_printed.abs() < 1e-12);
    }

    #[test]
    fn example_batch_passes() {
        let out = run(&config(&["example", "--seed", "1", "--count", "10"])).unwrap();
        assert_eq!(out.status, 0);
    }
}
