use std::ffi::CStr;
use std::ptr;

use bogodiag_ffi::*;

fn scalar(h: f64, k: f64) -> (BogoStatus, *mut BogoHamiltonian) {
    let mut out = ptr::null_mut();
    let s = unsafe { bogo_hamiltonian_new(1, &h, ptr::null(), &k, ptr::null(), &mut out) };
    (s, out)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bogo_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_round_trip() {
    let (s, h) = scalar(1.0, 0.6);
    assert_eq!(s, BogoStatus::Ok);
    unsafe {
        assert_eq!(bogo_hamiltonian_modes(h), 1);
        let mut cond = BogoCondition::default();
        assert_eq!(bogo_hamiltonian_classify(h, &mut cond), BogoStatus::Ok);
        assert!((cond.norm_g - 0.6).abs() < 1e-14 && cond.diagonalizable);
        assert!((cond.lower_bound + 0.18).abs() < 1e-12);

        let mut d = ptr::null_mut();
        assert_eq!(bogo_diagonalize(h, &mut d), BogoStatus::Ok);
        let mut e0 = 0.0;
        assert_eq!(bogo_diagonalization_ground_energy(d, &mut e0), BogoStatus::Ok);
        assert!((e0 + 0.1).abs() < 1e-12);
        let mut xi = [0.0];
        assert_eq!(bogo_diagonalization_xi_eigs(d, xi.as_mut_ptr(), 1), BogoStatus::Ok);
        assert!((xi[0] - 0.8).abs() < 1e-12);
        let (mut re, mut im) = ([0.0], [0.0]);
        assert_eq!(bogo_diagonalization_matrix(d, BogoMatrix::Gamma, re.as_mut_ptr(), im.as_mut_ptr(), 1), BogoStatus::Ok);
        assert!((re[0] - 0.125).abs() < 1e-12 && im[0].abs() < 1e-15);
        assert_eq!(bogo_diagonalization_matrix(d, BogoMatrix::Alpha, re.as_mut_ptr(), ptr::null_mut(), 1), BogoStatus::Ok);
        assert!((re[0] + 0.375).abs() < 1e-12);

        let mut levels = [0.0; 3];
        assert_eq!(bogo_fock_spectrum(h, 40, 3, levels.as_mut_ptr()), BogoStatus::Ok);
        for (i, l) in levels.iter().enumerate() {
            assert!((l - (-0.1 + 0.8 * i as f64)).abs() < 1e-8);
        }
        bogo_diagonalization_free(d);
        bogo_hamiltonian_free(h);
    }
}

#[test]
fn pair_preset() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(bogo_hamiltonian_pair(1.0, 1.0, 0.5, &mut h), BogoStatus::Ok);
        assert_eq!(bogo_hamiltonian_modes(h), 2);
        let mut d = ptr::null_mut();
        assert_eq!(bogo_diagonalize(h, &mut d), BogoStatus::Ok);
        let mut u = [0.0; 4];
        assert_eq!(bogo_diagonalization_matrix(d, BogoMatrix::U, u.as_mut_ptr(), ptr::null_mut(), 3), BogoStatus::BufferTooSmall);
        assert_eq!(bogo_diagonalization_matrix(d, BogoMatrix::U, u.as_mut_ptr(), ptr::null_mut(), 4), BogoStatus::Ok);
        let mut xi = [0.0; 2];
        assert_eq!(bogo_diagonalization_xi_eigs(d, xi.as_mut_ptr(), 2), BogoStatus::Ok);
        assert!((xi[0] - 2f64.sqrt()).abs() < 1e-12 && (xi[1] - 2f64.sqrt()).abs() < 1e-12);
        bogo_diagonalization_free(d);
        bogo_hamiltonian_free(h);
        assert_eq!(bogo_hamiltonian_pair(0.0, 1.0, 0.5, &mut h), BogoStatus::InvalidInput);
    }
}

#[test]
fn error_statuses() {
    let (s, h) = scalar(1.0, 1.2);
    assert_eq!(s, BogoStatus::Ok);
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(bogo_diagonalize(h, &mut d), BogoStatus::NotDiagonalizable);
        assert!(d.is_null());
        assert!(!last_error().is_empty());
        bogo_hamiltonian_free(h);
    }
    let (s, h) = scalar(-1.0, 0.0);
    assert_eq!(s, BogoStatus::NotPositiveDefinite);
    assert!(h.is_null());
    let (s, _) = scalar(f64::NAN, 0.0);
    assert_eq!(s, BogoStatus::InvalidInput);
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(bogo_diagonalize(ptr::null(), &mut d), BogoStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut out = ptr::null_mut();
        assert_eq!(bogo_hamiltonian_new(0, ptr::null(), ptr::null(), ptr::null(), ptr::null(), &mut out), BogoStatus::InvalidInput);
        bogo_hamiltonian_free(ptr::null_mut());
        bogo_diagonalization_free(ptr::null_mut());
        assert_eq!(bogo_hamiltonian_modes(ptr::null()), 0);
    }
}

#[test]
fn complex_input() {
    let h_re = [1.0, 0.1, 0.1, 1.5];
    let h_im = [0.0, 0.2, -0.2, 0.0];
    let k_re = [0.2, 0.1, 0.1, -0.1];
    let k_im = [0.05, 0.0, 0.0, 0.1];
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(bogo_hamiltonian_new(2, h_re.as_ptr(), h_im.as_ptr(), k_re.as_ptr(), k_im.as_ptr(), &mut h), BogoStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(bogo_diagonalize(h, &mut d), BogoStatus::Ok);
        let mut e0 = 0.0;
        bogo_diagonalization_ground_energy(d, &mut e0);
        let mut levels = [0.0];
        assert_eq!(bogo_fock_spectrum(h, 24, 1, levels.as_mut_ptr()), BogoStatus::Ok);
        assert!((levels[0] - e0).abs() < 1e-8, "{} {e0}", levels[0]);
        bogo_diagonalization_free(d);
        bogo_hamiltonian_free(h);
    }
}

#[test]
fn header_declares_exports() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/bogodiag.h")).unwrap();
    for name in [
        "bogo_hamiltonian_new",
        "bogo_hamiltonian_pair",
        "bogo_hamiltonian_free",
        "bogo_hamiltonian_classify",
        "bogo_diagonalize",
        "bogo_diagonalization_matrix",
        "bogo_fock_spectrum",
        "bogo_last_error",
        "typedef struct BogoHamiltonian BogoHamiltonian",
        "BOGO_STATUS_NOT_DIAGONALIZABLE = 3",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
