use std::ffi::{CStr, CString};
use std::ptr;

use ergolab_ffi::*;

const LN2: f64 = std::f64::consts::LN_2;

fn message() -> String {
    unsafe { CStr::from_ptr(ergolab_last_error_message()) }.to_string_lossy().into_owned()
}

fn state_json(text: &str) -> (*mut ErgolabState, ErgolabStatus) {
    let s = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { ergolab_state_from_json(s.as_ptr(), 0.0, &mut out) };
    (out, status)
}

fn bell() -> *mut ErgolabState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let amps = [h, 0.0, 0.0, 0.0, 0.0, 0.0, h, 0.0];
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ergolab_state_from_pure(amps.as_ptr(), 4, 2, 2, 0.0, &mut out) }, ErgolabStatus::Ok);
    out
}

fn local_qubits() -> *mut ErgolabHamiltonian {
    let mut out = ptr::null_mut();
    let e = [0.0, 1.0, 1.0, 2.0];
    assert_eq!(unsafe { ergolab_hamiltonian_diagonal(e.as_ptr(), 4, &mut out) }, ErgolabStatus::Ok);
    out
}

fn computational(dim: usize) -> *mut ErgolabMeasurement {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ergolab_measurement_computational(dim, &mut out) }, ErgolabStatus::Ok);
    out
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(ergolab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn bell_entropies() {
    let psi = bell();
    let m = computational(4);
    let (mut s_vn, mut s_obs, mut s_ent) = (f64::NAN, f64::NAN, f64::NAN);
    unsafe {
        assert_eq!(ergolab_von_neumann_entropy(psi, &mut s_vn), ErgolabStatus::Ok);
        assert_eq!(ergolab_observational_entropy(psi, m, &mut s_obs), ErgolabStatus::Ok);
        assert_eq!(ergolab_entanglement_entropy(psi, &mut s_ent), ErgolabStatus::Ok);
        let mut dim = 0;
        assert_eq!(ergolab_state_dim(psi, &mut dim), ErgolabStatus::Ok);
        assert_eq!(dim, 4);
        ergolab_state_free(psi);
        ergolab_measurement_free(m);
    }
    assert!(s_vn.abs() < 1e-12);
    assert!((s_obs - LN2).abs() < 1e-12);
    assert!((s_ent - LN2).abs() < 1e-12);
    assert_eq!(message(), "");
}

#[test]
fn bell_observational_ergotropy() {
    let psi = bell();
    let h = local_qubits();
    let m = computational(4);
    let mut w = ErgolabWork::default();
    let mut via_schmidt = ErgolabWork::default();
    let mut plain = f64::NAN;
    unsafe {
        assert_eq!(ergolab_observational_ergotropy(psi, h, m, &mut w), ErgolabStatus::Ok);
        assert_eq!(ergolab_entanglement_ergotropy(psi, h, &mut via_schmidt), ErgolabStatus::Ok);
        assert_eq!(ergolab_ergotropy(psi, h, &mut plain), ErgolabStatus::Ok);
        ergolab_state_free(psi);
        ergolab_hamiltonian_free(h);
        ergolab_measurement_free(m);
    }
    assert!((w.beta - 2.090_456_5).abs() < 1e-6, "{w:?}");
    assert!((w.work - 0.779_944_3).abs() < 1e-6, "{w:?}");
    assert!((w.e_initial - 1.0).abs() < 1e-12);
    assert!((w.s_obs - LN2).abs() < 1e-12);
    assert!((w.work - via_schmidt.work).abs() < 1e-12);
    // Full ergotropy of a pure state is its energy above the ground state.
    assert!((plain - 1.0).abs() < 1e-12);
}

#[test]
fn solve_beta_and_range_error() {
    let h = local_qubits();
    let mut beta = f64::NAN;
    unsafe {
        assert_eq!(ergolab_solve_beta(h, LN2, &mut beta), ErgolabStatus::Ok);
        assert!((beta - 2.090_456_5).abs() < 1e-6);
        assert_eq!(ergolab_solve_beta(h, 2.0, &mut beta), ErgolabStatus::EntropyRange);
        ergolab_hamiltonian_free(h);
    }
    assert!(message().contains("range"), "{}", message());
}

#[test]
fn json_inputs_and_gen_specs() {
    let (rho, status) = state_json(r#"{"kind": "density", "data": [[0.5, 0], [0, 0.5]]}"#);
    assert_eq!(status, ErgolabStatus::Ok);
    let mut s = f64::NAN;
    unsafe {
        ergolab_von_neumann_entropy(rho, &mut s);
        ergolab_state_free(rho);
    }
    assert!((s - LN2).abs() < 1e-12);

    let (werner, status) = state_json("gen:werner:1");
    assert_eq!(status, ErgolabStatus::Ok);
    let h_text = CString::new("gen:ham-local:0,1").unwrap();
    let m_text = CString::new("gen:computational:2,2").unwrap();
    let mut h = ptr::null_mut();
    let mut m = ptr::null_mut();
    let mut w = ErgolabWork::default();
    unsafe {
        assert_eq!(ergolab_hamiltonian_from_json(h_text.as_ptr(), &mut h), ErgolabStatus::Ok);
        assert_eq!(ergolab_measurement_from_json(m_text.as_ptr(), &mut m), ErgolabStatus::Ok);
        assert_eq!(ergolab_observational_ergotropy(werner, h, m, &mut w), ErgolabStatus::Ok);
        ergolab_state_free(werner);
        ergolab_hamiltonian_free(h);
        ergolab_measurement_free(m);
    }
    assert!((w.work - 0.779_944_3).abs() < 1e-6);
}

#[test]
fn invalid_inputs_report_codes() {
    let (p, status) = state_json(r#"{"kind": "density", "data": [[0.6, 0], [0, 0.6]]}"#);
    assert!(p.is_null());
    assert_eq!(status, ErgolabStatus::InvalidInput);
    assert!(message().contains("trace"));

    let (_, status) = state_json("not json");
    assert_eq!(status, ErgolabStatus::InvalidInput);

    let mut out = ptr::null_mut();
    let status = unsafe { ergolab_state_from_json(ptr::null(), 0.0, &mut out) };
    assert_eq!(status, ErgolabStatus::InvalidArgument);

    let psi = bell();
    let mut s = 0.0;
    unsafe {
        assert_eq!(ergolab_von_neumann_entropy(psi, ptr::null_mut()), ErgolabStatus::InvalidArgument);
        let m = computational(2);
        assert_eq!(ergolab_observational_entropy(psi, m, &mut s), ErgolabStatus::DimensionMismatch);
        ergolab_measurement_free(m);
        ergolab_state_free(psi);
    }

    let mixed = [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0];
    let mut rho = ptr::null_mut();
    unsafe {
        assert_eq!(ergolab_state_from_density(mixed.as_ptr(), 2, 0, 0, 0.0, &mut rho), ErgolabStatus::Ok);
        assert_eq!(ergolab_entanglement_entropy(rho, &mut s), ErgolabStatus::InvalidInput);
        ergolab_state_free(rho);
        ergolab_state_free(ptr::null_mut());
    }
}

#[test]
fn non_unitary_basis_is_rejected() {
    let bad = [1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let mut m = ptr::null_mut();
    let status = unsafe { ergolab_measurement_from_basis(bad.as_ptr(), 2, &mut m) };
    assert_eq!(status, ErgolabStatus::InvalidInput);
    assert!(m.is_null());
    assert!(message().contains("unitary"));
}

#[test]
fn quantum_correlation_of_bell() {
    let psi = bell();
    let mut q = ErgolabCorrelation::default();
    let mut config = ergolab_optimizer_config_default();
    config.restarts = 4;
    config.seed = 3;
    unsafe {
        assert_eq!(ergolab_quantum_correlation_entropy(psi, &config, &mut q), ErgolabStatus::Ok);
        ergolab_state_free(psi);
    }
    assert!((q.s_qc - LN2).abs() < 1e-6, "{q:?}");
    assert!(q.s_vn.abs() < 1e-12);
    assert!(q.restarts_agreeing >= 1);
}

#[test]
fn extraction_matches_closed_form() {
    let psi = bell();
    let h = local_qubits();
    let m = computational(4);
    let config = ErgolabProtocolConfig { copies: 2, trials: 16, seed: 11, cert_samples: 0, dim_cap: 0 };
    let mut stats = ErgolabWorkStats::default();
    let mut samples = vec![f64::NAN; 16];
    unsafe {
        let status = ergolab_simulate_extraction(psi, h, m, config, &mut stats, samples.as_mut_ptr(), samples.len());
        assert_eq!(status, ErgolabStatus::Ok, "{}", message());
        let status = ergolab_simulate_extraction(psi, h, m, config, &mut stats, samples.as_mut_ptr(), 3);
        assert_eq!(status, ErgolabStatus::InvalidArgument);
        let capped = ErgolabProtocolConfig { copies: 3, dim_cap: 16, ..config };
        let status = ergolab_simulate_extraction(psi, h, m, capped, &mut stats, ptr::null_mut(), 0);
        assert_eq!(status, ErgolabStatus::DimensionCap);
        ergolab_state_free(psi);
        ergolab_hamiltonian_free(h);
        ergolab_measurement_free(m);
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    assert!(samples.iter().all(|w| w.is_finite()));
    assert!((mean - stats.mean).abs() < 1e-12);
    assert!((stats.mean - stats.exact_mean).abs() < 1e-9, "{stats:?}");
    assert!((stats.initial_energy - 2.0).abs() < 1e-12);
}

#[test]
fn messages_are_per_thread() {
    let (_, status) = state_json("not json");
    assert_eq!(status, ErgolabStatus::InvalidInput);
    let other = std::thread::spawn(message).join().unwrap();
    assert_eq!(other, "");
    assert!(!message().is_empty());
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/ergolab.h");
    let source = include_str!("../src/lib.rs");
    let mut count = 0;
    for line in source.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
            count += 1;
        }
    }
    assert!(count >= 25, "{count}");
    assert!(header.contains("typedef struct ErgolabState ErgolabState;"));
    assert!(header.contains("ERGOLAB_STATUS_DIMENSION_CAP = 5"));
}
