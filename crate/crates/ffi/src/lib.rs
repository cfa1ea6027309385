//! C ABI for ergolab.
//!
//! Every entry point returns an [`ErgolabStatus`]. Objects are passed as
//! opaque handles created by the `*_from_*` constructors and released with the
//! matching `*_free`. Complex arrays are interleaved `re, im` pairs in
//! row-major order. After any call, `ergolab_last_error_message` describes the
//! failure on the calling thread (empty after a success).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ergolab::cli::{self, CliError};
use ergolab::qstate::{CMatrix, CVector};
use ergolab::{
    Bipartition, Certification, DensityMatrix, Error, Hamiltonian, Measurement, OptimizerConfig,
    ProtocolConfig, PureState, Strategy, C64, DEFAULT_DIM_CAP, DEFAULT_TOL,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErgolabStatus {
    Ok = 0,
    /// A required pointer was null or an argument was out of range.
    InvalidArgument = 1,
    /// Input could not be parsed or failed validation.
    InvalidInput = 2,
    DimensionMismatch = 3,
    /// Target entropy has no thermal state.
    EntropyRange = 4,
    DimensionCap = 5,
    /// Internal failure, including a caught panic.
    Internal = 6,
}

pub struct ErgolabState {
    density: DensityMatrix,
    pure: Option<PureState>,
}

pub struct ErgolabHamiltonian(Hamiltonian);

pub struct ErgolabMeasurement(Measurement);

/// Observational ergotropy and the thermal reference it was measured against.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErgolabWork {
    pub work: f64,
    pub beta: f64,
    pub s_obs: f64,
    pub e_initial: f64,
    pub e_final: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErgolabStrategy {
    GivensSweeps = 0,
    ExpMapGradient = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgolabOptimizerConfig {
    pub restarts: u32,
    pub max_sweeps: u32,
    pub tol: f64,
    pub seed: u64,
    pub strategy: ErgolabStrategy,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErgolabCorrelation {
    pub s_qc: f64,
    pub s_min: f64,
    pub s_vn: f64,
    pub restarts_agreeing: u32,
    pub converged: bool,
}

/// Protocol settings. `cert_samples == 0` certifies with exact statistics;
/// `dim_cap == 0` uses the library default.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErgolabProtocolConfig {
    pub copies: u32,
    pub trials: u64,
    pub seed: u64,
    pub cert_samples: u64,
    pub dim_cap: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErgolabWorkStats {
    pub mean: f64,
    pub std_error: f64,
    pub exact_mean: f64,
    pub initial_energy: f64,
}

enum Fail {
    Arg(String),
    Cli(CliError),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Cli(CliError::Lib(e))
    }
}

impl From<CliError> for Fail {
    fn from(e: CliError) -> Self {
        Fail::Cli(e)
    }
}

type FfiResult<T> = Result<T, Fail>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_message(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|m| *m.borrow_mut() = text);
}

fn status_of(fail: &Fail) -> ErgolabStatus {
    match fail {
        Fail::Arg(_) => ErgolabStatus::InvalidArgument,
        Fail::Cli(e) => match e.exit_code() {
            cli::EXIT_DIMENSION => ErgolabStatus::DimensionMismatch,
            cli::EXIT_ENTROPY_RANGE => ErgolabStatus::EntropyRange,
            cli::EXIT_DIM_CAP => ErgolabStatus::DimensionCap,
            _ if matches!(e, CliError::Lib(Error::EigenFailure)) => ErgolabStatus::Internal,
            _ => ErgolabStatus::InvalidInput,
        },
    }
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> ErgolabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_message("");
            ErgolabStatus::Ok
        }
        Ok(Err(fail)) => {
            match &fail {
                Fail::Arg(m) => set_message(m),
                Fail::Cli(e) => set_message(&e.to_string()),
            }
            status_of(&fail)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_message(&format!("internal error: {msg}"));
            ErgolabStatus::Internal
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| Fail::Arg(format!("{name} is null")))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(Fail::Arg(format!("{name} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Fail::Arg(format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Arg(format!("{name} is not UTF-8")))
}

unsafe fn complex_slice(p: *const f64, len: usize, name: &str) -> FfiResult<Vec<C64>> {
    if p.is_null() {
        return Err(Fail::Arg(format!("{name} is null")));
    }
    let raw = std::slice::from_raw_parts(p, 2 * len);
    Ok(raw.chunks_exact(2).map(|z| C64::new(z[0], z[1])).collect())
}

unsafe fn complex_matrix(p: *const f64, dim: usize, name: &str) -> FfiResult<CMatrix> {
    if dim == 0 {
        return Err(Fail::Arg("dimension must be positive".into()));
    }
    let entries = complex_slice(p, dim * dim, name)?;
    Ok(CMatrix::from_row_slice(dim, dim, &entries))
}

fn tolerance(tol: f64) -> f64 {
    if tol.is_finite() && tol > 0.0 {
        tol
    } else {
        DEFAULT_TOL
    }
}

fn dims(dim_a: usize, dim_b: usize) -> Option<Bipartition> {
    (dim_a != 0 || dim_b != 0).then(|| Bipartition::new(dim_a, dim_b))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ergolab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent call on this thread. Valid until the next call
/// on the same thread.
#[no_mangle]
pub extern "C" fn ergolab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|m| m.borrow().as_ptr())
}

/// Parses a state document (`{"kind": "pure"|"density", ...}`) or a `gen:` spec.
/// A non-positive `tol` selects the default tolerance.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ergolab_state_from_json(
    json: *const c_char,
    tol: f64,
    out: *mut *mut ErgolabState,
) -> ErgolabStatus {
    guard(|| {
        let (density, pure) = cli::load_state(text(json, "json")?, tolerance(tol))?;
        write(out, boxed(ErgolabState { density, pure }), "out")
    })
}

/// Density matrix from `dim * dim` interleaved complex entries. Pass
/// `dim_a = dim_b = 0` for a state without a bipartition.
///
/// # Safety
/// `re_im` must point to `2 * dim * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_state_from_density(
    re_im: *const f64,
    dim: usize,
    dim_a: usize,
    dim_b: usize,
    tol: f64,
    out: *mut *mut ErgolabState,
) -> ErgolabStatus {
    guard(|| {
        let mut rho = DensityMatrix::new(complex_matrix(re_im, dim, "re_im")?, tolerance(tol))?;
        if let Some(d) = dims(dim_a, dim_b) {
            rho = rho.with_dims(d)?;
        }
        write(out, boxed(ErgolabState { density: rho, pure: None }), "out")
    })
}

/// Pure state from `dim` interleaved complex amplitudes.
///
/// # Safety
/// `re_im` must point to `2 * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_state_from_pure(
    re_im: *const f64,
    dim: usize,
    dim_a: usize,
    dim_b: usize,
    tol: f64,
    out: *mut *mut ErgolabState,
) -> ErgolabStatus {
    guard(|| {
        if dim == 0 {
            return Err(Fail::Arg("dimension must be positive".into()));
        }
        let amplitudes = CVector::from_vec(complex_slice(re_im, dim, "re_im")?);
        let mut psi = PureState::new(amplitudes, tolerance(tol))?;
        if let Some(d) = dims(dim_a, dim_b) {
            psi = psi.with_dims(d)?;
        }
        let state = ErgolabState {
            density: psi.density(),
            pure: Some(psi),
        };
        write(out, boxed(state), "out")
    })
}

/// # Safety
/// `state` must be null or a handle from an `ergolab_state_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ergolab_state_free(state: *mut ErgolabState) {
    free(state);
}

/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_state_dim(state: *const ErgolabState, out: *mut usize) -> ErgolabStatus {
    guard(|| write(out, get(state, "state")?.density.dim(), "out"))
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ergolab_hamiltonian_from_json(
    json: *const c_char,
    out: *mut *mut ErgolabHamiltonian,
) -> ErgolabStatus {
    guard(|| {
        let h = cli::load_hamiltonian(text(json, "json")?)?;
        write(out, boxed(ErgolabHamiltonian(h)), "out")
    })
}

/// Hermitian matrix from `dim * dim` interleaved complex entries.
///
/// # Safety
/// `re_im` must point to `2 * dim * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_hamiltonian_from_matrix(
    re_im: *const f64,
    dim: usize,
    out: *mut *mut ErgolabHamiltonian,
) -> ErgolabStatus {
    guard(|| {
        let h = Hamiltonian::new(complex_matrix(re_im, dim, "re_im")?)?;
        write(out, boxed(ErgolabHamiltonian(h)), "out")
    })
}

/// # Safety
/// `energies` must point to `dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_hamiltonian_diagonal(
    energies: *const f64,
    dim: usize,
    out: *mut *mut ErgolabHamiltonian,
) -> ErgolabStatus {
    guard(|| {
        if energies.is_null() || dim == 0 {
            return Err(Fail::Arg("energies must be a non-empty array".into()));
        }
        let h = Hamiltonian::diagonal(std::slice::from_raw_parts(energies, dim))?;
        write(out, boxed(ErgolabHamiltonian(h)), "out")
    })
}

/// # Safety
/// `h` must be null or a handle from an `ergolab_hamiltonian_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ergolab_hamiltonian_free(h: *mut ErgolabHamiltonian) {
    free(h);
}

/// Parses a measurement document (`{"kind": "basis"|"pvm", ...}`) or a `gen:` spec.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ergolab_measurement_from_json(
    json: *const c_char,
    out: *mut *mut ErgolabMeasurement,
) -> ErgolabStatus {
    guard(|| {
        let m = cli::load_measurement(text(json, "json")?)?;
        write(out, boxed(ErgolabMeasurement(m)), "out")
    })
}

/// Rank-one measurement onto the columns of a `dim x dim` unitary.
///
/// # Safety
/// `re_im` must point to `2 * dim * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_measurement_from_basis(
    re_im: *const f64,
    dim: usize,
    out: *mut *mut ErgolabMeasurement,
) -> ErgolabStatus {
    guard(|| {
        let m = Measurement::from_basis(complex_matrix(re_im, dim, "re_im")?)?;
        write(out, boxed(ErgolabMeasurement(m)), "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_measurement_computational(
    dim: usize,
    out: *mut *mut ErgolabMeasurement,
) -> ErgolabStatus {
    guard(|| {
        if dim == 0 {
            return Err(Fail::Arg("dimension must be positive".into()));
        }
        write(out, boxed(ErgolabMeasurement(Measurement::computational(dim))), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from an `ergolab_measurement_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ergolab_measurement_free(m: *mut ErgolabMeasurement) {
    free(m);
}

/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_von_neumann_entropy(
    state: *const ErgolabState,
    out: *mut f64,
) -> ErgolabStatus {
    guard(|| write(out, ergolab::von_neumann_entropy(&get(state, "state")?.density), "out"))
}

/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_observational_entropy(
    state: *const ErgolabState,
    measurement: *const ErgolabMeasurement,
    out: *mut f64,
) -> ErgolabStatus {
    guard(|| {
        let s = ergolab::observational_entropy(&get(state, "state")?.density, &get(measurement, "measurement")?.0)?;
        write(out, s, "out")
    })
}

fn pure_of(state: &ErgolabState) -> FfiResult<&PureState> {
    state.pure.as_ref().ok_or_else(|| {
        Fail::Cli(CliError::Input(
            "entanglement entropy needs a state given as a pure vector".into(),
        ))
    })
}

/// Entanglement entropy of a bipartite pure state.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_entanglement_entropy(
    state: *const ErgolabState,
    out: *mut f64,
) -> ErgolabStatus {
    guard(|| write(out, ergolab::entanglement_entropy(pure_of(get(state, "state")?)?)?, "out"))
}

/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_ergotropy(
    state: *const ErgolabState,
    h: *const ErgolabHamiltonian,
    out: *mut f64,
) -> ErgolabStatus {
    guard(|| write(out, ergolab::ergotropy(&get(state, "state")?.density, &get(h, "h")?.0)?, "out"))
}

fn work_of(w: ergolab::ObservationalErgotropy) -> ErgolabWork {
    ErgolabWork {
        work: w.work,
        beta: w.beta,
        s_obs: w.s_obs,
        e_initial: w.e_initial,
        e_final: w.e_final,
    }
}

/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_observational_ergotropy(
    state: *const ErgolabState,
    h: *const ErgolabHamiltonian,
    measurement: *const ErgolabMeasurement,
    out: *mut ErgolabWork,
) -> ErgolabStatus {
    guard(|| {
        let w = ergolab::observational_ergotropy(
            &get(state, "state")?.density,
            &get(h, "h")?.0,
            &get(measurement, "measurement")?.0,
        )?;
        write(out, work_of(w), "out")
    })
}

/// Observational ergotropy at the Schmidt basis of a bipartite pure state.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_entanglement_ergotropy(
    state: *const ErgolabState,
    h: *const ErgolabHamiltonian,
    out: *mut ErgolabWork,
) -> ErgolabStatus {
    guard(|| {
        let w = ergolab::entanglement_ergotropy(pure_of(get(state, "state")?)?, &get(h, "h")?.0)?;
        write(out, work_of(w), "out")
    })
}

/// Inverse temperature whose thermal state has entropy `s_target`.
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_solve_beta(
    h: *const ErgolabHamiltonian,
    s_target: f64,
    out: *mut f64,
) -> ErgolabStatus {
    guard(|| write(out, ergolab::solve_beta(&get(h, "h")?.0, s_target)?, "out"))
}

#[no_mangle]
pub extern "C" fn ergolab_optimizer_config_default() -> ErgolabOptimizerConfig {
    let d = OptimizerConfig::default();
    ErgolabOptimizerConfig {
        restarts: d.restarts as u32,
        max_sweeps: d.max_sweeps as u32,
        tol: d.tol,
        seed: d.seed,
        strategy: match d.strategy {
            Strategy::GivensSweeps => ErgolabStrategy::GivensSweeps,
            Strategy::ExpMapGradient => ErgolabStrategy::ExpMapGradient,
        },
    }
}

/// Quantum correlation entropy of a bipartite state. A null `config` selects
/// the defaults.
///
/// # Safety
/// Handles must be valid; `config` null or valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ergolab_quantum_correlation_entropy(
    state: *const ErgolabState,
    config: *const ErgolabOptimizerConfig,
    out: *mut ErgolabCorrelation,
) -> ErgolabStatus {
    guard(|| {
        let c = config.as_ref().copied().unwrap_or_else(|| ergolab_optimizer_config_default());
        let config = OptimizerConfig {
            restarts: c.restarts as usize,
            max_sweeps: c.max_sweeps as usize,
            tol: c.tol,
            seed: c.seed,
            strategy: match c.strategy {
                ErgolabStrategy::GivensSweeps => Strategy::GivensSweeps,
                ErgolabStrategy::ExpMapGradient => Strategy::ExpMapGradient,
            },
        };
        let q = ergolab::quantum_correlation_entropy(&get(state, "state")?.density, &config)?;
        let result = ErgolabCorrelation {
            s_qc: q.s_qc,
            s_min: q.s_min,
            s_vn: q.s_vn,
            restarts_agreeing: q.optimizer.restarts_agreeing as u32,
            converged: q.optimizer.converged,
        };
        write(out, result, "out")
    })
}

/// Runs the certify-then-extract protocol on `config.copies` copies.
/// `samples` may be null; otherwise it receives `samples_len` per-trial works,
/// where `samples_len` must equal `config.trials`.
///
/// # Safety
/// Handles must be valid; `out` writable; `samples` null or `samples_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ergolab_simulate_extraction(
    state: *const ErgolabState,
    h: *const ErgolabHamiltonian,
    measurement: *const ErgolabMeasurement,
    config: ErgolabProtocolConfig,
    out: *mut ErgolabWorkStats,
    samples: *mut f64,
    samples_len: usize,
) -> ErgolabStatus {
    guard(|| {
        if config.copies == 0 || config.trials == 0 {
            return Err(Fail::Arg("copies and trials must be positive".into()));
        }
        if !samples.is_null() && samples_len as u64 != config.trials {
            return Err(Fail::Arg(format!(
                "samples_len {samples_len} differs from trials {}",
                config.trials
            )));
        }
        let mut pc = ProtocolConfig::new(
            get(measurement, "measurement")?.0.clone(),
            config.copies as usize,
            config.trials as usize,
            config.seed,
        );
        if config.cert_samples > 0 {
            pc.certification = Certification::Samples(config.cert_samples);
        }
        pc.dim_cap = if config.dim_cap == 0 { DEFAULT_DIM_CAP } else { config.dim_cap as usize };
        let w = ergolab::simulate_extraction(&get(state, "state")?.density, &get(h, "h")?.0, &pc)?;
        if !samples.is_null() {
            std::slice::from_raw_parts_mut(samples, samples_len).copy_from_slice(&w.samples);
        }
        let stats = ErgolabWorkStats {
            mean: w.mean,
            std_error: w.std_error,
            exact_mean: w.exact_mean,
            initial_energy: w.initial_energy,
        };
        write(out, stats, "out")
    })
}
