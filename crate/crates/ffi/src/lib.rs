//! C ABI over the tempochain simulator.
//!
//! Every function returns a [`TcStatus`]. On anything other than
//! `TC_STATUS_OK` a description is available from [`tc_last_error`] on the
//! same thread. Chains are opaque handles owned by the caller and released
//! with [`tc_chain_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tempochain::qchain::{AttackKind, ChainError, QuantumChain, TamperAttack};
use tempochain::scenario::config::{ScenarioConfig, MAX_BLOCKS};
use tempochain::scenario::report::emit_report;
use tempochain::scenario::run::{run_scenario, ScenarioError};
use tempochain::timeline::PhotonId;
use tempochain::{BitString, RandomSource};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcStatus {
    Ok = 0,
    InvalidArgument = 1,
    BadRecord = 2,
    TemporalAccess = 3,
    UnknownPhoton = 4,
    EmptyChain = 5,
    ConfigError = 6,
    IoError = 7,
    BufferTooSmall = 8,
    RuntimeError = 9,
    Panic = 10,
}

/// A quantum chain plus the random source its measurements draw from.
pub struct TcChain {
    chain: QuantumChain,
    rng: RandomSource,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(TcStatus, String);

impl From<ChainError> for Failure {
    fn from(err: ChainError) -> Self {
        let status = match err {
            ChainError::BadRecord(_) | ChainError::BadExpectation { .. } => TcStatus::BadRecord,
            ChainError::TemporalAccess { .. } => TcStatus::TemporalAccess,
            ChainError::UnknownPhoton(_) => TcStatus::UnknownPhoton,
            ChainError::EmptyChain => TcStatus::EmptyChain,
            _ => TcStatus::RuntimeError,
        };
        Failure(status, err.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(TcStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TcStatus {
    let (status, message) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (TcStatus::Ok, String::new()),
        Ok(Err(Failure(status, message))) => (status, message),
        Err(_) => (TcStatus::Panic, "internal panic".to_string()),
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
    status
}

unsafe fn text<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(invalid(format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not UTF-8")))
}

unsafe fn bits(ptr: *const c_char, name: &str) -> Result<BitString, Failure> {
    text(ptr, name)?
        .parse()
        .map_err(|e| invalid(format!("{name}: {e}")))
}

unsafe fn handle<'a>(chain: *mut TcChain) -> Result<&'a mut TcChain, Failure> {
    chain
        .as_mut()
        .ok_or_else(|| invalid("chain handle is null"))
}

unsafe fn out<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut()
        .ok_or_else(|| invalid(format!("{name} is null")))
}

/// Copies `s` plus a NUL into `buf`; `required` always receives the size needed.
unsafe fn write_str(
    s: &str,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> Result<(), Failure> {
    let needed = s.len() + 1;
    if let Some(r) = required.as_mut() {
        *r = needed;
    }
    if buf.is_null() || len < needed {
        return Err(Failure(
            TcStatus::BufferTooSmall,
            format!("buffer holds {len} bytes, {needed} needed"),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

/// Creates an empty chain whose measurements are seeded by `seed`.
///
/// # Safety
/// `out_chain` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_chain_new(seed: u64, out_chain: *mut *mut TcChain) -> TcStatus {
    guard(|| {
        let slot = out(out_chain, "out_chain")?;
        *slot = Box::into_raw(Box::new(TcChain {
            chain: QuantumChain::new(),
            rng: RandomSource::new(seed),
        }));
        Ok(())
    })
}

/// Releases a chain. Null is ignored.
///
/// # Safety
/// `chain` must come from [`tc_chain_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tc_chain_free(chain: *mut TcChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Appends records given as a string of `0`/`1` whose length is a multiple of
/// two. Chains are capped at 10 blocks; longer requests are rejected whole.
///
/// # Safety
/// `chain` must be a live handle and `records` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tc_chain_extend(chain: *mut TcChain, records: *const c_char) -> TcStatus {
    guard(|| {
        let h = handle(chain)?;
        let records = bits(records, "records")?;
        if records.is_empty() || records.len() % 2 != 0 {
            return Err(Failure(
                TcStatus::BadRecord,
                format!("{} bits is not a whole number of blocks", records.len()),
            ));
        }
        let blocks = h.chain.block_count() + records.len() / 2;
        if blocks > MAX_BLOCKS {
            return Err(invalid(format!(
                "chain would hold {blocks} blocks, limit is {MAX_BLOCKS}"
            )));
        }
        for record in records.chunk_records() {
            h.chain.extend(&record, &mut h.rng)?;
        }
        Ok(())
    })
}

/// # Safety
/// `chain` must be a live handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_chain_block_count(
    chain: *const TcChain,
    out_count: *mut usize,
) -> TcStatus {
    guard(|| {
        let h = chain
            .as_ref()
            .ok_or_else(|| invalid("chain handle is null"))?;
        *out(out_count, "out_count")? = h.chain.block_count();
        Ok(())
    })
}

/// Id of the one photon still live, i.e. the last late photon.
///
/// # Safety
/// `chain` must be a live handle and `out_photon` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tc_chain_live_photon(
    chain: *const TcChain,
    out_photon: *mut u64,
) -> TcStatus {
    guard(|| {
        let h = chain
            .as_ref()
            .ok_or_else(|| invalid("chain handle is null"))?;
        let id = h.chain.last_photon().ok_or(ChainError::EmptyChain)?;
        *out(out_photon, "out_photon")? = id.0;
        Ok(())
    })
}

/// Measures a copy of the chain in the GHZ basis and writes the decoded bits.
///
/// On `TC_STATUS_BUFFER_TOO_SMALL` nothing is written except `required`.
///
/// # Safety
/// `chain` must be a live handle; `buf` must hold `len` bytes; `required` may be null.
#[no_mangle]
pub unsafe extern "C" fn tc_chain_decode(
    chain: *mut TcChain,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> TcStatus {
    guard(|| {
        let h = handle(chain)?;
        if let Some(r) = required.as_mut() {
            *r = h.chain.logical_bits().len() + 1;
        }
        if buf.is_null() || len <= h.chain.logical_bits().len() {
            return write_str(&h.chain.logical_bits().to_string(), buf, len, required);
        }
        let decoded = h.chain.decode(&mut h.rng)?;
        write_str(&decoded.to_string(), buf, len, required)
    })
}

/// One sampled validation of the chain against `expected`.
///
/// # Safety
/// `chain` must be a live handle, `expected` NUL-terminated, `out_passed` valid.
#[no_mangle]
pub unsafe extern "C" fn tc_chain_validate(
    chain: *mut TcChain,
    expected: *const c_char,
    out_passed: *mut bool,
) -> TcStatus {
    guard(|| {
        let h = handle(chain)?;
        let expected = bits(expected, "expected")?;
        *out(out_passed, "out_passed")? = h.chain.validate(&expected, &mut h.rng)?;
        Ok(())
    })
}

/// Exact probability that validation against `expected` passes.
///
/// # Safety
/// `chain` must be a live handle, `expected` NUL-terminated, `out_probability` valid.
#[no_mangle]
pub unsafe extern "C" fn tc_chain_validation_probability(
    chain: *const TcChain,
    expected: *const c_char,
    out_probability: *mut f64,
) -> TcStatus {
    guard(|| {
        let h = chain
            .as_ref()
            .ok_or_else(|| invalid("chain handle is null"))?;
        let expected = bits(expected, "expected")?;
        *out(out_probability, "out_probability")? = h.chain.validation_probability(&expected)?;
        Ok(())
    })
}

/// Attacks one photon. `kind` is `bit_flip`, `phase_flip`, `random_unitary`
/// or `z_measure`; `seed` drives any randomness the attack needs.
/// Absorbed photons give `TC_STATUS_TEMPORAL_ACCESS` and leave the chain as it was.
///
/// # Safety
/// `chain` must be a live handle and `kind` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tc_chain_tamper(
    chain: *mut TcChain,
    kind: *const c_char,
    photon: u64,
    seed: u64,
) -> TcStatus {
    guard(|| {
        let h = handle(chain)?;
        let kind: AttackKind = text(kind, "kind")?.parse().map_err(invalid)?;
        h.chain.tamper(TamperAttack::new(
            kind,
            PhotonId(photon),
            RandomSource::new(seed),
        ))?;
        Ok(())
    })
}

/// Runs a scenario described by TOML text and writes its report to `out_path`.
/// `assertions_passed` receives the scenario's own verdict.
///
/// # Safety
/// `config_toml` and `out_path` must be NUL-terminated; `assertions_passed` may be null.
#[no_mangle]
pub unsafe extern "C" fn tc_run_scenario(
    config_toml: *const c_char,
    out_path: *const c_char,
    assertions_passed: *mut bool,
) -> TcStatus {
    guard(|| {
        let toml = text(config_toml, "config_toml")?;
        let path = text(out_path, "out_path")?;
        let config = ScenarioConfig::from_toml(toml)
            .map_err(|e| Failure(TcStatus::ConfigError, e.to_string()))?;
        let report = run_scenario(&config).map_err(|e| match e {
            ScenarioError::Config(e) => Failure(TcStatus::ConfigError, e.to_string()),
            ScenarioError::Chain(e) => e.into(),
            other => Failure(TcStatus::RuntimeError, other.to_string()),
        })?;
        emit_report(&report, config.format, path.as_ref())
            .map_err(|e| Failure(TcStatus::IoError, e.to_string()))?;
        if let Some(flag) = assertions_passed.as_mut() {
            *flag = report.passed();
        }
        Ok(())
    })
}

/// Copies the calling thread's last error message (empty after success)
/// into `buf`, truncating to fit. Returns the full message length.
///
/// # Safety
/// `buf` must hold `len` bytes, or be null with `len` 0.
#[no_mangle]
pub unsafe extern "C" fn tc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn tc_status_name(status: TcStatus) -> *const c_char {
    let name: &'static CStr = match status {
        TcStatus::Ok => c"ok",
        TcStatus::InvalidArgument => c"invalid_argument",
        TcStatus::BadRecord => c"bad_record",
        TcStatus::TemporalAccess => c"temporal_access",
        TcStatus::UnknownPhoton => c"unknown_photon",
        TcStatus::EmptyChain => c"empty_chain",
        TcStatus::ConfigError => c"config_error",
        TcStatus::IoError => c"io_error",
        TcStatus::BufferTooSmall => c"buffer_too_small",
        TcStatus::RuntimeError => c"runtime_error",
        TcStatus::Panic => c"panic",
    };
    name.as_ptr()
}
