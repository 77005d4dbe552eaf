//! C ABI over the `mimo-ising` detectors.
//!
//! Instances are opaque heap handles. Every fallible call returns an
//! [`MiStatus`]; on failure a message is available from
//! [`mi_last_error_message`] on the same thread. Panics are caught at the
//! boundary and reported as [`MiStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mimo_ising::channel::{CMatrix, CVector, InstanceSeeds, MimoInstance};
use mimo_ising::harness::ber_upper_bound;
use mimo_ising::{detect, Constellation, Detector, DetectorOptions, Error};
use num_complex::Complex64;

/// Status codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularChannel = 3,
    BudgetExceeded = 4,
    Unsupported = 5,
    Panic = 6,
}

/// Detection algorithms.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiDetector {
    Zf = 0,
    Mmse = 1,
    Ml = 2,
    Bpim = 3,
    Dpim = 4,
    Oim = 5,
}

impl From<MiDetector> for Detector {
    fn from(d: MiDetector) -> Self {
        match d {
            MiDetector::Zf => Detector::Zf,
            MiDetector::Mmse => Detector::Mmse,
            MiDetector::Ml => Detector::Ml,
            MiDetector::Bpim => Detector::Bpim,
            MiDetector::Dpim => Detector::Dpim,
            MiDetector::Oim => Detector::Oim,
        }
    }
}

/// Opaque detection problem.
pub struct MiInstance {
    inst: MimoInstance,
    con: Constellation,
    /// False for instances built from caller data (no transmitted bits known).
    has_tx: bool,
}

/// Output of [`mi_detect`] besides the bits.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MiDetectStats {
    /// `||y - H x||^2` of the returned symbols.
    pub residual_energy: f64,
    /// Bit errors against the transmitted message, or -1 if unknown.
    pub bit_errors: i64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: MiStatus, msg: impl Into<String>) -> MiStatus {
    set_last_error(msg.into());
    status
}

fn status_of(err: &Error) -> MiStatus {
    match err {
        Error::SingularChannel { .. } => MiStatus::SingularChannel,
        Error::SearchBudget { .. } | Error::NodeBudget(_) => MiStatus::BudgetExceeded,
        Error::Unsupported(_) => MiStatus::Unsupported,
        _ => MiStatus::InvalidArgument,
    }
}

fn from_error(err: Error) -> MiStatus {
    let status = status_of(&err);
    fail(status, err.to_string())
}

fn guarded(f: impl FnOnce() -> MiStatus) -> MiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(MiStatus::Panic, format!("panic: {msg}"))
        }
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mi_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version has no interior nul"),
    };
    VERSION.as_ptr()
}

/// Bits per symbol of an `order`-ary constellation, or 0 if `order` is invalid.
#[no_mangle]
pub extern "C" fn mi_bits_per_symbol(order: usize) -> usize {
    Constellation::new(order).map_or(0, |c| c.bits_per_symbol())
}

/// Zero-error upper bound `-ln(1 - confidence) / n_bits`; infinite for 0 bits,
/// NaN for a confidence outside (0, 1).
#[no_mangle]
pub extern "C" fn mi_ber_upper_bound(n_bits: u64, confidence: f64) -> f64 {
    if !(confidence > 0.0 && confidence < 1.0) {
        return f64::NAN;
    }
    ber_upper_bound(n_bits, confidence)
}

/// Draws a random `n_rx x n_tx` instance at `ebn0_db`. The same
/// `(seed, channel_index, message_index)` gives the same channel, message and
/// unit noise at every Eb/N0.
///
/// # Safety
/// `out` must be NULL or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn mi_instance_generate(
    n_rx: usize,
    n_tx: usize,
    order: usize,
    ebn0_db: f64,
    seed: u64,
    channel_index: u64,
    message_index: u64,
    out: *mut *mut MiInstance,
) -> MiStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MiStatus::NullPointer, "out is NULL");
        }
        let built = Constellation::new(order).and_then(|con| {
            let seeds = InstanceSeeds::derive(seed, channel_index, message_index);
            MimoInstance::generate(&con, n_rx, n_tx, ebn0_db, seeds).map(|inst| (inst, con))
        });
        match built {
            Ok((inst, con)) => {
                *out = Box::into_raw(Box::new(MiInstance {
                    inst,
                    con,
                    has_tx: true,
                }));
                MiStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Wraps caller data: `h` holds `n_rx * n_tx` complex entries row-major as
/// interleaved (re, im) pairs, `y` holds `n_rx` interleaved pairs.
/// `sigma_sq` is only used by MMSE.
///
/// # Safety
/// `h` must be valid for `2 * n_rx * n_tx` reads, `y` for `2 * n_rx` reads and
/// `out` for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn mi_instance_from_data(
    n_rx: usize,
    n_tx: usize,
    order: usize,
    h: *const f64,
    y: *const f64,
    sigma_sq: f64,
    out: *mut *mut MiInstance,
) -> MiStatus {
    guarded(|| {
        if h.is_null() || y.is_null() || out.is_null() {
            return fail(MiStatus::NullPointer, "h, y and out must be non-NULL");
        }
        if n_tx == 0 || n_rx < n_tx {
            return fail(
                MiStatus::InvalidArgument,
                format!("need n_rx >= n_tx >= 1, got {n_rx} x {n_tx}"),
            );
        }
        let Some(len) = n_rx.checked_mul(n_tx).and_then(|v| v.checked_mul(2)) else {
            return fail(MiStatus::InvalidArgument, "dimensions overflow");
        };
        if !(sigma_sq >= 0.0) || !sigma_sq.is_finite() {
            return fail(MiStatus::InvalidArgument, "sigma_sq must be finite and non-negative");
        }
        let con = match Constellation::new(order) {
            Ok(c) => c,
            Err(e) => return from_error(e),
        };
        let h = std::slice::from_raw_parts(h, len);
        let y = std::slice::from_raw_parts(y, 2 * n_rx);
        if let Some(bad) = h.iter().chain(y).find(|v| !v.is_finite()) {
            return from_error(Error::NonFinite(*bad));
        }
        let channel = CMatrix::from_fn(n_rx, n_tx, |r, c| {
            let k = 2 * (r * n_tx + c);
            Complex64::new(h[k], h[k + 1])
        });
        let rx_vector = CVector::from_fn(n_rx, |r, _| Complex64::new(y[2 * r], y[2 * r + 1]));
        let inst = MimoInstance {
            n_tx,
            n_rx,
            order,
            channel,
            tx_bits: Vec::new(),
            tx_symbols: Vec::new(),
            rx_vector,
            sigma_sq,
            ebn0_db: f64::NAN,
            seeds: InstanceSeeds::derive(0, 0, 0),
        };
        *out = Box::into_raw(Box::new(MiInstance {
            inst,
            con,
            has_tx: false,
        }));
        MiStatus::Ok
    })
}

/// Releases an instance. NULL is ignored.
///
/// # Safety
/// `inst` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mi_instance_free(inst: *mut MiInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of message bits, `n_tx * log2(order)`, or 0 for NULL.
///
/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mi_instance_bit_count(inst: *const MiInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inst.n_tx * i.con.bits_per_symbol())
}

/// Noise variance per complex receive antenna.
///
/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mi_instance_sigma_sq(inst: *const MiInstance) -> f64 {
    inst.as_ref().map_or(f64::NAN, |i| i.inst.sigma_sq)
}

/// Copies the transmitted bits (one 0/1 byte per bit) into `bits`, which must
/// hold exactly [`mi_instance_bit_count`] bytes.
///
/// # Safety
/// `inst` must be a live handle and `bits` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mi_instance_tx_bits(inst: *const MiInstance, bits: *mut u8, len: usize) -> MiStatus {
    guarded(|| {
        let Some(i) = inst.as_ref() else {
            return fail(MiStatus::NullPointer, "instance is NULL");
        };
        if bits.is_null() {
            return fail(MiStatus::NullPointer, "bits is NULL");
        }
        if !i.has_tx {
            return fail(
                MiStatus::InvalidArgument,
                "instance was built from data and has no transmitted bits",
            );
        }
        if len != i.inst.tx_bits.len() {
            return fail(
                MiStatus::InvalidArgument,
                format!("buffer holds {len} bits, message has {}", i.inst.tx_bits.len()),
            );
        }
        std::slice::from_raw_parts_mut(bits, len).copy_from_slice(&i.inst.tx_bits);
        MiStatus::Ok
    })
}

/// Runs `detector` and writes the detected bits (one 0/1 byte per bit) into
/// `bits`, which must hold exactly [`mi_instance_bit_count`] bytes.
/// `replicas` and `iterations` of 0 select the defaults; `seed` drives the
/// stochastic detectors. `stats` may be NULL.
///
/// # Safety
/// `inst` must be a live handle, `bits` valid for `len` writes and `stats`
/// NULL or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mi_detect(
    inst: *const MiInstance,
    detector: MiDetector,
    replicas: usize,
    iterations: usize,
    seed: u64,
    bits: *mut u8,
    len: usize,
    stats: *mut MiDetectStats,
) -> MiStatus {
    guarded(|| {
        let Some(i) = inst.as_ref() else {
            return fail(MiStatus::NullPointer, "instance is NULL");
        };
        if bits.is_null() {
            return fail(MiStatus::NullPointer, "bits is NULL");
        }
        let expected = i.inst.n_tx * i.con.bits_per_symbol();
        if len != expected {
            return fail(
                MiStatus::InvalidArgument,
                format!("buffer holds {len} bits, message has {expected}"),
            );
        }
        let options = DetectorOptions {
            replicas: (replicas > 0).then_some(replicas),
            iterations: (iterations > 0).then_some(iterations),
            ..Default::default()
        };
        let result = match detect(&i.inst, &i.con, detector.into(), &options, seed) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        std::slice::from_raw_parts_mut(bits, len).copy_from_slice(&result.bits);
        if let Some(s) = stats.as_mut() {
            s.residual_energy = result.residual_energy;
            s.bit_errors = if i.has_tx {
                result.bits.iter().zip(&i.inst.tx_bits).filter(|(a, b)| a != b).count() as i64
            } else {
                -1
            };
        }
        MiStatus::Ok
    })
}
