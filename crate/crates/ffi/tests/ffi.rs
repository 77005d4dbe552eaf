use std::ffi::CStr;
use std::ptr;

use mimo_ising_ffi::*;

fn last_error() -> String {
    let p = mi_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn generate(n: usize, order: usize, ebn0: f64, seed: u64) -> *mut MiInstance {
    let mut inst = ptr::null_mut();
    let s = unsafe { mi_instance_generate(n, n, order, ebn0, seed, 0, 0, &mut inst) };
    assert_eq!(s, MiStatus::Ok);
    assert!(!inst.is_null());
    inst
}

#[test]
fn version_and_bounds() {
    let v = unsafe { CStr::from_ptr(mi_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    assert!((mi_ber_upper_bound(8_601_600, 0.95) - 3.4827e-7).abs() < 1e-10);
    assert!(mi_ber_upper_bound(0, 0.95).is_infinite());
    assert!(mi_ber_upper_bound(10, 1.0).is_nan());
    assert_eq!(mi_bits_per_symbol(16), 4);
    assert_eq!(mi_bits_per_symbol(8), 0);
}

#[test]
fn every_detector_recovers_noiseless_bits() {
    for (order, dets) in [
        (
            2usize,
            &[
                MiDetector::Zf,
                MiDetector::Mmse,
                MiDetector::Ml,
                MiDetector::Bpim,
                MiDetector::Oim,
            ][..],
        ),
        (
            16,
            &[
                MiDetector::Zf,
                MiDetector::Mmse,
                MiDetector::Ml,
                MiDetector::Bpim,
                MiDetector::Dpim,
            ][..],
        ),
    ] {
        let inst = generate(4, order, 300.0, 11);
        let len = unsafe { mi_instance_bit_count(inst) };
        let mut tx = vec![0u8; len];
        assert_eq!(unsafe { mi_instance_tx_bits(inst, tx.as_mut_ptr(), len) }, MiStatus::Ok);
        for &d in dets {
            let mut bits = vec![9u8; len];
            let mut stats = MiDetectStats::default();
            let s = unsafe { mi_detect(inst, d, 0, 0, 3, bits.as_mut_ptr(), len, &mut stats) };
            assert_eq!(s, MiStatus::Ok, "{d:?}");
            assert_eq!(bits, tx, "{d:?}");
            assert_eq!(stats.bit_errors, 0);
            assert!(stats.residual_energy < 1e-20);
        }
        unsafe { mi_instance_free(inst) };
    }
}

#[test]
fn from_data_matches_hand_computation() {
    // identity channel, 4-QAM, nearest points 1+i and -1+i
    let h = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let y = [0.9, 1.1, -1.2, 0.8];
    let mut inst = ptr::null_mut();
    let s = unsafe { mi_instance_from_data(2, 2, 4, h.as_ptr(), y.as_ptr(), 0.1, &mut inst) };
    assert_eq!(s, MiStatus::Ok);
    let mut ml = [0u8; 4];
    let mut zf = [0u8; 4];
    let mut stats = MiDetectStats::default();
    unsafe {
        assert_eq!(
            mi_detect(inst, MiDetector::Ml, 0, 0, 0, ml.as_mut_ptr(), 4, &mut stats),
            MiStatus::Ok
        );
        assert_eq!(
            mi_detect(inst, MiDetector::Zf, 0, 0, 0, zf.as_mut_ptr(), 4, ptr::null_mut()),
            MiStatus::Ok
        );
    }
    assert_eq!(ml, zf);
    assert_eq!(stats.bit_errors, -1);
    let expected = (0.9f64 - 1.0).powi(2) + (1.1f64 - 1.0).powi(2) + (-1.2f64 + 1.0).powi(2) + (0.8f64 - 1.0).powi(2);
    assert!((stats.residual_energy - expected).abs() < 1e-12);
    let mut tx = [0u8; 4];
    assert_eq!(
        unsafe { mi_instance_tx_bits(inst, tx.as_mut_ptr(), 4) },
        MiStatus::InvalidArgument
    );
    unsafe { mi_instance_free(inst) };
}

#[test]
fn errors_are_reported() {
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(
            mi_instance_generate(4, 4, 8, 5.0, 0, 0, 0, &mut inst),
            MiStatus::InvalidArgument
        );
        assert!(last_error().contains("modulation order 8"));
        assert!(inst.is_null());
        assert_eq!(
            mi_instance_generate(4, 4, 4, 5.0, 0, 0, 0, ptr::null_mut()),
            MiStatus::NullPointer
        );
        assert_eq!(
            mi_instance_generate(2, 4, 4, 5.0, 0, 0, 0, &mut inst),
            MiStatus::InvalidArgument
        );
        assert_eq!(
            mi_instance_generate(4, 4, 4, f64::NAN, 0, 0, 0, &mut inst),
            MiStatus::InvalidArgument
        );
    }

    let inst = generate(4, 4, 10.0, 1);
    let mut bits = [0u8; 8];
    unsafe {
        assert_eq!(
            mi_detect(inst, MiDetector::Oim, 0, 0, 0, bits.as_mut_ptr(), 8, ptr::null_mut()),
            MiStatus::Unsupported
        );
        assert_eq!(
            mi_detect(inst, MiDetector::Ml, 0, 0, 0, bits.as_mut_ptr(), 7, ptr::null_mut()),
            MiStatus::InvalidArgument
        );
        assert!(last_error().contains("7 bits"));
        assert_eq!(
            mi_detect(inst, MiDetector::Ml, 0, 0, 0, ptr::null_mut(), 8, ptr::null_mut()),
            MiStatus::NullPointer
        );
        assert_eq!(
            mi_detect(
                ptr::null(),
                MiDetector::Ml,
                0,
                0,
                0,
                bits.as_mut_ptr(),
                8,
                ptr::null_mut()
            ),
            MiStatus::NullPointer
        );
        assert_eq!(mi_instance_bit_count(ptr::null()), 0);
        assert!(mi_instance_sigma_sq(inst) > 0.0);
        mi_instance_free(inst);
        mi_instance_free(ptr::null_mut());
    }

    // rank-deficient channel: second column zero
    let h = [1.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0];
    let y = [1.0, 0.0, 0.5, 0.0];
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(
            mi_instance_from_data(2, 2, 2, h.as_ptr(), y.as_ptr(), 0.0, &mut inst),
            MiStatus::Ok
        );
        let mut bits = [0u8; 2];
        assert_eq!(
            mi_detect(inst, MiDetector::Zf, 0, 0, 0, bits.as_mut_ptr(), 2, ptr::null_mut()),
            MiStatus::SingularChannel
        );
        mi_instance_free(inst);
        let bad = [f64::INFINITY, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        assert_eq!(
            mi_instance_from_data(2, 2, 2, bad.as_ptr(), y.as_ptr(), 0.0, &mut inst),
            MiStatus::InvalidArgument
        );
        assert_eq!(
            mi_instance_from_data(2, 2, 2, ptr::null(), y.as_ptr(), 0.0, &mut inst),
            MiStatus::NullPointer
        );
    }
}

#[test]
fn stochastic_detectors_are_seed_deterministic() {
    let inst = generate(8, 4, 4.0, 21);
    let run = |seed| {
        let mut bits = [0u8; 16];
        assert_eq!(
            unsafe {
                mi_detect(
                    inst,
                    MiDetector::Dpim,
                    2,
                    20,
                    seed,
                    bits.as_mut_ptr(),
                    16,
                    ptr::null_mut(),
                )
            },
            MiStatus::Ok
        );
        bits
    };
    assert_eq!(run(5), run(5));
    unsafe { mi_instance_free(inst) };
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mimo_ising.h")).unwrap();
    for name in [
        "MI_STATUS_OK = 0",
        "typedef struct MiInstance MiInstance;",
        "mi_instance_generate(",
        "mi_instance_from_data(",
        "mi_instance_free(",
        "mi_detect(",
        "mi_last_error_message(",
        "mi_ber_upper_bound(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

/// Compiles and runs a C program against the generated header and the static
/// library when a C compiler is available.
#[test]
fn c_program_links_and_runs() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let target = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = target.join("libmimo_ising_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = std::process::Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
