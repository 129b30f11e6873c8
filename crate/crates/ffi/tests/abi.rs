use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use ris_cvqkd_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(rcq_last_error()) }.to_string_lossy().into_owned()
}

fn small_link(distance: f64) -> *mut RcqLink {
    let json = CString::new(
        r#"{"system": {"tx_antennas": 2, "rx_antennas": 2, "ris_elements_x": 2, "ris_elements_y": 2},
            "pso": {"particles": 8, "iterations": 10}}"#,
    )
    .unwrap();
    let mut link = ptr::null_mut();
    let status = unsafe { rcq_link_from_config_json(json.as_ptr(), distance, &mut link) };
    assert_eq!(status, RcqStatus::Ok, "{}", last_error());
    assert!(!link.is_null());
    link
}

#[test]
fn evaluate_and_optimize_round_trip() {
    let link = small_link(0.3);
    let mut k = 0usize;
    assert_eq!(unsafe { rcq_link_ris_elements(link, &mut k) }, RcqStatus::Ok);
    assert_eq!(k, 4);

    let zeros = vec![0.0; k];
    let mut rate = RcqRate::default();
    let status = unsafe { rcq_link_evaluate(link, RcqScenario::Global, zeros.as_ptr(), k, 0.5, 0.5, &mut rate) };
    assert_eq!(status, RcqStatus::Ok, "{}", last_error());
    assert!(rate.mutual_information > 0.0 && rate.holevo >= 0.0);
    assert!((rate.skr - (rate.mutual_information - rate.holevo)).abs() < 1e-12);
    assert_eq!(last_error(), "");

    let mut phases = vec![f64::NAN; k];
    let (mut eta_a, mut eta_b) = (f64::NAN, f64::NAN);
    let mut best = RcqRate::default();
    let status = unsafe {
        rcq_link_optimize(link, RcqScenario::Direct, 0, 0, 5, phases.as_mut_ptr(), k, &mut eta_a, &mut eta_b, &mut best)
    };
    assert_eq!(status, RcqStatus::Ok, "{}", last_error());
    assert!(phases.iter().all(|p| p.abs() <= std::f64::consts::PI));
    assert!((0.0..=1.0).contains(&eta_a) && (0.0..=1.0).contains(&eta_b));

    // the reported optimum is reproducible through evaluate
    let mut again = RcqRate::default();
    let status = unsafe { rcq_link_evaluate(link, RcqScenario::Direct, phases.as_ptr(), k, eta_a, eta_b, &mut again) };
    assert_eq!(status, RcqStatus::Ok);
    assert_eq!(again, best);
    unsafe { rcq_link_free(link) };
}

#[test]
fn errors_map_to_status_codes() {
    let link = small_link(0.3);
    let mut rate = RcqRate::default();
    let bad = [4.0, 0.0, 0.0, 0.0];
    let status = unsafe { rcq_link_evaluate(link, RcqScenario::Direct, bad.as_ptr(), 4, 0.5, 0.5, &mut rate) };
    assert_eq!(status, RcqStatus::Contract);
    assert!(last_error().contains("outside"));

    let status = unsafe { rcq_link_evaluate(link, RcqScenario::Direct, bad.as_ptr(), 4, 0.5, 0.5, ptr::null_mut()) };
    assert_eq!(status, RcqStatus::NullPointer);

    let mut phases = [0.0; 3];
    let (mut a, mut b) = (0.0, 0.0);
    let status = unsafe {
        rcq_link_optimize(link, RcqScenario::Global, 0, 0, 1, phases.as_mut_ptr(), 3, &mut a, &mut b, &mut rate)
    };
    assert_eq!(status, RcqStatus::InvalidArgument);
    unsafe { rcq_link_free(link) };

    let typo = CString::new(r#"{"sytem": {}}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { rcq_link_from_config_json(typo.as_ptr(), 1.0, &mut out) }, RcqStatus::Config);
    assert!(out.is_null());
    assert!(last_error().contains("sytem"));

    assert_eq!(unsafe { rcq_link_default(0.0, &mut out) }, RcqStatus::InvalidArgument);
    assert_eq!(unsafe { rcq_link_default(1e-4, &mut out) }, RcqStatus::Passivity);
    assert_eq!(unsafe { rcq_link_from_config_json(ptr::null(), 1.0, &mut out) }, RcqStatus::NullPointer);
    unsafe { rcq_link_free(ptr::null_mut()) };
}

#[test]
fn scalar_helpers() {
    let mut s = 0.0;
    assert_eq!(unsafe { rcq_ho_entropy(2.0, &mut s) }, RcqStatus::Ok);
    assert!((s - 1.377_443_751_081_734_3).abs() < 1e-14);
    assert_eq!(unsafe { rcq_ho_entropy(0.5, &mut s) }, RcqStatus::Unphysical);

    let mut rate = RcqRate::default();
    assert_eq!(unsafe { rcq_global_subchannel_skr(0.5, 1000.0, 1.0, 0.01, &mut rate) }, RcqStatus::Ok);
    assert!((rate.mutual_information - 4.411_602_808_056_073).abs() < 1e-12);
    assert_eq!(unsafe { rcq_global_subchannel_skr(0.5, 1000.0, 0.5, 0.01, &mut rate) }, RcqStatus::Contract);

    let version = unsafe { CStr::from_ptr(rcq_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn default_link_is_usable() {
    let mut link = ptr::null_mut();
    assert_eq!(unsafe { rcq_link_default(1.0, &mut link) }, RcqStatus::Ok);
    let mut k = 0;
    assert_eq!(unsafe { rcq_link_ris_elements(link, &mut k) }, RcqStatus::Ok);
    assert_eq!(k, 64);
    unsafe { rcq_link_free(link) };
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/ris_cvqkd.h");
    let source = Path::new(env!("CARGO_TARGET_TMPDIR")).join("header_check.c");
    std::fs::write(
        &source,
        format!(
            "#include \"{}\"\nint main(void) {{ RcqRate r; RcqLink *l = 0; \
             return rcq_link_evaluate(l, RCQ_SCENARIO_GLOBAL, 0, 0, 0.5, 0.5, &r) == RCQ_STATUS_OK; }}\n",
            header.display()
        ),
    )
    .unwrap();
    let out = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&source)
        .output()
        .expect("a C compiler is on PATH");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
