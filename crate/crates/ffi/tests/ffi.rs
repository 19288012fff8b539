use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use blindqkd_ffi::*;

fn config(protocol: u8, attack: BqAttack, rounds: u64) -> BqConfig {
    let mut c = unsafe {
        let mut c = std::mem::MaybeUninit::<BqConfig>::uninit();
        assert_eq!(bq_config_default(c.as_mut_ptr()), BqStatus::Ok);
        c.assume_init()
    };
    c.protocol = protocol;
    c.attack = attack;
    c.rounds = rounds;
    c.seed = 11;
    c
}

fn simulator(c: &BqConfig) -> *mut BqSimulator {
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { bq_simulator_new(c, &mut sim) }, BqStatus::Ok);
    assert!(!sim.is_null());
    sim
}

fn run(sim: *const BqSimulator, threads: u32) -> *mut BqReport {
    let mut report = ptr::null_mut();
    assert_eq!(
        unsafe { bq_simulator_run(sim, threads, &mut report) },
        BqStatus::Ok
    );
    report
}

fn json(report: *const BqReport) -> String {
    unsafe {
        let s = bq_report_to_json(report);
        assert!(!s.is_null());
        let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
        bq_string_free(s);
        out
    }
}

fn last_error() -> String {
    let p = bq_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn honest_protocol_one_has_zero_qber_and_no_guesses() {
    let sim = simulator(&config(1, BqAttack::None, 5000));
    let report = run(sim, 0);
    unsafe {
        let (mut rounds, mut aborted, mut qber, mut acc) = (0, 0, -1.0, 0.0);
        assert_eq!(
            bq_report_counts(report, &mut rounds, &mut aborted),
            BqStatus::Ok
        );
        assert_eq!((rounds, aborted), (5000, 0));
        assert_eq!(bq_report_qber(report, &mut qber), BqStatus::Ok);
        assert_eq!(qber, 0.0);
        assert_eq!(
            bq_report_eve_accuracy(report, &mut acc),
            BqStatus::Undefined
        );
        assert_eq!(bq_report_mi_ae(report, &mut acc), BqStatus::Undefined);
        bq_report_free(report);
        bq_simulator_free(sim);
    }
}

#[test]
fn impersonation_statistics_cross_the_boundary() {
    let sim = simulator(&config(2, BqAttack::Impersonation, 4000));
    let report = run(sim, 3);
    unsafe {
        let (mut qber, mut acc, mut mi_ab, mut mi_ae, mut detected) = (1.0, 0.0, 0.0, 0.0, true);
        assert_eq!(bq_report_qber(report, &mut qber), BqStatus::Ok);
        assert_eq!(bq_report_eve_accuracy(report, &mut acc), BqStatus::Ok);
        assert_eq!(bq_report_mi_ab(report, &mut mi_ab), BqStatus::Ok);
        assert_eq!(bq_report_mi_ae(report, &mut mi_ae), BqStatus::Ok);
        assert_eq!(bq_report_detected(report, &mut detected), BqStatus::Ok);
        assert_eq!((qber, acc, detected), (0.0, 1.0, false));
        assert_eq!(mi_ab, mi_ae);
        assert!(mi_ae > 0.99);
        bq_report_free(report);
        bq_simulator_free(sim);
    }
}

#[test]
fn report_json_matches_core_and_is_thread_invariant() {
    let cfg = config(1, BqAttack::InterceptResend, 3000);
    let sim = simulator(&cfg);
    let (a, b) = (run(sim, 1), run(sim, 4));
    let (ja, jb) = (json(a), json(b));
    assert_eq!(ja, jb);

    let core = blindqkd::Simulator::new(blindqkd::SimConfig::new(
        blindqkd::Protocol::One,
        blindqkd::StrategyKind::intercept_resend(),
        3000,
        11,
    ))
    .unwrap()
    .run()
    .unwrap()
    .to_json()
    .unwrap();
    assert_eq!(ja, core);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(bq_report_write_json(a, cpath.as_ptr()), BqStatus::Ok);
        bq_report_free(a);
        bq_report_free(b);
        bq_simulator_free(sim);
    }
    assert_eq!(
        std::fs::read_to_string(path).unwrap().trim_end(),
        ja.trim_end()
    );
}

#[test]
fn run_round_is_deterministic() {
    let sim = simulator(&config(2, BqAttack::None, 10));
    let mut r1 = std::mem::MaybeUninit::<BqRoundRecord>::uninit();
    let mut r2 = std::mem::MaybeUninit::<BqRoundRecord>::uninit();
    let (r1, r2) = unsafe {
        assert_eq!(
            bq_simulator_run_round(sim, 5, r1.as_mut_ptr()),
            BqStatus::Ok
        );
        assert_eq!(
            bq_simulator_run_round(sim, 5, r2.as_mut_ptr()),
            BqStatus::Ok
        );
        bq_simulator_free(sim);
        (r1.assume_init(), r2.assume_init())
    };
    assert_eq!(r1.round, 5);
    assert_eq!(r1.protocol, 2);
    assert_eq!(r1.k_bob, r1.k_alice);
    assert_eq!(r1.l, r1.s ^ r1.k_alice ^ r1.b);
    assert_eq!(r1.eve_guess, -1);
    assert!(!r1.aborted && !r1.bob_measurement_random);
    assert!(r1.theta2.is_finite());
    assert_eq!(r1.round, r2.round);
    assert_eq!(
        (r1.k_alice, r1.s, r1.b, r1.l),
        (r2.k_alice, r2.s, r2.b, r2.l)
    );
    assert_eq!(r1.phi.to_bits(), r2.phi.to_bits());
}

#[test]
fn errors_are_reported_with_codes_and_messages() {
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(
            bq_simulator_new(ptr::null(), &mut sim),
            BqStatus::NullPointer
        );
        let bad = config(3, BqAttack::None, 10);
        assert_eq!(bq_simulator_new(&bad, &mut sim), BqStatus::InvalidArgument);
        assert!(last_error().contains('3'));
        let bad = config(2, BqAttack::InterceptResend, 10);
        assert_eq!(bq_simulator_new(&bad, &mut sim), BqStatus::InvalidArgument);
        let bad = config(1, BqAttack::None, 0);
        assert_eq!(bq_simulator_new(&bad, &mut sim), BqStatus::InvalidArgument);
        let mut bad = config(1, BqAttack::None, 10);
        bad.threshold = 1.5;
        assert_eq!(bq_simulator_new(&bad, &mut sim), BqStatus::InvalidArgument);
        assert!(sim.is_null());
        assert_eq!(bq_report_qber(ptr::null(), &mut 0.0), BqStatus::NullPointer);
        assert!(bq_report_to_json(ptr::null()).is_null());
        bq_simulator_free(ptr::null_mut());
        bq_report_free(ptr::null_mut());
        bq_string_free(ptr::null_mut());
    }
    assert!(bq_born_probability(f64::NAN, 0.0).is_nan());
}

#[test]
fn enumerate_and_born_probability() {
    let mut v = BqVerdictSummary::default();
    unsafe {
        assert_eq!(
            bq_enumerate(1, BqAttack::Impersonation, 4, &mut v),
            BqStatus::Ok
        );
    }
    assert_eq!(v.total_cases, 4 * 8 * 8);
    assert_eq!(v.failed_cases, 0);
    unsafe {
        assert_eq!(
            bq_enumerate(1, BqAttack::None, 1, &mut v),
            BqStatus::InvalidArgument
        );
    }
    assert!((bq_born_probability(std::f64::consts::PI / 6.0, 0.0) - 0.75).abs() < 1e-12);
    assert!((bq_born_probability(0.3, 0.3) - 1.0).abs() < 1e-12);
    let version = unsafe { CStr::from_ptr(bq_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/blindqkd.h")).unwrap();
    for name in [
        "bq_last_error",
        "bq_version",
        "bq_config_default",
        "bq_simulator_new",
        "bq_simulator_free",
        "bq_simulator_run_round",
        "bq_simulator_run",
        "bq_report_free",
        "bq_report_counts",
        "bq_report_qber",
        "bq_report_eve_accuracy",
        "bq_report_mi_ab",
        "bq_report_mi_ae",
        "bq_report_detected",
        "bq_report_to_json",
        "bq_report_write_json",
        "bq_string_free",
        "bq_enumerate",
        "bq_born_probability",
        "typedef struct BqSimulator BqSimulator",
        "typedef struct BqReport BqReport",
        "BQ_STATUS_UNDEFINED",
    ] {
        assert!(header.contains(name), "header is missing {name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libblindqkd_ffi.a");
    lib.exists().then_some(lib)
}

fn have_cc() -> bool {
    Command::new("cc")
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success())
}

#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("skipping: static library not found next to the test binary");
        return;
    };
    if !have_cc() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(Path::new(&exe)).output().unwrap();
    assert!(
        out.status.success(),
        "smoke failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "c smoke ok");
}
