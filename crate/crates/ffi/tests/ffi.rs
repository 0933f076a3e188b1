use affine_cs_ffi::*;
use std::ffi::{c_char, CStr};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { acs_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n < buf.len());
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn scalars() {
    let mut xi = 0.0;
    assert_eq!(unsafe { acs_xi_star(3.0, 0, &mut xi) }, AcsStatus::Ok);
    assert!((xi - 3.758_252_930_319_821).abs() < 1e-13);
    let mut c = 0.0;
    assert_eq!(unsafe { acs_c0(3.0, 0, &mut c) }, AcsStatus::Ok);
    assert!((c - xi / 3.0).abs() < 1e-13);
    assert_eq!(last_error(), "");
    let v = unsafe { CStr::from_ptr(acs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn error_codes() {
    let mut xi = 0.0;
    assert_eq!(
        unsafe { acs_xi_star(0.4, 0, &mut xi) },
        AcsStatus::InvalidInput
    );
    assert!(last_error().contains("nu"));
    assert_eq!(
        unsafe { acs_xi_star(3.0, 0, ptr::null_mut()) },
        AcsStatus::NullPointer
    );
    assert_eq!(
        unsafe { acs_cs_expectation_h(ptr::null(), &mut xi) },
        AcsStatus::NullPointer
    );
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { acs_cs_new(-1.0, 0.0, 3.0, 0, &mut h) },
        AcsStatus::InvalidInput
    );
    assert!(h.is_null());
    let mut m = AcsSu11::default();
    assert_eq!(
        unsafe { acs_su11_matrix(0.0, 1.0, &mut m) },
        AcsStatus::InvalidInput
    );
    let mut tiny = [1 as c_char; 4];
    let n = unsafe { acs_last_error_message(tiny.as_mut_ptr(), tiny.len()) };
    assert!(n > 3);
    assert_eq!(tiny[3], 0);
    unsafe { acs_cs_free(ptr::null_mut()) };
}

#[test]
fn coherent_state_handles() {
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(acs_cs_new(2.0, 1.0, 3.0, 0, &mut a), AcsStatus::Ok);
        assert_eq!(acs_cs_new(2.5, 0.5, 3.0, 0, &mut b), AcsStatus::Ok);
        let mut s = AcsComplex::default();
        assert_eq!(acs_cs_overlap(a, a, &mut s), AcsStatus::Ok);
        assert!((s.re - 1.0).abs() < 1e-10 && s.im.abs() < 1e-10);
        assert_eq!(acs_cs_overlap(a, b, &mut s), AcsStatus::Ok);
        assert!(s.re * s.re + s.im * s.im < 1.0);
        let mut psi = AcsComplex::default();
        assert_eq!(acs_cs_wavefunction(a, 1.0, &mut psi), AcsStatus::Ok);
        assert!(psi.re.is_finite() && psi.im.is_finite());
        assert_eq!(
            acs_cs_wavefunction(a, -1.0, &mut psi),
            AcsStatus::InvalidInput
        );
        let mut rho = 0.0;
        let mut c = 0.0;
        assert_eq!(
            acs_husimi_density(3.0, 2.0, 1.0, a, &mut rho),
            AcsStatus::Ok
        );
        acs_c0(3.0, 0, &mut c);
        assert!((rho - 1.0 / (2.0 * std::f64::consts::PI * c)).abs() < 1e-8);
        let mut e = 0.0;
        assert_eq!(acs_cs_expectation_h(a, &mut e), AcsStatus::Ok);
        assert!(e > 0.0);
        acs_cs_free(a);
        acs_cs_free(b);
    }
}

#[test]
fn evolution() {
    let (mut q, mut p) = (0.0, 0.0);
    assert_eq!(
        unsafe { acs_flow(3.0, 0, 5.0, -4.0, 0.0, &mut q, &mut p) },
        AcsStatus::Ok
    );
    assert!((q - 5.0).abs() < 1e-14 && (p + 4.0).abs() < 1e-14);
    let mut f = AcsComplex::default();
    let mut delta = 1.0;
    assert_eq!(
        unsafe { acs_fidelity(3.0, 0, 5.0, -4.0, 1.0, 64, &mut f, &mut delta) },
        AcsStatus::Ok
    );
    assert!(((f.re - 1.0).powi(2) + f.im * f.im).sqrt() < 1e-5, "{f:?}");
    assert!(delta < 1e-6);
    assert_eq!(
        unsafe { acs_fidelity(3.0, 0, 5.0, -4.0, 1.0, 64, &mut f, ptr::null_mut()) },
        AcsStatus::Ok
    );
}

#[test]
fn su11() {
    let mut m = AcsSu11::default();
    assert_eq!(unsafe { acs_su11_matrix(2.0, 1.0, &mut m) }, AcsStatus::Ok);
    assert!((m.alpha.re - 1.25).abs() < 1e-15 && (m.alpha.im + 1.0).abs() < 1e-15);
    assert!((m.beta.re - 1.0).abs() < 1e-15 && (m.beta.im - 0.75).abs() < 1e-15);
    let det = m.alpha.re.powi(2) + m.alpha.im.powi(2) - m.beta.re.powi(2) - m.beta.im.powi(2);
    assert!((det - 1.0).abs() < 1e-14);
    let (mut l, mut r) = (AcsCartan::default(), AcsCartan::default());
    unsafe {
        assert_eq!(acs_su11_cartan(2.0, 1.0, 0, &mut l), AcsStatus::Ok);
        assert_eq!(acs_su11_cartan(2.0, 1.0, 1, &mut r), AcsStatus::Ok);
    }
    assert!((l.theta + r.theta).abs() < 1e-15);
    assert!((l.delta - (1.25f64.powi(2) + 1.0).sqrt()).abs() < 1e-14);
}

const C_PROGRAM: &str = r#"
#include "affine_cs.h"
#include <stdio.h>

int main(void) {
    double xi = 0.0;
    if (acs_xi_star(3.0, 0, &xi) != ACS_STATUS_OK) return 1;
    AcsCoherentState *h = NULL;
    if (acs_cs_new(2.0, 1.0, 3.0, 0, &h) != ACS_STATUS_OK) return 2;
    AcsComplex s;
    if (acs_cs_overlap(h, h, &s) != ACS_STATUS_OK) return 3;
    acs_cs_free(h);
    if (acs_xi_star(0.1, 0, &xi) != ACS_STATUS_INVALID_INPUT) return 4;
    char buf[128];
    if (acs_last_error_message(buf, sizeof buf) == 0) return 5;
    printf("%.12f %.12f\n", xi, s.re);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

#[test]
fn header_compiles_and_links() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(include.join("affine_cs.h")).unwrap();
    for f in [
        "acs_cs_new",
        "acs_cs_free",
        "acs_fidelity",
        "acs_su11_matrix",
        "acs_last_error_message",
    ] {
        assert!(header.contains(f), "{f}");
    }
    let lib = target_dir().join("libaffine_cs_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("3.758252930320 1.0000000000"), "{text}");
}
