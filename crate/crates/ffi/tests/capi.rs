use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use distmorse_ffi::*;

const CIRCLE3: &str = r#"{"nvars":2,"terms":[{"exp":[2,0],"coef":1},{"exp":[0,2],"coef":1},{"exp":[0,0],"coef":-9}]}"#;
const SHIFTED: &str = r#"{"nvars":2,"terms":[{"exp":[2,0],"coef":1},{"exp":[0,2],"coef":1},{"exp":[1,0],"coef":-2}]}"#;

fn last_error() -> String {
    let p = dm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn poly_roundtrip() {
    let json = CString::new(CIRCLE3).unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(dm_poly_from_json(json.as_ptr(), &mut p), DmStatus::Ok);
        let mut n = 0;
        assert_eq!(dm_poly_nvars(p, &mut n), DmStatus::Ok);
        assert_eq!(n, 2);
        let mut v = 0.0;
        assert_eq!(
            dm_poly_eval(p, [3.0, 4.0].as_ptr(), 2, &mut v),
            DmStatus::Ok
        );
        assert_eq!(v, 16.0);
        let mut g = [0.0; 2];
        assert_eq!(
            dm_poly_grad(p, [3.0, 4.0].as_ptr(), 2, g.as_mut_ptr()),
            DmStatus::Ok
        );
        assert_eq!(g, [6.0, 8.0]);
        assert_eq!(
            dm_poly_eval(p, [1.0].as_ptr(), 1, &mut v),
            DmStatus::DimensionMismatch
        );
        assert!(last_error().contains("dimension"));
        dm_poly_free(p);
    }
}

#[test]
fn bad_inputs_set_status_and_message() {
    let bad = CString::new(r#"{"nvars":2,"terms":[{"exp":[1,0]}]}"#).unwrap();
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(
            dm_poly_from_json(bad.as_ptr(), &mut p),
            DmStatus::InvalidInput
        );
        assert!(p.is_null());
        assert!(last_error().contains("coef"));
        assert_eq!(
            dm_poly_from_json(ptr::null(), &mut p),
            DmStatus::NullPointer
        );
        let invalid = [0xffu8, 0];
        assert_eq!(
            dm_poly_from_json(invalid.as_ptr().cast(), &mut p),
            DmStatus::InvalidUtf8
        );
        let mut d = 0;
        assert_eq!(dm_degree_bound(0, 1, 1, &mut d), DmStatus::InvalidInput);
        dm_poly_free(ptr::null_mut());
        dm_report_free(ptr::null_mut());
        dm_string_free(ptr::null_mut());
    }
}

#[test]
fn degree_bound_example() {
    let mut d = 0;
    assert_eq!(unsafe { dm_degree_bound(5, 6, 2, &mut d) }, DmStatus::Ok);
    assert_eq!(d, 4);
}

#[test]
fn analyze_and_inspect() {
    let req = format!(r#"{{"surface":{CIRCLE3},"target":{SHIFTED},"starts":48}}"#);
    let req = CString::new(req).unwrap();
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(dm_analyze(req.as_ptr(), 0, &mut r), DmStatus::Ok);
        assert_eq!(dm_report_exit_code(r), 0);
        let mut len = 0;
        assert_eq!(dm_report_len(r, &mut len), DmStatus::Ok);
        assert_eq!(len, 2);
        let mut c = DmCriticalPoint::default();
        assert_eq!(dm_report_point(r, 1, &mut c), DmStatus::Ok);
        assert_eq!((c.k, c.iota, c.nondegenerate, c.dim), (0, 1, 1, 2));
        assert!((c.value - 3.0).abs() < 1e-8);
        let mut x = [0.0; 2];
        assert_eq!(
            dm_report_point_x(r, 1, x.as_mut_ptr(), 1),
            DmStatus::BufferTooSmall
        );
        assert_eq!(dm_report_point_x(r, 1, x.as_mut_ptr(), 2), DmStatus::Ok);
        assert!((x[0] + 3.0).abs() < 1e-8);
        assert_eq!(dm_report_point(r, 5, &mut c), DmStatus::OutOfRange);
        let mut s = ptr::null_mut();
        assert_eq!(dm_report_json(r, &mut s), DmStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        dm_string_free(s);
        assert!(text.contains("\"hypersurface-pair\""));
        assert!(!text.contains("elapsed_ms"));
        dm_report_free(r);

        // The report's inputs block reruns to the same report.
        let again = CString::new(text.clone()).unwrap();
        assert_eq!(dm_analyze(again.as_ptr(), 0, &mut r), DmStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(dm_report_json(r, &mut s), DmStatus::Ok);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), text);
        dm_string_free(s);
        dm_report_free(r);
    }
}

#[test]
fn analyze_reports_general_position_errors() {
    let req = CString::new(r#"{"ambient":2,"cloud":{"dim":2,"points":[[1,1],[1,1]]}}"#).unwrap();
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(dm_analyze(req.as_ptr(), 0, &mut r), DmStatus::InvalidInput);
        assert!(r.is_null());
    }
    assert!(last_error().contains("general position"));
}

#[test]
fn duality_from_censuses() {
    let xy = CString::new(
        r#"{"counts":[{"k":0,"iota":0,"n":1},{"k":0,"iota":1,"n":1}],"chi_x":0,"chi_y":1}"#,
    )
    .unwrap();
    let yx = CString::new(r#"{"counts":[{"k":0,"iota":0,"n":1}],"chi_x":1,"chi_y":0}"#).unwrap();
    let (mut l, mut r, mut h) = (0, 0, 0);
    unsafe {
        assert_eq!(
            dm_check_duality_json(xy.as_ptr(), yx.as_ptr(), &mut l, &mut r, &mut h),
            DmStatus::Ok
        );
        assert_eq!((l, r, h), (1, 1, 1));
        assert_eq!(
            dm_check_duality_json(xy.as_ptr(), xy.as_ptr(), &mut l, &mut r, &mut h),
            DmStatus::InvalidInput
        );
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/distmorse.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "dm_analyze",
        "dm_report_point_x",
        "dm_check_duality_json",
        "dm_last_error_message",
        "DM_STATUS_OK",
    ] {
        assert!(text.contains(name), "{name} missing from the header");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"distmorse.h\"\nint main(void) { DmCriticalPoint c; DmStatus s = DM_STATUS_OK; (void)c; return (int)s; }\n",
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
