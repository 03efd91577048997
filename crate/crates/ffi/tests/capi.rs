use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use ngcenter_ffi::*;

fn last_error() -> String {
    let p = ng_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn j6_1_pipeline_through_handles() {
    let inst = CString::new("J6_1").unwrap();
    let through = CString::new("supermodular").unwrap();
    let target = CString::new("smds1").unwrap();
    let mut p: *mut NgPipeline = ptr::null_mut();
    let st = unsafe { ng_pipeline_run(inst.as_ptr(), through.as_ptr(), target.as_ptr(), false, &mut p) };
    assert_eq!(st, NgStatus::Ok);
    assert!(ng_last_error().is_null());

    let mut n = 0usize;
    assert_eq!(unsafe { ng_pipeline_triple_count(p, &mut n) }, NgStatus::Ok);
    assert_eq!(n, 27);

    let (mut matched, mut conj, mut dev) = (false, true, f64::NAN);
    assert_eq!(
        unsafe { ng_pipeline_comparison(p, &mut matched, &mut conj, &mut dev) },
        NgStatus::Ok
    );
    assert!(matched && !conj && dev < 1e-6);

    let mut sd: *mut NgSuperData = ptr::null_mut();
    assert_eq!(unsafe { ng_pipeline_super(p, &mut sd) }, NgStatus::Ok);
    let mut r = 0usize;
    assert_eq!(unsafe { ng_super_rank(sd, &mut r) }, NgStatus::Ok);
    assert_eq!(r, 5);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { ng_super_t2(sd, 0, &mut re, &mut im) }, NgStatus::Ok);
    assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12);
    assert_eq!(unsafe { ng_super_s(sd, 5, 0, &mut re, &mut im) }, NgStatus::OutOfRange);

    let mut js: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(unsafe { ng_super_to_json(sd, &mut js) }, NgStatus::Ok);
    let text = unsafe { CStr::from_ptr(js) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"S_hat\""));
    unsafe {
        ng_string_free(js);
        ng_super_free(sd);
    }

    let mut md: *mut NgModularData = ptr::null_mut();
    assert_eq!(unsafe { ng_pipeline_center(p, &mut md) }, NgStatus::Ok);
    let mut rank = 0usize;
    let mut lambda = 0.0;
    unsafe {
        assert_eq!(ng_modular_rank(md, &mut rank), NgStatus::Ok);
        assert_eq!(ng_modular_lambda(md, &mut lambda), NgStatus::Ok);
    }
    assert_eq!(rank, 54);
    assert!((lambda - 6.0 * (10.0 * (4.0 + 15f64.sqrt())).sqrt()).abs() < 1e-9);

    // JSON round trip through the C surface.
    let mut mj: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(unsafe { ng_modular_to_json(md, &mut mj) }, NgStatus::Ok);
    let mut back: *mut NgModularData = ptr::null_mut();
    assert_eq!(unsafe { ng_modular_from_json(mj, &mut back) }, NgStatus::Ok);
    let (mut a, mut b) = ((0.0, 0.0), (0.0, 0.0));
    unsafe {
        ng_modular_s(md, 7, 40, &mut a.0, &mut a.1);
        ng_modular_s(back, 7, 40, &mut b.0, &mut b.1);
    }
    assert_eq!(a, b);
    let mut label: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(unsafe { ng_modular_label(md, 0, &mut label) }, NgStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(label) }.to_str().unwrap(), "A(0)");
    unsafe {
        ng_string_free(label);
        ng_string_free(mj);
        ng_modular_free(back);
        ng_modular_free(md);
        ng_pipeline_free(p);
    }
}

#[test]
fn mismatch_keeps_the_handle() {
    let inst = CString::new("J6_1").unwrap();
    let through = CString::new("supermodular").unwrap();
    let target = CString::new("smds2").unwrap();
    let mut p: *mut NgPipeline = ptr::null_mut();
    let st = unsafe { ng_pipeline_run(inst.as_ptr(), through.as_ptr(), target.as_ptr(), true, &mut p) };
    assert_eq!(st, NgStatus::Mismatch);
    assert!(!p.is_null());
    assert!(last_error().contains("no match"));
    unsafe { ng_pipeline_free(p) };
}

#[test]
fn errors_map_to_codes() {
    let mut md: *mut NgModularData = ptr::null_mut();
    let bad = CString::new("J7_9").unwrap();
    assert_eq!(
        unsafe { ng_center_from_instance(bad.as_ptr(), 240, &mut md) },
        NgStatus::InvalidArgument
    );
    assert!(last_error().contains("unknown instance"));

    let inst = CString::new("J6_1").unwrap();
    assert_eq!(
        unsafe { ng_center_from_instance(inst.as_ptr(), 7, &mut md) },
        NgStatus::StageFailure
    );
    assert!(last_error().contains("of 27 triples"));
    assert!(md.is_null());

    assert_eq!(
        unsafe { ng_center_from_instance(ptr::null(), 240, &mut md) },
        NgStatus::NullPointer
    );
    let mut r = 0usize;
    assert_eq!(unsafe { ng_modular_rank(ptr::null(), &mut r) }, NgStatus::NullPointer);

    let junk = CString::new("{\"labels\": 3}").unwrap();
    assert_eq!(unsafe { ng_modular_from_json(junk.as_ptr(), &mut md) }, NgStatus::Io);

    let through = CString::new("everything").unwrap();
    let mut p: *mut NgPipeline = ptr::null_mut();
    assert_eq!(
        unsafe { ng_pipeline_run(inst.as_ptr(), through.as_ptr(), ptr::null(), false, &mut p) },
        NgStatus::InvalidArgument
    );
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ngcenter.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
    for sym in [
        "ng_pipeline_run",
        "ng_modular_s",
        "ng_last_error",
        "NG_STATUS_STAGE_FAILURE",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"ngcenter.h\"\nint main(void) { NgModularData *m = 0; size_t r; return ng_modular_rank(m, &r) == NG_STATUS_NULL_POINTER ? 0 : 1; }\n",
    )
    .unwrap();
    let Ok(out) = Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-I")
        .arg(header.parent().unwrap())
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; header syntax not checked");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
