use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use bellkit_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe { bk_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn builtin(name: &str) -> *mut BkState {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bk_state_from_builtin(name.as_ptr(), &mut s) }, BkStatus::Ok);
    s
}

#[test]
fn builtin_state_criteria() {
    let s = builtin("eq21");
    let mut c = BkCriterion::default();
    assert_eq!(unsafe { bk_state_ccnr(s, &mut c) }, BkStatus::Ok);
    assert!((c.value - 6.0).abs() < 1e-9 && c.threshold == 4.0 && c.detected);
    let (mut min_eig, mut ppt) = (0.0, false);
    assert_eq!(unsafe { bk_state_ppt(s, &mut min_eig, &mut ppt) }, BkStatus::Ok);
    assert!(ppt && min_eig > -1e-10);
    let (mut da, mut db) = (0, 0);
    assert_eq!(unsafe { bk_state_dims(s, &mut da, &mut db) }, BkStatus::Ok);
    assert_eq!((da, db), (4, 4));
    assert_eq!(bk_last_error_length(), 0);
    unsafe { bk_state_free(s) };
}

#[test]
fn bell_state_witness_and_noise() {
    let p = [1.0, 0.0, 0.0, 0.0];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bk_state_from_probabilities(2, 2, p.as_ptr(), &mut s) }, BkStatus::Ok);
    let mut eps = 0.0;
    assert_eq!(unsafe { bk_state_noise_threshold(s, 1.0, 1.0, 1e-8, &mut eps) }, BkStatus::Ok);
    assert!((eps - 2.0 / 3.0).abs() < 1e-5);

    let mut w = ptr::null_mut();
    let mut value = 0.0;
    assert_eq!(unsafe { bk_witness_optimal(s, 1.0, 1.0, &mut w, &mut value) }, BkStatus::Ok);
    assert!(bk_is_detection(value));
    let mut again = 0.0;
    assert_eq!(unsafe { bk_witness_expectation(w, s, &mut again) }, BkStatus::Ok);
    assert!((again - value).abs() < 1e-10);

    let (mut re, mut im) = (vec![0.0; 16], vec![0.0; 16]);
    assert_eq!(unsafe { bk_witness_matrix(w, re.as_mut_ptr(), im.as_mut_ptr(), 16) }, BkStatus::Ok);
    for r in 0..4 {
        for c in 0..4 {
            assert!((re[r * 4 + c] - re[c * 4 + r]).abs() < 1e-12);
            assert!((im[r * 4 + c] + im[c * 4 + r]).abs() < 1e-12);
        }
    }
    assert_eq!(unsafe { bk_witness_matrix(w, re.as_mut_ptr(), im.as_mut_ptr(), 15) }, BkStatus::BufferTooSmall);
    assert!(last_error().contains("16"));

    let mut noisy = ptr::null_mut();
    assert_eq!(unsafe { bk_state_with_noise(s, 0.9, &mut noisy) }, BkStatus::Ok);
    let mut g = 0.0;
    let mut bound = 0.0;
    assert_eq!(unsafe { bk_state_ssc(noisy, 1.0, 1.0, &mut g, &mut bound) }, BkStatus::Ok);
    assert!(g > 0.0 && bound == 2.0);
    unsafe {
        bk_witness_free(w);
        bk_state_free(noisy);
        bk_state_free(s);
    }
}

#[test]
fn errors_set_the_thread_local_message() {
    let p = [0.5, 0.6, 0.0, 0.0];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bk_state_from_probabilities(2, 2, p.as_ptr(), &mut s) }, BkStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(bk_last_error_length() > 0);

    assert_eq!(unsafe { bk_state_from_probabilities(2, 2, ptr::null(), &mut s) }, BkStatus::NullPointer);
    assert_eq!(last_error(), "p is null");

    let name = CString::new("nope").unwrap();
    assert_eq!(unsafe { bk_state_from_builtin(name.as_ptr(), &mut s) }, BkStatus::InvalidArgument);
    assert!(last_error().contains("unknown builtin"));

    // The message is per thread.
    let other = std::thread::spawn(|| bk_last_error_length()).join().unwrap();
    assert_eq!(other, 0);

    let mut c = BkCriterion::default();
    assert_eq!(unsafe { bk_state_ccnr(ptr::null(), &mut c) }, BkStatus::NullPointer);

    // Truncation keeps the reported full length.
    let mut small = [0 as c_char; 4];
    let n = unsafe { bk_last_error_message(small.as_mut_ptr(), small.len()) };
    assert_eq!(n, "state is null".len());
    assert_eq!(unsafe { CStr::from_ptr(small.as_ptr()) }.to_str().unwrap(), "sta");
}

#[test]
fn diophantine_rows() {
    let mut count = 0;
    assert_eq!(unsafe { bk_diophantine(2, 12, ptr::null_mut(), 0, &mut count) }, BkStatus::BufferTooSmall);
    assert_eq!(count, 11);
    let mut rows = vec![BkDiophantine::default(); count];
    assert_eq!(unsafe { bk_diophantine(2, 12, rows.as_mut_ptr(), rows.len(), &mut count) }, BkStatus::Ok);
    assert_eq!((rows[0].d, rows[0].size, rows[0].k), (4, 6, 4));
    assert!((rows[1].ccnr_excess - 2.53197).abs() < 1e-4);
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(bk_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/bellkit.h");
    assert!(header.exists());
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["bk_state_from_probabilities", "bk_last_error_message", "bk_witness_free", "BK_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, syntax check skipped");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"bellkit.h\"\nint main(void) { BkState *s = 0; BkCriterion c; \
         return bk_state_ccnr(s, &c) == BK_STATUS_NULL_POINTER ? 0 : 1; }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}
