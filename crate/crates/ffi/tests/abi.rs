use std::ffi::{CStr, CString};
use std::ptr;

use unitary_fisher_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    let n = unsafe { uf_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

struct Handle(*mut UfPovm);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { uf_povm_free(self.0) }
    }
}

fn make(f: impl FnOnce(*mut *mut UfPovm) -> UfStatus) -> Handle {
    let mut p = ptr::null_mut();
    assert_eq!(f(&mut p), UfStatus::Ok);
    assert!(!p.is_null());
    Handle(p)
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(uf_version()) };
    assert!(!v.to_bytes().is_empty());
}

#[test]
fn singlet_qfi_matches_closed_form() {
    let (a, t) = (0.9f64, 1.2f64);
    let mut h = [0.0; 9];
    assert_eq!(
        unsafe { uf_qfi_su2(a, t, 0.4, h.as_mut_ptr(), 9) },
        UfStatus::Ok
    );
    let diag = [
        4.0,
        4.0 * a.sin().powi(2),
        4.0 * (a.sin() * t.sin()).powi(2),
    ];
    for i in 0..3 {
        for j in 0..3 {
            let e = if i == j { diag[i] } else { 0.0 };
            assert!((h[i * 3 + j] - e).abs() < 1e-10);
        }
    }
}

#[test]
fn family_merits() {
    let cases: [(Handle, f64); 4] = [
        (make(|o| unsafe { uf_povm_bell(o) }), 3.0),
        (make(|o| unsafe { uf_povm_reduced_bell(2, o) }), 1.0),
        (
            make(|o| unsafe { uf_povm_linear_optics_bell(1, 4, o) }),
            2.0,
        ),
        (make(|o| unsafe { uf_povm_local_spin(o) }), 1.0),
    ];
    for (h, expected) in cases {
        let mut m = 0.0;
        assert_eq!(
            unsafe { uf_merit_su2(h.0, 0.7, 1.1, 0.5, &mut m) },
            UfStatus::Ok
        );
        assert!((m - expected).abs() < 1e-9, "{m} vs {expected}");
        assert_eq!(unsafe { uf_povm_dim(h.0) }, 4);
    }
}

#[test]
fn fisher_is_below_qfi() {
    let h = make(|o| unsafe { uf_povm_random_product(2, 3, 5, o) });
    let mut i = [0.0; 9];
    let mut q = [0.0; 9];
    unsafe {
        assert_eq!(
            uf_fisher_su2(h.0, 0.7, 1.1, 0.5, i.as_mut_ptr(), 9),
            UfStatus::Ok
        );
        assert_eq!(uf_qfi_su2(0.7, 1.1, 0.5, q.as_mut_ptr(), 9), UfStatus::Ok);
    }
    for k in 0..3 {
        assert!(i[k * 4] <= q[k * 4] + 1e-9);
    }
}

#[test]
fn maximally_entangled_qutrit() {
    let origin = [0.0; 8];
    let mut h = [0.0; 64];
    unsafe {
        assert_eq!(
            uf_qfi_exp_maxent(3, origin.as_ptr(), 8, h.as_mut_ptr(), 64),
            UfStatus::Ok
        );
    }
    for i in 0..8 {
        for j in 0..8 {
            let e = if i == j { 4.0 / 3.0 } else { 0.0 };
            assert!((h[i * 8 + j] - e).abs() < 1e-9);
        }
    }
    let theta = [0.05; 8];
    let p = make(|o| unsafe { uf_povm_random_product(3, 2, 9, o) });
    assert_eq!(unsafe { uf_povm_len(p.0) }, 18);
    let mut m = 0.0;
    assert_eq!(
        unsafe { uf_merit_exp_maxent(p.0, 3, theta.as_ptr(), 8, &mut m) },
        UfStatus::Ok
    );
    assert!((m - 3.0).abs() < 1e-9);
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("p.json").to_str().unwrap()).unwrap();
    let a = make(|o| unsafe { uf_povm_linear_optics_bell(1, 2, o) });
    assert_eq!(unsafe { uf_povm_save(a.0, path.as_ptr()) }, UfStatus::Ok);
    let b = make(|o| unsafe { uf_povm_load(path.as_ptr(), o) });
    assert_eq!(unsafe { uf_povm_len(b.0) }, unsafe { uf_povm_len(a.0) });
    let (mut ma, mut mb) = (0.0, 0.0);
    unsafe {
        uf_merit_su2(a.0, 0.8, 1.0, 2.0, &mut ma);
        uf_merit_su2(b.0, 0.8, 1.0, 2.0, &mut mb);
    }
    assert!((ma - mb).abs() < 1e-12);
}

#[test]
fn errors_map_to_codes() {
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(uf_povm_reduced_bell(0, &mut out), UfStatus::InvalidArgument);
        assert!(out.is_null());
        assert_eq!(uf_povm_bell(ptr::null_mut()), UfStatus::NullPointer);
    }
    let mut h = [0.0; 9];
    assert_eq!(
        unsafe { uf_qfi_su2(0.0, 1.0, 1.0, h.as_mut_ptr(), 9) },
        UfStatus::Domain
    );
    assert!(last_error().contains("alpha"));
    assert_eq!(
        unsafe { uf_qfi_su2(1.0, 1.0, 1.0, h.as_mut_ptr(), 4) },
        UfStatus::BufferTooSmall
    );
    let mut m = 0.0;
    assert_eq!(
        unsafe { uf_merit_su2(ptr::null(), 1.0, 1.0, 1.0, &mut m) },
        UfStatus::NullPointer
    );
    let p = make(|o| unsafe { uf_povm_random_product(3, 1, 1, o) });
    assert_eq!(
        unsafe { uf_merit_su2(p.0, 1.0, 1.0, 1.0, &mut m) },
        UfStatus::DimensionMismatch
    );
    let theta = [0.1; 3];
    assert_eq!(
        unsafe { uf_qfi_exp_maxent(3, theta.as_ptr(), 3, h.as_mut_ptr(), 9) },
        UfStatus::DimensionMismatch
    );
    let missing = CString::new("/nonexistent/dir/p.json").unwrap();
    assert_eq!(
        unsafe { uf_povm_load(missing.as_ptr(), &mut out) },
        UfStatus::Io
    );
}

#[test]
fn success_clears_error_and_null_handles_are_safe() {
    let mut h = [0.0; 9];
    unsafe {
        uf_qfi_su2(0.0, 1.0, 1.0, h.as_mut_ptr(), 9);
        assert_eq!(uf_qfi_su2(1.0, 1.0, 1.0, h.as_mut_ptr(), 9), UfStatus::Ok);
        assert_eq!(uf_last_error_message(ptr::null_mut(), 0), 0);
        uf_povm_free(ptr::null_mut());
        assert_eq!(uf_povm_len(ptr::null()), 0);
        assert_eq!(uf_povm_dim(ptr::null()), 0);
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/unitary_fisher.h");
    for name in [
        "uf_version",
        "uf_last_error_message",
        "uf_povm_bell",
        "uf_povm_reduced_bell",
        "uf_povm_linear_optics_bell",
        "uf_povm_local_spin",
        "uf_povm_random_product",
        "uf_povm_load",
        "uf_povm_save",
        "uf_povm_free",
        "uf_povm_len",
        "uf_povm_dim",
        "uf_qfi_su2",
        "uf_fisher_su2",
        "uf_merit_su2",
        "uf_qfi_exp_maxent",
        "uf_merit_exp_maxent",
        "typedef struct UfPovm UfPovm",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
