use std::ffi::{CStr, CString};
use std::ptr;

use palm_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(palm_last_error()) }.to_string_lossy().into_owned()
}

fn quadrant_points() -> (Vec<f64>, Vec<f64>) {
    // Dense lower-left block on a sparse background.
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..40 {
        for j in 0..40 {
            xs.push(i as f64 * 0.025);
            ys.push(j as f64 * 0.025);
        }
    }
    for i in 0..30 {
        for j in 0..30 {
            for _ in 0..4 {
                xs.push(i as f64 * 0.01);
                ys.push(j as f64 * 0.01);
            }
        }
    }
    (xs, ys)
}

#[test]
fn fit_and_inspect_regions() {
    let (xs, ys) = quadrant_points();
    unsafe {
        let mut ds = ptr::null_mut();
        let s = palm_dataset_new(xs.as_ptr(), ys.as_ptr(), xs.len(), 0.005, 0.0, 0.0, 1.0, 1.0, false, &mut ds);
        assert_eq!(s, PalmStatus::Ok, "{}", last_error());
        assert_eq!(palm_dataset_len(ds), xs.len());

        let mut fit = ptr::null_mut();
        assert_eq!(palm_fit(ds, 20, PalmDirection::Vertical, &mut fit), PalmStatus::Ok);
        let k = palm_fit_region_count(fit);
        assert!(k >= 2, "{k} regions");
        assert!(palm_fit_total_bits(fit).is_finite());

        let mut mass = 0.0;
        let mut points = 0;
        for r in 0..k {
            let (mut f, mut count, mut nrect) = (0.0, 0usize, 0usize);
            assert_eq!(palm_fit_region_density(fit, r, &mut f), PalmStatus::Ok);
            assert_eq!(palm_fit_region_count_points(fit, r, &mut count), PalmStatus::Ok);
            assert_eq!(palm_fit_region_rect_count(fit, r, &mut nrect), PalmStatus::Ok);
            points += count;
            for i in 0..nrect {
                let mut rect = PalmRect { x0: 0.0, y0: 0.0, x1: 0.0, y1: 0.0 };
                assert_eq!(palm_fit_region_rect(fit, r, i, &mut rect), PalmStatus::Ok);
                assert!(rect.x1 > rect.x0 && rect.y1 > rect.y0);
                mass += f * (rect.x1 - rect.x0) * (rect.y1 - rect.y0);
            }
        }
        assert!((mass - 1.0).abs() < 1e-9);
        assert_eq!(points, xs.len());

        let mut f = 0.0;
        assert_eq!(palm_fit_region_density(fit, k, &mut f), PalmStatus::OutOfBounds);
        assert!(last_error().contains("out of range"));

        let mut json = ptr::null_mut();
        assert_eq!(palm_fit_to_json(fit, &mut json), PalmStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        palm_string_free(json);
        let file = palm::format::PartitionFile::from_json(&text).unwrap();
        assert_eq!(file.regions.len(), k);
        assert_eq!(file.meta.k_max, Some(20));

        palm_fit_free(fit);
        palm_dataset_free(ds);
    }
}

#[test]
fn errors_are_reported() {
    let xs = [0.5, 2.0];
    let ys = [0.5, 0.5];
    unsafe {
        let mut ds = ptr::null_mut();
        let s = palm_dataset_new(xs.as_ptr(), ys.as_ptr(), 2, 0.01, 0.0, 0.0, 1.0, 1.0, false, &mut ds);
        assert_eq!(s, PalmStatus::OutOfBounds);
        assert!(ds.is_null());
        assert!(!last_error().is_empty());

        let s = palm_dataset_new(xs.as_ptr(), ys.as_ptr(), 2, -1.0, 0.0, 0.0, 1.0, 1.0, true, &mut ds);
        assert_eq!(s, PalmStatus::InvalidArgument);

        let s = palm_dataset_new(ptr::null(), ys.as_ptr(), 2, 0.01, 0.0, 0.0, 1.0, 1.0, true, &mut ds);
        assert_eq!(s, PalmStatus::NullPointer);

        let s = palm_dataset_new(xs.as_ptr(), ys.as_ptr(), 2, 0.01, 0.0, 0.0, 0.0, 0.0, true, &mut ds);
        assert_eq!(s, PalmStatus::Ok);
        let mut fit = ptr::null_mut();
        assert_eq!(palm_fit(ds, 1, PalmDirection::Horizontal, &mut fit), PalmStatus::InvalidArgument);
        assert_eq!(palm_fit(ptr::null(), 10, PalmDirection::Horizontal, &mut fit), PalmStatus::NullPointer);
        assert_eq!(palm_fit(ds, 10, PalmDirection::Horizontal, &mut fit), PalmStatus::Ok);
        assert_eq!(palm_fit_region_count(fit), 1);
        palm_fit_free(fit);
        palm_dataset_free(ds);

        palm_dataset_free(ptr::null_mut());
        palm_fit_free(ptr::null_mut());
        assert_eq!(palm_fit_region_count(ptr::null()), 0);
    }
}

#[test]
fn empty_dataset_fits_one_region() {
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(palm_dataset_new(ptr::null(), ptr::null(), 0, 0.1, 0.0, 0.0, 1.0, 1.0, false, &mut ds), PalmStatus::Ok);
        let mut fit = ptr::null_mut();
        assert_eq!(palm_fit(ds, 5, PalmDirection::Vertical, &mut fit), PalmStatus::Ok);
        assert_eq!(palm_fit_region_count(fit), 1);
        let mut f = 0.0;
        palm_fit_region_density(fit, 0, &mut f);
        assert!((f - 1.0).abs() < 1e-12);
        palm_fit_free(fit);
        palm_dataset_free(ds);
    }
}

#[test]
fn log_comp_matches_known_values() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(palm_log_comp(2, 2, &mut v), PalmStatus::Ok);
        assert!((v - 2.5f64.log2()).abs() < 1e-12);
        assert_eq!(palm_log_comp(1, 3, &mut v), PalmStatus::Ok);
        assert!((v - 3f64.log2()).abs() < 1e-12);
        assert_eq!(palm_log_comp(5, 0, &mut v), PalmStatus::InvalidArgument);
        assert_eq!(palm_log_comp(5, 2, ptr::null_mut()), PalmStatus::NullPointer);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(palm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    let _ = CString::new(v.to_bytes()).unwrap();
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/palm.h")).unwrap();
    for name in [
        "PALM_H",
        "typedef struct PalmDataset PalmDataset",
        "typedef struct PalmFit PalmFit",
        "PALM_STATUS_OK = 0",
        "PALM_STATUS_OUT_OF_BOUNDS",
        "palm_dataset_new",
        "palm_fit(",
        "palm_fit_region_rect(",
        "palm_last_error",
        "palm_string_free",
        "palm_log_comp",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
