//! C interface to the palm library.
//!
//! Objects are opaque handles created and freed through this interface.
//! Every fallible call returns a [`PalmStatus`]; on failure
//! [`palm_last_error`] describes what went wrong on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use palm::format::{Meta, PartitionFile};
use palm::geometry::{snap_to_grid, Axis, Dataset2D, GridSpec};
use palm::palm::{FitResult, PalmConfig, SampleSpace};
use palm::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PalmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfBounds = 3,
    Internal = 4,
}

/// First splitting direction of a fit.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PalmDirection {
    Vertical = 0,
    Horizontal = 1,
}

/// Axis-aligned rectangle in data coordinates.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PalmRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

/// Points snapped to a lattice.
pub struct PalmDataset(Dataset2D);

/// A fitted histogram.
pub struct PalmFit {
    fit: FitResult,
    k_max: usize,
    direction: PalmDirection,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn fail(status: PalmStatus, message: &str) -> PalmStatus {
    set_error(message);
    status
}

fn from_error(e: Error) -> PalmStatus {
    let status = match e {
        Error::OutOfBounds { .. } => PalmStatus::OutOfBounds,
        Error::InvalidArgument(_) | Error::InvalidPartition(_) | Error::Parse { .. } => PalmStatus::InvalidArgument,
        Error::Io(_) | Error::Json(_) => PalmStatus::Internal,
    };
    fail(status, &e.to_string())
}

fn guarded(f: impl FnOnce() -> PalmStatus) -> PalmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == PalmStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(PalmStatus::Internal, "internal panic"),
    }
}

/// Message for the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn palm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a dataset from `n` coordinate pairs. With `auto_space` set, the
/// sample space is the smallest lattice rectangle covering the points and
/// `x0..y1` are ignored; otherwise it is `[x0, x1] x [y0, y1]`.
///
/// # Safety
/// `xs` and `ys` must point to `n` readable doubles (or be null when `n` is
/// 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn palm_dataset_new(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    epsilon: f64,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    auto_space: bool,
    out: *mut *mut PalmDataset,
) -> PalmStatus {
    guarded(|| {
        if out.is_null() || (n > 0 && (xs.is_null() || ys.is_null())) {
            return fail(PalmStatus::NullPointer, "null argument");
        }
        let points: Vec<[f64; 2]> = if n == 0 {
            Vec::new()
        } else {
            let (xs, ys) = (std::slice::from_raw_parts(xs, n), std::slice::from_raw_parts(ys, n));
            xs.iter().zip(ys).map(|(&x, &y)| [x, y]).collect()
        };
        let grid = if auto_space {
            GridSpec::covering(&points, epsilon)
        } else {
            GridSpec::new(epsilon, [x0, y0], [x1 - x0, y1 - y0])
        };
        let data = match grid.and_then(|g| snap_to_grid(&points, &g)) {
            Ok(d) => d,
            Err(e) => return from_error(e),
        };
        *out = Box::into_raw(Box::new(PalmDataset(data)));
        PalmStatus::Ok
    })
}

/// # Safety
/// `dataset` must come from [`palm_dataset_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn palm_dataset_free(dataset: *mut PalmDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn palm_dataset_len(dataset: *const PalmDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.0.len())
}

/// Fits a histogram over the dataset's sample space.
///
/// # Safety
/// `dataset` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn palm_fit(
    dataset: *const PalmDataset,
    k_max: usize,
    direction: PalmDirection,
    out: *mut *mut PalmFit,
) -> PalmStatus {
    guarded(|| {
        let Some(ds) = dataset.as_ref() else {
            return fail(PalmStatus::NullPointer, "null dataset");
        };
        if out.is_null() {
            return fail(PalmStatus::NullPointer, "null output");
        }
        let axis = match direction {
            PalmDirection::Vertical => Axis::Vertical,
            PalmDirection::Horizontal => Axis::Horizontal,
        };
        let config = match PalmConfig::new(k_max) {
            Ok(c) => c.with_direction(axis).with_sample_space(SampleSpace::Grid),
            Err(e) => return from_error(e),
        };
        match palm::palm::palm_fit(&ds.0, &config) {
            Ok(fit) => {
                *out = Box::into_raw(Box::new(PalmFit { fit, k_max, direction }));
                PalmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `fit` must come from [`palm_fit`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn palm_fit_free(fit: *mut PalmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of regions, or 0 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn palm_fit_region_count(fit: *const PalmFit) -> usize {
    fit.as_ref().map_or(0, |f| f.fit.partition.len())
}

/// Code length of the data under the fitted histogram, in bits; NaN for a
/// null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn palm_fit_total_bits(fit: *const PalmFit) -> f64 {
    fit.as_ref().map_or(f64::NAN, |f| f.fit.code_length.total_bits)
}

unsafe fn region_arg<'a>(fit: *const PalmFit, region: usize) -> Result<&'a PalmFit, PalmStatus> {
    let f = fit.as_ref().ok_or_else(|| fail(PalmStatus::NullPointer, "null fit"))?;
    if region >= f.fit.partition.len() {
        return Err(fail(
            PalmStatus::OutOfBounds,
            &format!("region {region} out of range ({} regions)", f.fit.partition.len()),
        ));
    }
    Ok(f)
}

/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn palm_fit_region_density(fit: *const PalmFit, region: usize, out: *mut f64) -> PalmStatus {
    guarded(|| {
        let f = match region_arg(fit, region) {
            Ok(f) => f,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(PalmStatus::NullPointer, "null output");
        }
        *out = f.fit.densities.values()[region];
        PalmStatus::Ok
    })
}

/// Number of points in a region.
///
/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn palm_fit_region_count_points(fit: *const PalmFit, region: usize, out: *mut usize) -> PalmStatus {
    guarded(|| {
        let f = match region_arg(fit, region) {
            Ok(f) => f,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(PalmStatus::NullPointer, "null output");
        }
        *out = f.fit.partition.regions()[region].count();
        PalmStatus::Ok
    })
}

/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn palm_fit_region_rect_count(fit: *const PalmFit, region: usize, out: *mut usize) -> PalmStatus {
    guarded(|| {
        let f = match region_arg(fit, region) {
            Ok(f) => f,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(PalmStatus::NullPointer, "null output");
        }
        *out = f.fit.partition.regions()[region].rects().len();
        PalmStatus::Ok
    })
}

/// Rectangle `index` of a region, in data coordinates.
///
/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn palm_fit_region_rect(
    fit: *const PalmFit,
    region: usize,
    index: usize,
    out: *mut PalmRect,
) -> PalmStatus {
    guarded(|| {
        let f = match region_arg(fit, region) {
            Ok(f) => f,
            Err(s) => return s,
        };
        if out.is_null() {
            return fail(PalmStatus::NullPointer, "null output");
        }
        let rects = f.fit.partition.regions()[region].rects();
        let Some(r) = rects.get(index) else {
            return fail(
                PalmStatus::OutOfBounds,
                &format!("rect {index} out of range ({} rects)", rects.len()),
            );
        };
        let grid = f.fit.partition.grid();
        let [a, b] = [grid.to_coord([r.x0, r.y0]), grid.to_coord([r.x1, r.y1])];
        *out = PalmRect { x0: a[0], y0: a[1], x1: b[0], y1: b[1] };
        PalmStatus::Ok
    })
}

/// The fit as a partition JSON document. Free the string with
/// [`palm_string_free`].
///
/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn palm_fit_to_json(fit: *const PalmFit, out: *mut *mut c_char) -> PalmStatus {
    guarded(|| {
        let Some(f) = fit.as_ref() else {
            return fail(PalmStatus::NullPointer, "null fit");
        };
        if out.is_null() {
            return fail(PalmStatus::NullPointer, "null output");
        }
        let meta = Meta {
            n: f.fit.data.len(),
            total_bits: Some(f.fit.code_length.total_bits),
            k_max: Some(f.k_max),
            direction: Some(match f.direction {
                PalmDirection::Vertical => "v".into(),
                PalmDirection::Horizontal => "h".into(),
            }),
            seed: None,
        };
        let json = match PartitionFile::from_partition(&f.fit.partition, &f.fit.densities, meta).to_json() {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        *out = CString::new(json).expect("JSON has no NUL bytes").into_raw();
        PalmStatus::Ok
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn palm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// log2 COMP(n, k): the parametric complexity of a k-bin multinomial.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn palm_log_comp(n: usize, k: usize, out: *mut f64) -> PalmStatus {
    guarded(|| {
        if out.is_null() {
            return fail(PalmStatus::NullPointer, "null output");
        }
        if k < 1 {
            return fail(PalmStatus::InvalidArgument, "k must be at least 1");
        }
        match palm::nml::log_comp(n, k) {
            Ok(t) => {
                *out = t.get(k);
                PalmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn palm_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(s) => s,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}
