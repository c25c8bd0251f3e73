//! C ABI over the core pipeline: NIfTI volume I/O, phantom generation, and
//! radiomics feature extraction behind opaque handles.
//!
//! Conventions:
//! - every fallible call returns a [`FibraStatus`]; on failure the message is
//!   retrievable with `fibra_last_error` (thread-local, valid until the next
//!   failing call on the same thread);
//! - handles are created by `fibra_*` constructors and must be released with
//!   the matching `fibra_*_free`; passing null where a handle is required
//!   yields `FIBRA_STATUS_NULL_ARGUMENT`, never a crash;
//! - strings cross the boundary as NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::PathBuf;

use fibra::phantom::{generate_phantom, PhantomSpec};
use fibra::radiomics::{extract_all, ExtractConfig, FeatureVector};
use fibra::volume_io::{read_mask, read_volume, write_volume, Mask, Volume};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FibraStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// File could not be read or written.
    Io = 3,
    /// Input parsed but violated a precondition (bad header, empty mask, ...).
    BadData = 4,
    /// A numeric routine failed.
    Compute = 5,
}

/// Opaque scalar volume handle.
pub struct FibraVolume {
    inner: Volume,
}

/// Opaque binary mask handle.
pub struct FibraMask {
    inner: Mask,
}

/// Opaque ordered feature table handle.
pub struct FibraFeatures {
    names: Vec<CString>,
    values: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: FibraStatus, msg: impl AsRef<str>) -> FibraStatus {
    let msg = msg.as_ref().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap());
    status
}

/// Message of the most recent failure on this thread. Never null; empty
/// before any failure. The pointer is invalidated by the next failure.
#[no_mangle]
pub extern "C" fn fibra_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fibra_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn path_arg(path: *const c_char) -> Result<PathBuf, FibraStatus> {
    if path.is_null() {
        return Err(fail(FibraStatus::NullArgument, "path is null"));
    }
    let s = unsafe { CStr::from_ptr(path) };
    match s.to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(FibraStatus::InvalidUtf8, "path is not UTF-8")),
    }
}

unsafe fn out_arg<'a, T>(out: *mut T) -> Result<&'a mut T, FibraStatus> {
    if out.is_null() {
        return Err(fail(FibraStatus::NullArgument, "output pointer is null"));
    }
    Ok(&mut *out)
}

/// Read a single-file NIfTI-1 volume.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fibra_volume_read(
    path: *const c_char,
    out: *mut *mut FibraVolume,
) -> FibraStatus {
    let (path, out) = match (path_arg(path), out_arg(out)) {
        (Ok(p), Ok(o)) => (p, o),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match read_volume(&path) {
        Ok(v) => {
            *out = Box::into_raw(Box::new(FibraVolume { inner: v }));
            FibraStatus::Ok
        }
        Err(e) => fail(FibraStatus::BadData, e.to_string()),
    }
}

/// Write a volume as little-endian float32 NIfTI-1.
///
/// # Safety
/// `vol` must be a live handle and `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fibra_volume_write(
    vol: *const FibraVolume,
    path: *const c_char,
) -> FibraStatus {
    if vol.is_null() {
        return fail(FibraStatus::NullArgument, "volume is null");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match write_volume(&path, &(*vol).inner) {
        Ok(()) => FibraStatus::Ok,
        Err(e) => fail(FibraStatus::Io, e.to_string()),
    }
}

/// Grid dimensions of a volume.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fibra_volume_dims(
    vol: *const FibraVolume,
    nx: *mut u64,
    ny: *mut u64,
    nz: *mut u64,
) -> FibraStatus {
    if vol.is_null() {
        return fail(FibraStatus::NullArgument, "volume is null");
    }
    let (ox, oy, oz) = match (out_arg(nx), out_arg(ny), out_arg(nz)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => return fail(FibraStatus::NullArgument, "dims output pointer is null"),
    };
    let d = (*vol).inner.dims;
    *ox = d.0 as u64;
    *oy = d.1 as u64;
    *oz = d.2 as u64;
    FibraStatus::Ok
}

/// # Safety
/// `vol` must be a handle from this library or null (a no-op).
#[no_mangle]
pub unsafe extern "C" fn fibra_volume_free(vol: *mut FibraVolume) {
    if !vol.is_null() {
        drop(Box::from_raw(vol));
    }
}

/// Read a NIfTI-1 file as a binary mask (nonzero voxels are inside).
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fibra_mask_read(
    path: *const c_char,
    out: *mut *mut FibraMask,
) -> FibraStatus {
    let (path, out) = match (path_arg(path), out_arg(out)) {
        (Ok(p), Ok(o)) => (p, o),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    match read_mask(&path) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(FibraMask { inner: m }));
            FibraStatus::Ok
        }
        Err(e) => fail(FibraStatus::BadData, e.to_string()),
    }
}

/// Number of voxels inside the mask.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fibra_mask_count(mask: *const FibraMask, out: *mut u64) -> FibraStatus {
    if mask.is_null() {
        return fail(FibraStatus::NullArgument, "mask is null");
    }
    match out_arg(out) {
        Ok(o) => {
            *o = (*mask).inner.count() as u64;
            FibraStatus::Ok
        }
        Err(s) => s,
    }
}

/// # Safety
/// `mask` must be a handle from this library or null (a no-op).
#[no_mangle]
pub unsafe extern "C" fn fibra_mask_free(mask: *mut FibraMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

/// Generate one synthetic case with the default phantom geometry.
/// `label` 1 adds lesions, 0 does not. Any of the three outputs may be null
/// to skip it.
///
/// # Safety
/// Non-null outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fibra_phantom_generate(
    label: u8,
    seed: u64,
    out_volume: *mut *mut FibraVolume,
    out_roi: *mut *mut FibraMask,
    out_lesion: *mut *mut FibraMask,
) -> FibraStatus {
    if label > 1 {
        return fail(FibraStatus::BadData, "label must be 0 or 1");
    }
    let spec = PhantomSpec::default();
    match generate_phantom(&spec, label, seed) {
        Ok((v, roi, lesion)) => {
            if !out_volume.is_null() {
                *out_volume = Box::into_raw(Box::new(FibraVolume { inner: v }));
            }
            if !out_roi.is_null() {
                *out_roi = Box::into_raw(Box::new(FibraMask { inner: roi }));
            }
            if !out_lesion.is_null() {
                *out_lesion = Box::into_raw(Box::new(FibraMask { inner: lesion }));
            }
            FibraStatus::Ok
        }
        Err(e) => fail(FibraStatus::Compute, e.to_string()),
    }
}

/// Extract the canonical 111-feature vector from a volume restricted to a
/// mask, using `ng` gray levels (pass 0 for the default of 32).
///
/// # Safety
/// `vol` and `mask` must be live handles, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fibra_features_extract(
    vol: *const FibraVolume,
    mask: *const FibraMask,
    ng: u32,
    out: *mut *mut FibraFeatures,
) -> FibraStatus {
    if vol.is_null() || mask.is_null() {
        return fail(FibraStatus::NullArgument, "volume or mask is null");
    }
    let out = match out_arg(out) {
        Ok(o) => o,
        Err(s) => return s,
    };
    let mut cfg = ExtractConfig::default();
    if ng > 0 {
        cfg.ng = ng as usize;
    }
    match extract_all(&(*vol).inner, &(*mask).inner, &cfg) {
        Ok(fv) => {
            *out = Box::into_raw(Box::new(features_handle(fv)));
            FibraStatus::Ok
        }
        Err(e) => fail(FibraStatus::BadData, e.to_string()),
    }
}

fn features_handle(fv: FeatureVector) -> FibraFeatures {
    let mut names = Vec::with_capacity(fv.pairs.len());
    let mut values = Vec::with_capacity(fv.pairs.len());
    for (name, value) in fv.pairs {
        names.push(CString::new(name).unwrap());
        values.push(value);
    }
    FibraFeatures { names, values }
}

/// Number of features in the table (111 for the canonical registry).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fibra_features_len(
    features: *const FibraFeatures,
    out: *mut u64,
) -> FibraStatus {
    if features.is_null() {
        return fail(FibraStatus::NullArgument, "features is null");
    }
    match out_arg(out) {
        Ok(o) => {
            *o = (*features).values.len() as u64;
            FibraStatus::Ok
        }
        Err(s) => s,
    }
}

/// Name of feature `index`, or null when out of range. The pointer stays
/// valid for the lifetime of the handle.
///
/// # Safety
/// `features` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fibra_features_name(
    features: *const FibraFeatures,
    index: u64,
) -> *const c_char {
    if features.is_null() {
        return std::ptr::null();
    }
    match (&(*features).names).get(index as usize) {
        Some(name) => name.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Value of feature `index`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fibra_features_value(
    features: *const FibraFeatures,
    index: u64,
    out: *mut f64,
) -> FibraStatus {
    if features.is_null() {
        return fail(FibraStatus::NullArgument, "features is null");
    }
    let out = match out_arg(out) {
        Ok(o) => o,
        Err(s) => return s,
    };
    match (&(*features).values).get(index as usize) {
        Some(&v) => {
            *out = v;
            FibraStatus::Ok
        }
        None => fail(FibraStatus::BadData, "feature index out of range"),
    }
}

/// # Safety
/// `features` must be a handle from this library or null (a no-op).
#[no_mangle]
pub unsafe extern "C" fn fibra_features_free(features: *mut FibraFeatures) {
    if !features.is_null() {
        drop(Box::from_raw(features));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    #[test]
    fn version_is_a_static_utf8_string() {
        let v = unsafe { CStr::from_ptr(fibra_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn null_arguments_set_status_and_message() {
        let mut out: *mut FibraVolume = ptr::null_mut();
        let status = unsafe { fibra_volume_read(ptr::null(), &mut out) };
        assert_eq!(status, FibraStatus::NullArgument);
        let msg = unsafe { CStr::from_ptr(fibra_last_error()) };
        assert!(!msg.to_bytes().is_empty());
        assert!(out.is_null());
    }

    #[test]
    fn read_failure_reports_bad_data() {
        let path = CString::new("/nonexistent/volume.nii").unwrap();
        let mut out: *mut FibraVolume = ptr::null_mut();
        let status = unsafe { fibra_volume_read(path.as_ptr(), &mut out) };
        assert_eq!(status, FibraStatus::BadData);
        assert!(out.is_null());
    }

    #[test]
    fn phantom_roundtrip_through_files_and_features() {
        let dir = tempfile::tempdir().unwrap();
        let vol_path = CString::new(
            dir.path().join("case.nii").to_str().unwrap().to_string(),
        )
        .unwrap();

        let mut vol: *mut FibraVolume = ptr::null_mut();
        let mut roi: *mut FibraMask = ptr::null_mut();
        let status =
            unsafe { fibra_phantom_generate(1, 5, &mut vol, &mut roi, ptr::null_mut()) };
        assert_eq!(status, FibraStatus::Ok);

        let (mut nx, mut ny, mut nz) = (0u64, 0u64, 0u64);
        unsafe {
            assert_eq!(
                fibra_volume_dims(vol, &mut nx, &mut ny, &mut nz),
                FibraStatus::Ok
            );
        }
        assert_eq!((nx, ny, nz), (64, 64, 64));

        unsafe {
            assert_eq!(fibra_volume_write(vol, vol_path.as_ptr()), FibraStatus::Ok);
        }
        let mut reread: *mut FibraVolume = ptr::null_mut();
        unsafe {
            assert_eq!(
                fibra_volume_read(vol_path.as_ptr(), &mut reread),
                FibraStatus::Ok
            );
        }

        let mut feats: *mut FibraFeatures = ptr::null_mut();
        unsafe {
            assert_eq!(
                fibra_features_extract(reread, roi, 0, &mut feats),
                FibraStatus::Ok
            );
        }
        let mut len = 0u64;
        unsafe {
            assert_eq!(fibra_features_len(feats, &mut len), FibraStatus::Ok);
        }
        assert_eq!(len, 111);

        let name = unsafe { CStr::from_ptr(fibra_features_name(feats, 0)) };
        assert_eq!(name.to_str().unwrap(), "firstorder_Energy");
        assert!(unsafe { fibra_features_name(feats, len) }.is_null());

        let mut value = f64::NAN;
        unsafe {
            assert_eq!(fibra_features_value(feats, 0, &mut value), FibraStatus::Ok);
        }
        assert!(value.is_finite());

        unsafe {
            fibra_features_free(feats);
            fibra_volume_free(reread);
            fibra_volume_free(vol);
            fibra_mask_free(roi);
            // Free of null is a documented no-op.
            fibra_volume_free(ptr::null_mut());
        }
    }

    #[test]
    fn empty_mask_is_rejected_not_crashed() {
        let mut vol: *mut FibraVolume = ptr::null_mut();
        let mut lesion: *mut FibraMask = ptr::null_mut();
        // A negative case has an empty lesion mask.
        let status =
            unsafe { fibra_phantom_generate(0, 5, &mut vol, ptr::null_mut(), &mut lesion) };
        assert_eq!(status, FibraStatus::Ok);
        let mut feats: *mut FibraFeatures = ptr::null_mut();
        let status = unsafe { fibra_features_extract(vol, lesion, 0, &mut feats) };
        assert_eq!(status, FibraStatus::BadData);
        assert!(feats.is_null());
        unsafe {
            fibra_volume_free(vol);
            fibra_mask_free(lesion);
        }
    }
}
