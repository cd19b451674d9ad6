//! C ABI over the blockspec library.
//!
//! Foreign callers work with two opaque handles — model parameters and a
//! realized graph sample — plus plain buffers they allocate themselves.
//! Every fallible entry point returns a [`BspStatus`]; out-parameters are
//! written only on `Ok`. Handles must be released with the matching `_free`
//! function exactly once; all functions tolerate null pointers by returning
//! `NullPointer` rather than crashing.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use blockspec::clustering;
use blockspec::embedding::{self, KnowledgeMode};
use blockspec::evaluation;
use blockspec::model::SbmParams;
use blockspec::sampler::{self, GraphSample, Seed};
use blockspec::selection::{self, ClustererConfig};
use blockspec::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BspStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or inconsistent.
    InvalidArgument = 2,
    /// The model parameters violate an invariant.
    InvalidModel = 3,
    /// No part count satisfied the residual threshold.
    NoKFound = 4,
    /// Text input could not be parsed.
    ParseError = 5,
    /// An unexpected internal failure.
    InternalError = 6,
}

/// Clustering feature choice.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BspMode {
    Rows = 0,
    Columns = 1,
    Neither = 2,
}

impl From<BspMode> for KnowledgeMode {
    fn from(mode: BspMode) -> Self {
        match mode {
            BspMode::Rows => KnowledgeMode::RowsDistinct,
            BspMode::Columns => KnowledgeMode::ColumnsDistinct,
            BspMode::Neither => KnowledgeMode::Neither,
        }
    }
}

/// Opaque handle: validated model parameters.
pub struct BspParams(SbmParams);

/// Opaque handle: a realized graph sample.
pub struct BspSample(GraphSample);

fn status_of(err: &Error) -> BspStatus {
    match err {
        Error::RhoInvalid(_)
        | Error::EntryOutOfRange(_)
        | Error::SymmetryViolation(_)
        | Error::NotIdentifiable { .. }
        | Error::DegenerateFactors(_) => BspStatus::InvalidModel,
        Error::NoKFound { .. } => BspStatus::NoKFound,
        Error::Parse(_) | Error::Io(_) => BspStatus::ParseError,
        _ => BspStatus::InvalidArgument,
    }
}

fn guarded(body: impl FnOnce() -> BspStatus) -> BspStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => BspStatus::InternalError,
    }
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn bsp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses model parameters from TOML text (keys `k`, `rho`, `modalities`,
/// `directed`).
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On `Ok` the caller owns the handle and must release it with
/// [`bsp_params_free`].
#[no_mangle]
pub unsafe extern "C" fn bsp_params_parse_toml(
    text: *const c_char,
    out: *mut *mut BspParams,
) -> BspStatus {
    if text.is_null() || out.is_null() {
        return BspStatus::NullPointer;
    }
    guarded(|| {
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return BspStatus::ParseError;
        };
        match blockspec::io::parse_params_toml(text) {
            Ok(params) => {
                *out = Box::into_raw(Box::new(BspParams(params)));
                BspStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Builds model parameters from raw buffers.
///
/// `rho` has `k` entries; `modalities` holds `num_modalities` row-major
/// `k x k` matrices back to back.
///
/// # Safety
/// The buffers must be readable at the stated lengths and `out` must be a
/// valid pointer. On `Ok` the caller owns the handle.
#[no_mangle]
pub unsafe extern "C" fn bsp_params_new(
    k: usize,
    rho: *const f64,
    num_modalities: usize,
    modalities: *const f64,
    directed: bool,
    out: *mut *mut BspParams,
) -> BspStatus {
    if rho.is_null() || modalities.is_null() || out.is_null() {
        return BspStatus::NullPointer;
    }
    if k == 0 || num_modalities == 0 {
        return BspStatus::InvalidArgument;
    }
    guarded(|| {
        let rho = slice::from_raw_parts(rho, k).to_vec();
        let flat = slice::from_raw_parts(modalities, num_modalities * k * k);
        let mats: Vec<ndarray::Array2<f64>> = (0..num_modalities)
            .map(|s| {
                ndarray::Array2::from_shape_fn((k, k), |(i, j)| flat[s * k * k + i * k + j])
            })
            .collect();
        match SbmParams::new(rho, mats, directed) {
            Ok(params) => {
                *out = Box::into_raw(Box::new(BspParams(params)));
                BspStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a parameters handle.
///
/// # Safety
/// `params` must come from this library and not have been freed already;
/// null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bsp_params_free(params: *mut BspParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Number of blocks; zero for a null handle.
///
/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bsp_params_k(params: *const BspParams) -> usize {
    params.as_ref().map_or(0, |p| p.0.k())
}

/// Number of modalities; zero for a null handle.
///
/// # Safety
/// `params` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bsp_params_num_modalities(params: *const BspParams) -> usize {
    params.as_ref().map_or(0, |p| p.0.num_modalities())
}

/// Samples a graph of `n` vertices.
///
/// # Safety
/// `params` must be a live handle; `out` must be valid. On `Ok` the caller
/// owns the sample handle and must release it with [`bsp_sample_free`].
#[no_mangle]
pub unsafe extern "C" fn bsp_sample_generate(
    params: *const BspParams,
    n: usize,
    seed_value: u64,
    seed_stream: u64,
    out: *mut *mut BspSample,
) -> BspStatus {
    let Some(params) = params.as_ref() else {
        return BspStatus::NullPointer;
    };
    if out.is_null() {
        return BspStatus::NullPointer;
    }
    guarded(|| {
        let sample = sampler::sample_graph(n, &params.0, Seed::new(seed_value, seed_stream));
        *out = Box::into_raw(Box::new(BspSample(sample)));
        BspStatus::Ok
    })
}

/// Releases a sample handle.
///
/// # Safety
/// `sample` must come from this library and not have been freed already;
/// null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bsp_sample_free(sample: *mut BspSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Number of vertices; zero for a null handle.
///
/// # Safety
/// `sample` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bsp_sample_n(sample: *const BspSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.n())
}

/// Copies the realized block memberships into `out` (`n` entries).
///
/// # Safety
/// `out` must be writable for `bsp_sample_n(sample)` entries.
#[no_mangle]
pub unsafe extern "C" fn bsp_sample_tau(sample: *const BspSample, out: *mut usize) -> BspStatus {
    let Some(sample) = sample.as_ref() else {
        return BspStatus::NullPointer;
    };
    if out.is_null() {
        return BspStatus::NullPointer;
    }
    let tau = sample.0.tau();
    slice::from_raw_parts_mut(out, tau.len()).copy_from_slice(tau);
    BspStatus::Ok
}

/// Copies one adjacency matrix into `out` (`n * n` entries, row-major 0/1).
///
/// # Safety
/// `out` must be writable for `n * n` bytes.
#[no_mangle]
pub unsafe extern "C" fn bsp_sample_adjacency(
    sample: *const BspSample,
    modality: usize,
    out: *mut u8,
) -> BspStatus {
    let Some(sample) = sample.as_ref() else {
        return BspStatus::NullPointer;
    };
    if out.is_null() {
        return BspStatus::NullPointer;
    }
    if modality >= sample.0.num_modalities() {
        return BspStatus::InvalidArgument;
    }
    let n = sample.0.n();
    let a = sample.0.adjacency(modality);
    let dst = slice::from_raw_parts_mut(out, n * n);
    for i in 0..n {
        for j in 0..n {
            dst[i * n + j] = a[[i, j]];
        }
    }
    BspStatus::Ok
}

unsafe fn features(
    sample: &BspSample,
    r: usize,
    mode: BspMode,
) -> Result<ndarray::Array2<f64>, Error> {
    let r_list = vec![r; sample.0.num_modalities()];
    let (_, z) = embedding::embed_sample(&sample.0, &r_list, mode.into())?;
    Ok(z)
}

/// Partitions the sample into `k` blocks; writes one 0-based label per
/// vertex into `labels_out`.
///
/// # Safety
/// `labels_out` must be writable for `bsp_sample_n(sample)` entries.
#[no_mangle]
pub unsafe extern "C" fn bsp_partition(
    sample: *const BspSample,
    r: usize,
    mode: BspMode,
    k: usize,
    restarts: usize,
    seed_value: u64,
    seed_stream: u64,
    labels_out: *mut usize,
) -> BspStatus {
    let Some(sample) = sample.as_ref() else {
        return BspStatus::NullPointer;
    };
    if labels_out.is_null() {
        return BspStatus::NullPointer;
    }
    if k == 0 || restarts == 0 {
        return BspStatus::InvalidArgument;
    }
    guarded(|| match features(sample, r, mode) {
        Ok(z) => {
            let clustering =
                clustering::lloyd_cluster(&z, k, restarts, Seed::new(seed_value, seed_stream));
            let labels = clustering::assignment_from_clustering(&clustering);
            slice::from_raw_parts_mut(labels_out, labels.len()).copy_from_slice(&labels);
            BspStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Residual-threshold estimate of the number of blocks.
///
/// `k_max = 0` selects the default cap `min(2 * R_total + 2, n)`.
///
/// # Safety
/// `k_out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bsp_select_k_hat(
    sample: *const BspSample,
    r: usize,
    mode: BspMode,
    xi: f64,
    k_max: usize,
    restarts: usize,
    seed_value: u64,
    seed_stream: u64,
    k_out: *mut usize,
) -> BspStatus {
    let Some(sample) = sample.as_ref() else {
        return BspStatus::NullPointer;
    };
    if k_out.is_null() {
        return BspStatus::NullPointer;
    }
    if restarts == 0 {
        return BspStatus::InvalidArgument;
    }
    guarded(|| match features(sample, r, mode) {
        Ok(z) => {
            let k_max = if k_max == 0 {
                selection::default_k_max(r * sample.0.num_modalities(), sample.0.n())
            } else {
                k_max
            };
            let cfg =
                ClustererConfig::new(Seed::new(seed_value, seed_stream)).with_restarts(restarts);
            match selection::estimate_k_hat(&z, xi, k_max, &cfg) {
                Ok(outcome) => match outcome.k_hat {
                    Some(k) => {
                        *k_out = k;
                        BspStatus::Ok
                    }
                    None => BspStatus::NoKFound,
                },
                Err(e) => status_of(&e),
            }
        }
        Err(e) => status_of(&e),
    })
}

/// Part-size/centroid-separation estimate of the number of blocks; writes
/// zero when no part count qualifies.
///
/// # Safety
/// `k_out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bsp_select_k_check(
    sample: *const BspSample,
    r: usize,
    mode: BspMode,
    zeta: f64,
    theta: f64,
    restarts: usize,
    seed_value: u64,
    seed_stream: u64,
    k_out: *mut usize,
) -> BspStatus {
    let Some(sample) = sample.as_ref() else {
        return BspStatus::NullPointer;
    };
    if k_out.is_null() {
        return BspStatus::NullPointer;
    }
    if restarts == 0 {
        return BspStatus::InvalidArgument;
    }
    guarded(|| match features(sample, r, mode) {
        Ok(z) => {
            let cfg =
                ClustererConfig::new(Seed::new(seed_value, seed_stream)).with_restarts(restarts);
            match selection::estimate_k_check(&z, zeta, theta, &cfg) {
                Ok(outcome) => {
                    *k_out = outcome.k_check;
                    BspStatus::Ok
                }
                Err(e) => status_of(&e),
            }
        }
        Err(e) => status_of(&e),
    })
}

/// Minimum number of label disagreements over bijections of the label sets.
///
/// # Safety
/// `tau` and `tau_hat` must be readable for `n` entries each; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bsp_misassignment_count(
    tau: *const usize,
    tau_hat: *const usize,
    n: usize,
    out: *mut usize,
) -> BspStatus {
    if tau.is_null() || tau_hat.is_null() || out.is_null() {
        return BspStatus::NullPointer;
    }
    guarded(|| {
        let tau = slice::from_raw_parts(tau, n);
        let tau_hat = slice::from_raw_parts(tau_hat, n);
        match evaluation::misassignment_count(tau, tau_hat) {
            Ok(count) => {
                *out = count;
                BspStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}
