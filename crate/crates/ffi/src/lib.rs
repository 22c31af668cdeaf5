//! C ABI over the `hfce` core.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns an [`HfceStatus`]; on failure the message is
//! available from [`hfce_last_error`] on the same thread. Matrices cross the
//! boundary row-major.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use hfce::channel::{assemble_channel, generate_scene, CMatrix, HybridChannel};
use hfce::config::{DictionaryKind, ExperimentConfig};
use hfce::dictionary::{build_dictionary, PolarDictionary};
use hfce::measurement::{generate_combiner, observe};
use hfce::omp::{nmse_db, omp, OmpOptions, SparseEstimate};
use hfce::rng::{stream_rng, Stream};
use hfce::tensor_io::{read_tensor, write_tensor, ComplexTensor};
use hfce::Error;
use num_complex::{Complex32, Complex64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfceStatus {
    Ok = 0,
    InvalidArgument = 1,
    DegenerateGeometry = 2,
    ShapeMismatch = 3,
    Format = 4,
    Config = 5,
    Validation = 6,
    Io = 7,
    NullPointer = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HfceDictionaryKind {
    Polar = 0,
    Angular = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HfceComplex64 {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HfceComplex32 {
    pub re: f32,
    pub im: f32,
}

/// Array and OFDM numerology of a config.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HfceSystemInfo {
    pub n_antennas: usize,
    pub n_rf_chains: usize,
    pub n_pilot_slots: usize,
    pub n_subcarriers: usize,
    pub carrier_freq_hz: f64,
    pub wavelength_m: f64,
    pub spacing_m: f64,
    pub rayleigh_distance_m: f64,
}

pub struct HfceConfig(ExperimentConfig);
pub struct HfceDictionary(PolarDictionary);
pub struct HfceChannel(HybridChannel);
pub struct HfceEstimate(SparseEstimate);
pub struct HfceTensor(ComplexTensor);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NUL bytes stripped"));
}

fn status_of(e: &Error) -> HfceStatus {
    match e {
        Error::InvalidArgument(_) => HfceStatus::InvalidArgument,
        Error::DegenerateGeometry { .. } => HfceStatus::DegenerateGeometry,
        Error::ShapeMismatch { .. } => HfceStatus::ShapeMismatch,
        Error::Format { .. } => HfceStatus::Format,
        Error::Config(_) => HfceStatus::Config,
        Error::Validation(_) => HfceStatus::Validation,
        Error::Io { .. } => HfceStatus::Io,
    }
}

struct Fail(HfceStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HfceStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HfceStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HfceStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HfceStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(HfceStatus::InvalidArgument, "path is not UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_matrix(m: &CMatrix, buf: *mut HfceComplex64, len: usize) -> Result<(), Fail> {
    let need = m.nrows() * m.ncols();
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < need {
        return Err(Fail(HfceStatus::BufferTooSmall, format!("buffer holds {len} of {need} elements")));
    }
    let out = std::slice::from_raw_parts_mut(buf, need);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            out[i * m.ncols() + j] = HfceComplex64 { re: v.re, im: v.im };
        }
    }
    Ok(())
}

unsafe fn matrix_arg(p: *const HfceComplex64, rows: usize, cols: usize, what: &str) -> Result<CMatrix, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    let data = std::slice::from_raw_parts(p, rows * cols);
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let v = data[i * cols + j];
        Complex64::new(v.re, v.im)
    }))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn hfce_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hfce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Desk-scale default config (64 antennas, 100 GHz).
#[no_mangle]
pub unsafe extern "C" fn hfce_config_desk(out: *mut *mut HfceConfig) -> HfceStatus {
    guard(|| put(out, HfceConfig(ExperimentConfig::desk())))
}

/// Loads a TOML or JSON experiment config.
#[no_mangle]
pub unsafe extern "C" fn hfce_config_load(path: *const c_char, out: *mut *mut HfceConfig) -> HfceStatus {
    guard(|| {
        let cfg = ExperimentConfig::load(&path_arg(path)?)?;
        put(out, HfceConfig(cfg))
    })
}

/// Overrides array size, RF chains and pilot slots; validated on the spot.
#[no_mangle]
pub unsafe extern "C" fn hfce_config_set_array(
    cfg: *mut HfceConfig,
    n_antennas: usize,
    n_rf_chains: usize,
    n_pilot_slots: usize,
) -> HfceStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("config"))?;
        let mut next = cfg.0.clone();
        next.system.n_antennas = n_antennas;
        next.system.n_rf_chains = n_rf_chains;
        next.system.n_pilot_slots = n_pilot_slots;
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfce_config_set_seed(cfg: *mut HfceConfig, seed: u64) -> HfceStatus {
    guard(|| {
        cfg.as_mut().ok_or_else(|| null("config"))?.0.system.rng_seed = seed;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfce_config_system(cfg: *const HfceConfig, out: *mut HfceSystemInfo) -> HfceStatus {
    guard(|| {
        let s = &as_ref(cfg, "config")?.0.system;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = HfceSystemInfo {
            n_antennas: s.n_antennas,
            n_rf_chains: s.n_rf_chains,
            n_pilot_slots: s.n_pilot_slots,
            n_subcarriers: s.n_subcarriers,
            carrier_freq_hz: s.carrier_freq_hz,
            wavelength_m: s.wavelength_m(),
            spacing_m: s.spacing_m(),
            rayleigh_distance_m: s.rayleigh_distance_m(),
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfce_config_free(cfg: *mut HfceConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hfce_dictionary_build(
    cfg: *const HfceConfig,
    kind: HfceDictionaryKind,
    out: *mut *mut HfceDictionary,
) -> HfceStatus {
    guard(|| {
        let cfg = &as_ref(cfg, "config")?.0;
        let kind = match kind {
            HfceDictionaryKind::Polar => DictionaryKind::Polar,
            HfceDictionaryKind::Angular => DictionaryKind::Angular,
        };
        let dict = build_dictionary(&cfg.system, &cfg.dictionary, kind)?;
        put(out, HfceDictionary(dict))
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfce_dictionary_shape(
    dict: *const HfceDictionary,
    rows: *mut usize,
    cols: *mut usize,
) -> HfceStatus {
    guard(|| {
        let d = &as_ref(dict, "dictionary")?.0;
        *rows.as_mut().ok_or_else(|| null("rows"))? = d.n_rows();
        *cols.as_mut().ok_or_else(|| null("cols"))? = d.n_columns();
        Ok(())
    })
}

/// Copies the `N x S` matrix row-major into `buf` (`len` elements).
#[no_mangle]
pub unsafe extern "C" fn hfce_dictionary_copy(
    dict: *const HfceDictionary,
    buf: *mut HfceComplex64,
    len: usize,
) -> HfceStatus {
    guard(|| copy_matrix(as_ref(dict, "dictionary")?.0.matrix(), buf, len))
}

#[no_mangle]
pub unsafe extern "C" fn hfce_dictionary_free(dict: *mut HfceDictionary) {
    if !dict.is_null() {
        drop(Box::from_raw(dict));
    }
}

/// Draws scene `trial` from the config seed and assembles its `N x M` channel.
#[no_mangle]
pub unsafe extern "C" fn hfce_channel_generate(
    cfg: *const HfceConfig,
    trial: u64,
    out: *mut *mut HfceChannel,
) -> HfceStatus {
    guard(|| {
        let cfg = &as_ref(cfg, "config")?.0;
        let mut rng = stream_rng(cfg.system.rng_seed, Stream::Scene, trial, &[]);
        let scene = generate_scene(&cfg.system, &cfg.scene, &mut rng)?;
        put(out, HfceChannel(assemble_channel(&scene, &cfg.system)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfce_channel_shape(
    channel: *const HfceChannel,
    rows: *mut usize,
    cols: *mut usize,
    n_paths: *mut usize,
) -> HfceStatus {
    guard(|| {
        let c = &as_ref(channel, "channel")?.0;
        *rows.as_mut().ok_or_else(|| null("rows"))? = c.coeffs.nrows();
        *cols.as_mut().ok_or_else(|| null("cols"))? = c.coeffs.ncols();
        if let Some(p) = n_paths.as_mut() {
            *p = c.scene.n_paths();
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfce_channel_copy(
    channel: *const HfceChannel,
    buf: *mut HfceComplex64,
    len: usize,
) -> HfceStatus {
    guard(|| copy_matrix(&as_ref(channel, "channel")?.0.coeffs, buf, len))
}

#[no_mangle]
pub unsafe extern "C" fn hfce_channel_free(channel: *mut HfceChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Observes `channel` through a random combiner at `snr_db` and runs OMP.
/// `sparsity = 0` uses the config's value, or the scene's path count.
#[no_mangle]
pub unsafe extern "C" fn hfce_estimate(
    cfg: *const HfceConfig,
    dict: *const HfceDictionary,
    channel: *const HfceChannel,
    snr_db: f64,
    trial: u64,
    sparsity: usize,
    out: *mut *mut HfceEstimate,
) -> HfceStatus {
    guard(|| {
        let cfg = &as_ref(cfg, "config")?.0;
        let dict = &as_ref(dict, "dictionary")?.0;
        let ch = &as_ref(channel, "channel")?.0;
        let seed = cfg.system.rng_seed;
        let tags = [cfg.system.n_rf_chains as u64, cfg.system.n_pilot_slots as u64];
        let w = generate_combiner(
            &cfg.system,
            cfg.measurement.combiner,
            &mut stream_rng(seed, Stream::Combiner, trial, &tags),
        );
        let mut noise = stream_rng(seed, Stream::Noise, trial, &[tags[0], tags[1], snr_db.to_bits()]);
        let y = observe(ch, &w, snr_db, &mut noise)?;
        let t = match sparsity {
            0 => cfg.estimator.sparsity.unwrap_or(ch.scene.n_paths()),
            t => t,
        };
        let options = OmpOptions {
            iterations: t,
            selection: cfg.estimator.selection,
            update: cfg.estimator.update,
        };
        put(out, HfceEstimate(omp(&y.observations, &w, dict, options)?))
    })
}

/// Writes up to `len` support indices (selection order) into `buf` and the
/// support size into `count`. `buf` may be null to query the size.
#[no_mangle]
pub unsafe extern "C" fn hfce_estimate_support(
    est: *const HfceEstimate,
    buf: *mut usize,
    len: usize,
    count: *mut usize,
) -> HfceStatus {
    guard(|| {
        let s = &as_ref(est, "estimate")?.0.support;
        *count.as_mut().ok_or_else(|| null("count"))? = s.len();
        if buf.is_null() {
            return Ok(());
        }
        if len < s.len() {
            return Err(Fail(HfceStatus::BufferTooSmall, format!("buffer holds {len} of {} indices", s.len())));
        }
        std::slice::from_raw_parts_mut(buf, s.len()).copy_from_slice(s);
        Ok(())
    })
}

/// Copies the `N x M` antenna-domain estimate row-major.
#[no_mangle]
pub unsafe extern "C" fn hfce_estimate_copy(
    est: *const HfceEstimate,
    buf: *mut HfceComplex64,
    len: usize,
) -> HfceStatus {
    guard(|| copy_matrix(&as_ref(est, "estimate")?.0.reconstructed, buf, len))
}

/// NMSE in dB of the estimate against `channel`.
#[no_mangle]
pub unsafe extern "C" fn hfce_estimate_nmse_db(
    est: *const HfceEstimate,
    channel: *const HfceChannel,
    out: *mut f64,
) -> HfceStatus {
    guard(|| {
        let est = &as_ref(est, "estimate")?.0;
        let ch = &as_ref(channel, "channel")?.0;
        *out.as_mut().ok_or_else(|| null("out"))? = nmse_db(&ch.coeffs, &est.reconstructed)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfce_estimate_free(est: *mut HfceEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// `10 log10(||H - H_hat||^2 / ||H||^2)` for two row-major `rows x cols`
/// matrices.
#[no_mangle]
pub unsafe extern "C" fn hfce_nmse_db(
    h: *const HfceComplex64,
    h_hat: *const HfceComplex64,
    rows: usize,
    cols: usize,
    out: *mut f64,
) -> HfceStatus {
    guard(|| {
        let a = matrix_arg(h, rows, cols, "h")?;
        let b = matrix_arg(h_hat, rows, cols, "h_hat")?;
        *out.as_mut().ok_or_else(|| null("out"))? = nmse_db(&a, &b)?;
        Ok(())
    })
}

/// Writes a row-major complex64 tensor as HFCT.
#[no_mangle]
pub unsafe extern "C" fn hfce_tensor_write(
    path: *const c_char,
    dims: *const usize,
    ndim: usize,
    data: *const HfceComplex32,
) -> HfceStatus {
    guard(|| {
        let path = path_arg(path)?;
        if dims.is_null() || data.is_null() {
            return Err(null("dims or data"));
        }
        let dims = std::slice::from_raw_parts(dims, ndim).to_vec();
        let count = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| Fail(HfceStatus::InvalidArgument, "dimension product overflows".into()))?;
        let values = std::slice::from_raw_parts(data, count)
            .iter()
            .map(|c| Complex32::new(c.re, c.im))
            .collect();
        write_tensor(&path, &ComplexTensor::new(dims, values)?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfce_tensor_read(path: *const c_char, out: *mut *mut HfceTensor) -> HfceStatus {
    guard(|| {
        let t = read_tensor(&path_arg(path)?)?;
        put(out, HfceTensor(t))
    })
}

#[no_mangle]
pub unsafe extern "C" fn hfce_tensor_ndim(t: *const HfceTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.dims().len())
}

/// Pointer to the `ndim` dimensions; valid while the tensor lives.
#[no_mangle]
pub unsafe extern "C" fn hfce_tensor_dims(t: *const HfceTensor) -> *const usize {
    t.as_ref().map_or(ptr::null(), |t| t.0.dims().as_ptr())
}

/// Pointer to the row-major elements; valid while the tensor lives.
#[no_mangle]
pub unsafe extern "C" fn hfce_tensor_data(t: *const HfceTensor) -> *const HfceComplex32 {
    t.as_ref()
        .map_or(ptr::null(), |t| t.0.data().as_ptr().cast::<HfceComplex32>())
}

#[no_mangle]
pub unsafe extern "C" fn hfce_tensor_free(t: *mut HfceTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}
