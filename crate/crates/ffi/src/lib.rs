//! C ABI over the actigraph library.
//!
//! Conventions:
//! - every fallible call returns an [`ActgStatus`]; on failure a message is
//!   available from [`actg_last_error`] on the same thread;
//! - results are written through out-pointers;
//! - handles are opaque and released with their matching `_free` function;
//! - token ids are `uint32_t`, paths are NUL-terminated UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use actigraph::activation::{activation, mean_activation, ActivationVector};
use actigraph::eval::perplexity;
use actigraph::llmdcos::llmdcos_layer;
use actigraph::model::{load_checkpoint, save_checkpoint, ModelConfig, ModelWeights};
use actigraph::pruning::{
    build_schedule, prune, CalibrationSet, ComparisonGroup, PruneMethod, PruneOptions,
    SparsitySchedule,
};
use actigraph::stats::spearman;
use actigraph::tokenizer::{encode_sample, VOCAB_SIZE};
use actigraph::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    Index = 4,
    Contract = 5,
    Config = 6,
    Length = 7,
    Data = 8,
    Format = 9,
    Numeric = 10,
    Schedule = 11,
    Degenerate = 12,
    Io = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

/// Pruning score.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActgMethod {
    Wanda = 0,
    Magnitude = 1,
}

/// Opaque model handle.
pub struct ActgModel(ModelWeights);

/// Opaque per-layer activation vector.
pub struct ActgActivation(ActivationVector);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ActgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Shape(_) => ActgStatus::Shape,
            Error::Index(_) => ActgStatus::Index,
            Error::Contract(_) => ActgStatus::Contract,
            Error::Config { .. } => ActgStatus::Config,
            Error::Length { .. } => ActgStatus::Length,
            Error::Data(_) => ActgStatus::Data,
            Error::Format(_) => ActgStatus::Format,
            Error::Numeric(_) => ActgStatus::Numeric,
            Error::Schedule(_) => ActgStatus::Schedule,
            Error::Degenerate(_) => ActgStatus::Degenerate,
            Error::Io { .. } => ActgStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: ActgStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ActgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ActgStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            ActgStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(ActgStatus::NullPointer, format!("`{name}` is NULL")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(ActgStatus::NullPointer, format!("`{name}` is NULL")))
}

unsafe fn slice_of<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(ActgStatus::NullPointer, format!("`{name}` is NULL")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn path_of(p: *const c_char) -> Result<String, Failure> {
    if p.is_null() {
        return Err(fail(ActgStatus::NullPointer, "`path` is NULL"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_string)
        .map_err(|_| fail(ActgStatus::InvalidArgument, "path is not valid UTF-8"))
}

fn tokens_of(ids: &[u32]) -> Vec<usize> {
    ids.iter().map(|&t| t as usize).collect()
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn actg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Size of the byte-level vocabulary.
#[no_mangle]
pub extern "C" fn actg_vocab_size() -> usize {
    VOCAB_SIZE
}

/// Encodes `text` as an analysis sample (`BOS` + bytes, at most `max_len`
/// ids). Writes up to `cap` ids and the full length to `out_len`; returns
/// `BUFFER_TOO_SMALL` when `cap` is insufficient.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must hold `cap` ids.
#[no_mangle]
pub unsafe extern "C" fn actg_encode_sample(
    text: *const c_char,
    max_len: usize,
    out: *mut u32,
    cap: usize,
    out_len: *mut usize,
) -> ActgStatus {
    guard(|| {
        let text = non_null(text, "text").map(|t| CStr::from_ptr(t))?;
        let text = text.to_str().map_err(|_| fail(ActgStatus::InvalidArgument, "text is not valid UTF-8"))?;
        let ids = encode_sample(text, max_len);
        *out_ptr(out_len, "out_len")? = ids.len();
        if ids.len() > cap {
            return Err(fail(ActgStatus::BufferTooSmall, format!("need {} ids, capacity {cap}", ids.len())));
        }
        if !ids.is_empty() {
            let dst = slice::from_raw_parts_mut(out_ptr(out, "out")?, ids.len());
            for (d, s) in dst.iter_mut().zip(&ids) {
                *d = *s as u32;
            }
        }
        Ok(())
    })
}

/// Freshly initialized model (vocabulary fixed to the byte tokenizer).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn actg_model_init(
    n_layers: usize,
    d_model: usize,
    n_heads: usize,
    d_ff: usize,
    context_len: usize,
    seed: u64,
    out: *mut *mut ActgModel,
) -> ActgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let config = ModelConfig { n_layers, d_model, n_heads, d_ff, vocab_size: VOCAB_SIZE, context_len, seed };
        let model = ModelWeights::init(config)?;
        *out = Box::into_raw(Box::new(ActgModel(model)));
        Ok(())
    })
}

/// Loads a checkpoint.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn actg_model_load(path: *const c_char, out: *mut *mut ActgModel) -> ActgStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let model = load_checkpoint(path_of(path)?)?;
        *out = Box::into_raw(Box::new(ActgModel(model)));
        Ok(())
    })
}

/// Writes a checkpoint.
///
/// # Safety
/// `model` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn actg_model_save(model: *const ActgModel, path: *const c_char) -> ActgStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        save_checkpoint(&model.0, path_of(path)?)?;
        Ok(())
    })
}

/// Releases a model; NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn actg_model_free(model: *mut ActgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of decoder layers, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn actg_model_n_layers(model: *const ActgModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.config.n_layers)
}

/// Context length, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn actg_model_context_len(model: *const ActgModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.config.context_len)
}

/// Prunable parameters per layer, or 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn actg_model_prunable_per_layer(model: *const ActgModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.config.prunable_per_layer())
}

/// Activation `|w * dL/dw|` of every prunable weight for one sample.
///
/// # Safety
/// `tokens` must hold `n_tokens` ids; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn actg_activation_compute(
    model: *const ActgModel,
    tokens: *const u32,
    n_tokens: usize,
    out: *mut *mut ActgActivation,
) -> ActgStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let out = out_ptr(out, "out")?;
        let sample = tokens_of(slice_of(tokens, n_tokens, "tokens")?);
        let v = activation(&model.0, &sample)?;
        *out = Box::into_raw(Box::new(ActgActivation(v)));
        Ok(())
    })
}

/// Mean activation over samples packed back to back in `tokens`;
/// `lengths[i]` is the length of sample `i`.
///
/// # Safety
/// `lengths` must hold `n_samples` entries and `tokens` their sum.
#[no_mangle]
pub unsafe extern "C" fn actg_activation_mean(
    model: *const ActgModel,
    tokens: *const u32,
    lengths: *const usize,
    n_samples: usize,
    out: *mut *mut ActgActivation,
) -> ActgStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let out = out_ptr(out, "out")?;
        let lengths = slice_of(lengths, n_samples, "lengths")?;
        let total = lengths
            .iter()
            .try_fold(0usize, |a, &l| a.checked_add(l))
            .ok_or_else(|| fail(ActgStatus::InvalidArgument, "sample lengths overflow"))?;
        let flat = slice_of(tokens, total, "tokens")?;
        let mut samples = Vec::with_capacity(n_samples);
        let mut at = 0;
        for &l in lengths {
            samples.push(tokens_of(&flat[at..at + l]));
            at += l;
        }
        let v = mean_activation(&model.0, &samples)?;
        *out = Box::into_raw(Box::new(ActgActivation(v)));
        Ok(())
    })
}

/// Borrowed view of one 1-based layer's values; valid while `act` lives.
///
/// # Safety
/// `act` must be a live handle; `data` and `len` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn actg_activation_layer(
    act: *const ActgActivation,
    layer: usize,
    data: *mut *const f32,
    len: *mut usize,
) -> ActgStatus {
    guard(|| {
        let act = non_null(act, "act")?;
        let (data, len) = (out_ptr(data, "data")?, out_ptr(len, "len")?);
        let values = act.0.layer(layer)?;
        *data = values.as_ptr();
        *len = values.len();
        Ok(())
    })
}

/// Releases an activation vector; NULL is ignored.
///
/// # Safety
/// `act` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn actg_activation_free(act: *mut ActgActivation) {
    if !act.is_null() {
        drop(Box::from_raw(act));
    }
}

/// Cosine of two activation vectors restricted to a 1-based layer.
///
/// # Safety
/// `a`, `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn actg_llmdcos_layer(
    a: *const ActgActivation,
    b: *const ActgActivation,
    layer: usize,
    out: *mut f64,
) -> ActgStatus {
    guard(|| {
        let (a, b) = (non_null(a, "a")?, non_null(b, "b")?);
        *out_ptr(out, "out")? = llmdcos_layer(&a.0, &b.0, layer)?;
        Ok(())
    })
}

/// Spearman rank correlation with tie-averaged ranks.
///
/// # Safety
/// `x` and `y` must hold `n` values each.
#[no_mangle]
pub unsafe extern "C" fn actg_spearman(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> ActgStatus {
    guard(|| {
        let (x, y) = (slice_of(x, n, "x")?, slice_of(y, n, "y")?);
        *out_ptr(out, "out")? = spearman(x, y)?;
        Ok(())
    })
}

/// Two-band per-layer sparsity for `model`: the 1-based `shallow` layers get
/// `shallow_s`, the rest the value that keeps the parameter-weighted mean at
/// `global_s`. Writes `n_layers` fractions to `out`.
///
/// # Safety
/// `shallow` must hold `n_shallow` entries and `out` `out_cap` values.
#[no_mangle]
pub unsafe extern "C" fn actg_build_schedule(
    model: *const ActgModel,
    global_s: f64,
    shallow: *const usize,
    n_shallow: usize,
    shallow_s: f64,
    out: *mut f64,
    out_cap: usize,
) -> ActgStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let shallow = slice_of(shallow, n_shallow, "shallow")?;
        let s = build_schedule(&model.0.config, global_s, shallow, shallow_s)?;
        write_fractions(&s, out, out_cap)
    })
}

unsafe fn write_fractions(s: &SparsitySchedule, out: *mut f64, cap: usize) -> Result<(), Failure> {
    let n = s.per_layer.len();
    if cap < n {
        return Err(fail(ActgStatus::BufferTooSmall, format!("need {n} values, capacity {cap}")));
    }
    slice::from_raw_parts_mut(out_ptr(out, "out")?, n).copy_from_slice(&s.per_layer);
    Ok(())
}

/// Prunes `model` with per-layer fractions `per_layer` (length `n_layers`).
/// Wanda uses `n_calib` calibration sequences of `calib_len` tokens packed in
/// `calib`; magnitude ignores them. The input model is not modified.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn actg_prune(
    model: *const ActgModel,
    per_layer: *const f64,
    n_layers: usize,
    calib: *const u32,
    n_calib: usize,
    calib_len: usize,
    method: ActgMethod,
    out: *mut *mut ActgModel,
) -> ActgStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let out = out_ptr(out, "out")?;
        let fractions = slice_of(per_layer, n_layers, "per_layer")?.to_vec();
        let global = fractions.iter().sum::<f64>() / fractions.len().max(1) as f64;
        let schedule = SparsitySchedule {
            global,
            per_layer: fractions,
            shallow_layers: Vec::new(),
            shallow_sparsity: None,
            deep_sparsity: None,
        };
        let total = n_calib
            .checked_mul(calib_len)
            .ok_or_else(|| fail(ActgStatus::InvalidArgument, "calibration size overflows"))?;
        let flat = slice_of(calib, total, "calib")?;
        let sequences = if calib_len == 0 { Vec::new() } else { flat.chunks(calib_len).map(tokens_of).collect() };
        let calib = CalibrationSet { sequences, sources: Vec::new() };
        let method = match method {
            ActgMethod::Wanda => PruneMethod::Wanda,
            ActgMethod::Magnitude => PruneMethod::Magnitude,
        };
        let opts = PruneOptions { method, group: ComparisonGroup::PerOutput };
        let (pruned, _) = prune(&model.0, &schedule, &calib, opts)?;
        *out = Box::into_raw(Box::new(ActgModel(pruned)));
        Ok(())
    })
}

/// Perplexity over disjoint windows of `context_len` tokens.
///
/// # Safety
/// `tokens` must hold `n_tokens` ids; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn actg_perplexity(
    model: *const ActgModel,
    tokens: *const u32,
    n_tokens: usize,
    context_len: usize,
    out: *mut f64,
) -> ActgStatus {
    guard(|| {
        let model = non_null(model, "model")?;
        let tokens = tokens_of(slice_of(tokens, n_tokens, "tokens")?);
        *out_ptr(out, "out")? = perplexity(&model.0, "ffi", &tokens, context_len)?.perplexity;
        Ok(())
    })
}
