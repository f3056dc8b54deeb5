//! C bindings for `reidtrack`.
//!
//! Every fallible function returns an [`RtStatus`]. On failure a message is
//! kept per thread and can be read with [`rt_last_error_message`]. Handles
//! are opaque and must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use reidtrack::assign::{solve_assignment, CostMatrix};
use reidtrack::{BBox, Detection, Embedding, Error, FrameInput, SecondStagePool, TrackOutput, Tracker, TrackerConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    DimensionMismatch = 4,
    ZeroNorm = 5,
    NonMonotonicFrame = 6,
    BufferTooSmall = 7,
    Panic = 99,
}

/// Tracker parameters. Fill with [`rt_config_default`] before changing fields.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RtConfig {
    pub high_thresh: f64,
    pub low_thresh: f64,
    pub sim_gate_high: f64,
    pub sim_gate_low: f64,
    pub tau: usize,
    pub max_lost_age: u32,
    pub min_init_score: f64,
    /// Nonzero: detections only match tracks of the same class.
    pub per_class: i32,
    /// Nonzero: the second stage matches low-band detections only.
    pub low_only_second_stage: i32,
    /// Zero: take the dimension from the first embedding seen.
    pub embedding_dim: usize,
}

/// One detection. Its embedding lives in the `embeddings` array passed
/// alongside, at row `i` for the `i`-th detection.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RtDetection {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
    pub class_id: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RtOutput {
    pub frame: u32,
    pub track_id: u32,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
    pub class_id: u32,
}

/// Opaque tracker handle.
pub struct RtTracker {
    inner: Tracker,
    outputs: Vec<RtOutput>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RtStatus, msg: impl Into<String>) -> RtStatus {
    set_error(msg.into());
    status
}

fn status_of(err: &Error) -> RtStatus {
    match err {
        Error::InvalidConfig(_) => RtStatus::InvalidConfig,
        Error::DimensionMismatch { .. } => RtStatus::DimensionMismatch,
        Error::ZeroNorm | Error::NonFinite => RtStatus::ZeroNorm,
        Error::NonMonotonicFrame { .. } => RtStatus::NonMonotonicFrame,
        _ => RtStatus::InvalidArgument,
    }
}

fn from_err(err: Error) -> RtStatus {
    fail(status_of(&err), err.to_string())
}

fn guarded(f: impl FnOnce() -> RtStatus) -> RtStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(RtStatus::Panic, "internal panic"))
}

impl From<&RtConfig> for TrackerConfig {
    fn from(c: &RtConfig) -> Self {
        TrackerConfig {
            high_thresh: c.high_thresh,
            low_thresh: c.low_thresh,
            sim_gate_high: c.sim_gate_high,
            sim_gate_low: c.sim_gate_low,
            tau: c.tau,
            max_lost_age: c.max_lost_age,
            min_init_score: c.min_init_score,
            per_class: c.per_class != 0,
            embedding_dim: (c.embedding_dim != 0).then_some(c.embedding_dim),
            second_stage: if c.low_only_second_stage != 0 {
                SecondStagePool::LowOnly
            } else {
                SecondStagePool::Pooled
            },
        }
    }
}

impl From<&TrackOutput> for RtOutput {
    fn from(o: &TrackOutput) -> Self {
        RtOutput {
            frame: o.frame,
            track_id: o.track_id,
            x: o.bbox.x(),
            y: o.bbox.y(),
            w: o.bbox.w(),
            h: o.bbox.h(),
            score: o.score,
            class_id: o.class_id,
        }
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or
/// 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn rt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rt_config_default(out: *mut RtConfig) -> RtStatus {
    if out.is_null() {
        return fail(RtStatus::NullPointer, "config pointer is null");
    }
    let d = TrackerConfig::default();
    out.write(RtConfig {
        high_thresh: d.high_thresh,
        low_thresh: d.low_thresh,
        sim_gate_high: d.sim_gate_high,
        sim_gate_low: d.sim_gate_low,
        tau: d.tau,
        max_lost_age: d.max_lost_age,
        min_init_score: d.min_init_score,
        per_class: i32::from(d.per_class),
        low_only_second_stage: i32::from(d.second_stage == SecondStagePool::LowOnly),
        embedding_dim: d.embedding_dim.unwrap_or(0),
    });
    RtStatus::Ok
}

/// Creates a tracker. `config` may be null for defaults.
///
/// # Safety
/// `config` must be null or valid; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rt_tracker_new(config: *const RtConfig, out: *mut *mut RtTracker) -> RtStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RtStatus::NullPointer, "output handle pointer is null");
        }
        out.write(ptr::null_mut());
        let cfg = if config.is_null() { TrackerConfig::default() } else { TrackerConfig::from(&*config) };
        match Tracker::new(cfg) {
            Ok(inner) => {
                out.write(Box::into_raw(Box::new(RtTracker { inner, outputs: Vec::new() })));
                RtStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// # Safety
/// `tracker` must be null or a handle from [`rt_tracker_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rt_tracker_free(tracker: *mut RtTracker) {
    if !tracker.is_null() {
        drop(Box::from_raw(tracker));
    }
}

/// Advances the tracker by one frame. `embeddings` holds `num_detections`
/// rows of `dim` values. The frame's outputs are kept in the handle; their
/// count goes to `num_outputs` and they are read with
/// [`rt_tracker_outputs`].
///
/// # Safety
/// All pointers must be valid for the stated lengths; `detections` and
/// `embeddings` may be null only when `num_detections` is 0.
#[no_mangle]
pub unsafe extern "C" fn rt_tracker_step(
    tracker: *mut RtTracker,
    frame: u32,
    detections: *const RtDetection,
    num_detections: usize,
    embeddings: *const f64,
    dim: usize,
    num_outputs: *mut usize,
) -> RtStatus {
    guarded(|| {
        if tracker.is_null() || num_outputs.is_null() {
            return fail(RtStatus::NullPointer, "tracker or output count pointer is null");
        }
        if num_detections > 0 && (detections.is_null() || embeddings.is_null()) {
            return fail(RtStatus::NullPointer, "detections or embeddings pointer is null");
        }
        if num_detections > 0 && dim == 0 {
            return fail(RtStatus::InvalidArgument, "embedding dimension is 0");
        }
        let t = &mut *tracker;
        let dets = if num_detections == 0 { &[][..] } else { slice::from_raw_parts(detections, num_detections) };
        let embs = if num_detections == 0 { &[][..] } else { slice::from_raw_parts(embeddings, num_detections * dim) };
        let mut input = Vec::with_capacity(num_detections);
        for (d, e) in dets.iter().zip(embs.chunks_exact(dim.max(1))) {
            let built = BBox::new(d.x, d.y, d.w, d.h)
                .and_then(|b| Detection::new(frame, b, d.score, d.class_id))
                .and_then(|det| Ok(det.with_embedding(Embedding::new(e)?)));
            match built {
                Ok(det) => input.push(det),
                Err(e) => return from_err(e),
            }
        }
        match t.inner.step(&FrameInput::new(frame, input)) {
            Ok(outs) => {
                t.outputs = outs.iter().map(RtOutput::from).collect();
                num_outputs.write(t.outputs.len());
                RtStatus::Ok
            }
            Err(e) => from_err(e),
        }
    })
}

/// Copies the outputs of the last step into `buf`. Fails with
/// `BufferTooSmall` when `cap` is short; `written` always receives the
/// number of outputs available.
///
/// # Safety
/// `tracker` must be a live handle, `buf` valid for `cap` writes, `written`
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rt_tracker_outputs(
    tracker: *const RtTracker,
    buf: *mut RtOutput,
    cap: usize,
    written: *mut usize,
) -> RtStatus {
    if tracker.is_null() || written.is_null() {
        return fail(RtStatus::NullPointer, "tracker or written pointer is null");
    }
    let outs = &(*tracker).outputs;
    written.write(outs.len());
    if outs.is_empty() {
        return RtStatus::Ok;
    }
    if cap < outs.len() {
        return fail(RtStatus::BufferTooSmall, format!("need {} outputs, buffer holds {cap}", outs.len()));
    }
    if buf.is_null() {
        return fail(RtStatus::NullPointer, "output buffer is null");
    }
    ptr::copy_nonoverlapping(outs.as_ptr(), buf, outs.len());
    RtStatus::Ok
}

/// Number of tracks started so far.
///
/// # Safety
/// `tracker` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rt_tracker_tracks_created(tracker: *const RtTracker) -> u32 {
    if tracker.is_null() {
        0
    } else {
        (*tracker).inner.tracks_created()
    }
}

/// Minimum-cost assignment on a row-major `rows x cols` matrix. Entries equal
/// to +infinity are forbidden. `row_to_col[r]` receives the matched column
/// or -1.
///
/// # Safety
/// `costs` must hold `rows * cols` values, `row_to_col` `rows` slots, and
/// `total_cost` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn rt_solve_assignment(
    costs: *const f64,
    rows: usize,
    cols: usize,
    row_to_col: *mut i64,
    total_cost: *mut f64,
) -> RtStatus {
    guarded(|| {
        if total_cost.is_null() || (rows > 0 && row_to_col.is_null()) || (rows * cols > 0 && costs.is_null()) {
            return fail(RtStatus::NullPointer, "null pointer argument");
        }
        let data = if rows * cols == 0 { Vec::new() } else { slice::from_raw_parts(costs, rows * cols).to_vec() };
        if data.iter().any(|c| c.is_nan() || *c < 0.0) {
            return fail(RtStatus::InvalidArgument, "costs must be non-negative and not NaN");
        }
        let r = solve_assignment(&CostMatrix::new(rows, cols, data));
        if rows > 0 {
            let out = slice::from_raw_parts_mut(row_to_col, rows);
            out.fill(-1);
            for &(i, j) in &r.matches {
                out[i] = j as i64;
            }
        }
        total_cost.write(r.total_cost);
        RtStatus::Ok
    })
}
