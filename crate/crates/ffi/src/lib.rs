//! C ABI over the `dynmatch` engines.
//!
//! Every function returns a [`DmStatus`]. Handles are opaque and owned by the
//! caller until passed to [`dm_engine_free`]. On failure the message of the
//! last error on the calling thread is available from
//! [`dm_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dynmatch::baselines::DynamicMatcher;
use dynmatch::sparsifier::{Wrapper, WrapperConfig};
use dynmatch::{Edge, Engine, EngineConfig, Error, UpdateEvent};

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidEdge = 2,
    InvalidVertex = 3,
    Config = 4,
    InvalidArgument = 5,
    MalformedInstance = 6,
    Parse = 7,
    Invariant = 8,
    Io = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

impl From<&Error> for DmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidEdge(..) => DmStatus::InvalidEdge,
            Error::InvalidVertex { .. } => DmStatus::InvalidVertex,
            Error::Config(_) => DmStatus::Config,
            Error::InvalidArgument(_) => DmStatus::InvalidArgument,
            Error::MalformedInstance(_) => DmStatus::MalformedInstance,
            Error::Parse { .. } => DmStatus::Parse,
            Error::Invariant(_) => DmStatus::Invariant,
            Error::Io(_) => DmStatus::Io,
        }
    }
}

/// Opaque engine handle.
pub struct DmEngine {
    inner: Box<dyn DynamicMatcher>,
    n: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), DmStatus>) -> DmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DmStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            DmStatus::Panic
        }
    }
}

fn fail(e: Error) -> DmStatus {
    let s = DmStatus::from(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> DmStatus {
    set_error(format!("{what} is null"));
    DmStatus::NullPointer
}

unsafe fn handle<'a>(h: *mut DmEngine) -> Result<&'a mut DmEngine, DmStatus> {
    h.as_mut().ok_or_else(|| null("engine handle"))
}

/// Creates an engine on `n` vertices. With `multiplicative` nonzero the
/// engine keeps a `(1 - epsilon)` approximation; otherwise the guarantee is
/// additive `epsilon * n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn dm_engine_new(
    n: usize,
    epsilon: f64,
    seed: u64,
    multiplicative: i32,
    out: *mut *mut DmEngine,
) -> DmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner: Box<dyn DynamicMatcher> = if multiplicative != 0 {
            Box::new(Wrapper::new(WrapperConfig::new(n, epsilon).with_seed(seed)).map_err(fail)?)
        } else {
            Box::new(Engine::new(EngineConfig::new(n, epsilon).with_seed(seed)).map_err(fail)?)
        };
        *out = Box::into_raw(Box::new(DmEngine { inner, n }));
        Ok(())
    })
}

/// Releases a handle. Null is accepted.
///
/// # Safety
/// `h` must be null or a handle from [`dm_engine_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dm_engine_free(h: *mut DmEngine) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

unsafe fn apply(h: *mut DmEngine, u: usize, v: usize, insert: bool) -> DmStatus {
    guard(|| {
        let h = handle(h)?;
        if u >= h.n || v >= h.n {
            return Err(fail(Error::InvalidVertex { vertex: u.max(v), n: h.n }));
        }
        let e = Edge::new(u, v).map_err(fail)?;
        let ev = if insert { UpdateEvent::Insert(e) } else { UpdateEvent::Delete(e) };
        h.inner.apply(ev).map_err(fail)
    })
}

/// Inserts edge `{u, v}`.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dm_engine_insert(h: *mut DmEngine, u: usize, v: usize) -> DmStatus {
    apply(h, u, v, true)
}

/// Deletes edge `{u, v}`.
///
/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dm_engine_delete(h: *mut DmEngine, u: usize, v: usize) -> DmStatus {
    apply(h, u, v, false)
}

/// Writes the current matching size to `out`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dm_engine_matching_size(h: *mut DmEngine, out: *mut usize) -> DmStatus {
    guard(|| {
        let h = handle(h)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = h.inner.matching().len();
        Ok(())
    })
}

/// Copies the matching into `pairs` as `u0, v0, u1, v1, ...`. `cap` counts
/// edges. The edge count is always written to `out_len`; if it exceeds `cap`
/// nothing is copied and `BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `h` must be a live handle, `out_len` writable and `pairs` valid for
/// `2 * cap` elements (it may be null when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn dm_engine_matching(
    h: *mut DmEngine,
    pairs: *mut usize,
    cap: usize,
    out_len: *mut usize,
) -> DmStatus {
    guard(|| {
        let h = handle(h)?;
        let out_len = out_len.as_mut().ok_or_else(|| null("out_len"))?;
        let edges = h.inner.matching().edges();
        *out_len = edges.len();
        if edges.len() > cap {
            set_error(format!("buffer holds {cap} edges, matching has {}", edges.len()));
            return Err(DmStatus::BufferTooSmall);
        }
        if edges.is_empty() {
            return Ok(());
        }
        if pairs.is_null() {
            return Err(null("pairs"));
        }
        let buf = std::slice::from_raw_parts_mut(pairs, 2 * edges.len());
        for (slot, e) in buf.chunks_exact_mut(2).zip(edges.iter()) {
            slot[0] = e.u();
            slot[1] = e.v();
        }
        Ok(())
    })
}

/// Work counters and rebuild count so far.
///
/// # Safety
/// `h` must be a live handle; each out pointer must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn dm_engine_stats(
    h: *mut DmEngine,
    matrix_probes: *mut u64,
    list_reads: *mut u64,
    rebuilds: *mut u64,
) -> DmStatus {
    guard(|| {
        let h = handle(h)?;
        let w = h.inner.work();
        if let Some(p) = matrix_probes.as_mut() {
            *p = w.matrix_probes;
        }
        if let Some(p) = list_reads.as_mut() {
            *p = w.list_reads;
        }
        if let Some(p) = rebuilds.as_mut() {
            *p = h.inner.rebuilds();
        }
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn dm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn dm_status_string(status: DmStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        DmStatus::Ok => b"ok\0",
        DmStatus::NullPointer => b"null pointer\0",
        DmStatus::InvalidEdge => b"invalid edge\0",
        DmStatus::InvalidVertex => b"invalid vertex\0",
        DmStatus::Config => b"configuration error\0",
        DmStatus::InvalidArgument => b"invalid argument\0",
        DmStatus::MalformedInstance => b"malformed instance\0",
        DmStatus::Parse => b"parse error\0",
        DmStatus::Invariant => b"invariant violated\0",
        DmStatus::Io => b"i/o error\0",
        DmStatus::BufferTooSmall => b"buffer too small\0",
        DmStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}
