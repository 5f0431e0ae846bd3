//! C ABI for `gwt-core`.
//!
//! Objects are opaque handles created by `*_new` functions and released with
//! the matching `*_free`. Every fallible call returns a [`GwtStatus`]; on
//! failure the message is kept per thread and can be read with
//! [`gwt_last_error`]. Panics are caught at the boundary.
//!
//! # Safety
//!
//! Pointers must be null or valid for the stated lengths. Handles must come
//! from this library and must not be used after being freed.

use std::cell::RefCell;
use std::ffi::CStr;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};

use gwt_core::multiscale::{BankKind, BankSpec};
use gwt_core::signal::GraphSignal;
use gwt_core::{
    check_invertibility, CirculantGraph, ExponentParam, Generator, GwtError, SamplingPattern,
    Transform,
};
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwtStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad sizes, parameters or graph definitions.
    InvalidArgument = 2,
    /// Non-invertible bank, singular system or infeasible design.
    Math = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwtBank {
    Hgswt = 0,
    Hgeswt = 1,
    Hcgswt = 2,
    Hcgeswt = 3,
}

/// Opaque circulant graph.
pub struct GwtGraph {
    inner: CirculantGraph,
}

/// Opaque single-level transform: a bank bound to a sampling pattern.
pub struct GwtTransform {
    inner: Transform,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &GwtError) -> GwtStatus {
    match e.exit_code() {
        2 => GwtStatus::InvalidArgument,
        3 => GwtStatus::Math,
        _ => GwtStatus::Io,
    }
}

fn guard<F>(f: F) -> GwtStatus
where
    F: FnOnce() -> Result<(), (GwtStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GwtStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside gwt".into());
            GwtStatus::Panic
        }
    }
}

fn lib(e: GwtError) -> (GwtStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (GwtStatus, String) {
    (GwtStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(
    p: *const T,
    len: size_t,
    what: &str,
) -> Result<&'a [T], (GwtStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length.
///
/// # Safety
/// `buf` must be null or writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn gwt_last_error(buf: *mut c_char, len: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gwt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Circulant graph on `n` nodes with hops `hops[i]` of weight `weights[i]`
/// (all 1 when `weights` is null).
///
/// # Safety
/// `hops` (and `weights` if non-null) must hold `count` entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gwt_graph_new(
    n: size_t,
    hops: *const size_t,
    weights: *const f64,
    count: size_t,
    out: *mut *mut GwtGraph,
) -> GwtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let h = slice(hops, count, "hops")?;
        let w = if weights.is_null() {
            None
        } else {
            Some(slice(weights, count, "weights")?)
        };
        let gens = h
            .iter()
            .enumerate()
            .map(|(i, &s)| Generator {
                s,
                w: w.map_or(1.0, |w| w[i]),
            })
            .collect();
        let g = CirculantGraph::new(n, gens).map_err(lib)?;
        *out = Box::into_raw(Box::new(GwtGraph { inner: g }));
        Ok(())
    })
}

/// Graph from its JSON description, e.g. `{"n":16,"gens":[{"s":1,"w":1.0}]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gwt_graph_from_json(
    json: *const c_char,
    out: *mut *mut GwtGraph,
) -> GwtStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (GwtStatus::InvalidArgument, "json is not UTF-8".to_string()))?;
        let g: CirculantGraph = serde_json::from_str(s).map_err(|e| lib(e.into()))?;
        *out = Box::into_raw(Box::new(GwtGraph { inner: g }));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gwt_graph_free(g: *mut GwtGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gwt_graph_size(g: *const GwtGraph) -> size_t {
    g.as_ref().map_or(0, |g| g.inner.n())
}

/// # Safety
/// `g` must be a live handle and `degree` writable.
#[no_mangle]
pub unsafe extern "C" fn gwt_graph_degree(g: *const GwtGraph, degree: *mut f64) -> GwtStatus {
    guard(|| {
        let g = g.as_ref().ok_or_else(|| null("graph"))?;
        let d = degree.as_mut().ok_or_else(|| null("degree"))?;
        *d = g.inner.degree();
        Ok(())
    })
}

/// Builds a bank and binds it to a pattern. `alphas` may be null when
/// `n_alphas` is 0; `hyperbolic` (nullable) flags hyperbolic exponents.
/// `pattern` (nullable, `n` bytes) marks low-pass nodes with non-zero bytes;
/// null selects the alternating pattern. With `require_invertible` set, a
/// bank that fails the invertibility check is refused with `Math`.
///
/// # Safety
/// All non-null pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn gwt_transform_new(
    g: *const GwtGraph,
    bank: GwtBank,
    k: u32,
    alphas: *const f64,
    hyperbolic: *const u8,
    n_alphas: size_t,
    dual_moments: bool,
    pattern: *const u8,
    require_invertible: bool,
    out: *mut *mut GwtTransform,
) -> GwtStatus {
    guard(|| {
        let g = &g.as_ref().ok_or_else(|| null("graph"))?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let a = slice(alphas, n_alphas, "alphas")?;
        let h = if hyperbolic.is_null() {
            None
        } else {
            Some(slice(hyperbolic, n_alphas, "hyperbolic")?)
        };
        let alphas = a
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if h.is_some_and(|h| h[i] != 0) {
                    ExponentParam::hyperbolic(v)
                } else {
                    ExponentParam::trig(v)
                }
            })
            .collect();
        let kind = match bank {
            GwtBank::Hgswt => BankKind::Hgswt,
            GwtBank::Hgeswt => BankKind::Hgeswt,
            GwtBank::Hcgswt => BankKind::Hcgswt,
            GwtBank::Hcgeswt => BankKind::Hcgeswt,
        };
        let spec = BankSpec {
            kind,
            k,
            alphas,
            dual_moments,
        };
        let fb = spec.build(g, 0).map_err(lib)?;
        let sp = if pattern.is_null() {
            SamplingPattern::alternating(g.n()).map_err(lib)?
        } else {
            let p = slice(pattern, g.n(), "pattern")?;
            SamplingPattern::new(p.iter().map(|&b| b != 0).collect())
        };
        if require_invertible {
            let rep = check_invertibility(&fb, &sp);
            if !rep.invertible {
                return Err((GwtStatus::Math, rep.detail));
            }
        }
        let t = Transform::new(fb, sp).map_err(lib)?;
        *out = Box::into_raw(Box::new(GwtTransform { inner: t }));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gwt_transform_free(t: *mut GwtTransform) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Node count, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gwt_transform_size(t: *const GwtTransform) -> size_t {
    t.as_ref().map_or(0, |t| t.inner.n())
}

/// Writes whether the analysis operator is invertible.
///
/// # Safety
/// `t` must be a live handle and `invertible` writable.
#[no_mangle]
pub unsafe extern "C" fn gwt_transform_is_invertible(
    t: *const GwtTransform,
    invertible: *mut bool,
) -> GwtStatus {
    guard(|| {
        let t = &t.as_ref().ok_or_else(|| null("transform"))?.inner;
        let o = invertible.as_mut().ok_or_else(|| null("invertible"))?;
        *o = check_invertibility(t.bank(), t.pattern()).invertible;
        Ok(())
    })
}

type Op = fn(&Transform, &GraphSignal) -> gwt_core::Result<GraphSignal>;

unsafe fn run(
    t: *const GwtTransform,
    re_in: *const f64,
    im_in: *const f64,
    len: size_t,
    re_out: *mut f64,
    im_out: *mut f64,
    op: Op,
) -> GwtStatus {
    guard(|| {
        let t = &t.as_ref().ok_or_else(|| null("transform"))?.inner;
        if len != t.n() {
            return Err((
                GwtStatus::InvalidArgument,
                format!("length {len} does not match graph size {}", t.n()),
            ));
        }
        if re_out.is_null() {
            return Err(null("re_out"));
        }
        let re = slice(re_in, len, "re_in")?;
        let im = if im_in.is_null() {
            None
        } else {
            Some(slice(im_in, len, "im_in")?)
        };
        let x = GraphSignal::new(
            (0..len)
                .map(|i| Complex64::new(re[i], im.map_or(0.0, |v| v[i])))
                .collect(),
            "",
        );
        let y = op(t, &x).map_err(lib)?;
        let ro = std::slice::from_raw_parts_mut(re_out, len);
        for (o, v) in ro.iter_mut().zip(y.values()) {
            *o = v.re;
        }
        if !im_out.is_null() {
            let io = std::slice::from_raw_parts_mut(im_out, len);
            for (o, v) in io.iter_mut().zip(y.values()) {
                *o = v.im;
            }
        }
        Ok(())
    })
}

/// Forward transform of a length-`len` signal. `im_in` and `im_out` may be null
/// for real data.
///
/// # Safety
/// Non-null buffers must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn gwt_transform_analyze(
    t: *const GwtTransform,
    re_in: *const f64,
    im_in: *const f64,
    len: size_t,
    re_out: *mut f64,
    im_out: *mut f64,
) -> GwtStatus {
    run(t, re_in, im_in, len, re_out, im_out, |t, x| t.analyze(x))
}

/// Inverse transform; same buffer conventions as [`gwt_transform_analyze`].
///
/// # Safety
/// Non-null buffers must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn gwt_transform_invert(
    t: *const GwtTransform,
    re_in: *const f64,
    im_in: *const f64,
    len: size_t,
    re_out: *mut f64,
    im_out: *mut f64,
) -> GwtStatus {
    run(t, re_in, im_in, len, re_out, im_out, |t, x| t.invert(x))
}
