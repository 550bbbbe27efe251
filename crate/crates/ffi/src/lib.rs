//! C ABI over the classifier and the region resolver.
//!
//! Handles are opaque and owned by the caller: every `*_new_*` must be paired
//! with the matching `*_free`. Every fallible call returns a [`MoodStatus`];
//! on failure, [`mood_last_error_message`] describes the error. Handles may be
//! shared across threads for concurrent reads.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::OnceLock;

use mood_core::emotion::EmotionLabel;
use mood_core::geo::{BoundaryError, BoundarySet, GeoPoint};
use mood_core::lexicon::{Lexicon, LexiconError};
use mood_core::region::RegionId;
use mood_core::Classifier;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoodStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidData = 4,
    InvalidCoordinate = 5,
    /// The point lies in no known region.
    NotFound = 6,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoodLabel {
    Anger = 0,
    Disgust = 1,
    Fear = 2,
    Happiness = 3,
    Sadness = 4,
    Surprise = 5,
    Neutral = 6,
}

impl From<EmotionLabel> for MoodLabel {
    fn from(e: EmotionLabel) -> Self {
        match e {
            EmotionLabel::Anger => MoodLabel::Anger,
            EmotionLabel::Disgust => MoodLabel::Disgust,
            EmotionLabel::Fear => MoodLabel::Fear,
            EmotionLabel::Happiness => MoodLabel::Happiness,
            EmotionLabel::Sadness => MoodLabel::Sadness,
            EmotionLabel::Surprise => MoodLabel::Surprise,
            EmotionLabel::Neutral => MoodLabel::Neutral,
        }
    }
}

/// Outcome of classifying one text. `matched` is indexed by [`MoodLabel`]
/// (Neutral excluded); the rank of emotion `i` is `matched[i] / token_count`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoodClassification {
    pub label: u32,
    pub matched: [u32; 6],
    pub token_count: u32,
}

/// Opaque classifier handle.
pub struct MoodClassifier(Classifier);

/// Opaque region resolver handle.
pub struct MoodResolver(BoundarySet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: MoodStatus, msg: impl Into<String>) -> MoodStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> MoodStatus) -> MoodStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(MoodStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, MoodStatus> {
    if p.is_null() {
        return Err(fail(MoodStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MoodStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn lexicon_status(e: &LexiconError) -> MoodStatus {
    match e {
        LexiconError::Io(_) => MoodStatus::Io,
        _ => MoodStatus::InvalidData,
    }
}

fn boundary_status(e: &BoundaryError) -> MoodStatus {
    match e {
        BoundaryError::Io(_) => MoodStatus::Io,
        _ => MoodStatus::InvalidData,
    }
}

/// Message for the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mood_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mood_version() -> *const c_char {
    static V: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    V.as_ptr()
}

/// Static English name of a label, or null for an out-of-range value.
#[no_mangle]
pub extern "C" fn mood_label_name(label: u32) -> *const c_char {
    static NAMES: OnceLock<Vec<CString>> = OnceLock::new();
    let names = NAMES.get_or_init(|| EmotionLabel::ALL.iter().map(|e| CString::new(e.name()).unwrap()).collect());
    names.get(label as usize).map_or(ptr::null(), |s| s.as_ptr())
}

/// Creates a classifier over the bundled sample lexicon.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn mood_classifier_new_bundled(out: *mut *mut MoodClassifier) -> MoodStatus {
    guard(|| {
        if out.is_null() {
            return fail(MoodStatus::NullPointer, "out is null");
        }
        *out = Box::into_raw(Box::new(MoodClassifier(Classifier::with_lexicon(Lexicon::bundled_sample()))));
        MoodStatus::Ok
    })
}

/// Creates a classifier from a lexicon CSV file (plain or gzipped).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mood_classifier_from_path(path: *const c_char, out: *mut *mut MoodClassifier) -> MoodStatus {
    guard(|| {
        if out.is_null() {
            return fail(MoodStatus::NullPointer, "out is null");
        }
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match Lexicon::from_path(Path::new(path)) {
            Ok(lex) => {
                *out = Box::into_raw(Box::new(MoodClassifier(Classifier::with_lexicon(lex))));
                MoodStatus::Ok
            }
            Err(e) => fail(lexicon_status(&e), format!("{path}: {e}")),
        }
    })
}

/// Frees a classifier. Null is ignored.
///
/// # Safety
/// `c` must come from a `mood_classifier_new_*` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mood_classifier_free(c: *mut MoodClassifier) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Classifies one NUL-terminated UTF-8 text.
///
/// # Safety
/// `c` must be a live classifier handle, `text` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mood_classify(
    c: *const MoodClassifier,
    text: *const c_char,
    out: *mut MoodClassification,
) -> MoodStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return fail(MoodStatus::NullPointer, "classifier or out is null");
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let (label, scores) = (*c).0.classify(text);
        let mut matched = [0u32; 6];
        for e in EmotionLabel::BASIC {
            matched[e.index()] = scores.matched(e);
        }
        *out = MoodClassification {
            label: MoodLabel::from(label) as u32,
            matched,
            token_count: scores.token_count(),
        };
        MoodStatus::Ok
    })
}

/// Creates a resolver over the bundled state boundaries and city table.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mood_resolver_new_bundled(out: *mut *mut MoodResolver) -> MoodStatus {
    guard(|| {
        if out.is_null() {
            return fail(MoodStatus::NullPointer, "out is null");
        }
        *out = Box::into_raw(Box::new(MoodResolver(BoundarySet::bundled())));
        MoodStatus::Ok
    })
}

/// Creates a resolver from a state GeoJSON file and a city CSV file.
///
/// # Safety
/// Both paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mood_resolver_from_paths(
    states: *const c_char,
    cities: *const c_char,
    out: *mut *mut MoodResolver,
) -> MoodStatus {
    guard(|| {
        if out.is_null() {
            return fail(MoodStatus::NullPointer, "out is null");
        }
        let (states, cities) = match (str_arg(states, "states"), str_arg(cities, "cities")) {
            (Ok(s), Ok(c)) => (s, c),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        match BoundarySet::from_paths(states, cities) {
            Ok(b) => {
                *out = Box::into_raw(Box::new(MoodResolver(b)));
                MoodStatus::Ok
            }
            Err(e) => fail(boundary_status(&e), e.to_string()),
        }
    })
}

/// Frees a resolver. Null is ignored.
///
/// # Safety
/// `r` must come from a `mood_resolver_new_*` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mood_resolver_free(r: *mut MoodResolver) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

fn static_code(region: &RegionId) -> *const c_char {
    static CODES: OnceLock<HashMap<&'static str, CString>> = OnceLock::new();
    let codes = CODES.get_or_init(|| {
        RegionId::all_states()
            .chain(RegionId::all_cities())
            .map(|r| (r.code(), CString::new(r.code()).unwrap()))
            .collect()
    });
    codes[region.code()].as_ptr()
}

unsafe fn resolve(
    r: *const MoodResolver,
    lat: f64,
    lon: f64,
    out: *mut *const c_char,
    f: impl FnOnce(&BoundarySet, &GeoPoint) -> Option<RegionId>,
) -> MoodStatus {
    guard(|| {
        if r.is_null() || out.is_null() {
            return fail(MoodStatus::NullPointer, "resolver or out is null");
        }
        let p = match GeoPoint::new(lat, lon) {
            Ok(p) => p,
            Err(e) => return fail(MoodStatus::InvalidCoordinate, e.to_string()),
        };
        match f(&(*r).0, &p) {
            Some(region) => {
                *out = static_code(&region);
                MoodStatus::Ok
            }
            None => {
                *out = ptr::null();
                fail(MoodStatus::NotFound, format!("({lat}, {lon}) is in no known region"))
            }
        }
    })
}

/// Writes the static state code containing the point to `out`.
/// Returns `NotFound` (and null) for points outside every state.
///
/// # Safety
/// `r` must be a live resolver handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mood_resolve_state(r: *const MoodResolver, lat: f64, lon: f64, out: *mut *const c_char) -> MoodStatus {
    resolve(r, lat, lon, out, |b, p| b.resolve_state(p))
}

/// Writes the static name of the nearest city within its radius to `out`.
///
/// # Safety
/// `r` must be a live resolver handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mood_resolve_city(r: *const MoodResolver, lat: f64, lon: f64, out: *mut *const c_char) -> MoodStatus {
    resolve(r, lat, lon, out, |b, p| b.resolve_city(p))
}
