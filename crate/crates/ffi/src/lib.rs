//! C ABI over the contrastive-edits library.
//!
//! Every entry point returns a [`CeStatus`]; results travel through out
//! parameters. On failure a message is kept per thread and can be read with
//! [`ce_last_error`]. Strings handed out by the library must be released
//! with [`ce_string_free`]; handles with their matching `_free` function.

use std::cell::RefCell;
use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::{Arc, Mutex};

use contrastive_edits::corpus::{load_dataset, Dataset, Tagger};
use contrastive_edits::interventions::{build_substitution_map, generate_edit, EditResources, InterventionCode, InterventionError, InterventionSpec, SubstitutionMap};
use contrastive_edits::lexicon::{ColorTable, Lexicon, Pos};
use contrastive_edits::matching::{min_weight_matching, BipartiteConceptGraph};
use contrastive_edits::retrieval::{ace, AceError};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CeStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    NotFound = 6,
    Undefined = 7,
    Panic = 8,
}

/// Part of speech selector.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CePos {
    Adj = 0,
    Noun = 1,
    Verb = 2,
    Adp = 3,
}

impl From<CePos> for Pos {
    fn from(p: CePos) -> Pos {
        match p {
            CePos::Adj => Pos::Adj,
            CePos::Noun => Pos::Noun,
            CePos::Verb => Pos::Verb,
            CePos::Adp => Pos::Adp,
        }
    }
}

/// Opaque lexicon handle.
pub struct CeLexicon {
    inner: Lexicon,
}

/// Opaque editor handle: a lexicon, a color table and a dataset, with
/// substitution maps built on first use and cached per code.
pub struct CeEditor {
    lexicon: Lexicon,
    colors: ColorTable,
    dataset: Dataset,
    maps: Mutex<HashMap<InterventionCode, Arc<SubstitutionMap>>>,
}

struct Failure {
    status: CeStatus,
    message: String,
}

impl Failure {
    fn new(status: CeStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard<F>(f: F) -> CeStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CeStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            CeStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(CeStatus::NullArgument, format!("`{name}` is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(CeStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")))
}

fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller promises a valid, writable pointer or NULL.
    unsafe { p.as_mut() }.ok_or_else(|| Failure::new(CeStatus::NullArgument, format!("`{name}` is NULL")))
}

fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller promises a live handle or NULL.
    unsafe { p.as_ref() }.ok_or_else(|| Failure::new(CeStatus::NullArgument, format!("`{name}` is NULL")))
}

fn c_string(s: &str) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::new(CeStatus::InvalidArgument, "result contains a NUL byte"))
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ce_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ce_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a WordNet database directory or a JSON-lines lexicon.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ce_lexicon_load(path: *const c_char, out: *mut *mut CeLexicon) -> CeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let inner = Lexicon::load(path).map_err(|e| {
            let status = if Path::new(path).exists() { CeStatus::Parse } else { CeStatus::Io };
            Failure::new(status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(CeLexicon { inner }));
        Ok(())
    })
}

/// # Safety
/// `lex` must come from [`ce_lexicon_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ce_lexicon_free(lex: *mut CeLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// Path similarity of two lemmas. `CE_STATUS_NOT_FOUND` when either lemma
/// is unknown or the two are not connected.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ce_path_similarity(
    lex: *const CeLexicon,
    a: *const c_char,
    b: *const c_char,
    pos: CePos,
    out: *mut f64,
) -> CeStatus {
    guard(|| {
        let lex = ref_arg(lex, "lex")?;
        let (a, b) = (str_arg(a, "a")?, str_arg(b, "b")?);
        let out = out_arg(out, "out")?;
        *out = lex
            .inner
            .path_similarity(a, b, pos.into())
            .ok_or_else(|| Failure::new(CeStatus::NotFound, format!("no path between `{a}` and `{b}`")))?;
        Ok(())
    })
}

unsafe fn linked(
    lex: *const CeLexicon,
    word: *const c_char,
    pos: CePos,
    out: *mut *mut c_char,
    relation: &str,
    f: fn(&Lexicon, &str, Pos) -> Option<String>,
) -> CeStatus {
    guard(|| {
        let lex = ref_arg(lex, "lex")?;
        let word = str_arg(word, "word")?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let found = f(&lex.inner, word, pos.into()).ok_or_else(|| Failure::new(CeStatus::NotFound, format!("`{word}` has no {relation}")))?;
        *out = c_string(&found)?;
        Ok(())
    })
}

/// First hypernym lemma of the first sense; free the result with [`ce_string_free`].
///
/// # Safety
/// Pointers must be valid; `word` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ce_hypernym_of(lex: *const CeLexicon, word: *const c_char, pos: CePos, out: *mut *mut c_char) -> CeStatus {
    linked(lex, word, pos, out, "hypernym", |l, w, p| l.hypernym_of(w, p).map(str::to_string))
}

/// First hyponym lemma of the first sense; free the result with [`ce_string_free`].
///
/// # Safety
/// Pointers must be valid; `word` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ce_hyponym_of(lex: *const CeLexicon, word: *const c_char, pos: CePos, out: *mut *mut c_char) -> CeStatus {
    linked(lex, word, pos, out, "hyponym", |l, w, p| l.hyponym_of(w, p).map(str::to_string))
}

/// First antonym; free the result with [`ce_string_free`].
///
/// # Safety
/// Pointers must be valid; `word` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ce_antonym_of(lex: *const CeLexicon, word: *const c_char, pos: CePos, out: *mut *mut c_char) -> CeStatus {
    linked(lex, word, pos, out, "antonym", |l, w, p| l.antonym_of(w, p).map(str::to_string))
}

/// Minimum-weight maximum-cover matching over a row-major
/// `n_sources x n_targets` weight matrix, NaN marking a missing edge.
/// `assignment` receives `n_sources` entries: the matched target or -1.
///
/// # Safety
/// `weights` must hold `n_sources * n_targets` values and `assignment`
/// room for `n_sources`.
#[no_mangle]
pub unsafe extern "C" fn ce_matching_solve(
    weights: *const f64,
    n_sources: usize,
    n_targets: usize,
    assignment: *mut i64,
    total_weight: *mut f64,
) -> CeStatus {
    guard(|| {
        let len = n_sources
            .checked_mul(n_targets)
            .ok_or_else(|| Failure::new(CeStatus::InvalidArgument, "matrix size overflows"))?;
        if len > 0 && weights.is_null() {
            return Err(Failure::new(CeStatus::NullArgument, "`weights` is NULL"));
        }
        if n_sources > 0 && assignment.is_null() {
            return Err(Failure::new(CeStatus::NullArgument, "`assignment` is NULL"));
        }
        let total = out_arg(total_weight, "total_weight")?;
        let w = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(weights, len).to_vec() };
        let g = BipartiteConceptGraph::from_dense(n_sources, n_targets, w).map_err(|e| Failure::new(CeStatus::InvalidArgument, e.to_string()))?;
        let m = min_weight_matching(&g);
        if n_sources > 0 {
            let out = std::slice::from_raw_parts_mut(assignment, n_sources);
            for (slot, a) in out.iter_mut().zip(m.assignment(n_sources)) {
                *slot = a.map_or(-1, |t| t as i64);
            }
        }
        *total = m.total_weight;
        Ok(())
    })
}

/// `|o - o_star| / o / n * scale`. `CE_STATUS_UNDEFINED` when `o` is zero
/// or `n` is zero; `CE_STATUS_INVALID_ARGUMENT` when `scale` is not a power
/// of ten.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ce_ace(o: f64, o_star: f64, n: usize, scale: u64, out: *mut f64) -> CeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = ace(o, o_star, n, scale).map_err(|e| {
            let status = match e {
                AceError::ZeroDefault | AceError::NoPerturbation => CeStatus::Undefined,
                _ => CeStatus::InvalidArgument,
            };
            Failure::new(status, e.to_string())
        })?;
        *out = s.value;
        Ok(())
    })
}

/// Loads everything an editor needs. The dataset is tagged with the
/// built-in tagger unless `pretagged` is true.
///
/// # Safety
/// Strings must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ce_editor_new(
    lexicon_path: *const c_char,
    colors_path: *const c_char,
    dataset_path: *const c_char,
    pretagged: bool,
    out: *mut *mut CeEditor,
) -> CeStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let lp = str_arg(lexicon_path, "lexicon_path")?;
        let cp = str_arg(colors_path, "colors_path")?;
        let dp = str_arg(dataset_path, "dataset_path")?;
        let io = |e: &dyn std::fmt::Display, p: &str| {
            let status = if Path::new(p).exists() { CeStatus::Parse } else { CeStatus::Io };
            Failure::new(status, e.to_string())
        };
        let lexicon = Lexicon::load(lp).map_err(|e| io(&e, lp))?;
        let colors = ColorTable::load_csv(cp).map_err(|e| io(&e, cp))?;
        let (dataset, _) = load_dataset(dp, pretagged, &Tagger::new(&lexicon)).map_err(|e| io(&e, dp))?;
        *out = Box::into_raw(Box::new(CeEditor {
            lexicon,
            colors,
            dataset,
            maps: Mutex::new(HashMap::new()),
        }));
        Ok(())
    })
}

/// # Safety
/// `editor` must come from [`ce_editor_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ce_editor_free(editor: *mut CeEditor) {
    if !editor.is_null() {
        drop(Box::from_raw(editor));
    }
}

/// Number of queries in the editor's dataset.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ce_editor_query_count(editor: *const CeEditor, out: *mut usize) -> CeStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(editor, "editor")?.dataset.queries.len();
        Ok(())
    })
}

/// Applies intervention `code` to query `query_id` and returns the edited
/// query as a JSON object `{query_id, code, seed, edited_text,
/// substitutions, n_perturbed}`. Free the result with [`ce_string_free`].
/// Safe to call from several threads on one editor.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ce_editor_edit(
    editor: *const CeEditor,
    code: *const c_char,
    seed: u64,
    query_id: *const c_char,
    json_out: *mut *mut c_char,
) -> CeStatus {
    guard(|| {
        let ed = ref_arg(editor, "editor")?;
        let code_str = str_arg(code, "code")?;
        let qid = str_arg(query_id, "query_id")?;
        let out = out_arg(json_out, "json_out")?;
        *out = ptr::null_mut();
        let code: InterventionCode = code_str.parse().map_err(|e: InterventionError| Failure::new(CeStatus::InvalidArgument, e.to_string()))?;
        let q = ed
            .dataset
            .queries
            .iter()
            .find(|q| q.id == qid)
            .ok_or_else(|| Failure::new(CeStatus::NotFound, format!("no query `{qid}`")))?;
        let spec = InterventionSpec::new(code, seed);
        spec.validate().map_err(|e| Failure::new(CeStatus::InvalidArgument, e.to_string()))?;
        let map = if code.needs_map() {
            let key = code.map_key();
            let mut maps = ed.maps.lock().unwrap_or_else(|p| p.into_inner());
            let m = match maps.entry(key) {
                Entry::Occupied(e) => Arc::clone(e.get()),
                Entry::Vacant(e) => {
                    let m = build_substitution_map(&ed.dataset, key, &ed.lexicon, &ed.colors).map_err(|e| Failure::new(CeStatus::InvalidArgument, e.to_string()))?;
                    Arc::clone(e.insert(Arc::new(m)))
                }
            };
            Some(m)
        } else {
            None
        };
        let res = EditResources {
            lexicon: &ed.lexicon,
            map: map.as_deref(),
        };
        let edited = generate_edit(q, &spec, &res).map_err(|e| Failure::new(CeStatus::InvalidArgument, e.to_string()))?;
        *out = c_string(&serde_json::to_string(&edited).expect("edits serialize"))?;
        Ok(())
    })
}
