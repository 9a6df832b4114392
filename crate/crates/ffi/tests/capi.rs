use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use contrastive_edits_ffi::*;

fn repo(rel: &str) -> CString {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel);
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = ce_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { ce_string_free(s) };
    out
}

fn mini() -> *mut CeLexicon {
    let mut lex = ptr::null_mut();
    let st = unsafe { ce_lexicon_load(repo("fixtures/mini_lexicon.jsonl").as_ptr(), &mut lex) };
    assert_eq!(st, CeStatus::Ok);
    lex
}

#[test]
fn lexicon_queries() {
    let lex = mini();
    let c = |s: &str| CString::new(s).unwrap();
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(ce_hypernym_of(lex, c("dog").as_ptr(), CePos::Noun, &mut out), CeStatus::Ok);
        assert_eq!(take(out), "canine");
        assert_eq!(ce_antonym_of(lex, c("young").as_ptr(), CePos::Adj, &mut out), CeStatus::Ok);
        assert_eq!(take(out), "old");
        assert_eq!(ce_hyponym_of(lex, c("young").as_ptr(), CePos::Adj, &mut out), CeStatus::NotFound);
        assert!(out.is_null());
        assert!(last_error().contains("young"));

        let mut sim = 0.0;
        assert_eq!(ce_path_similarity(lex, c("dog").as_ptr(), c("dog").as_ptr(), CePos::Noun, &mut sim), CeStatus::Ok);
        assert_eq!(sim, 1.0);
        assert_eq!(ce_path_similarity(lex, c("dog").as_ptr(), c("canine").as_ptr(), CePos::Noun, &mut sim), CeStatus::Ok);
        assert_eq!(sim, 0.5);
        assert_eq!(
            ce_path_similarity(lex, c("dog").as_ptr(), c("zebra").as_ptr(), CePos::Noun, &mut sim),
            CeStatus::NotFound
        );
        ce_lexicon_free(lex);
    }
}

#[test]
fn argument_errors() {
    unsafe {
        let mut lex = ptr::null_mut();
        assert_eq!(ce_lexicon_load(ptr::null(), &mut lex), CeStatus::NullArgument);
        assert!(last_error().contains("path"));
        let missing = CString::new("/nonexistent/lexicon").unwrap();
        assert_eq!(ce_lexicon_load(missing.as_ptr(), &mut lex), CeStatus::Io);
        assert!(lex.is_null());
        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(ce_lexicon_load(bad.as_ptr().cast(), &mut lex), CeStatus::InvalidUtf8);
        assert_eq!(ce_lexicon_load(repo("fixtures/dataset10.jsonl").as_ptr(), &mut lex), CeStatus::Parse);

        // A successful call clears the message.
        let mut v = 0.0;
        assert_eq!(ce_ace(0.5, 0.4, 1000, 100_000, &mut v), CeStatus::Ok);
        assert!(ce_last_error().is_null());

        // Freeing NULL is a no-op.
        ce_lexicon_free(ptr::null_mut());
        ce_editor_free(ptr::null_mut());
        ce_string_free(ptr::null_mut());
    }
}

#[test]
fn ace_status() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(ce_ace(0.5, 0.4, 1000, 100_000, &mut v), CeStatus::Ok);
        assert_eq!(v, 20.0);
        assert_eq!(ce_ace(0.0, 0.0, 10, 100_000, &mut v), CeStatus::Undefined);
        assert!(last_error().contains("zero"));
        assert_eq!(ce_ace(0.5, 0.5, 0, 100_000, &mut v), CeStatus::Undefined);
        assert_eq!(ce_ace(0.5, 0.4, 10, 300, &mut v), CeStatus::InvalidArgument);
        assert_eq!(ce_ace(0.5, 0.4, 10, 100, ptr::null_mut()), CeStatus::NullArgument);
    }
}

#[test]
fn matching_through_the_abi() {
    let nan = f64::NAN;
    // 3 sources, 2 targets; source 1 has no edges.
    let w = [1.0, 4.0, nan, nan, 2.0, 1.5];
    let mut a = [7i64; 3];
    let mut total = 0.0;
    unsafe {
        assert_eq!(ce_matching_solve(w.as_ptr(), 3, 2, a.as_mut_ptr(), &mut total), CeStatus::Ok);
    }
    assert_eq!(a, [0, -1, 1]);
    assert_eq!(total, 2.5);

    let bad = [1.0, -2.0];
    unsafe {
        assert_eq!(ce_matching_solve(bad.as_ptr(), 1, 2, a.as_mut_ptr(), &mut total), CeStatus::InvalidArgument);
        assert_eq!(ce_matching_solve(ptr::null(), 1, 2, a.as_mut_ptr(), &mut total), CeStatus::NullArgument);
        assert_eq!(ce_matching_solve(ptr::null(), 0, 0, ptr::null_mut(), &mut total), CeStatus::Ok);
    }
    assert_eq!(total, 0.0);
}

#[test]
fn editor_edits_match_the_library() {
    use contrastive_edits::corpus::{load_dataset, Tagger};
    use contrastive_edits::interventions::{edit_dataset, InterventionSpec};
    use contrastive_edits::lexicon::{ColorTable, Lexicon};

    let (lp, cp, dp) = (repo("data/wordnet-3.0"), repo("data/colors.csv"), repo("fixtures/dataset10.jsonl"));
    let mut ed = ptr::null_mut();
    unsafe {
        assert_eq!(ce_editor_new(lp.as_ptr(), cp.as_ptr(), dp.as_ptr(), false, &mut ed), CeStatus::Ok);
        let mut count = 0;
        assert_eq!(ce_editor_query_count(ed, &mut count), CeStatus::Ok);
        assert_eq!(count, 10);
    }

    let lex = Lexicon::load(lp.to_str().unwrap()).unwrap();
    let colors = ColorTable::load_csv(cp.to_str().unwrap()).unwrap();
    let (d, _) = load_dataset(dp.to_str().unwrap(), false, &Tagger::new(&lex)).unwrap();
    for code in ["NOUN-HE", "ADJ-A", "ADJ-CI", "NOUN-B", "ADP-E", "VERB-P", "ADJ-SG-A", "NOUN-HO"] {
        let batch = edit_dataset(&d, &InterventionSpec::new(code.parse().unwrap(), 11), &lex, &colors).unwrap();
        let c = CString::new(code).unwrap();
        for e in &batch.edits {
            let qid = CString::new(e.query_id.as_str()).unwrap();
            let mut out = ptr::null_mut();
            let st = unsafe { ce_editor_edit(ed, c.as_ptr(), 11, qid.as_ptr(), &mut out) };
            assert_eq!(st, CeStatus::Ok, "{code}");
            let got: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
            assert_eq!(got, serde_json::to_value(e).unwrap(), "{code} {}", e.query_id);
        }
    }

    unsafe {
        let mut out = ptr::null_mut();
        let bad = CString::new("NOUN-ZZ").unwrap();
        let q = CString::new(d.queries[0].id.as_str()).unwrap();
        assert_eq!(ce_editor_edit(ed, bad.as_ptr(), 0, q.as_ptr(), &mut out), CeStatus::InvalidArgument);
        let code = CString::new("NOUN-B").unwrap();
        let nope = CString::new("nope").unwrap();
        assert_eq!(ce_editor_edit(ed, code.as_ptr(), 0, nope.as_ptr(), &mut out), CeStatus::NotFound);
        assert!(out.is_null());
        ce_editor_free(ed);
    }
}

#[test]
fn editor_is_shareable_across_threads() {
    struct Shared(*mut CeEditor);
    unsafe impl Sync for Shared {}
    impl Shared {
        fn get(&self) -> *mut CeEditor {
            self.0
        }
    }
    let (lp, cp, dp) = (repo("fixtures/mini_lexicon.jsonl"), repo("data/colors.csv"), repo("fixtures/dataset10.jsonl"));
    let mut ed = ptr::null_mut();
    unsafe {
        assert_eq!(ce_editor_new(lp.as_ptr(), cp.as_ptr(), dp.as_ptr(), false, &mut ed), CeStatus::Ok);
    }
    let shared = Shared(ed);
    let code = CString::new("ADJ-CA").unwrap();
    let results: Vec<Vec<String>> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..4)
            .map(|_| {
                s.spawn(|| {
                    (1..=10)
                        .map(|i| {
                            let q = CString::new(format!("img{i:02}#0")).unwrap();
                            let mut out = ptr::null_mut();
                            let st = unsafe { ce_editor_edit(shared.get(), code.as_ptr(), 5, q.as_ptr(), &mut out) };
                            assert_eq!(st, CeStatus::Ok, "{}", last_error());
                            take(out)
                        })
                        .collect()
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(results.windows(2).all(|w| w[0] == w[1]));
    unsafe { ce_editor_free(ed) };
}

#[test]
fn c_program_links_against_the_header() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| std::process::Command::new(c).arg("--version").output().is_ok()) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libcontrastive_edits_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "contrastive_edits.h"

int main(int argc, char **argv) {
    double v = 0;
    if (ce_ace(0.5, 0.4, 1000, 100000, &v) != CE_STATUS_OK || v != 20.0) return 1;
    if (ce_ace(0.0, 0.0, 3, 100000, &v) != CE_STATUS_UNDEFINED || ce_last_error() == NULL) return 2;

    double w[4] = {1.0, 2.0, 2.0, NAN};
    int64_t b[2];
    double total = 0;
    if (ce_matching_solve(w, 2, 2, b, &total) != CE_STATUS_OK) return 3;
    if (b[0] != 1 || b[1] != 0 || total != 4.0) return 4;

    CeLexicon *lex = NULL;
    if (ce_lexicon_load(argv[1], &lex) != CE_STATUS_OK) return 5;
    char *h = NULL;
    if (ce_hypernym_of(lex, "dog", CE_POS_NOUN, &h) != CE_STATUS_OK || strcmp(h, "canine") != 0) return 6;
    ce_string_free(h);
    ce_lexicon_free(lex);
    puts("ok");
    return argc == 2 ? 0 : 7;
}
"#,
    )
    .unwrap();
    let exe = dir.join("smoke");
    let status = std::process::Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = std::process::Command::new(&exe)
        .arg(repo("fixtures/mini_lexicon.jsonl").to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
