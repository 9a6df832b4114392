//! Shared fixtures for integration tests.
#![allow(dead_code)]

pub mod checks;
pub mod oracles;

use std::path::PathBuf;
use std::sync::OnceLock;

use contrastive_edits::corpus::{build_dataset, Dataset, PreToken, Record, Tagger};
use contrastive_edits::lexicon::{ColorTable, Lexicon};

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn wordnet() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Lexicon::load(repo_path("data/wordnet-3.0")).expect("WordNet 3.0 database under data/"))
}

pub fn colors() -> &'static ColorTable {
    static COLORS: OnceLock<ColorTable> = OnceLock::new();
    COLORS.get_or_init(|| ColorTable::load_csv(repo_path("data/colors.csv")).unwrap())
}

/// One annotated word: surface and gold tag (ADJ, NOUN, NOUN.PL, VERB, ADP or `-`).
pub type Gold = Vec<(String, String)>;

pub fn gold_sentences() -> Vec<Gold> {
    let text = std::fs::read_to_string(repo_path("fixtures/gold_tags.txt")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_whitespace()
                .map(|p| {
                    let (w, t) = p.rsplit_once('/').expect("word/TAG");
                    (w.to_string(), t.to_string())
                })
                .collect()
        })
        .collect()
}

fn pretoken(word: &str, tag: &str) -> PreToken {
    let (pos, fine) = match tag {
        "NOUN.PL" => ("NOUN", Some("NNS")),
        "NOUN" => ("NOUN", Some("NN")),
        "VERB" => {
            let fine = if word.ends_with("ing") {
                "VBG"
            } else if word.ends_with("ed") {
                "VBD"
            } else if word.ends_with('s') {
                "VBZ"
            } else {
                "VBP"
            };
            ("VERB", Some(fine))
        }
        "-" => ("X", None),
        other => (other, None),
    };
    PreToken {
        text: word.to_string(),
        pos: pos.to_string(),
        fine_tag: fine.map(str::to_string),
        number: None,
    }
}

/// The gold sentences as a pre-tagged dataset; sentence `i` becomes image
/// `s{i:02}` with filler corpus captions.
pub fn gold_dataset() -> Dataset {
    let records = gold_sentences()
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            let sentence = g.iter().map(|(w, _)| w.as_str()).collect::<Vec<_>>().join(" ");
            let mut captions = vec![sentence];
            captions.extend((1..5).map(|j| format!("filler caption {j} for sentence {i}")));
            let rec = Record {
                image_id: format!("s{i:02}"),
                captions,
                tokens: Some(vec![g.iter().map(|(w, t)| pretoken(w, t)).collect()]),
                image_ref: None,
            };
            (i + 1, rec)
        })
        .collect();
    build_dataset(records, true, &Tagger::new(wordnet())).unwrap().0
}

pub fn fixture_dataset() -> Dataset {
    let (d, warnings) = contrastive_edits::corpus::load_dataset(repo_path("fixtures/dataset10.jsonl"), false, &Tagger::new(wordnet())).unwrap();
    assert!(warnings.is_empty());
    d
}
