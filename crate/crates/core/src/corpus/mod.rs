//! Captioned dataset ingestion, POS extraction and corpus statistics.
//!
//! Input is JSON lines, one record per image:
//! `{"image_id", "captions": [5 strings], "tokens"?: [[{text, pos, fine_tag?, number?}]], "image_ref"?}`.
//! The first caption becomes the query; captions 2-5 form the textual corpus
//! and the image itself forms the visual corpus.

mod tagger;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{lemma_key, ColorTable, Pos, VerbForm};

pub use tagger::{tokenize, Tagger, ADPOSITIONS};

/// Captions required per image: one query plus four corpus captions.
pub const CAPTIONS_PER_IMAGE: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Number {
    #[serde(rename = "SINGULAR")]
    Singular,
    #[serde(rename = "PLURAL")]
    Plural,
    #[serde(rename = "N/A")]
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub pos: Option<Pos>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verb_form: Option<VerbForm>,
    pub number: Number,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub image_id: String,
    /// Tokens joined by single spaces.
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Query {
    pub fn new(id: impl Into<String>, image_id: impl Into<String>, tokens: Vec<Token>) -> Query {
        let text = join_surfaces(tokens.iter().map(|t| t.surface.as_str()));
        Query {
            id: id.into(),
            image_id: image_id.into(),
            text,
            tokens,
        }
    }
}

pub(crate) fn join_surfaces<'a>(parts: impl Iterator<Item = &'a str>) -> String {
    parts.collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusText {
    pub id: String,
    pub image_id: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusImage {
    pub id: String,
    pub image_id: String,
    /// Opaque media reference passed through to backends.
    pub media: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub queries: Vec<Query>,
    pub text_corpus: Vec<CorpusText>,
    pub image_corpus: Vec<CorpusImage>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate image_id `{0}`")]
    DuplicateImage(String),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct PreToken {
    pub text: String,
    pub pos: String,
    #[serde(default)]
    pub fine_tag: Option<String>,
    #[serde(default)]
    pub number: Option<Number>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct Record {
    pub image_id: String,
    pub captions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<Vec<PreToken>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

/// Converts externally produced tags into tokens. POS labels outside the
/// four targeted classes map to no POS; number comes from `number` or the
/// Penn `NNS`/`NNPS` fine tags.
pub fn tokens_from_pretagged(pre: &[PreToken], tagger: &Tagger<'_>) -> Vec<Token> {
    pre.iter()
        .enumerate()
        .map(|(index, t)| {
            let pos = t.pos.parse::<Pos>().ok();
            let fine = t.fine_tag.as_deref();
            let verb_form = match pos {
                Some(Pos::Verb) => fine.and_then(VerbForm::from_penn),
                _ => None,
            };
            let (lemma, number) = match pos {
                Some(Pos::Noun) => {
                    let (lemma, guessed) = tagger.noun_lemma(&t.text);
                    let number = t.number.unwrap_or(match fine {
                        Some("NNS" | "NNPS") => Number::Plural,
                        Some(_) => Number::Singular,
                        None => guessed,
                    });
                    (lemma, number)
                }
                Some(p) => (tagger.lemma_for(&t.text, p), Number::NotApplicable),
                None => (t.text.to_lowercase(), Number::NotApplicable),
            };
            Token {
                surface: t.text.clone(),
                lemma,
                pos,
                verb_form,
                number,
                index,
            }
        })
        .collect()
}

/// Query id of an image's first caption.
pub fn query_id(image_id: &str) -> String {
    format!("{image_id}#0")
}

/// Loads a dataset. Records with fewer than five captions are dropped with
/// a warning (returned alongside the dataset); duplicate image ids are an
/// error. Output is ordered by image id.
pub fn load_dataset(
    path: impl AsRef<Path>,
    pretagged: bool,
    tagger: &Tagger<'_>,
) -> Result<(Dataset, Vec<String>), CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push((i + 1, rec));
    }
    build_dataset(records, pretagged, tagger)
}

/// Builds a dataset from parsed `(line, record)` pairs.
pub fn build_dataset(
    records: Vec<(usize, Record)>,
    pretagged: bool,
    tagger: &Tagger<'_>,
) -> Result<(Dataset, Vec<String>), CorpusError> {
    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for (line, rec) in records {
        if !seen.insert(rec.image_id.clone()) {
            return Err(CorpusError::DuplicateImage(rec.image_id));
        }
        if rec.captions.len() < CAPTIONS_PER_IMAGE {
            let msg = format!(
                "line {line}: image `{}` has {} captions (need {CAPTIONS_PER_IMAGE}); record rejected",
                rec.image_id,
                rec.captions.len()
            );
            log::warn!("{msg}");
            warnings.push(msg);
            continue;
        }
        if pretagged && rec.tokens.as_ref().is_none_or(|t| t.is_empty()) {
            return Err(CorpusError::Malformed {
                line,
                message: format!("image `{}` lacks pre-tagged tokens", rec.image_id),
            });
        }
        kept.push(rec);
    }
    kept.sort_by(|a, b| a.image_id.cmp(&b.image_id));

    let queries: Vec<Query> = kept
        .par_iter()
        .map(|rec| {
            let tokens = match (&rec.tokens, pretagged) {
                (Some(t), true) => tokens_from_pretagged(&t[0], tagger),
                _ => tagger.tag(&rec.captions[0]),
            };
            Query::new(query_id(&rec.image_id), rec.image_id.clone(), tokens)
        })
        .collect();

    let mut text_corpus = Vec::with_capacity(kept.len() * 4);
    let mut image_corpus = Vec::with_capacity(kept.len());
    for rec in &kept {
        for (i, caption) in rec.captions.iter().enumerate().take(CAPTIONS_PER_IMAGE).skip(1) {
            text_corpus.push(CorpusText {
                id: format!("{}#{i}", rec.image_id),
                image_id: rec.image_id.clone(),
                text: caption.trim().to_string(),
            });
        }
        image_corpus.push(CorpusImage {
            id: rec.image_id.clone(),
            image_id: rec.image_id.clone(),
            media: rec.image_ref.clone(),
        });
    }
    Ok((
        Dataset {
            queries,
            text_corpus,
            image_corpus,
        },
        warnings,
    ))
}

/// Tokens of `pos` in order, optionally restricted to one grammatical number.
pub fn extract_pos(q: &Query, pos: Pos, number: Option<Number>) -> Vec<&Token> {
    q.tokens
        .iter()
        .filter(|t| t.pos == Some(pos))
        .filter(|t| number.is_none_or(|n| t.number == n))
        .collect()
}

/// Tokens naming a color in `table`, regardless of their tag.
pub fn detect_colors<'q>(q: &'q Query, table: &ColorTable) -> Vec<&'q Token> {
    q.tokens
        .iter()
        .filter(|t| table.contains(&lemma_key(&t.surface)) || table.contains(&lemma_key(&t.lemma)))
        .collect()
}

/// Per-POS counts over the queries of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosStatistics {
    pub queries: usize,
    pub totals: BTreeMap<Pos, usize>,
    pub means: BTreeMap<Pos, f64>,
    /// count-per-query -> number of queries, per POS.
    pub histograms: BTreeMap<Pos, BTreeMap<usize, usize>>,
}

pub fn pos_statistics(d: &Dataset) -> PosStatistics {
    let mut totals = BTreeMap::new();
    let mut means = BTreeMap::new();
    let mut histograms = BTreeMap::new();
    for pos in Pos::ALL {
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        let mut total = 0;
        for q in &d.queries {
            let c = q.tokens.iter().filter(|t| t.pos == Some(pos)).count();
            total += c;
            *hist.entry(c).or_default() += 1;
        }
        let mean = if d.queries.is_empty() {
            0.0
        } else {
            total as f64 / d.queries.len() as f64
        };
        totals.insert(pos, total);
        means.insert(pos, mean);
        histograms.insert(pos, hist);
    }
    PosStatistics {
        queries: d.queries.len(),
        totals,
        means,
        histograms,
    }
}
