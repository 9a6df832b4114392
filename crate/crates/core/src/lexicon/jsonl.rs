//! Normalized JSON-lines lexicon: one synset object per line.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{display_lemma, verify_links, Lexicon, LexiconError, Pos, Synset};

#[derive(Deserialize)]
struct Record {
    id: String,
    pos: String,
    lemmas: Vec<String>,
    #[serde(default)]
    hypernyms: Vec<String>,
    #[serde(default)]
    hyponyms: Vec<String>,
    #[serde(default)]
    antonyms: Vec<(String, String)>,
}

pub(super) fn load_file(path: &Path) -> Result<Lexicon, LexiconError> {
    let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let malformed = |line: usize, offset: usize, message: String| LexiconError::Malformed {
        file: path.to_path_buf(),
        line,
        offset,
        message,
    };

    let mut records = Vec::new();
    let mut offset = 0;
    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let start = offset;
        offset += raw.len();
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let rec: Record =
            serde_json::from_str(line).map_err(|e| malformed(i + 1, start, e.to_string()))?;
        let pos: Pos = rec.pos.parse().map_err(|e| malformed(i + 1, start, e))?;
        if pos == Pos::Adp {
            return Err(malformed(i + 1, start, "adpositions are not lexicon entries".into()));
        }
        if rec.lemmas.is_empty() {
            return Err(malformed(i + 1, start, format!("synset {} has no lemmas", rec.id)));
        }
        records.push((i + 1, start, pos, rec));
    }

    let mut ids: HashMap<String, usize> = HashMap::new();
    for (n, (line, start, _, rec)) in records.iter().enumerate() {
        if ids.insert(rec.id.clone(), n).is_some() {
            return Err(malformed(*line, *start, format!("duplicate synset id {}", rec.id)));
        }
    }
    let resolve = |from: &str, to: &str| {
        ids.get(to).copied().ok_or_else(|| LexiconError::DanglingLink {
            from: from.to_string(),
            to: to.to_string(),
        })
    };

    let mut synsets = Vec::with_capacity(records.len());
    for (_, _, pos, rec) in &records {
        synsets.push(Synset {
            id: rec.id.clone(),
            pos: *pos,
            lemmas: rec.lemmas.iter().map(|l| display_lemma(l)).collect(),
            hypernyms: rec
                .hypernyms
                .iter()
                .map(|h| resolve(&rec.id, h))
                .collect::<Result<_, _>>()?,
            hyponyms: rec
                .hyponyms
                .iter()
                .map(|h| resolve(&rec.id, h))
                .collect::<Result<_, _>>()?,
            antonyms: rec
                .antonyms
                .iter()
                .map(|(a, b)| (display_lemma(a), display_lemma(b)))
                .collect(),
        });
    }
    verify_links(&synsets)?;
    Ok(Lexicon::assemble(synsets, None, HashMap::new()))
}
