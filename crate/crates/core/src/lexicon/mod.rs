//! Lexical knowledge base: synsets, hypernym/hyponym links, antonyms, and
//! the auxiliary color and size tables used by adjective edits.
//!
//! Two on-disk formats are accepted by [`Lexicon::load`]:
//!
//! * a WordNet 3.0 database directory (`index.{noun,verb,adj}` and
//!   `data.{noun,verb,adj}`, plus optional `*.exc` morphology exceptions);
//! * a normalized JSON-lines file with one synset per line:
//!   `{"id", "pos", "lemmas", "hypernyms", "hyponyms", "antonyms"}`.
//!
//! Linked synsets are kept sorted by canonical synset name
//! (`lemma.pos.NN`), so "first hypernym" and "first hyponym" are stable
//! regardless of the pointer order in the source files.

mod colors;
mod jsonl;
mod morph;
mod wordnet;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use colors::{color_distance, ColorEntry, ColorOrigin, ColorTable, SizeTable};

/// Coarse part of speech targeted by interventions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    #[serde(rename = "ADJ")]
    Adj,
    #[serde(rename = "NOUN")]
    Noun,
    #[serde(rename = "VERB")]
    Verb,
    #[serde(rename = "ADP")]
    Adp,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Adj, Pos::Noun, Pos::Verb, Pos::Adp];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Adj => "ADJ",
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adp => "ADP",
        }
    }

    /// Single-letter code used in synset names.
    fn letter(self) -> char {
        match self {
            Pos::Adj => 'a',
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adp => 'p',
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "ADJ" | "A" | "S" | "JJ" => Ok(Pos::Adj),
            "NOUN" | "N" | "NN" => Ok(Pos::Noun),
            "VERB" | "V" | "VB" => Ok(Pos::Verb),
            "ADP" | "IN" => Ok(Pos::Adp),
            other => Err(format!("unknown part of speech `{other}`")),
        }
    }
}

/// Fine-grained verb tag, following the Penn Treebank verb tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VerbForm {
    #[serde(rename = "VB")]
    Base,
    #[serde(rename = "VBD")]
    Past,
    #[serde(rename = "VBG")]
    Gerund,
    #[serde(rename = "VBN")]
    PastParticiple,
    #[serde(rename = "VBZ")]
    ThirdSingular,
}

impl VerbForm {
    pub const ALL: [VerbForm; 5] = [
        VerbForm::Base,
        VerbForm::Past,
        VerbForm::Gerund,
        VerbForm::PastParticiple,
        VerbForm::ThirdSingular,
    ];

    pub fn penn_tag(self) -> &'static str {
        match self {
            VerbForm::Base => "VB",
            VerbForm::Past => "VBD",
            VerbForm::Gerund => "VBG",
            VerbForm::PastParticiple => "VBN",
            VerbForm::ThirdSingular => "VBZ",
        }
    }

    /// Maps a Penn verb tag to a form. `VBP` (non-3rd-person present) is
    /// folded into the base form.
    pub fn from_penn(tag: &str) -> Option<VerbForm> {
        match tag {
            "VB" | "VBP" => Some(VerbForm::Base),
            "VBD" => Some(VerbForm::Past),
            "VBG" => Some(VerbForm::Gerund),
            "VBN" => Some(VerbForm::PastParticiple),
            "VBZ" => Some(VerbForm::ThirdSingular),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing index files in {0}")]
    MissingIndex(PathBuf),
    #[error("{file}:{line} (byte {offset}): {message}")]
    Malformed {
        file: PathBuf,
        line: usize,
        offset: usize,
        message: String,
    },
    #[error("synset {from} links to unknown synset {to}")]
    DanglingLink { from: String, to: String },
    #[error("hypernym/hyponym links of {a} and {b} are not mutually inverse")]
    NotInverse { a: String, b: String },
    #[error("color table: {0}")]
    Color(String),
}

/// Dense handle into [`Lexicon::synsets`].
pub type SynsetIdx = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Synset {
    /// Source identifier: `offset-pos` for WordNet files, the `id` field for JSON lines.
    pub id: String,
    pub pos: Pos,
    /// Display lemmas (underscores replaced by spaces), in source order.
    pub lemmas: Vec<String>,
    pub hypernyms: Vec<SynsetIdx>,
    pub hyponyms: Vec<SynsetIdx>,
    /// (source lemma, target lemma) antonym pairs.
    pub antonyms: Vec<(String, String)>,
}

/// Immutable lexical database.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    synsets: Vec<Synset>,
    lemma_index: HashMap<(String, Pos), Vec<SynsetIdx>>,
    antonym_pairs: HashMap<(String, Pos), Vec<String>>,
    exceptions: HashMap<(String, Pos), Vec<String>>,
}

/// Normalizes a surface word or lemma into the lookup key used by the
/// index: trimmed, lowercase, with spaces replaced by underscores.
pub fn lemma_key(word: &str) -> String {
    word.trim().to_lowercase().replace(' ', "_")
}

/// Converts a stored lemma into its display form.
pub(crate) fn display_lemma(raw: &str) -> String {
    raw.replace('_', " ")
}

impl Lexicon {
    /// Loads either a WordNet database directory or a normalized JSON-lines
    /// file, depending on what `path` points at.
    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon, LexiconError> {
        let path = path.as_ref();
        if path.is_dir() {
            wordnet::load_dir(path)
        } else {
            jsonl::load_file(path)
        }
    }

    /// Assembles a lexicon from parsed synsets. `senses` gives, per lemma
    /// key and POS, the synsets in sense order; when `None`, sense order is
    /// the synset order.
    pub(crate) fn assemble(
        mut synsets: Vec<Synset>,
        senses: Option<HashMap<(String, Pos), Vec<SynsetIdx>>>,
        exceptions: HashMap<(String, Pos), Vec<String>>,
    ) -> Lexicon {
        let lemma_index = match senses {
            Some(s) => s,
            None => {
                let mut index: HashMap<(String, Pos), Vec<SynsetIdx>> = HashMap::new();
                for (i, s) in synsets.iter().enumerate() {
                    for lemma in &s.lemmas {
                        let entry = index.entry((lemma_key(lemma), s.pos)).or_default();
                        if !entry.contains(&i) {
                            entry.push(i);
                        }
                    }
                }
                index
            }
        };

        let names = canonical_names(&synsets, &lemma_index);
        for s in synsets.iter_mut() {
            s.hypernyms.sort_by(|a, b| names[*a].cmp(&names[*b]).then(a.cmp(b)));
            s.hypernyms.dedup();
            s.hyponyms.sort_by(|a, b| names[*a].cmp(&names[*b]).then(a.cmp(b)));
            s.hyponyms.dedup();
        }

        let mut keys: Vec<&(String, Pos)> = lemma_index.keys().collect();
        keys.sort();
        let mut antonym_pairs: HashMap<(String, Pos), Vec<String>> = HashMap::new();
        for key in keys {
            let mut found = Vec::new();
            for &idx in &lemma_index[key] {
                for (src, dst) in &synsets[idx].antonyms {
                    if lemma_key(src) == key.0 && !found.contains(dst) {
                        found.push(dst.clone());
                    }
                }
            }
            if !found.is_empty() {
                antonym_pairs.insert(key.clone(), found);
            }
        }

        Lexicon {
            synsets,
            lemma_index,
            antonym_pairs,
            exceptions,
        }
    }

    pub fn synsets(&self) -> &[Synset] {
        &self.synsets
    }

    pub fn synset(&self, idx: SynsetIdx) -> &Synset {
        &self.synsets[idx]
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    /// Synsets of `lemma` under `pos`, in sense order. Empty when unindexed.
    pub fn senses(&self, lemma: &str, pos: Pos) -> &[SynsetIdx] {
        self.lemma_index
            .get(&(lemma_key(lemma), pos))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn contains(&self, lemma: &str, pos: Pos) -> bool {
        !self.senses(lemma, pos).is_empty()
    }

    /// Indexed lemma keys of one POS, sorted.
    pub fn lemmas(&self, pos: Pos) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .lemma_index
            .keys()
            .filter(|(_, p)| *p == pos)
            .map(|(k, _)| k.as_str())
            .collect();
        out.sort_unstable();
        out
    }

    /// Base forms of `word` under `pos` that exist in the index, most
    /// likely first: exception-list entries, the word itself, then suffix
    /// detachment candidates.
    pub fn base_forms(&self, word: &str, pos: Pos) -> Vec<String> {
        morph::base_forms(self, word, pos)
    }

    pub(crate) fn exceptions(&self, word: &str, pos: Pos) -> &[String] {
        self.exceptions
            .get(&(word.to_string(), pos))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Path similarity between two lemmas: the maximum over sense pairs of
    /// `1 / (1 + d)`, where `d` is the shortest path length in the undirected
    /// hypernym/hyponym graph. `None` when either lemma is unindexed under
    /// `pos` or no connecting path exists.
    pub fn path_similarity(&self, a: &str, b: &str, pos: Pos) -> Option<f64> {
        let from = self.senses(a, pos);
        let to = self.senses(b, pos);
        if from.is_empty() || to.is_empty() {
            return None;
        }
        let mut is_target = vec![false; self.synsets.len()];
        for &t in to {
            is_target[t] = true;
        }
        let mut dist = vec![u32::MAX; self.synsets.len()];
        let mut queue = VecDeque::new();
        for &s in from {
            if dist[s] == u32::MAX {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(node) = queue.pop_front() {
            if is_target[node] {
                return Some(1.0 / (1.0 + f64::from(dist[node])));
            }
            let d = dist[node] + 1;
            for &next in self.neighbors(node) {
                if dist[next] == u32::MAX {
                    dist[next] = d;
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// Path similarity from `source` to every lemma in `targets` with a
    /// single breadth-first sweep. Entry `i` is `None` when `targets[i]` is
    /// unreachable or unindexed.
    pub fn path_similarities(&self, source: &str, targets: &[&str], pos: Pos) -> Vec<Option<f64>> {
        let from = self.senses(source, pos);
        if from.is_empty() {
            return vec![None; targets.len()];
        }
        let mut dist = vec![u32::MAX; self.synsets.len()];
        let mut queue = VecDeque::new();
        for &s in from {
            if dist[s] == u32::MAX {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(node) = queue.pop_front() {
            let d = dist[node] + 1;
            for &next in self.neighbors(node) {
                if dist[next] == u32::MAX {
                    dist[next] = d;
                    queue.push_back(next);
                }
            }
        }
        targets
            .iter()
            .map(|t| {
                self.senses(t, pos)
                    .iter()
                    .map(|&s| dist[s])
                    .min()
                    .filter(|&d| d != u32::MAX)
                    .map(|d| 1.0 / (1.0 + f64::from(d)))
            })
            .collect()
    }

    fn neighbors(&self, idx: SynsetIdx) -> impl Iterator<Item = &SynsetIdx> {
        let s = &self.synsets[idx];
        s.hypernyms.iter().chain(s.hyponyms.iter())
    }

    /// First antonym of `word` in sense order. Only adjectives and verbs
    /// carry antonyms for edit purposes.
    pub fn antonym_of(&self, word: &str, pos: Pos) -> Option<&str> {
        if !matches!(pos, Pos::Adj | Pos::Verb) {
            return None;
        }
        self.antonym_pairs
            .get(&(lemma_key(word), pos))
            .and_then(|v| v.first())
            .map(String::as_str)
    }

    /// First lemma of the first hypernym synset of the first sense.
    pub fn hypernym_of(&self, word: &str, pos: Pos) -> Option<&str> {
        self.first_linked(word, pos, |s| &s.hypernyms)
    }

    /// First lemma of the first hyponym synset of the first sense.
    pub fn hyponym_of(&self, word: &str, pos: Pos) -> Option<&str> {
        self.first_linked(word, pos, |s| &s.hyponyms)
    }

    fn first_linked<F>(&self, word: &str, pos: Pos, links: F) -> Option<&str>
    where
        F: Fn(&Synset) -> &Vec<SynsetIdx>,
    {
        if !matches!(pos, Pos::Noun | Pos::Verb) {
            return None;
        }
        let first = *self.senses(word, pos).first()?;
        let linked = *links(&self.synsets[first]).first()?;
        self.synsets[linked].lemmas.first().map(String::as_str)
    }
}

/// Canonical `lemma.pos.NN` name per synset, used only for link ordering.
fn canonical_names(
    synsets: &[Synset],
    lemma_index: &HashMap<(String, Pos), Vec<SynsetIdx>>,
) -> Vec<String> {
    synsets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let key = s.lemmas.first().map(|l| lemma_key(l)).unwrap_or_default();
            let sense = lemma_index
                .get(&(key.clone(), s.pos))
                .and_then(|v| v.iter().position(|&x| x == i))
                .map_or(0, |p| p + 1);
            format!("{key}.{}.{sense:02}", s.pos.letter())
        })
        .collect()
}

/// Checks the structural invariants: every link resolves and hypernym and
/// hyponym links are mutual inverses.
pub(crate) fn verify_links(synsets: &[Synset]) -> Result<(), LexiconError> {
    for (i, s) in synsets.iter().enumerate() {
        for &h in &s.hypernyms {
            let Some(parent) = synsets.get(h) else {
                return Err(LexiconError::DanglingLink {
                    from: s.id.clone(),
                    to: h.to_string(),
                });
            };
            if !parent.hyponyms.contains(&i) {
                return Err(LexiconError::NotInverse {
                    a: s.id.clone(),
                    b: parent.id.clone(),
                });
            }
        }
        for &h in &s.hyponyms {
            let Some(child) = synsets.get(h) else {
                return Err(LexiconError::DanglingLink {
                    from: s.id.clone(),
                    to: h.to_string(),
                });
            };
            if !child.hypernyms.contains(&i) {
                return Err(LexiconError::NotInverse {
                    a: s.id.clone(),
                    b: child.id.clone(),
                });
            }
        }
    }
    Ok(())
}
