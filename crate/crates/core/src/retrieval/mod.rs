//! Cosine ranking, Recall@k and the ACE score over default and edited
//! query streams.

mod ace;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, Embedder, ImageRef};
use crate::corpus::{query_id, Dataset};
use crate::interventions::EditBatch;

pub use ace::{ace, ace_per_query, check_scale, AceError, AceMode, AceScore};

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("`{id}`: dimension {got}, expected {expected}")]
    Dimension { id: String, expected: usize, got: usize },
    #[error("`{0}`: non-finite embedding value")]
    NonFinite(String),
    #[error("duplicate corpus id `{0}`")]
    DuplicateId(String),
    #[error("backend returned {got} vectors for {expected} inputs")]
    Count { expected: usize, got: usize },
    #[error("k must be positive")]
    ZeroK,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub id: String,
    pub values: Vec<f32>,
}

impl EmbeddingVector {
    pub fn new(id: impl Into<String>, values: Vec<f32>) -> Self {
        EmbeddingVector { id: id.into(), values }
    }
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt()
}

/// Cosine similarity accumulated in f64 in index order. A zero-norm side
/// gives -1 so that such items rank last.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    cosine_with_norms(a, norm(a), b, norm(b))
}

fn cosine_with_norms(a: &[f32], na: f64, b: &[f32], nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return -1.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    // Adding zero folds -0.0 into 0.0 so ties stay ties under total_cmp.
    dot / (na * nb) + 0.0
}

/// Corpus vectors sorted by id with precomputed norms.
#[derive(Clone, Debug)]
pub struct CorpusIndex {
    ids: Vec<String>,
    vectors: Vec<Vec<f32>>,
    norms: Vec<f64>,
    dimension: usize,
}

fn check_vector(v: &EmbeddingVector, dimension: usize) -> Result<(), RetrievalError> {
    if v.values.len() != dimension {
        return Err(RetrievalError::Dimension {
            id: v.id.clone(),
            expected: dimension,
            got: v.values.len(),
        });
    }
    if v.values.iter().any(|x| !x.is_finite()) {
        return Err(RetrievalError::NonFinite(v.id.clone()));
    }
    Ok(())
}

impl CorpusIndex {
    pub fn new(mut items: Vec<EmbeddingVector>) -> Result<CorpusIndex, RetrievalError> {
        let dimension = items.first().ok_or(RetrievalError::EmptyCorpus)?.values.len();
        for v in &items {
            check_vector(v, dimension)?;
        }
        items.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = items.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(RetrievalError::DuplicateId(w[0].id.clone()));
        }
        let norms = items.iter().map(|v| norm(&v.values)).collect();
        let (ids, vectors) = items.into_iter().map(|v| (v.id, v.values)).unzip();
        Ok(CorpusIndex {
            ids,
            vectors,
            norms,
            dimension,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|x| x.as_str().cmp(id)).ok()
    }

    fn scored(&self, query: &[f32]) -> Vec<(f64, usize)> {
        let qn = norm(query);
        self.vectors
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(i, (v, &n))| (cosine_with_norms(query, qn, v, n), i))
            .collect()
    }

    /// The first `k` entries of the full ranking, without sorting the rest.
    pub fn top_k(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<usize>, RetrievalError> {
        check_vector(query, self.dimension)?;
        let mut s = self.scored(&query.values);
        let k = k.min(s.len());
        if k == 0 {
            return Ok(Vec::new());
        }
        if k < s.len() {
            s.select_nth_unstable_by(k - 1, by_rank);
            s.truncate(k);
        }
        s.sort_by(by_rank);
        Ok(s.into_iter().map(|(_, i)| i).collect())
    }
}

/// Descending similarity, then ascending position (which is ascending id).
fn by_rank(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Full ranking of a corpus for one query, as positions in the index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankList {
    pub query_id: String,
    pub ranked: Vec<usize>,
}

impl RankList {
    pub fn ids<'a>(&'a self, index: &'a CorpusIndex) -> impl Iterator<Item = &'a str> + 'a {
        self.ranked.iter().map(move |&i| index.id(i))
    }
}

pub fn rank(query: &EmbeddingVector, index: &CorpusIndex) -> Result<RankList, RetrievalError> {
    Ok(RankList {
        query_id: query.id.clone(),
        ranked: index.top_k(query, index.len())?,
    })
}

/// Ranks every query in parallel; output follows input order.
pub fn rank_all(queries: &[EmbeddingVector], index: &CorpusIndex) -> Result<Vec<RankList>, RetrievalError> {
    queries.par_iter().map(|q| rank(q, index)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallScore {
    pub k: usize,
    pub hits: usize,
    pub total: usize,
    pub value: f64,
}

impl RecallScore {
    pub fn new(k: usize, hits: usize, total: usize) -> Self {
        let value = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
        RecallScore { k, hits, total, value }
    }
}

/// Fraction of queries with at least one relevant item among the top `k`.
/// Queries absent from `truth` count as misses.
pub fn recall_at_k(ranks: &[RankList], truth: &HashMap<String, HashSet<usize>>, k: usize) -> RecallScore {
    let hits = ranks
        .iter()
        .filter(|r| {
            truth
                .get(&r.query_id)
                .is_some_and(|t| r.ranked.iter().take(k).any(|i| t.contains(i)))
        })
        .count();
    RecallScore::new(k, hits, ranks.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    /// Text to text: first captions against all remaining captions.
    #[serde(rename = "LR")]
    Lr,
    /// Text to image: first captions against all images.
    #[serde(rename = "TIR")]
    Tir,
    /// Image to text: images against first captions.
    #[serde(rename = "ITR")]
    Itr,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Lr, Task::Tir, Task::Itr];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Lr => "LR",
            Task::Tir => "TIR",
            Task::Itr => "ITR",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown task `{s}` (expected LR, TIR or ITR)"))
    }
}

enum Items {
    Texts(Vec<String>),
    Images(Vec<ImageRef>),
}

impl Items {
    fn embed(&self, backend: &dyn Embedder) -> Result<Vec<Vec<f32>>, RetrievalError> {
        let (out, expected) = match self {
            Items::Texts(t) => (backend.embed_texts(t)?, t.len()),
            Items::Images(i) => (backend.embed_images(i)?, i.len()),
        };
        if out.len() != expected {
            return Err(RetrievalError::Count { expected, got: out.len() });
        }
        Ok(out)
    }
}

/// Queries, corpus and relevance for one task and stream.
struct Setup {
    query_ids: Vec<String>,
    queries: Items,
    corpus_ids: Vec<String>,
    corpus: Items,
    truth: Vec<Vec<String>>,
}

fn images(d: &Dataset) -> Vec<ImageRef> {
    let captions: HashMap<&str, &str> = d.queries.iter().map(|q| (q.image_id.as_str(), q.text.as_str())).collect();
    d.image_corpus
        .iter()
        .map(|im| ImageRef {
            id: im.id.clone(),
            media: im.media.clone(),
            caption: captions.get(im.image_id.as_str()).map(|c| c.to_string()),
        })
        .collect()
}

fn setup(d: &Dataset, task: Task, edits: Option<&EditBatch>) -> Setup {
    let edited: HashMap<&str, &str> = edits
        .map(|b| b.edits.iter().map(|e| (e.query_id.as_str(), e.edited_text.as_str())).collect())
        .unwrap_or_default();
    let first_captions: Vec<String> = d
        .queries
        .iter()
        .map(|q| edited.get(q.id.as_str()).copied().unwrap_or(&q.text).to_string())
        .collect();
    let query_ids: Vec<String> = d.queries.iter().map(|q| q.id.clone()).collect();
    match task {
        Task::Lr => {
            let mut by_image: HashMap<&str, Vec<String>> = HashMap::new();
            for c in &d.text_corpus {
                by_image.entry(c.image_id.as_str()).or_default().push(c.id.clone());
            }
            Setup {
                truth: d.queries.iter().map(|q| by_image.remove(q.image_id.as_str()).unwrap_or_default()).collect(),
                query_ids,
                queries: Items::Texts(first_captions),
                corpus_ids: d.text_corpus.iter().map(|c| c.id.clone()).collect(),
                corpus: Items::Texts(d.text_corpus.iter().map(|c| c.text.clone()).collect()),
            }
        }
        Task::Tir => Setup {
            truth: d.queries.iter().map(|q| vec![q.image_id.clone()]).collect(),
            query_ids,
            queries: Items::Texts(first_captions),
            corpus_ids: d.image_corpus.iter().map(|im| im.id.clone()).collect(),
            corpus: Items::Images(images(d)),
        },
        Task::Itr => Setup {
            query_ids: d.image_corpus.iter().map(|im| im.id.clone()).collect(),
            truth: d.image_corpus.iter().map(|im| vec![query_id(&im.image_id)]).collect(),
            queries: Items::Images(images(d)),
            corpus_ids: query_ids,
            corpus: Items::Texts(first_captions),
        },
    }
}

/// Per-query outcome of one stream: the 0-based rank of the best relevant
/// item when it falls within the evaluated depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamOutcome {
    pub task: Task,
    pub depth: usize,
    pub query_ids: Vec<String>,
    pub first_hit: Vec<Option<usize>>,
}

impl StreamOutcome {
    pub fn recall(&self, k: usize) -> RecallScore {
        assert!(k <= self.depth, "k={k} exceeds evaluated depth {}", self.depth);
        let hits = self.first_hit.iter().filter(|h| h.is_some_and(|r| r < k)).count();
        RecallScore::new(k, hits, self.first_hit.len())
    }

    pub fn hits(&self, k: usize) -> Vec<bool> {
        self.first_hit.iter().map(|h| h.is_some_and(|r| r < k)).collect()
    }
}

/// Embeds and ranks one stream. `edits` selects the edited stream;
/// `depth` is the largest k that will be asked of the outcome.
pub fn evaluate_stream(
    d: &Dataset,
    task: Task,
    edits: Option<&EditBatch>,
    backend: &dyn Embedder,
    depth: usize,
) -> Result<StreamOutcome, RetrievalError> {
    if depth == 0 {
        return Err(RetrievalError::ZeroK);
    }
    let s = setup(d, task, edits);
    let corpus_vecs = s.corpus.embed(backend)?;
    let index = CorpusIndex::new(s.corpus_ids.into_iter().zip(corpus_vecs).map(|(id, v)| EmbeddingVector::new(id, v)).collect())?;
    let query_vecs = s.queries.embed(backend)?;
    let first_hit = s
        .query_ids
        .par_iter()
        .zip(query_vecs)
        .zip(&s.truth)
        .map(|((id, v), truth)| {
            let relevant: HashSet<usize> = truth.iter().filter_map(|t| index.position(t)).collect();
            let top = index.top_k(&EmbeddingVector::new(id.clone(), v), depth)?;
            Ok(top.iter().position(|i| relevant.contains(i)))
        })
        .collect::<Result<Vec<_>, RetrievalError>>()?;
    Ok(StreamOutcome {
        task,
        depth,
        query_ids: s.query_ids,
        first_hit,
    })
}

/// One result-store row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AceRow {
    pub model: String,
    pub task: Task,
    pub code: String,
    pub k: usize,
    pub o: f64,
    pub o_star: f64,
    pub n: usize,
    pub scale: u64,
    pub ace: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "AceMode::is_default")]
    pub mode: AceMode,
    #[serde(default)]
    pub timestamp: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RowContext<'a> {
    pub model: &'a str,
    pub code: String,
    pub seed: u64,
    pub scale: u64,
    pub mode: AceMode,
}

impl AceRow {
    /// Scores an edited stream against the default one at cutoff `k`. ACE
    /// failures are recorded in `error` rather than returned.
    pub fn from_streams(ctx: &RowContext<'_>, default: &StreamOutcome, edited: &StreamOutcome, n: usize, k: usize) -> AceRow {
        let (o, o_star) = (default.recall(k), edited.recall(k));
        let score = match ctx.mode {
            AceMode::Corpus => ace(o.value, o_star.value, n, ctx.scale),
            AceMode::PerQuery => ace_per_query(&default.hits(k), &edited.hits(k), n, ctx.scale),
        };
        let (ace, error) = match score {
            Ok(s) => (Some(s.value), None),
            Err(e) => (None, Some(e.to_string())),
        };
        AceRow {
            model: ctx.model.to_string(),
            task: default.task,
            code: ctx.code.clone(),
            k,
            o: o.value,
            o_star: o_star.value,
            n,
            scale: ctx.scale,
            ace,
            error,
            seed: ctx.seed,
            mode: ctx.mode,
            timestamp: None,
        }
    }
}

/// Default and edited streams for one task and intervention, scored at `k`.
pub fn run_experiment(
    d: &Dataset,
    task: Task,
    batch: &EditBatch,
    backend: &dyn Embedder,
    k: usize,
    ctx: &RowContext<'_>,
) -> Result<AceRow, RetrievalError> {
    let default = evaluate_stream(d, task, None, backend, k)?;
    let edited = evaluate_stream(d, task, Some(batch), backend, k)?;
    Ok(AceRow::from_streams(ctx, &default, &edited, batch.total_n, k))
}
