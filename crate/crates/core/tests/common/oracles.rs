//! Independent reference computations used by the property checks.

use std::collections::VecDeque;

use contrastive_edits::lexicon::{Lexicon, Pos};
use contrastive_edits::matching::BipartiteConceptGraph;
use contrastive_edits::retrieval::EmbeddingVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense random instance; `levels` quantizes weights to force ties.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, m: usize, dropout: f64, levels: Option<u32>) -> BipartiteConceptGraph {
    let weights = (0..n * m)
        .map(|_| {
            if rng.gen_bool(dropout) {
                f64::NAN
            } else {
                match levels {
                    Some(l) => rng.gen_range(1..=l) as f64 / l as f64,
                    None => rng.gen_range(0.01..1.0),
                }
            }
        })
        .collect();
    BipartiteConceptGraph::from_dense(n, m, weights).unwrap()
}

/// Path similarity recomputed from the public synset list: adjacency is
/// rebuilt from hypernym links, a full BFS runs from each sense of the
/// first lemma and the best sense pair wins.
pub struct PathOracle {
    adj: Vec<Vec<usize>>,
}

impl PathOracle {
    pub fn new(lex: &Lexicon) -> Self {
        let mut adj = vec![Vec::new(); lex.synsets().len()];
        for (i, s) in lex.synsets().iter().enumerate() {
            for &h in &s.hypernyms {
                adj[i].push(h);
                adj[h].push(i);
            }
        }
        PathOracle { adj }
    }

    fn distances(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adj.len()];
        dist[from] = Some(0);
        let mut q = VecDeque::from([from]);
        while let Some(x) = q.pop_front() {
            let d = dist[x].unwrap();
            for &y in &self.adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    q.push_back(y);
                }
            }
        }
        dist
    }

    pub fn similarity(&self, lex: &Lexicon, a: &str, b: &str, pos: Pos) -> Option<f64> {
        let mut best: Option<f64> = None;
        for &s in lex.senses(a, pos) {
            let dist = self.distances(s);
            for &t in lex.senses(b, pos) {
                if let Some(d) = dist[t] {
                    let v = 1.0 / (1.0 + d as f64);
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        }
        best
    }
}

pub fn random_vectors(rng: &mut ChaCha8Rng, n: usize, dim: usize, prefix: &str) -> Vec<EmbeddingVector> {
    (0..n)
        .map(|i| EmbeddingVector::new(format!("{prefix}{i:03}"), (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect()))
        .collect()
}

/// Corpus ids by descending cosine, ties by id.
pub fn naive_order(q: &[f32], corpus: &[EmbeddingVector]) -> Vec<String> {
    let mut scored: Vec<(f64, String)> = corpus
        .iter()
        .map(|c| {
            let mut dot = 0.0f64;
            let mut qq = 0.0f64;
            let mut cc = 0.0f64;
            for (&x, &y) in q.iter().zip(&c.values) {
                let (x, y) = (x as f64, y as f64);
                dot += x * y;
                qq += x * x;
                cc += y * y;
            }
            (dot / (qq.sqrt() * cc.sqrt()), c.id.clone())
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, id)| id).collect()
}
