//! Minimum-weight bipartite concept matching.
//!
//! Every source must be matched to a distinct target over existing edges;
//! the total weight of the matched edges is minimized. Sources that cannot
//! be covered are reported as unmatched. Among equal-cost optima the
//! lexicographically smallest `(source, target)` sequence wins, with
//! "unmatched" ordered after every target.

mod brute;
mod hungarian;
mod random;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use brute::{brute_force_matching, BRUTE_FORCE_LIMIT};
pub use hungarian::min_weight_matching;
pub use random::{randomized_matching, Permutation};

/// Absolute tolerance under which two total costs count as tied.
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MatchingError {
    #[error("edge {source_lemma} -> {target_lemma} has non-positive or non-finite weight {weight}")]
    InvalidWeight {
        source_lemma: String,
        target_lemma: String,
        weight: f64,
    },
    #[error("brute-force matching supports at most {limit} sources, got {got}")]
    TooLarge { limit: usize, got: usize },
}

/// Source and target concept sets with a partial weight table. Missing
/// entries mean the substitution is infeasible.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteConceptGraph {
    sources: Vec<String>,
    targets: Vec<String>,
    // Row-major |S| x |T|, NaN = no edge.
    weights: Vec<f64>,
}

impl BipartiteConceptGraph {
    /// Builds the graph, keeping an edge wherever `weight_fn` returns a value
    /// and the two lemmas differ.
    pub fn build<F>(sources: Vec<String>, targets: Vec<String>, mut weight_fn: F) -> Result<Self, MatchingError>
    where
        F: FnMut(&str, &str) -> Option<f64>,
    {
        let mut weights = vec![f64::NAN; sources.len() * targets.len()];
        for (i, s) in sources.iter().enumerate() {
            for (j, t) in targets.iter().enumerate() {
                if s == t {
                    continue;
                }
                if let Some(w) = weight_fn(s, t) {
                    if !(w.is_finite() && w > 0.0) {
                        return Err(MatchingError::InvalidWeight {
                            source_lemma: s.clone(),
                            target_lemma: t.clone(),
                            weight: w,
                        });
                    }
                    weights[i * targets.len() + j] = w;
                }
            }
        }
        Ok(BipartiteConceptGraph {
            sources,
            targets,
            weights,
        })
    }

    /// Builds a graph from a row-major matrix where `None` marks a missing
    /// edge. Source/target names are `s{i}` / `t{j}`.
    pub fn from_matrix(rows: &[Vec<Option<f64>>]) -> Result<Self, MatchingError> {
        let n = rows.len();
        let m = rows.iter().map(Vec::len).max().unwrap_or(0);
        let sources = (0..n).map(|i| format!("s{i}")).collect();
        let targets = (0..m).map(|j| format!("t{j}")).collect();
        Self::build(sources, targets, |s, t| {
            let i: usize = s[1..].parse().ok()?;
            let j: usize = t[1..].parse().ok()?;
            rows[i].get(j).copied().flatten()
        })
    }

    /// Builds a graph straight from a row-major weight buffer (NaN = no edge),
    /// skipping the self-edge rule since names are synthetic.
    pub fn from_dense(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self, MatchingError> {
        assert_eq!(weights.len(), rows * cols, "weight buffer does not match shape");
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_nan() && !(w.is_finite() && w > 0.0) {
                return Err(MatchingError::InvalidWeight {
                    source_lemma: format!("s{}", k / cols.max(1)),
                    target_lemma: format!("t{}", k % cols.max(1)),
                    weight: w,
                });
            }
        }
        Ok(BipartiteConceptGraph {
            sources: (0..rows).map(|i| format!("s{i}")).collect(),
            targets: (0..cols).map(|j| format!("t{j}")).collect(),
            weights,
        })
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn weight(&self, s: usize, t: usize) -> Option<f64> {
        let w = self.weights[s * self.targets.len() + t];
        (!w.is_nan()).then_some(w)
    }

    pub fn edge_count(&self) -> usize {
        self.weights.iter().filter(|w| !w.is_nan()).count()
    }

    /// All edges as `(source index, target index, weight)`, row-major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.targets.len();
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_nan())
            .map(move |(k, &w)| (k / m, k % m, w))
    }

    pub(crate) fn raw_weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub source_index: usize,
    pub target_index: usize,
    pub source: String,
    pub target: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// Matched pairs, ordered by source index.
    pub pairs: Vec<MatchedPair>,
    /// Sum of matched weights, accumulated in source order.
    pub total_weight: f64,
    pub unmatched_sources: Vec<String>,
}

impl Matching {
    /// Assembles a matching from a per-source target assignment.
    pub(crate) fn from_assignment(g: &BipartiteConceptGraph, assignment: &[Option<usize>]) -> Matching {
        let mut pairs = Vec::new();
        let mut unmatched_sources = Vec::new();
        let mut total_weight = 0.0;
        for (s, a) in assignment.iter().enumerate() {
            match a.and_then(|t| g.weight(s, t).map(|w| (t, w))) {
                Some((t, w)) => {
                    total_weight += w;
                    pairs.push(MatchedPair {
                        source_index: s,
                        target_index: t,
                        source: g.sources[s].clone(),
                        target: g.targets[t].clone(),
                        weight: w,
                    });
                }
                None => unmatched_sources.push(g.sources[s].clone()),
            }
        }
        Matching {
            pairs,
            total_weight,
            unmatched_sources,
        }
    }

    /// Target index per source, `None` when unmatched.
    pub fn assignment(&self, sources: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; sources];
        for p in &self.pairs {
            out[p.source_index] = Some(p.target_index);
        }
        out
    }

    pub fn matched_count(&self) -> usize {
        self.pairs.len()
    }

    /// Audit record `{S, T, edges, pairs, total_weight}`.
    pub fn audit_json(&self, g: &BipartiteConceptGraph) -> serde_json::Value {
        serde_json::json!({
            "S": g.sources(),
            "T": g.targets(),
            "edges": g.edges().map(|(s, t, w)| serde_json::json!([g.sources[s], g.targets[t], w])).collect::<Vec<_>>(),
            "pairs": self.pairs.iter().map(|p| serde_json::json!([p.source, p.target, p.weight])).collect::<Vec<_>>(),
            "total_weight": self.total_weight,
        })
    }
}
