//! Exhaustive reference solver for small instances.

use super::{BipartiteConceptGraph, Matching, MatchingError, TIE_EPSILON};

/// Largest source set the exhaustive solver accepts.
pub const BRUTE_FORCE_LIMIT: usize = 8;

struct Search<'g> {
    g: &'g BipartiteConceptGraph,
    used: Vec<bool>,
    current: Vec<Option<usize>>,
    best: Option<(usize, f64, Vec<Option<usize>>)>,
}

impl Search<'_> {
    fn visit(&mut self, s: usize, count: usize, cost: f64) {
        let n = self.g.sources().len();
        if s == n {
            // Enumeration runs in key order, so an equal candidate found later
            // never displaces the incumbent.
            let better = match &self.best {
                None => true,
                Some((bc, bw, _)) => count > *bc || (count == *bc && cost < *bw - TIE_EPSILON),
            };
            if better {
                self.best = Some((count, cost, self.current.clone()));
            }
            return;
        }
        for t in 0..self.g.targets().len() {
            if self.used[t] {
                continue;
            }
            if let Some(w) = self.g.weight(s, t) {
                self.used[t] = true;
                self.current[s] = Some(t);
                self.visit(s + 1, count + 1, cost + w);
                self.current[s] = None;
                self.used[t] = false;
            }
        }
        self.visit(s + 1, count, cost);
    }
}

/// Enumerates every partial assignment and keeps the one with most matched
/// sources, then least cost, then smallest key.
pub fn brute_force_matching(g: &BipartiteConceptGraph) -> Result<Matching, MatchingError> {
    let n = g.sources().len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(MatchingError::TooLarge {
            limit: BRUTE_FORCE_LIMIT,
            got: n,
        });
    }
    let mut search = Search {
        g,
        used: vec![false; g.targets().len()],
        current: vec![None; n],
        best: None,
    };
    search.visit(0, 0, 0.0);
    let (_, _, assignment) = search.best.expect("the empty assignment is always visited");
    Ok(Matching::from_assignment(g, &assignment))
}
