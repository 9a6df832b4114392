//! Shortest-augmenting-path Hungarian solver with a lexicographic
//! tie-break pass over the equality subgraph.

use std::collections::VecDeque;

use super::{BipartiteConceptGraph, Matching, TIE_EPSILON};

const NONE: usize = usize::MAX;

struct Padded<'g> {
    g: &'g BipartiteConceptGraph,
    n: usize,
    m: usize,
    cols: usize,
    big: f64,
}

impl Padded<'_> {
    #[inline]
    fn cost(&self, i: usize, j: usize) -> f64 {
        if j < self.m {
            let w = self.g.raw_weights()[i * self.m + j];
            if w.is_nan() {
                self.big
            } else {
                w
            }
        } else {
            self.big
        }
    }

    /// Ordering key of assigning row `i` to column `j`: the target index for
    /// a real edge, `NONE` for a sentinel (unmatched) assignment.
    #[inline]
    fn key(&self, i: usize, j: usize) -> usize {
        if j < self.m && !self.g.raw_weights()[i * self.m + j].is_nan() {
            j
        } else {
            NONE
        }
    }

    /// (matched count, real cost) of a full row assignment.
    fn score(&self, row_to_col: &[usize]) -> (usize, f64) {
        let mut count = 0;
        let mut total = 0.0;
        for (i, &j) in row_to_col.iter().enumerate() {
            if self.key(i, j) != NONE {
                count += 1;
                total += self.cost(i, j);
            }
        }
        (count, total)
    }
}

/// Row/column assignment and dual potentials from the O(n^2 m) Hungarian
/// method. Requires `n <= cols`.
fn solve(p: &Padded<'_>) -> (Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>) {
    let (n, cols) = (p.n, p.cols);
    // 1-based internally; index 0 is the virtual root column/row.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; cols + 1];
    let mut col_row = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    let mut minv = vec![f64::INFINITY; cols + 1];
    let mut used = vec![false; cols + 1];

    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            let ui0 = u[i0];
            for j in 1..=cols {
                if !used[j] {
                    let cur = p.cost(i0 - 1, j - 1) - ui0 - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![NONE; n];
    let mut col_to_row = vec![NONE; cols];
    for j in 1..=cols {
        if col_row[j] != 0 {
            row_to_col[col_row[j] - 1] = j - 1;
            col_to_row[j - 1] = col_row[j] - 1;
        }
    }
    (row_to_col, col_to_row, u[1..].to_vec(), v[1..].to_vec())
}

struct Refiner<'a, 'g> {
    p: &'a Padded<'g>,
    u: Vec<f64>,
    v: Vec<f64>,
    eps: f64,
    row_to_col: Vec<usize>,
    col_to_row: Vec<usize>,
}

impl Refiner<'_, '_> {
    #[inline]
    fn tight(&self, i: usize, j: usize) -> bool {
        (self.p.cost(i, j) - self.u[i] - self.v[j]).abs() <= self.eps
    }

    /// Rows above `i` are settled, except that an unmatched row may trade
    /// one filler column for another without changing its key.
    #[inline]
    fn movable(&self, r: usize, i: usize) -> bool {
        r > i || self.p.key(r, self.row_to_col[r]) == NONE
    }

    /// Searches the equality subgraph for an alternating path or cycle that
    /// gives row `i` column `j` without changing the key of any earlier row.
    /// Returns the `(row, new column)` moves.
    ///
    /// A virtual row stands for "unassigned": it holds every free column and
    /// may claim any assigned column whose potential is zero, which vacates
    /// that column. This folds both open ends of an alternating path into a
    /// single search that must close at `i`'s current column.
    #[allow(clippy::needless_range_loop)]
    fn reroute(&self, i: usize, j: usize) -> Option<Vec<(usize, usize)>> {
        let n = self.p.n;
        let virt = n;
        let cur = self.row_to_col[i];
        let cols = self.p.cols;
        let holder_of = |c: usize| match self.col_to_row[c] {
            NONE => virt,
            r => r,
        };
        let first = holder_of(j);
        if first != virt && !self.movable(first, i) {
            return None;
        }
        let mut seen_col = vec![false; cols];
        seen_col[j] = true;
        // took_from[r] = (row that took r's column, that column)
        let mut took_from: Vec<(usize, usize)> = vec![(NONE, NONE); n + 1];
        took_from[first] = (i, j);
        let mut queue = VecDeque::from([first]);
        let mut end: Option<(usize, usize)> = None;
        'search: while let Some(r) = queue.pop_front() {
            for c in 0..cols {
                if seen_col[c] {
                    continue;
                }
                if r == virt {
                    if self.col_to_row[c] == NONE || self.v[c].abs() > self.eps {
                        continue;
                    }
                } else if c == self.row_to_col[r]
                    || !self.tight(r, c)
                    || (r < i && self.p.key(r, c) != NONE)
                {
                    continue;
                }
                if c == cur {
                    end = Some((r, c));
                    break 'search;
                }
                let holder = holder_of(c);
                if holder != virt && (holder == i || !self.movable(holder, i)) {
                    continue;
                }
                seen_col[c] = true;
                if took_from[holder].0 == NONE {
                    took_from[holder] = (r, c);
                    queue.push_back(holder);
                }
            }
        }
        let (mut row, col) = end?;
        let mut moves = vec![(row, col)];
        while row != i {
            let (taker, c) = took_from[row];
            moves.push((taker, c));
            row = taker;
        }
        moves.retain(|&(r, _)| r != virt);
        Some(moves)
    }

    fn apply(&mut self, moves: &[(usize, usize)]) {
        for &(r, _) in moves {
            let old = self.row_to_col[r];
            if self.col_to_row[old] == r {
                self.col_to_row[old] = NONE;
            }
        }
        for &(r, c) in moves {
            self.row_to_col[r] = c;
            self.col_to_row[c] = r;
        }
    }

    fn run(&mut self) {
        let (mut count, mut total) = self.p.score(&self.row_to_col);
        for i in 0..self.p.n {
            let cur_key = self.p.key(i, self.row_to_col[i]);
            let limit = cur_key.min(self.p.m);
            for j in 0..limit {
                if self.p.key(i, j) == NONE || !self.tight(i, j) {
                    continue;
                }
                let Some(moves) = self.reroute(i, j) else {
                    continue;
                };
                let mut trial = self.row_to_col.clone();
                for &(r, c) in &moves {
                    trial[r] = c;
                }
                let (c2, t2) = self.p.score(&trial);
                if c2 == count && t2 <= total + TIE_EPSILON {
                    self.apply(&moves);
                    count = c2;
                    total = t2;
                    break;
                }
            }
        }
    }
}

/// Minimum-weight matching covering as many sources as possible, with the
/// deterministic lexicographic tie-break.
pub fn min_weight_matching(g: &BipartiteConceptGraph) -> Matching {
    let n = g.sources().len();
    let m = g.targets().len();
    if n == 0 {
        return Matching::from_assignment(g, &[]);
    }
    let max_w = g.edges().map(|(_, _, w)| w).fold(0.0f64, f64::max);
    let big = (n as f64 + 1.0) * max_w.max(1.0) + 1.0;
    let padded = Padded {
        g,
        n,
        m,
        cols: m.max(n),
        big,
    };
    let (row_to_col, col_to_row, u, v) = solve(&padded);
    let mut refiner = Refiner {
        p: &padded,
        u,
        v,
        eps: 1e-9 * big,
        row_to_col,
        col_to_row,
    };
    refiner.run();
    let assignment: Vec<Option<usize>> = refiner
        .row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| (padded.key(i, j) != NONE).then_some(j))
        .collect();
    Matching::from_assignment(g, &assignment)
}
