//! Graphs stored as the row-major upper triangle of the adjacency matrix, and
//! the triangle-free and C4-free edge maximization problems.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{argmax_all, Problem, ProblemError};
use crate::construction::{ProblemId, Score};
use crate::rng::SearchRng;

pub const MAX_VERTICES: usize = 64;

/// Position of edge `{i, j}` (`i < j`) in the flattened upper triangle.
#[inline]
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Inverse of [`edge_index`].
pub fn edge_pair(n: usize, mut idx: usize) -> (usize, usize) {
    let mut i = 0;
    while idx >= n - 1 - i {
        idx -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + idx)
}

pub fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// An `n`-vertex simple graph as `n(n-1)/2` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphBits {
    n: usize,
    bits: Vec<u8>,
}

impl GraphBits {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; edge_count(n)],
        }
    }

    pub fn complete(n: usize) -> Self {
        Self {
            n,
            bits: vec![1; edge_count(n)],
        }
    }

    pub fn from_bits(n: usize, bits: Vec<u8>) -> Result<Self, ProblemError> {
        if bits.len() != edge_count(n) {
            return Err(ProblemError::Shape {
                expected: edge_count(n),
                got: bits.len(),
            });
        }
        if let Some((position, &value)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
            return Err(ProblemError::Value {
                position,
                value,
                alphabet: 2,
            });
        }
        Ok(Self { n, bits })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            g.set(a, b, true);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        a != b && self.bits[edge_index(self.n, i, j)] == 1
    }

    pub fn set(&mut self, a: usize, b: usize, on: bool) {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.bits[edge_index(self.n, i, j)] = on as u8;
    }

    pub fn edges(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn triangles(&self) -> u64 {
        Adjacency::from_bits(self.n, &self.bits).triangle_count()
    }

    pub fn four_cycles(&self) -> u64 {
        Adjacency::from_bits(self.n, &self.bits).c4_count()
    }
}

/// Adjacency as one bitmask row per vertex.
#[derive(Debug, Clone)]
pub(crate) struct Adjacency {
    n: usize,
    rows: Vec<u64>,
}

impl Adjacency {
    pub(crate) fn from_bits(n: usize, bits: &[u8]) -> Self {
        let mut rows = vec![0u64; n];
        let mut idx = 0;
        for i in 0..n {
            for j in i + 1..n {
                if bits[idx] == 1 {
                    rows[i] |= 1 << j;
                    rows[j] |= 1 << i;
                }
                idx += 1;
            }
        }
        Self { n, rows }
    }

    pub(crate) fn to_bits(&self) -> Vec<u8> {
        let mut bits = Vec::with_capacity(edge_count(self.n));
        for i in 0..self.n {
            for j in i + 1..self.n {
                bits.push(((self.rows[i] >> j) & 1) as u8);
            }
        }
        bits
    }

    #[inline]
    pub(crate) fn has(&self, i: usize, j: usize) -> bool {
        (self.rows[i] >> j) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, on: bool) {
        if on {
            self.rows[i] |= 1 << j;
            self.rows[j] |= 1 << i;
        } else {
            self.rows[i] &= !(1 << j);
            self.rows[j] &= !(1 << i);
        }
    }

    fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            let mut above = self.rows[i] & !((2u64 << i) - 1);
            while above != 0 {
                let j = above.trailing_zeros() as usize;
                out.push((i, j));
                above &= above - 1;
            }
        }
        out
    }

    fn non_edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.has(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub(crate) fn edge_count(&self) -> u64 {
        self.rows.iter().map(|r| r.count_ones() as u64).sum::<u64>() / 2
    }

    /// Triangles through edge `{i, j}`.
    #[inline]
    fn triangles_on(&self, i: usize, j: usize) -> u32 {
        (self.rows[i] & self.rows[j]).count_ones()
    }

    pub(crate) fn triangle_count(&self) -> u64 {
        let per_edge: u64 = self
            .edge_list()
            .into_iter()
            .map(|(i, j)| self.triangles_on(i, j) as u64)
            .sum();
        per_edge / 3
    }

    /// 4-cycles through the present edge `{i, j}`: cycles `i-j-a-b-i`.
    fn c4_on(&self, i: usize, j: usize) -> u32 {
        let mut total = 0;
        let mut via = self.rows[j] & !(1 << i);
        while via != 0 {
            let a = via.trailing_zeros() as usize;
            via &= via - 1;
            total += (self.rows[a] & self.rows[i] & !(1 << j)).count_ones();
        }
        total
    }

    pub(crate) fn c4_count(&self) -> u64 {
        let mut twice = 0u64;
        for u in 0..self.n {
            for w in u + 1..self.n {
                let c = (self.rows[u] & self.rows[w]).count_ones() as u64;
                twice += c * c.saturating_sub(1) / 2;
            }
        }
        twice / 2
    }

    /// True if adding the absent edge `{i, j}` would close a 4-cycle, i.e. a
    /// path of length three already joins `i` and `j`.
    fn closes_c4(&self, i: usize, j: usize) -> bool {
        let mut via = self.rows[j];
        while via != 0 {
            let a = via.trailing_zeros() as usize;
            via &= via - 1;
            if self.rows[a] & self.rows[i] != 0 {
                return true;
            }
        }
        false
    }

    fn closes_triangle(&self, i: usize, j: usize) -> bool {
        self.rows[i] & self.rows[j] != 0
    }
}

fn check_vertices(n: usize) -> Result<(), ProblemError> {
    if n < 2 {
        return Err(ProblemError::Parameter(format!(
            "graphs need at least 2 vertices, got {n}"
        )));
    }
    if n > MAX_VERTICES {
        return Err(ProblemError::TooLarge {
            what: "vertices",
            got: n,
            limit: MAX_VERTICES,
        });
    }
    Ok(())
}

fn delimiter_rows(n: usize) -> Vec<usize> {
    (1..n).rev().collect()
}

/// Repeatedly deletes a uniformly random edge among those lying on the most
/// forbidden subgraphs, until none remain.
fn greedy_delete(adj: &mut Adjacency, rng: &mut SearchRng, on_edge: impl Fn(&Adjacency, usize, usize) -> u32) {
    loop {
        let edges = adj.edge_list();
        let (best, ties) = argmax_all(edges.iter().enumerate().map(|(k, &(i, j))| (k, on_edge(adj, i, j))));
        match best {
            Some(m) if m > 0 => {
                let (i, j) = edges[ties[rng.gen_range(0..ties.len())]];
                adj.set(i, j, false);
            }
            _ => return,
        }
    }
}

/// Adds absent edges in uniformly random order whenever admissible. Since
/// additions only ever remove admissible moves, one pass leaves the graph
/// maximal.
fn random_extend(adj: &mut Adjacency, rng: &mut SearchRng, blocked: impl Fn(&Adjacency, usize, usize) -> bool) {
    let mut candidates = adj.non_edge_list();
    candidates.shuffle(rng);
    for (i, j) in candidates {
        if !blocked(adj, i, j) {
            adj.set(i, j, true);
        }
    }
}

/// Triangle-free graphs with as many edges as possible.
#[derive(Debug, Clone)]
pub struct TriangleFree {
    n: usize,
}

impl TriangleFree {
    pub fn new(n: usize) -> Result<Self, ProblemError> {
        check_vertices(n)?;
        Ok(Self { n })
    }

    /// `edges - 2 * triangles`.
    pub fn score_graph(g: &GraphBits) -> Score {
        let adj = Adjacency::from_bits(g.n, &g.bits);
        adj.edge_count() as Score - 2 * adj.triangle_count() as Score
    }

    pub fn search_graph(g: &GraphBits, rng: &mut SearchRng) -> GraphBits {
        let mut adj = Adjacency::from_bits(g.n, &g.bits);
        greedy_delete(&mut adj, rng, Adjacency::triangles_on);
        random_extend(&mut adj, rng, Adjacency::closes_triangle);
        GraphBits {
            n: g.n,
            bits: adj.to_bits(),
        }
    }

    pub fn is_triangle_free(g: &GraphBits) -> bool {
        Adjacency::from_bits(g.n, &g.bits).triangle_count() == 0
    }
}

impl Problem for TriangleFree {
    fn id(&self) -> ProblemId {
        ProblemId::Triangle
    }

    fn payload_len(&self) -> usize {
        edge_count(self.n)
    }

    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError> {
        self.check_payload(payload)?;
        let adj = Adjacency::from_bits(self.n, payload);
        Ok(adj.edge_count() as Score - 2 * adj.triangle_count() as Score)
    }

    fn is_valid(&self, payload: &[u8]) -> bool {
        self.check_payload(payload).is_ok() && Adjacency::from_bits(self.n, payload).triangle_count() == 0
    }

    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8> {
        let mut adj = Adjacency::from_bits(self.n, start);
        greedy_delete(&mut adj, rng, Adjacency::triangles_on);
        random_extend(&mut adj, rng, Adjacency::closes_triangle);
        adj.to_bits()
    }

    fn rows(&self) -> Option<Vec<usize>> {
        Some(delimiter_rows(self.n))
    }
}

/// Graphs without a cycle of length exactly four, with as many edges as possible.
#[derive(Debug, Clone)]
pub struct C4Free {
    n: usize,
}

impl C4Free {
    pub fn new(n: usize) -> Result<Self, ProblemError> {
        check_vertices(n)?;
        Ok(Self { n })
    }

    pub fn count_c4(g: &GraphBits) -> u64 {
        Adjacency::from_bits(g.n, &g.bits).c4_count()
    }
}

impl Problem for C4Free {
    fn id(&self) -> ProblemId {
        ProblemId::C4
    }

    fn payload_len(&self) -> usize {
        edge_count(self.n)
    }

    /// `edges - 2 * (#4-cycles)`; for C4-free graphs, the edge count.
    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError> {
        self.check_payload(payload)?;
        let adj = Adjacency::from_bits(self.n, payload);
        Ok(adj.edge_count() as Score - 2 * adj.c4_count() as Score)
    }

    fn is_valid(&self, payload: &[u8]) -> bool {
        self.check_payload(payload).is_ok() && Adjacency::from_bits(self.n, payload).c4_count() == 0
    }

    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8> {
        let mut adj = Adjacency::from_bits(self.n, start);
        greedy_delete(&mut adj, rng, Adjacency::c4_on);
        random_extend(&mut adj, rng, Adjacency::closes_c4);
        adj.to_bits()
    }

    fn rows(&self) -> Option<Vec<usize>> {
        Some(delimiter_rows(self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn complete_bipartite(a: usize, b: usize) -> GraphBits {
        let mut g = GraphBits::empty(a + b);
        for i in 0..a {
            for j in a..a + b {
                g.set(i, j, true);
            }
        }
        g
    }

    #[test]
    fn edge_index_is_a_bijection() {
        for n in 2..=12 {
            let mut seen = vec![false; edge_count(n)];
            for i in 0..n {
                for j in i + 1..n {
                    let idx = edge_index(n, i, j);
                    assert!(!seen[idx]);
                    seen[idx] = true;
                    assert_eq!(edge_pair(n, idx), (i, j));
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn triangle_scores() {
        assert_eq!(TriangleFree::score_graph(&GraphBits::empty(20)), 0);
        assert_eq!(TriangleFree::score_graph(&GraphBits::complete(3)), 1);
        assert_eq!(TriangleFree::score_graph(&complete_bipartite(10, 10)), 100);
        // K4: 6 edges, 4 triangles.
        assert_eq!(TriangleFree::score_graph(&GraphBits::complete(4)), 6 - 8);
    }

    #[test]
    fn complete_bipartite_is_a_fixed_point() {
        let p = TriangleFree::new(20).unwrap();
        let g = complete_bipartite(10, 10);
        for seed in 0..5 {
            let out = p.local_search(g.bits(), &mut stream(seed, &[]));
            assert_eq!(out, g.bits());
        }
    }

    #[test]
    fn k3_loses_exactly_one_edge() {
        let p = TriangleFree::new(3).unwrap();
        for seed in 0..20 {
            let out = p.local_search(GraphBits::complete(3).bits(), &mut stream(seed, &[]));
            assert_eq!(out.iter().filter(|&&b| b == 1).count(), 2);
        }
    }

    fn assert_maximal(p: &dyn Problem, out: &[u8]) {
        assert!(p.is_valid(out));
        for idx in 0..out.len() {
            if out[idx] == 0 {
                let mut more = out.to_vec();
                more[idx] = 1;
                assert!(!p.is_valid(&more), "edge {idx} could still be added");
            }
        }
    }

    #[test]
    fn outputs_are_valid_and_maximal() {
        use rand::Rng;
        for n in [5, 8, 11] {
            let tri = TriangleFree::new(n).unwrap();
            let c4 = C4Free::new(n).unwrap();
            for seed in 0..30 {
                let mut rng = stream(seed, &[n as u64]);
                let start: Vec<u8> = (0..edge_count(n)).map(|_| rng.gen_range(0..2)).collect();
                let before_t = tri.score(&start).unwrap();
                let out = tri.local_search(&start, &mut rng);
                assert_maximal(&tri, &out);
                assert!(tri.score(&out).unwrap() >= before_t);

                let before_c = c4.score(&start).unwrap();
                let out = c4.local_search(&start, &mut rng);
                assert_maximal(&c4, &out);
                assert!(c4.score(&out).unwrap() >= before_c);
            }
        }
    }

    #[test]
    fn star_is_c4_free() {
        let star = GraphBits::from_edges(20, &(1..20).map(|v| (0, v)).collect::<Vec<_>>());
        let p = C4Free::new(20).unwrap();
        assert!(p.is_valid(star.bits()));
        assert_eq!(p.score(star.bits()).unwrap(), 19);
        assert_eq!(C4Free::count_c4(&complete_bipartite(2, 2)), 1);
        assert_eq!(C4Free::count_c4(&GraphBits::complete(4)), 3);
    }

    #[test]
    fn c4_counts_per_edge_are_consistent() {
        // Each 4-cycle has four edges.
        let g = GraphBits::complete(6);
        let adj = Adjacency::from_bits(6, g.bits());
        let per_edge: u64 = adj.edge_list().iter().map(|&(i, j)| adj.c4_on(i, j) as u64).sum();
        assert_eq!(per_edge, 4 * adj.c4_count());
        // K6 has 3 * C(6,4) = 45 four-cycles.
        assert_eq!(adj.c4_count(), 45);
    }
}
