//! Sparse spanning subgraphs of the `d`-cube that keep diameter `d`.

use std::collections::VecDeque;

use rand::seq::SliceRandom;

use super::{Problem, ProblemError};
use crate::construction::{ProblemId, Score};
use crate::rng::SearchRng;

pub const MAX_DIMENSION: usize = 12;

/// A subgraph of the `d`-cube on vertices `0..2^d`, one bit per cube edge.
///
/// Edge `{v, v ^ (1 << c)}` with bit `c` of `v` clear has index
/// `c * 2^(d-1) + v'`, where `v'` is `v` with bit `c` squeezed out.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CubeSubgraph {
    d: usize,
    edge_bits: Vec<u8>,
}

pub fn cube_edge_count(d: usize) -> usize {
    if d == 0 {
        0
    } else {
        d << (d - 1)
    }
}

pub fn cube_edge_index(d: usize, v: usize, c: usize) -> usize {
    debug_assert!(v >> c & 1 == 0 && c < d);
    let low = v & ((1 << c) - 1);
    let high = v >> (c + 1);
    (c << (d - 1)) + (high << c | low)
}

/// Inverse of [`cube_edge_index`]: the lower endpoint and the flipped coordinate.
pub fn cube_edge_endpoints(d: usize, idx: usize) -> (usize, usize) {
    let c = idx >> (d - 1);
    let rest = idx & ((1 << (d - 1)) - 1);
    let low = rest & ((1 << c) - 1);
    let high = rest >> c;
    (high << (c + 1) | low, c)
}

impl CubeSubgraph {
    pub fn empty(d: usize) -> Self {
        Self {
            d,
            edge_bits: vec![0; cube_edge_count(d)],
        }
    }

    pub fn full(d: usize) -> Self {
        Self {
            d,
            edge_bits: vec![1; cube_edge_count(d)],
        }
    }

    pub fn from_bits(d: usize, edge_bits: Vec<u8>) -> Result<Self, ProblemError> {
        if edge_bits.len() != cube_edge_count(d) {
            return Err(ProblemError::Shape {
                expected: cube_edge_count(d),
                got: edge_bits.len(),
            });
        }
        Ok(Self { d, edge_bits })
    }

    /// Builds the subgraph from vertex pairs; each pair must differ in one bit.
    pub fn from_edges(d: usize, edges: &[(usize, usize)]) -> Result<Self, ProblemError> {
        let mut g = Self::empty(d);
        for &(a, b) in edges {
            let diff = a ^ b;
            if a >= 1 << d || b >= 1 << d || diff.count_ones() != 1 {
                return Err(ProblemError::Parameter(format!(
                    "{{{a}, {b}}} is not an edge of the {d}-cube"
                )));
            }
            let c = diff.trailing_zeros() as usize;
            g.edge_bits[cube_edge_index(d, a.min(b), c)] = 1;
        }
        Ok(g)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bits(&self) -> &[u8] {
        &self.edge_bits
    }

    pub fn edges(&self) -> usize {
        self.edge_bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn eccentricities(&self) -> Vec<Option<usize>> {
        eccentricities(self.d, &self.edge_bits)
    }

    pub fn is_connected(&self) -> bool {
        self.eccentricities().iter().all(Option::is_some)
    }

    /// `None` if disconnected.
    pub fn diameter(&self) -> Option<usize> {
        self.eccentricities()
            .into_iter()
            .try_fold(0, |acc, e| e.map(|e| acc.max(e)))
    }

    pub fn diameter_ok(&self) -> bool {
        self.diameter() == Some(self.d)
    }
}

fn adjacency(d: usize, bits: &[u8]) -> Vec<u32> {
    // Neighbor sets as coordinate masks.
    let mut adj = vec![0u32; 1 << d];
    for (idx, &b) in bits.iter().enumerate() {
        if b == 1 {
            let (v, c) = cube_edge_endpoints(d, idx);
            adj[v] |= 1 << c;
            adj[v | 1 << c] |= 1 << c;
        }
    }
    adj
}

fn bfs_ecc(adj: &[u32], src: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) -> Option<usize> {
    dist.fill(u32::MAX);
    dist[src] = 0;
    queue.clear();
    queue.push_back(src);
    let mut seen = 1;
    let mut far = 0;
    while let Some(v) = queue.pop_front() {
        let mut m = adj[v];
        while m != 0 {
            let c = m.trailing_zeros();
            m &= m - 1;
            let w = v ^ (1 << c);
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                far = dist[w];
                seen += 1;
                queue.push_back(w);
            }
        }
    }
    (seen == adj.len()).then_some(far as usize)
}

fn eccentricities(d: usize, bits: &[u8]) -> Vec<Option<usize>> {
    let adj = adjacency(d, bits);
    let mut dist = vec![0; adj.len()];
    let mut queue = VecDeque::new();
    (0..adj.len())
        .map(|v| bfs_ecc(&adj, v, &mut dist, &mut queue))
        .collect()
}

/// Connected with every distance at most `d`. Antipodal vertices are always at
/// distance at least `d`, so this is diameter exactly `d`.
fn valid_adj(d: usize, adj: &[u32], dist: &mut [u32], queue: &mut VecDeque<usize>) -> bool {
    (0..adj.len()).all(|v| matches!(bfs_ecc(adj, v, dist, queue), Some(e) if e <= d))
}

/// Count of ordered vertex pairs at distance above `d` or unreachable.
fn violations(d: usize, bits: &[u8]) -> u64 {
    let adj = adjacency(d, bits);
    let mut dist = vec![0; adj.len()];
    let mut queue = VecDeque::new();
    let mut bad = 0;
    for v in 0..adj.len() {
        bfs_ecc(&adj, v, &mut dist, &mut queue);
        bad += dist.iter().filter(|&&x| x == u32::MAX || x as usize > d).count() as u64;
    }
    bad
}

/// Minimize the number of edges of a spanning subgraph of the `d`-cube with
/// diameter `d`.
#[derive(Debug, Clone)]
pub struct HypercubeDiameter {
    d: usize,
}

impl HypercubeDiameter {
    pub fn new(d: usize) -> Result<Self, ProblemError> {
        if d == 0 {
            return Err(ProblemError::Parameter("cube dimension must be positive".into()));
        }
        if d > MAX_DIMENSION {
            return Err(ProblemError::TooLarge {
                what: "cube dimension",
                got: d,
                limit: MAX_DIMENSION,
            });
        }
        Ok(Self { d })
    }
}

impl Problem for HypercubeDiameter {
    fn id(&self) -> ProblemId {
        ProblemId::Hypercube
    }

    fn payload_len(&self) -> usize {
        cube_edge_count(self.d)
    }

    /// `-edges` when valid. Invalid subgraphs score below every valid one,
    /// by one per violating ordered vertex pair.
    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError> {
        self.check_payload(payload)?;
        let edges = payload.iter().filter(|&&b| b == 1).count() as Score;
        let bad = violations(self.d, payload) as Score;
        if bad == 0 {
            Ok(-edges)
        } else {
            Ok(-(cube_edge_count(self.d) as Score) - bad)
        }
    }

    fn is_valid(&self, payload: &[u8]) -> bool {
        if self.check_payload(payload).is_err() {
            return false;
        }
        let adj = adjacency(self.d, payload);
        valid_adj(self.d, &adj, &mut vec![0; adj.len()], &mut VecDeque::new())
    }

    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8> {
        let d = self.d;
        let mut bits = start.to_vec();
        let mut adj = adjacency(d, &bits);
        let mut dist = vec![0; adj.len()];
        let mut queue = VecDeque::new();
        let toggle = |adj: &mut [u32], idx: usize| {
            let (v, c) = cube_edge_endpoints(d, idx);
            adj[v] ^= 1 << c;
            adj[v | 1 << c] ^= 1 << c;
        };

        let mut absent: Vec<usize> = (0..bits.len()).filter(|&i| bits[i] == 0).collect();
        absent.shuffle(rng);
        let mut absent = absent.into_iter();
        while !valid_adj(d, &adj, &mut dist, &mut queue) {
            // The full cube is valid, so this terminates before running out.
            let idx = absent.next().expect("full cube is valid");
            bits[idx] = 1;
            toggle(&mut adj, idx);
        }

        let mut present: Vec<usize> = (0..bits.len()).filter(|&i| bits[i] == 1).collect();
        present.shuffle(rng);
        for idx in present {
            toggle(&mut adj, idx);
            if valid_adj(d, &adj, &mut dist, &mut queue) {
                bits[idx] = 0;
            } else {
                toggle(&mut adj, idx);
            }
        }
        bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn edge_indexing_is_a_bijection() {
        for d in 1..=7 {
            let mut seen = vec![false; cube_edge_count(d)];
            for v in 0..1usize << d {
                for c in 0..d {
                    if v >> c & 1 == 0 {
                        let idx = cube_edge_index(d, v, c);
                        assert!(!seen[idx]);
                        seen[idx] = true;
                        assert_eq!(cube_edge_endpoints(d, idx), (v, c));
                    }
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn full_cube_is_valid() {
        let g = CubeSubgraph::full(6);
        assert_eq!(g.edges(), 192);
        assert_eq!(g.diameter(), Some(6));
        let p = HypercubeDiameter::new(6).unwrap();
        assert!(p.is_valid(g.bits()));
        assert_eq!(p.score(g.bits()).unwrap(), -192);
    }

    #[test]
    fn empty_cube_is_disconnected() {
        let g = CubeSubgraph::empty(3);
        assert!(!g.is_connected());
        assert_eq!(g.diameter(), None);
        let p = HypercubeDiameter::new(3).unwrap();
        assert!(p.score(g.bits()).unwrap() < -12);
    }

    #[test]
    fn a_hamiltonian_path_is_too_long() {
        // Gray code path on the 3-cube: spanning but diameter 7.
        let gray: Vec<usize> = (0..8).map(|i| i ^ (i >> 1)).collect();
        let edges: Vec<_> = gray.windows(2).map(|w| (w[0], w[1])).collect();
        let g = CubeSubgraph::from_edges(3, &edges).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.diameter(), Some(7));
        assert!(!g.diameter_ok());
    }

    #[test]
    fn search_output_is_valid_and_minimal() {
        for d in 2..=5 {
            let p = HypercubeDiameter::new(d).unwrap();
            for seed in 0..5 {
                let out = p.local_search(&p.empty(), &mut stream(seed, &[d as u64]));
                assert!(p.is_valid(&out));
                for i in 0..out.len() {
                    if out[i] == 1 {
                        let mut less = out.clone();
                        less[i] = 0;
                        assert!(!p.is_valid(&less), "d={d}: edge {i} is removable");
                    }
                }
            }
        }
    }

    #[test]
    fn non_cube_edges_are_rejected() {
        assert!(CubeSubgraph::from_edges(3, &[(0, 3)]).is_err());
        assert!(CubeSubgraph::from_edges(3, &[(0, 8)]).is_err());
    }
}
