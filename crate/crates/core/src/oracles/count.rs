//! Structure counts by direct enumeration.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::problems::{BinaryMatrix, GraphBits, Point3, SetFamily};

pub fn count_triangles(g: &GraphBits) -> u64 {
    let n = g.n();
    let mut total = 0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                    total += 1;
                }
            }
        }
    }
    total
}

/// 4-cycles as subgraphs: each 4-set carries up to three distinct cycles.
pub fn count_four_cycles(g: &GraphBits) -> u64 {
    let n = g.n();
    let mut total = 0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    for [w, x, y, z] in [[a, b, c, d], [a, b, d, c], [a, c, b, d]] {
                        if g.has_edge(w, x) && g.has_edge(x, y) && g.has_edge(y, z) && g.has_edge(z, w) {
                            total += 1;
                        }
                    }
                }
            }
        }
    }
    total
}

/// Triples `r1 < r2 < r3`, `c1 < c2 < c3` with ones at `(r1,c3)`, `(r2,c1)`, `(r3,c2)`.
pub fn count_312(m: &BinaryMatrix) -> u64 {
    let n = m.n();
    let mut total = 0;
    for r1 in 0..n {
        for r2 in r1 + 1..n {
            for r3 in r2 + 1..n {
                for c1 in 0..n {
                    for c2 in c1 + 1..n {
                        for c3 in c2 + 1..n {
                            if m.get(r1, c3) && m.get(r2, c1) && m.get(r3, c2) {
                                total += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    total
}

/// (apex, unordered pair) configurations with the apex equidistant from the
/// pair; collinear triples count.
pub fn count_isosceles(points: &[(i64, i64)]) -> u64 {
    let d2 = |p: (i64, i64), q: (i64, i64)| (p.0 - q.0).pow(2) + (p.1 - q.1).pow(2);
    let mut total = 0;
    for (i, &apex) in points.iter().enumerate() {
        for (j, &p) in points.iter().enumerate() {
            for (k, &q) in points.iter().enumerate().skip(j + 1) {
                if i != j && i != k && d2(apex, p) == d2(apex, q) {
                    total += 1;
                }
            }
        }
    }
    total
}

fn permutations5() -> &'static [([usize; 5], i64)] {
    static TABLE: OnceLock<Vec<([usize; 5], i64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::with_capacity(120);
        for code in 0..5usize.pow(5) {
            let mut p = [0usize; 5];
            let mut c = code;
            for slot in &mut p {
                *slot = c % 5;
                c /= 5;
            }
            if (0..5).all(|i| (0..i).all(|j| p[i] != p[j])) {
                let inversions = (0..5)
                    .flat_map(|i| (i + 1..5).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                out.push((p, if inversions % 2 == 0 { 1 } else { -1 }));
            }
        }
        out
    })
}

fn lifted(p: &Point3) -> [i64; 5] {
    [p[0] * p[0] + p[1] * p[1] + p[2] * p[2], p[0], p[1], p[2], 1]
}

fn leibniz(rows: [&[i64; 5]; 5]) -> i64 {
    permutations5()
        .iter()
        .map(|(p, sign)| sign * rows[0][p[0]] * rows[1][p[1]] * rows[2][p[2]] * rows[3][p[3]] * rows[4][p[4]])
        .sum()
}

/// Leibniz expansion of the 5x5 matrix with rows `(|p|^2, x, y, z, 1)`; zero
/// iff the points lie on a common sphere or plane.
pub fn five_point_det(p: &[Point3; 5]) -> i64 {
    let rows = p.map(|q| lifted(&q));
    leibniz([&rows[0], &rows[1], &rows[2], &rows[3], &rows[4]])
}

fn cospherical_from(rows: &[[i64; 5]], a: usize) -> u64 {
    let k = rows.len();
    let mut total = 0;
    for b in a + 1..k {
        for c in b + 1..k {
            for d in c + 1..k {
                for e in d + 1..k {
                    if leibniz([&rows[a], &rows[b], &rows[c], &rows[d], &rows[e]]) == 0 {
                        total += 1;
                    }
                }
            }
        }
    }
    total
}

/// Number of 5-subsets on a common sphere or plane, split over the first index.
pub fn cospherical_count(points: &[Point3]) -> u64 {
    let rows: Vec<[i64; 5]> = points.iter().map(lifted).collect();
    (0..rows.len())
        .into_par_iter()
        .map(|a| cospherical_from(&rows, a))
        .sum()
}

/// `(cospherical 5-subsets, all 5-subsets)` of the full grid `[n]^3`.
pub fn grid_cospherical_count(n: usize) -> (u64, u64) {
    let m = n as i64;
    let points: Vec<Point3> = (0..m)
        .flat_map(|x| (0..m).flat_map(move |y| (0..m).map(move |z| [x, y, z])))
        .collect();
    let k = points.len() as u64;
    let total = (0..5).fold(1u64, |acc, i| acc * (k - i) / (i + 1));
    (cospherical_count(&points), total)
}

/// A longest chain `A_1 ⊊ ... ⊊ A_m` of `sets`, bottom first.
pub fn longest_chain(sets: &[u32]) -> Vec<u32> {
    let mut order = sets.to_vec();
    order.sort_by_key(|s| (s.count_ones(), *s));
    let mut len = vec![1usize; order.len()];
    let mut prev = vec![usize::MAX; order.len()];
    for i in 0..order.len() {
        for j in 0..i {
            let (a, b) = (order[j], order[i]);
            if a != b && a & b == a && len[j] + 1 > len[i] {
                len[i] = len[j] + 1;
                prev[i] = j;
            }
        }
    }
    let Some(mut i) = (0..order.len()).max_by_key(|&i| (len[i], std::cmp::Reverse(i))) else {
        return Vec::new();
    };
    let mut chain = vec![order[i]];
    while prev[i] != usize::MAX {
        i = prev[i];
        chain.push(order[i]);
    }
    chain.reverse();
    chain
}

/// Number of chains of exactly `len` members of `family`.
pub fn count_chains(family: &SetFamily, len: usize) -> u128 {
    fn extend(sets: &[u32], top: usize, remaining: usize) -> u128 {
        if remaining == 0 {
            return 1;
        }
        let t = sets[top];
        sets.iter()
            .enumerate()
            .filter(|&(_, &s)| s != t && s & t == t)
            .map(|(i, _)| extend(sets, i, remaining - 1))
            .sum()
    }
    if len == 0 {
        return 1;
    }
    let sets = family.sets();
    (0..sets.len()).map(|i| extend(sets, i, len - 1)).sum()
}
