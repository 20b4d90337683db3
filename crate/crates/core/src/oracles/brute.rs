//! Exhaustive optima for tiny instances.
//!
//! Bounds: graphs `n <= 7`, 312-avoiding matrices `n <= 4`, cube subgraphs
//! `d <= 3`, isosceles grids `n <= 4`, sphere grids `n <= 3`, Sperner ground
//! sets `n <= 4`, cross-Sperner `n <= 3` with `k <= 4`, box covers `d <= 2`.

use std::collections::HashMap;

use super::count::{five_point_det, longest_chain};
use super::OracleError;
use crate::construction::{ProblemId, Score};
use crate::problems::{Point3, ProblemSpec};

/// Largest size `brute_best` accepts for `id` (with `k` where it matters).
pub fn brute_limit(id: ProblemId, k: usize) -> Option<usize> {
    match id {
        ProblemId::Triangle | ProblemId::C4 => Some(7),
        ProblemId::Permanent312 => Some(4),
        ProblemId::Hypercube => Some(3),
        ProblemId::Isosceles => Some(4),
        ProblemId::Sphere => Some(3),
        ProblemId::SaturatedSperner => Some(4),
        ProblemId::CrossSperner => (k <= 4).then_some(3),
        ProblemId::BoxCover => Some(2),
    }
}

/// The best score over all valid constructions, in the units of the
/// problem's score function (so minimization problems come out negated).
pub fn brute_best(spec: &ProblemSpec) -> Result<Score, OracleError> {
    let (id, n, k) = (spec.id, spec.size, spec.k);
    match brute_limit(id, k) {
        Some(limit) if n <= limit => {}
        limit => {
            return Err(OracleError::TooLarge {
                problem: id,
                size: n,
                bound: match limit {
                    Some(l) => format!("size <= {l}"),
                    None => format!("k = {k} unsupported"),
                },
            })
        }
    }
    spec.build()?;
    Ok(match id {
        ProblemId::Triangle => best_graph(n, closes_triangle) as Score,
        ProblemId::C4 => best_graph(n, closes_four_cycle) as Score,
        ProblemId::Permanent312 => best_permanent(n) as Score,
        ProblemId::Hypercube => -(min_cube_subgraph(n) as Score),
        ProblemId::Isosceles => best_isosceles(n) as Score,
        ProblemId::Sphere => best_sphere(n) as Score,
        ProblemId::SaturatedSperner => -(min_saturated(n, k) as Score),
        ProblemId::CrossSperner => best_cross(n, k),
        ProblemId::BoxCover => -(min_box_cover(n) as Score),
    })
}

/// Permanent as a sum over all permutations.
pub fn naive_permanent(n: usize, entries: &[u8]) -> u128 {
    fn go(n: usize, entries: &[u8], row: usize, used: u32) -> u128 {
        if row == n {
            return 1;
        }
        (0..n)
            .filter(|&c| used >> c & 1 == 0 && entries[row * n + c] == 1)
            .map(|c| go(n, entries, row + 1, used | 1 << c))
            .sum()
    }
    go(n, entries, 0, 0)
}

pub fn contains_312(n: usize, entries: &[u8]) -> bool {
    let at = |r: usize, c: usize| entries[r * n + c] == 1;
    (0..n).any(|r1| {
        (r1 + 1..n).any(|r2| {
            (r2 + 1..n).any(|r3| {
                (0..n).any(|c1| (c1 + 1..n).any(|c2| (c2 + 1..n).any(|c3| at(r1, c3) && at(r2, c1) && at(r3, c2))))
            })
        })
    })
}

fn closes_triangle(adj: &[u64], i: usize, j: usize) -> bool {
    adj[i] & adj[j] != 0
}

/// A path `i - x - y - j` with four distinct vertices.
fn closes_four_cycle(adj: &[u64], i: usize, j: usize) -> bool {
    (0..adj.len()).any(|x| x != j && adj[i] >> x & 1 == 1 && adj[x] & adj[j] & !(1u64 << i) != 0)
}

/// Branch and bound over edge subsets, adding edges only when `closes` is false.
fn best_graph(n: usize, closes: fn(&[u64], usize, usize) -> bool) -> usize {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    fn go(
        pairs: &[(usize, usize)],
        idx: usize,
        adj: &mut Vec<u64>,
        edges: usize,
        best: &mut usize,
        closes: fn(&[u64], usize, usize) -> bool,
    ) {
        *best = (*best).max(edges);
        if idx == pairs.len() || edges + pairs.len() - idx <= *best {
            return;
        }
        let (i, j) = pairs[idx];
        if !closes(adj, i, j) {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
            go(pairs, idx + 1, adj, edges + 1, best, closes);
            adj[i] &= !(1 << j);
            adj[j] &= !(1 << i);
        }
        go(pairs, idx + 1, adj, edges, best, closes);
    }
    let mut best = 0;
    go(&pairs, 0, &mut vec![0; n], 0, &mut best, closes);
    best
}

fn best_permanent(n: usize) -> u128 {
    let cells = n * n;
    (0u64..1 << cells)
        .map(|bits| (0..cells).map(|i| (bits >> i & 1) as u8).collect::<Vec<u8>>())
        .filter(|m| !contains_312(n, m))
        .map(|m| naive_permanent(n, &m))
        .max()
        .unwrap_or(0)
}

/// Fewest edges of a spanning subgraph of the `d`-cube with diameter at most `d`.
fn min_cube_subgraph(d: usize) -> usize {
    let v = 1usize << d;
    let edges: Vec<(usize, usize)> = (0..v)
        .flat_map(|a| (0..d).map(move |c| (a, a ^ 1 << c)))
        .filter(|&(a, b)| a < b)
        .collect();
    let mut best = edges.len();
    for subset in 0u64..1 << edges.len() {
        let m = subset.count_ones() as usize;
        if m >= best {
            continue;
        }
        let mut dist = vec![vec![usize::MAX / 4; v]; v];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = 0;
        }
        for (e, &(a, b)) in edges.iter().enumerate() {
            if subset >> e & 1 == 1 {
                dist[a][b] = 1;
                dist[b][a] = 1;
            }
        }
        for w in 0..v {
            for a in 0..v {
                for b in 0..v {
                    if dist[a][w] + dist[w][b] < dist[a][b] {
                        dist[a][b] = dist[a][w] + dist[w][b];
                    }
                }
            }
        }
        if dist.iter().flatten().all(|&x| x <= d) {
            best = m;
        }
    }
    best
}

fn best_isosceles(n: usize) -> usize {
    let points: Vec<(i64, i64)> = (0..n as i64).flat_map(|x| (0..n as i64).map(move |y| (x, y))).collect();
    let d2 = |p: (i64, i64), q: (i64, i64)| (p.0 - q.0).pow(2) + (p.1 - q.1).pow(2);
    let admissible = |set: &[(i64, i64)], p: (i64, i64)| {
        set.iter().enumerate().all(|(i, &a)| {
            set[i + 1..]
                .iter()
                .all(|&b| d2(p, a) != d2(p, b) && d2(a, p) != d2(a, b) && d2(b, p) != d2(b, a))
        })
    };
    type Admissible<'a> = dyn Fn(&[(i64, i64)], (i64, i64)) -> bool + 'a;
    fn go(points: &[(i64, i64)], idx: usize, set: &mut Vec<(i64, i64)>, best: &mut usize, admissible: &Admissible) {
        *best = (*best).max(set.len());
        if idx == points.len() || set.len() + points.len() - idx <= *best {
            return;
        }
        if admissible(set, points[idx]) {
            set.push(points[idx]);
            go(points, idx + 1, set, best, admissible);
            set.pop();
        }
        go(points, idx + 1, set, best, admissible);
    }
    let mut best = 0;
    go(&points, 0, &mut Vec::new(), &mut best, &admissible);
    best
}

fn best_sphere(n: usize) -> usize {
    let m = n as i64;
    let points: Vec<Point3> = (0..m)
        .flat_map(|x| (0..m).flat_map(move |y| (0..m).map(move |z| [x, y, z])))
        .collect();
    fn admissible(set: &[Point3], p: Point3) -> bool {
        let k = set.len();
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    for d in c + 1..k {
                        if five_point_det(&[set[a], set[b], set[c], set[d], p]) == 0 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
    fn go(points: &[Point3], idx: usize, set: &mut Vec<Point3>, best: &mut usize) {
        *best = (*best).max(set.len());
        if idx == points.len() || set.len() + points.len() - idx <= *best {
            return;
        }
        if admissible(set, points[idx]) {
            set.push(points[idx]);
            go(points, idx + 1, set, best);
            set.pop();
        }
        go(points, idx + 1, set, best);
    }
    let mut best = 0;
    go(&points, 0, &mut Vec::new(), &mut best);
    best
}

fn min_saturated(n: usize, k: usize) -> usize {
    let universe = 1usize << n;
    let mut best = usize::MAX;
    for bits in 0u64..1 << universe {
        let size = bits.count_ones() as usize;
        if size >= best {
            continue;
        }
        let sets: Vec<u32> = (0..universe as u32).filter(|&s| bits >> s & 1 == 1).collect();
        if longest_chain(&sets).len() > k {
            continue;
        }
        let saturated = (0..universe as u32).filter(|&s| bits >> s & 1 == 0).all(|s| {
            let mut with = sets.clone();
            with.push(s);
            longest_chain(&with).len() > k
        });
        if saturated {
            best = size;
        }
    }
    best
}

/// Every assignment of subsets to families `0..=k` (0 = unused) that keeps
/// the families pairwise cross-Sperner; returns the best product of sizes.
fn best_cross(n: usize, k: usize) -> Score {
    let universe = 1u32 << n;
    fn go(universe: u32, s: u32, k: usize, owner: &mut Vec<usize>, sizes: &mut Vec<i64>, best: &mut Score) {
        if s == universe {
            *best = (*best).max(sizes.iter().product());
            return;
        }
        owner.push(0);
        go(universe, s + 1, k, owner, sizes, best);
        owner.pop();
        for f in 1..=k {
            let clash = (0..s).any(|t| {
                let o = owner[t as usize];
                o != 0 && o != f && (t & s == t || t & s == s)
            });
            if !clash {
                owner.push(f);
                sizes[f - 1] += 1;
                go(universe, s + 1, k, owner, sizes, best);
                sizes[f - 1] -= 1;
                owner.pop();
            }
        }
    }
    let mut best = 0;
    go(universe, 0, k, &mut Vec::new(), &mut vec![0; k], &mut best);
    best
}

/// Fewest proper boxes covering every point of `{0,1,2}^d` exactly twice, by
/// memoized search over coverage vectors.
fn min_box_cover(d: usize) -> usize {
    let points = 3usize.pow(d as u32);
    let proper = [0b001u8, 0b010, 0b011, 0b100, 0b101, 0b110];
    let boxes: Vec<Vec<usize>> = (0..6usize.pow(d as u32))
        .map(|mut code| {
            let factors: Vec<u8> = (0..d)
                .map(|_| {
                    let f = proper[code % 6];
                    code /= 6;
                    f
                })
                .collect();
            (0..points)
                .filter(|&p| {
                    let mut q = p;
                    factors.iter().all(|&f| {
                        let v = q % 3;
                        q /= 3;
                        f >> v & 1 == 1
                    })
                })
                .collect()
        })
        .collect();
    fn go(cover: &mut Vec<u8>, boxes: &[Vec<usize>], memo: &mut HashMap<Vec<u8>, usize>) -> usize {
        let Some(p) = cover.iter().position(|&c| c < 2) else {
            return 0;
        };
        if let Some(&v) = memo.get(cover.as_slice()) {
            return v;
        }
        let mut best = usize::MAX;
        for b in boxes.iter().filter(|b| b.contains(&p)) {
            if b.iter().all(|&q| cover[q] < 2) {
                for &q in b {
                    cover[q] += 1;
                }
                let rest = go(cover, boxes, memo);
                for &q in b {
                    cover[q] -= 1;
                }
                best = best.min(rest.saturating_add(1));
            }
        }
        memo.insert(cover.clone(), best);
        best
    }
    go(&mut vec![0; points], &boxes, &mut HashMap::new())
}
