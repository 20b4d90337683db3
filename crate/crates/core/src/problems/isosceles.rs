//! Point sets in the `n x n` grid with no isosceles triangle, flat ones included.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{argmax_all, Problem, ProblemError};
use crate::construction::{ProblemId, Score};
use crate::rng::SearchRng;

pub const MAX_SIDE: usize = 256;

/// Lattice points of `[n]^2`, stored as an `n^2` bitmask with index `x * n + y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet2D {
    n: usize,
    points: Vec<(i64, i64)>,
}

impl PointSet2D {
    pub fn new(n: usize, points: &[(i64, i64)]) -> Result<Self, ProblemError> {
        let mut sorted = points.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != points.len() {
            return Err(ProblemError::Parameter("duplicate point".into()));
        }
        if let Some(p) = sorted
            .iter()
            .find(|&&(x, y)| x < 0 || y < 0 || x >= n as i64 || y >= n as i64)
        {
            return Err(ProblemError::Parameter(format!(
                "point {p:?} lies outside the {n}x{n} grid"
            )));
        }
        Ok(Self { n, points: sorted })
    }

    pub fn from_payload(n: usize, payload: &[u8]) -> Self {
        let points = payload
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| ((i / n) as i64, (i % n) as i64))
            .collect();
        Self { n, points }
    }

    pub fn to_payload(&self) -> Vec<u8> {
        let mut payload = vec![0; self.n * self.n];
        for &(x, y) in &self.points {
            payload[x as usize * self.n + y as usize] = 1;
        }
        payload
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_isosceles_free(&self) -> bool {
        isosceles_free(&self.points)
    }

    /// Image under one of the eight symmetries of the square, `0..8`.
    pub fn transformed(&self, symmetry: usize) -> Self {
        let m = self.n as i64 - 1;
        let mut points: Vec<_> = self
            .points
            .iter()
            .map(|&(x, y)| {
                let (x, y) = if symmetry & 4 != 0 { (y, x) } else { (x, y) };
                let x = if symmetry & 1 != 0 { m - x } else { x };
                let y = if symmetry & 2 != 0 { m - y } else { y };
                (x, y)
            })
            .collect();
        points.sort_unstable();
        Self { n: self.n, points }
    }
}

#[inline]
fn dist2(a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)
}

fn isosceles_free(points: &[(i64, i64)]) -> bool {
    let mut seen = Vec::with_capacity(points.len());
    for &apex in points {
        seen.clear();
        seen.extend(points.iter().filter(|&&p| p != apex).map(|&p| dist2(apex, p)));
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    true
}

/// For every point, the number of (apex, pair) isosceles configurations it
/// belongs to, in either role.
fn involvement(points: &[(i64, i64)]) -> Vec<u64> {
    let mut counts = vec![0u64; points.len()];
    let mut groups: HashMap<i64, Vec<usize>> = HashMap::new();
    for (b, &apex) in points.iter().enumerate() {
        groups.clear();
        for (i, &p) in points.iter().enumerate() {
            if i != b {
                groups.entry(dist2(apex, p)).or_default().push(i);
            }
        }
        for members in groups.values() {
            let m = members.len() as u64;
            if m >= 2 {
                counts[b] += m * (m - 1) / 2;
                for &i in members {
                    counts[i] += m - 1;
                }
            }
        }
    }
    counts
}

/// Number of (apex, unordered pair) isosceles configurations.
pub fn isosceles_count(points: &[(i64, i64)]) -> u64 {
    let mut total = 0;
    let mut d = Vec::new();
    for &apex in points {
        d.clear();
        d.extend(points.iter().filter(|&&p| p != apex).map(|&p| dist2(apex, p)));
        d.sort_unstable();
        let mut run = 1u64;
        for i in 1..=d.len() {
            if i < d.len() && d[i] == d[i - 1] {
                run += 1;
            } else {
                total += run * run.saturating_sub(1) / 2;
                run = 1;
            }
        }
    }
    total
}

/// Maximize the number of grid points with no three forming an isosceles
/// triangle.
#[derive(Debug, Clone)]
pub struct IsoscelesFree {
    n: usize,
}

impl IsoscelesFree {
    pub fn new(n: usize) -> Result<Self, ProblemError> {
        if n == 0 {
            return Err(ProblemError::Parameter("grid side must be positive".into()));
        }
        if n > MAX_SIDE {
            return Err(ProblemError::TooLarge {
                what: "grid side",
                got: n,
                limit: MAX_SIDE,
            });
        }
        Ok(Self { n })
    }
}

impl Problem for IsoscelesFree {
    fn id(&self) -> ProblemId {
        ProblemId::Isosceles
    }

    fn payload_len(&self) -> usize {
        self.n * self.n
    }

    /// `|S| - 2 * (#isosceles configurations)`.
    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError> {
        self.check_payload(payload)?;
        let s = PointSet2D::from_payload(self.n, payload);
        Ok(s.len() as Score - 2 * isosceles_count(&s.points) as Score)
    }

    fn is_valid(&self, payload: &[u8]) -> bool {
        self.check_payload(payload).is_ok() && isosceles_free(&PointSet2D::from_payload(self.n, payload).points)
    }

    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8> {
        let n = self.n;
        let mut points = PointSet2D::from_payload(n, start).points;
        loop {
            let counts = involvement(&points);
            let (best, ties) = argmax_all(counts.iter().copied().enumerate());
            match best {
                Some(m) if m > 0 => {
                    points.swap_remove(ties[rng.gen_range(0..ties.len())]);
                }
                _ => break,
            }
        }

        // Squared distances already realized from each point.
        let max_d2 = 2 * (n as i64 - 1).pow(2) as usize + 1;
        let mut used: Vec<Vec<bool>> = points
            .iter()
            .map(|&a| {
                let mut row = vec![false; max_d2];
                for &b in &points {
                    if a != b {
                        row[dist2(a, b) as usize] = true;
                    }
                }
                row
            })
            .collect();
        let mut taken = vec![false; n * n];
        for &(x, y) in &points {
            taken[x as usize * n + y as usize] = true;
        }
        let mut candidates: Vec<usize> = (0..n * n).filter(|&i| !taken[i]).collect();
        candidates.shuffle(rng);
        let mut own = vec![false; max_d2];
        for i in candidates {
            let p = ((i / n) as i64, (i % n) as i64);
            own.fill(false);
            let ok = points.iter().enumerate().all(|(k, &b)| {
                let d = dist2(p, b) as usize;
                !used[k][d] && !std::mem::replace(&mut own[d], true)
            });
            if ok {
                for (k, &b) in points.iter().enumerate() {
                    used[k][dist2(p, b) as usize] = true;
                }
                used.push(own.clone());
                points.push(p);
            }
        }
        PointSet2D { n, points }.to_payload()
    }
}
