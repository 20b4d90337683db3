//! Binary matrices avoiding the 312 pattern, scored by their permanent.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{argmax_all, Problem, ProblemError};
use crate::construction::{ProblemId, Score};
use crate::rng::SearchRng;

/// Largest side accepted by [`BinaryMatrix::permanent`]. `30! < 2^128`, so the
/// modular Ryser sum is exact.
pub const PERMANENT_LIMIT: usize = 30;

/// An `n x n` 0/1 matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl BinaryMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            n,
            entries: vec![1; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn anti_diagonal(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, n - 1 - i, true);
        }
        m
    }

    pub fn from_entries(n: usize, entries: Vec<u8>) -> Result<Self, ProblemError> {
        if entries.len() != n * n {
            return Err(ProblemError::Shape {
                expected: n * n,
                got: entries.len(),
            });
        }
        if let Some((position, &value)) = entries.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(ProblemError::Value {
                position,
                value,
                alphabet: 2,
            });
        }
        Ok(Self { n, entries })
    }

    /// Parses rows of `0`/`1` characters; whitespace inside a row is ignored.
    pub fn from_rows(rows: &[&str]) -> Result<Self, ProblemError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            for ch in row.chars().filter(|c| !c.is_whitespace()) {
                match ch {
                    '0' => entries.push(0),
                    '1' => entries.push(1),
                    other => return Err(ProblemError::Parameter(format!("bad matrix entry {other:?}"))),
                }
            }
        }
        Self::from_entries(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.entries[r * self.n + c] == 1
    }

    pub fn set(&mut self, r: usize, c: usize, on: bool) {
        self.entries[r * self.n + c] = on as u8;
    }

    pub fn ones_count(&self) -> usize {
        self.entries.iter().filter(|&&v| v == 1).count()
    }

    pub fn contains_312(&self) -> bool {
        contains_312_rows(&row_masks(self.n, &self.entries))
    }

    pub fn count_312(&self) -> u64 {
        PatternCounts::new(self.n, &self.entries).total()
    }

    pub fn permanent(&self) -> Result<u128, ProblemError> {
        permanent(self.n, &self.entries)
    }
}

fn row_masks(n: usize, entries: &[u8]) -> Vec<u64> {
    (0..n)
        .map(|r| {
            entries[r * n..(r + 1) * n]
                .iter()
                .enumerate()
                .fold(0u64, |m, (c, &v)| m | ((v as u64) << c))
        })
        .collect()
}

/// Bitmask of the columns strictly between `lo` and `hi`.
#[inline]
fn open_interval(lo: u32, hi: u32) -> u64 {
    if hi <= lo + 1 {
        return 0;
    }
    let below_hi = (1u64 << hi) - 1;
    let upto_lo = (2u64 << lo) - 1;
    below_hi & !upto_lo
}

/// For the middle row `r2` only the leftmost one of `r2` and the rightmost one
/// above it matter: they give the widest window for the bottom entry.
fn contains_312_rows(rows: &[u64]) -> bool {
    let mut above = 0u64;
    let mut window = 0u64;
    for &row in rows {
        if row & window != 0 {
            return true;
        }
        if row != 0 && above != 0 {
            let lo = row.trailing_zeros();
            let hi = 63 - above.leading_zeros();
            window |= open_interval(lo, hi);
        }
        above |= row;
    }
    false
}

/// Ryser's formula over Gray-code ordered column subsets, in `u128`
/// arithmetic modulo `2^128`.
pub fn permanent(n: usize, entries: &[u8]) -> Result<u128, ProblemError> {
    if n > PERMANENT_LIMIT {
        return Err(ProblemError::TooLarge {
            what: "permanent matrix side",
            got: n,
            limit: PERMANENT_LIMIT,
        });
    }
    if n == 0 {
        return Ok(1);
    }
    let rows = row_masks(n, entries);
    if rows.contains(&0) || rows.iter().fold(0u64, |a, &r| a | r).count_ones() < n as u32 {
        return Ok(0);
    }
    if !has_perfect_matching(&rows) {
        return Ok(0);
    }
    let cols: Vec<Vec<usize>> = (0..n)
        .map(|c| (0..n).filter(|&r| entries[r * n + c] == 1).collect())
        .collect();
    let mut sums = vec![0i64; n];
    let mut zero_rows = n;
    let mut total: u128 = 0;
    let mut subset = 0u64;
    for g in 1u64..(1u64 << n) {
        let c = g.trailing_zeros() as usize;
        subset ^= 1 << c;
        let delta = if subset >> c & 1 == 1 { 1 } else { -1 };
        for &r in &cols[c] {
            let before = sums[r];
            sums[r] += delta;
            if before == 0 {
                zero_rows -= 1;
            } else if sums[r] == 0 {
                zero_rows += 1;
            }
        }
        if zero_rows > 0 {
            continue;
        }
        let prod = sums.iter().fold(1u128, |p, &s| p.wrapping_mul(s as u128));
        if (n - subset.count_ones() as usize).is_multiple_of(2) {
            total = total.wrapping_add(prod);
        } else {
            total = total.wrapping_sub(prod);
        }
    }
    Ok(total)
}

/// Kuhn's augmenting paths over row bitmasks.
fn has_perfect_matching(rows: &[u64]) -> bool {
    fn augment(r: usize, rows: &[u64], seen: &mut u64, owner: &mut [usize]) -> bool {
        let mut free = rows[r] & !*seen;
        while free != 0 {
            let c = free.trailing_zeros() as usize;
            free &= free - 1;
            *seen |= 1 << c;
            if owner[c] == usize::MAX || augment(owner[c], rows, seen, owner) {
                owner[c] = r;
                return true;
            }
        }
        false
    }
    let mut owner = vec![usize::MAX; rows.len()];
    (0..rows.len()).all(|r| augment(r, rows, &mut 0, &mut owner))
}

/// Number of 312 occurrences through each one-entry.
struct PatternCounts {
    n: usize,
    ones: Vec<u8>,
    /// `pre[r][c]` = ones in rows `< r` and columns `< c`.
    pre: Vec<u64>,
}

impl PatternCounts {
    fn new(n: usize, ones: &[u8]) -> Self {
        let w = n + 1;
        let mut pre = vec![0u64; w * w];
        for r in 0..n {
            for c in 0..n {
                pre[(r + 1) * w + c + 1] =
                    ones[r * n + c] as u64 + pre[r * w + c + 1] + pre[(r + 1) * w + c] - pre[r * w + c];
            }
        }
        Self {
            n,
            ones: ones.to_vec(),
            pre,
        }
    }

    /// Ones in rows `r0..r1` and columns `c0..c1`.
    fn rect(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> u64 {
        if r0 >= r1 || c0 >= c1 {
            return 0;
        }
        let w = self.n + 1;
        self.pre[r1 * w + c1] + self.pre[r0 * w + c0] - self.pre[r0 * w + c1] - self.pre[r1 * w + c0]
    }

    fn one(&self, r: usize, c: usize) -> bool {
        self.ones[r * self.n + c] == 1
    }

    /// Patterns using `(r, c)` in any of its three roles.
    fn through(&self, r: usize, c: usize) -> u64 {
        let n = self.n;
        let mut total = 0;
        // (r, c) is the top entry (r1, c3).
        for r2 in r + 1..n {
            for c1 in 0..c {
                if self.one(r2, c1) {
                    total += self.rect(r2 + 1, n, c1 + 1, c);
                }
            }
        }
        // (r, c) is the middle entry (r2, c1).
        for r3 in r + 1..n {
            for c2 in c + 1..n {
                if self.one(r3, c2) {
                    total += self.rect(0, r, c2 + 1, n);
                }
            }
        }
        // (r, c) is the bottom entry (r3, c2).
        for r2 in 0..r {
            for c1 in 0..c {
                if self.one(r2, c1) {
                    total += self.rect(0, r2, c + 1, n);
                }
            }
        }
        total
    }

    fn total(&self) -> u64 {
        let n = self.n;
        let mut total = 0;
        for r in 0..n {
            for c in 0..n {
                if self.one(r, c) {
                    total += self.through(r, c);
                }
            }
        }
        total / 3
    }
}

/// Maximize the permanent of an `n x n` 312-avoiding 0/1 matrix.
#[derive(Debug, Clone)]
pub struct Permanent312 {
    n: usize,
}

impl Permanent312 {
    pub fn new(n: usize) -> Result<Self, ProblemError> {
        if n == 0 {
            return Err(ProblemError::Parameter("matrix side must be positive".into()));
        }
        if n > PERMANENT_LIMIT {
            return Err(ProblemError::TooLarge {
                what: "matrix side",
                got: n,
                limit: PERMANENT_LIMIT,
            });
        }
        Ok(Self { n })
    }
}

impl Problem for Permanent312 {
    fn id(&self) -> ProblemId {
        ProblemId::Permanent312
    }

    fn payload_len(&self) -> usize {
        self.n * self.n
    }

    /// The permanent for 312-free matrices, minus the number of 312
    /// occurrences otherwise.
    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError> {
        self.check_payload(payload)?;
        if contains_312_rows(&row_masks(self.n, payload)) {
            return Ok(-(PatternCounts::new(self.n, payload).total() as Score));
        }
        let p = permanent(self.n, payload)?;
        Score::try_from(p).map_err(|_| ProblemError::ScoreOverflow(p))
    }

    fn is_valid(&self, payload: &[u8]) -> bool {
        self.check_payload(payload).is_ok() && !contains_312_rows(&row_masks(self.n, payload))
    }

    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8> {
        let n = self.n;
        let mut m = start.to_vec();
        let mut rows = row_masks(n, &m);
        while contains_312_rows(&rows) {
            let counts = PatternCounts::new(n, &m);
            let (_, ties) = argmax_all(
                (0..n * n)
                    .filter(|&i| m[i] == 1)
                    .map(|i| (i, counts.through(i / n, i % n))),
            );
            let i = ties[rng.gen_range(0..ties.len())];
            m[i] = 0;
            rows[i / n] &= !(1 << (i % n));
        }
        let mut empty: Vec<usize> = (0..n * n).filter(|&i| m[i] == 0).collect();
        empty.shuffle(rng);
        for i in empty {
            let (r, c) = (i / n, i % n);
            rows[r] |= 1 << c;
            if contains_312_rows(&rows) {
                rows[r] &= !(1 << c);
            } else {
                m[i] = 1;
            }
        }
        m
    }

    fn rows(&self) -> Option<Vec<usize>> {
        Some(vec![self.n; self.n])
    }
}
