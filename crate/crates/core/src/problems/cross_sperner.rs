//! Cross-Sperner tuples: `k` families of subsets of `{1..n}` such that no set of
//! one family is contained in a set of another. The objective is the product of
//! the family sizes.

use rand::seq::SliceRandom;

use super::{Problem, ProblemError};
use crate::construction::{ProblemId, Score};
use crate::rng::SearchRng;

pub const MAX_GROUND: usize = 16;
pub const MAX_FAMILIES: usize = 9;

/// Families of `n`-bit masks (element `e` is bit `e - 1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFamilyTuple {
    n: usize,
    families: Vec<Vec<u32>>,
}

impl SetFamilyTuple {
    pub fn new(n: usize, families: Vec<Vec<u32>>) -> Result<Self, ProblemError> {
        if n > MAX_GROUND {
            return Err(ProblemError::TooLarge {
                what: "ground set",
                got: n,
                limit: MAX_GROUND,
            });
        }
        let mut families = families;
        for f in &mut families {
            let len = f.len();
            f.sort_unstable();
            f.dedup();
            if f.len() != len {
                return Err(ProblemError::Parameter("a family contains a repeated set".into()));
            }
            if let Some(s) = f.iter().find(|&&s| s >> n != 0) {
                return Err(ProblemError::Parameter(format!(
                    "set {s:#b} is not a subset of {{1..{n}}}"
                )));
            }
        }
        Ok(Self { n, families })
    }

    /// Reads payload digits: entry `s` is `0` (unused) or the 1-based family of set `s`.
    pub fn from_payload(n: usize, k: usize, payload: &[u8]) -> Self {
        let mut families = vec![Vec::new(); k];
        for (s, &f) in payload.iter().enumerate() {
            if f >= 1 && (f as usize) <= k {
                families[f as usize - 1].push(s as u32);
            }
        }
        Self { n, families }
    }

    /// Fails if some set lies in two families (which already violates the
    /// cross-Sperner condition).
    pub fn to_payload(&self) -> Result<Vec<u8>, ProblemError> {
        let mut payload = vec![0u8; 1 << self.n];
        for (i, f) in self.families.iter().enumerate() {
            for &s in f {
                if payload[s as usize] != 0 {
                    return Err(ProblemError::Parameter(format!("set {s:#b} lies in two families")));
                }
                payload[s as usize] = i as u8 + 1;
            }
        }
        Ok(payload)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn families(&self) -> &[Vec<u32>] {
        &self.families
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.families.iter().map(Vec::len).collect()
    }

    pub fn product(&self) -> Result<Score, ProblemError> {
        product(&self.sizes())
    }

    /// First violation `(i, A, j, B)` with `A ∈ F_i`, `B ∈ F_j`, `i != j`, `A ⊆ B`.
    pub fn violation(&self) -> Option<(usize, u32, usize, u32)> {
        for (i, fi) in self.families.iter().enumerate() {
            for &a in fi {
                for (j, fj) in self.families.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    if let Some(&b) = fj.iter().find(|&&b| a & b == a) {
                        return Some((i, a, j, b));
                    }
                }
            }
        }
        None
    }

    pub fn is_cross_sperner(&self) -> bool {
        self.violation().is_none()
    }

    /// Deletes violating sets in the fixed order: scan `(i, A)` increasing
    /// and, for each surviving `A`, delete every `B ⊇ A` from the other
    /// families. This equals repeatedly deleting `B` from the
    /// lexicographically least violation `(i, A, j, B)`.
    pub fn repaired(&self) -> Self {
        let mut families = self.families.clone();
        for i in 0..families.len() {
            let mut idx = 0;
            while idx < families[i].len() {
                let a = families[i][idx];
                for (j, fj) in families.iter_mut().enumerate() {
                    if j != i {
                        fj.retain(|&b| a & b != a);
                    }
                }
                idx += 1;
            }
        }
        Self { n: self.n, families }
    }
}

fn product(sizes: &[usize]) -> Result<Score, ProblemError> {
    sizes.iter().try_fold(1 as Score, |acc, &s| {
        acc.checked_mul(s as Score)
            .ok_or(ProblemError::ScoreOverflow(sizes.iter().map(|&s| s as u128).product()))
    })
}

/// Repairs a payload in place with the same order as [`SetFamilyTuple::repaired`].
fn repair_payload(n: usize, k: usize, payload: &mut [u8]) {
    let full = (1usize << n) - 1;
    for i in 1..=k as u8 {
        for a in 0..payload.len() {
            if payload[a] != i {
                continue;
            }
            // Proper supersets of `a`.
            let free = full & !a;
            let mut extra = free;
            while extra != 0 {
                let b = a | extra;
                if payload[b] != 0 && payload[b] != i {
                    payload[b] = 0;
                }
                extra = (extra - 1) & free;
            }
        }
    }
}

/// True if set `s` can join family `f` (1-based) without a violation.
fn admissible(n: usize, payload: &[u8], s: usize, f: u8) -> bool {
    let full = (1usize << n) - 1;
    let clash = |t: usize| payload[t] != 0 && payload[t] != f;
    // Subsets of s.
    let mut sub = s;
    loop {
        if clash(sub) {
            return false;
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & s;
    }
    let free = full & !s;
    let mut extra = free;
    while extra != 0 {
        if clash(s | extra) {
            return false;
        }
        extra = (extra - 1) & free;
    }
    true
}

/// Maximize the product of family sizes of a cross-Sperner `k`-tuple on `{1..n}`.
#[derive(Debug, Clone)]
pub struct CrossSperner {
    n: usize,
    k: usize,
}

impl CrossSperner {
    pub fn new(n: usize, k: usize) -> Result<Self, ProblemError> {
        if n == 0 {
            return Err(ProblemError::Parameter("ground set must be nonempty".into()));
        }
        if k < 2 {
            return Err(ProblemError::Parameter(format!("need at least 2 families, got {k}")));
        }
        if n > MAX_GROUND {
            return Err(ProblemError::TooLarge {
                what: "ground set",
                got: n,
                limit: MAX_GROUND,
            });
        }
        if k > MAX_FAMILIES {
            return Err(ProblemError::TooLarge {
                what: "families",
                got: k,
                limit: MAX_FAMILIES,
            });
        }
        Ok(Self { n, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn score_tuple(&self, t: &SetFamilyTuple) -> Result<Score, ProblemError> {
        t.repaired().product()
    }
}

impl Problem for CrossSperner {
    fn id(&self) -> ProblemId {
        ProblemId::CrossSperner
    }

    fn payload_len(&self) -> usize {
        1 << self.n
    }

    fn alphabet(&self) -> u8 {
        self.k as u8 + 1
    }

    /// Product of family sizes after repair.
    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError> {
        self.check_payload(payload)?;
        let mut p = payload.to_vec();
        repair_payload(self.n, self.k, &mut p);
        let mut sizes = vec![0usize; self.k];
        for &f in &p {
            if f > 0 {
                sizes[f as usize - 1] += 1;
            }
        }
        product(&sizes)
    }

    fn is_valid(&self, payload: &[u8]) -> bool {
        if self.check_payload(payload).is_err() {
            return false;
        }
        let mut p = payload.to_vec();
        repair_payload(self.n, self.k, &mut p);
        p == payload
    }

    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8> {
        let mut p = start.to_vec();
        repair_payload(self.n, self.k, &mut p);
        let mut moves: Vec<(usize, u8)> = (0..p.len())
            .filter(|&s| p[s] == 0)
            .flat_map(|s| (1..=self.k as u8).map(move |f| (s, f)))
            .collect();
        moves.shuffle(rng);
        for (s, f) in moves {
            if p[s] == 0 && admissible(self.n, &p, s, f) {
                p[s] = f;
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn m(e: &[u32]) -> u32 {
        e.iter().fold(0, |m, &x| m | 1 << (x - 1))
    }

    #[test]
    fn small_pair_scores_sixteen() {
        let f1 = vec![m(&[1]), m(&[1, 2]), m(&[1, 3]), m(&[1, 2, 3])];
        let f2 = vec![m(&[4]), m(&[2, 4]), m(&[3, 4]), m(&[2, 3, 4])];
        let t = SetFamilyTuple::new(4, vec![f1, f2]).unwrap();
        assert!(t.is_cross_sperner());
        let p = CrossSperner::new(4, 2).unwrap();
        assert_eq!(p.score_tuple(&t).unwrap(), 16);
        assert_eq!(p.score(&t.to_payload().unwrap()).unwrap(), 16);
    }

    #[test]
    fn empty_set_forces_deletions() {
        let t = SetFamilyTuple::new(3, vec![vec![0], vec![m(&[1]), m(&[2, 3])]]).unwrap();
        assert!(!t.is_cross_sperner());
        let r = t.repaired();
        assert!(r.is_cross_sperner());
        assert_eq!(r.sizes(), vec![1, 0]);
    }

    #[test]
    fn payload_repair_matches_tuple_repair() {
        let mut rng = stream(11, &[]);
        for _ in 0..200 {
            let (n, k) = (4, rng.gen_range(2..4));
            let payload: Vec<u8> = (0..16).map(|_| rng.gen_range(0..=k as u8)).collect();
            let t = SetFamilyTuple::from_payload(n, k, &payload);
            let mut p = payload.clone();
            repair_payload(n, k, &mut p);
            assert_eq!(SetFamilyTuple::from_payload(n, k, &p), t.repaired());
        }
    }

    #[test]
    fn repair_equals_iterated_minimal_deletion() {
        let mut rng = stream(12, &[]);
        for _ in 0..200 {
            let k = 3;
            let payload: Vec<u8> = (0..16).map(|_| rng.gen_range(0..=k as u8)).collect();
            let mut slow = SetFamilyTuple::from_payload(4, k, &payload);
            while let Some((_, _, j, b)) = slow.violation() {
                slow.families[j].retain(|&x| x != b);
            }
            assert_eq!(slow, SetFamilyTuple::from_payload(4, k, &payload).repaired());
        }
    }

    #[test]
    fn search_output_is_valid_and_maximal() {
        for (n, k) in [(3, 2), (4, 2), (4, 3)] {
            let p = CrossSperner::new(n, k).unwrap();
            for seed in 0..10 {
                let mut rng = stream(seed, &[]);
                let start: Vec<u8> = (0..1 << n).map(|_| rng.gen_range(0..=k as u8)).collect();
                let before = p.score(&start).unwrap();
                let out = p.local_search(&start, &mut rng);
                assert!(p.is_valid(&out));
                assert!(p.score(&out).unwrap() >= before);
                for s in 0..out.len() {
                    if out[s] == 0 {
                        for f in 1..=k as u8 {
                            let mut more = out.clone();
                            more[s] = f;
                            assert!(!p.is_valid(&more));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_single_family() {
        assert!(CrossSperner::new(4, 1).is_err());
    }
}
