//! Saturated k-Sperner families: no chain of `k + 1` nested sets, and no set can
//! be added without creating one.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{argmax_all, Problem, ProblemError};
use crate::construction::{ProblemId, Score};
use crate::rng::SearchRng;

pub const MAX_GROUND: usize = 16;

/// A family of subsets of `{1..n}`; element `e` is bit `e - 1` of a mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFamily {
    n: usize,
    sets: Vec<u32>,
}

impl SetFamily {
    pub fn new(n: usize, sets: &[u32]) -> Result<Self, ProblemError> {
        if n > MAX_GROUND {
            return Err(ProblemError::TooLarge {
                what: "ground set",
                got: n,
                limit: MAX_GROUND,
            });
        }
        let mut sorted = sets.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != sets.len() {
            return Err(ProblemError::Parameter("family contains a repeated set".into()));
        }
        if let Some(s) = sorted.iter().find(|&&s| s >> n != 0) {
            return Err(ProblemError::Parameter(format!(
                "set {s:#b} is not a subset of {{1..{n}}}"
            )));
        }
        Ok(Self { n, sets: sorted })
    }

    pub fn power_set(n: usize) -> Self {
        Self {
            n,
            sets: (0..1u32 << n).collect(),
        }
    }

    pub fn from_payload(n: usize, payload: &[u8]) -> Self {
        let sets = payload
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(s, _)| s as u32)
            .collect();
        Self { n, sets }
    }

    pub fn to_payload(&self) -> Vec<u8> {
        let mut payload = vec![0; 1 << self.n];
        for &s in &self.sets {
            payload[s as usize] = 1;
        }
        payload
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[u32] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Longest chain `A_1 ⊊ ... ⊊ A_m` of members, with `extra` added if given.
    pub fn longest_chain(&self, extra: Option<u32>) -> usize {
        let mut payload = self.to_payload();
        if let Some(s) = extra {
            payload[s as usize] = 1;
        }
        ChainTables::new(self.n, &payload).longest() as usize
    }

    pub fn is_saturated_k_sperner(&self, k: usize) -> bool {
        let t = ChainTables::new(self.n, &self.to_payload());
        t.longest() as usize <= k && t.addable(k).is_empty()
    }
}

/// `down[s]`: longest chain of members inside `s`. `up[s]`: longest chain of
/// members containing `s`.
struct ChainTables {
    n: usize,
    member: Vec<bool>,
    down: Vec<u32>,
    up: Vec<u32>,
}

impl ChainTables {
    fn new(n: usize, payload: &[u8]) -> Self {
        let size = 1usize << n;
        let member: Vec<bool> = payload.iter().map(|&b| b == 1).collect();
        let mut down = vec![0u32; size];
        for s in 0..size {
            let below = (0..n)
                .filter(|&i| s >> i & 1 == 1)
                .map(|i| down[s ^ 1 << i])
                .max()
                .unwrap_or(0);
            down[s] = below + member[s] as u32;
        }
        let mut up = vec![0u32; size];
        for s in (0..size).rev() {
            let above = (0..n)
                .filter(|&i| s >> i & 1 == 0)
                .map(|i| up[s | 1 << i])
                .max()
                .unwrap_or(0);
            up[s] = above + member[s] as u32;
        }
        Self { n, member, down, up }
    }

    fn longest(&self) -> u32 {
        self.up[0]
    }

    /// Longest chain through `s` if `s` were a member.
    fn through(&self, s: usize) -> u32 {
        let below = (0..self.n)
            .filter(|&i| s >> i & 1 == 1)
            .map(|i| self.down[s ^ 1 << i])
            .max()
            .unwrap_or(0);
        let above = (0..self.n)
            .filter(|&i| s >> i & 1 == 0)
            .map(|i| self.up[s | 1 << i])
            .max()
            .unwrap_or(0);
        below + 1 + above
    }

    /// Makes `s` a member, updating only its supersets in `down` and its
    /// subsets in `up`.
    fn insert(&mut self, s: usize) {
        let full = self.member.len() - 1;
        self.member[s] = true;
        let rest = full & !s;
        // Supersets of `s` in increasing order.
        let mut extra = 0usize;
        loop {
            let t = s | extra;
            let below = (0..self.n)
                .filter(|&i| t >> i & 1 == 1)
                .map(|i| self.down[t ^ 1 << i])
                .max()
                .unwrap_or(0);
            self.down[t] = below + self.member[t] as u32;
            if extra == rest {
                break;
            }
            extra = (extra.wrapping_sub(rest)) & rest;
        }
        // Subsets of `s` in decreasing order.
        let mut t = s;
        loop {
            let above = (0..self.n)
                .filter(|&i| t >> i & 1 == 0)
                .map(|i| self.up[t | 1 << i])
                .max()
                .unwrap_or(0);
            self.up[t] = above + self.member[t] as u32;
            if t == 0 {
                break;
            }
            t = (t - 1) & s;
        }
    }

    /// Non-members whose addition keeps every chain at length at most `k`.
    fn addable(&self, k: usize) -> Vec<usize> {
        (0..self.member.len())
            .filter(|&s| !self.member[s] && self.through(s) as usize <= k)
            .collect()
    }
}

/// Per-member count of chains of exactly `len` members passing through it.
fn chains_through(n: usize, member: &[bool], len: usize) -> Vec<u128> {
    let size = 1usize << n;
    // ending[j][s]: chains of j members with top s. starting[j][s]: with bottom s.
    let zeta_strict_sub = |f: &[u128]| -> Vec<u128> {
        let mut z = f.to_vec();
        for i in 0..n {
            for s in 0..size {
                if s >> i & 1 == 1 {
                    z[s] = z[s].saturating_add(z[s ^ 1 << i]);
                }
            }
        }
        z.iter().zip(f).map(|(a, b)| a.saturating_sub(*b)).collect()
    };
    let zeta_strict_sup = |f: &[u128]| -> Vec<u128> {
        let mut z = f.to_vec();
        for i in 0..n {
            for s in (0..size).rev() {
                if s >> i & 1 == 0 {
                    z[s] = z[s].saturating_add(z[s | 1 << i]);
                }
            }
        }
        z.iter().zip(f).map(|(a, b)| a.saturating_sub(*b)).collect()
    };
    let ones: Vec<u128> = member.iter().map(|&m| m as u128).collect();
    let mut ending = vec![ones.clone()];
    let mut starting = vec![ones.clone()];
    for j in 1..len {
        let below = zeta_strict_sub(&ending[j - 1]);
        ending.push(below.iter().zip(member).map(|(&v, &m)| if m { v } else { 0 }).collect());
        let above = zeta_strict_sup(&starting[j - 1]);
        starting.push(above.iter().zip(member).map(|(&v, &m)| if m { v } else { 0 }).collect());
    }
    (0..size)
        .map(|s| {
            if !member[s] {
                return 0;
            }
            (0..len).fold(0u128, |acc, a| {
                acc.saturating_add(ending[a][s].saturating_mul(starting[len - 1 - a][s]))
            })
        })
        .collect()
}

/// Minimize the size of a saturated k-Sperner family on `{1..n}`.
#[derive(Debug, Clone)]
pub struct SaturatedSperner {
    n: usize,
    k: usize,
}

impl SaturatedSperner {
    pub fn new(n: usize, k: usize) -> Result<Self, ProblemError> {
        if n == 0 || k == 0 {
            return Err(ProblemError::Parameter(
                "ground set and chain bound must be positive".into(),
            ));
        }
        if n > MAX_GROUND {
            return Err(ProblemError::TooLarge {
                what: "ground set",
                got: n,
                limit: MAX_GROUND,
            });
        }
        Ok(Self { n, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Problem for SaturatedSperner {
    fn id(&self) -> ProblemId {
        ProblemId::SaturatedSperner
    }

    fn payload_len(&self) -> usize {
        1 << self.n
    }

    /// `-|F|` when saturated k-Sperner; otherwise `-|F|` minus the number of
    /// addable sets, minus twice the number of members on a `(k+1)`-chain.
    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError> {
        self.check_payload(payload)?;
        let size = payload.iter().filter(|&&b| b == 1).count() as Score;
        let t = ChainTables::new(self.n, payload);
        let addable = t.addable(self.k).len() as Score;
        let overloaded = (0..payload.len())
            .filter(|&s| t.member[s] && t.through(s) as usize > self.k)
            .count() as Score;
        Ok(-size - addable - 2 * overloaded)
    }

    fn is_valid(&self, payload: &[u8]) -> bool {
        if self.check_payload(payload).is_err() {
            return false;
        }
        let t = ChainTables::new(self.n, payload);
        t.longest() as usize <= self.k && t.addable(self.k).is_empty()
    }

    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8> {
        let (n, k) = (self.n, self.k);
        let mut payload = start.to_vec();
        loop {
            if ChainTables::new(n, &payload).longest() as usize <= k {
                break;
            }
            let member: Vec<bool> = payload.iter().map(|&b| b == 1).collect();
            let counts = chains_through(n, &member, k + 1);
            let (best, ties) = argmax_all(counts.iter().copied().enumerate().filter(|&(s, _)| member[s]));
            match best {
                Some(c) if c > 0 => payload[ties[rng.gen_range(0..ties.len())]] = 0,
                _ => break,
            }
        }
        let mut tables = ChainTables::new(n, &payload);
        let mut candidates: Vec<usize> = (0..payload.len()).filter(|&s| payload[s] == 0).collect();
        candidates.shuffle(rng);
        for s in candidates {
            if tables.through(s) as usize <= k {
                payload[s] = 1;
                tables.insert(s);
            }
        }
        payload
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn mask(elements: &[u32]) -> u32 {
        elements.iter().fold(0, |m, &e| m | 1 << (e - 1))
    }

    #[test]
    fn power_set_chain() {
        for n in 0..=6 {
            assert_eq!(SetFamily::power_set(n).longest_chain(None), n + 1);
        }
    }

    #[test]
    fn small_saturated_family() {
        // Subsets of {1,2,3,4}: {}, 1, 2, 12, 34, 134, 234, 1234.
        let sets: Vec<u32> = [
            &[][..],
            &[1],
            &[2],
            &[1, 2],
            &[3, 4],
            &[1, 3, 4],
            &[2, 3, 4],
            &[1, 2, 3, 4],
        ]
        .iter()
        .map(|e| mask(e))
        .collect();
        let f = SetFamily::new(4, &sets).unwrap();
        assert_eq!(f.len(), 8);
        assert_eq!(f.longest_chain(None), 4);
        assert!(f.is_saturated_k_sperner(4));
        assert!(!f.is_saturated_k_sperner(5));
        let p = SaturatedSperner::new(4, 4).unwrap();
        assert_eq!(p.score(&f.to_payload()).unwrap(), -8);
    }

    #[test]
    fn extra_set_extends_chain() {
        let f = SetFamily::new(3, &[0b001, 0b111]).unwrap();
        assert_eq!(f.longest_chain(None), 2);
        assert_eq!(f.longest_chain(Some(0b011)), 3);
    }

    #[test]
    fn incremental_insert_matches_rebuild() {
        let mut rng = stream(5, &[]);
        let n = 6;
        let mut payload = vec![0u8; 1 << n];
        let mut t = ChainTables::new(n, &payload);
        for _ in 0..40 {
            let s = rng.gen_range(0..payload.len());
            payload[s] = 1;
            t.insert(s);
            let fresh = ChainTables::new(n, &payload);
            assert_eq!((&t.down, &t.up), (&fresh.down, &fresh.up));
        }
    }

    #[test]
    fn chain_counts() {
        let member = vec![true; 8];
        // Full chains of the 3-cube: 3! = 6 of length 4; each passes every level once.
        let c = chains_through(3, &member, 4);
        assert_eq!(c[0], 6);
        assert_eq!(c[7], 6);
        assert_eq!(c[1], 2);
    }

    #[test]
    fn search_output_is_saturated() {
        for (n, k) in [(3, 1), (4, 2), (5, 2), (5, 3)] {
            let p = SaturatedSperner::new(n, k).unwrap();
            for seed in 0..5 {
                let mut rng = stream(seed, &[n as u64, k as u64]);
                let start: Vec<u8> = (0..1 << n).map(|_| rng.gen_range(0..2)).collect();
                let out = p.local_search(&start, &mut rng);
                assert!(p.is_valid(&out), "n={n} k={k}");
                assert_eq!(
                    p.score(&out).unwrap(),
                    -(out.iter().filter(|&&b| b == 1).count() as Score)
                );
            }
        }
    }

    #[test]
    fn antichain_for_k_one() {
        // The middle layer of {1,2,3,4} is a saturated antichain.
        let sets: Vec<u32> = (0..16u32).filter(|s| s.count_ones() == 2).collect();
        assert!(SetFamily::new(4, &sets).unwrap().is_saturated_k_sperner(1));
    }
}
