//! Double covers of `{0,1,2}^d` by proper sub-boxes.
//!
//! A box is a product `B_1 x ... x B_d` with each `B_i` a nonempty subset of
//! `{0,1,2}`, written as a 3-bit mask. It is proper when no factor is the whole
//! of `{0,1,2}`.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{argmax_all, Problem, ProblemError};
use crate::construction::{ProblemId, Score};
use crate::rng::SearchRng;

pub const MAX_DIMENSION: usize = 7;
pub const DEFAULT_OVER_WEIGHT: Score = 3;
pub const DEFAULT_UNDER_WEIGHT: Score = 1;
/// Score of a cover that contains an improper box.
pub const IMPROPER_SCORE: Score = Score::MIN;

const FULL: u8 = 0b111;
/// The six proper factors, in payload order.
pub const PROPER_FACTORS: [u8; 6] = [0b001, 0b010, 0b011, 0b100, 0b101, 0b110];

/// A list of boxes, each a `d`-tuple of factor masks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxCover {
    d: usize,
    boxes: Vec<Vec<u8>>,
}

impl BoxCover {
    pub fn new(d: usize, boxes: Vec<Vec<u8>>) -> Result<Self, ProblemError> {
        if d > MAX_DIMENSION {
            return Err(ProblemError::TooLarge {
                what: "box dimension",
                got: d,
                limit: MAX_DIMENSION,
            });
        }
        for b in &boxes {
            if b.len() != d {
                return Err(ProblemError::Shape {
                    expected: d,
                    got: b.len(),
                });
            }
            if let Some(&f) = b.iter().find(|&&f| f == 0 || f > FULL) {
                return Err(ProblemError::Parameter(format!(
                    "box factor mask {f} is not a nonempty subset of {{0,1,2}}"
                )));
            }
        }
        Ok(Self { d, boxes })
    }

    pub fn from_payload(d: usize, payload: &[u8]) -> Self {
        let mut boxes = Vec::new();
        for (idx, &mult) in payload.iter().enumerate() {
            for _ in 0..mult {
                boxes.push(box_of(d, idx));
            }
        }
        Self { d, boxes }
    }

    /// Fails on improper boxes and on boxes used more than twice.
    pub fn to_payload(&self) -> Result<Vec<u8>, ProblemError> {
        let mut payload = vec![0u8; 6usize.pow(self.d as u32)];
        for b in &self.boxes {
            let idx = index_of(b).ok_or_else(|| ProblemError::Parameter(format!("box {b:?} is not proper")))?;
            payload[idx] += 1;
            if payload[idx] > 2 {
                return Err(ProblemError::Parameter(format!("box {b:?} appears more than twice")));
            }
        }
        Ok(payload)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn boxes(&self) -> &[Vec<u8>] {
        &self.boxes
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn all_proper(&self) -> bool {
        self.boxes.iter().all(|b| is_proper(b))
    }

    /// Cover multiplicity of every point of `{0,1,2}^d`, indexed base 3 with
    /// coordinate 0 least significant.
    pub fn coverage(&self) -> Vec<u32> {
        let mut cover = vec![0u32; 3usize.pow(self.d as u32)];
        for b in &self.boxes {
            for p in box_points(b) {
                cover[p] += 1;
            }
        }
        cover
    }

    pub fn verify_double_cover(&self) -> bool {
        self.all_proper() && self.coverage().iter().all(|&c| c == 2)
    }

    pub fn score(&self, over_weight: Score, under_weight: Score) -> Score {
        if !self.all_proper() {
            return IMPROPER_SCORE;
        }
        penalized(self.len(), &self.coverage(), over_weight, under_weight)
    }
}

fn penalized(count: usize, cover: &[u32], over_weight: Score, under_weight: Score) -> Score {
    let over: Score = cover.iter().map(|&c| (c as Score - 2).max(0)).sum();
    let under: Score = cover.iter().map(|&c| (2 - c as Score).max(0)).sum();
    -(count as Score) - over_weight * over - under_weight * under
}

pub fn is_proper(b: &[u8]) -> bool {
    b.iter().all(|&f| f != 0 && f != FULL)
}

/// Payload index of a proper box: factor codes in base 6, coordinate 0 least
/// significant.
pub fn index_of(b: &[u8]) -> Option<usize> {
    b.iter().rev().try_fold(0usize, |acc, &f| {
        PROPER_FACTORS.iter().position(|&p| p == f).map(|code| acc * 6 + code)
    })
}

pub fn box_of(d: usize, mut idx: usize) -> Vec<u8> {
    (0..d)
        .map(|_| {
            let f = PROPER_FACTORS[idx % 6];
            idx /= 6;
            f
        })
        .collect()
}

/// Point indices (base 3) inside the box.
pub fn box_points(b: &[u8]) -> Vec<usize> {
    let mut points = vec![0usize];
    let mut place = 1;
    for &f in b {
        let values: Vec<usize> = (0..3).filter(|v| f >> v & 1 == 1).collect();
        points = points
            .iter()
            .flat_map(|&p| values.iter().map(move |&v| p + v * place))
            .collect();
        place *= 3;
    }
    points
}

/// Minimize the number of proper boxes in a double cover of `{0,1,2}^d`.
/// The payload holds a multiplicity `0..=2` for each of the `6^d` proper boxes.
#[derive(Debug, Clone)]
pub struct BoxCoverProblem {
    d: usize,
    over_weight: Score,
    under_weight: Score,
    points: Vec<Vec<usize>>,
}

impl BoxCoverProblem {
    pub fn new(d: usize) -> Result<Self, ProblemError> {
        Self::with_weights(d, DEFAULT_OVER_WEIGHT, DEFAULT_UNDER_WEIGHT)
    }

    pub fn with_weights(d: usize, over_weight: Score, under_weight: Score) -> Result<Self, ProblemError> {
        if d == 0 {
            return Err(ProblemError::Parameter("box dimension must be positive".into()));
        }
        if d > MAX_DIMENSION {
            return Err(ProblemError::TooLarge {
                what: "box dimension",
                got: d,
                limit: MAX_DIMENSION,
            });
        }
        if over_weight < 0 || under_weight < 0 {
            return Err(ProblemError::Parameter(
                "cover penalty weights must be non-negative".into(),
            ));
        }
        let points = (0..6usize.pow(d as u32)).map(|i| box_points(&box_of(d, i))).collect();
        Ok(Self {
            d,
            over_weight,
            under_weight,
            points,
        })
    }

    fn coverage(&self, payload: &[u8]) -> Vec<u32> {
        let mut cover = vec![0u32; 3usize.pow(self.d as u32)];
        for (idx, &mult) in payload.iter().enumerate() {
            if mult > 0 {
                for &p in &self.points[idx] {
                    cover[p] += mult as u32;
                }
            }
        }
        cover
    }
}

impl Problem for BoxCoverProblem {
    fn id(&self) -> ProblemId {
        ProblemId::BoxCover
    }

    fn payload_len(&self) -> usize {
        6usize.pow(self.d as u32)
    }

    fn alphabet(&self) -> u8 {
        3
    }

    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError> {
        self.check_payload(payload)?;
        let count: usize = payload.iter().map(|&m| m as usize).sum();
        Ok(penalized(
            count,
            &self.coverage(payload),
            self.over_weight,
            self.under_weight,
        ))
    }

    fn is_valid(&self, payload: &[u8]) -> bool {
        self.check_payload(payload).is_ok() && self.coverage(payload).iter().all(|&c| c == 2)
    }

    /// Removes boxes touching the most over-covered points until no point is
    /// covered more than twice, then adds boxes in order of decreasing volume
    /// (random order within a volume) wherever they fit. Two passes allow a box
    /// to be used twice; single-point boxes guarantee an exact double cover.
    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8> {
        let mut payload = start.to_vec();
        let mut cover = self.coverage(&payload);
        loop {
            let (best, ties) = argmax_all(
                (0..payload.len())
                    .filter(|&i| payload[i] > 0)
                    .map(|i| (i, self.points[i].iter().filter(|&&p| cover[p] > 2).count())),
            );
            match best {
                Some(m) if m > 0 => {
                    let i = ties[rng.gen_range(0..ties.len())];
                    payload[i] -= 1;
                    for &p in &self.points[i] {
                        cover[p] -= 1;
                    }
                }
                _ => break,
            }
        }

        let mut order: Vec<usize> = (0..payload.len()).collect();
        order.shuffle(rng);
        order.sort_by_key(|&i| std::cmp::Reverse(self.points[i].len()));
        for _ in 0..2 {
            for &i in &order {
                if payload[i] < 2 && self.points[i].iter().all(|&p| cover[p] < 2) {
                    payload[i] += 1;
                    for &p in &self.points[i] {
                        cover[p] += 1;
                    }
                }
            }
        }
        payload
    }
}
