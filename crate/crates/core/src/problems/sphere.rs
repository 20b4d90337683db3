//! Points of the `n x n x n` grid with no five on a common sphere or plane.

use rand::seq::SliceRandom;

use super::{Problem, ProblemError};
use crate::construction::{ProblemId, Score};
use crate::rng::SearchRng;

pub const MAX_SIDE: usize = 20;

pub type Point3 = [i64; 3];

/// Ordered lattice points of `[n]^3`, 0-based, without repeats.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet3D {
    n: usize,
    points: Vec<Point3>,
}

impl PointSet3D {
    pub fn new(n: usize, points: &[Point3]) -> Result<Self, ProblemError> {
        for (i, p) in points.iter().enumerate() {
            if p.iter().any(|&a| a < 0 || a >= n as i64) {
                return Err(ProblemError::Parameter(format!("point {p:?} lies outside [{n}]^3")));
            }
            if points[..i].contains(p) {
                return Err(ProblemError::Parameter(format!("duplicate point {p:?}")));
            }
        }
        Ok(Self {
            n,
            points: points.to_vec(),
        })
    }

    pub fn from_payload(n: usize, payload: &[u8]) -> Self {
        let points = payload
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == 1)
            .map(|(i, _)| point_of(n, i))
            .collect();
        Self { n, points }
    }

    pub fn to_payload(&self) -> Vec<u8> {
        let mut payload = vec![0; self.n.pow(3)];
        for p in &self.points {
            payload[index_of(self.n, p)] = 1;
        }
        payload
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Image under symmetry `0..48`: a coordinate permutation (`s / 8`)
    /// followed by reflections `x -> n - 1 - x` on the axes set in `s % 8`.
    pub fn transformed(&self, symmetry: usize) -> Self {
        Self {
            n: self.n,
            points: self
                .points
                .iter()
                .map(|p| apply_symmetry(self.n, symmetry, p))
                .collect(),
        }
    }

    /// The orbit images, one per symmetry, in symmetry order (not deduplicated).
    pub fn cube_symmetries(&self) -> Vec<PointSet3D> {
        (0..48).map(|s| self.transformed(s)).collect()
    }
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn apply_symmetry(n: usize, symmetry: usize, p: &Point3) -> Point3 {
    let perm = PERMUTATIONS[symmetry / 8];
    let mut q = [p[perm[0]], p[perm[1]], p[perm[2]]];
    for (axis, c) in q.iter_mut().enumerate() {
        if symmetry >> axis & 1 == 1 {
            *c = n as i64 - 1 - *c;
        }
    }
    q
}

/// Index of the symmetry undoing `symmetry`.
pub fn inverse_symmetry(n: usize, symmetry: usize) -> usize {
    let probe: [Point3; 2] = [[0, 1, 2], [3, 4, 5]];
    let big = 6.max(n);
    (0..48)
        .find(|&t| {
            probe
                .iter()
                .all(|p| apply_symmetry(big, t, &apply_symmetry(big, symmetry, p)) == *p)
        })
        .expect("the symmetry group is closed under inverses")
}

pub fn index_of(n: usize, p: &Point3) -> usize {
    (p[0] as usize * n + p[1] as usize) * n + p[2] as usize
}

pub fn point_of(n: usize, i: usize) -> Point3 {
    [(i / (n * n)) as i64, (i / n % n) as i64, (i % n) as i64]
}

/// The 5x5 determinant with rows `(x, y, z, x^2 + y^2 + z^2, 1)`: zero iff the
/// five points lie on one sphere or one plane.
pub fn cosphere_det(p: &[Point3; 5]) -> i128 {
    let sq = |q: &Point3| (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]) as i128;
    let base = &p[0];
    let mut m = [[0i128; 4]; 4];
    for (row, q) in m.iter_mut().zip(&p[1..]) {
        for a in 0..3 {
            row[a] = (q[a] - base[a]) as i128;
        }
        row[3] = sq(q) - sq(base);
    }
    det4(&m)
}

fn det3(m: [[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn det4(m: &[[i128; 4]; 4]) -> i128 {
    let mut total = 0;
    for col in 0..4 {
        let mut minor = [[0i128; 3]; 3];
        for r in 1..4 {
            for (k, &v) in m[r]
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != col)
                .map(|(_, x)| x)
                .enumerate()
            {
                minor[r - 1][k] = v;
            }
        }
        let term = m[0][col] * det3(minor);
        total += if col % 2 == 0 { term } else { -term };
    }
    total
}

/// True if adding `p` to `set` creates five points on a sphere or plane.
fn closes_sphere(set: &[Point3], p: &Point3) -> bool {
    let k = set.len();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    if cosphere_det(&[set[a], set[b], set[c], set[d], *p]) == 0 {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Number of 5-subsets on a common sphere or plane.
pub fn cospherical_count(points: &[Point3]) -> u64 {
    let k = points.len();
    let mut total = 0;
    for e in 4..k {
        for a in 0..e {
            for b in a + 1..e {
                for c in b + 1..e {
                    for d in c + 1..e {
                        if cosphere_det(&[points[a], points[b], points[c], points[d], points[e]]) == 0 {
                            total += 1;
                        }
                    }
                }
            }
        }
    }
    total
}

/// No five of `points` on a sphere or plane (repeated points count as cospherical).
pub fn no_five_cospherical(points: &[Point3]) -> bool {
    (0..points.len()).all(|i| !points[..i].contains(&points[i]) && !closes_sphere(&points[..i], &points[i]))
}

/// Maximize the number of points of `[n]^3` with no five on a sphere or plane.
#[derive(Debug, Clone)]
pub struct NoFiveOnSphere {
    n: usize,
}

impl NoFiveOnSphere {
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

    /// Inserts seed points in order, skipping repeats and points that would
    /// close a sphere, then tries every remaining grid point once in random
    /// order. Rejections are permanent, so the result is maximal.
    pub fn search_points(&self, seed: &[Point3], rng: &mut SearchRng) -> PointSet3D {
        let n = self.n;
        let mut taken = vec![false; n.pow(3)];
        let mut set: Vec<Point3> = Vec::new();
        for p in seed {
            if p.iter().any(|&a| a < 0 || a >= n as i64) {
                continue;
            }
            let i = index_of(n, p);
            if !taken[i] && !closes_sphere(&set, p) {
                taken[i] = true;
                set.push(*p);
            }
        }
        let mut rest: Vec<usize> = (0..n.pow(3)).filter(|&i| !taken[i]).collect();
        rest.shuffle(rng);
        for i in rest {
            let p = point_of(n, i);
            if !closes_sphere(&set, &p) {
                set.push(p);
            }
        }
        PointSet3D { n, points: set }
    }
}

impl Problem for NoFiveOnSphere {
    fn id(&self) -> ProblemId {
        ProblemId::Sphere
    }

    fn payload_len(&self) -> usize {
        self.n.pow(3)
    }

    /// `|S| - 2 * (#cospherical 5-subsets)`.
    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError> {
        self.check_payload(payload)?;
        let s = PointSet3D::from_payload(self.n, payload);
        Ok(s.len() as Score - 2 * cospherical_count(&s.points) as Score)
    }

    fn is_valid(&self, payload: &[u8]) -> bool {
        self.check_payload(payload).is_ok() && no_five_cospherical(&PointSet3D::from_payload(self.n, payload).points)
    }

    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8> {
        let seed = PointSet3D::from_payload(self.n, start).points;
        self.search_points(&seed, rng).to_payload()
    }

    fn local_search_ordered(&self, items: &[(usize, u8)], rng: &mut SearchRng) -> Vec<u8> {
        let seed: Vec<Point3> = items
            .iter()
            .filter(|&&(i, v)| v == 1 && i < self.payload_len())
            .map(|&(i, _)| point_of(self.n, i))
            .collect();
        self.search_points(&seed, rng).to_payload()
    }

    fn symmetries(&self, payload: &[u8]) -> Vec<Vec<u8>> {
        let s = PointSet3D::from_payload(self.n, payload);
        s.cube_symmetries().iter().map(PointSet3D::to_payload).collect()
    }
}
