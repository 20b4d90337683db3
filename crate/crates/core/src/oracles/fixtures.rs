//! Stored constructions with claimed properties, and their verification.
//!
//! File format: `#` comments, then `problem <id>`, `size <n>`, optional
//! `k <k>` and `base <b>`, one `claim ...` line per property, and `data`
//! followed by the construction, one item per line.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::count::{cospherical_count, five_point_det, longest_chain};
use crate::construction::ProblemId;
use crate::problems::matrix::permanent;
use crate::problems::Point3;

macro_rules! shipped {
    ($($name:literal),* $(,)?) => {
        /// Fixtures shipped with the crate.
        pub const FIXTURE_NAMES: &[&str] = &[$($name),*];
        const EMBEDDED: &[(&str, &str)] = &[$(($name, include_str!(concat!("../../fixtures/", $name, ".txt")))),*];
    };
}

shipped!(
    "boxes_double_cover_d5",
    "cross_sperner_n4_k2",
    "cross_sperner_n6_k4",
    "cross_sperner_n7_k3",
    "cross_sperner_n7_k4",
    "cross_sperner_n8_k3",
    "hypercube_d6",
    "permanent312_n25_a",
    "permanent312_n25_b",
    "sperner_saturated_k4_n4",
    "sperner_saturated_k8_n12",
    "sphere_n3",
    "sphere_n4",
    "sphere_n5",
    "sphere_n6",
    "sphere_n7",
    "sphere_n8",
    "sphere_n9",
    "sphere_n10",
);

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("missing fixture files in {}: {}", dir.display(), names.join(", "))]
    Missing { dir: PathBuf, names: Vec<String> },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

/// The construction, in the problem's natural terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixtureData {
    /// 0-based grid points.
    Points(Vec<Point3>),
    /// Set bitmasks, element `e` as bit `e - 1`.
    Sets(Vec<u32>),
    Families(Vec<Vec<u32>>),
    /// Factor masks over `{0,1,2}`.
    Boxes(Vec<Vec<u8>>),
    /// Cube edges as vertex bitmasks.
    Edges(Vec<(usize, usize)>),
    /// Row-major 0/1 entries.
    Matrix(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Claim {
    Points(usize),
    InGrid,
    NoFiveCospherical,
    /// Exact number of 5-subsets on a common sphere or plane.
    CosphericalTuples(u64),
    Sets(usize),
    KSperner,
    Saturated,
    Product(u128),
    CrossSperner,
    Boxes(usize),
    Proper,
    DoubleCover,
    Edges(usize),
    Spanning,
    Diameter(usize),
    Free312,
    Permanent(u128),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub problem: ProblemId,
    pub size: usize,
    pub k: usize,
    pub claims: Vec<Claim>,
    pub data: FixtureData,
}

/// One checked claim. `witness` explains a failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub fixture: String,
    pub claim: String,
    pub passed: bool,
    pub witness: Option<String>,
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {} {}", self.fixture, self.claim)?;
        if let Some(w) = &self.witness {
            write!(f, " ({w})")?;
        }
        Ok(())
    }
}

impl Fixture {
    pub fn parse(name: &str, text: &str) -> Result<Self, FixtureError> {
        let err = |line: usize, message: String| FixtureError::Parse {
            file: name.to_string(),
            line,
            message,
        };
        let mut problem = None;
        let mut size = None;
        let mut k = 0;
        let mut base = 0i64;
        let mut claims = Vec::new();
        let mut data_lines = Vec::new();
        let mut in_data = false;
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if in_data {
                data_lines.push((lineno, line));
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let rest = rest.trim();
            let number = |s: &str| s.parse::<u128>().map_err(|_| err(lineno, format!("bad number {s:?}")));
            match key {
                "problem" => problem = Some(rest.parse::<ProblemId>().map_err(|e| err(lineno, e.to_string()))?),
                "size" => size = Some(number(rest)? as usize),
                "k" => k = number(rest)? as usize,
                "base" => base = number(rest)? as i64,
                "claim" => {
                    claims.push(parse_claim(rest).ok_or_else(|| err(lineno, format!("unknown claim {rest:?}")))?)
                }
                "data" => in_data = true,
                _ => return Err(err(lineno, format!("unknown key {key:?}"))),
            }
        }
        let problem = problem.ok_or_else(|| err(0, "missing `problem` line".into()))?;
        let size = size.ok_or_else(|| err(0, "missing `size` line".into()))?;
        if !in_data {
            return Err(err(0, "missing `data` section".into()));
        }
        for claim in &claims {
            if !claim_applies(problem, claim) {
                return Err(err(0, format!("claim {claim:?} does not apply to {problem}")));
            }
        }
        let data = parse_data(problem, size, k, base, &data_lines).map_err(|(line, message)| err(line, message))?;
        Ok(Self {
            name: name.to_string(),
            problem,
            size,
            k,
            claims,
            data,
        })
    }
}

fn parse_claim(s: &str) -> Option<Claim> {
    let fields: Vec<&str> = s.split_whitespace().collect();
    let num = |f: &str| f.parse::<u128>().ok();
    Some(match fields[..] {
        ["points", v] => Claim::Points(num(v)? as usize),
        ["in-grid"] => Claim::InGrid,
        ["no-five-cospherical"] => Claim::NoFiveCospherical,
        ["cospherical-tuples", v] => Claim::CosphericalTuples(num(v)? as u64),
        ["sets", v] => Claim::Sets(num(v)? as usize),
        ["k-sperner"] => Claim::KSperner,
        ["saturated"] => Claim::Saturated,
        ["product", v] => Claim::Product(num(v)?),
        ["cross-sperner"] => Claim::CrossSperner,
        ["boxes", v] => Claim::Boxes(num(v)? as usize),
        ["proper"] => Claim::Proper,
        ["double-cover"] => Claim::DoubleCover,
        ["edges", v] => Claim::Edges(num(v)? as usize),
        ["spanning"] => Claim::Spanning,
        ["diameter", v] => Claim::Diameter(num(v)? as usize),
        ["312-free"] => Claim::Free312,
        ["permanent", v] => Claim::Permanent(num(v)?),
        _ => return None,
    })
}

fn claim_applies(problem: ProblemId, claim: &Claim) -> bool {
    use Claim::*;
    match problem {
        ProblemId::Sphere => matches!(claim, Points(_) | InGrid | NoFiveCospherical | CosphericalTuples(_)),
        ProblemId::SaturatedSperner => matches!(claim, Sets(_) | KSperner | Saturated),
        ProblemId::CrossSperner => matches!(claim, Product(_) | CrossSperner),
        ProblemId::BoxCover => matches!(claim, Boxes(_) | Proper | DoubleCover),
        ProblemId::Hypercube => matches!(claim, Edges(_) | Spanning | Diameter(_)),
        ProblemId::Permanent312 => matches!(claim, Free312 | Permanent(_)),
        _ => false,
    }
}

type DataError = (usize, String);

fn parse_data(
    problem: ProblemId,
    n: usize,
    k: usize,
    base: i64,
    lines: &[(usize, &str)],
) -> Result<FixtureData, DataError> {
    let num = |line: usize, s: &str| s.parse::<i64>().map_err(|_| (line, format!("bad number {s:?}")));
    match problem {
        ProblemId::Sphere => lines
            .iter()
            .map(|&(line, text)| {
                let c: Vec<i64> = text
                    .split_whitespace()
                    .map(|f| num(line, f))
                    .collect::<Result<_, _>>()?;
                match c[..] {
                    [x, y, z] => Ok([x - base, y - base, z - base]),
                    _ => Err((line, "expected three coordinates".into())),
                }
            })
            .collect::<Result<_, _>>()
            .map(FixtureData::Points),
        ProblemId::SaturatedSperner => lines
            .iter()
            .map(|&(line, text)| parse_set(line, text, n))
            .collect::<Result<_, _>>()
            .map(FixtureData::Sets),
        ProblemId::CrossSperner => {
            let mut families = Vec::new();
            for &(line, text) in lines {
                let mut fields = text.split_whitespace();
                let label = fields.next().unwrap_or_default();
                if label != format!("F{}", families.len() + 1) {
                    return Err((line, format!("expected family label F{}", families.len() + 1)));
                }
                let sets: Vec<u32> = fields
                    .map(|f| {
                        let m = num(line, f)?;
                        if m < 0 || m >> n != 0 {
                            return Err((line, format!("mask {m} is not a subset of {{1..{n}}}")));
                        }
                        Ok(m as u32)
                    })
                    .collect::<Result<_, _>>()?;
                families.push(sets);
            }
            if families.len() != k {
                return Err((0, format!("expected {k} families, found {}", families.len())));
            }
            Ok(FixtureData::Families(families))
        }
        ProblemId::BoxCover => lines
            .iter()
            .map(|&(line, text)| {
                let factors: Vec<u8> = text
                    .split_whitespace()
                    .map(|f| {
                        f.chars().try_fold(0u8, |m, c| match c.to_digit(10) {
                            Some(v) if v < 3 && m >> v & 1 == 0 => Ok(m | 1 << v),
                            _ => Err((line, format!("bad box factor {f:?}"))),
                        })
                    })
                    .collect::<Result<_, _>>()?;
                if factors.len() != n {
                    return Err((line, format!("expected {n} factors, found {}", factors.len())));
                }
                Ok(factors)
            })
            .collect::<Result<_, _>>()
            .map(FixtureData::Boxes),
        ProblemId::Hypercube => lines
            .iter()
            .map(|&(line, text)| {
                let ends: Vec<usize> = text
                    .split_whitespace()
                    .map(|f| {
                        if f.len() != n {
                            return Err((line, format!("vertex {f:?} is not {n} bits")));
                        }
                        usize::from_str_radix(f, 2).map_err(|_| (line, format!("bad vertex {f:?}")))
                    })
                    .collect::<Result<_, _>>()?;
                match ends[..] {
                    [a, b] if (a ^ b).count_ones() == 1 => Ok((a.min(b), a.max(b))),
                    [_, _] => Err((line, "endpoints are not adjacent in the cube".into())),
                    _ => Err((line, "expected two vertices".into())),
                }
            })
            .collect::<Result<_, _>>()
            .map(FixtureData::Edges),
        ProblemId::Permanent312 => {
            if lines.len() != n {
                return Err((0, format!("expected {n} rows, found {}", lines.len())));
            }
            let mut entries = Vec::with_capacity(n * n);
            for &(line, text) in lines {
                if text.len() != n || !text.bytes().all(|b| b == b'0' || b == b'1') {
                    return Err((line, format!("expected {n} binary digits")));
                }
                entries.extend(text.bytes().map(|b| b - b'0'));
            }
            Ok(FixtureData::Matrix(entries))
        }
        other => Err((0, format!("no fixture format for {other}"))),
    }
}

fn parse_set(line: usize, text: &str, n: usize) -> Result<u32, DataError> {
    if text == "-" {
        return Ok(0);
    }
    text.split_whitespace().try_fold(0u32, |m, f| match f.parse::<usize>() {
        Ok(e) if (1..=n).contains(&e) && m >> (e - 1) & 1 == 0 => Ok(m | 1 << (e - 1)),
        _ => Err((line, format!("bad element {f:?}"))),
    })
}

fn show_set(s: u32) -> String {
    let elems: Vec<String> = (0..32)
        .filter(|i| s >> i & 1 == 1)
        .map(|i| (i + 1).to_string())
        .collect();
    format!("{{{}}}", elems.join(","))
}

fn show_vertex(v: usize, d: usize) -> String {
    format!("{v:0d$b}")
}

/// Checks every claim of `f` with the routines in this module.
pub fn verify_fixture(f: &Fixture) -> Vec<Assertion> {
    f.claims
        .iter()
        .map(|claim| {
            let (label, witness) = check(f, claim);
            Assertion {
                fixture: f.name.clone(),
                claim: label,
                passed: witness.is_none(),
                witness,
            }
        })
        .collect()
}

pub fn verify_all(fixtures: &[Fixture]) -> Vec<Assertion> {
    fixtures.iter().flat_map(verify_fixture).collect()
}

fn count_claim(label: &str, claimed: u128, found: u128) -> (String, Option<String>) {
    (
        format!("{label}={claimed}"),
        (claimed != found).then(|| format!("found {found}")),
    )
}

fn check(f: &Fixture, claim: &Claim) -> (String, Option<String>) {
    let n = f.size;
    match (&f.data, claim) {
        (FixtureData::Points(p), Claim::Points(v)) => count_claim("points", *v as u128, p.len() as u128),
        (FixtureData::Points(p), Claim::InGrid) => (
            "in-grid".into(),
            p.iter()
                .find(|q| q.iter().any(|&c| c < 0 || c >= n as i64))
                .map(|q| format!("point {q:?} (0-based) outside [{n}]^3")),
        ),
        (FixtureData::Points(p), Claim::NoFiveCospherical) => ("no-five-cospherical".into(), cospherical_witness(p)),
        (FixtureData::Points(p), Claim::CosphericalTuples(v)) => {
            count_claim("cospherical-tuples", *v as u128, cospherical_count(p) as u128)
        }
        (FixtureData::Sets(s), Claim::Sets(v)) => {
            let mut distinct = s.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let witness = if distinct.len() != s.len() {
                Some("family repeats a set".to_string())
            } else {
                (s.len() != *v).then(|| format!("found {}", s.len()))
            };
            (format!("sets={v}"), witness)
        }
        (FixtureData::Sets(s), Claim::KSperner) => {
            let chain = longest_chain(s);
            let witness = (chain.len() > f.k).then(|| {
                let shown: Vec<String> = chain.iter().map(|&c| show_set(c)).collect();
                format!("chain of {}: {}", chain.len(), shown.join(" < "))
            });
            (format!("{}-sperner", f.k), witness)
        }
        (FixtureData::Sets(s), Claim::Saturated) => ("saturated".into(), addable_witness(n, f.k, s)),
        (FixtureData::Families(fam), Claim::Product(v)) => {
            let found = fam.iter().map(|x| x.len() as u128).product::<u128>();
            let sizes: Vec<String> = fam.iter().map(|x| x.len().to_string()).collect();
            let (label, witness) = count_claim("product", *v, found);
            (label, witness.map(|w| format!("{w}, sizes {}", sizes.join("x"))))
        }
        (FixtureData::Families(fam), Claim::CrossSperner) => ("cross-sperner".into(), cross_witness(fam)),
        (FixtureData::Boxes(b), Claim::Boxes(v)) => count_claim("boxes", *v as u128, b.len() as u128),
        (FixtureData::Boxes(b), Claim::Proper) => (
            "proper".into(),
            b.iter()
                .position(|x| x.contains(&0b111))
                .map(|i| format!("box {} has a full factor", i + 1)),
        ),
        (FixtureData::Boxes(b), Claim::DoubleCover) => ("double-cover".into(), cover_witness(n, b)),
        (FixtureData::Edges(e), Claim::Edges(v)) => {
            let mut distinct = e.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let witness = if distinct.len() != e.len() {
                Some("edge list repeats an edge".to_string())
            } else {
                (e.len() != *v).then(|| format!("found {}", e.len()))
            };
            (format!("edges={v}"), witness)
        }
        (FixtureData::Edges(e), Claim::Spanning) => {
            let dist = bfs(n, e, 0);
            (
                "spanning".into(),
                dist.iter()
                    .position(Option::is_none)
                    .map(|v| format!("vertex {} unreachable from {}", show_vertex(v, n), show_vertex(0, n))),
            )
        }
        (FixtureData::Edges(e), Claim::Diameter(v)) => (format!("diameter={v}"), diameter_witness(n, e, *v)),
        (FixtureData::Matrix(m), Claim::Free312) => ("312-free".into(), pattern_witness(n, m)),
        (FixtureData::Matrix(m), Claim::Permanent(v)) => match permanent(n, m) {
            Ok(p) => count_claim("permanent", *v, p),
            Err(e) => (format!("permanent={v}"), Some(e.to_string())),
        },
        (_, claim) => (format!("{claim:?}"), Some("claim does not match the data".into())),
    }
}

fn cospherical_witness(p: &[Point3]) -> Option<String> {
    for i in 0..p.len() {
        if let Some(j) = (0..i).find(|&j| p[j] == p[i]) {
            return Some(format!("points {} and {} coincide", j + 1, i + 1));
        }
    }
    let k = p.len();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    for e in d + 1..k {
                        if five_point_det(&[p[a], p[b], p[c], p[d], p[e]]) == 0 {
                            return Some(format!(
                                "points {:?} {:?} {:?} {:?} {:?} (0-based) lie on one sphere or plane",
                                p[a], p[b], p[c], p[d], p[e]
                            ));
                        }
                    }
                }
            }
        }
    }
    None
}

/// A non-member whose addition keeps every chain at most `k` long.
fn addable_witness(n: usize, k: usize, sets: &[u32]) -> Option<String> {
    let mut order = sets.to_vec();
    order.sort_by_key(|s| (s.count_ones(), *s));
    let m = order.len();
    let sub = |a: u32, b: u32| a != b && a & b == a;
    // ending[i]: longest chain with top order[i]; starting[i]: with bottom order[i].
    let mut ending = vec![1usize; m];
    for i in 0..m {
        for j in 0..i {
            if sub(order[j], order[i]) {
                ending[i] = ending[i].max(ending[j] + 1);
            }
        }
    }
    let mut starting = vec![1usize; m];
    for i in (0..m).rev() {
        for j in i + 1..m {
            if sub(order[i], order[j]) {
                starting[i] = starting[i].max(starting[j] + 1);
            }
        }
    }
    (0..1u32 << n).filter(|s| !order.contains(s)).find_map(|s| {
        let below = (0..m)
            .filter(|&i| sub(order[i], s))
            .map(|i| ending[i])
            .max()
            .unwrap_or(0);
        let above = (0..m)
            .filter(|&i| sub(s, order[i]))
            .map(|i| starting[i])
            .max()
            .unwrap_or(0);
        (below + 1 + above <= k).then(|| format!("{} can be added", show_set(s)))
    })
}

fn cross_witness(families: &[Vec<u32>]) -> Option<String> {
    for (i, fi) in families.iter().enumerate() {
        for &a in fi {
            for (j, fj) in families.iter().enumerate() {
                if i != j {
                    if let Some(&b) = fj.iter().find(|&&b| a & b == a) {
                        return Some(format!(
                            "F{} {} is contained in F{} {}",
                            i + 1,
                            show_set(a),
                            j + 1,
                            show_set(b)
                        ));
                    }
                }
            }
        }
    }
    None
}

fn cover_witness(d: usize, boxes: &[Vec<u8>]) -> Option<String> {
    let points = 3usize.pow(d as u32);
    (0..points).find_map(|p| {
        let coords: Vec<u8> = (0..d).map(|i| (p / 3usize.pow(i as u32) % 3) as u8).collect();
        let hits = boxes
            .iter()
            .filter(|b| b.iter().zip(&coords).all(|(&f, &c)| f >> c & 1 == 1))
            .count();
        (hits != 2).then(|| format!("point {coords:?} covered {hits} times"))
    })
}

fn bfs(d: usize, edges: &[(usize, usize)], source: usize) -> Vec<Option<usize>> {
    let v = 1usize << d;
    let mut adj = vec![Vec::new(); v];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![None; v];
    dist[source] = Some(0);
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x].expect("queued vertices have distances");
        for &y in &adj[x] {
            if dist[y].is_none() {
                dist[y] = Some(dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

fn diameter_witness(d: usize, edges: &[(usize, usize)], claimed: usize) -> Option<String> {
    let mut worst = (0, 0, 0);
    for a in 0..1usize << d {
        for (b, dist) in bfs(d, edges, a).into_iter().enumerate() {
            match dist {
                None => {
                    return Some(format!(
                        "no path between {} and {}",
                        show_vertex(a, d),
                        show_vertex(b, d)
                    ))
                }
                Some(x) if x > worst.0 => worst = (x, a, b),
                _ => {}
            }
        }
    }
    (worst.0 != claimed).then(|| {
        format!(
            "diameter is {}: distance between {} and {}",
            worst.0,
            show_vertex(worst.1, d),
            show_vertex(worst.2, d)
        )
    })
}

fn pattern_witness(n: usize, m: &[u8]) -> Option<String> {
    let at = |r: usize, c: usize| m[r * n + c] == 1;
    for r1 in 0..n {
        for r2 in r1 + 1..n {
            for r3 in r2 + 1..n {
                for c1 in 0..n {
                    if !at(r2, c1) {
                        continue;
                    }
                    for c2 in c1 + 1..n {
                        if !at(r3, c2) {
                            continue;
                        }
                        if let Some(c3) = (c2 + 1..n).find(|&c3| at(r1, c3)) {
                            return Some(format!(
                                "ones at (row,col) ({},{}) ({},{}) ({},{})",
                                r1 + 1,
                                c3 + 1,
                                r2 + 1,
                                c1 + 1,
                                r3 + 1,
                                c2 + 1
                            ));
                        }
                    }
                }
            }
        }
    }
    None
}

/// The shipped fixtures, compiled into the library.
pub fn embedded_fixtures() -> Result<Vec<Fixture>, FixtureError> {
    EMBEDDED.iter().map(|(name, text)| Fixture::parse(name, text)).collect()
}

/// Loads every shipped fixture from `dir` (`<name>.txt`); fails naming any
/// that are missing.
pub fn load_dir(dir: &Path) -> Result<Vec<Fixture>, FixtureError> {
    let missing: Vec<String> = FIXTURE_NAMES
        .iter()
        .filter(|name| !dir.join(format!("{name}.txt")).is_file())
        .map(|name| format!("{name}.txt"))
        .collect();
    if !missing.is_empty() {
        return Err(FixtureError::Missing {
            dir: dir.to_path_buf(),
            names: missing,
        });
    }
    FIXTURE_NAMES
        .iter()
        .map(|name| {
            let path = dir.join(format!("{name}.txt"));
            let text = fs::read_to_string(&path).map_err(|source| FixtureError::Io { path, source })?;
            Fixture::parse(name, &text)
        })
        .collect()
}
