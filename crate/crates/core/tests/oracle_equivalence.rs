//! Fast routines in `problems` against the enumeration oracles.

use patternboost_core::oracles::{
    contains_312, cospherical_count, count_312, count_chains, count_four_cycles, count_isosceles, count_triangles,
    longest_chain, naive_permanent,
};
use patternboost_core::problems::matrix::permanent;
use patternboost_core::problems::sphere;
use patternboost_core::problems::{isosceles, BinaryMatrix, GraphBits, SetFamily};
use patternboost_core::rng::stream;
use rand::Rng;

#[test]
fn ryser_matches_naive_permanent() {
    let mut rng = stream(1, &[]);
    for trial in 0..1000 {
        let n = 1 + trial % 6;
        let density = rng.gen_range(0.2..0.9);
        let entries: Vec<u8> = (0..n * n).map(|_| rng.gen_bool(density) as u8).collect();
        assert_eq!(
            permanent(n, &entries).unwrap(),
            naive_permanent(n, &entries),
            "{entries:?}"
        );
    }
}

#[test]
fn pattern_check_matches_brute_force_on_all_3x3() {
    for bits in 0u32..512 {
        let entries: Vec<u8> = (0..9).map(|i| (bits >> i & 1) as u8).collect();
        let m = BinaryMatrix::from_entries(3, entries.clone()).unwrap();
        assert_eq!(m.contains_312(), contains_312(3, &entries), "{entries:?}");
        assert_eq!(m.count_312(), count_312(&m));
    }
}

#[test]
fn pattern_counts_match_on_random_matrices() {
    let mut rng = stream(2, &[]);
    for _ in 0..300 {
        let n = rng.gen_range(1..=7);
        let entries: Vec<u8> = (0..n * n).map(|_| rng.gen_bool(0.4) as u8).collect();
        let m = BinaryMatrix::from_entries(n, entries.clone()).unwrap();
        assert_eq!(m.contains_312(), contains_312(n, &entries));
        assert_eq!(m.count_312(), count_312(&m));
    }
}

#[test]
fn graph_counts_match_enumeration() {
    let mut rng = stream(3, &[]);
    for _ in 0..500 {
        let n = rng.gen_range(2..=8);
        let p = rng.gen_range(0.1..0.9);
        let mut g = GraphBits::empty(n);
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    g.set(a, b, true);
                }
            }
        }
        assert_eq!(g.triangles(), count_triangles(&g));
        assert_eq!(g.four_cycles(), count_four_cycles(&g));
    }
}

#[test]
fn isosceles_counts_match_enumeration() {
    let mut rng = stream(4, &[]);
    for _ in 0..200 {
        let n = rng.gen_range(2..=7i64);
        let mut pts: Vec<(i64, i64)> = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|_| rng.gen_bool(0.3))
            .collect();
        pts.dedup();
        assert_eq!(isosceles::isosceles_count(&pts), count_isosceles(&pts));
    }
}

#[test]
fn cospherical_counts_match_enumeration() {
    let mut rng = stream(5, &[]);
    for _ in 0..100 {
        let n = rng.gen_range(2..=5i64);
        let pts: Vec<[i64; 3]> = (0..n * n * n)
            .map(|i| [i / (n * n), i / n % n, i % n])
            .filter(|_| rng.gen_bool(0.25))
            .collect();
        let count = cospherical_count(&pts);
        assert_eq!(sphere::cospherical_count(&pts), count);
        assert_eq!(sphere::no_five_cospherical(&pts), count == 0);
    }
}

#[test]
fn chain_queries_match_enumeration() {
    let mut rng = stream(6, &[]);
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let sets: Vec<u32> = (0..1u32 << n).filter(|_| rng.gen_bool(0.4)).collect();
        let f = SetFamily::new(n, &sets).unwrap();
        let longest = longest_chain(&sets).len();
        assert_eq!(f.longest_chain(None), longest);
        assert!(count_chains(&f, longest) > 0 || longest == 0);
        assert_eq!(count_chains(&f, longest + 1), 0);
    }
}
