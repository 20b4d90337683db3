//! Exhaustive optima against the problem score functions, enumerated over
//! every payload of tiny instances.

use patternboost_core::oracles::brute_best;
use patternboost_core::{ProblemId, ProblemSpec, Score};

fn best_over_payloads(spec: &ProblemSpec) -> Score {
    let p = spec.build().unwrap();
    let len = p.payload_len();
    let alphabet = p.alphabet() as u64;
    let total = alphabet.pow(len as u32);
    let mut best = Score::MIN;
    let mut payload = vec![0u8; len];
    for mut code in 0..total {
        for slot in payload.iter_mut() {
            *slot = (code % alphabet) as u8;
            code /= alphabet;
        }
        if p.is_valid(&payload) {
            best = best.max(p.score(&payload).unwrap());
        }
    }
    best
}

fn check(spec: ProblemSpec) {
    assert_eq!(brute_best(&spec).unwrap(), best_over_payloads(&spec), "{spec:?}");
}

#[test]
fn c4_free_on_six_vertices() {
    let spec = ProblemSpec::new(ProblemId::C4, 6);
    assert_eq!(brute_best(&spec).unwrap(), 7);
    check(spec);
}

#[test]
fn graphs() {
    check(ProblemSpec::new(ProblemId::Triangle, 6));
    check(ProblemSpec::new(ProblemId::C4, 5));
}

#[test]
fn matrices_and_cubes() {
    check(ProblemSpec::new(ProblemId::Permanent312, 3));
    check(ProblemSpec::new(ProblemId::Hypercube, 2));
    check(ProblemSpec::new(ProblemId::Hypercube, 3));
}

#[test]
fn point_sets() {
    check(ProblemSpec::new(ProblemId::Isosceles, 3));
    check(ProblemSpec::new(ProblemId::Isosceles, 4));
    check(ProblemSpec::new(ProblemId::Sphere, 2));
}

#[test]
fn set_systems() {
    for k in 1..=3 {
        check(ProblemSpec::new(ProblemId::SaturatedSperner, 3).with_k(k));
    }
    check(ProblemSpec::new(ProblemId::CrossSperner, 2).with_k(2));
    check(ProblemSpec::new(ProblemId::CrossSperner, 3).with_k(2));
    check(ProblemSpec::new(ProblemId::CrossSperner, 2).with_k(3));
}

#[test]
fn box_covers() {
    check(ProblemSpec::new(ProblemId::BoxCover, 1));
    assert_eq!(brute_best(&ProblemSpec::new(ProblemId::BoxCover, 2)).unwrap(), -6);
}

#[test]
fn larger_oracle_values() {
    assert_eq!(brute_best(&ProblemSpec::new(ProblemId::Triangle, 7)).unwrap(), 12);
    assert_eq!(brute_best(&ProblemSpec::new(ProblemId::Sphere, 3)).unwrap(), 8);
    assert!(brute_best(&ProblemSpec::new(ProblemId::Permanent312, 4)).unwrap() > 0);
}
