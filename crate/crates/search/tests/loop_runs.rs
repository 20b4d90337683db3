//! End-to-end runs of the search loop on small instances.

use std::fs;
use std::path::Path;

use patternboost_core::Pool;
use patternboost_search::{latest_generation, resume, run, RunConfig, RunState, SearchError};

fn config(problem: &str, n: usize, extra: &[&str], out: &Path) -> RunConfig {
    let mut overrides: Vec<String> = vec![
        format!("problem={problem}"),
        format!("n={n}"),
        "seed_runs=200".into(),
        "samples=60".into(),
        "train_steps=30".into(),
        "batch_size=8".into(),
        "vocab_size=20".into(),
        "workers=1".into(),
        format!("output={}", out.display()),
    ];
    overrides.extend(extra.iter().map(|s| s.to_string()));
    RunConfig::parse("", &overrides).unwrap()
}

/// Every pool entry is valid and carries its true score.
fn assert_pool_valid(state: &RunState) {
    for (score, payload) in state.pool.iter() {
        assert!(
            state.problem.is_valid(payload),
            "{}: invalid pool entry",
            state.config.problem
        );
        assert_eq!(state.problem.score(payload).unwrap(), score, "{}", state.config.problem);
    }
}

fn assert_monotone_best(state: &RunState) {
    let bests: Vec<_> = state.stats.iter().map(|s| s.pool_best).collect();
    assert!(
        bests.windows(2).all(|w| w[0] <= w[1]),
        "{}: {bests:?}",
        state.config.problem
    );
}

#[test]
fn single_seed_run_gives_a_pool_of_one() {
    let dir = tempfile::tempdir().unwrap();
    let state = run(
        config("triangle", 8, &["seed_runs=1", "generations=0"], dir.path()),
        false,
    )
    .unwrap();
    assert_eq!(state.pool.len(), 1);
    assert_eq!(state.stats.len(), 1);
    assert_pool_valid(&state);
}

#[test]
fn zero_generations_checkpoint_only_the_seed_pool() {
    let dir = tempfile::tempdir().unwrap();
    let state = run(config("triangle", 8, &["generations=0"], dir.path()), false).unwrap();
    assert_eq!(latest_generation(dir.path()), Some(0));
    assert!(!dir.path().join("gen_1").exists());
    let saved = Pool::load(dir.path().join("gen_0/pool.txt")).unwrap();
    assert_eq!(saved.iter().collect::<Vec<_>>(), state.pool.iter().collect::<Vec<_>>());
    assert_eq!(state.stats[0].samples, 200);
    assert_eq!(state.stats[0].local_searches, 200);
}

#[test]
fn zero_samples_leave_the_pool_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let mut state = RunState::start(config("triangle", 8, &["samples=0"], dir.path())).unwrap();
    let before: Vec<_> = state.pool.iter().map(|(s, p)| (s, p.to_vec())).collect();
    let stats = state.run_generation().unwrap().clone();
    let after: Vec<_> = state.pool.iter().map(|(s, p)| (s, p.to_vec())).collect();
    assert_eq!(before, after);
    assert_eq!((stats.samples, stats.invalid, stats.distinct), (0, 0, 0));
    assert!(stats.histogram.is_empty());
    assert_eq!(stats.local_searches, state.stats[0].local_searches);
}

#[test]
fn resume_matches_an_uninterrupted_run() {
    let full = tempfile::tempdir().unwrap();
    let split = tempfile::tempdir().unwrap();
    run(config("triangle", 8, &["generations=3"], full.path()), false).unwrap();
    run(config("triangle", 8, &["generations=1"], split.path()), false).unwrap();
    let resumed = resume(split.path(), &["generations=3".to_string()], false).unwrap();
    assert_eq!(resumed.generation(), 3);
    for file in ["stats.csv", "vocab.txt", "gen_3/pool.txt", "gen_3/model.ckpt"] {
        let a = fs::read(full.path().join(file)).unwrap();
        let b = fs::read(split.path().join(file)).unwrap();
        assert!(a == b, "{file} differs after resume");
    }
}

#[test]
fn resume_from_an_earlier_generation_directory_replays_it() {
    let dir = tempfile::tempdir().unwrap();
    run(config("triangle", 8, &["generations=2"], dir.path()), false).unwrap();
    let first = fs::read(dir.path().join("gen_2/pool.txt")).unwrap();
    let state = resume(&dir.path().join("gen_1"), &[], false).unwrap();
    assert_eq!(state.generation(), 2);
    assert_eq!(fs::read(dir.path().join("gen_2/pool.txt")).unwrap(), first);
}

#[test]
fn codec_is_frozen_after_the_seed_phase() {
    let dir = tempfile::tempdir().unwrap();
    run(config("triangle", 8, &["generations=0"], dir.path()), false).unwrap();
    let vocab = fs::read(dir.path().join("vocab.txt")).unwrap();
    let state = resume(dir.path(), &["generations=2".to_string()], false).unwrap();
    assert_eq!(fs::read(dir.path().join("vocab.txt")).unwrap(), vocab);
    let codec = state.codec.as_ref().unwrap();
    assert_eq!(
        state.model.as_ref().unwrap().config().vocab_size,
        codec.num_tokens() + 2
    );
}

#[test]
fn diverging_training_aborts_and_keeps_the_last_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let err = run(config("triangle", 8, &["generations=2", "lr=1e30"], dir.path()), false)
        .err()
        .expect("training should diverge");
    assert!(matches!(err, SearchError::Training { generation: 1, .. }), "{err}");
    assert_eq!(latest_generation(dir.path()), Some(0));
    let state = resume(dir.path(), &["lr=0.0005".to_string()], false).unwrap();
    assert_eq!(state.generation(), 2);
}

#[test]
fn every_problem_keeps_a_valid_pool_and_a_monotone_best() {
    let cases: &[(&str, usize, &[&str])] = &[
        ("triangle", 8, &[]),
        ("c4", 8, &[]),
        ("permanent312", 6, &[]),
        ("hypercube", 4, &[]),
        ("isosceles", 6, &[]),
        ("sphere", 3, &[]),
        ("sperner", 5, &["k=2"]),
        ("cross-sperner", 4, &["k=2"]),
        ("boxes", 2, &[]),
    ];
    for &(problem, n, extra) in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut overrides = vec!["generations=2"];
        overrides.extend_from_slice(extra);
        let state = run(config(problem, n, &overrides, dir.path()), false).unwrap_or_else(|e| panic!("{problem}: {e}"));
        assert_eq!(state.generation(), 2, "{problem}");
        assert_pool_valid(&state);
        assert_monotone_best(&state);
        for s in &state.stats[1..] {
            assert_eq!(s.samples, s.invalid + s.valid, "{problem}");
            assert_eq!(s.histogram.values().sum::<u64>() as usize, s.distinct, "{problem}");
        }
    }
}

#[test]
fn ablation_modes_run() {
    let dir = tempfile::tempdir().unwrap();
    let global = run(
        config(
            "triangle",
            8,
            &["generations=2", "mode=global-only"],
            &dir.path().join("g"),
        ),
        false,
    )
    .unwrap();
    assert_monotone_best(&global);
    let local = run(
        config(
            "triangle",
            8,
            &["generations=2", "mode=local-only"],
            &dir.path().join("l"),
        ),
        false,
    )
    .unwrap();
    assert!(local.model.is_none() && local.codec.is_none());
    assert_eq!(local.last_stats().local_searches, 200 + 2 * 60);
    assert_pool_valid(&local);
    assert_monotone_best(&local);
    let resumed = resume(&dir.path().join("l"), &["generations=3".to_string()], false).unwrap();
    assert_eq!(resumed.generation(), 3);
}
