//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance` runs all eight; `-- 2 4` runs a subset.
//! The process fails only on failures missing from `KNOWN_FAILURES`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use patternboost_core::oracles::{
    contains_312, cospherical_count, count_four_cycles, count_triangles, embedded_fixtures, grid_cospherical_count,
    naive_permanent, verify_fixture, Claim, Fixture, FixtureData,
};
use patternboost_core::problems::matrix::permanent;
use patternboost_core::problems::{BinaryMatrix, GraphBits};
use patternboost_core::rng::stream;
use patternboost_core::tokenizer::Vocab;
use patternboost_core::{Pool, Score};
use patternboost_search::{resume, run, stats_csv, RunConfig, RunState};
use patternboost_transformer::{train_step, AdamW, Model, ModelConfig};
use rand::Rng;

/// Criteria expected to fail, with the reason printed next to the FAIL line.
const KNOWN_FAILURES: &[(u32, &str)] = &[(
    1,
    "the shipped n=10 point list has 216 five-point subsets on a common sphere or plane",
)];

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |c: u32| selected.is_empty() || selected.contains(&c);
    let scratch = tempfile::tempdir().expect("scratch directory");
    let mut triangle: Option<TriangleRuns> = None;
    let mut unexpected = 0;
    for criterion in 1..=8u32 {
        if !wanted(criterion) {
            continue;
        }
        let started = Instant::now();
        let outcome = match criterion {
            1 => fixtures(),
            2 => bpe_golden(),
            3 => oracle_equivalence(),
            4 => transformer_numerics(),
            5 => triangle
                .get_or_insert_with(|| TriangleRuns::new(scratch.path()))
                .reproduction(),
            6 => triangle
                .get_or_insert_with(|| TriangleRuns::new(scratch.path()))
                .ablation(scratch.path()),
            7 => property_runs(scratch.path()),
            _ => structure_count(),
        };
        let known = KNOWN_FAILURES.iter().find(|(c, _)| *c == criterion);
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        let note = match known {
            Some((_, why)) if !outcome.passed => format!(" [known: {why}]"),
            _ => String::new(),
        };
        println!(
            "{status} criterion {criterion}: {} ({:.1} s){note}",
            outcome.detail,
            started.elapsed().as_secs_f64()
        );
        if !outcome.passed && known.is_none() {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn fixture_passes(f: &Fixture) -> bool {
    verify_fixture(f).iter().all(|a| a.passed)
}

/// Shipped constructions, exact integer checks.
fn fixtures() -> Outcome {
    let all = embedded_fixtures().expect("embedded fixtures parse");
    let by_name: BTreeMap<&str, &Fixture> = all.iter().map(|f| (f.name.as_str(), f)).collect();
    let mut parts = Vec::new();

    parts.push((
        "cube graph: 81 edges, spanning, diameter 6",
        fixture_passes(by_name["hypercube_d6"]),
    ));
    parts.push((
        "8-Sperner saturated family of 108 sets on 12",
        fixture_passes(by_name["sperner_saturated_k8_n12"]),
    ));

    let products: Vec<u128> = [
        "cross_sperner_n7_k3",
        "cross_sperner_n8_k3",
        "cross_sperner_n6_k4",
        "cross_sperner_n7_k4",
    ]
    .iter()
    .map(|n| by_name[n])
    .filter(|f| fixture_passes(f))
    .flat_map(|f| f.claims.iter())
    .filter_map(|c| match c {
        Claim::Product(p) => Some(*p),
        _ => None,
    })
    .collect();
    parts.push((
        "cross-Sperner products 6480/51840/1764/28350",
        products == [6480, 51840, 1764, 28350],
    ));

    parts.push((
        "41 proper boxes double-covering {0,1,2}^5",
        fixture_passes(by_name["boxes_double_cover_d5"]),
    ));

    let small_spheres = (3..=9).all(|n| {
        let f = by_name[format!("sphere_n{n}").as_str()];
        f.claims.contains(&Claim::NoFiveCospherical) && fixture_passes(f)
    });
    parts.push(("sphere lists n=3..9 in grid with no 5 cospherical", small_spheres));

    let FixtureData::Points(points) = &by_name["sphere_n10"].data else {
        unreachable!("sphere fixtures hold points")
    };
    let tuples = cospherical_count(points);
    parts.push(("sphere list n=10 with no 5 cospherical", tuples == 0));

    let rest = all.iter().all(fixture_passes);
    parts.push(("every fixture claim", rest));

    let failed: Vec<&str> = parts.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    let detail = if failed.is_empty() {
        format!("{} fixture checks exact", parts.len())
    } else {
        format!(
            "{} of {} checks failed: {} (n=10 list: {tuples} cospherical 5-subsets)",
            failed.len(),
            parts.len(),
            failed.join("; ")
        )
    };
    Outcome::new(failed.is_empty(), detail)
}

fn bpe_golden() -> Outcome {
    let corpus = ["100001", "110001", "001001"];
    let vocab = Vocab::train(&corpus, &['0', '1'], 4).expect("training succeeds");
    let rendered: Vec<String> = corpus
        .iter()
        .map(|s| vocab.encode(s).unwrap().iter().map(u32::to_string).collect())
        .collect();
    let merges_ok = vocab.merges() == [(0, 0), (1, 2)];
    let mean = rendered.iter().map(String::len).sum::<usize>() as f64 / corpus.len() as f64;
    let round_trip = corpus
        .iter()
        .all(|s| vocab.decode(&vocab.encode(s).unwrap()).unwrap() == *s);
    let passed = merges_ok && rendered == ["321", "1301", "231"] && format!("{mean:.2}") == "3.33" && round_trip;
    Outcome::new(
        passed,
        format!(
            "merges {:?}, encodings {rendered:?}, mean length {mean:.2}",
            vocab.merges()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = stream(1, &[]);
    let mut mismatches = 0;
    for trial in 0..1000 {
        let n = 1 + trial % 6;
        let density = rng.gen_range(0.2..0.9);
        let entries: Vec<u8> = (0..n * n).map(|_| rng.gen_bool(density) as u8).collect();
        if permanent(n, &entries).unwrap() != naive_permanent(n, &entries) {
            mismatches += 1;
        }
    }
    for bits in 0u32..512 {
        let entries: Vec<u8> = (0..9).map(|i| (bits >> i & 1) as u8).collect();
        let m = BinaryMatrix::from_entries(3, entries.clone()).unwrap();
        if m.contains_312() != contains_312(3, &entries) {
            mismatches += 1;
        }
    }
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
        if g.triangles() != count_triangles(&g) || g.four_cycles() != count_four_cycles(&g) {
            mismatches += 1;
        }
    }
    Outcome::new(
        mismatches == 0,
        format!("1000 permanents, 512 3x3 pattern checks, 500 graphs: {mismatches} mismatches"),
    )
}

fn tiny_config(vocab_size: usize, seed: u64) -> ModelConfig {
    ModelConfig {
        n_layers: 1,
        dim: 8,
        n_heads: 2,
        vocab_size,
        max_len: 12,
        seed,
    }
}

fn transformer_numerics() -> Outcome {
    // Gradient check, tolerance 1e-4 relative, central differences with h = 1e-3.
    let mut m = Model::<f64>::new(tiny_config(7, 11)).unwrap();
    let mut rng = stream(2, &[]);
    for p in m.params_mut() {
        *p += rng.gen_range(-0.3..0.3);
    }
    let seq = [0u32, 3, 1, 4, 1, 5, 2, 6];
    let (_, grad) = m.loss_and_grad(&seq).unwrap();
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let i = rng.gen_range(0..m.num_params());
        let orig = m.params()[i];
        m.params_mut()[i] = orig + h;
        let up = m.loss(&seq).unwrap();
        m.params_mut()[i] = orig - h;
        let down = m.loss(&seq).unwrap();
        m.params_mut()[i] = orig;
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6));
    }
    let gradients_ok = worst <= 1e-4;

    // Softmax rows within 1e-6 of 1 in single precision.
    let m32 = Model::<f32>::new(tiny_config(10, 12)).unwrap();
    let input = [0u32, 4, 9, 1, 1, 3, 8, 2, 5];
    let rows = m32.probabilities(&input).unwrap();
    let row_error = rows
        .iter()
        .map(|r| (r.iter().map(|&p| p as f64).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let rows_ok = row_error <= 1e-6;

    // Changing token j leaves every earlier row bit-identical.
    let causal_ok = (0..input.len()).all(|j| {
        let mut changed = input;
        changed[j] = (input[j] + 3) % 10;
        let out = m32.probabilities(&changed).unwrap();
        (0..j).all(|i| out[i] == rows[i])
    });

    // Replaying the same optimizer steps is bitwise identical.
    let batch: Vec<Vec<u32>> = vec![vec![0, 4, 2, 7, 1], vec![0, 3, 3, 1], vec![0, 9, 8, 7, 6, 5, 1]];
    let replay = || {
        let mut m = Model::<f32>::new(tiny_config(10, 13)).unwrap();
        let mut opt = AdamW::new(m.num_params());
        let losses: Vec<u32> = (0..5)
            .map(|_| train_step(&mut m, &mut opt, &batch).unwrap().to_bits())
            .collect();
        let params: Vec<u32> = m.params().iter().map(|x| x.to_bits()).collect();
        (losses, params)
    };
    let replay_ok = replay() == replay();

    Outcome::new(
        gradients_ok && rows_ok && causal_ok && replay_ok,
        format!(
            "worst gradient error {worst:.2e} (<= 1e-4), worst row-sum error {row_error:.2e} (<= 1e-6), \
             causal {causal_ok}, replay identical {replay_ok}"
        ),
    )
}

fn parse_config(overrides: &[String]) -> RunConfig {
    RunConfig::parse("", overrides).expect("acceptance configs are valid")
}

const TRIANGLE_SEEDS: [u64; 3] = [1, 2, 3];

fn triangle_overrides(seed: u64, out: &Path) -> Vec<String> {
    [
        "problem=triangle",
        "n=20",
        "seed_runs=40000",
        "selection_fraction=0.25",
        "samples=20000",
        "generations=6",
        "train_steps=2000",
        "tokenizer=bpe",
        "vocab_size=100",
        "layers=2",
        "dim=16",
        "heads=4",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([format!("seed={seed}"), format!("output={}", out.display())])
    .collect()
}

/// The seeded triangle runs shared by the reproduction and ablation checks.
struct TriangleRuns {
    runs: Vec<RunState>,
}

impl TriangleRuns {
    fn new(root: &Path) -> Self {
        let runs = TRIANGLE_SEEDS
            .iter()
            .map(|&seed| {
                let out = root.join(format!("triangle_seed{seed}"));
                run(parse_config(&triangle_overrides(seed, &out)), true).expect("triangle run")
            })
            .collect();
        Self { runs }
    }

    /// Seed histogram peak 66 +- 2 and seed best >= 96 in at least 2 of 3
    /// runs; pool best 100 within 6 generations in at least 2 of 3 runs.
    fn reproduction(&self) -> Outcome {
        let mut seed_ok = 0;
        let mut reached = 0;
        let mut lines = Vec::new();
        for (seed, state) in TRIANGLE_SEEDS.iter().zip(&self.runs) {
            let s0 = &state.stats[0];
            let (mode, max) = (
                s0.mode().unwrap_or(Score::MIN),
                s0.histogram_max().unwrap_or(Score::MIN),
            );
            if (64..=68).contains(&mode) && max >= 96 {
                seed_ok += 1;
            }
            let first = state
                .stats
                .iter()
                .find(|s| s.pool_best == Some(100))
                .map(|s| s.generation);
            if first.is_some() {
                reached += 1;
            }
            let best = state.last_stats().pool_best.unwrap_or(Score::MIN);
            lines.push(format!(
                "seed {seed}: peak {mode}, seed best {max}, best {best}{}",
                first.map_or(String::new(), |g| format!(" at gen {g}"))
            ));
        }
        Outcome::new(
            seed_ok >= 2 && reached >= 2,
            format!(
                "{}; seed phase ok {seed_ok}/3, best 100 in {reached}/3",
                lines.join("; ")
            ),
        )
    }

    /// Same budget as the seed-1 run: a global-only run keeping the top 1%
    /// without local search, and a local-only run of plain searches.
    fn ablation(&self, root: &Path) -> Outcome {
        let patternboost = self.runs[0].last_stats().pool_best.unwrap_or(Score::MIN);
        let mut global = triangle_overrides(TRIANGLE_SEEDS[0], &root.join("triangle_global"));
        global.extend(["mode=global-only".to_string(), "selection_fraction=0.01".to_string()]);
        let global = run(parse_config(&global), true).expect("global-only run");
        // No valid graph at all counts as below every valid score.
        let global_valid = global.last_stats().best_valid;
        let global_best = global_valid.unwrap_or(Score::MIN);
        let global_shown = global_valid.map_or("none".to_string(), |b| b.to_string());
        let global_lenient = global.last_stats().pool_best.map_or("-".to_string(), |b| b.to_string());

        let mut local = triangle_overrides(TRIANGLE_SEEDS[0], &root.join("triangle_local"));
        local.push("mode=local-only".to_string());
        let local = run(parse_config(&local), true).expect("local-only run");
        let mut scores: BTreeMap<Score, u64> = BTreeMap::new();
        for s in &local.stats {
            for (&score, &count) in &s.histogram {
                *scores.entry(score).or_default() += count;
            }
        }
        let local_mode = scores
            .iter()
            .max_by_key(|&(score, count)| (*count, *score))
            .map_or(Score::MIN, |(s, _)| *s);
        Outcome::new(
            patternboost > global_best && patternboost > local_mode,
            format!(
                "patternboost best {patternboost}, global-only best valid {global_shown} (pool best {global_lenient} \
                 under penalized scoring), local-only modal {local_mode} \
                 over {} searches",
                local.last_stats().local_searches
            ),
        )
    }
}

/// Problem, size, extra keys for the property runs. The delimited c4
/// encoding needs longer training before samples decode.
const PROPERTY_RUNS: &[(&str, usize, &[&str])] = &[
    ("c4", 12, &["train_steps=2000"]),
    ("permanent312", 16, &[]),
    ("isosceles", 32, &[]),
    ("sperner", 8, &["k=3"]),
];
const PROPERTY_GENERATIONS: usize = 3;

fn property_overrides(problem: &str, n: usize, extra: &[&str], out: &Path) -> Vec<String> {
    let mut o: Vec<String> = vec![
        format!("problem={problem}"),
        format!("n={n}"),
        format!("generations={PROPERTY_GENERATIONS}"),
        "samples=1000".into(),
        "seed_runs=2000".into(),
        "train_steps=300".into(),
        format!("output={}", out.display()),
    ];
    o.extend(extra.iter().map(|s| s.to_string()));
    o
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// Checks one run; returns the failures.
fn check_property_run(problem: &str, n: usize, extra: &[&str], root: &Path) -> Vec<String> {
    let mut failures = Vec::new();
    let full = root.join(format!("{problem}_full"));
    let state = match run(parse_config(&property_overrides(problem, n, extra, &full)), true) {
        Ok(s) => s,
        Err(e) => return vec![format!("run failed: {e}")],
    };

    for g in 0..=PROPERTY_GENERATIONS {
        let pool = Pool::load(full.join(format!("gen_{g}/pool.txt"))).expect("saved pool loads");
        let bad = pool
            .iter()
            .filter(|(score, p)| !state.problem.is_valid(p) || state.problem.score(p).ok() != Some(*score))
            .count();
        if bad > 0 {
            failures.push(format!("gen {g}: {bad} invalid or misscored pool entries"));
        }
    }

    let bests: Vec<_> = state.stats.iter().map(|s| (s.pool_best, s.best_valid)).collect();
    if !bests.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1) {
        failures.push(format!("best score decreased: {bests:?}"));
    }

    // Interrupt after generation 1 and resume.
    let split = root.join(format!("{problem}_split"));
    fs::create_dir_all(&split).unwrap();
    for name in ["config", "vocab.txt", "gen_0", "gen_1"] {
        let from = full.join(name);
        if from.is_dir() {
            copy_dir(&from, &split.join(name));
        } else if from.is_file() {
            fs::copy(&from, split.join(name)).unwrap();
        }
    }
    fs::write(split.join("stats.csv"), stats_csv(&state.stats[..2])).unwrap();
    match resume(&split, &[], true) {
        Ok(_) => {
            for file in [
                "stats.csv",
                "gen_2/pool.txt",
                "gen_3/pool.txt",
                "gen_2/model.ckpt",
                "gen_3/model.ckpt",
            ] {
                if fs::read(full.join(file)).ok() != fs::read(split.join(file)).ok() {
                    failures.push(format!("{file} differs after resume"));
                }
            }
        }
        Err(e) => failures.push(format!("resume failed: {e}")),
    }
    failures
}

fn property_runs(root: &Path) -> Outcome {
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for &(problem, n, extra) in PROPERTY_RUNS {
        let started = Instant::now();
        let f = check_property_run(problem, n, extra, root);
        summary.push(format!(
            "{problem} n={n} {} ({:.0} s)",
            if f.is_empty() { "ok" } else { "failed" },
            started.elapsed().as_secs_f64()
        ));
        failures.extend(f.into_iter().map(|m| format!("{problem}: {m}")));
    }
    let mut detail = format!(
        "pool validity, monotone best, resume identity over {PROPERTY_GENERATIONS} generations x 1000 samples: {}",
        summary.join(", ")
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join("; ")));
    }
    Outcome::new(failures.is_empty(), detail)
}

fn structure_count() -> Outcome {
    let (cospherical, total) = grid_cospherical_count(4);
    Outcome::new(
        cospherical > 700_000 && total == 7_624_512,
        format!("{cospherical} of {total} five-point subsets of [4]^3 on a common sphere or plane (> 700000)"),
    )
}
