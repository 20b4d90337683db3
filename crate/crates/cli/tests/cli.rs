use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn patternboost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patternboost"))
        .args(args)
        .env_remove("PATTERNBOOST_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn copy_fixtures(to: &Path) {
    for entry in fs::read_dir(fixtures_dir()).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
    }
}

fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.cfg");
    fs::write(
        &path,
        "[problem]\nproblem = triangle\nn = 7\n\n[pool]\nseed_runs = 100\n\n[tokenizer]\nvocab_size = 16\n\n\
         [loop]\nsamples = 30\ntrain_steps = 10\nbatch_size = 4\ngenerations = 1\n",
    )
    .unwrap();
    path
}

#[test]
fn verify_passes_on_the_shipped_fixtures() {
    let builtin = patternboost(&["verify"]);
    assert!(builtin.status.success(), "{}", stdout(&builtin));
    assert!(!stdout(&builtin).contains("FAIL"));

    let dir = tempfile::tempdir().unwrap();
    copy_fixtures(dir.path());
    let from_dir = patternboost(&["verify", "--fixtures", dir.path().to_str().unwrap()]);
    assert!(from_dir.status.success());
    assert_eq!(stdout(&from_dir), stdout(&builtin));
}

#[test]
fn verify_reports_a_mutated_cube_graph() {
    let dir = tempfile::tempdir().unwrap();
    copy_fixtures(dir.path());
    let path = dir.path().join("hypercube_d6.txt");
    let text = fs::read_to_string(&path).unwrap();
    // Drop the last edge.
    let mut lines: Vec<&str> = text.lines().collect();
    lines.pop();
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = patternboost(&["verify", "--fixtures", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout(&out);
    assert!(report.contains("FAIL hypercube_d6"), "{report}");
    assert!(report
        .lines()
        .filter(|l| l.starts_with("FAIL"))
        .all(|l| l.contains("hypercube_d6")));
}

#[test]
fn verify_names_missing_fixture_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = patternboost(&["verify", "--fixtures", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("hypercube_d6.txt") && err.contains("sphere_n10.txt"),
        "{err}"
    );
}

#[test]
fn oracle_prints_exact_optima() {
    let out = patternboost(&["oracle", "triangle", "4"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "triangle 4 4\n");
    let out = patternboost(&["oracle", "triangle", "40"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn run_sample_histogram_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let run_dir = dir.path().join("run");
    let out = patternboost(&[
        "run",
        cfg.to_str().unwrap(),
        "--set",
        &format!("output={}", run_dir.display()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).is_empty(), "logs belong on stderr");
    assert!(run_dir.join("gen_1/model.ckpt").is_file());

    let sampled = patternboost(&[
        "sample",
        run_dir.join("gen_1/model.ckpt").to_str().unwrap(),
        "5",
        "--seed",
        "3",
    ]);
    assert!(sampled.status.success(), "{}", stderr(&sampled));
    let lines: Vec<String> = stdout(&sampled).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 5);
    assert!(lines
        .iter()
        .all(|l| l == "invalid" || (l.len() == 21 && l.chars().all(|c| c == '0' || c == '1'))));

    let hist = patternboost(&["histogram", run_dir.join("stats.csv").to_str().unwrap()]);
    assert!(hist.status.success());
    let text = stdout(&hist);
    assert!(text.starts_with("generation,score,count\n"));
    assert!(text.lines().skip(1).any(|l| l.starts_with("0,")));

    let resumed = patternboost(&["resume", run_dir.to_str().unwrap(), "--set", "generations=2"]);
    assert!(resumed.status.success(), "{}", stderr(&resumed));
    assert!(run_dir.join("gen_2/pool.txt").is_file());
}

#[test]
fn seed_writes_generation_zero_and_honours_the_seed_variable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let run_dir = dir.path().join("seeded");
    let out = Command::new(env!("CARGO_BIN_EXE_patternboost"))
        .args([
            "seed",
            cfg.to_str().unwrap(),
            "--set",
            &format!("output={}", run_dir.display()),
        ])
        .env("PATTERNBOOST_SEED", "7")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(run_dir.join("gen_0/pool.txt").is_file());
    assert!(!run_dir.join("gen_1").exists());
    let echoed = fs::read_to_string(run_dir.join("config")).unwrap();
    assert!(echoed.contains("seed = 7"), "{echoed}");
}

#[test]
fn bad_configs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "problem = triangle\nn = 7\nheads = 3\n").unwrap();
    let out = patternboost(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("divisible"), "{}", stderr(&out));

    let out = patternboost(&["run", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.cfg"));
}
