//! `patternboost`: run, resume and inspect searches; verify the shipped
//! constructions; query the exhaustive oracles.
//!
//! Logs go to stderr. Stdout carries only machine-readable output
//! (`verify`, `sample`, `histogram`, `oracle`).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use patternboost_core::construction::payload_digits;
use patternboost_core::oracles::{brute_best, embedded_fixtures, load_dir, verify_all};
use patternboost_core::rng::stream;
use patternboost_core::tokenizer::Codec;
use patternboost_core::{ProblemId, ProblemSpec};
use patternboost_search::{histogram_csv, parse_stats, resume, run, RunConfig, END_OFFSET, START_OFFSET};
use patternboost_transformer::load_checkpoint;

#[derive(Parser)]
#[command(
    name = "patternboost",
    version,
    about = "Transformer-guided local search for extremal combinatorics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seed phase only and checkpoint it as generation 0.
    Seed {
        config: PathBuf,
        /// `key=value` override; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Seed phase plus all configured generations.
    Run {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Continue a run directory (or one of its gen_<k> directories).
    Resume {
        checkpoint: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check every claim of the shipped constructions.
    Verify {
        /// Read fixtures from this directory instead of the built-in copies.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Draw sequences from a saved model and print the decoded payloads.
    Sample {
        model: PathBuf,
        count: usize,
        /// Codec file; defaults to vocab.txt in the run directory.
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Turn a stats.csv into (generation, score, count) rows.
    Histogram {
        stats: PathBuf,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive optimum of a tiny instance.
    Oracle {
        problem: String,
        size: usize,
        /// Chain bound or number of families, where the problem has one.
        #[arg(long)]
        k: Option<usize>,
    },
}

fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = RunConfig::parse(&text, overrides)?;
    cfg.apply_seed_env()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Seed { config, overrides } => {
            let mut cfg = load_config(&config, &overrides)?;
            cfg.generations = 0;
            let state = run(cfg, true)?;
            eprintln!("seed pool written to {}", state.config.output.display());
        }
        Command::Run { config, overrides } => {
            let state = run(load_config(&config, &overrides)?, true)?;
            eprintln!("run written to {}", state.config.output.display());
        }
        Command::Resume { checkpoint, overrides } => {
            let state = resume(&checkpoint, &overrides, true)?;
            eprintln!("resumed run at generation {}", state.generation());
        }
        Command::Verify { fixtures } => {
            let fixtures = match fixtures {
                Some(dir) => load_dir(&dir)?,
                None => embedded_fixtures()?,
            };
            let report = verify_all(&fixtures);
            for a in &report {
                println!("{a}");
            }
            let failed = report.iter().filter(|a| !a.passed).count();
            eprintln!("{} assertions, {failed} failed", report.len());
            return Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
        Command::Sample {
            model,
            count,
            vocab,
            seed,
        } => sample(&model, count, vocab, seed)?,
        Command::Histogram { stats, out } => {
            let text = fs::read_to_string(&stats).with_context(|| format!("reading {}", stats.display()))?;
            let csv = histogram_csv(&parse_stats(&text)?);
            match out {
                Some(path) => fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
        }
        Command::Oracle { problem, size, k } => {
            let id: ProblemId = problem.parse()?;
            let mut spec = ProblemSpec::new(id, size);
            if let Some(k) = k {
                spec = spec.with_k(k);
            }
            println!("{id} {size} {}", brute_best(&spec)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Prints one line per draw: the payload digits, or `invalid`.
fn sample(model_path: &Path, count: usize, vocab: Option<PathBuf>, seed: u64) -> Result<()> {
    let ckpt = load_checkpoint::<f32>(model_path).with_context(|| format!("loading {}", model_path.display()))?;
    let vocab = match vocab {
        Some(v) => v,
        None => {
            let run_dir = model_path.parent().and_then(Path::parent).unwrap_or(Path::new("."));
            run_dir.join("vocab.txt")
        }
    };
    let codec = Codec::load(&vocab).with_context(|| format!("loading {}", vocab.display()))?;
    let base = codec.num_tokens() as u32;
    if ckpt.model.config().vocab_size != base as usize + 2 {
        bail!("{} does not match the model's vocabulary", vocab.display());
    }
    for i in 0..count {
        let mut rng = stream(seed, &[i as u64]);
        let drawn = ckpt.model.sample(&mut rng, &[base + START_OFFSET], base + END_OFFSET)?;
        let decoded = if drawn.ended && drawn.tokens.iter().all(|&t| t < base) {
            codec.decode(&drawn.tokens).ok()
        } else {
            None
        };
        match decoded {
            Some(p) => println!("{}", payload_digits(&p)),
            None => println!("invalid"),
        }
    }
    Ok(())
}
