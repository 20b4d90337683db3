//! Run directory layout:
//!
//! ```text
//! config              the full run configuration
//! vocab.txt           the frozen codec
//! stats.csv           one row per completed generation
//! gen_<k>/pool.txt    the pool after generation k
//! gen_<k>/model.ckpt  model and optimizer after generation k
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use patternboost_core::tokenizer::Codec;
use patternboost_core::Pool;
use patternboost_transformer::{load_checkpoint, save_checkpoint};

use crate::config::{Mode, RunConfig};
use crate::run::RunState;
use crate::stats::{parse_stats, stats_csv};
use crate::SearchError;

pub const GEN_PREFIX: &str = "gen_";
const CONFIG_FILE: &str = "config";
const VOCAB_FILE: &str = "vocab.txt";
const STATS_FILE: &str = "stats.csv";
const POOL_FILE: &str = "pool.txt";
const MODEL_FILE: &str = "model.ckpt";

fn gen_dir(dir: &Path, generation: usize) -> PathBuf {
    dir.join(format!("{GEN_PREFIX}{generation}"))
}

fn write(generation: usize, path: PathBuf, contents: impl AsRef<[u8]>) -> Result<(), SearchError> {
    fs::write(&path, contents).map_err(|source| SearchError::Io {
        generation,
        path,
        source,
    })
}

fn read(generation: usize, path: PathBuf) -> Result<String, SearchError> {
    fs::read_to_string(&path).map_err(|source| SearchError::Io {
        generation,
        path,
        source,
    })
}

fn failed(generation: usize, path: PathBuf, e: impl std::fmt::Display) -> SearchError {
    SearchError::Checkpoint {
        path,
        message: format!("generation {generation}: {e}"),
    }
}

/// Writes the state of the last completed generation. The stats file goes
/// last, so a generation counts as checkpointed once its stats row exists.
pub(crate) fn save(state: &RunState) -> Result<(), SearchError> {
    let dir = &state.config.output;
    let g = state.generation();
    let gdir = gen_dir(dir, g);
    fs::create_dir_all(&gdir).map_err(|source| SearchError::Io {
        generation: g,
        path: gdir.clone(),
        source,
    })?;
    write(g, dir.join(CONFIG_FILE), state.config.echo())?;
    if let Some(codec) = &state.codec {
        let path = dir.join(VOCAB_FILE);
        codec.save(&path).map_err(|e| failed(g, path, e))?;
    }
    let path = gdir.join(POOL_FILE);
    state.pool.save(&path).map_err(|e| failed(g, path, e))?;
    if let (Some(model), Some(opt)) = (&state.model, &state.opt) {
        let path = gdir.join(MODEL_FILE);
        save_checkpoint(&path, model, opt).map_err(|e| failed(g, path, e))?;
    }
    write(g, dir.join(STATS_FILE), stats_csv(&state.stats))
}

/// Highest generation with a pool file in `dir`.
pub fn latest_generation(dir: &Path) -> Option<usize> {
    fs::read_dir(dir)
        .ok()?
        .filter_map(Result::ok)
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            let k: usize = name.strip_prefix(GEN_PREFIX)?.parse().ok()?;
            e.path().join(POOL_FILE).is_file().then_some(k)
        })
        .max()
}

/// Loads the run in `path`, either a run directory (its latest checkpointed
/// generation) or one of its `gen_<k>` directories.
pub(crate) fn load(path: &Path, overrides: &[String]) -> Result<RunState, SearchError> {
    let named = path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_prefix(GEN_PREFIX))
        .and_then(|k| k.parse::<usize>().ok());
    let (dir, requested) = match (named, path.parent()) {
        (Some(k), Some(parent)) if parent.join(CONFIG_FILE).is_file() => (parent.to_path_buf(), Some(k)),
        _ => (path.to_path_buf(), None),
    };
    let stats_text = read(0, dir.join(STATS_FILE))?;
    let mut stats = parse_stats(&stats_text)?;
    let latest = latest_generation(&dir).ok_or_else(|| SearchError::Checkpoint {
        path: dir.clone(),
        message: format!("no {GEN_PREFIX}<k>/{POOL_FILE} found"),
    })?;
    // A generation is complete once its stats row is written.
    let g = requested.unwrap_or(latest.min(stats.len().saturating_sub(1)));
    if stats.len() <= g || stats[g].generation != g {
        return Err(SearchError::Checkpoint {
            path: dir.join(STATS_FILE),
            message: format!("no stats row for generation {g}"),
        });
    }
    stats.truncate(g + 1);

    let mut config = RunConfig::parse(&read(g, dir.join(CONFIG_FILE))?, overrides)?;
    config.output = dir.clone();
    let problem = config.problem_spec().build()?;
    let pool_path = gen_dir(&dir, g).join(POOL_FILE);
    let pool = Pool::load_with_capacity(&pool_path, config.capacity).map_err(|e| failed(g, pool_path.clone(), e))?;
    if pool.problem() != config.problem || pool.payload_len() != problem.payload_len() {
        return Err(failed(g, pool_path, "pool does not match the configured problem"));
    }
    let (codec, model, opt) = if config.mode == Mode::LocalOnly {
        (None, None, None)
    } else {
        let vocab_path = dir.join(VOCAB_FILE);
        let codec = Codec::load(&vocab_path).map_err(|e| failed(g, vocab_path, e))?;
        let model_path = gen_dir(&dir, g).join(MODEL_FILE);
        let ckpt = load_checkpoint::<f32>(&model_path).map_err(|e| failed(g, model_path.clone(), e))?;
        if ckpt.model.config().vocab_size != codec.num_tokens() + 2 {
            return Err(failed(g, model_path, "model vocabulary does not match vocab.txt"));
        }
        let mut opt = ckpt.opt;
        opt.lr = config.lr;
        opt.weight_decay = config.weight_decay;
        (Some(codec), Some(ckpt.model), Some(opt))
    };
    Ok(RunState {
        config,
        problem,
        codec,
        model,
        opt,
        pool,
        stats,
        log: false,
    })
}
