use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use patternboost_core::rng::stream;
use patternboost_core::tokenizer::Codec;
use patternboost_core::{Construction, Pool, Problem, Score, ScoredConstruction};
use patternboost_transformer::{train_step, AdamW, Model};

use crate::checkpoint;
use crate::config::{Mode, RunConfig, TokenizerKind};
use crate::stats::GenerationStats;
use crate::SearchError;

/// The start token is `codec.num_tokens() + START_OFFSET`.
pub const START_OFFSET: u32 = 0;
/// The end token is `codec.num_tokens() + END_OFFSET`.
pub const END_OFFSET: u32 = 1;

// RNG stream tags; every random draw is keyed by (seed, generation, tag, index).
const SEED_PHASE: u64 = 0;
const TRAIN_PHASE: u64 = 1;
const SAMPLE_PHASE: u64 = 2;
const LOCAL_PHASE: u64 = 3;

/// Everything a run carries from one generation to the next.
pub struct RunState {
    pub config: RunConfig,
    pub problem: Box<dyn Problem>,
    /// Frozen after the seed phase; absent in local-only runs.
    pub codec: Option<Codec>,
    pub model: Option<Model<f32>>,
    pub opt: Option<AdamW<f32>>,
    pub pool: Pool,
    pub stats: Vec<GenerationStats>,
    /// Print one progress line per generation to stderr.
    pub log: bool,
}

/// Model and optimizer after a generation's training, with the mean loss.
type Trained = (Model<f32>, AdamW<f32>, f32);

/// One searched (or decoded) construction.
struct Outcome {
    payload: Vec<u8>,
    score: Score,
    valid: bool,
}

fn workers(cfg: &RunConfig) -> Result<rayon::ThreadPool, SearchError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| SearchError::Workers(e.to_string()))
}

fn evaluate(problem: &dyn Problem, payload: Vec<u8>) -> Result<Outcome, SearchError> {
    let score = problem.score(&payload)?;
    let valid = problem.is_valid(&payload);
    Ok(Outcome { payload, score, valid })
}

/// Runs the seed phase: `seed_runs` local searches from the problem's empty
/// start (uniformly random payloads in global-only mode), keeping the top
/// selection fraction.
pub fn seed_database(cfg: &RunConfig) -> Result<(Pool, GenerationStats), SearchError> {
    let problem = cfg.problem_spec().build()?;
    let outcomes = workers(cfg)?.install(|| seed_outcomes(cfg, problem.as_ref()))?;
    let mut pool = Pool::new(cfg.problem, problem.payload_len(), cfg.retained())?;
    let local = if cfg.mode == Mode::GlobalOnly {
        0
    } else {
        cfg.seed_runs as u64
    };
    let mut stats = merge(cfg, &mut pool, 0, cfg.seed_runs, 0, &outcomes, None, local, None)?;
    pool.set_capacity(cfg.capacity)?;
    stats.pool_size = pool.len();
    stats.pool_best = pool.best_score();
    stats.pool_mean = pool.mean_score();
    Ok((pool, stats))
}

fn seed_outcomes(cfg: &RunConfig, problem: &dyn Problem) -> Result<Vec<Outcome>, SearchError> {
    (0..cfg.seed_runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, &[0, SEED_PHASE, i as u64]);
            let payload = if cfg.mode == Mode::GlobalOnly {
                (0..problem.payload_len())
                    .map(|_| rng.gen_range(0..problem.alphabet()))
                    .collect()
            } else {
                problem.local_search(&problem.empty(), &mut rng)
            };
            evaluate(problem, payload)
        })
        .collect()
}

/// Inserts `outcomes` into the pool and summarizes the generation.
#[allow(clippy::too_many_arguments)]
fn merge(
    cfg: &RunConfig,
    pool: &mut Pool,
    generation: usize,
    samples: usize,
    invalid: usize,
    outcomes: &[Outcome],
    problem: Option<&dyn Problem>,
    local_searches: u64,
    previous: Option<&GenerationStats>,
) -> Result<GenerationStats, SearchError> {
    let mut seen = HashSet::new();
    let mut histogram = BTreeMap::new();
    let mut best_valid = previous.and_then(|p| p.best_valid);
    for o in outcomes {
        if o.valid {
            best_valid = best_valid.max(Some(o.score));
        }
        if seen.insert(o.payload.as_slice()) {
            *histogram.entry(o.score).or_insert(0u64) += 1;
        }
        // Outside global-only mode only valid constructions enter the pool.
        if !o.valid && cfg.mode != Mode::GlobalOnly {
            continue;
        }
        let images = match problem {
            Some(p) if cfg.augment && cfg.mode == Mode::PatternBoost => p.symmetries(&o.payload),
            _ => vec![o.payload.clone()],
        };
        for image in images {
            pool.insert(ScoredConstruction::new(Construction::new(cfg.problem, image), o.score))?;
        }
    }
    Ok(GenerationStats {
        generation,
        samples,
        invalid,
        valid: outcomes.len(),
        distinct: seen.len(),
        histogram,
        pool_size: pool.len(),
        pool_best: pool.best_score(),
        pool_mean: pool.mean_score(),
        best_valid,
        local_searches: previous.map_or(0, |p| p.local_searches) + local_searches,
        train_loss: None,
    })
}

fn build_codec(cfg: &RunConfig, problem: &dyn Problem, pool: &Pool) -> Result<Codec, SearchError> {
    let len = problem.payload_len();
    let corpus = || pool.iter().map(|(_, p)| p.to_vec()).collect::<Vec<_>>();
    Ok(match cfg.tokenizer {
        TokenizerKind::Bpe => Codec::train_bpe(&corpus(), len, problem.alphabet(), None, cfg.vocab_size)?,
        TokenizerKind::BpeDelimited => {
            Codec::train_bpe(&corpus(), len, problem.alphabet(), problem.rows(), cfg.vocab_size)?
        }
        TokenizerKind::Fixed => Codec::FixedWidth {
            k: cfg.fixed_width,
            payload_len: len,
        },
        TokenizerKind::Items => Codec::Items {
            payload_len: len,
            alphabet: problem.alphabet(),
        },
    })
}

/// Context length: the configured value, or 1.5 times the longest seed-pool
/// encoding (capped by the codec's maximum) plus the start token.
fn context_length(cfg: &RunConfig, codec: &Codec, pool: &Pool) -> Result<usize, SearchError> {
    if let Some(m) = cfg.max_len {
        return Ok(m);
    }
    let mut longest = 0;
    for (_, p) in pool.iter() {
        longest = longest.max(codec.encode(p)?.len());
    }
    Ok(1 + codec.max_tokens().min((3 * longest).div_ceil(2)).max(1))
}

impl RunState {
    /// Seed phase, codec and fresh model: the state after generation 0.
    pub fn start(config: RunConfig) -> Result<Self, SearchError> {
        config.validate()?;
        let problem = config.problem_spec().build()?;
        let (pool, stats) = seed_database(&config)?;
        let (codec, model, opt) = if config.mode == Mode::LocalOnly {
            (None, None, None)
        } else {
            let codec = build_codec(&config, problem.as_ref(), &pool)?;
            let max_len = context_length(&config, &codec, &pool)?;
            let mc = config.model_config(codec.num_tokens() + 2, max_len)?;
            let model = Model::<f32>::new(mc)?;
            let opt = AdamW::with_hyper(model.num_params(), config.lr, config.weight_decay);
            (Some(codec), Some(model), Some(opt))
        };
        let state = RunState {
            config,
            problem,
            codec,
            model,
            opt,
            pool,
            stats: vec![stats],
            log: false,
        };
        Ok(state)
    }

    /// Index of the last completed generation.
    pub fn generation(&self) -> usize {
        self.stats.len() - 1
    }

    pub fn last_stats(&self) -> &GenerationStats {
        &self.stats[self.stats.len() - 1]
    }

    pub fn report(&self) {
        if self.log {
            let s = self.last_stats();
            eprintln!(
                "gen {} samples {} invalid {} distinct {} pool {} best {} mean {} best_valid {} mode {} loss {}",
                s.generation,
                s.samples,
                s.invalid,
                s.distinct,
                s.pool_size,
                s.pool_best.map_or("-".into(), |b| b.to_string()),
                s.pool_mean.map_or("-".into(), |m| format!("{m:.2}")),
                s.best_valid.map_or("-".into(), |b| b.to_string()),
                s.mode().map_or("-".into(), |m| m.to_string()),
                s.train_loss.map_or("-".into(), |l| format!("{l:.4}")),
            );
        }
    }

    fn start_token(&self) -> u32 {
        self.codec.as_ref().map_or(0, |c| c.num_tokens() as u32) + START_OFFSET
    }

    fn end_token(&self) -> u32 {
        self.codec.as_ref().map_or(0, |c| c.num_tokens() as u32) + END_OFFSET
    }

    /// Training sequences for every pool entry that fits the context.
    fn training_set(&self, codec: &Codec, max_len: usize) -> Result<Vec<Vec<u32>>, SearchError> {
        let mut out = Vec::with_capacity(self.pool.len());
        for (_, payload) in self.pool.iter() {
            let tokens = codec.encode(payload)?;
            if tokens.len() < max_len {
                let mut seq = Vec::with_capacity(tokens.len() + 2);
                seq.push(self.start_token());
                seq.extend(tokens);
                seq.push(self.end_token());
                out.push(seq);
            }
        }
        Ok(out)
    }

    /// Fine-tunes copies of the model and optimizer on the pool; returns them
    /// with the mean loss, or `None` when there is nothing to train.
    fn train(&self, generation: usize) -> Result<Option<Trained>, SearchError> {
        let (Some(codec), Some(model), Some(opt)) = (&self.codec, &self.model, &self.opt) else {
            return Ok(None);
        };
        let data = self.training_set(codec, model.config().max_len)?;
        if data.is_empty() || self.config.train_steps == 0 {
            return Ok(None);
        }
        let (mut model, mut opt) = (model.clone(), opt.clone());
        let mut rng = stream(self.config.seed, &[generation as u64, TRAIN_PHASE]);
        let mut total = 0.0f64;
        for _ in 0..self.config.train_steps {
            let batch: Vec<Vec<u32>> = (0..self.config.batch_size)
                .map(|_| data.choose(&mut rng).expect("nonempty training set").clone())
                .collect();
            let loss = train_step(&mut model, &mut opt, &batch)
                .map_err(|source| SearchError::Training { generation, source })?;
            total += loss as f64;
        }
        Ok(Some((model, opt, (total / self.config.train_steps as f64) as f32)))
    }

    /// Draws and decodes one sample, then searches from it.
    fn sample_one(&self, model: &Model<f32>, generation: usize, i: usize) -> Result<Option<Outcome>, SearchError> {
        let codec = self.codec.as_ref().expect("sampling runs have a codec");
        let problem = self.problem.as_ref();
        let mut rng = stream(self.config.seed, &[generation as u64, SAMPLE_PHASE, i as u64]);
        let drawn = model.sample(&mut rng, &[self.start_token()], self.end_token())?;
        let limit = codec.num_tokens() as u32;
        if !drawn.ended || drawn.tokens.iter().any(|&t| t >= limit) {
            return Ok(None);
        }
        let mut rng = stream(self.config.seed, &[generation as u64, LOCAL_PHASE, i as u64]);
        let search = self.config.mode == Mode::PatternBoost;
        let payload = match codec {
            Codec::Items { .. } if search => match codec.decode_items(&drawn.tokens) {
                Ok(items) => problem.local_search_ordered(&items, &mut rng),
                Err(_) => return Ok(None),
            },
            _ => match codec.decode(&drawn.tokens) {
                Ok(p) if problem.check_payload(&p).is_ok() => {
                    if search {
                        problem.local_search(&p, &mut rng)
                    } else {
                        p
                    }
                }
                _ => return Ok(None),
            },
        };
        evaluate(problem, payload).map(Some)
    }

    /// One generation: train, sample, decode, local search, merge. On error
    /// the state is unchanged.
    pub fn run_generation(&mut self) -> Result<&GenerationStats, SearchError> {
        let generation = self.generation() + 1;
        let (stats, pool, trained) = workers(&self.config)?.install(|| self.next_generation(generation))?;
        self.pool = pool;
        if let Some((model, opt)) = trained {
            self.model = Some(model);
            self.opt = Some(opt);
        }
        self.stats.push(stats);
        self.report();
        Ok(self.last_stats())
    }

    #[allow(clippy::type_complexity)]
    fn next_generation(
        &self,
        generation: usize,
    ) -> Result<(GenerationStats, Pool, Option<(Model<f32>, AdamW<f32>)>), SearchError> {
        let cfg = &self.config;
        let problem = self.problem.as_ref();
        let (trained, loss) = match self.train(generation)? {
            Some((m, o, loss)) => (Some((m, o)), Some(loss)),
            None => (None, None),
        };
        let (outcomes, local): (Vec<Option<Outcome>>, u64) = match cfg.mode {
            Mode::LocalOnly => {
                let out = (0..cfg.samples)
                    .into_par_iter()
                    .map(|i| {
                        let mut rng = stream(cfg.seed, &[generation as u64, LOCAL_PHASE, i as u64]);
                        evaluate(problem, problem.local_search(&problem.empty(), &mut rng)).map(Some)
                    })
                    .collect::<Result<_, _>>()?;
                (out, cfg.samples as u64)
            }
            mode => {
                let model = trained
                    .as_ref()
                    .map(|(m, _)| m)
                    .or(self.model.as_ref())
                    .expect("sampling runs have a model");
                let out: Vec<Option<Outcome>> = (0..cfg.samples)
                    .into_par_iter()
                    .map(|i| self.sample_one(model, generation, i))
                    .collect::<Result<_, _>>()?;
                let decoded = out.iter().flatten().count() as u64;
                (out, if mode == Mode::PatternBoost { decoded } else { 0 })
            }
        };
        let invalid = outcomes.iter().filter(|o| o.is_none()).count();
        let decoded: Vec<Outcome> = outcomes.into_iter().flatten().collect();
        let mut pool = self.pool.clone();
        let mut stats = merge(
            cfg,
            &mut pool,
            generation,
            cfg.samples,
            invalid,
            &decoded,
            Some(problem),
            local,
            Some(self.last_stats()),
        )?;
        stats.train_loss = loss;
        Ok((stats, pool, trained))
    }
}

/// Seed phase plus `generations` generations, checkpointing after each.
pub fn run(config: RunConfig, log: bool) -> Result<RunState, SearchError> {
    let mut state = RunState::start(config)?;
    state.log = log;
    state.report();
    checkpoint::save(&state)?;
    continue_run(&mut state)?;
    Ok(state)
}

/// Continues a checkpointed run up to `config.generations`, which the
/// overrides may raise.
pub fn resume(dir: &std::path::Path, overrides: &[String], log: bool) -> Result<RunState, SearchError> {
    let mut state = checkpoint::load(dir, overrides)?;
    state.log = log;
    continue_run(&mut state)?;
    Ok(state)
}

fn continue_run(state: &mut RunState) -> Result<(), SearchError> {
    while state.generation() < state.config.generations {
        state.run_generation()?;
        checkpoint::save(state)?;
    }
    Ok(())
}
