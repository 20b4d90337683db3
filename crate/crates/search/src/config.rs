//! Run configuration: flat `key = value` text grouped in `[section]` blocks.
//!
//! Keys are unique across sections, so overrides name them without a
//! section. A key given outside any section is accepted if it is known; inside
//! a section it must belong to that section. Everything not given takes the
//! problem's default.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use patternboost_core::{ProblemId, ProblemSpec, Score};
use patternboost_transformer::{AdamW, ModelConfig, ACCUMULATION_WINDOW};

use crate::SearchError;

/// Environment variable overriding the master seed.
pub const SEED_ENV: &str = "PATTERNBOOST_SEED";

const SECTIONS: &[(&str, &[&str])] = &[
    ("problem", &["problem", "n", "k", "over_weight", "under_weight"]),
    ("pool", &["capacity", "selection_fraction", "seed_runs"]),
    ("tokenizer", &["tokenizer", "vocab_size", "fixed_width"]),
    ("model", &["layers", "dim", "heads", "max_len", "lr", "weight_decay"]),
    (
        "loop",
        &[
            "mode",
            "generations",
            "samples",
            "train_steps",
            "batch_size",
            "augment",
            "seed",
            "workers",
            "output",
        ],
    ),
];

fn section_of(key: &str) -> Option<&'static str> {
    SECTIONS.iter().find(|(_, keys)| keys.contains(&key)).map(|(s, _)| *s)
}

/// How payloads become token sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenizerKind {
    /// BPE over the plain digit string.
    Bpe,
    /// BPE with a delimiter after every row.
    BpeDelimited,
    /// Groups of `fixed_width` bits.
    Fixed,
    /// One token per nonzero payload entry.
    Items,
}

impl TokenizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenizerKind::Bpe => "bpe",
            TokenizerKind::BpeDelimited => "bpe-delimited",
            TokenizerKind::Fixed => "fixed",
            TokenizerKind::Items => "items",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Self::Bpe, Self::BpeDelimited, Self::Fixed, Self::Items]
            .into_iter()
            .find(|k| k.as_str() == s)
    }

    pub fn default_for(problem: ProblemId) -> Self {
        match problem {
            ProblemId::Triangle => TokenizerKind::Bpe,
            ProblemId::C4 => TokenizerKind::BpeDelimited,
            ProblemId::Permanent312 | ProblemId::Hypercube => TokenizerKind::Fixed,
            ProblemId::Isosceles
            | ProblemId::Sphere
            | ProblemId::SaturatedSperner
            | ProblemId::CrossSperner
            | ProblemId::BoxCover => TokenizerKind::Items,
        }
    }
}

/// Which phases a generation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Train, sample, decode, local search, merge.
    PatternBoost,
    /// Train, sample, decode, merge; no local search anywhere. The seed
    /// database holds uniformly random payloads.
    GlobalOnly,
    /// Local searches from the empty start only; no model.
    LocalOnly,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::PatternBoost => "patternboost",
            Mode::GlobalOnly => "global-only",
            Mode::LocalOnly => "local-only",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Self::PatternBoost, Self::GlobalOnly, Self::LocalOnly]
            .into_iter()
            .find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub n: usize,
    pub k: usize,
    pub over_weight: Score,
    pub under_weight: Score,

    /// Pool size from generation 1 on.
    pub capacity: usize,
    /// Fraction of seed-phase results retained.
    pub selection_fraction: f64,
    pub seed_runs: usize,

    pub tokenizer: TokenizerKind,
    pub vocab_size: usize,
    pub fixed_width: usize,

    pub layers: usize,
    pub dim: usize,
    pub heads: usize,
    /// Model context; `None` derives it from the seed pool.
    pub max_len: Option<usize>,
    pub lr: f64,
    pub weight_decay: f64,

    pub mode: Mode,
    pub generations: usize,
    pub samples: usize,
    pub train_steps: usize,
    pub batch_size: usize,
    /// Insert every symmetry image of each searched result.
    pub augment: bool,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub output: PathBuf,
}

impl RunConfig {
    /// Parses config text, then applies `key=value` overrides in order.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, SearchError> {
        let mut raw = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| SearchError::Config(format!("line {}: {message}", i + 1));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(bad(format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, found {line:?}")))?;
            let key = key.trim();
            match (section_of(key), section.as_deref()) {
                (None, _) => return Err(bad(format!("unknown key `{key}`"))),
                (Some(home), Some(s)) if home != s => {
                    return Err(bad(format!("key `{key}` belongs in [{home}], not [{s}]")))
                }
                _ => {}
            }
            raw.insert(key.to_string(), value.trim().to_string());
        }
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| SearchError::Config(format!("override {o:?} is not `key=value`")))?;
            let key = key.trim();
            if section_of(key).is_none() {
                return Err(SearchError::Config(format!("unknown key `{key}` in override")));
            }
            raw.insert(key.to_string(), value.trim().to_string());
        }
        Self::resolve(raw)
    }

    /// Replaces the seed with `PATTERNBOOST_SEED` when that variable is set.
    pub fn apply_seed_env(&mut self) -> Result<(), SearchError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| SearchError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?;
        }
        Ok(())
    }

    fn resolve(mut raw: BTreeMap<String, String>) -> Result<Self, SearchError> {
        let mut take = |key: &str| raw.remove(key);
        let problem_text =
            take("problem").ok_or_else(|| SearchError::Config("missing required key `problem`".into()))?;
        let problem: ProblemId = problem_text
            .parse()
            .map_err(|_| SearchError::Config(format!("unknown problem id {problem_text:?}")))?;
        let n = parse_num::<usize>(
            "n",
            take("n").ok_or_else(|| SearchError::Config("missing required key `n`".into()))?,
        )?;
        let spec_default = ProblemSpec::new(problem, n);
        macro_rules! get {
            ($key:literal, $ty:ty, $default:expr) => {
                match take($key) {
                    Some(v) => parse_num::<$ty>($key, v)?,
                    None => $default,
                }
            };
        }

        let k = get!("k", usize, spec_default.k);
        let over_weight = get!("over_weight", Score, spec_default.over_cover_weight);
        let under_weight = get!("under_weight", Score, spec_default.under_cover_weight);
        let selection_fraction = get!(
            "selection_fraction",
            f64,
            match problem {
                ProblemId::Isosceles | ProblemId::Sphere => 0.10,
                _ => 0.25,
            }
        );
        let seed_runs = get!("seed_runs", usize, 40_000);
        let retained = retained_count(seed_runs, selection_fraction);
        let capacity = match take("capacity").as_deref() {
            None | Some("auto") => match problem {
                ProblemId::C4 => 50_000,
                _ => retained,
            },
            Some(v) => parse_num("capacity", v.to_string())?,
        };
        let tokenizer = match take("tokenizer") {
            None => TokenizerKind::default_for(problem),
            Some(v) => {
                TokenizerKind::parse(&v).ok_or_else(|| SearchError::Config(format!("unknown tokenizer {v:?}")))?
            }
        };
        let vocab_size = get!("vocab_size", usize, 100);
        let fixed_width = get!("fixed_width", usize, 8);
        let layers = get!("layers", usize, 2);
        let dim = get!("dim", usize, 16);
        let heads = get!("heads", usize, 4);
        let max_len = match take("max_len").as_deref() {
            None | Some("auto") => None,
            Some(v) => Some(parse_num("max_len", v.to_string())?),
        };
        let lr = get!("lr", f64, AdamW::<f32>::DEFAULT_LR);
        let weight_decay = get!("weight_decay", f64, AdamW::<f32>::DEFAULT_WEIGHT_DECAY);
        let mode = match take("mode") {
            None => Mode::PatternBoost,
            Some(v) => Mode::parse(&v).ok_or_else(|| SearchError::Config(format!("unknown mode {v:?}")))?,
        };
        let generations = get!("generations", usize, 6);
        let samples = get!(
            "samples",
            usize,
            match problem {
                ProblemId::C4 => 500_000,
                _ => 100_000,
            }
        );
        let train_steps = get!("train_steps", usize, 2_000);
        let batch_size = get!("batch_size", usize, ACCUMULATION_WINDOW);
        let augment = get!("augment", bool, problem == ProblemId::Sphere);
        let seed = get!("seed", u64, 1);
        let workers = get!("workers", usize, 0);
        let output = take("output")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(format!("runs/{}_{n}", problem.as_str())));
        debug_assert!(raw.is_empty(), "every known key is consumed");

        let cfg = RunConfig {
            problem,
            n,
            k,
            over_weight,
            under_weight,
            capacity,
            selection_fraction,
            seed_runs,
            tokenizer,
            vocab_size,
            fixed_width,
            layers,
            dim,
            heads,
            max_len,
            lr,
            weight_decay,
            mode,
            generations,
            samples,
            train_steps,
            batch_size,
            augment,
            seed,
            workers,
            output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::Config(m));
        if !(self.selection_fraction > 0.0 && self.selection_fraction <= 1.0) {
            return bad(format!(
                "selection_fraction {} is outside (0, 1]",
                self.selection_fraction
            ));
        }
        for (key, v) in [
            ("capacity", self.capacity),
            ("seed_runs", self.seed_runs),
            ("batch_size", self.batch_size),
            ("vocab_size", self.vocab_size),
        ] {
            if v == 0 {
                return bad(format!("`{key}` must be positive"));
            }
        }
        if !(1..=patternboost_core::tokenizer::fixed::MAX_WIDTH).contains(&self.fixed_width) {
            return bad(format!(
                "fixed_width {} is outside 1..={}",
                self.fixed_width,
                patternboost_core::tokenizer::fixed::MAX_WIDTH
            ));
        }
        if self.max_len == Some(0) {
            return bad("max_len must be positive".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) || !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("lr must be positive and weight_decay non-negative".into());
        }
        self.model_config(2, 1)?;
        let problem = self
            .problem_spec()
            .build()
            .map_err(|e| SearchError::Config(e.to_string()))?;
        if matches!(self.tokenizer, TokenizerKind::Fixed) && problem.alphabet() != 2 {
            return bad(format!(
                "the fixed tokenizer needs a binary payload; {} has alphabet {}",
                self.problem,
                problem.alphabet()
            ));
        }
        if matches!(self.tokenizer, TokenizerKind::BpeDelimited) && problem.rows().is_none() {
            return bad(format!("{} payloads have no rows to delimit", self.problem));
        }
        Ok(())
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        let mut spec = ProblemSpec::new(self.problem, self.n).with_k(self.k);
        spec.over_cover_weight = self.over_weight;
        spec.under_cover_weight = self.under_weight;
        spec
    }

    /// Number of seed-phase results kept in the pool.
    pub fn retained(&self) -> usize {
        retained_count(self.seed_runs, self.selection_fraction)
    }

    pub fn model_config(&self, vocab_size: usize, max_len: usize) -> Result<ModelConfig, SearchError> {
        let c = ModelConfig {
            n_layers: self.layers,
            dim: self.dim,
            n_heads: self.heads,
            vocab_size,
            max_len,
            seed: self.seed,
        };
        c.validate().map_err(|e| SearchError::Config(e.to_string()))?;
        Ok(c)
    }

    /// The full configuration in the input format; parsing it gives `self` back.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let value = |key: &str| -> String {
            match key {
                "problem" => self.problem.as_str().to_string(),
                "n" => self.n.to_string(),
                "k" => self.k.to_string(),
                "over_weight" => self.over_weight.to_string(),
                "under_weight" => self.under_weight.to_string(),
                "capacity" => self.capacity.to_string(),
                "selection_fraction" => format!("{:?}", self.selection_fraction),
                "seed_runs" => self.seed_runs.to_string(),
                "tokenizer" => self.tokenizer.as_str().to_string(),
                "vocab_size" => self.vocab_size.to_string(),
                "fixed_width" => self.fixed_width.to_string(),
                "layers" => self.layers.to_string(),
                "dim" => self.dim.to_string(),
                "heads" => self.heads.to_string(),
                "max_len" => self.max_len.map_or("auto".to_string(), |m| m.to_string()),
                "lr" => format!("{:?}", self.lr),
                "weight_decay" => format!("{:?}", self.weight_decay),
                "mode" => self.mode.as_str().to_string(),
                "generations" => self.generations.to_string(),
                "samples" => self.samples.to_string(),
                "train_steps" => self.train_steps.to_string(),
                "batch_size" => self.batch_size.to_string(),
                "augment" => self.augment.to_string(),
                "seed" => self.seed.to_string(),
                "workers" => self.workers.to_string(),
                "output" => self.output.display().to_string(),
                _ => unreachable!("every key has a value"),
            }
        };
        for (i, (section, keys)) in SECTIONS.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{section}]");
            for key in *keys {
                let _ = writeln!(out, "{key} = {}", value(key));
            }
        }
        out
    }
}

fn retained_count(runs: usize, fraction: f64) -> usize {
    ((runs as f64 * fraction).ceil() as usize).clamp(1, runs.max(1))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: String) -> Result<T, SearchError> {
    v.parse()
        .map_err(|_| SearchError::Config(format!("`{key}` has malformed value {v:?}")))
}
