//! Per-generation statistics and their CSV forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use patternboost_core::Score;

use crate::SearchError;

const STATS_HEADER: &str =
    "generation,samples,invalid,valid,distinct,pool_size,pool_best,pool_mean,best_valid,local_searches,train_loss,histogram";

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    /// Sequences drawn from the model (seed runs in generation 0).
    pub samples: usize,
    /// Samples that failed to decode.
    pub invalid: usize,
    pub valid: usize,
    /// Distinct constructions produced this generation.
    pub distinct: usize,
    /// Scores of the distinct constructions.
    pub histogram: BTreeMap<Score, u64>,
    pub pool_size: usize,
    pub pool_best: Option<Score>,
    pub pool_mean: Option<f64>,
    /// Best score of a valid construction seen so far in the run.
    pub best_valid: Option<Score>,
    /// Local searches run so far, cumulative.
    pub local_searches: u64,
    /// Mean training loss over the generation's optimizer steps.
    pub train_loss: Option<f32>,
}

impl GenerationStats {
    /// Most frequent score; the larger one on ties.
    pub fn mode(&self) -> Option<Score> {
        self.histogram
            .iter()
            .max_by_key(|&(score, count)| (*count, *score))
            .map(|(s, _)| *s)
    }

    pub fn histogram_max(&self) -> Option<Score> {
        self.histogram.keys().next_back().copied()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or("-".to_string(), |x| x.to_string())
}

pub fn stats_csv(series: &[GenerationStats]) -> String {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for s in series {
        let hist: Vec<String> = s.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.generation,
            s.samples,
            s.invalid,
            s.valid,
            s.distinct,
            s.pool_size,
            opt(s.pool_best),
            opt(s.pool_mean.map(|m| format!("{m:?}"))),
            opt(s.best_valid),
            s.local_searches,
            opt(s.train_loss.map(|l| format!("{l:?}"))),
            hist.join(" ")
        );
    }
    out
}

pub fn parse_stats(text: &str) -> Result<Vec<GenerationStats>, SearchError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == STATS_HEADER => {}
        _ => {
            return Err(SearchError::Stats {
                line: 1,
                message: "missing stats header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |message: &str| SearchError::Stats {
            line: i + 1,
            message: message.to_string(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(bad("expected 12 fields"));
        }
        fn num<T: std::str::FromStr>(s: &str) -> Option<T> {
            s.parse().ok()
        }
        fn maybe<T: std::str::FromStr>(s: &str) -> Option<Option<T>> {
            if s == "-" {
                Some(None)
            } else {
                s.parse().ok().map(Some)
            }
        }
        let mut histogram = BTreeMap::new();
        for pair in f[11].split_whitespace() {
            let (k, v) = pair.split_once(':').ok_or_else(|| bad("malformed histogram"))?;
            histogram.insert(
                num(k).ok_or_else(|| bad("malformed histogram score"))?,
                num(v).ok_or_else(|| bad("malformed histogram count"))?,
            );
        }
        let malformed = || bad("malformed field");
        out.push(GenerationStats {
            generation: num(f[0]).ok_or_else(malformed)?,
            samples: num(f[1]).ok_or_else(malformed)?,
            invalid: num(f[2]).ok_or_else(malformed)?,
            valid: num(f[3]).ok_or_else(malformed)?,
            distinct: num(f[4]).ok_or_else(malformed)?,
            pool_size: num(f[5]).ok_or_else(malformed)?,
            pool_best: maybe(f[6]).ok_or_else(malformed)?,
            pool_mean: maybe(f[7]).ok_or_else(malformed)?,
            best_valid: maybe(f[8]).ok_or_else(malformed)?,
            local_searches: num(f[9]).ok_or_else(malformed)?,
            train_loss: maybe(f[10]).ok_or_else(malformed)?,
            histogram,
        });
    }
    Ok(out)
}

/// One row per (generation, score, count), by generation then score.
pub fn histogram_csv(series: &[GenerationStats]) -> String {
    let mut out = String::from("generation,score,count\n");
    for s in series {
        for (score, count) in &s.histogram {
            let _ = writeln!(out, "{},{score},{count}", s.generation);
        }
    }
    out
}

pub fn histogram_emit(series: &[GenerationStats], path: impl AsRef<Path>) -> Result<(), SearchError> {
    if series.is_empty() {
        return Err(SearchError::Stats {
            line: 0,
            message: "no generations to emit".into(),
        });
    }
    let path = path.as_ref();
    fs::write(path, histogram_csv(series)).map_err(|source| SearchError::Io {
        generation: series[series.len() - 1].generation,
        path: path.to_path_buf(),
        source,
    })
}
