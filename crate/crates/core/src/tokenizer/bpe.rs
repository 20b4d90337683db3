//! Byte-pair encoding over a small base alphabet.
//!
//! Token ids `0..base.len()` are the base symbols; merge `i` creates token
//! `base.len() + i`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::TokenizerError;

const HEADER: &str = "patternboost-vocab v1 bpe";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    base: Vec<char>,
    merges: Vec<(u32, u32)>,
    expansions: Vec<String>,
}

impl Vocab {
    /// The identity vocabulary: one token per base symbol.
    pub fn identity(base: &[char]) -> Self {
        Self::from_parts(base.to_vec(), Vec::new()).expect("no merges to validate")
    }

    pub fn from_parts(base: Vec<char>, merges: Vec<(u32, u32)>) -> Result<Self, TokenizerError> {
        let mut expansions: Vec<String> = base.iter().map(|c| c.to_string()).collect();
        for &(l, r) in &merges {
            let known = expansions.len() as u32;
            if l >= known {
                return Err(TokenizerError::UnknownToken(l));
            }
            if r >= known {
                return Err(TokenizerError::UnknownToken(r));
            }
            let s = format!("{}{}", expansions[l as usize], expansions[r as usize]);
            expansions.push(s);
        }
        Ok(Self {
            base,
            merges,
            expansions,
        })
    }

    /// Greedily merges the most frequent adjacent pair, counting every adjacent
    /// position within each string and breaking ties by earliest first
    /// occurrence in the corpus. Stops at `vocab_size` tokens or when no pair
    /// occurs twice.
    pub fn train<S: AsRef<str>>(corpus: &[S], base: &[char], vocab_size: usize) -> Result<Self, TokenizerError> {
        if corpus.is_empty() {
            return Err(TokenizerError::EmptyCorpus);
        }
        if vocab_size < base.len() {
            return Err(TokenizerError::VocabTooSmall {
                requested: vocab_size,
                base: base.len(),
            });
        }
        let identity = Self::identity(base);
        let mut seqs = corpus
            .iter()
            .map(|s| identity.symbols(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;

        let v = vocab_size;
        let mut counts = vec![0u32; v * v];
        let mut first = vec![u64::MAX; v * v];
        let mut merges = Vec::new();
        let mut next = base.len() as u32;
        while (next as usize) < vocab_size {
            counts.fill(0);
            first.fill(u64::MAX);
            let mut position = 0u64;
            for seq in &seqs {
                for w in seq.windows(2) {
                    let key = w[0] as usize * v + w[1] as usize;
                    counts[key] += 1;
                    if first[key] == u64::MAX {
                        first[key] = position;
                    }
                    position += 1;
                }
                position += 1;
            }
            let best = (0..v * v)
                .filter(|&k| counts[k] >= 2)
                .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(first[b].cmp(&first[a])));
            let Some(key) = best else { break };
            let pair = ((key / v) as u32, (key % v) as u32);
            for seq in &mut seqs {
                apply_merge(seq, pair, next);
            }
            merges.push(pair);
            next += 1;
        }
        Self::from_parts(base.to_vec(), merges)
    }

    pub fn base(&self) -> &[char] {
        &self.base
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    pub fn len(&self) -> usize {
        self.expansions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expansions.is_empty()
    }

    /// The base-symbol string for token `id`.
    pub fn expansion(&self, id: u32) -> Option<&str> {
        self.expansions.get(id as usize).map(String::as_str)
    }

    fn symbols(&self, s: &str) -> Result<Vec<u32>, TokenizerError> {
        s.chars()
            .map(|c| {
                self.base
                    .iter()
                    .position(|&b| b == c)
                    .map(|i| i as u32)
                    .ok_or(TokenizerError::UnknownSymbol(c))
            })
            .collect()
    }

    /// Applies the merges in training order, each left to right without overlap.
    pub fn encode(&self, s: &str) -> Result<Vec<u32>, TokenizerError> {
        let mut seq = self.symbols(s)?;
        for (i, &pair) in self.merges.iter().enumerate() {
            apply_merge(&mut seq, pair, (self.base.len() + i) as u32);
        }
        Ok(seq)
    }

    pub fn decode(&self, tokens: &[u32]) -> Result<String, TokenizerError> {
        let mut out = String::new();
        for &t in tokens {
            out.push_str(self.expansion(t).ok_or(TokenizerError::UnknownToken(t))?);
        }
        Ok(out)
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{HEADER}")?;
        write!(w, "base")?;
        for c in &self.base {
            write!(w, " {c}")?;
        }
        writeln!(w)?;
        for (i, &(l, r)) in self.merges.iter().enumerate() {
            writeln!(w, "{} {l} {r}", self.base.len() + i)?;
        }
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self, TokenizerError> {
        let mut lines = BufReader::new(r).lines();
        Self::read_lines(&mut lines, 0)
    }

    /// Parses a vocabulary from `lines`, numbering errors after `offset` lines
    /// already consumed.
    pub(crate) fn read_lines(
        lines: &mut impl Iterator<Item = std::io::Result<String>>,
        offset: usize,
    ) -> Result<Self, TokenizerError> {
        let parse_err = |line: usize, message: String| TokenizerError::Parse { line, message };
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim_end() != HEADER {
            return Err(parse_err(offset + 1, format!("expected header {HEADER:?}")));
        }
        let base_line = lines.next().transpose()?.unwrap_or_default();
        let symbols = base_line
            .strip_prefix("base")
            .ok_or_else(|| parse_err(offset + 2, "expected base alphabet".into()))?;
        let mut base = Vec::new();
        for tok in symbols.split_whitespace() {
            let mut chars = tok.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => base.push(c),
                _ => {
                    return Err(parse_err(
                        offset + 2,
                        format!("base symbol {tok:?} is not one character"),
                    ))
                }
            }
        }
        let mut merges = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = offset + 3 + i;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<u32> = line
                .split_whitespace()
                .map(|f| f.parse().map_err(|_| parse_err(lineno, format!("bad number {f:?}"))))
                .collect::<Result<_, _>>()?;
            let [id, l, r] = fields[..] else {
                return Err(parse_err(lineno, "expected `<id> <left> <right>`".into()));
            };
            if id as usize != base.len() + merges.len() {
                return Err(parse_err(lineno, format!("merge id {id} out of sequence")));
            }
            merges.push((l, r));
        }
        Self::from_parts(base, merges)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TokenizerError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TokenizerError> {
        Self::read_from(fs::File::open(path)?)
    }
}

fn apply_merge(seq: &mut Vec<u32>, (l, r): (u32, u32), new: u32) {
    if seq.len() < 2 {
        return;
    }
    let mut out = 0;
    let mut i = 0;
    while i < seq.len() {
        if i + 1 < seq.len() && seq[i] == l && seq[i + 1] == r {
            seq[out] = new;
            i += 2;
        } else {
            seq[out] = seq[i];
            i += 1;
        }
        out += 1;
    }
    seq.truncate(out);
}
