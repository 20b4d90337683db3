//! The payload codec used by the search loop.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::flatten::{flatten_rows, unflatten_rows, DELIMITER};
use super::{FixedWidth, TokenizerError, Vocab};

const HEADER: &str = "patternboost-codec v1";

/// Maps payloads to token ids `0..num_tokens()` and back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Codec {
    /// BPE over the digit string, with a delimiter after each row if `rows` is set.
    Bpe {
        vocab: Vocab,
        payload_len: usize,
        alphabet: u8,
        rows: Option<Vec<usize>>,
    },
    /// Binary payloads in groups of `k` bits.
    FixedWidth { k: usize, payload_len: usize },
    /// One token per nonzero entry: `position * (alphabet - 1) + value - 1`,
    /// in increasing position order. Suits sparse payloads such as point sets.
    Items { payload_len: usize, alphabet: u8 },
}

impl Codec {
    pub fn base_alphabet(alphabet: u8, delimited: bool) -> Vec<char> {
        let mut base: Vec<char> = (0..alphabet).map(|d| char::from(b'0' + d)).collect();
        if delimited {
            base.push(DELIMITER);
        }
        base
    }

    /// Trains a BPE vocabulary on `corpus` payloads.
    pub fn train_bpe(
        corpus: &[Vec<u8>],
        payload_len: usize,
        alphabet: u8,
        rows: Option<Vec<usize>>,
        vocab_size: usize,
    ) -> Result<Self, TokenizerError> {
        let strings: Vec<String> = corpus.iter().map(|p| flatten_rows(p, rows.as_deref())).collect();
        let base = Self::base_alphabet(alphabet, rows.is_some());
        let vocab = Vocab::train(&strings, &base, vocab_size.max(base.len()))?;
        Ok(Codec::Bpe {
            vocab,
            payload_len,
            alphabet,
            rows,
        })
    }

    pub fn payload_len(&self) -> usize {
        match self {
            Codec::Bpe { payload_len, .. }
            | Codec::FixedWidth { payload_len, .. }
            | Codec::Items { payload_len, .. } => *payload_len,
        }
    }

    pub fn num_tokens(&self) -> usize {
        match self {
            Codec::Bpe { vocab, .. } => vocab.len(),
            Codec::FixedWidth { k, .. } => 1 << k,
            Codec::Items { payload_len, alphabet } => payload_len * (*alphabet as usize - 1),
        }
    }

    /// Longest encoding any valid payload can have.
    pub fn max_tokens(&self) -> usize {
        match self {
            Codec::Bpe { payload_len, rows, .. } => payload_len + rows.as_ref().map_or(0, Vec::len),
            Codec::FixedWidth { k, payload_len } => payload_len.div_ceil(*k),
            Codec::Items { payload_len, .. } => *payload_len,
        }
    }

    pub fn encode(&self, payload: &[u8]) -> Result<Vec<u32>, TokenizerError> {
        if payload.len() != self.payload_len() {
            return Err(TokenizerError::Length {
                expected: self.payload_len(),
                got: payload.len(),
            });
        }
        match self {
            Codec::Bpe { vocab, rows, .. } => vocab.encode(&flatten_rows(payload, rows.as_deref())),
            Codec::FixedWidth { k, .. } => Ok(FixedWidth::new(*k).encode(payload)),
            Codec::Items { alphabet, .. } => Ok(payload
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(|(i, &v)| (i * (*alphabet as usize - 1) + v as usize - 1) as u32)
                .collect()),
        }
    }

    /// Decodes to `(position, value)` items in sequence order. Only nonzero
    /// values appear. Item sequences may repeat a position; the caller decides
    /// what that means.
    pub fn decode_items(&self, tokens: &[u32]) -> Result<Vec<(usize, u8)>, TokenizerError> {
        match self {
            Codec::Items { payload_len, alphabet } => {
                let per = *alphabet as usize - 1;
                tokens
                    .iter()
                    .map(|&t| {
                        let t_us = t as usize;
                        if t_us >= payload_len * per {
                            Err(TokenizerError::UnknownToken(t))
                        } else {
                            Ok((t_us / per, (t_us % per + 1) as u8))
                        }
                    })
                    .collect()
            }
            _ => Ok(self
                .decode(tokens)?
                .into_iter()
                .enumerate()
                .filter(|(_, v)| *v > 0)
                .collect()),
        }
    }

    /// Decodes to a full payload; for item sequences the first occurrence of a
    /// position wins.
    pub fn decode(&self, tokens: &[u32]) -> Result<Vec<u8>, TokenizerError> {
        match self {
            Codec::Bpe {
                vocab,
                payload_len,
                alphabet,
                rows,
            } => unflatten_rows(&vocab.decode(tokens)?, *payload_len, rows.as_deref(), *alphabet),
            Codec::FixedWidth { k, payload_len } => FixedWidth::new(*k).decode(tokens, *payload_len),
            Codec::Items { payload_len, .. } => {
                let mut payload = vec![0u8; *payload_len];
                let mut seen = vec![false; *payload_len];
                for (pos, v) in self.decode_items(tokens)? {
                    if !seen[pos] {
                        seen[pos] = true;
                        payload[pos] = v;
                    }
                }
                Ok(payload)
            }
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        match self {
            Codec::Bpe {
                vocab,
                payload_len,
                alphabet,
                rows,
            } => {
                write!(w, "{HEADER} bpe {payload_len} {alphabet}")?;
                match rows {
                    Some(rows) => {
                        let rows: Vec<String> = rows.iter().map(usize::to_string).collect();
                        writeln!(w, " {}", rows.join(","))?;
                    }
                    None => writeln!(w, " -")?,
                }
                vocab.write_to(w)
            }
            Codec::FixedWidth { k, payload_len } => writeln!(w, "{HEADER} fixed {payload_len} {k}"),
            Codec::Items { payload_len, alphabet } => writeln!(w, "{HEADER} items {payload_len} {alphabet}"),
        }
    }

    pub fn read_from(r: impl Read) -> Result<Self, TokenizerError> {
        let mut lines = BufReader::new(r).lines();
        let first = lines.next().transpose()?.unwrap_or_default();
        let bad = |message: &str| TokenizerError::Parse {
            line: 1,
            message: message.to_string(),
        };
        let rest = first.strip_prefix(HEADER).ok_or_else(|| bad("expected codec header"))?;
        let fields: Vec<&str> = rest.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad number in codec header"));
        match fields[..] {
            ["bpe", len, alphabet, rows] => {
                let rows = if rows == "-" {
                    None
                } else {
                    Some(rows.split(',').map(num).collect::<Result<Vec<_>, _>>()?)
                };
                let vocab = Vocab::read_lines(&mut lines, 1)?;
                Ok(Codec::Bpe {
                    vocab,
                    payload_len: num(len)?,
                    alphabet: num(alphabet)? as u8,
                    rows,
                })
            }
            ["fixed", len, k] => Ok(Codec::FixedWidth {
                k: num(k)?,
                payload_len: num(len)?,
            }),
            ["items", len, alphabet] => Ok(Codec::Items {
                payload_len: num(len)?,
                alphabet: num(alphabet)? as u8,
            }),
            _ => Err(bad("unknown codec kind")),
        }
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
