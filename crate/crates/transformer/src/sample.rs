//! Ancestral sampling with cached keys and values.

use rand::Rng;

use crate::ops::{gelu, layer_norm, linear, softmax};
use crate::{Model, Real, TransformerError};

/// Generated tokens after the prefix. `ended` is false when the context ran
/// out before the end token was drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sampled {
    pub tokens: Vec<u32>,
    pub ended: bool,
}

struct KvCache<F> {
    keys: Vec<Vec<F>>,
    values: Vec<Vec<F>>,
}

impl<F: Real> Model<F> {
    /// Next-token distribution after each prefix, computed one position at a
    /// time through the cache (the sampling path).
    pub fn probabilities_cached(&self, input: &[u32]) -> Result<Vec<Vec<F>>, TransformerError> {
        if input.len() > self.config().max_len {
            return Err(TransformerError::TooLong {
                got: input.len(),
                max_len: self.config().max_len,
            });
        }
        self.check_tokens(input)?;
        let mut cache = self.empty_cache();
        Ok(input
            .iter()
            .enumerate()
            .map(|(pos, &t)| {
                let mut row = self.step(&mut cache, t, pos);
                softmax(&mut row);
                row
            })
            .collect())
    }

    /// Draws tokens after `prefix` until `end` is drawn or the context is full.
    /// Each draw is an exact categorical sample from the softmax output.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, prefix: &[u32], end: u32) -> Result<Sampled, TransformerError> {
        let max_len = self.config().max_len;
        if prefix.is_empty() || prefix.len() > max_len {
            return Err(TransformerError::TooLong {
                got: prefix.len(),
                max_len,
            });
        }
        self.check_tokens(prefix)?;
        let mut cache = self.empty_cache();
        let mut logits = Vec::new();
        for (pos, &t) in prefix.iter().enumerate() {
            logits = self.step(&mut cache, t, pos);
        }
        let mut tokens = Vec::new();
        loop {
            softmax(&mut logits);
            let next = categorical(rng, &logits);
            if next == end {
                return Ok(Sampled { tokens, ended: true });
            }
            tokens.push(next);
            let pos = prefix.len() + tokens.len() - 1;
            if pos >= max_len {
                return Ok(Sampled { tokens, ended: false });
            }
            logits = self.step(&mut cache, next, pos);
        }
    }

    fn empty_cache(&self) -> KvCache<F> {
        let n = self.config().n_layers;
        KvCache {
            keys: vec![Vec::new(); n],
            values: vec![Vec::new(); n],
        }
    }

    /// Feeds `token` at `pos`; returns the logits for the next position.
    fn step(&self, cache: &mut KvCache<F>, token: u32, pos: usize) -> Vec<F> {
        let c = self.config();
        let (d, v, heads, hd) = (c.dim, c.vocab_size, c.n_heads, c.head_dim());
        let lay = self.layout();
        let p = self.params();
        let s = |o: usize, n: usize| &p[o..o + n];
        let mut x: Vec<F> = s(lay.wte + token as usize * d, d)
            .iter()
            .zip(s(lay.wpe + pos * d, d))
            .map(|(&a, &b)| a + b)
            .collect();
        let scale = F::one() / F::of(hd as f64).sqrt();
        for (li, lo) in lay.layers.iter().enumerate() {
            let (a, _, _) = layer_norm(&x, d, s(lo.ln1_g, d), s(lo.ln1_b, d));
            let q = linear(&a, d, s(lo.wq, d * d), d, None);
            cache.keys[li].extend(linear(&a, d, s(lo.wk, d * d), d, None));
            cache.values[li].extend(linear(&a, d, s(lo.wv, d * d), d, None));
            let (keys, values) = (&cache.keys[li], &cache.values[li]);
            let n = pos + 1;
            let mut att = vec![F::zero(); d];
            let mut w = vec![F::zero(); n];
            for h in 0..heads {
                let off = h * hd;
                for (j, wj) in w.iter_mut().enumerate() {
                    *wj = q[off..off + hd]
                        .iter()
                        .zip(&keys[j * d + off..j * d + off + hd])
                        .map(|(&a, &b)| a * b)
                        .sum::<F>()
                        * scale;
                }
                softmax(&mut w);
                for (j, &wj) in w.iter().enumerate() {
                    for e in 0..hd {
                        att[off + e] = att[off + e] + wj * values[j * d + off + e];
                    }
                }
            }
            let y = linear(&att, d, s(lo.wo, d * d), d, None);
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = *xi + *yi;
            }
            let (b, _, _) = layer_norm(&x, d, s(lo.ln2_g, d), s(lo.ln2_b, d));
            let g: Vec<F> = linear(&b, d, s(lo.w1, 4 * d * d), 4 * d, Some(s(lo.b1, 4 * d)))
                .into_iter()
                .map(gelu)
                .collect();
            let m = linear(&g, 4 * d, s(lo.w2, 4 * d * d), d, Some(s(lo.b2, d)));
            for (xi, mi) in x.iter_mut().zip(&m) {
                *xi = *xi + *mi;
            }
        }
        let (xf, _, _) = layer_norm(&x, d, s(lay.lnf_g, d), s(lay.lnf_b, d));
        linear(&xf, d, s(lay.wdec, d * v), v, None)
    }
}

/// Inverse-CDF draw; accumulation in f64.
fn categorical<F: Real, R: Rng + ?Sized>(rng: &mut R, probs: &[F]) -> u32 {
    let u: f64 = rng.gen();
    let total: f64 = probs.iter().map(|p| p.to_f64().unwrap_or(0.0)).sum();
    let target = u * total;
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p.to_f64().unwrap_or(0.0);
        if target < acc {
            return i as u32;
        }
    }
    probs.iter().rposition(|p| *p > F::zero()).unwrap_or(probs.len() - 1) as u32
}
