use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::layout::{LayerOffsets, Layout};
use crate::ops::{gelu, gelu_grad, layer_norm, layer_norm_back, linear, linear_back, softmax};
use crate::{ModelConfig, Real, TransformerError};

pub(crate) const INIT_STD: f64 = 0.02;

/// Configuration, layout and the flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<F: Real> {
    config: ModelConfig,
    layout: Layout,
    params: Vec<F>,
}

struct LayerCache<F> {
    ln1_xhat: Vec<F>,
    ln1_rstd: Vec<F>,
    a: Vec<F>,
    q: Vec<F>,
    k: Vec<F>,
    v: Vec<F>,
    /// Attention weights, `heads x l x l` (upper triangle unused).
    p: Vec<F>,
    att: Vec<F>,
    ln2_xhat: Vec<F>,
    ln2_rstd: Vec<F>,
    b: Vec<F>,
    hpre: Vec<F>,
    g: Vec<F>,
}

struct Forward<F> {
    layers: Vec<LayerCache<F>>,
    lnf_xhat: Vec<F>,
    lnf_rstd: Vec<F>,
    xf: Vec<F>,
    /// Next-token probabilities, `l x v`.
    probs: Vec<F>,
    /// Log-normalizers of the logit rows.
    lse: Vec<F>,
    logits: Vec<F>,
}

impl<F: Real> Model<F> {
    /// Gaussian weights (std 0.02), unit gains, zero biases.
    pub fn new(config: ModelConfig) -> Result<Self, TransformerError> {
        let mut m = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(m.config.seed);
        let normal = Normal::new(0.0, INIT_STD).expect("positive std");
        for p in m.params.iter_mut() {
            *p = F::of(normal.sample(&mut rng));
        }
        let d = m.config.dim;
        for (o, n) in m.layout.shifts(d) {
            m.params[o..o + n].fill(F::zero());
        }
        for (o, n) in m.layout.gains(d) {
            m.params[o..o + n].fill(F::one());
        }
        Ok(m)
    }

    /// All parameters zero.
    pub fn zeros(config: ModelConfig) -> Result<Self, TransformerError> {
        config.validate()?;
        let layout = Layout::new(&config);
        let params = vec![F::zero(); layout.total];
        Ok(Self { config, layout, params })
    }

    pub fn from_params(config: ModelConfig, params: Vec<F>) -> Result<Self, TransformerError> {
        config.validate()?;
        let layout = Layout::new(&config);
        if params.len() != layout.total {
            return Err(TransformerError::Checkpoint(format!(
                "{} parameters given, the config needs {}",
                params.len(),
                layout.total
            )));
        }
        Ok(Self { config, layout, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[F] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    fn slice(&self, offset: usize, len: usize) -> &[F] {
        &self.params[offset..offset + len]
    }

    fn check_input(&self, input: &[u32]) -> Result<(), TransformerError> {
        if input.len() > self.config.max_len {
            return Err(TransformerError::TooLong {
                got: input.len(),
                max_len: self.config.max_len,
            });
        }
        self.check_tokens(input)
    }

    pub(crate) fn check_tokens(&self, tokens: &[u32]) -> Result<(), TransformerError> {
        match tokens.iter().find(|&&t| t as usize >= self.config.vocab_size) {
            Some(&token) => Err(TransformerError::Token {
                token,
                vocab: self.config.vocab_size,
            }),
            None => Ok(()),
        }
    }

    /// Next-token distributions after each prefix of `input`, one row per position.
    pub fn probabilities(&self, input: &[u32]) -> Result<Vec<Vec<F>>, TransformerError> {
        self.check_input(input)?;
        let v = self.config.vocab_size;
        let fwd = self.forward(input);
        Ok(fwd.probs.chunks(v).map(<[F]>::to_vec).collect())
    }

    /// Summed cross-entropy of `seq[i + 1]` given `seq[..=i]`, for every `i`.
    pub fn loss(&self, seq: &[u32]) -> Result<F, TransformerError> {
        let (input, targets) = split(seq)?;
        self.check_input(input)?;
        self.check_tokens(targets)?;
        let fwd = self.forward(input);
        Ok(sequence_loss(&fwd, targets, self.config.vocab_size))
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_grad(&self, seq: &[u32]) -> Result<(F, Vec<F>), TransformerError> {
        let mut grad = vec![F::zero(); self.params.len()];
        let loss = self.accumulate_grad(seq, &mut grad)?;
        Ok((loss, grad))
    }

    /// Adds the gradient of the loss of `seq` into `grad`; returns the loss.
    pub fn accumulate_grad(&self, seq: &[u32], grad: &mut [F]) -> Result<F, TransformerError> {
        let (input, targets) = split(seq)?;
        self.check_input(input)?;
        self.check_tokens(targets)?;
        let fwd = self.forward(input);
        let loss = sequence_loss(&fwd, targets, self.config.vocab_size);
        self.backward(input, targets, &fwd, grad);
        Ok(loss)
    }

    fn forward(&self, input: &[u32]) -> Forward<F> {
        let c = &self.config;
        let (d, v, l) = (c.dim, c.vocab_size, input.len());
        let lay = &self.layout;
        let mut x = vec![F::zero(); l * d];
        for (i, &t) in input.iter().enumerate() {
            let te = self.slice(lay.wte + t as usize * d, d);
            let pe = self.slice(lay.wpe + i * d, d);
            for j in 0..d {
                x[i * d + j] = te[j] + pe[j];
            }
        }
        let mut layers = Vec::with_capacity(c.n_layers);
        for lo in &lay.layers {
            let (a, ln1_xhat, ln1_rstd) = layer_norm(&x, d, self.slice(lo.ln1_g, d), self.slice(lo.ln1_b, d));
            let q = linear(&a, d, self.slice(lo.wq, d * d), d, None);
            let k = linear(&a, d, self.slice(lo.wk, d * d), d, None);
            let vv = linear(&a, d, self.slice(lo.wv, d * d), d, None);
            let (att, p) = self.attention(&q, &k, &vv, l);
            let y = linear(&att, d, self.slice(lo.wo, d * d), d, None);
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = *xi + *yi;
            }
            let (b, ln2_xhat, ln2_rstd) = layer_norm(&x, d, self.slice(lo.ln2_g, d), self.slice(lo.ln2_b, d));
            let hpre = linear(
                &b,
                d,
                self.slice(lo.w1, 4 * d * d),
                4 * d,
                Some(self.slice(lo.b1, 4 * d)),
            );
            let g: Vec<F> = hpre.iter().map(|&h| gelu(h)).collect();
            let m = linear(&g, 4 * d, self.slice(lo.w2, 4 * d * d), d, Some(self.slice(lo.b2, d)));
            for (xi, mi) in x.iter_mut().zip(&m) {
                *xi = *xi + *mi;
            }
            layers.push(LayerCache {
                ln1_xhat,
                ln1_rstd,
                a,
                q,
                k,
                v: vv,
                p,
                att,
                ln2_xhat,
                ln2_rstd,
                b,
                hpre,
                g,
            });
        }
        let (xf, lnf_xhat, lnf_rstd) = layer_norm(&x, d, self.slice(lay.lnf_g, d), self.slice(lay.lnf_b, d));
        let logits = linear(&xf, d, self.slice(lay.wdec, d * v), v, None);
        let mut probs = logits.clone();
        let lse = probs.chunks_mut(v).map(softmax).collect();
        Forward {
            layers,
            lnf_xhat,
            lnf_rstd,
            xf,
            probs,
            lse,
            logits,
        }
    }

    fn attention(&self, q: &[F], k: &[F], v: &[F], l: usize) -> (Vec<F>, Vec<F>) {
        let (d, heads, hd) = (self.config.dim, self.config.n_heads, self.config.head_dim());
        let scale = F::one() / F::of(hd as f64).sqrt();
        let mut att = vec![F::zero(); l * d];
        let mut p = vec![F::zero(); heads * l * l];
        for h in 0..heads {
            let off = h * hd;
            for i in 0..l {
                let row = &mut p[(h * l + i) * l..(h * l + i) * l + i + 1];
                let qi = &q[i * d + off..i * d + off + hd];
                for (j, s) in row.iter_mut().enumerate() {
                    let kj = &k[j * d + off..j * d + off + hd];
                    *s = qi.iter().zip(kj).map(|(&a, &b)| a * b).sum::<F>() * scale;
                }
                softmax(row);
                let out = &mut att[i * d + off..i * d + off + hd];
                for (j, &pij) in row.iter().enumerate() {
                    for (o, &vj) in out.iter_mut().zip(&v[j * d + off..j * d + off + hd]) {
                        *o = *o + pij * vj;
                    }
                }
            }
        }
        (att, p)
    }

    fn backward(&self, input: &[u32], targets: &[u32], fwd: &Forward<F>, grad: &mut [F]) {
        let c = &self.config;
        let (d, v, l) = (c.dim, c.vocab_size, input.len());
        let lay = &self.layout;

        let mut dlogits = fwd.probs.clone();
        for (i, &t) in targets.iter().enumerate() {
            dlogits[i * v + t as usize] = dlogits[i * v + t as usize] - F::one();
        }
        let dxf = linear_back(
            &fwd.xf,
            d,
            self.slice(lay.wdec, d * v),
            v,
            &dlogits,
            sub(grad, lay.wdec, d * v),
            None,
        );
        let mut dx = {
            let (dg, db) = pair(grad, lay.lnf_g, lay.lnf_b, d);
            layer_norm_back(&dxf, &fwd.lnf_xhat, &fwd.lnf_rstd, d, self.slice(lay.lnf_g, d), dg, db)
        };

        for (lo, cache) in lay.layers.iter().zip(&fwd.layers).rev() {
            self.block_backward(lo, cache, l, &mut dx, grad);
        }

        for (i, &t) in input.iter().enumerate() {
            for j in 0..d {
                let g = dx[i * d + j];
                let te = lay.wte + t as usize * d + j;
                grad[te] = grad[te] + g;
                let pe = lay.wpe + i * d + j;
                grad[pe] = grad[pe] + g;
            }
        }
    }

    fn block_backward(&self, lo: &LayerOffsets, cache: &LayerCache<F>, l: usize, dx: &mut [F], grad: &mut [F]) {
        let d = self.config.dim;
        // MLP branch.
        let dg = linear_back(
            &cache.g,
            4 * d,
            self.slice(lo.w2, 4 * d * d),
            d,
            dx,
            sub(grad, lo.w2, 4 * d * d),
            None,
        );
        add_into(grad, lo.b2, dx, d);
        let dh: Vec<F> = dg.iter().zip(&cache.hpre).map(|(&g, &h)| g * gelu_grad(h)).collect();
        let db = linear_back(
            &cache.b,
            d,
            self.slice(lo.w1, 4 * d * d),
            4 * d,
            &dh,
            sub(grad, lo.w1, 4 * d * d),
            None,
        );
        add_into(grad, lo.b1, &dh, 4 * d);
        let dres = {
            let (gg, gb) = pair(grad, lo.ln2_g, lo.ln2_b, d);
            layer_norm_back(
                &db,
                &cache.ln2_xhat,
                &cache.ln2_rstd,
                d,
                self.slice(lo.ln2_g, d),
                gg,
                gb,
            )
        };
        for (a, b) in dx.iter_mut().zip(&dres) {
            *a = *a + *b;
        }

        // Attention branch.
        let datt = linear_back(
            &cache.att,
            d,
            self.slice(lo.wo, d * d),
            d,
            dx,
            sub(grad, lo.wo, d * d),
            None,
        );
        let (dq, dk, dv) = self.attention_back(cache, &datt, l);
        let mut da = linear_back(
            &cache.a,
            d,
            self.slice(lo.wq, d * d),
            d,
            &dq,
            sub(grad, lo.wq, d * d),
            None,
        );
        let dak = linear_back(
            &cache.a,
            d,
            self.slice(lo.wk, d * d),
            d,
            &dk,
            sub(grad, lo.wk, d * d),
            None,
        );
        let dav = linear_back(
            &cache.a,
            d,
            self.slice(lo.wv, d * d),
            d,
            &dv,
            sub(grad, lo.wv, d * d),
            None,
        );
        for ((a, b), c) in da.iter_mut().zip(&dak).zip(&dav) {
            *a = *a + *b + *c;
        }
        let dres = {
            let (gg, gb) = pair(grad, lo.ln1_g, lo.ln1_b, d);
            layer_norm_back(
                &da,
                &cache.ln1_xhat,
                &cache.ln1_rstd,
                d,
                self.slice(lo.ln1_g, d),
                gg,
                gb,
            )
        };
        for (a, b) in dx.iter_mut().zip(&dres) {
            *a = *a + *b;
        }
    }

    fn attention_back(&self, cache: &LayerCache<F>, datt: &[F], l: usize) -> (Vec<F>, Vec<F>, Vec<F>) {
        let (d, heads, hd) = (self.config.dim, self.config.n_heads, self.config.head_dim());
        let scale = F::one() / F::of(hd as f64).sqrt();
        let (q, k, v) = (&cache.q, &cache.k, &cache.v);
        let mut dq = vec![F::zero(); l * d];
        let mut dk = vec![F::zero(); l * d];
        let mut dv = vec![F::zero(); l * d];
        let mut dp = vec![F::zero(); l];
        for h in 0..heads {
            let off = h * hd;
            for i in 0..l {
                let p = &cache.p[(h * l + i) * l..(h * l + i) * l + i + 1];
                let dai = &datt[i * d + off..i * d + off + hd];
                let mut dot = F::zero();
                for j in 0..=i {
                    let vj = &v[j * d + off..j * d + off + hd];
                    dp[j] = dai.iter().zip(vj).map(|(&a, &b)| a * b).sum();
                    dot = dot + p[j] * dp[j];
                    for e in 0..hd {
                        dv[j * d + off + e] = dv[j * d + off + e] + p[j] * dai[e];
                    }
                }
                for j in 0..=i {
                    let ds = p[j] * (dp[j] - dot) * scale;
                    if ds == F::zero() {
                        continue;
                    }
                    for e in 0..hd {
                        dq[i * d + off + e] = dq[i * d + off + e] + ds * k[j * d + off + e];
                        dk[j * d + off + e] = dk[j * d + off + e] + ds * q[i * d + off + e];
                    }
                }
            }
        }
        (dq, dk, dv)
    }
}

fn split(seq: &[u32]) -> Result<(&[u32], &[u32]), TransformerError> {
    if seq.len() < 2 {
        return Err(TransformerError::TooShort(seq.len()));
    }
    Ok((&seq[..seq.len() - 1], &seq[1..]))
}

fn sequence_loss<F: Real>(fwd: &Forward<F>, targets: &[u32], v: usize) -> F {
    targets
        .iter()
        .enumerate()
        .map(|(i, &t)| fwd.lse[i] - fwd.logits[i * v + t as usize])
        .sum()
}

fn sub<F>(grad: &mut [F], offset: usize, len: usize) -> &mut [F] {
    &mut grad[offset..offset + len]
}

/// Two disjoint tensors of length `len`; `a` precedes `b`.
fn pair<F>(grad: &mut [F], a: usize, b: usize, len: usize) -> (&mut [F], &mut [F]) {
    let (lo, hi) = grad.split_at_mut(b);
    (&mut lo[a..a + len], &mut hi[..len])
}

/// `grad[offset..offset + width] += column sums of rows`.
fn add_into<F: Real>(grad: &mut [F], offset: usize, rows: &[F], width: usize) {
    for r in rows.chunks(width) {
        for (g, &x) in grad[offset..offset + width].iter_mut().zip(r) {
            *g = *g + x;
        }
    }
}
