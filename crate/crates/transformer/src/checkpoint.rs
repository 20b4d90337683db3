//! Checkpoint container: three text header lines (element type, model
//! config, optimizer state) and a `params <count>` line, followed by the
//! parameters, first moments and second moments as little-endian floats.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::{AdamW, Model, ModelConfig, Real, TransformerError};

const MAGIC: &str = "patternboost-model v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<F: Real> {
    pub model: Model<F>,
    pub opt: AdamW<F>,
}

impl<F: Real> Checkpoint<F> {
    pub fn to_bytes(&self) -> Vec<u8> {
        encode(&self.model, &self.opt)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, TransformerError> {
        let bad = |m: String| TransformerError::Checkpoint(m);
        let mut rest = bytes;
        let mut lines = Vec::new();
        for _ in 0..4 {
            let nl = rest
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| bad("truncated header".into()))?;
            lines.push(std::str::from_utf8(&rest[..nl]).map_err(|_| bad("header is not UTF-8".into()))?);
            rest = &rest[nl + 1..];
        }
        let expected = format!("{MAGIC} {}", F::NAME);
        if lines[0] != expected {
            return Err(bad(format!("expected header {expected:?}, found {:?}", lines[0])));
        }
        let fields = |line: &str| -> HashMap<String, String> {
            line.split_whitespace()
                .filter_map(|kv| kv.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        };
        let model_fields = fields(lines[1]);
        let opt_fields = fields(lines[2]);
        fn get<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<T, TransformerError> {
            map.get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| TransformerError::Checkpoint(format!("missing or malformed `{key}`")))
        }
        let config = ModelConfig {
            n_layers: get(&model_fields, "n_layers")?,
            dim: get(&model_fields, "dim")?,
            n_heads: get(&model_fields, "n_heads")?,
            vocab_size: get(&model_fields, "vocab_size")?,
            max_len: get(&model_fields, "max_len")?,
            seed: get(&model_fields, "seed")?,
        };
        let count: usize = lines[3]
            .strip_prefix("params ")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| bad("missing `params` line".into()))?;
        if rest.len() != 3 * count * F::BYTES {
            return Err(bad(format!(
                "expected {} bytes of tensors, found {}",
                3 * count * F::BYTES,
                rest.len()
            )));
        }
        let mut tensors = rest
            .chunks(count * F::BYTES.max(1))
            .map(|chunk| chunk.chunks(F::BYTES).map(F::get_le).collect::<Vec<F>>());
        let (params, m, v) = if count == 0 {
            (Vec::new(), Vec::new(), Vec::new())
        } else {
            let mut next = || tensors.next().expect("three tensors of equal length");
            (next(), next(), next())
        };
        let model = Model::from_params(config, params)?;
        let opt = AdamW {
            lr: get(&opt_fields, "lr")?,
            weight_decay: get(&opt_fields, "weight_decay")?,
            beta1: get(&opt_fields, "beta1")?,
            beta2: get(&opt_fields, "beta2")?,
            eps: get(&opt_fields, "eps")?,
            step: get(&opt_fields, "step")?,
            m,
            v,
        };
        Ok(Self { model, opt })
    }
}

fn encode<F: Real>(model: &Model<F>, opt: &AdamW<F>) -> Vec<u8> {
    let c = model.config();
    let mut out = format!(
        "{MAGIC} {}\nn_layers={} dim={} n_heads={} vocab_size={} max_len={} seed={}\n\
         lr={} weight_decay={} beta1={} beta2={} eps={} step={}\nparams {}\n",
        F::NAME,
        c.n_layers,
        c.dim,
        c.n_heads,
        c.vocab_size,
        c.max_len,
        c.seed,
        opt.lr,
        opt.weight_decay,
        opt.beta1,
        opt.beta2,
        opt.eps,
        opt.step,
        model.num_params()
    )
    .into_bytes();
    for tensor in [model.params(), &opt.m[..], &opt.v[..]] {
        for &x in tensor {
            x.put_le(&mut out);
        }
    }
    out
}

pub fn save_checkpoint<F: Real>(
    path: impl AsRef<Path>,
    model: &Model<F>,
    opt: &AdamW<F>,
) -> Result<(), TransformerError> {
    fs::write(path, encode(model, opt))?;
    Ok(())
}

pub fn load_checkpoint<F: Real>(path: impl AsRef<Path>) -> Result<Checkpoint<F>, TransformerError> {
    Checkpoint::from_bytes(&fs::read(path)?)
}
