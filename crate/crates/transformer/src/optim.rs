use rayon::prelude::*;

use crate::{Model, Real, TransformerError};

/// Examples whose gradients are averaged into one parameter update.
pub const ACCUMULATION_WINDOW: usize = 32;

/// AdamW with decoupled weight decay.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamW<F: Real> {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<F>,
    pub v: Vec<F>,
}

impl<F: Real> AdamW<F> {
    pub const DEFAULT_LR: f64 = 5e-4;
    pub const DEFAULT_WEIGHT_DECAY: f64 = 0.01;

    pub fn new(num_params: usize) -> Self {
        Self::with_hyper(num_params, Self::DEFAULT_LR, Self::DEFAULT_WEIGHT_DECAY)
    }

    pub fn with_hyper(num_params: usize, lr: f64, weight_decay: f64) -> Self {
        Self {
            lr,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: vec![F::zero(); num_params],
            v: vec![F::zero(); num_params],
        }
    }

    /// One update from `grad`.
    pub fn update(&mut self, params: &mut [F], grad: &[F]) {
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (F::of(self.beta1), F::of(self.beta2));
        let c1 = F::of(1.0 - self.beta1.powi(t));
        let c2 = F::of(1.0 - self.beta2.powi(t));
        let lr = F::of(self.lr);
        let decay = F::of(1.0 - self.lr * self.weight_decay);
        let eps = F::of(self.eps);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = b1 * self.m[i] + (F::one() - b1) * g;
            self.v[i] = b2 * self.v[i] + (F::one() - b2) * g * g;
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] = params[i] * decay - lr * mhat / (vhat.sqrt() + eps);
        }
    }
}

/// Gradients of the batch examples are computed in parallel and summed in
/// batch order, then averaged; one AdamW update follows. Returns the mean
/// loss. A non-finite loss leaves the model and optimizer untouched.
pub fn train_step<F: Real>(
    model: &mut Model<F>,
    opt: &mut AdamW<F>,
    batch: &[Vec<u32>],
) -> Result<F, TransformerError> {
    if batch.is_empty() {
        return Err(TransformerError::EmptyBatch);
    }
    let n = model.num_params();
    let shared: &Model<F> = model;
    let parts: Vec<(F, Vec<F>)> = batch
        .par_iter()
        .map(|seq| shared.loss_and_grad(seq))
        .collect::<Result<_, _>>()?;
    let mut grad = vec![F::zero(); n];
    let mut total = F::zero();
    for (loss, g) in &parts {
        total = total + *loss;
        for (a, &b) in grad.iter_mut().zip(g) {
            *a = *a + b;
        }
    }
    let count = F::of(batch.len() as f64);
    let mean = total / count;
    if !mean.is_finite() {
        return Err(TransformerError::NonFinite {
            step: opt.step + 1,
            loss: mean.to_f64().unwrap_or(f64::NAN),
        });
    }
    for g in grad.iter_mut() {
        *g = *g / count;
    }
    opt.update(model.params_mut(), &grad);
    Ok(mean)
}
