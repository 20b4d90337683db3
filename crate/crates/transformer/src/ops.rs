//! Row-major dense kernels shared by training and sampling.

use crate::Real;

pub(crate) const LN_EPS: f64 = 1e-5;

/// `y = x W (+ b)` for `n` rows of width `din`, `W` of shape `din x dout`.
pub(crate) fn linear<F: Real>(x: &[F], din: usize, w: &[F], dout: usize, bias: Option<&[F]>) -> Vec<F> {
    let n = x.len() / din;
    let mut y = vec![F::zero(); n * dout];
    for r in 0..n {
        let yr = &mut y[r * dout..(r + 1) * dout];
        if let Some(b) = bias {
            yr.copy_from_slice(b);
        }
        for (i, &xi) in x[r * din..(r + 1) * din].iter().enumerate() {
            if xi == F::zero() {
                continue;
            }
            for (yo, &wo) in yr.iter_mut().zip(&w[i * dout..(i + 1) * dout]) {
                *yo = *yo + xi * wo;
            }
        }
    }
    y
}

/// Accumulates `dW += x^T dy` (and `db += sum dy`) and returns `dx = dy W^T`.
pub(crate) fn linear_back<F: Real>(
    x: &[F],
    din: usize,
    w: &[F],
    dout: usize,
    dy: &[F],
    dw: &mut [F],
    db: Option<&mut [F]>,
) -> Vec<F> {
    let n = x.len() / din;
    let mut dx = vec![F::zero(); n * din];
    for r in 0..n {
        let dyr = &dy[r * dout..(r + 1) * dout];
        let xr = &x[r * din..(r + 1) * din];
        let dxr = &mut dx[r * din..(r + 1) * din];
        for i in 0..din {
            let wi = &w[i * dout..(i + 1) * dout];
            let dwi = &mut dw[i * dout..(i + 1) * dout];
            let xi = xr[i];
            let mut acc = F::zero();
            for o in 0..dout {
                acc = acc + dyr[o] * wi[o];
                dwi[o] = dwi[o] + xi * dyr[o];
            }
            dxr[i] = acc;
        }
    }
    if let Some(db) = db {
        for r in 0..n {
            for (b, &g) in db.iter_mut().zip(&dy[r * dout..(r + 1) * dout]) {
                *b = *b + g;
            }
        }
    }
    dx
}

/// Layer normalization of each row; returns `(y, xhat, rstd)`.
pub(crate) fn layer_norm<F: Real>(x: &[F], d: usize, gain: &[F], shift: &[F]) -> (Vec<F>, Vec<F>, Vec<F>) {
    let n = x.len() / d;
    let df = F::of(d as f64);
    let mut y = vec![F::zero(); x.len()];
    let mut xhat = vec![F::zero(); x.len()];
    let mut rstd = vec![F::zero(); n];
    for r in 0..n {
        let row = &x[r * d..(r + 1) * d];
        let mean = row.iter().copied().sum::<F>() / df;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>() / df;
        let rs = F::one() / (var + F::of(LN_EPS)).sqrt();
        rstd[r] = rs;
        for i in 0..d {
            let h = (row[i] - mean) * rs;
            xhat[r * d + i] = h;
            y[r * d + i] = h * gain[i] + shift[i];
        }
    }
    (y, xhat, rstd)
}

pub(crate) fn layer_norm_back<F: Real>(
    dy: &[F],
    xhat: &[F],
    rstd: &[F],
    d: usize,
    gain: &[F],
    dgain: &mut [F],
    dshift: &mut [F],
) -> Vec<F> {
    let n = dy.len() / d;
    let df = F::of(d as f64);
    let mut dx = vec![F::zero(); dy.len()];
    for r in 0..n {
        let mut mean_g = F::zero();
        let mut mean_gx = F::zero();
        for i in 0..d {
            let g = dy[r * d + i];
            let h = xhat[r * d + i];
            dgain[i] = dgain[i] + g * h;
            dshift[i] = dshift[i] + g;
            let gh = g * gain[i];
            mean_g = mean_g + gh;
            mean_gx = mean_gx + gh * h;
        }
        mean_g = mean_g / df;
        mean_gx = mean_gx / df;
        for i in 0..d {
            let gh = dy[r * d + i] * gain[i];
            dx[r * d + i] = rstd[r] * (gh - mean_g - xhat[r * d + i] * mean_gx);
        }
    }
    dx
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
const GELU_A: f64 = 0.044_715;

/// GELU, tanh approximation.
pub(crate) fn gelu<F: Real>(x: F) -> F {
    let half = F::of(0.5);
    half * x * (F::one() + (F::of(GELU_C) * (x + F::of(GELU_A) * x * x * x)).tanh())
}

pub(crate) fn gelu_grad<F: Real>(x: F) -> F {
    let half = F::of(0.5);
    let t = (F::of(GELU_C) * (x + F::of(GELU_A) * x * x * x)).tanh();
    let inner = F::of(GELU_C) * (F::one() + F::of(3.0 * GELU_A) * x * x);
    half * (F::one() + t) + half * x * (F::one() - t * t) * inner
}

/// In-place softmax; returns the log of the normalizer (after the max shift).
pub(crate) fn softmax<F: Real>(row: &mut [F]) -> F {
    let max = row.iter().copied().fold(F::neg_infinity(), F::max);
    let mut sum = F::zero();
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum = sum + *v;
    }
    for v in row.iter_mut() {
        *v = *v / sum;
    }
    max + sum.ln()
}
