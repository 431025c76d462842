//! The subspace-inference decoder: a fully connected network with layer
//! normalization and GELU activations, with hand-written forward and
//! backward passes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numkernel::{CMat, C64};
use crate::rng;

/// Variance floor inside layer normalization. Small enough that normalized
/// activations have variance 1 to well below 1e-6.
pub const LN_EPS: f64 = 1e-8;

/// Dense real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMat {
    pub data: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl RealMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMat {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.cols, x.len());
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out[i] = row.iter().zip(x.iter()).map(|(w, v)| w * v).sum();
        }
        out
    }

    /// `Wᵀ·g` (for input gradients).
    pub fn matvec_t(&self, g: &[f64]) -> Vec<f64> {
        debug_assert_eq!(self.rows, g.len());
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let gi = g[i];
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, w) in out.iter_mut().zip(row.iter()) {
                *o += w * gi;
            }
        }
        out
    }
}

/// GELU activation `x·Φ(x)` with the exact normal CDF.
pub fn gelu(x: f64) -> f64 {
    x * normal_cdf(x)
}

/// d/dx GELU = Φ(x) + x·φ(x).
pub fn gelu_deriv(x: f64) -> f64 {
    normal_cdf(x) + x * normal_pdf(x)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// One hidden block: linear map, layer norm, affine, GELU.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseNormLayer {
    pub w: RealMat,
    pub b: Vec<f64>,
    pub ln_scale: Vec<f64>,
    pub ln_shift: Vec<f64>,
}

/// Decoder mapping a length-K normalized fingerprint to the raw real/imag
/// parts of an `n_t × q` complex basis.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub n_t: usize,
    pub k: usize,
    pub q: usize,
    pub depth: usize,
    pub width: usize,
    pub layers: Vec<DenseNormLayer>,
    pub out_w: RealMat,
    pub out_b: Vec<f64>,
}

impl MlpModel {
    pub fn out_dim(&self) -> usize {
        2 * self.n_t * self.q
    }

    pub fn layer_in_dim(&self, d: usize) -> usize {
        if d == 0 {
            self.k
        } else {
            self.width
        }
    }

    /// Variance-scaled symmetric uniform init (Glorot) for the linear maps,
    /// identity layer norms, zero biases.
    pub fn init(n_t: usize, k: usize, q: usize, depth: usize, width: usize, seed: u64) -> Self {
        assert!(depth >= 1 && width >= 1 && n_t >= 1 && k >= 1 && q >= 1);
        let mut r = rng::seeded(seed);
        let glorot = |rows: usize, cols: usize, r: &mut rand_chacha::ChaCha8Rng| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            let mut m = RealMat::zeros(rows, cols);
            for v in &mut m.data {
                *v = r.gen_range(-a..a);
            }
            m
        };
        let mut layers = Vec::with_capacity(depth);
        for d in 0..depth {
            let in_dim = if d == 0 { k } else { width };
            layers.push(DenseNormLayer {
                w: glorot(width, in_dim, &mut r),
                b: vec![0.0; width],
                ln_scale: vec![1.0; width],
                ln_shift: vec![0.0; width],
            });
        }
        let out_dim = 2 * n_t * q;
        let out_w = glorot(out_dim, width, &mut r);
        MlpModel {
            n_t,
            k,
            q,
            depth,
            width,
            layers,
            out_w,
            out_b: vec![0.0; out_dim],
        }
    }
}

/// Intermediate values of one hidden block, kept for the backward pass.
#[derive(Clone, Debug)]
pub struct LayerCache {
    pub input: Vec<f64>,
    pub pre_ln: Vec<f64>,
    pub xhat: Vec<f64>,
    pub inv_std: f64,
    pub affine: Vec<f64>,
    pub output: Vec<f64>,
}

fn layer_forward(layer: &DenseNormLayer, input: &[f64]) -> LayerCache {
    let pre_ln = {
        let mut u = layer.w.matvec(input);
        for (ui, bi) in u.iter_mut().zip(layer.b.iter()) {
            *ui += bi;
        }
        u
    };
    let n = pre_ln.len() as f64;
    let mean = pre_ln.iter().sum::<f64>() / n;
    let var = pre_ln.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / n;
    let inv_std = 1.0 / (var + LN_EPS).sqrt();
    let xhat: Vec<f64> = pre_ln.iter().map(|u| (u - mean) * inv_std).collect();
    let affine: Vec<f64> = xhat
        .iter()
        .zip(layer.ln_scale.iter().zip(layer.ln_shift.iter()))
        .map(|(x, (g, s))| g * x + s)
        .collect();
    let output: Vec<f64> = affine.iter().map(|&y| gelu(y)).collect();
    LayerCache {
        input: input.to_vec(),
        pre_ln,
        xhat,
        inv_std,
        affine,
        output,
    }
}

/// Full decoder forward pass; returns per-layer caches and the raw output.
pub fn mlp_forward(m: &MlpModel, input: &[f64]) -> (Vec<LayerCache>, Vec<f64>) {
    debug_assert_eq!(input.len(), m.k);
    let mut caches = Vec::with_capacity(m.depth);
    let mut cur = input.to_vec();
    for layer in &m.layers {
        let cache = layer_forward(layer, &cur);
        cur = cache.output.clone();
        caches.push(cache);
    }
    let mut out = m.out_w.matvec(&cur);
    for (o, b) in out.iter_mut().zip(m.out_b.iter()) {
        *o += b;
    }
    (caches, out)
}

/// Gradients of one hidden block, same shapes as the parameters.
pub struct LayerGrads {
    pub w: RealMat,
    pub b: Vec<f64>,
    pub ln_scale: Vec<f64>,
    pub ln_shift: Vec<f64>,
}

fn layer_backward(
    layer: &DenseNormLayer,
    cache: &LayerCache,
    d_output: &[f64],
    grads: &mut LayerGrads,
) -> Vec<f64> {
    let n = cache.pre_ln.len();
    let nf = n as f64;
    // Through GELU.
    let d_affine: Vec<f64> = d_output
        .iter()
        .zip(cache.affine.iter())
        .map(|(g, &y)| g * gelu_deriv(y))
        .collect();
    // Through the affine LN terms.
    let mut d_xhat = vec![0.0; n];
    for i in 0..n {
        grads.ln_scale[i] += d_affine[i] * cache.xhat[i];
        grads.ln_shift[i] += d_affine[i];
        d_xhat[i] = d_affine[i] * layer.ln_scale[i];
    }
    // Through the normalization.
    let mean_dx = d_xhat.iter().sum::<f64>() / nf;
    let mean_dx_xhat = d_xhat
        .iter()
        .zip(cache.xhat.iter())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / nf;
    let d_pre: Vec<f64> = (0..n)
        .map(|i| cache.inv_std * (d_xhat[i] - mean_dx - cache.xhat[i] * mean_dx_xhat))
        .collect();
    // Through the linear map.
    for i in 0..n {
        grads.b[i] += d_pre[i];
        let gi = d_pre[i];
        for j in 0..cache.input.len() {
            *grads.w.at_mut(i, j) += gi * cache.input[j];
        }
    }
    layer.w.matvec_t(&d_pre)
}

/// Decoder gradients, same shapes as [`MlpModel`].
pub struct MlpGrads {
    pub layers: Vec<LayerGrads>,
    pub out_w: RealMat,
    pub out_b: Vec<f64>,
}

impl MlpGrads {
    pub fn zeros(m: &MlpModel) -> Self {
        MlpGrads {
            layers: (0..m.depth)
                .map(|d| LayerGrads {
                    w: RealMat::zeros(m.width, m.layer_in_dim(d)),
                    b: vec![0.0; m.width],
                    ln_scale: vec![0.0; m.width],
                    ln_shift: vec![0.0; m.width],
                })
                .collect(),
            out_w: RealMat::zeros(m.out_dim(), m.width),
            out_b: vec![0.0; m.out_dim()],
        }
    }
}

/// Backward through the whole decoder; accumulates into `grads` and returns
/// the gradient with respect to the input fingerprint.
pub fn mlp_backward(
    m: &MlpModel,
    caches: &[LayerCache],
    d_out: &[f64],
    grads: &mut MlpGrads,
) -> Vec<f64> {
    let last = caches
        .last()
        .map(|c| c.output.as_slice())
        .expect("depth >= 1");
    for i in 0..m.out_dim() {
        grads.out_b[i] += d_out[i];
        let gi = d_out[i];
        for j in 0..m.width {
            *grads.out_w.at_mut(i, j) += gi * last[j];
        }
    }
    let mut d_cur = m.out_w.matvec_t(d_out);
    for d in (0..m.depth).rev() {
        d_cur = layer_backward(&m.layers[d], &caches[d], &d_cur, &mut grads.layers[d]);
    }
    d_cur
}

/// Reshape the raw decoder output into a complex basis: the first `n_t·q`
/// entries are the real parts (row-major), the second half the imaginary
/// parts.
pub fn reshape_to_basis(out: &[f64], n_t: usize, q: usize) -> CMat {
    debug_assert_eq!(out.len(), 2 * n_t * q);
    let half = n_t * q;
    CMat::from_fn(n_t, q, |i, j| {
        let idx = i * q + j;
        C64::new(out[idx], out[half + idx])
    })
}

/// Run the decoder on a normalized fingerprint and return the raw complex
/// basis, checking against non-finite activations.
pub fn decode(m: &MlpModel, fingerprint: &[f64]) -> Result<CMat> {
    if fingerprint.len() != m.k {
        return Err(Error::dim("decode", fingerprint.len(), m.k));
    }
    let (_, out) = mlp_forward(m, fingerprint);
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericFailure("non-finite decoder activation".into()));
    }
    Ok(reshape_to_basis(&out, m.n_t, m.q))
}
