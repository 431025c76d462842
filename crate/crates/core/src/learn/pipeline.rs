//! The differentiable probing → fingerprint → decoder → projection pipeline.
//!
//! Forward: `r⁰ = 10log10(P_SSB|Bᴴh|²)` (floored), optional dB-domain noise,
//! per-fingerprint standardization, the MLP decoder, and a ridge-regularized
//! projection loss `−η` on the raw decoded basis. Backward produces exact
//! reverse-mode gradients for every real parameter; the complex probing
//! matrix is handled as independent real/imaginary parts, and the noise
//! layer is an additive constant the gradient passes through.

use crate::error::{Error, Result};
use crate::learn::mlp::{
    mlp_backward, mlp_forward, reshape_to_basis, LayerCache, MlpGrads, MlpModel,
};
use crate::numkernel::{
    cholesky, cholesky_solve, matmul_herm, matvec, matvec_herm, CMat, CVec, C64,
};
use crate::probing::DB_FLOOR;

/// Where each parameter tensor lives inside the flat parameter vector.
///
/// Order: probing matrix (column-major, re/im interleaved), then per hidden
/// layer `w, b, ln_scale, ln_shift`, then the output layer `w, b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    pub n_t: usize,
    pub k: usize,
    pub q: usize,
    pub depth: usize,
    pub width: usize,
}

impl ParamLayout {
    pub fn for_model(m: &MlpModel) -> Self {
        ParamLayout {
            n_t: m.n_t,
            k: m.k,
            q: m.q,
            depth: m.depth,
            width: m.width,
        }
    }

    pub fn probing_len(&self) -> usize {
        2 * self.n_t * self.k
    }

    fn layer_in_dim(&self, d: usize) -> usize {
        if d == 0 {
            self.k
        } else {
            self.width
        }
    }

    fn layer_len(&self, d: usize) -> usize {
        self.width * self.layer_in_dim(d) + 3 * self.width
    }

    pub fn out_dim(&self) -> usize {
        2 * self.n_t * self.q
    }

    pub fn layer_offset(&self, d: usize) -> usize {
        let mut off = self.probing_len();
        for i in 0..d {
            off += self.layer_len(i);
        }
        off
    }

    pub fn out_offset(&self) -> usize {
        self.layer_offset(self.depth)
    }

    pub fn total(&self) -> usize {
        self.out_offset() + self.out_dim() * self.width + self.out_dim()
    }

    /// Flatten the probing matrix and decoder into one parameter vector.
    pub fn pack(&self, probing: &CMat, m: &MlpModel) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.total());
        for j in 0..self.k {
            for i in 0..self.n_t {
                v.push(probing[(i, j)].re);
                v.push(probing[(i, j)].im);
            }
        }
        for layer in &m.layers {
            v.extend_from_slice(&layer.w.data);
            v.extend_from_slice(&layer.b);
            v.extend_from_slice(&layer.ln_scale);
            v.extend_from_slice(&layer.ln_shift);
        }
        v.extend_from_slice(&m.out_w.data);
        v.extend_from_slice(&m.out_b);
        debug_assert_eq!(v.len(), self.total());
        v
    }

    /// Rebuild the probing matrix and decoder from a flat parameter vector.
    pub fn unpack(&self, v: &[f64]) -> (CMat, MlpModel) {
        assert_eq!(v.len(), self.total());
        let mut probing = CMat::zeros(self.n_t, self.k);
        let mut idx = 0;
        for j in 0..self.k {
            for i in 0..self.n_t {
                probing[(i, j)] = C64::new(v[idx], v[idx + 1]);
                idx += 2;
            }
        }
        let mut model = MlpModel::init(self.n_t, self.k, self.q, self.depth, self.width, 0);
        for d in 0..self.depth {
            let w_len = self.width * self.layer_in_dim(d);
            model.layers[d].w.data.copy_from_slice(&v[idx..idx + w_len]);
            idx += w_len;
            model.layers[d].b.copy_from_slice(&v[idx..idx + self.width]);
            idx += self.width;
            model.layers[d]
                .ln_scale
                .copy_from_slice(&v[idx..idx + self.width]);
            idx += self.width;
            model.layers[d]
                .ln_shift
                .copy_from_slice(&v[idx..idx + self.width]);
            idx += self.width;
        }
        let ow_len = self.out_dim() * self.width;
        model.out_w.data.copy_from_slice(&v[idx..idx + ow_len]);
        idx += ow_len;
        model.out_b.copy_from_slice(&v[idx..idx + self.out_dim()]);
        idx += self.out_dim();
        debug_assert_eq!(idx, self.total());
        (probing, model)
    }
}

/// Cached intermediates of the ridge projection `P = C(CᴴC + εI)⁻¹Cᴴ`.
pub struct ProjCache {
    pub chol: CMat,
    pub coeff: CVec,
    pub recon: CVec,
    pub eta: f64,
}

/// Projection-efficiency loss on a raw (not yet orthonormal) basis.
///
/// `η = ‖C(CᴴC + εI)⁻¹Cᴴh‖²/‖h‖²`, `loss = −η`. Smooth in `C` for ε > 0 and
/// invariant to unitary right-multiplication of the basis; coincides with
/// the exact projector as ε → 0.
pub fn subspace_loss(c_raw: &CMat, h: &CVec, ridge_eps: f64) -> Result<(f64, f64)> {
    let cache = proj_forward(c_raw, h, ridge_eps)?;
    Ok((-cache.eta, cache.eta))
}

pub fn proj_forward(c: &CMat, h: &CVec, ridge_eps: f64) -> Result<ProjCache> {
    let h_norm_sq = h.norm_sq();
    if h_norm_sq == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let mut gram = matmul_herm(c, c)?;
    for i in 0..gram.rows() {
        gram[(i, i)] += C64::new(ridge_eps, 0.0);
    }
    let chol = cholesky(&gram)?;
    let rhs = matvec_herm(c, h)?;
    let coeff = cholesky_solve(&chol, &rhs);
    let recon = matvec(c, &coeff)?;
    let eta = recon.norm_sq() / h_norm_sq;
    Ok(ProjCache {
        chol,
        coeff,
        recon,
        eta,
    })
}

/// Cotangent of the raw basis for a real function with `∂f/∂η = d_eta`.
///
/// With the convention `df = 2·Re tr(C̄ᴴ dC)`, the chain through
/// `r = C·(CᴴC+εI)⁻¹Cᴴh` gives
/// `C̄ = r̄yᴴ + hāᴴ − C(āyᴴ + yāᴴ)` where `r̄ = (d_eta/‖h‖²)·r`,
/// `ȳ = Cᴴr̄`, `ā = (CᴴC+εI)⁻¹ȳ`. Real-part gradients are `2Re(C̄)`,
/// imaginary-part `2Im(C̄)`.
pub fn proj_backward(cache: &ProjCache, c: &CMat, h: &CVec, d_eta: f64) -> CMat {
    let s = d_eta / h.norm_sq();
    let r_bar = cache.recon.scale(C64::new(s, 0.0));
    let y_bar = matvec_herm(c, &r_bar).expect("shape");
    let a_bar = cholesky_solve(&cache.chol, &y_bar);
    let (n, q) = (c.rows(), c.cols());
    let mut c_bar = CMat::zeros(n, q);
    for i in 0..n {
        for j in 0..q {
            c_bar[(i, j)] = r_bar[i] * cache.coeff[j].conj() + h[i] * a_bar[j].conj();
        }
    }
    // − C(āyᴴ + yāᴴ)
    for i in 0..n {
        for j in 0..q {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..q {
                acc += c[(i, t)]
                    * (a_bar[t] * cache.coeff[j].conj() + cache.coeff[t] * a_bar[j].conj());
            }
            c_bar[(i, j)] -= acc;
        }
    }
    c_bar
}

/// Everything the backward pass needs from one sample's forward pass.
pub struct SampleForward {
    pub z: CVec,
    pub powers: Vec<f64>,
    pub fingerprint_db: Vec<f64>,
    pub floored: Vec<bool>,
    pub observed: Vec<f64>,
    pub norm_mean: f64,
    pub norm_sigma: f64,
    pub norm_denom: f64,
    pub normalized: Vec<f64>,
    pub layer_caches: Vec<LayerCache>,
    pub raw_out: Vec<f64>,
    pub c_raw: CMat,
    pub proj: ProjCache,
}

impl SampleForward {
    pub fn eta(&self) -> f64 {
        self.proj.eta
    }
}

/// Forward pass of the full pipeline on one channel.
///
/// `noise` is the per-beam dB perturbation (already drawn); `None` runs the
/// noise-free path used for gradient checking.
pub fn forward_sample(
    probing: &CMat,
    model: &MlpModel,
    h: &CVec,
    noise: Option<&[f64]>,
    p_ssb: f64,
    ridge_eps: f64,
) -> Result<SampleForward> {
    if h.norm_sq() == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let z = matvec_herm(probing, h)?;
    let powers: Vec<f64> = z.entries().iter().map(|zk| p_ssb * zk.norm_sqr()).collect();
    let mut fingerprint_db = Vec::with_capacity(powers.len());
    let mut floored = Vec::with_capacity(powers.len());
    for &p in &powers {
        let db = if p > 0.0 { 10.0 * p.log10() } else { f64::NEG_INFINITY };
        if db > DB_FLOOR {
            fingerprint_db.push(db);
            floored.push(false);
        } else {
            fingerprint_db.push(DB_FLOOR);
            floored.push(true);
        }
    }
    let observed: Vec<f64> = match noise {
        Some(n) => {
            debug_assert_eq!(n.len(), fingerprint_db.len());
            fingerprint_db.iter().zip(n.iter()).map(|(a, b)| a + b).collect()
        }
        None => fingerprint_db.clone(),
    };
    let kf = observed.len() as f64;
    let norm_mean = observed.iter().sum::<f64>() / kf;
    let norm_sigma = (observed.iter().map(|v| (v - norm_mean).powi(2)).sum::<f64>() / kf).sqrt();
    let norm_denom = norm_sigma + 1e-6;
    let normalized: Vec<f64> = observed.iter().map(|v| (v - norm_mean) / norm_denom).collect();
    if !normalized.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericFailure("non-finite fingerprint".into()));
    }
    let (layer_caches, raw_out) = mlp_forward(model, &normalized);
    if !raw_out.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericFailure("non-finite decoder activation".into()));
    }
    let c_raw = reshape_to_basis(&raw_out, model.n_t, model.q);
    let proj = proj_forward(&c_raw, h, ridge_eps)?;
    Ok(SampleForward {
        z,
        powers,
        fingerprint_db,
        floored,
        observed,
        norm_mean,
        norm_sigma,
        norm_denom,
        normalized,
        layer_caches,
        raw_out,
        c_raw,
        proj,
    })
}

/// Backward pass of one sample: adds `d_eta · ∂η/∂params` into the flat
/// gradient vector (layout order).
pub fn backward_sample(
    fw: &SampleForward,
    model: &MlpModel,
    h: &CVec,
    d_eta: f64,
    layout: &ParamLayout,
    grad: &mut [f64],
) {
    // Projection → raw decoder output.
    let c_bar = proj_backward(&fw.proj, &fw.c_raw, h, d_eta);
    let half = layout.n_t * layout.q;
    let mut d_raw = vec![0.0; layout.out_dim()];
    for i in 0..layout.n_t {
        for j in 0..layout.q {
            let idx = i * layout.q + j;
            d_raw[idx] = 2.0 * c_bar[(i, j)].re;
            d_raw[half + idx] = 2.0 * c_bar[(i, j)].im;
        }
    }

    // Decoder → normalized fingerprint.
    let mut mlp_grads = MlpGrads::zeros(model);
    let d_normalized = mlp_backward(model, &fw.layer_caches, &d_raw, &mut mlp_grads);

    // Scatter decoder grads into the flat vector.
    let mut off = layout.layer_offset(0);
    for d in 0..layout.depth {
        let lg = &mlp_grads.layers[d];
        let w_len = lg.w.data.len();
        for (dst, src) in grad[off..off + w_len].iter_mut().zip(lg.w.data.iter()) {
            *dst += src;
        }
        off += w_len;
        for (dst, src) in grad[off..off + layout.width].iter_mut().zip(lg.b.iter()) {
            *dst += src;
        }
        off += layout.width;
        for (dst, src) in grad[off..off + layout.width]
            .iter_mut()
            .zip(lg.ln_scale.iter())
        {
            *dst += src;
        }
        off += layout.width;
        for (dst, src) in grad[off..off + layout.width]
            .iter_mut()
            .zip(lg.ln_shift.iter())
        {
            *dst += src;
        }
        off += layout.width;
    }
    debug_assert_eq!(off, layout.out_offset());
    for (dst, src) in grad[off..off + mlp_grads.out_w.data.len()]
        .iter_mut()
        .zip(mlp_grads.out_w.data.iter())
    {
        *dst += src;
    }
    off += mlp_grads.out_w.data.len();
    for (dst, src) in grad[off..off + layout.out_dim()]
        .iter_mut()
        .zip(mlp_grads.out_b.iter())
    {
        *dst += src;
    }

    // Standardization → observed dB fingerprint. The additive noise layer is
    // a constant, so this is also the gradient at the floored dB values.
    let k = fw.observed.len();
    let kf = k as f64;
    let mean_dv = d_normalized.iter().sum::<f64>() / kf;
    let proj_dv = d_normalized
        .iter()
        .zip(fw.observed.iter())
        .map(|(dv, r)| dv * (r - fw.norm_mean))
        .sum::<f64>()
        / kf;
    let sigma_term = if fw.norm_sigma > 1e-300 {
        proj_dv / (fw.norm_sigma * fw.norm_denom * fw.norm_denom)
    } else {
        0.0
    };
    let d_db: Vec<f64> = (0..k)
        .map(|i| {
            (d_normalized[i] - mean_dv) / fw.norm_denom
                - (fw.observed[i] - fw.norm_mean) * sigma_term
        })
        .collect();

    // dB encode → probing matrix (re/im parts). Floored entries pass no
    // gradient.
    let ln10 = std::f64::consts::LN_10;
    for kk in 0..k {
        if fw.floored[kk] || fw.powers[kk] <= 0.0 {
            continue;
        }
        // d(dB)/d(p) = 10/(ln10·p); d(p)/d(zr) = p_ssb·2·zr, and p already
        // includes p_ssb, so d(dB)/d(zr) = 20·zr/(ln10·|z|²).
        let zsq = fw.z[kk].norm_sqr();
        if zsq <= 0.0 {
            continue;
        }
        let base = d_db[kk] * 20.0 / (ln10 * zsq);
        let gzr = base * fw.z[kk].re;
        let gzi = base * fw.z[kk].im;
        for i in 0..layout.n_t {
            let hr = h[i].re;
            let hi = h[i].im;
            let slot = 2 * (kk * layout.n_t + i);
            grad[slot] += gzr * hr + gzi * hi;
            grad[slot + 1] += gzr * hi - gzi * hr;
        }
    }
}
