//! Offline joint training of the probing codebook and the subspace-inference
//! decoder, and the online deployment path.
//!
//! Each iteration samples a mini-batch, generates probing fingerprints,
//! contaminates them in dB, decodes a subspace, scores the projection
//! efficiency loss, and takes a gradient step on all parameters; the probing
//! columns are renormalized to unit power after every update (projected
//! step). Deployment sweeps the learned codebook, decodes the noisy
//! fingerprint, orthonormalizes the basis exactly, and runs the subspace
//! feedback scheme.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::channel::ChannelDataset;
use crate::error::{Error, Result};
use crate::learn::mlp::{decode, MlpModel};
use crate::learn::pipeline::{backward_sample, forward_sample, ParamLayout};
use crate::numkernel::{orthonormalize, CMat, CVec, DEFAULT_RANK_TOL};
use crate::probing::{uniform_sweep_codebook, Codebook, CodebookKind, NoiseModel};
use crate::rng;
use crate::schemes::{proposed, FeedbackOutcome, LinkParams, OutcomeFlag, Subspace};

/// The trainable probing matrix, columns kept at unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainableProbing {
    pub beams: CMat,
}

impl TrainableProbing {
    /// Initialize as a K-column uniform DFT sweep.
    pub fn dft_init(n_t: usize, k: usize) -> Self {
        TrainableProbing {
            beams: uniform_sweep_codebook(n_t, k).beams,
        }
    }

    pub fn from_codebook(book: &Codebook) -> Self {
        TrainableProbing {
            beams: book.beams.clone(),
        }
    }

    pub fn as_codebook(&self) -> Result<Codebook> {
        Codebook::new(self.beams.clone(), CodebookKind::Learned)
    }

    /// Renormalize every column to unit norm (the projected-SGD step).
    ///
    /// Columns already unit-norm to machine precision are left untouched so
    /// a zero-size update is bit-exact.
    pub fn renormalize(&mut self) {
        for j in 0..self.beams.cols() {
            let n = self.beams.col(j).norm();
            if n > 0.0 && (n - 1.0).abs() > 1e-14 {
                for i in 0..self.beams.rows() {
                    self.beams[(i, j)] /= n;
                }
            }
        }
    }

    pub fn max_column_norm_deviation(&self) -> f64 {
        (0..self.beams.cols())
            .map(|j| (self.beams.col(j).norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam_default() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Step size β of the update rule.
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub noise: NoiseModel,
    pub seed: u64,
    pub ridge_eps: f64,
    /// Fraction of the provided samples held out (from the end, by index)
    /// for validation.
    pub val_fraction: f64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument(
                "epochs and batch size must be >= 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0) && !matches!(self.optimizer, Optimizer::Sgd) {
            return Err(Error::InvalidArgument("step size must be > 0".into()));
        }
        if self.learning_rate < 0.0 {
            return Err(Error::InvalidArgument("step size must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::InvalidArgument(
                "val_fraction must be in [0, 1)".into(),
            ));
        }
        self.noise.validate()
    }
}

/// Decoder architecture knobs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MlpArch {
    pub k: usize,
    pub q: usize,
    pub depth: usize,
    pub width: usize,
}

/// Fix the probing matrix or train it jointly.
#[derive(Clone, Debug)]
pub enum ProbingMode {
    Learned,
    Fixed(Codebook),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    pub train_eta: f64,
    pub val_eta: f64,
    pub grad_norm: f64,
    pub wall_ms: f64,
}

/// Per-epoch training history plus the pre-training baseline.
#[derive(Clone, Debug, Default)]
pub struct TrainTrace {
    pub initial_train_eta: f64,
    pub initial_val_eta: f64,
    pub epochs: Vec<EpochStats>,
}

pub struct TrainedModel {
    pub probing: TrainableProbing,
    pub mlp: MlpModel,
    pub trace: TrainTrace,
}

/// Training aborted (diverged); carries the trace up to the failure.
#[derive(Debug)]
pub struct TrainAbort {
    pub error: Error,
    pub trace: TrainTrace,
}

impl std::fmt::Display for TrainAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "training aborted after {} epochs: {}",
            self.trace.epochs.len(),
            self.error
        )
    }
}

impl std::error::Error for TrainAbort {}

/// Noise-free dB fingerprint of the probing stage (the training encoder).
///
/// Shares its numerics with the measurement model exactly.
pub fn encode(probing: &TrainableProbing, h: &CVec, p_ssb: f64) -> Result<Vec<f64>> {
    if h.norm_sq() == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    crate::probing::noise_free_db(&probing.beams, h, p_ssb)
}

fn draw_noise(noise: &NoiseModel, k: usize, r: &mut impl Rng) -> Option<Vec<f64>> {
    if !noise.enabled {
        return None;
    }
    let normal = Normal::new(noise.mu_db, noise.sigma_db.max(0.0)).unwrap();
    Some((0..k).map(|_| normal.sample(r)).collect())
}

fn mean_eta(
    probing: &CMat,
    model: &MlpModel,
    samples: &[&CVec],
    noises: &[Option<Vec<f64>>],
    p_ssb: f64,
    ridge_eps: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for (h, noise) in samples.iter().zip(noises.iter()) {
        let fw = forward_sample(probing, model, h, noise.as_deref(), p_ssb, ridge_eps)?;
        acc += fw.eta();
    }
    Ok(acc / samples.len() as f64)
}

/// Offline joint training loop.
///
/// Deterministic for a fixed `(dataset, cfg, arch, mode)`. Validation uses
/// the trailing `val_fraction` of the samples with noise draws fixed once, so
/// the validation curve measures the model and not the noise stream.
pub fn train(
    dataset: &ChannelDataset,
    cfg: &TrainConfig,
    arch: &MlpArch,
    mode: &ProbingMode,
) -> std::result::Result<TrainedModel, TrainAbort> {
    let abort = |e: Error| TrainAbort {
        error: e,
        trace: TrainTrace::default(),
    };
    cfg.validate().map_err(abort)?;
    let n = dataset.len();
    let n_val = ((n as f64) * cfg.val_fraction).round() as usize;
    let n_train = n - n_val;
    if n_train < cfg.batch_size {
        return Err(abort(Error::InvalidArgument(format!(
            "dataset too small: {n_train} training samples for batch {}",
            cfg.batch_size
        ))));
    }
    let train_samples: Vec<&CVec> = dataset.samples[..n_train].iter().map(|s| &s.h).collect();
    let val_samples: Vec<&CVec> = dataset.samples[n_train..].iter().map(|s| &s.h).collect();

    let mut probing = match mode {
        ProbingMode::Learned => TrainableProbing::dft_init(dataset.n_t, arch.k),
        ProbingMode::Fixed(book) => TrainableProbing::from_codebook(book),
    };
    let train_probing = matches!(mode, ProbingMode::Learned);
    if probing.beams.rows() != dataset.n_t || probing.beams.cols() != arch.k {
        return Err(abort(Error::dim(
            "probing shape",
            format!("{}x{}", probing.beams.rows(), probing.beams.cols()),
            format!("{}x{}", dataset.n_t, arch.k),
        )));
    }

    let mut model = MlpModel::init(
        dataset.n_t,
        arch.k,
        arch.q,
        arch.depth,
        arch.width,
        rng::mix(cfg.seed, 0x6d6c70),
    );
    let layout = ParamLayout::for_model(&model);

    // Fixed validation noise, drawn once.
    let mut val_rng = rng::seeded(rng::mix(cfg.seed, 0x76616c));
    let val_noises: Vec<Option<Vec<f64>>> = val_samples
        .iter()
        .map(|_| draw_noise(&cfg.noise, arch.k, &mut val_rng))
        .collect();

    let mut trace = TrainTrace::default();
    let eval = |probing: &CMat, model: &MlpModel| -> Result<(f64, f64)> {
        let no_noise: Vec<Option<Vec<f64>>> = vec![None; train_samples.len()];
        let train_eta = mean_eta(
            probing,
            model,
            &train_samples,
            &no_noise,
            cfg.noise.p_ssb,
            cfg.ridge_eps,
        )?;
        let val_eta = mean_eta(
            probing,
            model,
            &val_samples,
            &val_noises,
            cfg.noise.p_ssb,
            cfg.ridge_eps,
        )?;
        Ok((train_eta, val_eta))
    };
    let (t0, v0) = eval(&probing.beams, &model).map_err(abort)?;
    trace.initial_train_eta = t0;
    trace.initial_val_eta = v0;

    let mut epoch_rng = rng::seeded(rng::mix(cfg.seed, 0x657063));
    let mut adam_m = vec![0.0; layout.total()];
    let mut adam_v = vec![0.0; layout.total()];
    let mut adam_t = 0u32;
    let mut indices: Vec<usize> = (0..n_train).collect();
    let batches_per_epoch = n_train / cfg.batch_size;

    for _epoch in 0..cfg.epochs {
        let t_start = std::time::Instant::now();
        indices.shuffle(&mut epoch_rng);
        let mut epoch_eta = 0.0;
        let mut epoch_grad_norm = 0.0;
        for b in 0..batches_per_epoch {
            let batch = &indices[b * cfg.batch_size..(b + 1) * cfg.batch_size];
            let mut grad = vec![0.0; layout.total()];
            let mut batch_eta = 0.0;
            let d_eta = -1.0 / cfg.batch_size as f64; // loss = mean(−η)
            for &idx in batch {
                let h = train_samples[idx];
                let noise = draw_noise(&cfg.noise, arch.k, &mut epoch_rng);
                let fw = forward_sample(
                    &probing.beams,
                    &model,
                    h,
                    noise.as_deref(),
                    cfg.noise.p_ssb,
                    cfg.ridge_eps,
                )
                .map_err(|e| TrainAbort {
                    error: e,
                    trace: trace.clone(),
                })?;
                batch_eta += fw.eta();
                backward_sample(&fw, &model, h, d_eta, &layout, &mut grad);
            }
            batch_eta /= cfg.batch_size as f64;
            if !batch_eta.is_finite() {
                return Err(TrainAbort {
                    error: Error::NumericFailure("training loss diverged".into()),
                    trace,
                });
            }
            epoch_eta += batch_eta;
            epoch_grad_norm += grad.iter().map(|g| g * g).sum::<f64>().sqrt();

            // Parameter update in flat space, then restore structure.
            let mut flat = layout.pack(&probing.beams, &model);
            match cfg.optimizer {
                Optimizer::Sgd => {
                    for (p, g) in flat.iter_mut().zip(grad.iter()) {
                        *p -= cfg.learning_rate * g;
                    }
                }
                Optimizer::Adam { beta1, beta2, eps } => {
                    adam_t += 1;
                    let bc1 = 1.0 - beta1.powi(adam_t as i32);
                    let bc2 = 1.0 - beta2.powi(adam_t as i32);
                    for i in 0..flat.len() {
                        adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * grad[i];
                        adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * grad[i] * grad[i];
                        let mhat = adam_m[i] / bc1;
                        let vhat = adam_v[i] / bc2;
                        flat[i] -= cfg.learning_rate * mhat / (vhat.sqrt() + eps);
                    }
                }
            }
            if train_probing {
                let (p_new, m_new) = layout.unpack(&flat);
                probing.beams = p_new;
                probing.renormalize();
                model = m_new;
                debug_assert!(probing.max_column_norm_deviation() < 1e-10);
            } else {
                // Keep the fixed probing bit-identical; only the decoder moves.
                let (_, m_new) = layout.unpack(&flat);
                model = m_new;
            }
        }
        let (_, val_eta) = eval(&probing.beams, &model).map_err(|e| TrainAbort {
            error: e,
            trace: trace.clone(),
        })?;
        trace.epochs.push(EpochStats {
            train_eta: epoch_eta / batches_per_epoch.max(1) as f64,
            val_eta,
            grad_norm: epoch_grad_norm / batches_per_epoch.max(1) as f64,
            wall_ms: t_start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(TrainedModel {
        probing,
        mlp: model,
        trace,
    })
}

/// Online deployment: sweep the learned codebook, decode the noisy
/// fingerprint, orthonormalize the inferred basis, and run the subspace
/// feedback scheme (overhead `K + 2q`).
pub fn export_deployment(
    probing: &TrainableProbing,
    model: &MlpModel,
    h: &CVec,
    noise: &NoiseModel,
    seed: u64,
    link: &LinkParams,
) -> Result<FeedbackOutcome> {
    let book = probing.as_codebook()?;
    let fp = crate::probing::rsrp_fingerprint(h, &book, noise, seed)?;
    let normalized = crate::probing::normalize_fingerprint(&fp.values_db);
    let c_raw = decode(model, &normalized)?;
    let basis = orthonormalize(&c_raw, DEFAULT_RANK_TOL)?;
    let rank_reduced = basis.cols() < model.q;
    let sub = Subspace::new(basis)?;
    let mut outcome = proposed(h, &sub, book.len(), link)?;
    if rank_reduced {
        outcome.flags.push(OutcomeFlag::RankReduced);
    }
    Ok(outcome)
}

/// Deployment-side subspace inference alone (used by angular diagnostics).
pub fn infer_subspace(
    probing: &TrainableProbing,
    model: &MlpModel,
    h: &CVec,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Subspace> {
    let book = probing.as_codebook()?;
    let fp = crate::probing::rsrp_fingerprint(h, &book, noise, seed)?;
    let normalized = crate::probing::normalize_fingerprint(&fp.values_db);
    let c_raw = decode(model, &normalized)?;
    Subspace::new(orthonormalize(&c_raw, DEFAULT_RANK_TOL)?)
}
