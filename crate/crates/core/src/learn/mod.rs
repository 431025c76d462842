//! End-to-end joint design of the probing codebook and the subspace
//! inference decoder.
//!
//! The probing matrix acts as an encoder producing a dB-domain RSRP
//! fingerprint; an MLP decoder (layer norm + GELU) maps the standardized
//! fingerprint to a raw complex basis; the loss is the negative projection
//! efficiency of that basis on the channel, computed through a
//! ridge-regularized projector so the whole pipeline stays differentiable.
//! Deployment swaps the ridge projector for exact QR orthonormalization.

mod checkpoint;
mod mlp;
mod pipeline;
mod train;

pub use checkpoint::{load_model, save_model};
pub use mlp::{decode, gelu, mlp_forward, DenseNormLayer, MlpModel, RealMat, LN_EPS};
pub use pipeline::{
    backward_sample, forward_sample, proj_forward, subspace_loss, ParamLayout, SampleForward,
};
pub use train::{
    encode, export_deployment, infer_subspace, train, EpochStats, MlpArch, Optimizer,
    ProbingMode, TrainAbort, TrainConfig, TrainTrace, TrainableProbing, TrainedModel,
};
