//! Experiment configuration: a sectioned `key = value` (TOML) file.
//!
//! Every key is documented in the repository README. Unknown keys are
//! rejected so typos fail loudly instead of silently running defaults.

use std::path::Path;

use beamlab_core::channel::SiteModel;
use beamlab_core::learn::{MlpArch, Optimizer, TrainConfig};
use beamlab_core::probing::NoiseModel;
use beamlab_core::schemes::LinkParams;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSection {
    pub n_t: usize,
    #[serde(default = "default_centers")]
    pub cluster_centers: Vec<f64>,
    #[serde(default = "default_spread")]
    pub cluster_spread: f64,
    #[serde(default = "default_path_min")]
    pub path_count_min: usize,
    #[serde(default = "default_path_max")]
    pub path_count_max: usize,
    #[serde(default = "default_gain_profile")]
    pub gain_profile_db: Vec<f64>,
    #[serde(default = "default_gain_sigma")]
    pub gain_sigma_db: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_centers() -> Vec<f64> {
    vec![-0.35, 0.05, 0.30]
}
fn default_spread() -> f64 {
    0.02
}
fn default_path_min() -> usize {
    2
}
fn default_path_max() -> usize {
    4
}
fn default_gain_profile() -> Vec<f64> {
    vec![-100.0, -110.0, -115.0]
}
fn default_gain_sigma() -> f64 {
    3.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    #[serde(default = "default_p_t_dbm")]
    pub p_t_dbm: f64,
    #[serde(default = "default_bw_hz")]
    pub bw_hz: f64,
    #[serde(default = "default_noise_psd")]
    pub noise_psd_dbm_hz: f64,
    #[serde(default = "default_coherence")]
    pub coherence_uses: usize,
}

fn default_p_t_dbm() -> f64 {
    40.0
}
fn default_bw_hz() -> f64 {
    1.0e7
}
fn default_noise_psd() -> f64 {
    -170.0
}
fn default_coherence() -> usize {
    1000
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection {
            p_t_dbm: default_p_t_dbm(),
            bw_hz: default_bw_hz(),
            noise_psd_dbm_hz: default_noise_psd(),
            coherence_uses: default_coherence(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SchemesSection {
    #[serde(default = "default_oversample")]
    pub dft_oversample: usize,
    #[serde(default = "default_q")]
    pub type2_q: usize,
    #[serde(default = "default_q")]
    pub psc_ports: usize,
}

fn default_oversample() -> usize {
    4
}
fn default_q() -> usize {
    4
}

impl Default for SchemesSection {
    fn default() -> Self {
        SchemesSection {
            dft_oversample: default_oversample(),
            type2_q: default_q(),
            psc_ports: default_q(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_p_ssb")]
    pub p_ssb: f64,
    #[serde(default)]
    pub noise_mu_db: f64,
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma_db: f64,
    #[serde(default = "default_true")]
    pub noise_enabled: bool,
}

fn default_k() -> usize {
    8
}
fn default_p_ssb() -> f64 {
    1.0
}
fn default_noise_sigma() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            k: default_k(),
            q: default_q(),
            p_ssb: default_p_ssb(),
            noise_mu_db: 0.0,
            noise_sigma_db: default_noise_sigma(),
            noise_enabled: true,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_optimizer")]
    pub optimizer: String,
    #[serde(default = "default_ridge")]
    pub ridge_eps: f64,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default = "default_train_seed")]
    pub seed: u64,
}

fn default_epochs() -> usize {
    200
}
fn default_batch() -> usize {
    64
}
fn default_lr() -> f64 {
    0.2
}
fn default_optimizer() -> String {
    "sgd".to_string()
}
fn default_ridge() -> f64 {
    1e-6
}
fn default_depth() -> usize {
    3
}
fn default_width() -> usize {
    256
}
fn default_train_seed() -> u64 {
    1
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            epochs: default_epochs(),
            batch_size: default_batch(),
            learning_rate: default_lr(),
            optimizer: default_optimizer(),
            ridge_eps: default_ridge(),
            depth: default_depth(),
            width: default_width(),
            seed: default_train_seed(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_master_seed")]
    pub seed: u64,
    #[serde(default = "default_snr_grid")]
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "default_angular_grid")]
    pub angular_grid: usize,
    /// (K, Q) settings for `train` (one model per entry).
    #[serde(default)]
    pub kq: Vec<[usize; 2]>,
    #[serde(default)]
    pub pareto_k: Vec<usize>,
    #[serde(default)]
    pub pareto_q: Vec<usize>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn default_samples() -> usize {
    2000
}
fn default_master_seed() -> u64 {
    42
}
fn default_snr_grid() -> Vec<f64> {
    vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
}
fn default_angular_grid() -> usize {
    256
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            samples: default_samples(),
            seed: default_master_seed(),
            snr_grid_db: default_snr_grid(),
            angular_grid: default_angular_grid(),
            kq: Vec::new(),
            pareto_k: Vec::new(),
            pareto_q: Vec::new(),
            out_dir: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub site: SiteSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub schemes: SchemesSection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let site = self.site_model();
        site.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.experiment.samples < 1 {
            return Err(Error::Config("experiment.samples must be >= 1".into()));
        }
        if self.schemes.type2_q < 1 || self.schemes.type2_q > self.site.n_t {
            return Err(Error::Config("schemes.type2_q out of range".into()));
        }
        if self.schemes.psc_ports < 1 || self.schemes.psc_ports > self.site.n_t {
            return Err(Error::Config("schemes.psc_ports out of range".into()));
        }
        if self.probe.q < 1 || self.probe.q > self.site.n_t {
            return Err(Error::Config("probe.q out of range".into()));
        }
        if self.experiment.angular_grid < 2 {
            return Err(Error::Config("experiment.angular_grid must be >= 2".into()));
        }
        self.optimizer()?;
        self.link_params()?;
        Ok(())
    }

    pub fn site_model(&self) -> SiteModel {
        SiteModel {
            n_t: self.site.n_t,
            cluster_centers: self.site.cluster_centers.clone(),
            cluster_spread: self.site.cluster_spread,
            path_count_range: (self.site.path_count_min, self.site.path_count_max),
            gain_profile_db: self.site.gain_profile_db.clone(),
            gain_sigma_db: self.site.gain_sigma_db,
            seed: self.site.seed,
        }
    }

    pub fn link_params(&self) -> Result<LinkParams> {
        LinkParams::from_budget(
            self.link.p_t_dbm,
            self.link.bw_hz,
            self.link.noise_psd_dbm_hz,
            self.link.coherence_uses,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            mu_db: self.probe.noise_mu_db,
            sigma_db: self.probe.noise_sigma_db,
            p_ssb: self.probe.p_ssb,
            enabled: self.probe.noise_enabled,
        }
    }

    pub fn optimizer(&self) -> Result<Optimizer> {
        match self.train.optimizer.as_str() {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::adam_default()),
            other => Err(Error::Config(format!(
                "unknown optimizer '{other}' (expected 'sgd' or 'adam')"
            ))),
        }
    }

    /// Architecture for a given (K, Q); defaults come from `[probe]`.
    pub fn arch(&self, k: usize, q: usize) -> MlpArch {
        MlpArch {
            k,
            q,
            depth: self.train.depth,
            width: self.train.width,
        }
    }

    /// Train config bound to a master seed; validation is carved from the
    /// trailing 15/85 of the train+val share.
    pub fn train_config(&self, master_seed: u64, val_fraction: f64) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            learning_rate: self.train.learning_rate,
            optimizer: self.optimizer()?,
            noise: self.noise_model(),
            seed: beamlab_core::rng::mix(master_seed, self.train.seed),
            ridge_eps: self.train.ridge_eps,
            val_fraction,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// (K, Q) list for the `train` command; falls back to the probe setting.
    pub fn kq_list(&self) -> Vec<(usize, usize)> {
        if self.experiment.kq.is_empty() {
            vec![(self.probe.k, self.probe.q)]
        } else {
            self.experiment.kq.iter().map(|kq| (kq[0], kq[1])).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: ExperimentConfig = toml::from_str("[site]\nn_t = 16\n").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.probe.k, 8);
        assert_eq!(cfg.train.width, 256);
        assert_eq!(cfg.experiment.samples, 2000);
        assert_eq!(cfg.kq_list(), vec![(8, 4)]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<ExperimentConfig>("[site]\nn_t = 16\nbogus = 1\n");
        assert!(err.is_err());
    }

    #[test]
    fn bad_optimizer_is_config_error() {
        let cfg: ExperimentConfig =
            toml::from_str("[site]\nn_t = 8\n[train]\noptimizer = \"lbfgs\"\n").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn out_of_range_q_is_config_error() {
        let cfg: ExperimentConfig =
            toml::from_str("[site]\nn_t = 8\n[schemes]\ntype2_q = 9\n").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
