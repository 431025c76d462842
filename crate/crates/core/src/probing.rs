//! Probing codebooks and the RSRP fingerprint measurement model.
//!
//! During initial access the base station sweeps a probing codebook and the
//! UE reports the per-beam received power in dB — a phase-blind beam-domain
//! fingerprint of the channel. The same machinery hosts the oversampled DFT
//! quantization codebook used by the Type-I/II schemes.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use rand_distr::{Distribution, Normal};

use crate::channel::steering;
use crate::error::{Error, Result};
use crate::numkernel::{matvec_herm, CMat, CVec};
use crate::rng;

const CODEBOOK_MAGIC: &[u8; 5] = b"BLCB1";

/// Floor for dB powers so exactly-orthogonal beams stay finite.
pub const DB_FLOOR: f64 = -300.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodebookKind {
    DftOversampled,
    Random,
    Learned,
}

impl CodebookKind {
    fn to_u8(self) -> u8 {
        match self {
            CodebookKind::DftOversampled => 0,
            CodebookKind::Random => 1,
            CodebookKind::Learned => 2,
        }
    }

    fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(CodebookKind::DftOversampled),
            1 => Ok(CodebookKind::Random),
            2 => Ok(CodebookKind::Learned),
            other => Err(Error::InvalidArgument(format!(
                "unknown codebook kind tag {other}"
            ))),
        }
    }
}

/// A matrix of unit-norm beams, one per column.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    pub beams: CMat,
    pub kind: CodebookKind,
}

impl Codebook {
    pub fn new(beams: CMat, kind: CodebookKind) -> Result<Self> {
        for j in 0..beams.cols() {
            let n = beams.col(j).norm();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "codebook column {j} has norm {n}, want 1"
                )));
            }
        }
        Ok(Codebook { beams, kind })
    }

    pub fn n_t(&self) -> usize {
        self.beams.rows()
    }

    pub fn len(&self) -> usize {
        self.beams.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.cols() == 0
    }

    /// Spatial frequency of grid column `m`, mapped into [-0.5, 0.5).
    pub fn grid_u(m: usize, total: usize) -> f64 {
        let u = m as f64 / total as f64;
        if u >= 0.5 {
            u - 1.0
        } else {
            u
        }
    }
}

/// Oversampled DFT codebook: `n_t·oversample` steering-vector columns on the
/// uniform spatial-frequency grid `m/(n_t·oversample)`.
pub fn dft_codebook(n_t: usize, oversample: usize) -> Codebook {
    assert!(n_t >= 1 && oversample >= 1);
    let total = n_t * oversample;
    let cols: Vec<CVec> = (0..total)
        .map(|m| steering(Codebook::grid_u(m, total), n_t))
        .collect();
    Codebook {
        beams: CMat::from_cols(&cols),
        kind: CodebookKind::DftOversampled,
    }
}

/// K-beam uniform sweep: steering vectors at `u = k/K` mapped to [-0.5, 0.5).
///
/// This is the fixed-DFT probing baseline and the learned codebook's
/// initialization.
pub fn uniform_sweep_codebook(n_t: usize, k: usize) -> Codebook {
    assert!(n_t >= 1 && k >= 1);
    let cols: Vec<CVec> = (0..k)
        .map(|m| steering(Codebook::grid_u(m, k), n_t))
        .collect();
    Codebook {
        beams: CMat::from_cols(&cols),
        kind: CodebookKind::DftOversampled,
    }
}

/// K random unit-norm beams (complex Gaussian, normalized).
pub fn random_codebook(n_t: usize, k: usize, seed: u64) -> Codebook {
    assert!(n_t >= 1 && k >= 1);
    let mut r = rng::seeded(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let cols: Vec<CVec> = (0..k)
        .map(|_| {
            let v = CVec::from_fn(n_t, |_| {
                num_complex::Complex::new(normal.sample(&mut r), normal.sample(&mut r))
            });
            let n = v.norm();
            v.scale(num_complex::Complex::new(1.0 / n, 0.0))
        })
        .collect();
    Codebook {
        beams: CMat::from_cols(&cols),
        kind: CodebookKind::Random,
    }
}

/// dB-domain RSRP measurement noise: Gaussian perturbation in dB.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub mu_db: f64,
    pub sigma_db: f64,
    /// Linear SSB transmit power.
    pub p_ssb: f64,
    pub enabled: bool,
}

impl NoiseModel {
    /// Defaults: zero-mean 1 dB shadowing, unit SSB power.
    pub fn default_model() -> Self {
        NoiseModel {
            mu_db: 0.0,
            sigma_db: 1.0,
            p_ssb: 1.0,
            enabled: true,
        }
    }

    pub fn disabled(p_ssb: f64) -> Self {
        NoiseModel {
            mu_db: 0.0,
            sigma_db: 0.0,
            p_ssb,
            enabled: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_db < 0.0 || !(self.p_ssb > 0.0) {
            return Err(Error::InvalidArgument(
                "noise model needs sigma >= 0 and p_ssb > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Per-beam received powers in dB, with the noise-free values kept alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct RsrpFingerprint {
    pub values_db: Vec<f64>,
    pub noise_free_db: Vec<f64>,
}

/// Noise-free dB powers `10·log10(p_ssb·|bᴴh|²)`, floored at [`DB_FLOOR`].
///
/// Single source of the fingerprint numerics: both the measurement model and
/// the differentiable training encoder call this.
pub fn noise_free_db(beams: &CMat, h: &CVec, p_ssb: f64) -> Result<Vec<f64>> {
    let z = matvec_herm(beams, h)?;
    Ok(z.entries()
        .iter()
        .map(|zk| {
            let p = p_ssb * zk.norm_sqr();
            if p > 0.0 {
                (10.0 * p.log10()).max(DB_FLOOR)
            } else {
                DB_FLOOR
            }
        })
        .collect())
}

/// Measure the RSRP fingerprint of `h` under `book`.
///
/// With noise enabled, each dB value picks up an independent Gaussian
/// perturbation drawn from the seeded stream; disabled measurements are
/// deterministic and ignore the seed.
pub fn rsrp_fingerprint(
    h: &CVec,
    book: &Codebook,
    noise: &NoiseModel,
    rng_seed: u64,
) -> Result<RsrpFingerprint> {
    noise.validate()?;
    if h.norm_sq() == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let noise_free = noise_free_db(&book.beams, h, noise.p_ssb)?;
    let values = if noise.enabled {
        let mut r = rng::seeded(rng_seed);
        let normal = Normal::new(noise.mu_db, noise.sigma_db.max(0.0)).unwrap();
        noise_free.iter().map(|v| v + normal.sample(&mut r)).collect()
    } else {
        noise_free.clone()
    };
    Ok(RsrpFingerprint {
        values_db: values,
        noise_free_db: noise_free,
    })
}

/// Per-fingerprint standardization: subtract the mean, divide by (std + 1e-6).
///
/// Removes the absolute power scale so the decoder sees only the beam-domain
/// shape. A constant fingerprint maps to all zeros.
pub fn normalize_fingerprint(values_db: &[f64]) -> Vec<f64> {
    let k = values_db.len() as f64;
    let mean = values_db.iter().sum::<f64>() / k;
    let var = values_db.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
    let denom = var.sqrt() + 1e-6;
    values_db.iter().map(|v| (v - mean) / denom).collect()
}

/// Persist a codebook in the `BLCB1` format (little-endian, column-major).
pub fn save_codebook(book: &Codebook, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(CODEBOOK_MAGIC)?;
    write_codebook_payload(book, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Codebook body without the magic; shared with the model checkpoint format.
pub(crate) fn write_codebook_payload(book: &Codebook, w: &mut impl Write) -> Result<()> {
    w.write_u8(book.kind.to_u8())?;
    w.write_u32::<LittleEndian>(book.n_t() as u32)?;
    w.write_u32::<LittleEndian>(book.len() as u32)?;
    for j in 0..book.len() {
        for i in 0..book.n_t() {
            let z = book.beams[(i, j)];
            w.write_f64::<LittleEndian>(z.re)?;
            w.write_f64::<LittleEndian>(z.im)?;
        }
    }
    Ok(())
}

pub fn load_codebook(path: &Path) -> Result<Codebook> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Truncated("magic"))?;
    if &magic != CODEBOOK_MAGIC {
        return Err(Error::BadMagic { expected: "BLCB1" });
    }
    read_codebook_payload(&mut r)
}

pub(crate) fn read_codebook_payload(r: &mut impl Read) -> Result<Codebook> {
    let kind = CodebookKind::from_u8(r.read_u8().map_err(|_| Error::Truncated("kind"))?)?;
    let n_t = r
        .read_u32::<LittleEndian>()
        .map_err(|_| Error::Truncated("n_t"))? as usize;
    let k = r
        .read_u32::<LittleEndian>()
        .map_err(|_| Error::Truncated("K"))? as usize;
    if n_t == 0 || k == 0 {
        return Err(Error::InvalidArgument("empty codebook".into()));
    }
    let mut beams = CMat::zeros(n_t, k);
    for j in 0..k {
        for i in 0..n_t {
            let re = r
                .read_f64::<LittleEndian>()
                .map_err(|_| Error::Truncated("beam entry"))?;
            let im = r
                .read_f64::<LittleEndian>()
                .map_err(|_| Error::Truncated("beam entry"))?;
            beams[(i, j)] = num_complex::Complex::new(re, im);
        }
    }
    Ok(Codebook { beams, kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::C64;

    #[test]
    fn dft_codebook_base_is_orthogonal() {
        let book = dft_codebook(2, 1);
        assert_eq!(book.len(), 2);
        let d0 = book.beams.col(0);
        let d1 = book.beams.col(1);
        assert!(d0.inner(&d1).norm() < 1e-12);
    }

    #[test]
    fn dft_codebook_columns_are_unit_norm() {
        let book = dft_codebook(16, 4);
        for j in 0..book.len() {
            assert!((book.beams.col(j).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dft_adjacent_coherence_matches_dirichlet() {
        let (n_t, o_d) = (4usize, 2usize);
        let book = dft_codebook(n_t, o_d);
        let got = book.beams.col(0).inner(&book.beams.col(1)).norm_sqr();
        let delta = 1.0 / (n_t * o_d) as f64;
        let n = n_t as f64;
        let want = ((std::f64::consts::PI * n * delta).sin()
            / (std::f64::consts::PI * delta).sin())
        .powi(2)
            / (n * n);
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn fingerprint_of_matched_beam_is_zero_db() {
        let book = dft_codebook(8, 1);
        let h = book.beams.col(1);
        let noise = NoiseModel::disabled(1.0);
        let fp = rsrp_fingerprint(&h, &book, &noise, 0).unwrap();
        assert!((fp.values_db[1] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn fingerprint_orthogonal_beam_hits_floor() {
        let book = dft_codebook(8, 1);
        let h = book.beams.col(1);
        let noise = NoiseModel::disabled(1.0);
        let fp = rsrp_fingerprint(&h, &book, &noise, 0).unwrap();
        // Exactly orthogonal DFT columns: every other beam is at the floor.
        for (k, v) in fp.values_db.iter().enumerate() {
            if k != 1 {
                assert_eq!(*v, DB_FLOOR);
            }
        }
    }

    #[test]
    fn fingerprint_rejects_zero_channel() {
        let book = dft_codebook(8, 1);
        let h = CVec::zeros(8);
        assert!(matches!(
            rsrp_fingerprint(&h, &book, &NoiseModel::disabled(1.0), 0),
            Err(Error::DegenerateChannel)
        ));
    }

    #[test]
    fn fingerprint_noise_std_matches_model() {
        let book = dft_codebook(8, 2);
        let h = crate::channel::steering(0.13, 8);
        let noise = NoiseModel {
            mu_db: 0.0,
            sigma_db: 1.0,
            p_ssb: 1.0,
            enabled: true,
        };
        let mut acc = Vec::new();
        for seed in 0..10_000u64 {
            let fp = rsrp_fingerprint(&h, &book, &noise, seed).unwrap();
            acc.push(fp.values_db[3] - fp.noise_free_db[3]);
        }
        let mean = acc.iter().sum::<f64>() / acc.len() as f64;
        let std =
            (acc.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / acc.len() as f64).sqrt();
        assert!((std - 1.0).abs() < 0.05, "sample std {std}");
    }

    #[test]
    fn fingerprint_is_phase_blind() {
        let book = dft_codebook(16, 2);
        let h = crate::channel::steering(0.21, 16);
        let theta: f64 = 1.234;
        let rotated = h.scale(C64::new(theta.cos(), theta.sin()));
        let noise = NoiseModel::disabled(1.0);
        let a = rsrp_fingerprint(&h, &book, &noise, 0).unwrap();
        let b = rsrp_fingerprint(&rotated, &book, &noise, 0).unwrap();
        for (x, y) in a.values_db.iter().zip(b.values_db.iter()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn fingerprint_scaling_shifts_db_uniformly() {
        let book = dft_codebook(16, 2);
        let h = crate::channel::steering(0.11, 16).add(&crate::channel::steering(-0.2, 16));
        let c = 3.5;
        let scaled = h.scale(C64::new(c, 0.0));
        let noise = NoiseModel::disabled(1.0);
        let a = rsrp_fingerprint(&h, &book, &noise, 0).unwrap();
        let b = rsrp_fingerprint(&scaled, &book, &noise, 0).unwrap();
        let shift = 20.0 * c.log10();
        for (x, y) in a.values_db.iter().zip(b.values_db.iter()) {
            if *x > DB_FLOOR {
                assert!((y - x - shift).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fingerprint_noise_disabled_ignores_seed() {
        let book = dft_codebook(8, 2);
        let h = crate::channel::steering(0.07, 8);
        let noise = NoiseModel::disabled(1.0);
        let a = rsrp_fingerprint(&h, &book, &noise, 1).unwrap();
        let b = rsrp_fingerprint(&h, &book, &noise, 999).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values_db, a.noise_free_db);
    }

    #[test]
    fn normalize_constant_fingerprint_is_zeros() {
        let out = normalize_fingerprint(&[3.0; 6]);
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn normalize_output_is_standardized() {
        let vals: Vec<f64> = (0..16).map(|i| (i as f64 * 0.7).sin() * 10.0 - 50.0).collect();
        let out = normalize_fingerprint(&vals);
        let mean = out.iter().sum::<f64>() / out.len() as f64;
        let var = out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / out.len() as f64;
        assert!(mean.abs() < 1e-12);
        assert!((var.sqrt() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn normalize_is_affine_invariant() {
        let vals: Vec<f64> = (0..12).map(|i| (i as f64).cos() * 4.0 - 90.0).collect();
        let scaled: Vec<f64> = vals.iter().map(|v| 2.5 * v + 13.0).collect();
        let a = normalize_fingerprint(&vals);
        let b = normalize_fingerprint(&scaled);
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn codebook_round_trip() {
        let book = random_codebook(8, 5, 77);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("book.blcb");
        save_codebook(&book, &path).unwrap();
        let back = load_codebook(&path).unwrap();
        assert_eq!(back.kind, book.kind);
        assert_eq!(back.beams, book.beams);
    }

    #[test]
    fn codebook_bad_magic_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.blcb");
        std::fs::write(&path, b"WRONGdata").unwrap();
        assert!(matches!(load_codebook(&path), Err(Error::BadMagic { .. })));
    }
}
