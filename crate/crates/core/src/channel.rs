//! Sparse geometric channels for a uniform linear array.
//!
//! A channel is a superposition of a few dominant paths, each with a complex
//! gain (path loss folded in) and a spatial frequency `u = (d/λ)·sin φ`.
//! With λ/2 spacing, `u ∈ [−0.5, 0.5)`. The module also provides a synthetic
//! site generator (clusters of persistent angular features with per-sample
//! placement randomness) and a binary dataset format so externally ray-traced
//! channels can be imported in the same shape.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numkernel::{CVec, C64};
use crate::rng;

const DATASET_MAGIC: &[u8; 5] = b"BLCH1";
const DATASET_VERSION: u8 = 1;

/// Normalized ULA steering vector: entry `k = (1/√n_t)·e^{j2πku}`.
pub fn steering(u: f64, n_t: usize) -> CVec {
    assert!(n_t >= 1);
    let scale = 1.0 / (n_t as f64).sqrt();
    CVec::from_fn(n_t, |k| {
        let phase = 2.0 * std::f64::consts::PI * (k as f64) * u;
        C64::new(scale * phase.cos(), scale * phase.sin())
    })
}

/// Gains and spatial frequencies of the dominant paths of one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSet {
    pub gains: Vec<C64>,
    pub spatial_freqs: Vec<f64>,
}

impl PathSet {
    pub fn new(gains: Vec<C64>, spatial_freqs: Vec<f64>) -> Result<Self> {
        if gains.is_empty() || gains.len() != spatial_freqs.len() {
            return Err(Error::InvalidArgument(format!(
                "path set needs equal nonzero lengths, got {} gains / {} freqs",
                gains.len(),
                spatial_freqs.len()
            )));
        }
        if !gains.iter().all(|g| g.re.is_finite() && g.im.is_finite()) {
            return Err(Error::NonFinite("path gains"));
        }
        if !spatial_freqs.iter().all(|u| u.is_finite() && u.abs() <= 0.5) {
            return Err(Error::InvalidArgument(
                "spatial frequencies must lie in [-0.5, 0.5]".into(),
            ));
        }
        Ok(PathSet {
            gains,
            spatial_freqs,
        })
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// One channel realization: its path decomposition (when known) and the
/// assembled vector `h = Σ_l α_l·a(u_l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    /// `None` for imported channels without a known path decomposition.
    pub paths: Option<PathSet>,
    pub h: CVec,
}

/// Assemble `h = Σ_l α_l·steering(u_l)`.
pub fn assemble(paths: &PathSet, n_t: usize) -> ChannelRealization {
    let mut h = CVec::zeros(n_t);
    for (gain, &u) in paths.gains.iter().zip(paths.spatial_freqs.iter()) {
        let a = steering(u, n_t);
        for k in 0..n_t {
            h[k] += gain * a[k];
        }
    }
    ChannelRealization {
        paths: Some(paths.clone()),
        h,
    }
}

/// How far the steering matrix is from having orthonormal columns:
/// `‖AᴴA − I_L‖_max`.
pub fn orthogonality_residual(paths: &PathSet, n_t: usize) -> f64 {
    let l = paths.len();
    let cols: Vec<CVec> = paths
        .spatial_freqs
        .iter()
        .map(|&u| steering(u, n_t))
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..l {
        for j in 0..l {
            let g = cols[i].inner(&cols[j]);
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

/// Synthetic site: fixed angular clusters stand in for a site's persistent
/// geometric features; per-sample randomness models UE placement.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteModel {
    pub n_t: usize,
    pub cluster_centers: Vec<f64>,
    /// Uniform half-width of each cluster, in spatial-frequency units.
    pub cluster_spread: f64,
    pub path_count_range: (usize, usize),
    /// Per-cluster mean path power, dB.
    pub gain_profile_db: Vec<f64>,
    /// Std of the log-normal per-path power around the cluster mean, dB.
    pub gain_sigma_db: f64,
    pub seed: u64,
}

impl SiteModel {
    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return Err(Error::InvalidArgument("n_t must be >= 1".into()));
        }
        if self.cluster_centers.is_empty()
            || self.cluster_centers.len() != self.gain_profile_db.len()
        {
            return Err(Error::InvalidArgument(
                "cluster centers and gain profile must have equal nonzero lengths".into(),
            ));
        }
        if !self
            .cluster_centers
            .iter()
            .all(|c| c.is_finite() && (-0.5..0.5).contains(c))
        {
            return Err(Error::InvalidArgument(
                "cluster centers must lie in [-0.5, 0.5)".into(),
            ));
        }
        if !(self.cluster_spread >= 0.0) || self.gain_sigma_db < 0.0 {
            return Err(Error::InvalidArgument("spreads must be >= 0".into()));
        }
        let (lo, hi) = self.path_count_range;
        if lo < 1 || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "bad path count range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Defaults used throughout: 3 clusters, spread 0.02, 2-4 paths,
    /// cluster powers [-100, -110, -115] dB.
    pub fn default_site(n_t: usize, seed: u64) -> Self {
        SiteModel {
            n_t,
            cluster_centers: vec![-0.35, 0.05, 0.30],
            cluster_spread: 0.02,
            path_count_range: (2, 4),
            gain_profile_db: vec![-100.0, -110.0, -115.0],
            gain_sigma_db: 3.0,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetOrigin {
    Synthetic,
    Imported,
}

/// A set of channel realizations sharing one array size.
#[derive(Clone, Debug)]
pub struct ChannelDataset {
    pub n_t: usize,
    pub samples: Vec<ChannelRealization>,
    pub origin: DatasetOrigin,
}

impl ChannelDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Wrap a spatial frequency into [-0.5, 0.5).
fn wrap_u(u: f64) -> f64 {
    let mut v = (u + 0.5).rem_euclid(1.0) - 0.5;
    if v >= 0.5 {
        v = -0.5;
    }
    v
}

/// Draw `count` channel realizations from the site distribution.
///
/// Deterministic for fixed `(model.seed, rng_seed)`: every sample draws its
/// path count uniformly from the configured range, each path picks a cluster
/// uniformly, takes `u` from the cluster (center + uniform spread, wrapped),
/// and a complex gain with log-normal power around the cluster's dB profile
/// and uniform phase.
pub fn sample_site(model: &SiteModel, count: usize, rng_seed: u64) -> Result<ChannelDataset> {
    model.validate()?;
    if count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    let mut rng = rng::seeded(rng::mix(model.seed, rng_seed));
    let (lo, hi) = model.path_count_range;
    let n_clusters = model.cluster_centers.len();
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let l = rng.gen_range(lo..=hi);
        let mut gains = Vec::with_capacity(l);
        let mut freqs = Vec::with_capacity(l);
        for _ in 0..l {
            let c = rng.gen_range(0..n_clusters);
            let du = if model.cluster_spread > 0.0 {
                rng.gen_range(-model.cluster_spread..=model.cluster_spread)
            } else {
                0.0
            };
            freqs.push(wrap_u(model.cluster_centers[c] + du));
            let power_db = if model.gain_sigma_db > 0.0 {
                Normal::new(model.gain_profile_db[c], model.gain_sigma_db)
                    .expect("finite sigma")
                    .sample(&mut rng)
            } else {
                model.gain_profile_db[c]
            };
            let mag = 10f64.powf(power_db / 20.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            gains.push(C64::new(mag * phase.cos(), mag * phase.sin()));
        }
        let paths = PathSet::new(gains, freqs)?;
        samples.push(assemble(&paths, model.n_t));
    }
    Ok(ChannelDataset {
        n_t: model.n_t,
        samples,
        origin: DatasetOrigin::Synthetic,
    })
}

/// Write a dataset in the `BLCH1` binary format (little-endian).
///
/// Layout: magic | u8 version | u32 n_t | u32 count, then per sample:
/// u16 L | L×(f64 re, f64 im) gains | L×f64 u | n_t×(f64 re, f64 im) h.
/// `L = 0` marks an imported channel without a path decomposition.
pub fn save_dataset(ds: &ChannelDataset, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(DATASET_MAGIC)?;
    w.write_u8(DATASET_VERSION)?;
    w.write_u32::<LittleEndian>(ds.n_t as u32)?;
    w.write_u32::<LittleEndian>(ds.samples.len() as u32)?;
    for s in &ds.samples {
        match &s.paths {
            Some(p) => {
                w.write_u16::<LittleEndian>(p.len() as u16)?;
                for g in &p.gains {
                    w.write_f64::<LittleEndian>(g.re)?;
                    w.write_f64::<LittleEndian>(g.im)?;
                }
                for &u in &p.spatial_freqs {
                    w.write_f64::<LittleEndian>(u)?;
                }
            }
            None => w.write_u16::<LittleEndian>(0)?,
        }
        for z in s.h.entries() {
            w.write_f64::<LittleEndian>(z.re)?;
            w.write_f64::<LittleEndian>(z.im)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact_f64(r: &mut impl Read, what: &'static str) -> Result<f64> {
    r.read_f64::<LittleEndian>()
        .map_err(|_| Error::Truncated(what))
}

/// Read a dataset written by [`save_dataset`]; the round trip is bit-exact.
pub fn load_dataset(path: &Path) -> Result<ChannelDataset> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Truncated("magic"))?;
    if &magic != DATASET_MAGIC {
        return Err(Error::BadMagic { expected: "BLCH1" });
    }
    let version = r.read_u8().map_err(|_| Error::Truncated("version"))?;
    if version != DATASET_VERSION {
        return Err(Error::VersionMismatch {
            expected: DATASET_VERSION,
            found: version,
        });
    }
    let n_t = r
        .read_u32::<LittleEndian>()
        .map_err(|_| Error::Truncated("n_t"))? as usize;
    if n_t == 0 {
        return Err(Error::InvalidArgument("dataset has n_t = 0".into()));
    }
    let count = r
        .read_u32::<LittleEndian>()
        .map_err(|_| Error::Truncated("count"))? as usize;
    if count == 0 {
        return Err(Error::InvalidArgument("dataset has no samples".into()));
    }
    let mut samples = Vec::with_capacity(count);
    let mut any_pathless = false;
    for _ in 0..count {
        let l = r
            .read_u16::<LittleEndian>()
            .map_err(|_| Error::Truncated("path count"))? as usize;
        let paths = if l > 0 {
            let mut gains = Vec::with_capacity(l);
            for _ in 0..l {
                let re = read_exact_f64(&mut r, "gain")?;
                let im = read_exact_f64(&mut r, "gain")?;
                gains.push(C64::new(re, im));
            }
            let mut freqs = Vec::with_capacity(l);
            for _ in 0..l {
                freqs.push(read_exact_f64(&mut r, "spatial frequency")?);
            }
            Some(PathSet::new(gains, freqs)?)
        } else {
            any_pathless = true;
            None
        };
        let mut h = Vec::with_capacity(n_t);
        for _ in 0..n_t {
            let re = read_exact_f64(&mut r, "channel entry")?;
            let im = read_exact_f64(&mut r, "channel entry")?;
            h.push(C64::new(re, im));
        }
        let h = CVec::validated(h)?;
        // Stored h must agree with its own path expansion (relative check,
        // since the gains carry path loss and set the scale).
        if let Some(p) = &paths {
            let rebuilt = assemble(p, n_t);
            let err = rebuilt.h.sub(&h).norm();
            let scale = h.norm().max(f64::MIN_POSITIVE);
            if err > 1e-12 * scale {
                return Err(Error::NumericFailure(format!(
                    "stored channel differs from its path expansion by {:.3e} (relative)",
                    err / scale
                )));
            }
        }
        samples.push(ChannelRealization { paths, h });
    }
    Ok(ChannelDataset {
        n_t,
        samples,
        origin: if any_pathless {
            DatasetOrigin::Imported
        } else {
            DatasetOrigin::Synthetic
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirichlet_power(delta: f64, n_t: usize) -> f64 {
        // |a(u1)ᴴa(u2)|² closed form: (1/N²)·|sin(πNΔ)/sin(πΔ)|².
        let n = n_t as f64;
        let num = (std::f64::consts::PI * n * delta).sin();
        let den = (std::f64::consts::PI * delta).sin();
        if den.abs() < 1e-300 {
            return 1.0;
        }
        (num / den).powi(2) / (n * n)
    }

    #[test]
    fn steering_broadside_is_uniform() {
        let a = steering(0.0, 4);
        for k in 0..4 {
            assert!((a[k] - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_has_unit_norm_on_grid() {
        for i in 0..1000 {
            let u = -0.5 + i as f64 / 1000.0;
            let a = steering(u, 16);
            assert!((a.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn steering_coherence_matches_dirichlet_closed_form() {
        let n_t = 16;
        for &(u1, u2) in &[(0.1, 0.13), (-0.2, 0.05), (0.31, 0.312)] {
            let a1 = steering(u1, n_t);
            let a2 = steering(u2, n_t);
            let got = a1.inner(&a2).norm_sqr();
            let want = dirichlet_power(u1 - u2, n_t);
            assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        }
    }

    #[test]
    fn steering_exact_orthogonality_at_dft_spacing() {
        let n_t = 16;
        for k in 1..5 {
            let a1 = steering(0.07, n_t);
            let a2 = steering(0.07 + k as f64 / n_t as f64, n_t);
            assert!(a1.inner(&a2).norm() < 1e-12);
        }
    }

    #[test]
    fn assemble_single_path_is_scaled_steering() {
        let p = PathSet::new(vec![C64::new(1.0, 0.0)], vec![0.0]).unwrap();
        let c = assemble(&p, 4);
        let a = steering(0.0, 4);
        assert!(c.h.sub(&a).norm() < 1e-15);
    }

    #[test]
    fn assemble_opposite_phase_paths_cancel() {
        let p = PathSet::new(
            vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
            vec![0.2, 0.2],
        )
        .unwrap();
        let c = assemble(&p, 8);
        assert!(c.h.norm() < 1e-15);
    }

    #[test]
    fn assemble_energy_matches_gram_quadratic_form() {
        // ‖h‖² = 𝛂ᴴ(AᴴA)𝛂 exactly; compare against the explicit Gram form
        // and check the near-orthogonal approximation for separated paths.
        let n_t = 32;
        let gains = vec![
            C64::new(0.9, 0.1),
            C64::new(-0.3, 0.5),
            C64::new(0.05, -0.4),
        ];
        let freqs = vec![-0.3, 0.02, 0.29]; // min separation >= 2/N_t
        let p = PathSet::new(gains.clone(), freqs.clone()).unwrap();
        let c = assemble(&p, n_t);
        let cols: Vec<CVec> = freqs.iter().map(|&u| steering(u, n_t)).collect();
        let mut quad = C64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                quad += gains[i].conj() * cols[i].inner(&cols[j]) * gains[j];
            }
        }
        assert!((c.h.norm_sq() - quad.re).abs() < 1e-12);
        let resid = orthogonality_residual(&p, n_t);
        let diag: f64 = gains.iter().map(|g| g.norm_sqr()).sum();
        // Off-diagonal leakage is bounded by the residual times cross terms.
        let bound = resid * 2.0 * diag * 3.0;
        assert!((c.h.norm_sq() - diag).abs() <= bound);
    }

    #[test]
    fn expansion_consistency_on_random_paths() {
        let mut rng = crate::rng::seeded(5);
        for _ in 0..20 {
            let l = rng.gen_range(1..=4);
            let gains: Vec<C64> = (0..l)
                .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let freqs: Vec<f64> = (0..l).map(|_| rng.gen::<f64>() - 0.5).collect();
            let p = PathSet::new(gains, freqs).unwrap();
            let c = assemble(&p, 16);
            let again = assemble(c.paths.as_ref().unwrap(), 16);
            assert!(c.h.sub(&again.h).inf_norm() < 1e-12);
        }
    }

    #[test]
    fn orthogonality_residual_cases() {
        let one = PathSet::new(vec![C64::new(1.0, 0.0)], vec![0.17]).unwrap();
        assert_eq!(orthogonality_residual(&one, 16), 0.0);

        let n_t = 16;
        let on_grid = PathSet::new(
            vec![C64::new(1.0, 0.0); 2],
            vec![0.1, 0.1 + 2.0 / n_t as f64],
        )
        .unwrap();
        assert!(orthogonality_residual(&on_grid, n_t) < 1e-12);

        let delta = 1.0 / (2.0 * n_t as f64);
        let off = PathSet::new(vec![C64::new(1.0, 0.0); 2], vec![0.1, 0.1 + delta]).unwrap();
        let got = orthogonality_residual(&off, n_t);
        let want = dirichlet_power(delta, n_t).sqrt();
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn sample_site_collinear_when_degenerate() {
        let model = SiteModel {
            n_t: 16,
            cluster_centers: vec![0.1],
            cluster_spread: 0.0,
            path_count_range: (1, 1),
            gain_profile_db: vec![-100.0],
            gain_sigma_db: 0.0,
            seed: 1,
        };
        let ds = sample_site(&model, 10, 0).unwrap();
        let h0 = &ds.samples[0].h;
        for s in &ds.samples[1..] {
            let c = h0.inner(&s.h).norm() / (h0.norm() * s.h.norm());
            assert!((c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_site_is_deterministic() {
        let model = SiteModel::default_site(16, 7);
        let a = sample_site(&model, 50, 3).unwrap();
        let b = sample_site(&model, 50, 3).unwrap();
        for (x, y) in a.samples.iter().zip(b.samples.iter()) {
            assert_eq!(x.h, y.h);
            assert_eq!(x.paths, y.paths);
        }
        let c = sample_site(&model, 50, 4).unwrap();
        assert_ne!(a.samples[0].h, c.samples[0].h);
    }

    #[test]
    fn sample_site_mean_path_power_matches_profile() {
        let model = SiteModel {
            n_t: 8,
            cluster_centers: vec![0.0],
            cluster_spread: 0.01,
            path_count_range: (1, 1),
            gain_profile_db: vec![-100.0],
            gain_sigma_db: 3.0,
            seed: 11,
        };
        let ds = sample_site(&model, 1000, 2).unwrap();
        let mean_db: f64 = ds
            .samples
            .iter()
            .map(|s| {
                let g = s.paths.as_ref().unwrap().gains[0];
                10.0 * g.norm_sqr().log10()
            })
            .sum::<f64>()
            / ds.len() as f64;
        assert!((mean_db + 100.0).abs() < 1.0, "mean {mean_db} dB");
    }

    #[test]
    fn dataset_round_trip_is_bit_exact() {
        let model = SiteModel::default_site(16, 21);
        let ds = sample_site(&model, 25, 9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.blch");
        save_dataset(&ds, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back.n_t, ds.n_t);
        assert_eq!(back.len(), ds.len());
        for (a, b) in ds.samples.iter().zip(back.samples.iter()) {
            for (x, y) in a.h.entries().iter().zip(b.h.entries().iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
            let (pa, pb) = (a.paths.as_ref().unwrap(), b.paths.as_ref().unwrap());
            for (x, y) in pa.gains.iter().zip(pb.gains.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
            for (x, y) in pa.spatial_freqs.iter().zip(pb.spatial_freqs.iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn dataset_bad_magic_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.blch");
        std::fs::write(&path, b"NOPE!rest of file").unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn dataset_truncation_is_error() {
        let model = SiteModel::default_site(8, 2);
        let ds = sample_site(&model, 10, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.blch");
        save_dataset(&ds, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        // Declared count 10 but drop the last record's worth of bytes.
        let cut = bytes.len() - 64;
        std::fs::write(&path, &bytes[..cut]).unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::Truncated(_))));
    }
}
