//! Limited-feedback schemes as compression/reconstruction pairs with
//! projector semantics.
//!
//! Every scheme induces a representation subspace for the channel; its quality
//! is the CSI-capture efficiency `η = ‖P·h‖²/‖h‖²` and its cost is a
//! channel-use overhead. Type-I picks one oversampled-DFT beam, Type-II a
//! greedy beam subset with least-squares coefficients, port selection keeps
//! the strongest channel entries, and the learned scheme feeds back
//! coefficients over a base-station-inferred subspace.

use serde::Serialize;

use crate::channel::{steering, PathSet};
use crate::error::{Error, Result};
use crate::numkernel::{
    least_squares, matmul_herm, matvec, matvec_herm, orthonormalize, outer_projector,
    spectral_norm, CMat, CVec, C64, DEFAULT_RANK_TOL,
};
use crate::probing::Codebook;

/// Orthonormal basis with projector semantics.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: CMat,
}

impl Subspace {
    /// Wrap an orthonormal basis; verifies `‖UᴴU − I‖_max < 1e-10`.
    pub fn new(basis: CMat) -> Result<Self> {
        if basis.cols() == 0 || basis.cols() > basis.rows() {
            return Err(Error::InvalidArgument(format!(
                "subspace dimension {} out of range for ambient {}",
                basis.cols(),
                basis.rows()
            )));
        }
        let gram = matmul_herm(&basis, &basis)?;
        let dev = gram.sub(&CMat::identity(basis.cols())).inf_norm();
        if dev >= 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "basis is not orthonormal (deviation {dev:.3e})"
            )));
        }
        Ok(Subspace { basis })
    }

    /// Orthonormalize an arbitrary spanning set first.
    pub fn from_span(span: &CMat) -> Result<Self> {
        Subspace::new(orthonormalize(span, DEFAULT_RANK_TOL)?)
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// Dense projector `P = U·Uᴴ`.
    pub fn projector(&self) -> CMat {
        outer_projector(&self.basis)
    }
}

/// Orthogonal projection `P_𝒰·h = U(Uᴴh)`.
pub fn project(sub: &Subspace, h: &CVec) -> Result<CVec> {
    let coeff = matvec_herm(&sub.basis, h)?;
    matvec(&sub.basis, &coeff)
}

/// CSI-capture efficiency `η = ‖P_𝒰h‖²/‖h‖² ∈ [0, 1]`.
pub fn capture_efficiency(sub: &Subspace, h: &CVec) -> Result<f64> {
    let denom = h.norm_sq();
    if denom == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let coeff = matvec_herm(&sub.basis, h)?;
    Ok(coeff.norm_sq() / denom)
}

/// Link budget: linear SNR `ρ = P_t/σ_n²` and the coherence block length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinkParams {
    pub rho: f64,
    pub t_c: usize,
    pub p_t_dbm: f64,
    pub bw_hz: f64,
    pub noise_psd_dbm_hz: f64,
}

impl LinkParams {
    /// Derive ρ from the power budget:
    /// `ρ_dB = P_t − (S_n + 10·log10 BW)`.
    pub fn from_budget(p_t_dbm: f64, bw_hz: f64, noise_psd_dbm_hz: f64, t_c: usize) -> Result<Self> {
        if t_c == 0 || !(bw_hz > 0.0) {
            return Err(Error::InvalidArgument(
                "coherence length and bandwidth must be positive".into(),
            ));
        }
        let rho_db = p_t_dbm - (noise_psd_dbm_hz + 10.0 * bw_hz.log10());
        Ok(LinkParams {
            rho: 10f64.powf(rho_db / 10.0),
            t_c,
            p_t_dbm,
            bw_hz,
            noise_psd_dbm_hz,
        })
    }

    /// ρ scaled by an SNR offset in dB (for SNR sweeps).
    pub fn with_snr_offset_db(&self, offset_db: f64) -> LinkParams {
        LinkParams {
            rho: self.rho * 10f64.powf(offset_db / 10.0),
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Type1,
    Type2,
    Psc,
    Proposed,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scheme::Type1 => "type1",
            Scheme::Type2 => "type2",
            Scheme::Psc => "psc",
            Scheme::Proposed => "proposed",
        };
        f.write_str(s)
    }
}

/// What the UE reports back, per scheme.
#[derive(Clone, Debug, PartialEq)]
pub enum FeedbackReport {
    /// Single codeword index (the PMI).
    Type1 { index: usize },
    /// Selected beam indices plus least-squares combining coefficients.
    Type2 { indices: Vec<usize>, coefficients: CVec },
    /// Selected port indices plus the channel entries on them.
    Psc { indices: Vec<usize>, coefficients: CVec },
    /// Effective channel over the inferred subspace.
    Proposed { coefficients: CVec },
}

impl FeedbackReport {
    pub fn scheme(&self) -> Scheme {
        match self {
            FeedbackReport::Type1 { .. } => Scheme::Type1,
            FeedbackReport::Type2 { .. } => Scheme::Type2,
            FeedbackReport::Psc { .. } => Scheme::Psc,
            FeedbackReport::Proposed { .. } => Scheme::Proposed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeFlag {
    /// Selected columns were rank-deficient; dependent ones got zero weight.
    RankReduced,
    /// The projected channel vanished; beamformer is a placeholder.
    DegenerateProjection,
}

impl std::fmt::Display for OutcomeFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OutcomeFlag::RankReduced => f.write_str("rank_reduced"),
            OutcomeFlag::DegenerateProjection => f.write_str("degenerate_projection"),
        }
    }
}

/// Full per-channel evaluation record of one scheme.
#[derive(Clone, Debug)]
pub struct FeedbackOutcome {
    pub report: FeedbackReport,
    pub h_hat: CVec,
    pub w_hat: CVec,
    pub eta: f64,
    pub rate_bps_hz: f64,
    /// Feedback/acquisition channel uses beyond the shared SSB sweep
    /// (the proposed scheme additionally counts its K-beam reporting).
    pub overhead_uses: usize,
    pub effective_se: f64,
    pub flags: Vec<OutcomeFlag>,
}

/// Effective spectral efficiency `(1 − T_o/T_c)·log2(1 + ρ·‖Ph‖²)`,
/// clamped to 0 when the overhead fills the coherence block.
pub fn effective_se(projected_gain: f64, overhead_uses: usize, link: &LinkParams) -> f64 {
    if overhead_uses >= link.t_c {
        return 0.0;
    }
    let frac = 1.0 - overhead_uses as f64 / link.t_c as f64;
    frac * (1.0 + link.rho * projected_gain).log2()
}

fn rate(projected_gain: f64, link: &LinkParams) -> f64 {
    (1.0 + link.rho * projected_gain).log2()
}

fn finish_outcome(
    report: FeedbackReport,
    h_hat: CVec,
    w_hat: CVec,
    eta: f64,
    h_norm_sq: f64,
    overhead_uses: usize,
    link: &LinkParams,
    flags: Vec<OutcomeFlag>,
) -> FeedbackOutcome {
    let gain = eta * h_norm_sq;
    FeedbackOutcome {
        report,
        h_hat,
        w_hat,
        eta,
        rate_bps_hz: rate(gain, link),
        overhead_uses,
        effective_se: effective_se(gain, overhead_uses, link),
        flags,
    }
}

/// Type-I feedback: quantize the channel to the best single codeword.
///
/// Overhead `N_t + 1`: non-precoded CSI-RS over all ports plus one index.
pub fn type1(h: &CVec, quant: &Codebook, link: &LinkParams) -> Result<FeedbackOutcome> {
    let h_norm_sq = h.norm_sq();
    if h_norm_sq == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let scores = matvec_herm(&quant.beams, h)?;
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (m, z) in scores.entries().iter().enumerate() {
        let s = z.norm_sqr();
        if s > best_score {
            best_score = s;
            best = m;
        }
    }
    let d = quant.beams.col(best);
    let eta = best_score / h_norm_sq;
    Ok(finish_outcome(
        FeedbackReport::Type1 { index: best },
        d.clone(),
        d,
        eta,
        h_norm_sq,
        quant.n_t() + 1,
        link,
        Vec::new(),
    ))
}

/// Greedy residual-projection beam selection: each step picks the codeword
/// whose addition maximizes the projection-energy gain `‖P_{S∪{m}}h‖² −
/// ‖P_S h‖²`, i.e. the squared coherence of the *orthogonalized* codeword
/// with the residual. Ties go to the lowest index; codewords numerically
/// inside the selected span contribute no gain.
fn greedy_select(h: &CVec, quant: &Codebook, q: usize) -> (Vec<usize>, Vec<usize>, CMat) {
    let n_t = quant.n_t();
    let total = quant.len();
    let mut selected: Vec<usize> = Vec::with_capacity(q);
    let mut survivors: Vec<usize> = Vec::with_capacity(q);
    let mut basis_cols: Vec<CVec> = Vec::with_capacity(q);
    let mut residual = h.clone();
    // Orthogonalized copies of every codeword against the running basis,
    // updated incrementally (one MGS deflation per accepted beam).
    let mut deflated: Vec<CVec> = (0..total).map(|m| quant.beams.col(m)).collect();
    for _ in 0..q.min(total) {
        let mut best = usize::MAX;
        let mut best_gain = f64::NEG_INFINITY;
        for m in 0..total {
            if selected.contains(&m) {
                continue;
            }
            let norm_sq = deflated[m].norm_sq();
            let gain = if norm_sq >= DEFAULT_RANK_TOL * DEFAULT_RANK_TOL {
                deflated[m].inner(&residual).norm_sqr() / norm_sq
            } else {
                0.0
            };
            if gain > best_gain {
                best_gain = gain;
                best = m;
            }
        }
        selected.push(best);
        // Re-orthogonalize the winner fully (two passes) before accepting it.
        let mut v = quant.beams.col(best);
        for _ in 0..2 {
            for u in &basis_cols {
                let c = u.inner(&v);
                for i in 0..n_t {
                    v[i] -= c * u[i];
                }
            }
        }
        let n = v.norm();
        if n >= DEFAULT_RANK_TOL {
            let v = v.scale(C64::new(1.0 / n, 0.0));
            let c = v.inner(&residual);
            for i in 0..n_t {
                residual[i] -= c * v[i];
            }
            for (m, d) in deflated.iter_mut().enumerate() {
                if selected.contains(&m) {
                    continue;
                }
                let c = v.inner(d);
                for i in 0..n_t {
                    d[i] -= c * v[i];
                }
            }
            survivors.push(best);
            basis_cols.push(v);
        }
    }
    (selected, survivors, CMat::from_cols(&basis_cols))
}

/// Type-II feedback: `q` greedily selected dictionary beams plus
/// least-squares combining coefficients.
///
/// Overhead `N_t + 2q`: full-port CSI-RS plus `q` complex coefficients.
pub fn type2(h: &CVec, quant: &Codebook, q: usize, link: &LinkParams) -> Result<FeedbackOutcome> {
    if q < 1 || q > quant.n_t() {
        return Err(Error::InvalidArgument(format!(
            "type2 beam count {q} out of range [1, {}]",
            quant.n_t()
        )));
    }
    let h_norm_sq = h.norm_sq();
    if h_norm_sq == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let (selected, survivors, basis) = greedy_select(h, quant, q);
    let mut flags = Vec::new();

    // Coefficients: Moore-Penrose solution on the independent picks; beams
    // dropped for rank deficiency report zero weight.
    let mut coefficients = CVec::zeros(selected.len());
    if survivors.len() < selected.len() {
        flags.push(OutcomeFlag::RankReduced);
    }
    let cols: Vec<CVec> = survivors.iter().map(|&m| quant.beams.col(m)).collect();
    let d_s = CMat::from_cols(&cols);
    let alpha = least_squares(&d_s, h, 0.0)?;
    for (pos, &m) in survivors.iter().enumerate() {
        let slot = selected.iter().position(|&s| s == m).expect("selected");
        coefficients[slot] = alpha[pos];
    }

    let sub = Subspace::new(basis)?;
    let h_hat = project(&sub, h)?;
    let eta = capture_efficiency(&sub, h)?;
    let h_hat_norm = h_hat.norm();
    let (w_hat, mut more_flags) = if h_hat_norm > 0.0 {
        (h_hat.scale(C64::new(1.0 / h_hat_norm, 0.0)), Vec::new())
    } else {
        (
            sub.basis.col(0),
            vec![OutcomeFlag::DegenerateProjection],
        )
    };
    flags.append(&mut more_flags);
    Ok(finish_outcome(
        FeedbackReport::Type2 {
            indices: selected,
            coefficients,
        },
        h_hat,
        w_hat,
        eta,
        h_norm_sq,
        quant.n_t() + 2 * q,
        link,
        flags,
    ))
}

/// Port-selection feedback: keep the `n_p` strongest channel entries.
///
/// Overhead `N_t + 2·n_p`; the capture efficiency is exactly the kept
/// fraction of entry energy.
pub fn psc(h: &CVec, n_p: usize, link: &LinkParams) -> Result<FeedbackOutcome> {
    let n_t = h.len();
    if n_p < 1 || n_p > n_t {
        return Err(Error::InvalidArgument(format!(
            "port count {n_p} out of range [1, {n_t}]"
        )));
    }
    let h_norm_sq = h.norm_sq();
    if h_norm_sq == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let mut order: Vec<usize> = (0..n_t).collect();
    // Strongest first; ties broken by the lower index.
    order.sort_by(|&a, &b| {
        h[b].norm_sqr()
            .partial_cmp(&h[a].norm_sqr())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut indices: Vec<usize> = order[..n_p].to_vec();
    indices.sort_unstable();
    let coefficients = CVec::from_fn(n_p, |i| h[indices[i]]);
    let mut h_hat = CVec::zeros(n_t);
    for &p in &indices {
        h_hat[p] = h[p];
    }
    let kept: f64 = indices.iter().map(|&p| h[p].norm_sqr()).sum();
    let eta = kept / h_norm_sq;
    let w_hat = h_hat.scale(C64::new(1.0 / h_hat.norm(), 0.0));
    Ok(finish_outcome(
        FeedbackReport::Psc {
            indices,
            coefficients,
        },
        h_hat,
        w_hat,
        eta,
        h_norm_sq,
        n_t + 2 * n_p,
        link,
        Vec::new(),
    ))
}

/// The proposed scheme: the UE reports the effective channel `z_p = Uᴴh`
/// over a base-station-inferred subspace; reconstruction is `P_p·h`.
///
/// Overhead `k_probe + 2q`: the probing-fingerprint report plus `q`
/// coefficients — no full-port CSI-RS.
pub fn proposed(
    h: &CVec,
    sub: &Subspace,
    k_probe: usize,
    link: &LinkParams,
) -> Result<FeedbackOutcome> {
    if sub.ambient_dim() != h.len() {
        return Err(Error::dim("proposed", sub.ambient_dim(), h.len()));
    }
    let h_norm_sq = h.norm_sq();
    if h_norm_sq == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let z_p = matvec_herm(&sub.basis, h)?;
    let h_hat = matvec(&sub.basis, &z_p)?;
    let eta = z_p.norm_sq() / h_norm_sq;
    let h_hat_norm = h_hat.norm();
    let overhead = k_probe + 2 * sub.dim();
    if h_hat_norm == 0.0 {
        // Projected channel vanished: score zero, keep a unit placeholder
        // beamformer instead of a NaN.
        return Ok(FeedbackOutcome {
            report: FeedbackReport::Proposed { coefficients: z_p },
            h_hat,
            w_hat: sub.basis.col(0),
            eta: 0.0,
            rate_bps_hz: 0.0,
            overhead_uses: overhead,
            effective_se: 0.0,
            flags: vec![OutcomeFlag::DegenerateProjection],
        });
    }
    let w_hat = h_hat.scale(C64::new(1.0 / h_hat_norm, 0.0));
    Ok(finish_outcome(
        FeedbackReport::Proposed { coefficients: z_p },
        h_hat,
        w_hat,
        eta,
        h_norm_sq,
        overhead,
        link,
        Vec::new(),
    ))
}

/// Benchmark subspace: the span of the steering vectors of the `q`
/// strongest paths (ties to the lower path index).
pub fn oracle_subspace(paths: &PathSet, q: usize, n_t: usize) -> Result<Subspace> {
    if q < 1 {
        return Err(Error::InvalidArgument("oracle dimension must be >= 1".into()));
    }
    if paths.is_empty() {
        return Err(Error::Unavailable(
            "oracle subspace needs a known path decomposition",
        ));
    }
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| {
        paths.gains[b]
            .norm_sqr()
            .partial_cmp(&paths.gains[a].norm_sqr())
            .unwrap()
            .then(a.cmp(&b))
    });
    let take = q.min(paths.len());
    let cols: Vec<CVec> = order[..take]
        .iter()
        .map(|&l| steering(paths.spatial_freqs[l], n_t))
        .collect();
    Subspace::from_span(&CMat::from_cols(&cols))
}

/// Subspace-mismatch bound: `δ_p = ‖P_p − P⋆‖₂` and the guaranteed
/// efficiency floor `[η⋆ − δ_p]₊`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MismatchBound {
    pub delta: f64,
    pub lower_bound_eta: f64,
}

/// Compute the mismatch bound between an inferred and an oracle subspace.
///
/// Guarantees `capture_efficiency(inferred, h) ≥ lower_bound_eta − 1e-9`.
pub fn mismatch_bound(
    inferred: &Subspace,
    oracle: &Subspace,
    h: &CVec,
) -> Result<MismatchBound> {
    if h.norm_sq() == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let diff = inferred.projector().sub(&oracle.projector());
    let delta = spectral_norm(&diff, 500, 1e-12);
    let eta_oracle = capture_efficiency(oracle, h)?;
    Ok(MismatchBound {
        delta,
        lower_bound_eta: (eta_oracle - delta).max(0.0),
    })
}

/// Uniform spatial-frequency grid over [-0.5, 0.5).
pub fn angular_grid(grid_points: usize) -> Vec<f64> {
    (0..grid_points)
        .map(|i| -0.5 + i as f64 / grid_points as f64)
        .collect()
}

/// Angular response `G(u) = a(u)ᴴ·P·a(u) ∈ [0, 1]` of a subspace projector,
/// evaluated on the uniform grid; optionally normalized by its maximum.
pub fn angular_response(sub: &Subspace, grid_points: usize, normalize_max: bool) -> Vec<f64> {
    assert!(grid_points >= 2);
    let n_t = sub.ambient_dim();
    let mut out: Vec<f64> = angular_grid(grid_points)
        .iter()
        .map(|&u| {
            let a = steering(u, n_t);
            matvec_herm(&sub.basis, &a).expect("shape").norm_sq()
        })
        .collect();
    if normalize_max {
        let peak = out.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            for v in &mut out {
                *v /= peak;
            }
        }
    }
    out
}

/// Rebuild the representation subspace a report induces at the base station.
///
/// Type-I/II resolve indices against the quantization codebook; PSC uses
/// canonical axes. The proposed scheme's subspace lives at the BS already and
/// is not reconstructible from the report alone.
pub fn report_subspace(report: &FeedbackReport, quant: &Codebook, n_t: usize) -> Result<Subspace> {
    match report {
        FeedbackReport::Type1 { index } => {
            Subspace::new(CMat::from_cols(&[quant.beams.col(*index)]))
        }
        FeedbackReport::Type2 { indices, .. } => {
            let cols: Vec<CVec> = indices.iter().map(|&m| quant.beams.col(m)).collect();
            Subspace::from_span(&CMat::from_cols(&cols))
        }
        FeedbackReport::Psc { indices, .. } => {
            let cols: Vec<CVec> = indices
                .iter()
                .map(|&p| {
                    let mut e = CVec::zeros(n_t);
                    e[p] = C64::new(1.0, 0.0);
                    e
                })
                .collect();
            Subspace::new(CMat::from_cols(&cols))
        }
        FeedbackReport::Proposed { .. } => Err(Error::Unavailable(
            "proposed-scheme subspace is inferred at the BS, not carried by the report",
        )),
    }
}

/// Flat record for result files, in the fixed column order.
#[derive(Clone, Debug, Serialize)]
pub struct OutcomeRecord {
    pub sample_id: usize,
    pub scheme: Scheme,
    pub q_or_np: usize,
    pub eta: f64,
    pub rate: f64,
    pub overhead: usize,
    pub effective_se: f64,
    pub flags: String,
}

impl OutcomeRecord {
    pub fn new(sample_id: usize, q_or_np: usize, outcome: &FeedbackOutcome) -> Self {
        let flags = if outcome.flags.is_empty() {
            "-".to_string()
        } else {
            outcome
                .flags
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        OutcomeRecord {
            sample_id,
            scheme: outcome.report.scheme(),
            q_or_np,
            eta: outcome.eta,
            rate: outcome.rate_bps_hz,
            overhead: outcome.overhead_uses,
            effective_se: outcome.effective_se,
            flags,
        }
    }

    pub fn csv_header() -> &'static str {
        "sample_id,scheme,q_or_np,eta,rate,overhead,effective_se,flags"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.sample_id,
            self.scheme,
            self.q_or_np,
            self.eta,
            self.rate,
            self.overhead,
            self.effective_se,
            self.flags
        )
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}
