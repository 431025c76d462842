//! Experiment implementations behind the CLI subcommands.
//!
//! Every experiment is a pure function of (config, master seed): datasets are
//! regenerated from seeds, per-sample noise streams are derived from
//! (master seed, sample index), and worker parallelism cannot reorder
//! results. Emitted CSV/JSON files are byte-stable across reruns.

use std::path::Path;

use beamlab_core::channel::{load_dataset, sample_site, save_dataset, ChannelDataset};
use beamlab_core::learn::{
    self, load_model, save_model, MlpModel, ProbingMode, TrainableProbing, TrainedModel,
};
use beamlab_core::probing::{dft_codebook, random_codebook, uniform_sweep_codebook};
use beamlab_core::rng::mix;
use beamlab_core::schemes::{
    self, angular_grid, angular_response, effective_se, psc, type1, type2, FeedbackOutcome,
    LinkParams, OutcomeRecord, Scheme,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::report::{fmt, write_csv, write_lines, write_summary, OutputFile};

const SALT_DATASET: u64 = 0x647374;
const SALT_EVAL: u64 = 0x65766c;
const SALT_RANDOM_BOOK: u64 = 0x726e64;

/// A loaded config bound to its effective master seed and output directory.
pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub master_seed: u64,
    pub out_dir: &'a Path,
}

/// Index split 70/15/15 by sample index.
pub struct Split {
    pub train_val_end: usize,
    pub test_start: usize,
}

pub fn split_indices(n: usize) -> Split {
    let n85 = ((n as f64) * 0.85).floor() as usize;
    Split {
        train_val_end: n85,
        test_start: n85,
    }
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a ExperimentConfig, seed_override: Option<u64>, out_dir: &'a Path) -> Self {
        Context {
            cfg,
            master_seed: seed_override.unwrap_or(cfg.experiment.seed),
            out_dir,
        }
    }

    pub fn dataset(&self) -> Result<ChannelDataset> {
        sample_site(
            &self.cfg.site_model(),
            self.cfg.experiment.samples,
            mix(self.master_seed, SALT_DATASET),
        )
        .map_err(Error::from)
    }

    pub fn link(&self) -> Result<LinkParams> {
        self.cfg.link_params()
    }

    fn eval_seed(&self, sample_id: usize) -> u64 {
        mix(mix(self.master_seed, SALT_EVAL), sample_id as u64)
    }

    /// Train one model on the train+val share of `ds`.
    pub fn train_model(
        &self,
        ds: &ChannelDataset,
        k: usize,
        q: usize,
        mode: ProbingMode,
    ) -> Result<TrainedModel> {
        let n = ds.len();
        let n85 = split_indices(n).train_val_end;
        let n70 = ((n as f64) * 0.70).floor() as usize;
        if n85 < 2 || n70 == 0 {
            return Err(Error::Config(format!("dataset of {n} samples is too small")));
        }
        let trainval = ChannelDataset {
            n_t: ds.n_t,
            samples: ds.samples[..n85].to_vec(),
            origin: ds.origin,
        };
        let val_fraction = (n85 - n70) as f64 / n85 as f64;
        let tc = self.cfg.train_config(self.master_seed, val_fraction)?;
        learn::train(&trainval, &tc, &self.cfg.arch(k, q), &mode)
            .map_err(|a| Error::Numeric(a.to_string()))
    }
}

/// `gen-site`: draw the dataset and persist it.
pub fn gen_site(ctx: &Context) -> Result<()> {
    let ds = ctx.dataset()?;
    std::fs::create_dir_all(ctx.out_dir).map_err(Error::from)?;
    let path = ctx.out_dir.join("dataset.blch");
    save_dataset(&ds, &path)?;
    let path_counts: Vec<usize> = ds
        .samples
        .iter()
        .map(|s| s.paths.as_ref().map_or(0, |p| p.len()))
        .collect();
    let metrics = json!({
        "samples": ds.len(),
        "n_t": ds.n_t,
        "min_paths": path_counts.iter().min(),
        "max_paths": path_counts.iter().max(),
        "file": "dataset.blch",
    });
    write_summary(ctx.out_dir, "gen-site", ctx.master_seed, ctx.cfg, &[], &metrics)?;
    Ok(())
}

fn convergence_rows(trace: &learn::TrainTrace) -> Vec<String> {
    trace
        .epochs
        .iter()
        .enumerate()
        .map(|(epoch, e)| {
            format!(
                "{},{},{},{}",
                epoch,
                fmt(e.train_eta),
                fmt(e.val_eta),
                fmt(e.grad_norm)
            )
        })
        .collect()
}

/// `train`: one model per (K, Q) setting; emits convergence CSVs and
/// checkpoints. Per-setting failures are recorded without aborting the rest.
pub fn train_cmd(ctx: &Context) -> Result<()> {
    let ds = ctx.dataset()?;
    let mut outputs: Vec<OutputFile> = Vec::new();
    let mut settings = Vec::new();
    let mut any_ok = false;
    for (k, q) in ctx.cfg.kq_list() {
        match ctx.train_model(&ds, k, q, ProbingMode::Learned) {
            Ok(out) => {
                any_ok = true;
                let csv = write_csv(
                    ctx.out_dir,
                    &format!("convergence_k{k}_q{q}.csv"),
                    "epoch,train_eta,val_eta,grad_norm",
                    &convergence_rows(&out.trace),
                )?;
                outputs.push(csv);
                let model_name = format!("model_k{k}_q{q}.blml");
                save_model(&out.probing, &out.mlp, &ctx.out_dir.join(&model_name))?;
                settings.push(json!({
                    "k": k,
                    "q": q,
                    "model": model_name,
                    "initial_val_eta": out.trace.initial_val_eta,
                    "final_val_eta": out.trace.epochs.last().map(|e| e.val_eta),
                }));
            }
            Err(e) => {
                settings.push(json!({ "k": k, "q": q, "error": e.to_string() }));
            }
        }
    }
    if !any_ok {
        return Err(Error::Numeric("every training setting failed".into()));
    }
    let metrics = json!({ "settings": settings });
    write_summary(ctx.out_dir, "train", ctx.master_seed, ctx.cfg, &outputs, &metrics)?;
    Ok(())
}

/// `ablation`: learned probing vs fixed random and fixed DFT probing under
/// the same decoder and training budget.
pub fn ablation(ctx: &Context) -> Result<()> {
    let ds = ctx.dataset()?;
    let (k, q) = (ctx.cfg.probe.k, ctx.cfg.probe.q);
    let modes: Vec<(&str, ProbingMode)> = vec![
        ("learned", ProbingMode::Learned),
        (
            "random",
            ProbingMode::Fixed(random_codebook(
                ds.n_t,
                k,
                mix(ctx.master_seed, SALT_RANDOM_BOOK),
            )),
        ),
        ("dft", ProbingMode::Fixed(uniform_sweep_codebook(ds.n_t, k))),
    ];
    let mut rows = Vec::new();
    let mut metrics = serde_json::Map::new();
    for (name, mode) in modes {
        let out = ctx.train_model(&ds, k, q, mode)?;
        let final_eta = out.trace.epochs.last().map(|e| e.val_eta).unwrap_or(0.0);
        rows.push(format!(
            "{},{},{}",
            name,
            fmt(out.trace.initial_val_eta),
            fmt(final_eta)
        ));
        metrics.insert(name.to_string(), json!(final_eta));
    }
    let csv = write_csv(
        ctx.out_dir,
        "ablation.csv",
        "probing,initial_val_eta,final_val_eta",
        &rows,
    )?;
    write_summary(
        ctx.out_dir,
        "ablation",
        ctx.master_seed,
        ctx.cfg,
        &[csv],
        &serde_json::Value::Object(metrics),
    )?;
    Ok(())
}

/// One test-split sample evaluated under all four schemes.
pub struct SampleEval {
    pub sample_id: usize,
    pub h_norm_sq: f64,
    pub type1: FeedbackOutcome,
    pub type2: FeedbackOutcome,
    pub psc: FeedbackOutcome,
    pub proposed: FeedbackOutcome,
}

/// Evaluate the three conventional schemes plus the trained proposed scheme
/// on the test split, in parallel; per-sample noise streams come from the
/// master seed and the sample index, so scheduling never changes results.
pub fn evaluate_test_split(
    ctx: &Context,
    ds: &ChannelDataset,
    probing: &TrainableProbing,
    mlp: &MlpModel,
) -> Result<(Vec<SampleEval>, usize)> {
    let link = ctx.link()?;
    let quant = dft_codebook(ds.n_t, ctx.cfg.schemes.dft_oversample);
    let noise = ctx.cfg.noise_model();
    let q2 = ctx.cfg.schemes.type2_q;
    let np = ctx.cfg.schemes.psc_ports;
    let test_start = split_indices(ds.len()).test_start;
    let ids: Vec<usize> = (test_start..ds.len()).collect();
    let evals: Vec<Result<Option<SampleEval>>> = ids
        .par_iter()
        .map(|&sample_id| {
            let h = &ds.samples[sample_id].h;
            if h.norm_sq() == 0.0 {
                return Ok(None);
            }
            let t1 = type1(h, &quant, &link)?;
            let t2 = type2(h, &quant, q2, &link)?;
            let ps = psc(h, np, &link)?;
            let pr = learn::export_deployment(
                probing,
                mlp,
                h,
                &noise,
                ctx.eval_seed(sample_id),
                &link,
            )?;
            Ok(Some(SampleEval {
                sample_id,
                h_norm_sq: h.norm_sq(),
                type1: t1,
                type2: t2,
                psc: ps,
                proposed: pr,
            }))
        })
        .collect();
    let mut out = Vec::with_capacity(ids.len());
    let mut skipped = 0usize;
    for e in evals {
        match e? {
            Some(s) => out.push(s),
            None => skipped += 1,
        }
    }
    Ok((out, skipped))
}

fn resolve_model(
    ctx: &Context,
    ds: &ChannelDataset,
    model_path: Option<&Path>,
) -> Result<(TrainableProbing, MlpModel)> {
    match model_path {
        Some(p) => {
            let (probing, mlp) = load_model(p)?;
            if mlp.n_t != ds.n_t {
                return Err(Error::Config(format!(
                    "model was trained for n_t = {}, dataset has {}",
                    mlp.n_t, ds.n_t
                )));
            }
            Ok((probing, mlp))
        }
        None => {
            let trained = ctx.train_model(ds, ctx.cfg.probe.k, ctx.cfg.probe.q, ProbingMode::Learned)?;
            Ok((trained.probing, trained.mlp))
        }
    }
}

fn resolve_dataset(ctx: &Context, dataset_path: Option<&Path>) -> Result<ChannelDataset> {
    match dataset_path {
        Some(p) => {
            let ds = load_dataset(p)?;
            if ds.n_t != ctx.cfg.site.n_t {
                return Err(Error::Config(format!(
                    "dataset has n_t = {}, config says {}",
                    ds.n_t, ctx.cfg.site.n_t
                )));
            }
            Ok(ds)
        }
        None => ctx.dataset(),
    }
}

/// `eval`: per-sample outcome records for all four schemes on the test split.
pub fn eval_cmd(ctx: &Context, model_path: Option<&Path>, dataset_path: Option<&Path>) -> Result<()> {
    let ds = resolve_dataset(ctx, dataset_path)?;
    let (probing, mlp) = resolve_model(ctx, &ds, model_path)?;
    let (evals, skipped) = evaluate_test_split(ctx, &ds, &probing, &mlp)?;
    let q2 = ctx.cfg.schemes.type2_q;
    let np = ctx.cfg.schemes.psc_ports;
    let mut csv_rows = Vec::with_capacity(evals.len() * 4);
    let mut json_lines = Vec::with_capacity(evals.len() * 4);
    for e in &evals {
        for (q_or_np, outcome) in [
            (1, &e.type1),
            (q2, &e.type2),
            (np, &e.psc),
            (mlp.q, &e.proposed),
        ] {
            let rec = OutcomeRecord::new(e.sample_id, q_or_np, outcome);
            csv_rows.push(rec.csv_row());
            json_lines.push(rec.json_line());
        }
    }
    let csv = write_csv(ctx.out_dir, "outcomes.csv", OutcomeRecord::csv_header(), &csv_rows)?;
    let jsonl = write_lines(ctx.out_dir, "outcomes.jsonl", &json_lines)?;
    let metrics = json!({
        "test_samples": evals.len(),
        "skipped_degenerate": skipped,
    });
    write_summary(
        ctx.out_dir,
        "eval",
        ctx.master_seed,
        ctx.cfg,
        &[csv, jsonl],
        &metrics,
    )?;
    Ok(())
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn scheme_outcomes<'a>(e: &'a SampleEval, s: Scheme) -> &'a FeedbackOutcome {
    match s {
        Scheme::Type1 => &e.type1,
        Scheme::Type2 => &e.type2,
        Scheme::Psc => &e.psc,
        Scheme::Proposed => &e.proposed,
    }
}

const ALL_SCHEMES: [Scheme; 4] = [Scheme::Type1, Scheme::Type2, Scheme::Psc, Scheme::Proposed];

/// `compare`: per-scheme mean efficiency, effective SE across the SNR grid,
/// and empirical CDFs at the +10 dB operating point.
pub fn compare_cmd(
    ctx: &Context,
    model_path: Option<&Path>,
    dataset_path: Option<&Path>,
) -> Result<()> {
    let ds = resolve_dataset(ctx, dataset_path)?;
    let (probing, mlp) = resolve_model(ctx, &ds, model_path)?;
    let (evals, skipped) = evaluate_test_split(ctx, &ds, &probing, &mlp)?;
    if evals.is_empty() {
        return Err(Error::Numeric("no usable test samples".into()));
    }
    let link = ctx.link()?;
    let mut outputs = Vec::new();

    // Summary table at the configured operating point.
    let mut summary_rows = Vec::new();
    let mut metrics = serde_json::Map::new();
    for s in ALL_SCHEMES {
        let mean_eta = mean(evals.iter().map(|e| scheme_outcomes(e, s).eta));
        let mean_rate = mean(evals.iter().map(|e| scheme_outcomes(e, s).rate_bps_hz));
        let mean_se = mean(evals.iter().map(|e| scheme_outcomes(e, s).effective_se));
        summary_rows.push(format!(
            "{s},{},{},{},{}",
            fmt(mean_eta),
            fmt(mean_rate),
            fmt(mean_se),
            skipped
        ));
        metrics.insert(format!("mean_eta_{s}"), json!(mean_eta));
        metrics.insert(format!("mean_effective_se_{s}"), json!(mean_se));
    }
    outputs.push(write_csv(
        ctx.out_dir,
        "compare_summary.csv",
        "scheme,mean_eta,mean_rate,mean_effective_se,skipped",
        &summary_rows,
    )?);

    // Effective SE across the SNR grid: the overhead and capture efficiency
    // are SNR-independent, so only the rate term is re-evaluated.
    let mut snr_rows = Vec::new();
    for &snr_db in &ctx.cfg.experiment.snr_grid_db {
        let scaled = link.with_snr_offset_db(snr_db);
        for s in ALL_SCHEMES {
            let se = mean(evals.iter().map(|e| {
                let o = scheme_outcomes(e, s);
                effective_se(o.eta * e.h_norm_sq, o.overhead_uses, &scaled)
            }));
            snr_rows.push(format!("{},{s},{}", fmt(snr_db), fmt(se)));
        }
    }
    outputs.push(write_csv(
        ctx.out_dir,
        "se_vs_snr.csv",
        "snr_db,scheme,mean_effective_se",
        &snr_rows,
    )?);

    // Per-scheme empirical CDF of the effective SE at +10 dB.
    let cdf_link = link.with_snr_offset_db(10.0);
    for s in ALL_SCHEMES {
        let mut values: Vec<f64> = evals
            .iter()
            .map(|e| {
                let o = scheme_outcomes(e, s);
                effective_se(o.eta * e.h_norm_sq, o.overhead_uses, &cdf_link)
            })
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = values.len();
        let rows: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{},{}", fmt(*v), fmt((i + 1) as f64 / n as f64)))
            .collect();
        outputs.push(write_csv(
            ctx.out_dir,
            &format!("cdf_{s}.csv"),
            "effective_se,cdf",
            &rows,
        )?);
    }

    metrics.insert("test_samples".into(), json!(evals.len()));
    metrics.insert("skipped_degenerate".into(), json!(skipped));
    write_summary(
        ctx.out_dir,
        "compare",
        ctx.master_seed,
        ctx.cfg,
        &outputs,
        &serde_json::Value::Object(metrics),
    )?;
    Ok(())
}

/// `pareto`: train per (K, Q) grid point, evaluate held-out mean efficiency
/// and effective SE, and flag points not dominated in (overhead ↓, η ↑).
pub fn pareto_cmd(ctx: &Context) -> Result<()> {
    if ctx.cfg.experiment.pareto_k.is_empty() || ctx.cfg.experiment.pareto_q.is_empty() {
        return Err(Error::Config(
            "pareto needs experiment.pareto_k and experiment.pareto_q".into(),
        ));
    }
    let ds = ctx.dataset()?;
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for &k in &ctx.cfg.experiment.pareto_k {
        for &q in &ctx.cfg.experiment.pareto_q {
            if q > ds.n_t || k < 1 {
                failures.push(json!({"k": k, "q": q, "error": "out of range"}));
                continue;
            }
            match ctx.train_model(&ds, k, q, ProbingMode::Learned) {
                Ok(trained) => {
                    let (evals, _) = evaluate_model_only(ctx, &ds, &trained)?;
                    let mean_eta = mean(evals.iter().map(|(eta, _)| *eta));
                    let mean_se = mean(evals.iter().map(|(_, se)| *se));
                    points.push(SweepPoint {
                        k,
                        q,
                        mean_eta,
                        overhead: k + 2 * q,
                        mean_effective_se: mean_se,
                        pareto: false,
                    });
                }
                Err(e) => failures.push(json!({"k": k, "q": q, "error": e.to_string()})),
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Numeric("every pareto grid point failed".into()));
    }
    mark_pareto(&mut points);
    let rows: Vec<String> = points
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{},{}",
                p.k,
                p.q,
                fmt(p.mean_eta),
                p.overhead,
                fmt(p.mean_effective_se),
                p.pareto
            )
        })
        .collect();
    let csv = write_csv(
        ctx.out_dir,
        "pareto.csv",
        "k,q,mean_eta,overhead,mean_effective_se,pareto",
        &rows,
    )?;
    let metrics = json!({
        "points": points.len(),
        "pareto_points": points.iter().filter(|p| p.pareto).count(),
        "failures": failures,
    });
    write_summary(ctx.out_dir, "pareto", ctx.master_seed, ctx.cfg, &[csv], &metrics)?;
    Ok(())
}

/// Deployment-path (η, effective SE) of one trained model on the test split.
fn evaluate_model_only(
    ctx: &Context,
    ds: &ChannelDataset,
    trained: &TrainedModel,
) -> Result<(Vec<(f64, f64)>, usize)> {
    let link = ctx.link()?;
    let noise = ctx.cfg.noise_model();
    let test_start = split_indices(ds.len()).test_start;
    let ids: Vec<usize> = (test_start..ds.len()).collect();
    let rows: Vec<Result<Option<(f64, f64)>>> = ids
        .par_iter()
        .map(|&sample_id| {
            let h = &ds.samples[sample_id].h;
            if h.norm_sq() == 0.0 {
                return Ok(None);
            }
            let out = learn::export_deployment(
                &trained.probing,
                &trained.mlp,
                h,
                &noise,
                ctx.eval_seed(sample_id),
                &link,
            )?;
            Ok(Some((out.eta, out.effective_se)))
        })
        .collect();
    let mut evals = Vec::with_capacity(ids.len());
    let mut skipped = 0;
    for r in rows {
        match r? {
            Some(v) => evals.push(v),
            None => skipped += 1,
        }
    }
    Ok((evals, skipped))
}

#[derive(Clone, Copy, Debug)]
pub struct SweepPoint {
    pub k: usize,
    pub q: usize,
    pub mean_eta: f64,
    pub overhead: usize,
    pub mean_effective_se: f64,
    pub pareto: bool,
}

/// Flag points not dominated in (overhead ↓, mean η ↑). A point is dominated
/// when another is no worse on both axes and strictly better on one.
pub fn mark_pareto(points: &mut [SweepPoint]) {
    let snapshot: Vec<(usize, f64)> = points.iter().map(|p| (p.overhead, p.mean_eta)).collect();
    for (i, p) in points.iter_mut().enumerate() {
        let dominated = snapshot.iter().enumerate().any(|(j, &(oh, eta))| {
            j != i
                && oh <= p.overhead
                && eta >= p.mean_eta
                && (oh < p.overhead || eta > p.mean_eta)
        });
        p.pareto = !dominated;
    }
}

/// `angular`: normalized angular responses of the proposed, Type-I and
/// Type-II subspaces for selected test samples, plus normalized path powers.
pub fn angular_cmd(
    ctx: &Context,
    model_path: Option<&Path>,
    dataset_path: Option<&Path>,
    sample_ids: &[usize],
) -> Result<()> {
    let ds = resolve_dataset(ctx, dataset_path)?;
    let (probing, mlp) = resolve_model(ctx, &ds, model_path)?;
    let link = ctx.link()?;
    let quant = dft_codebook(ds.n_t, ctx.cfg.schemes.dft_oversample);
    let noise = ctx.cfg.noise_model();
    let grid_points = ctx.cfg.experiment.angular_grid;
    let us = angular_grid(grid_points);

    let ids: Vec<usize> = if sample_ids.is_empty() {
        let test_start = split_indices(ds.len()).test_start;
        (test_start..ds.len()).take(3).collect()
    } else {
        sample_ids.to_vec()
    };

    let mut outputs = Vec::new();
    let mut described = Vec::new();
    for &sample_id in &ids {
        let Some(sample) = ds.samples.get(sample_id) else {
            return Err(Error::Config(format!("sample id {sample_id} out of range")));
        };
        let h = &sample.h;
        if h.norm_sq() == 0.0 {
            described.push(json!({"sample_id": sample_id, "skipped": "degenerate"}));
            continue;
        }
        let proposed_sub =
            learn::infer_subspace(&probing, &mlp, h, &noise, ctx.eval_seed(sample_id))?;
        let t1 = type1(h, &quant, &link)?;
        let t2 = type2(h, &quant, ctx.cfg.schemes.type2_q, &link)?;
        let t1_sub = schemes::report_subspace(&t1.report, &quant, ds.n_t)?;
        let t2_sub = schemes::report_subspace(&t2.report, &quant, ds.n_t)?;
        let g_prop = angular_response(&proposed_sub, grid_points, true);
        let g_t1 = angular_response(&t1_sub, grid_points, true);
        let g_t2 = angular_response(&t2_sub, grid_points, true);
        let rows: Vec<String> = (0..grid_points)
            .map(|i| {
                format!(
                    "{},{},{},{}",
                    fmt(us[i]),
                    fmt(g_prop[i]),
                    fmt(g_t1[i]),
                    fmt(g_t2[i])
                )
            })
            .collect();
        outputs.push(write_csv(
            ctx.out_dir,
            &format!("angular_sample{sample_id}.csv"),
            "u,proposed,type1,type2",
            &rows,
        )?);
        // Path markers, normalized by the strongest path power; omitted for
        // imported samples without a path decomposition.
        if let Some(paths) = &sample.paths {
            let max_power = paths
                .gains
                .iter()
                .map(|g| g.norm_sqr())
                .fold(f64::MIN_POSITIVE, f64::max);
            let rows: Vec<String> = paths
                .spatial_freqs
                .iter()
                .zip(paths.gains.iter())
                .map(|(u, g)| format!("{},{}", fmt(*u), fmt(g.norm_sqr() / max_power)))
                .collect();
            outputs.push(write_csv(
                ctx.out_dir,
                &format!("angular_sample{sample_id}_paths.csv"),
                "u,power_norm",
                &rows,
            )?);
        }
        described.push(json!({"sample_id": sample_id, "paths": sample.paths.as_ref().map(|p| p.len())}));
    }
    let metrics = json!({ "samples": described });
    write_summary(ctx.out_dir, "angular", ctx.master_seed, ctx.cfg, &outputs, &metrics)?;
    Ok(())
}

/// Re-export for binary and tests: evaluate a trained model's deployment-path
/// mean efficiency on the test split.
pub fn deployment_mean_eta(ctx: &Context, ds: &ChannelDataset, trained: &TrainedModel) -> Result<f64> {
    let (evals, _) = evaluate_model_only(ctx, ds, trained)?;
    if evals.is_empty() {
        return Err(Error::Numeric("no usable test samples".into()));
    }
    Ok(mean(evals.iter().map(|(eta, _)| *eta)))
}
