//! Batch experiments built from the core operations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rand::Rng as _;
use rayon::prelude::*;

use clustered_am::analysis::{de_limit, pc_lower_bound, pc_monte_carlo, DEParams, DE_SUCCESS_LEVEL};
use clustered_am::imagesys::{
    binary_collapse, binary_expand, calibrate_tolerance, dequantize, project_to_learned, quantize, snr, ImagePattern,
};
use clustered_am::learning::{learn_cluster, null_space_dimension, ClusterFit, LearningConfig};
use clustered_am::model::{apply_noise, node_degree_distribution, random_cluster_layout, NoiseSpec};
use clustered_am::recall::{peel, PeelOutcome, RecallConfig};
use clustered_am::{rng, ClusterLayout, Dataset, SparseWeightMatrix};

use crate::io;
use crate::report::{fmt_float, Csv};

/// Learn every cluster in parallel. `constraints` fixes `m` for all
/// clusters; otherwise each cluster learns `n_ℓ - rank` constraints.
pub fn learn_network(
    dataset: &Dataset,
    layout: &ClusterLayout,
    constraints: Option<usize>,
    config: &LearningConfig,
) -> anyhow::Result<Vec<ClusterFit>> {
    (0..layout.num_clusters())
        .into_par_iter()
        .map(|c| {
            let m = match constraints {
                Some(m) => m,
                None => null_space_dimension(dataset, layout, c)?,
            };
            learn_cluster(dataset, layout, c, m, config).with_context(|| format!("learning cluster {c}"))
        })
        .collect()
}

/// `constraint,epoch,cost`, constraints numbered across clusters in order.
pub fn trace_csv(fits: &[ClusterFit]) -> Csv {
    let mut csv = Csv::new(&["constraint", "epoch", "cost"]);
    for (i, fit) in fits.iter().flat_map(|f| &f.fits).enumerate() {
        for (epoch, cost) in fit.trace.iter().enumerate() {
            csv.row(&[i.to_string(), epoch.to_string(), fmt_float(*cost)]);
        }
    }
    csv
}

/// Peel every pattern of `noisy`. Returns the corrected dataset and the log
/// `pattern,round,cluster,attempted,succeeded,changed_neurons`.
pub fn recall_patterns(
    weights: &[SparseWeightMatrix],
    layout: &ClusterLayout,
    noisy: &Dataset,
    config: &RecallConfig,
) -> anyhow::Result<(Dataset, Csv)> {
    let outcomes: Vec<PeelOutcome> = (0..noisy.len())
        .into_par_iter()
        .map(|i| peel(weights, layout, noisy.pattern(i), config, noisy.alphabet_size()))
        .collect::<Result<_, _>>()?;
    let mut csv = Csv::new(&["pattern", "round", "cluster", "attempted", "succeeded", "changed_neurons"]);
    let mut data = Vec::with_capacity(noisy.len() * noisy.n());
    for (i, out) in outcomes.iter().enumerate() {
        data.extend_from_slice(&out.state);
        for e in &out.log {
            csv.row(&[
                i.to_string(),
                e.round.to_string(),
                e.cluster.to_string(),
                u8::from(e.attempted).to_string(),
                u8::from(e.succeeded).to_string(),
                e.changed_neurons.len().to_string(),
            ]);
        }
    }
    Ok((Dataset::from_flat(noisy.n(), noisy.alphabet_size(), data)?, csv))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub p_e: f64,
    pub trials: usize,
    pub pattern_errors: usize,
    pub symbol_errors: usize,
}

impl SweepPoint {
    pub fn per(&self) -> f64 {
        self.pattern_errors as f64 / self.trials as f64
    }
}

/// Pattern and symbol error rates of peeling at each noise level. Trial `t`
/// at level `i` draws its pattern and noise from seed `(seed, i, t)`, so the
/// result does not depend on the number of worker threads.
pub fn sweep_per(
    dataset: &Dataset,
    layout: &ClusterLayout,
    weights: &[SparseWeightMatrix],
    levels: &[f64],
    trials: usize,
    config: &RecallConfig,
    seed: u64,
) -> anyhow::Result<Vec<SweepPoint>> {
    if dataset.is_empty() {
        bail!("dataset is empty");
    }
    if trials == 0 {
        bail!("trials must be at least 1");
    }
    let q = dataset.alphabet_size();
    levels
        .iter()
        .enumerate()
        .map(|(li, &p_e)| {
            let counts: Vec<(usize, usize)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let trial_seed = rng::derive(seed, &[li as u64, t as u64]);
                    let mut r = rng::from_seed(trial_seed);
                    let x = dataset.pattern(r.gen_range(0..dataset.len()));
                    let noise = NoiseSpec::new(p_e, rng::derive(trial_seed, &[1]))?;
                    let (noisy, _) = apply_noise(x, noise, q);
                    let out = peel(weights, layout, &noisy, config, q)?;
                    let wrong = out.state.iter().zip(x).filter(|(a, b)| a != b).count();
                    Ok((usize::from(wrong > 0), wrong))
                })
                .collect::<anyhow::Result<_>>()?;
            Ok(SweepPoint {
                p_e,
                trials,
                pattern_errors: counts.iter().map(|c| c.0).sum(),
                symbol_errors: counts.iter().map(|c| c.1).sum(),
            })
        })
        .collect()
}

/// `p_e,trials,pattern_errors,PER,symbol_errors,SER`.
pub fn sweep_csv(points: &[SweepPoint], n: usize) -> Csv {
    let mut csv = Csv::new(&["p_e", "trials", "pattern_errors", "PER", "symbol_errors", "SER"]);
    for p in points {
        csv.row(&[
            fmt_float(p.p_e),
            p.trials.to_string(),
            p.pattern_errors.to_string(),
            fmt_float(p.per()),
            p.symbol_errors.to_string(),
            fmt_float(p.symbol_errors as f64 / (p.trials * n) as f64),
        ]);
    }
    csv
}

fn fraction_rows(csv: &mut Csv, kind: &str, cluster: &str, mut values: Vec<f64>) {
    if values.is_empty() {
        return;
    }
    values.sort_by(f64::total_cmp);
    let total = values.len() as f64;
    let mut i = 0;
    while i < values.len() {
        let j = values[i..].iter().take_while(|&&v| v == values[i]).count();
        csv.row(&[
            kind.to_string(),
            cluster.to_string(),
            fmt_float(values[i]),
            fmt_float(j as f64 / total),
        ]);
        i += j;
    }
}

/// Normalized degree distributions `kind,cluster,normalized_degree,fraction`.
///
/// Pattern-neuron degrees are divided by the cluster's constraint count,
/// constraint degrees by its neuron count. Rows with cluster `all` pool
/// every cluster.
pub fn degree_report(weights: &[SparseWeightMatrix]) -> Csv {
    let mut csv = Csv::new(&["kind", "cluster", "normalized_degree", "fraction"]);
    let norm = |d: &[usize], by: usize| -> Vec<f64> {
        d.iter().map(|&v| if by == 0 { 0.0 } else { v as f64 / by as f64 }).collect()
    };
    let mut pooled_pattern = Vec::new();
    let mut pooled_constraint = Vec::new();
    for w in weights {
        let p = norm(&w.column_degrees(), w.rows());
        let c = norm(&w.row_degrees(), w.cols());
        let id = w.cluster_id().to_string();
        fraction_rows(&mut csv, "pattern", &id, p.clone());
        fraction_rows(&mut csv, "constraint", &id, c.clone());
        pooled_pattern.extend(p);
        pooled_constraint.extend(c);
    }
    fraction_rows(&mut csv, "pattern", "all", pooled_pattern);
    fraction_rows(&mut csv, "constraint", "all", pooled_constraint);
    csv
}

/// Where the `P_c` fed to density evolution comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcSource {
    /// Mean single-error correction rate over clusters, by simulation.
    Empirical,
    /// Mean of the per-cluster lower bound.
    Bound,
    /// `P_c = 1`.
    One,
}

pub fn network_pc(
    weights: &[SparseWeightMatrix],
    source: PcSource,
    config: &RecallConfig,
    trials: usize,
    seed: u64,
) -> anyhow::Result<f64> {
    if weights.is_empty() {
        bail!("network has no clusters");
    }
    let per_cluster: Vec<f64> = match source {
        PcSource::One => return Ok(1.0),
        PcSource::Empirical => weights
            .par_iter()
            .enumerate()
            .map(|(c, w)| Ok(pc_monte_carlo(w, config, trials, rng::derive(seed, &[c as u64]))?.rate))
            .collect::<anyhow::Result<_>>()?,
        PcSource::Bound => weights
            .iter()
            .map(|w| {
                if w.rows() == 0 {
                    return Ok(0.0);
                }
                let nd = node_degree_distribution(w);
                Ok(pc_lower_bound(&nd.lambda, nd.mean_degree, w.rows(), w.cols())?)
            })
            .collect::<anyhow::Result<_>>()?,
    };
    Ok(per_cluster.iter().sum::<f64>() / per_cluster.len() as f64)
}

/// `p_e,z_limit,success` for each noise level.
pub fn de_curve(lambda: &[f64], rho: &[f64], p_c: f64, levels: &[f64], max_steps: usize) -> anyhow::Result<Csv> {
    let mut csv = Csv::new(&["p_e", "z_limit", "success"]);
    for &p_e in levels {
        let params = DEParams::new(lambda.to_vec(), rho.to_vec(), p_c, p_e)?;
        let z = de_limit(&params, max_steps)?;
        csv.row(&[fmt_float(p_e), fmt_float(z), u8::from(z < DE_SUCCESS_LEVEL).to_string()]);
    }
    Ok(csv)
}

#[derive(Debug, Clone)]
pub struct ImagePipelineOptions {
    pub alphabet_size: u32,
    pub clusters: usize,
    pub membership: f64,
    /// Constraints per cluster; `None` learns `n_ℓ - rank`.
    pub constraints: Option<usize>,
    pub p_e: f64,
    pub tol_quantile: f64,
    pub learning: LearningConfig,
    pub recall: RecallConfig,
    pub seed: u64,
}

impl Default for ImagePipelineOptions {
    fn default() -> Self {
        Self {
            alphabet_size: 16,
            clusters: 40,
            membership: 4.0,
            constraints: Some(25),
            p_e: 0.02,
            tol_quantile: 0.99,
            learning: LearningConfig::image(),
            recall: RecallConfig::image(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageResult {
    pub name: String,
    pub snr_in: f64,
    pub snr_out: f64,
    /// Clusters left unsatisfied when projecting onto the learned set.
    pub residual_clusters: usize,
    pub idempotent: bool,
    pub round_trip: bool,
}

#[derive(Debug, Clone)]
pub struct ImageReport {
    pub results: Vec<ImageResult>,
    pub layout: ClusterLayout,
    pub weights: Vec<SparseWeightMatrix>,
}

impl ImageReport {
    /// `image,snr_in,snr_out,residual_clusters`.
    pub fn csv(&self) -> Csv {
        let mut csv = Csv::new(&["image", "snr_in", "snr_out", "residual_clusters"]);
        for r in &self.results {
            csv.row(&[
                r.name.clone(),
                fmt_float(r.snr_in),
                fmt_float(r.snr_out),
                r.residual_clusters.to_string(),
            ]);
        }
        csv
    }
}

/// `.pgm` files of `dir`, sorted by name.
pub fn list_pgms(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")));
    paths.sort();
    Ok(paths)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Quantize, binary-expand and learn the images of `images_dir`; project
/// each onto the learned set, corrupt the projection and denoise it. Writes
/// `<name>.learned.pgm`, `<name>.noisy.pgm` and `<name>.denoised.pgm` into
/// `out_dir`.
pub fn image_pipeline(images_dir: &Path, out_dir: &Path, opts: &ImagePipelineOptions) -> anyhow::Result<ImageReport> {
    let paths = list_pgms(images_dir)?;
    if paths.is_empty() {
        bail!("no .pgm files in {}", images_dir.display());
    }
    let images: Vec<ImagePattern> = paths.iter().map(|p| io::read_pgm(p)).collect::<Result<_, _>>()?;
    let (w, h) = (images[0].width(), images[0].height());
    if images.iter().any(|i| (i.width(), i.height()) != (w, h)) {
        bail!("all images must share the same size");
    }
    let q = opts.alphabet_size;
    let levels: Vec<Vec<u32>> = images.iter().map(|i| quantize(i, q)).collect::<Result<_, _>>()?;
    let bits: Vec<Vec<u32>> = levels.iter().map(|l| binary_expand(l, q)).collect::<Result<_, _>>()?;
    let n = bits[0].len();
    let dataset = Dataset::new(n, 2, bits.clone())?;

    let layout = random_cluster_layout(n, opts.clusters, opts.membership, 0.0, rng::derive(opts.seed, &[1]))?;
    let learning = LearningConfig {
        seed: rng::derive(opts.seed, &[2]),
        ..opts.learning.clone()
    };
    let fits = learn_network(&dataset, &layout, opts.constraints, &learning)?;
    let weights: Vec<SparseWeightMatrix> = fits.into_iter().map(|f| f.weights).collect();
    let recall = RecallConfig {
        sat_tol: calibrate_tolerance(&weights, &layout, &dataset, opts.tol_quantile, opts.recall.psi)?,
        ..opts.recall.clone()
    };

    let results = paths
        .par_iter()
        .zip(&bits)
        .zip(&levels)
        .enumerate()
        .map(|(i, ((path, x), lv))| {
            let name = stem(path);
            let round_trip = binary_collapse(x, q)? == *lv;
            let proj = project_to_learned(x, &weights, &layout, &recall)?;
            let learned = proj.pattern;
            let idempotent = project_to_learned(&learned, &weights, &layout, &recall)?.pattern == learned;
            let (noisy, _) = apply_noise(&learned, NoiseSpec::new(opts.p_e, rng::derive(opts.seed, &[3, i as u64]))?, 2);
            let denoised = peel(&weights, &layout, &noisy, &recall, 2)?.state;

            let reference = binary_collapse(&learned, q)?;
            let noisy_lv = binary_collapse(&noisy, q)?;
            let denoised_lv = binary_collapse(&denoised, q)?;
            for (suffix, values) in [("learned", &reference), ("noisy", &noisy_lv), ("denoised", &denoised_lv)] {
                let img = ImagePattern::new(w, h, dequantize(values, q)?)?;
                io::write_pgm(&out_dir.join(format!("{name}.{suffix}.pgm")), &img)?;
            }
            Ok(ImageResult {
                name,
                snr_in: snr(&reference, &noisy_lv)?,
                snr_out: snr(&reference, &denoised_lv)?,
                residual_clusters: proj.residual_clusters.len(),
                idempotent,
                round_trip,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(ImageReport {
        results,
        layout,
        weights,
    })
}
