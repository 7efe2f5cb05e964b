//! Command-line definitions and their implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use clustered_am::analysis::{de_threshold, eigen_spectrum};
use clustered_am::learning::{EtaPolicy, LearningConfig, SparsityGradient};
use clustered_am::model::{edge_degree_distributions, random_cluster_layout};
use clustered_am::recall::{RecallConfig, SatTolerance};
use clustered_am::synth::{enumerate_patterns, make_generator_matrix, sample_patterns, verify_rank, DegreeBound, GeneratorSpec};

use crate::experiments::{self, ImagePipelineOptions, PcSource};
use crate::io;
use crate::report::{fmt_float, Csv, RunMeta};

#[derive(Debug, Parser)]
#[command(name = "camem", version, about = "Clustered associative memory experiments")]
pub struct Cli {
    /// Read additional `key=value` flags from a file; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a subspace pattern set `x = Gᵀu`.
    GenData(GenDataArgs),
    /// Sample an overlapping cluster layout.
    GenLayout(GenLayoutArgs),
    /// Learn sparse constraints for every cluster.
    Learn(LearnArgs),
    /// Denoise a file of patterns by peeling.
    Recall(RecallArgs),
    /// Pattern and symbol error rates over noise levels.
    SweepPer(SweepArgs),
    /// Normalized degree distributions of learned weights.
    DegreeReport(DegreeArgs),
    /// Density-evolution threshold.
    DeThreshold(DeThresholdArgs),
    /// Density-evolution limit over noise levels.
    DeCurve(DeCurveArgs),
    /// Eigenvalues of XᵀX.
    Eigen(EigenArgs),
    /// Learn, project and denoise a directory of P2 graymaps.
    ImagePipeline(ImageArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub gamma: u32,
    #[arg(long, default_value_t = 2)]
    pub upsilon: u32,
    /// Pattern alphabet size.
    #[arg(long)]
    pub q: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep only the first patterns in lexicographic order of u.
    #[arg(long, conflicts_with = "sample")]
    pub limit: Option<usize>,
    /// Draw this many patterns with uniform random u instead of enumerating.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Bound only the planted columns and drop out-of-range patterns.
    #[arg(long)]
    pub allow_reject: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenLayoutArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub clusters: usize,
    #[arg(long, default_value_t = 5.0)]
    pub membership: f64,
    /// Relative spread of cluster capacities, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub spread: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Synthetic,
    Image,
}

#[derive(Debug, Clone, Args)]
pub struct LearningArgs {
    /// Default parameter set (image for `image-pipeline`, synthetic otherwise).
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Base step size; defaults to 1 / max ‖x‖² per cluster.
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Couple the sparsity weight as α_t·η = kappa.
    #[arg(long, conflicts_with = "eta")]
    pub kappa: Option<f64>,
    /// Fixed sparsity weight η.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub theta0: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Use the exact tanh-penalty gradient instead of the soft threshold.
    #[arg(long)]
    pub tanh_gradient: bool,
    /// Stop once the mean squared projection reaches this value.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Relative cutoff below which learned weights are dropped.
    #[arg(long)]
    pub zero_epsilon: Option<f64>,
    /// Constraints per cluster; defaults to n_ℓ minus the sub-pattern rank,
    /// or 25 for `image-pipeline`.
    #[arg(long)]
    pub constraints: Option<usize>,
}

impl LearningArgs {
    pub fn config(&self, seed: u64, default_mode: Mode) -> LearningConfig {
        let mut cfg = match self.mode.unwrap_or(default_mode) {
            Mode::Synthetic => LearningConfig::synthetic(),
            Mode::Image => LearningConfig::image(),
        };
        cfg.seed = seed;
        cfg.alpha0 = self.alpha0.or(cfg.alpha0);
        if let Some(kappa) = self.kappa {
            cfg.eta = EtaPolicy::Coupled { kappa };
        }
        if let Some(eta) = self.eta {
            cfg.eta = EtaPolicy::Fixed(eta);
        }
        cfg.theta0 = self.theta0.unwrap_or(cfg.theta0);
        cfg.sigma = self.sigma.unwrap_or(cfg.sigma);
        if self.tanh_gradient {
            cfg.gradient = SparsityGradient::Tanh;
        }
        cfg.epsilon_stop = self.epsilon.unwrap_or(cfg.epsilon_stop);
        cfg.max_epochs = self.max_epochs.unwrap_or(cfg.max_epochs);
        cfg.zero_epsilon = self.zero_epsilon.unwrap_or(cfg.zero_epsilon);
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct RecallOptions {
    /// Update threshold φ (0.82 synthetic, 0.85 image).
    #[arg(long)]
    pub phi: Option<f64>,
    /// Syndrome activation threshold ψ.
    #[arg(long)]
    pub psi: Option<f64>,
    /// Bit-flipping rounds per cluster attempt.
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Maximum peeling rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Absolute syndrome tolerance; defaults to ψ.
    #[arg(long, conflicts_with = "sat_tol_relative")]
    pub sat_tol: Option<f64>,
    /// Syndrome tolerance as a multiple of the largest row 1-norm.
    #[arg(long)]
    pub sat_tol_relative: Option<f64>,
}

impl RecallOptions {
    pub fn config(&self, mode: Mode) -> RecallConfig {
        let mut cfg = match mode {
            Mode::Synthetic => RecallConfig::synthetic(),
            Mode::Image => RecallConfig::image(),
        };
        cfg.phi = self.phi.unwrap_or(cfg.phi);
        cfg.psi = self.psi.unwrap_or(cfg.psi);
        cfg.t_max = self.t_max.unwrap_or(cfg.t_max);
        cfg.peel_rounds_max = self.rounds.unwrap_or(cfg.peel_rounds_max);
        cfg.sat_tol = match (self.sat_tol, self.sat_tol_relative) {
            (Some(t), _) => SatTolerance::Absolute(t),
            (None, Some(f)) => SatTolerance::RowNormRelative(f),
            (None, None) => SatTolerance::Absolute(cfg.psi),
        };
        cfg
    }
}


#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub layout: PathBuf,
    /// Weights file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of `constraint,epoch,cost`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub learning: LearningArgs,
}

#[derive(Debug, Args)]
pub struct RecallArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub layout: PathBuf,
    /// Dataset file of noisy patterns.
    #[arg(long)]
    pub input: PathBuf,
    /// Dataset file of corrected patterns.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV log `pattern,round,cluster,attempted,succeeded,changed_neurons`.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Synthetic)]
    pub mode: Mode,
    #[command(flatten)]
    pub recall: RecallOptions,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub layout: PathBuf,
    #[arg(long)]
    pub weights: PathBuf,
    /// Comma-separated noise levels.
    #[arg(long, value_delimiter = ',', required = true)]
    pub pe: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Synthetic)]
    pub mode: Mode,
    #[command(flatten)]
    pub recall: RecallOptions,
}

#[derive(Debug, Args)]
pub struct DegreeArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PcSourceArg {
    Empirical,
    Bound,
    One,
}

/// Edge-perspective degree polynomials and `P_c`, given directly or measured
/// from a network.
#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Edge-perspective λ̃ coefficients by power of z (e.g. `0,0,1` for z²).
    #[arg(long = "edge-lambda", visible_alias = "lambda", value_delimiter = ',')]
    pub edge_lambda: Option<Vec<f64>>,
    /// Edge-perspective ρ̃ coefficients by power of z.
    #[arg(long = "edge-rho", visible_alias = "rho", value_delimiter = ',')]
    pub edge_rho: Option<Vec<f64>>,
    /// Measure λ̃ and ρ̃ from this layout instead.
    #[arg(long, conflicts_with_all = ["edge_lambda", "edge_rho"])]
    pub layout: Option<PathBuf>,
    /// Fixed P_c.
    #[arg(long, conflicts_with = "pc_source")]
    pub pc: Option<f64>,
    /// Derive P_c from `--weights`.
    #[arg(long, value_enum)]
    pub pc_source: Option<PcSourceArg>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Monte Carlo trials per cluster for the empirical P_c.
    #[arg(long, default_value_t = 10_000)]
    pub pc_trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub recall: RecallOptions,
}

impl GraphArgs {
    fn polynomials(&self) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
        if let Some(path) = &self.layout {
            let d = edge_degree_distributions(&io::read_layout(path)?);
            return Ok((d.lambda_poly(), d.rho_poly()));
        }
        match (&self.edge_lambda, &self.edge_rho) {
            (Some(l), Some(r)) => Ok((l.clone(), r.clone())),
            _ => bail!("give --edge-lambda and --edge-rho, or --layout"),
        }
    }

    fn p_c(&self, meta: &mut RunMeta) -> anyhow::Result<f64> {
        if let Some(pc) = self.pc {
            meta.set("pc_source", "fixed");
            return Ok(pc);
        }
        let source = match self.pc_source.unwrap_or(PcSourceArg::Empirical) {
            PcSourceArg::Empirical => PcSource::Empirical,
            PcSourceArg::Bound => PcSource::Bound,
            PcSourceArg::One => PcSource::One,
        };
        meta.set("pc_source", format!("{source:?}").to_lowercase());
        if source == PcSource::One {
            return Ok(1.0);
        }
        let Some(path) = &self.weights else {
            bail!("give --pc, or --weights to derive P_c");
        };
        let weights = io::read_weights(path)?;
        experiments::network_pc(&weights, source, &self.recall.config(Mode::Synthetic), self.pc_trials, self.seed)
    }
}

#[derive(Debug, Args)]
pub struct DeThresholdArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Bisection tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Also write `p_e,z_limit,success` at the threshold.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeCurveArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Comma-separated noise levels; otherwise `--points` levels evenly
    /// spaced over `[pe-min, pe-max]`.
    #[arg(long, value_delimiter = ',')]
    pub pe: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub pe_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub pe_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long, default_value_t = 100_000)]
    pub max_steps: usize,
    /// CSV output; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// CSV output; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    /// Directory of P2 graymaps, all the same size.
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 16)]
    pub q: u32,
    #[arg(long, default_value_t = 40)]
    pub clusters: usize,
    #[arg(long, default_value_t = 4.0)]
    pub membership: f64,
    #[arg(long, default_value_t = 0.02)]
    pub pe: f64,
    /// Quantile of clean syndromes used as the per-cluster tolerance.
    #[arg(long, default_value_t = 0.99)]
    pub tol_quantile: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub learning: LearningArgs,
    #[command(flatten)]
    pub recall: RecallOptions,
}

fn out_dir(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

fn emit(csv: &Csv, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => csv.write(p)?,
        None => print!("{}", csv.as_str()),
    }
    Ok(())
}

/// Run one parsed command line. `argv` is recorded in `run.meta`.
pub fn run(cli: Cli, argv: &[String]) -> anyhow::Result<()> {
    let args = argv.iter().skip(1).cloned().collect::<Vec<_>>().join(" ");
    match cli.command {
        Command::GenData(a) => gen_data(a, &args),
        Command::GenLayout(a) => {
            let layout = random_cluster_layout(a.n, a.clusters, a.membership, a.spread, a.seed)?;
            io::write_layout(&a.out, &layout)?;
            let mut meta = RunMeta::new("gen-layout");
            meta.set("args", &args).set("seed", a.seed);
            meta.set("mean_membership", fmt_float(layout.mean_membership()));
            meta.write_into(out_dir(&a.out))?;
            Ok(())
        }
        Command::Learn(a) => {
            let dataset = io::read_dataset(&a.data)?;
            let layout = io::read_layout(&a.layout)?;
            let cfg = a.learning.config(a.seed, Mode::Synthetic);
            let fits = experiments::learn_network(&dataset, &layout, a.learning.constraints, &cfg)?;
            let weights: Vec<_> = fits.iter().map(|f| f.weights.clone()).collect();
            io::write_weights(&a.out, &weights)?;
            if let Some(trace) = &a.trace {
                experiments::trace_csv(&fits).write(trace)?;
            }
            let mut meta = RunMeta::new("learn");
            meta.set("args", &args).set("seed", a.seed).set("learning", format!("{cfg:?}"));
            meta.set("constraints", weights.iter().map(|w| w.rows().to_string()).collect::<Vec<_>>().join(","));
            meta.set("attempts", fits.iter().map(|f| f.attempts.to_string()).collect::<Vec<_>>().join(","));
            meta.write_into(out_dir(&a.out))?;
            Ok(())
        }
        Command::Recall(a) => {
            let weights = io::read_weights(&a.weights)?;
            let layout = io::read_layout(&a.layout)?;
            let noisy = io::read_dataset(&a.input)?;
            let cfg = a.recall.config(a.mode);
            let (fixed, log) = experiments::recall_patterns(&weights, &layout, &noisy, &cfg)?;
            io::write_dataset(&a.out, &fixed)?;
            if let Some(p) = &a.log {
                log.write(p)?;
            }
            let mut meta = RunMeta::new("recall");
            meta.set("args", &args).set("recall", format!("{cfg:?}"));
            meta.write_into(out_dir(&a.out))?;
            Ok(())
        }
        Command::SweepPer(a) => {
            let dataset = io::read_dataset(&a.data)?;
            let layout = io::read_layout(&a.layout)?;
            let weights = io::read_weights(&a.weights)?;
            let cfg = a.recall.config(a.mode);
            let points = experiments::sweep_per(&dataset, &layout, &weights, &a.pe, a.trials, &cfg, a.seed)?;
            experiments::sweep_csv(&points, dataset.n()).write(&a.out)?;
            let mut meta = RunMeta::new("sweep-per");
            meta.set("args", &args).set("seed", a.seed).set("recall", format!("{cfg:?}"));
            meta.write_into(out_dir(&a.out))?;
            Ok(())
        }
        Command::DegreeReport(a) => {
            let weights = io::read_weights(&a.weights)?;
            experiments::degree_report(&weights).write(&a.out)?;
            let mut meta = RunMeta::new("degree-report");
            meta.set("args", &args);
            meta.write_into(out_dir(&a.out))?;
            Ok(())
        }
        Command::DeThreshold(a) => {
            let mut meta = RunMeta::new("de-threshold");
            meta.set("args", &args).set("seed", a.graph.seed);
            let (lambda, rho) = a.graph.polynomials()?;
            let p_c = a.graph.p_c(&mut meta)?;
            let threshold = de_threshold(&lambda, &rho, p_c, a.tol)?;
            println!("{}", fmt_float(threshold));
            if let Some(out) = &a.out {
                meta.set("p_c", fmt_float(p_c)).set("threshold", fmt_float(threshold));
                experiments::de_curve(&lambda, &rho, p_c, &[threshold], 100_000)?.write(out)?;
                meta.write_into(out_dir(out))?;
            }
            Ok(())
        }
        Command::DeCurve(a) => {
            let mut meta = RunMeta::new("de-curve");
            meta.set("args", &args).set("seed", a.graph.seed);
            let (lambda, rho) = a.graph.polynomials()?;
            let p_c = a.graph.p_c(&mut meta)?;
            let levels = match &a.pe {
                Some(l) => l.clone(),
                None if a.points < 2 => vec![a.pe_min],
                None => (0..a.points)
                    .map(|i| a.pe_min + (a.pe_max - a.pe_min) * i as f64 / (a.points - 1) as f64)
                    .collect(),
            };
            let csv = experiments::de_curve(&lambda, &rho, p_c, &levels, a.max_steps)?;
            emit(&csv, a.out.as_deref())?;
            if let Some(out) = &a.out {
                meta.set("p_c", fmt_float(p_c));
                meta.write_into(out_dir(out))?;
            }
            Ok(())
        }
        Command::Eigen(a) => {
            let dataset = io::read_dataset(&a.data)?;
            let values = eigen_spectrum(&dataset)?;
            let mut csv = Csv::new(&["index", "eigenvalue"]);
            for (i, v) in values.iter().enumerate() {
                csv.row(&[i.to_string(), fmt_float(*v)]);
            }
            emit(&csv, a.out.as_deref())?;
            if let Some(out) = &a.out {
                let mut meta = RunMeta::new("eigen");
                meta.set("args", &args);
                meta.write_into(out_dir(out))?;
            }
            Ok(())
        }
        Command::ImagePipeline(a) => {
            let opts = ImagePipelineOptions {
                alphabet_size: a.q,
                clusters: a.clusters,
                membership: a.membership,
                constraints: a.learning.constraints.or(ImagePipelineOptions::default().constraints),
                p_e: a.pe,
                tol_quantile: a.tol_quantile,
                learning: a.learning.config(a.seed, Mode::Image),
                recall: a.recall.config(a.learning.mode.unwrap_or(Mode::Image)),
                seed: a.seed,
            };
            let report = experiments::image_pipeline(&a.images, &a.out_dir, &opts)?;
            report.csv().write(&a.out_dir.join("snr.csv"))?;
            io::write_layout(&a.out_dir.join("layout.txt"), &report.layout)?;
            io::write_weights(&a.out_dir.join("weights.txt"), &report.weights)?;
            let mut meta = RunMeta::new("image-pipeline");
            meta.set("args", &args).set("seed", a.seed).set("options", format!("{opts:?}"));
            meta.write_into(&a.out_dir)?;
            Ok(())
        }
    }
}

fn gen_data(a: GenDataArgs, args: &str) -> anyhow::Result<()> {
    let spec = GeneratorSpec {
        k: a.k,
        n: a.n,
        gamma: a.gamma,
        upsilon: a.upsilon,
        alphabet_size: a.q,
        seed: a.seed,
        bound: if a.allow_reject { DegreeBound::Reject } else { DegreeBound::Max },
    };
    let g = make_generator_matrix(&spec).context("building the generator matrix")?;
    let result = match a.sample {
        Some(count) => sample_patterns(&g, a.upsilon, a.q, count, clustered_am::rng::derive(a.seed, &[1]))?,
        None => enumerate_patterns(&g, a.upsilon, a.q, a.limit)?,
    };
    let rank = if result.dataset.is_empty() { 0 } else { verify_rank(&result.dataset)? };
    io::write_dataset(&a.out, &result.dataset)?;

    let mut side = RunMeta::default();
    side.set("k", a.k).set("n", a.n).set("gamma", a.gamma).set("upsilon", a.upsilon);
    side.set("q", a.q).set("ratio", fmt_float(spec.ratio())).set("seed", a.seed);
    side.set("bound", if a.allow_reject { "reject" } else { "max-degree" });
    side.set("degree_budget", spec.degree_budget());
    side.set("max_column_degree", g.column_degrees().into_iter().max().unwrap_or(0));
    side.set("patterns", result.dataset.len()).set("rejected", result.rejected).set("rank", rank);
    let mut sidecar = a.out.clone().into_os_string();
    sidecar.push(".meta");
    io::write(Path::new(&sidecar), &side.render())?;

    let mut meta = RunMeta::new("gen-data");
    meta.set("args", args).set("seed", a.seed);
    meta.write_into(out_dir(&a.out))?;
    Ok(())
}
