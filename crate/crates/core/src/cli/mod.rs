//! The `prdim` command line.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{merge_config, parse_config, MergedArgs};

use crate::analysis::{alignment_report, estimate_kernel_moments, predict_bias_variance, BiasTarget};
use crate::error::{Error, Result};
use crate::estimator::{estimate_all_variants, estimate_dimensionality, Centering, Correction, EstimatorVariant};
use crate::io::{
    emit_matrix_csv, emit_plot, format_float, ingest, write_npy, AlignmentTable, EstimateTable, InputFormat,
    LocalTable, Metadata, Table,
};
use crate::local::{radius_sweep, twonn, BallSpec};
use crate::matrix::{Observations, SampleMatrix, TrialPair, WeightVector};
use crate::sweep::{subsample_sweep, DEFAULT_GRID};
use crate::synth::{generate_trial_pair, ModelKind, NoiseKind, PopulationSpec};

const ESTIMATE_COLUMNS_HELP: &str = "\
Output columns (estimate rows):
  correction, centering     estimator variant
  gamma                     dimensionality estimate (empty when invalid)
  valid                     false when the denominator is nonpositive or a precondition failed
  noise_corrected           true when two trials were supplied
  a, b                      numerator and denominator
  t1..t5                    the five term estimates
  diagnostics               reasons for invalid estimates";

#[derive(Debug, Parser)]
#[command(name = "prdim", version, about = "Bias-corrected participation-ratio dimensionality")]
pub struct Cli {
    /// Plain key=value file of long flag names; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the dimensionality of one matrix or trial pair.
    #[command(after_help = ESTIMATE_COLUMNS_HELP)]
    Estimate(EstimateArgs),
    /// Estimates on random submatrices over a grid of sizes.
    #[command(after_help = "Output columns: p, q, repetition, seed, then the estimate columns of `estimate`.")]
    Sweep(SweepArgs),
    /// Mean dimensionality inside balls around every row.
    #[command(after_help = "Output columns: radius, correction, centering, mean_gamma, std_gamma, \
valid_centers, skipped_centers, small_balls (balls under four rows), mean_ball_size.")]
    Local(LocalArgs),
    /// Generate a synthetic matrix (or trial pair) and save it.
    Synth(SynthArgs),
    /// Joint dimensionality and alignment of several matrices sharing rows.
    #[command(after_help = "Output columns: quantity, i, j, value. Quantities: kappa and gamma per \
matrix i, cka per pair (i, j), then gamma_joint, gamma_align, gamma_ortho, exd, weighted_mean_cka, \
decomposition_residual, identity_residual.")]
    Align(AlignArgs),
    /// Predicted bias and variance of the naive and corrected estimators.
    #[command(after_help = "Output columns: p, q, estimator, predicted_bias, predicted_variance, \
gamma_pop, c, c_prime, c_tilde, c_tilde_prime, psi, psi_tilde.")]
    BiasPredict(BiasArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Npy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Naive,
    Row,
    Col,
    Both,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CenteringArg {
    Task,
    Neuron,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Mahalanobis,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Linear,
    Rff,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseKindArg {
    Additive,
    Multiplicative,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Matrix file (rows = stimuli, columns = units).
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// File format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Second trial of the same grid; enables noise correction.
    #[arg(long, value_name = "PATH")]
    pub trial2: Option<PathBuf>,
    /// Average the trial pair over both trial orders.
    #[arg(long)]
    pub symmetrize: bool,
}

#[derive(Debug, Args)]
pub struct VariantArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value = "task")]
    pub centering: CenteringArg,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Per-row weights, one value per row (a single CSV row or column).
    #[arg(long, value_name = "PATH")]
    pub weights: Option<PathBuf>,
    /// CSV output path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Row counts; defaults to 25, 50, ..., 1600 up to the number of rows.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub grid_p: Vec<usize>,
    /// Column counts; defaults to all columns.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub grid_q: Vec<usize>,
    /// Random submatrices per grid cell.
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Base seed; each cell and repetition derives its own.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// SVG plot of the mean estimate per size with standard-deviation bars.
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LocalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value = "task")]
    pub centering: CenteringArg,
    /// Ball radii, ascending.
    #[arg(long, value_delimiter = ',', required = true, value_name = "LIST")]
    pub radii: Vec<f64>,
    #[arg(long, value_enum, default_value = "euclidean")]
    pub metric: MetricArg,
    /// Neighbours defining the local Mahalanobis metric (default 20).
    #[arg(long)]
    pub k_neighbors: Option<usize>,
    /// Also record the TwoNN estimate (on the trial mean for pairs) as metadata.
    #[arg(long)]
    pub twonn: bool,
    /// CSV output path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// SVG plot of the mean estimate against radius.
    #[arg(long, value_name = "PATH")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "linear")]
    pub model: ModelArg,
    /// Latent dimension.
    #[arg(long, default_value_t = 5)]
    pub dim: usize,
    /// Standard deviation of the RFF inputs.
    #[arg(long, default_value_t = 1.0)]
    pub input_scale: f64,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, value_enum, default_value = "additive")]
    pub noise_kind: NoiseKindArg,
}

impl ModelArgs {
    fn spec(&self) -> PopulationSpec {
        let spec = match self.model {
            ModelArg::Linear => PopulationSpec::linear(self.dim, self.noise),
            ModelArg::Rff => PopulationSpec::rff(self.dim, self.input_scale, self.noise),
        };
        spec.with_noise_kind(match self.noise_kind {
            NoiseKindArg::Additive => NoiseKind::Additive,
            NoiseKindArg::Multiplicative => NoiseKind::Multiplicative,
        })
    }

    fn describe(&self, meta: &mut Metadata) {
        let spec = self.spec();
        meta.push(
            "model",
            match spec.kind {
                ModelKind::Linear => "linear",
                ModelKind::Rff => "rff",
            },
        );
        meta.push("latent_dim", spec.latent_dim);
        if spec.kind == ModelKind::Rff {
            meta.push("input_scale", spec.input_scale);
        }
        meta.push("noise_std", spec.noise_std);
        meta.push("noise_kind", format!("{:?}", spec.noise_kind).to_lowercase());
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Rows (stimuli) to draw.
    #[arg(long)]
    pub rows: usize,
    /// Columns (units) to draw.
    #[arg(long)]
    pub cols: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output for the (first) trial.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Output for an independent second trial of the same signal.
    #[arg(long, value_name = "PATH")]
    pub out2: Option<PathBuf>,
    /// File format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// One matrix per manifold; repeat the flag for each.
    #[arg(long = "input", required = true, value_name = "PATH")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_enum, default_value = "naive")]
    pub variant: VariantArg,
    /// Centered modes are experimental: the decomposition is exact only without centering.
    #[arg(long, value_enum, default_value = "none")]
    pub centering: CenteringArg,
    /// CSV output path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BiasArgs {
    /// Reference matrix treated as the population; synthesized when omitted.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Size of the synthesized reference.
    #[arg(long, default_value_t = 2000)]
    pub rows: usize,
    #[arg(long, default_value_t = 2000)]
    pub cols: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Row counts to predict for.
    #[arg(long, value_delimiter = ',', required = true, value_name = "LIST")]
    pub grid_p: Vec<usize>,
    /// Column counts to predict for.
    #[arg(long, value_delimiter = ',', required = true, value_name = "LIST")]
    pub grid_q: Vec<usize>,
    /// CSV output path; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn centering(arg: CenteringArg) -> Centering {
    match arg {
        CenteringArg::Task => Centering::Task,
        CenteringArg::Neuron => Centering::Neuron,
        CenteringArg::None => Centering::None,
    }
}

fn variants(arg: VariantArg, c: CenteringArg) -> Vec<EstimatorVariant> {
    let c = centering(c);
    let corrections: Vec<Correction> = match arg {
        VariantArg::Naive => vec![Correction::Naive],
        VariantArg::Row => vec![Correction::Row],
        VariantArg::Col => vec![Correction::Col],
        VariantArg::Both => vec![Correction::Both],
        VariantArg::All => Correction::ALL.to_vec(),
    };
    corrections.into_iter().map(|k| EstimatorVariant::new(k, c)).collect()
}

fn format_for(arg: Option<FormatArg>, path: &Path) -> InputFormat {
    match arg {
        Some(FormatArg::Csv) => InputFormat::Csv,
        Some(FormatArg::Npy) => InputFormat::Npy,
        None => InputFormat::from_path(path),
    }
}

enum Loaded {
    Single(SampleMatrix),
    Pair(TrialPair),
}

impl Loaded {
    fn obs(&self) -> Observations<'_> {
        match self {
            Loaded::Single(m) => m.into(),
            Loaded::Pair(p) => p.into(),
        }
    }
}

fn load(args: &InputArgs, meta: &mut Metadata) -> Result<Loaded> {
    let format = format_for(args.format, &args.input);
    let first = ingest(&args.input, format)?;
    meta.push("input", args.input.display());
    meta.push("format", format);
    meta.push("shape", format!("{}x{}", first.rows(), first.cols()));
    match &args.trial2 {
        None => Ok(Loaded::Single(first)),
        Some(path) => {
            let second = ingest(path, format_for(args.format, path))?;
            meta.push("trial2", path.display());
            meta.push("symmetrize", args.symmetrize);
            Ok(Loaded::Pair(TrialPair::new(first, second)?.symmetrized(args.symmetrize)))
        }
    }
}

fn load_weights(path: &Path) -> Result<WeightVector> {
    let m = ingest(path, InputFormat::from_path(path))?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(Error::InvalidWeights(format!(
            "{}: expected a single row or column, found {}x{}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    WeightVector::new(m.view().iter().copied().collect())
}

fn write_table(table: &dyn Table, meta: &Metadata, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => crate::io::emit_csv(table, meta, path),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            crate::io::write_csv(table, meta, &mut lock)
                .and_then(|_| lock.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn run_estimate(a: &EstimateArgs, mut meta: Metadata) -> Result<()> {
    let data = load(&a.input, &mut meta)?;
    let weights = a.weights.as_deref().map(load_weights).transpose()?;
    if let Some(path) = &a.weights {
        meta.push("weights", path.display());
    }
    let requested = variants(a.variant.variant, a.variant.centering);
    let estimates = if requested.len() == 4 {
        let all = estimate_all_variants(data.obs(), requested[0].centering, weights.as_ref())?;
        all.into_values().collect()
    } else {
        vec![estimate_dimensionality(data.obs(), requested[0], weights.as_ref())?]
    };
    write_table(&EstimateTable(&estimates), &meta, a.out.as_deref())
}

fn run_sweep(a: &SweepArgs, mut meta: Metadata) -> Result<()> {
    let data = load(&a.input, &mut meta)?;
    let (rows, cols) = data.obs().shape();
    let grid_p = if a.grid_p.is_empty() {
        let mut g: Vec<usize> = DEFAULT_GRID.iter().copied().filter(|&p| p <= rows).collect();
        if g.is_empty() {
            g.push(rows);
        }
        meta.push("grid_p_default", true);
        g
    } else {
        a.grid_p.clone()
    };
    let grid_q = if a.grid_q.is_empty() {
        meta.push("grid_q_default", true);
        vec![cols]
    } else {
        a.grid_q.clone()
    };
    meta.push("grid_p", join(&grid_p));
    meta.push("grid_q", join(&grid_q));
    meta.push("repetitions", a.reps);
    meta.push("seed", a.seed);
    let vs = variants(a.variant.variant, a.variant.centering);
    let result = subsample_sweep(data.obs(), &grid_p, &grid_q, a.reps, &vs, a.seed)?;
    write_table(&result, &meta, a.out.as_deref())?;
    if let Some(plot) = &a.plot {
        emit_plot(&result, plot)?;
    }
    Ok(())
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn run_local(a: &LocalArgs, mut meta: Metadata) -> Result<()> {
    let data = load(&a.input, &mut meta)?;
    let ball = match a.metric {
        MetricArg::Euclidean => BallSpec::euclidean(a.radii[0]),
        MetricArg::Mahalanobis => BallSpec::mahalanobis(a.radii[0], a.k_neighbors),
    };
    meta.push("metric", format!("{:?}", ball.metric).to_lowercase());
    if let Some(k) = ball.k_neighbors {
        meta.push("k_neighbors", k);
    }
    if a.twonn {
        let estimate = match &data {
            Loaded::Single(m) => twonn(m)?,
            Loaded::Pair(p) => twonn(&p.mean())?,
        };
        meta.push("twonn", format_float(estimate));
    }
    let mut results = Vec::new();
    for v in variants(a.variant, a.centering) {
        results.extend(radius_sweep(data.obs(), &ball, &a.radii, v)?);
    }
    write_table(&LocalTable(&results), &meta, a.out.as_deref())?;
    if let Some(plot) = &a.plot {
        emit_plot(results.as_slice(), plot)?;
    }
    Ok(())
}

fn save(matrix: &SampleMatrix, format: InputFormat, meta: &Metadata, path: &Path) -> Result<()> {
    match format {
        InputFormat::Csv => emit_matrix_csv(matrix, meta, path),
        InputFormat::Npy => write_npy(matrix, path),
    }
}

fn run_synth(a: &SynthArgs, mut meta: Metadata) -> Result<()> {
    if a.rows == 0 || a.cols == 0 {
        return Err(Error::InvalidArgument("rows and cols must be positive".into()));
    }
    a.model.describe(&mut meta);
    meta.push("shape", format!("{}x{}", a.rows, a.cols));
    meta.push("seed", a.seed);
    let pair = generate_trial_pair(&a.model.spec(), a.rows, a.cols, a.seed)?;
    let mut first = meta.clone();
    first.push("trial", 1);
    save(pair.trial1(), format_for(a.format, &a.out), &first, &a.out)?;
    if let Some(out2) = &a.out2 {
        meta.push("trial", 2);
        save(pair.trial2(), format_for(a.format, out2), &meta, out2)?;
    }
    Ok(())
}

fn run_align(a: &AlignArgs, mut meta: Metadata) -> Result<()> {
    let vs = variants(a.variant, a.centering);
    if vs.len() != 1 {
        return Err(Error::InvalidArgument("align takes a single variant".into()));
    }
    let manifolds = a
        .inputs
        .iter()
        .map(|p| ingest(p, format_for(a.format, p)))
        .collect::<Result<Vec<_>>>()?;
    for p in &a.inputs {
        meta.push("input", p.display());
    }
    meta.push("variant", vs[0]);
    let report = alignment_report(&manifolds, vs[0])?;
    write_table(&AlignmentTable(&report), &meta, a.out.as_deref())
}

struct BiasTable {
    rows: Vec<Vec<String>>,
}

impl Table for BiasTable {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "p",
            "q",
            "estimator",
            "predicted_bias",
            "predicted_variance",
            "gamma_pop",
            "c",
            "c_prime",
            "c_tilde",
            "c_tilde_prime",
            "psi",
            "psi_tilde",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows.clone()
    }
}

fn run_bias(a: &BiasArgs, mut meta: Metadata) -> Result<()> {
    let reference = match &a.input {
        Some(path) => {
            let format = format_for(a.format, path);
            meta.push("input", path.display());
            ingest(path, format)?
        }
        None => {
            a.model.describe(&mut meta);
            meta.push("reference_shape", format!("{}x{}", a.rows, a.cols));
            meta.push("seed", a.seed);
            crate::synth::generate(&a.model.spec(), a.rows, a.cols, a.seed)?
        }
    };
    let m = estimate_kernel_moments(&reference)?;
    let mut rows = Vec::new();
    for &p in &a.grid_p {
        for &q in &a.grid_q {
            if p == 0 || q == 0 {
                return Err(Error::InvalidArgument("sample sizes must be positive".into()));
            }
            for (name, target) in [("naive", BiasTarget::Naive), ("both", BiasTarget::Both)] {
                let (bias, var) = predict_bias_variance(&m, p, q, target);
                let mut row = vec![p.to_string(), q.to_string(), name.to_string()];
                row.extend(
                    [bias, var, m.gamma_pop, m.c, m.c_prime, m.c_tilde, m.c_tilde_prime, m.psi, m.psi_tilde]
                        .iter()
                        .map(|&v| format_float(v)),
                );
                rows.push(row);
            }
        }
    }
    write_table(&BiasTable { rows }, &meta, a.out.as_deref())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Estimate(_) => "estimate",
        Command::Sweep(_) => "sweep",
        Command::Local(_) => "local",
        Command::Synth(_) => "synth",
        Command::Align(_) => "align",
        Command::BiasPredict(_) => "bias-predict",
    }
}

/// Runs a parsed command; `config_hash` goes into the output metadata.
pub fn execute(cli: &Cli, config_hash: &str) -> Result<()> {
    let meta = Metadata::new()
        .with("command", command_name(&cli.command))
        .with("config_sha256", config_hash);
    match &cli.command {
        Command::Estimate(a) => run_estimate(a, meta),
        Command::Sweep(a) => run_sweep(a, meta),
        Command::Local(a) => run_local(a, meta),
        Command::Synth(a) => run_synth(a, meta),
        Command::Align(a) => run_align(a, meta),
        Command::BiasPredict(a) => run_bias(a, meta),
    }
}

/// Full entry point: merges `--config`, parses, runs, and returns the exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let merged = match merge_config(args) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return e.class().exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&merged.args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, &merged.config_hash) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.class().exit_code()
        }
    }
}
