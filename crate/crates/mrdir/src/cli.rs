//! Command-line surface: dataset simulation, direction fitting, summary
//! ingestion and classical baselines, each emitting machine-readable
//! documents with a full configuration echo.
//!
//! Exit codes: 0 on success, 2 for usage or input errors, 3 when the
//! sampler hits its iteration cap before the evidence converges.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::baselines::{self, BidirectionalTable, DirectionEstimates};
use crate::data_io::{self, StatsDocument};
use crate::error::{Error, Result};
use crate::inference::{self, AnalysisOptions, DirectionChoice};
use crate::nested::SamplerConfig;
use crate::priors::{PriorConfig, SigmaScale, WeightPrior};
use crate::sem::SufficientStats;
use crate::simulate::{self, Scenario};

/// `format` field of simulation ground-truth documents.
pub const TRUTH_FORMAT: &str = "simulation-truth";

/// `format` field of baseline-estimate documents.
pub const BASELINES_FORMAT: &str = "baseline-estimates";

/// `format` field of the document written when a fit fails to converge.
pub const FIT_ERROR_FORMAT: &str = "fit-error";

/// Document version shared by the CLI-owned document formats.
pub const CLI_DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "mrdir",
    version,
    about = "Bayesian causal-direction inference for Mendelian randomization",
    long_about = "Fits structural models for both causal directions between an exposure and \
                  an outcome using genetic variants as instruments, compares them through \
                  nested-sampling evidence, and reports Bayes factors, posterior model \
                  probabilities and model-averaged causal-effect posteriors. Also ships a \
                  simulator, GWAS-style summary ingestion and classical Wald/IVW baselines."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset plus its ground truth.
    Simulate(SimulateArgs),
    /// Fit the causal-direction models and report evidence and posteriors.
    Fit(FitArgs),
    /// Convert per-variant summary records into a sufficient-statistics file.
    Summary(SummaryArgs),
    /// Classical per-variant Wald ratios and their IVW combination.
    Baselines(BaselinesArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Named preset scenario (see --list-presets).
    #[arg(long, conflicts_with = "scenario")]
    preset: Option<String>,
    /// Scenario TOML file describing a custom generator.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// List the available presets and exit.
    #[arg(long, exclusive = true)]
    list_presets: bool,
    /// Override the number of rows.
    #[arg(long, value_name = "ROWS")]
    n: Option<usize>,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// pleiotropy_robustness only: fraction of variants with zero
    /// pleiotropic effect.
    #[arg(long)]
    valid_fraction: Option<f64>,
    /// bidirectional only: size of the two cross effects.
    #[arg(long)]
    delta: Option<f64>,
    /// nonlinear_tanh only: saturation scale of the causal response.
    #[arg(long)]
    tanh_scale: Option<f64>,
    /// t_noise only: degrees of freedom of the outcome noise.
    #[arg(long)]
    t_dof: Option<f64>,
    /// Output CSV path for the dataset.
    #[arg(long, required_unless_present = "list_presets")]
    out: Option<PathBuf>,
    /// Output JSON path for the scenario echo and ground truth
    /// (default: <out>.truth.json).
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

/// Scenario echo plus realized ground truth of one simulated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthDocument {
    /// Always [`TRUTH_FORMAT`].
    pub format: String,
    /// Document version.
    pub version: u32,
    /// The exact generator configuration, reproducible with `--scenario`.
    pub scenario: Scenario,
    /// Realized frequencies, parameters and instrument roles.
    pub truth: simulate::GroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    /// Fit both directions and compare them.
    Both,
    /// Fit only exposure → outcome and give it probability one.
    Forward,
    /// Fit only outcome → exposure and give it probability one.
    Reverse,
}

impl From<DirectionArg> for DirectionChoice {
    fn from(arg: DirectionArg) -> Self {
        match arg {
            DirectionArg::Both => DirectionChoice::Both,
            DirectionArg::Forward => DirectionChoice::Forward,
            DirectionArg::Reverse => DirectionChoice::Reverse,
        }
    }
}

fn parse_odds(text: &str) -> std::result::Result<f64, String> {
    if text == "inf" {
        return Ok(f64::INFINITY);
    }
    let value: f64 = text.parse().map_err(|_| {
        format!("expected a nonnegative number or \"inf\", got {text:?}")
    })?;
    if value.is_nan() || value < 0.0 {
        return Err(format!("prior odds must be nonnegative, got {text:?}"));
    }
    Ok(value)
}

fn parse_weight(text: &str) -> std::result::Result<WeightPrior, String> {
    if text == "hier" {
        return Ok(WeightPrior::Hierarchical);
    }
    let value: f64 = text
        .parse()
        .map_err(|_| format!("expected a probability or \"hier\", got {text:?}"))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(format!("slab weight must lie in [0, 1], got {text:?}"));
    }
    Ok(WeightPrior::Fixed(value))
}

fn parse_sigma_scale(text: &str) -> std::result::Result<SigmaScale, String> {
    if text == "auto" {
        return Ok(SigmaScale::Auto);
    }
    let value: f64 = text
        .parse()
        .map_err(|_| format!("expected a positive number or \"auto\", got {text:?}"))?;
    if !(value > 0.0) {
        return Err(format!("noise prior scale must be positive, got {text:?}"));
    }
    Ok(SigmaScale::Fixed(value))
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Individual-level CSV dataset (columns G1..GJ, X, Y).
    #[arg(long, conflicts_with = "stats")]
    data: Option<PathBuf>,
    /// Sufficient-statistics JSON document.
    #[arg(long)]
    stats: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> Result<(SufficientStats, String)> {
        match (&self.data, &self.stats) {
            (Some(path), None) => {
                let read = data_io::read_individual_csv(path)?;
                if read.rows_dropped > 0 {
                    eprintln!(
                        "note: dropped {} incomplete rows from {}",
                        read.rows_dropped,
                        path.display()
                    );
                }
                let stats = data_io::stats_from_individual(&read.data, None)?;
                Ok((stats, path.display().to_string()))
            }
            (None, Some(path)) => {
                Ok((data_io::read_stats(path)?, path.display().to_string()))
            }
            _ => Err(Error::InvalidParameter(
                "exactly one of --data and --stats is required".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Which direction models to fit.
    #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
    direction: DirectionArg,
    /// Prior odds of the forward over the reverse model ("inf" forces the
    /// forward model).
    #[arg(long, default_value = "1", value_parser = parse_odds)]
    prior_odds: f64,
    /// Slab variance of the spike-and-slab priors.
    #[arg(long)]
    tau2: Option<f64>,
    /// Spike-to-slab variance ratio, in (0, 1].
    #[arg(long)]
    lambda: Option<f64>,
    /// Slab weight for the instrument strengths: a probability or "hier".
    #[arg(long, value_parser = parse_weight)]
    w_gamma: Option<WeightPrior>,
    /// Slab weight for the pleiotropic effects: a probability or "hier"
    /// (0 disables pleiotropy a priori).
    #[arg(long, value_parser = parse_weight)]
    w_alpha: Option<WeightPrior>,
    /// Fixed slab weight for the causal effect.
    #[arg(long)]
    w_beta: Option<f64>,
    /// Fixed slab weight shared by the confounder loadings.
    #[arg(long)]
    w_kappa: Option<f64>,
    /// Half-Gaussian scale of the noise-sd priors: a number or "auto"
    /// (twice the observed standard deviation).
    #[arg(long, value_parser = parse_sigma_scale)]
    sigma_scale: Option<SigmaScale>,
    /// Live points (default: 25 per parameter).
    #[arg(long)]
    n_live: Option<usize>,
    /// Slice updates per replacement (default: 5 per parameter).
    #[arg(long)]
    slice_steps: Option<usize>,
    /// Terminate when the remaining evidence fraction drops below this.
    #[arg(long)]
    termination_frac: Option<f64>,
    /// Iteration cap; hitting it is a non-convergence error (exit 3).
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Sampler seed; equal seeds reproduce runs exactly.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Equal-weight posterior draws kept per direction.
    #[arg(long, default_value_t = inference::DEFAULT_POSTERIOR_DRAWS)]
    draws: usize,
    /// Independent run pairs for the empirical Bayes-factor interval.
    #[arg(long, default_value_t = 1)]
    bf_runs: usize,
    /// Confidence level of the Bayes-factor intervals.
    #[arg(long, default_value_t = inference::DEFAULT_INTERVAL_LEVEL)]
    level: f64,
    /// Report JSON path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Equal-weight effect draws CSV (default: <out> with a .beta.csv
    /// suffix when --out is given).
    #[arg(long)]
    samples_out: Option<PathBuf>,
}

impl FitArgs {
    fn prior_config(&self) -> PriorConfig {
        let mut prior = PriorConfig::default();
        if let Some(v) = self.tau2 {
            prior.tau2 = v;
        }
        if let Some(v) = self.lambda {
            prior.lambda = v;
        }
        if let Some(w) = self.w_gamma {
            prior.w_gamma = w;
        }
        if let Some(w) = self.w_alpha {
            prior.w_alpha = w;
        }
        if let Some(w) = self.w_beta {
            prior.w_beta = WeightPrior::Fixed(w);
        }
        if let Some(w) = self.w_kappa {
            prior.w_kappa = WeightPrior::Fixed(w);
        }
        if let Some(s) = self.sigma_scale {
            prior.sigma_prior_scale = s;
        }
        prior
    }

    fn sampler_config(&self) -> SamplerConfig {
        let mut sampler = SamplerConfig { seed: self.seed, ..SamplerConfig::default() };
        sampler.n_live = self.n_live;
        sampler.slice_steps = self.slice_steps;
        if let Some(f) = self.termination_frac {
            sampler.termination_frac = f;
        }
        if let Some(m) = self.max_iterations {
            sampler.max_iterations = m;
        }
        sampler
    }

    fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            direction: self.direction.into(),
            prior: self.prior_config(),
            sampler: self.sampler_config(),
            prior_odds: self.prior_odds,
            posterior_draws: self.draws,
            bf_runs: self.bf_runs,
            interval_level: self.level,
        }
    }
}

/// Document written instead of a report when the sampler fails to converge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitErrorDocument {
    /// Always [`FIT_ERROR_FORMAT`].
    pub format: String,
    /// Document version.
    pub version: u32,
    /// Human-readable failure description.
    pub error: String,
    /// Dead-point iterations completed before the cap.
    pub iterations: usize,
    /// Partial log-evidence estimate at the cap.
    pub log_z: f64,
    /// Log prior volume still unexplored at the cap.
    pub log_volume_remaining: f64,
    /// The options the run was started with.
    pub options: AnalysisOptions,
    /// Input path.
    pub input: String,
}

#[derive(Debug, Args)]
struct SummaryArgs {
    /// Per-variant summary JSON file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Sufficient-statistics JSON output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BaselinesArgs {
    #[command(flatten)]
    input: InputArgs,
    /// 1-based indices of the exposure's instruments; with
    /// --outcome-variants, builds the bidirectional table.
    #[arg(long, value_delimiter = ',', requires = "outcome_variants")]
    exposure_variants: Option<Vec<usize>>,
    /// 1-based indices of the outcome's instruments.
    #[arg(long, value_delimiter = ',', requires = "exposure_variants")]
    outcome_variants: Option<Vec<usize>>,
    /// Output JSON path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Wald/IVW estimates with the configuration echo.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselinesDocument {
    /// Always [`BASELINES_FORMAT`].
    pub format: String,
    /// Document version.
    pub version: u32,
    /// Input path.
    pub input: String,
    /// Sample size behind the statistics.
    pub n_obs: u64,
    /// Number of variants.
    pub n_variants: usize,
    /// 1-based exposure instrument indices, when roles were given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exposure_variants: Option<Vec<usize>>,
    /// 1-based outcome instrument indices, when roles were given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome_variants: Option<Vec<usize>>,
    /// Exposure → outcome estimates. Without role flags, every variant is
    /// used; with them, only the exposure's instruments.
    pub forward: DirectionEstimates,
    /// Outcome → exposure estimates (roles swapped).
    pub reverse: DirectionEstimates,
}

/// Parses `args` and runs the selected command, mapping errors to the
/// documented exit codes.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Summary(args) => cmd_summary(args),
        Command::Baselines(args) => cmd_baselines(args),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text)?;
            Ok(())
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    if args.list_presets {
        for name in simulate::PRESET_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let mut scenario = match (&args.preset, &args.scenario) {
        (Some(name), None) => simulate::preset(name)?,
        (None, Some(path)) => Scenario::from_toml(&fs::read_to_string(path)?)?,
        _ => {
            return Err(Error::InvalidParameter(
                "exactly one of --preset and --scenario is required".into(),
            ))
        }
    };
    if let Some(n) = args.n {
        scenario.n_samples = n;
    }
    if let Some(seed) = args.seed {
        scenario.rng_seed = seed;
    }
    if let Some(v) = args.valid_fraction {
        scenario.valid_fraction = Some(v);
    }
    if let Some(v) = args.delta {
        scenario.delta = Some(v);
    }
    if let Some(v) = args.tanh_scale {
        scenario.tanh_scale = Some(v);
    }
    if let Some(v) = args.t_dof {
        scenario.t_dof = Some(v);
    }
    scenario.validate()?;
    let (data, truth) = scenario.generate()?;
    let out = args.out.as_deref().expect("clap requires --out");
    data_io::write_individual_csv(out, &data)?;
    let truth_path = args
        .truth_out
        .unwrap_or_else(|| PathBuf::from(format!("{}.truth.json", out.display())));
    let document = TruthDocument {
        format: TRUTH_FORMAT.to_string(),
        version: CLI_DOCUMENT_VERSION,
        scenario,
        truth,
    };
    fs::write(&truth_path, serde_json::to_string_pretty(&document)?)?;
    println!(
        "wrote {} rows x {} variants to {} (ground truth: {})",
        data.n_rows(),
        data.n_variants(),
        out.display(),
        truth_path.display()
    );
    Ok(())
}

fn beta_samples_csv(analysis: &inference::Analysis) -> String {
    let mut text = String::from("direction,beta\n");
    for fit in [&analysis.forward, &analysis.reverse].into_iter().flatten() {
        let label = match fit.direction {
            inference::Direction::XToY => "x_to_y",
            inference::Direction::YToX => "y_to_x",
        };
        for beta in &fit.beta_samples {
            text.push_str(label);
            text.push(',');
            text.push_str(&format!("{beta}\n"));
        }
    }
    text
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let (stats, input_label) = args.input.load()?;
    let options = args.analysis_options();
    let analysis = match inference::analyze(&stats, &options) {
        Ok(analysis) => analysis,
        Err(Error::NotConverged { iterations, log_z, log_volume_remaining }) => {
            // Emit the diagnostics as a document so failed runs are as
            // reproducible as successful ones, then exit with code 3.
            let err = Error::NotConverged { iterations, log_z, log_volume_remaining };
            let document = FitErrorDocument {
                format: FIT_ERROR_FORMAT.to_string(),
                version: CLI_DOCUMENT_VERSION,
                error: err.to_string(),
                iterations,
                log_z,
                log_volume_remaining,
                options,
                input: input_label,
            };
            write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&document)?)?;
            return Err(err);
        }
        Err(other) => return Err(other),
    };
    let mut report = analysis.report.clone();
    report.config.input = Some(input_label);
    write_or_print(args.out.as_deref(), &report.to_json()?)?;

    let samples_path = args.samples_out.or_else(|| {
        args.out.as_ref().map(|out| PathBuf::from(format!("{}.beta.csv", out.display())))
    });
    if let Some(path) = samples_path {
        fs::write(&path, beta_samples_csv(&analysis))?;
    }

    if args.out.is_some() {
        // Human-readable recap when the document went to a file.
        println!(
            "p(forward) = {:.4}   p(reverse) = {:.4}",
            report.p_forward, report.p_reverse
        );
        if let Some(bf) = &report.bayes_factor {
            println!(
                "Bayes factor = {:.4}   {}% interval [{:.4}, {:.4}]",
                bf.bayes_factor,
                bf.gaussian_interval.level * 100.0,
                bf.gaussian_interval.low,
                bf.gaussian_interval.high
            );
        }
        for direction in &report.directions {
            println!(
                "{}: log Z = {:.4} +- {:.4}, effect median {:.4} [{:.4}, {:.4}]",
                direction.direction,
                direction.log_z,
                direction.log_z_err,
                direction.beta.q50,
                direction.beta.q2_5,
                direction.beta.q97_5
            );
        }
    }
    Ok(())
}

fn cmd_summary(args: SummaryArgs) -> Result<()> {
    let summary = data_io::read_summary(&args.input)?;
    let stats = data_io::stats_from_summary(&summary)?;
    let document = StatsDocument::from_stats(&stats);
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&document)?)?;
    if let Some(out) = &args.out {
        println!(
            "reconstructed statistics for {} variants, N = {} -> {}",
            stats.variant_count(),
            stats.n_obs(),
            out.display()
        );
    }
    Ok(())
}

/// Converts 1-based CLI variant indices to 0-based, checking the range.
fn to_zero_based(label: &str, indices: &[usize], n_variants: usize) -> Result<Vec<usize>> {
    indices
        .iter()
        .map(|&i| {
            if i == 0 || i > n_variants {
                Err(Error::InvalidParameter(format!(
                    "{label} index {i} out of range 1..={n_variants}"
                )))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

fn cmd_baselines(args: BaselinesArgs) -> Result<()> {
    let (stats, input_label) = args.input.load()?;
    let n_variants = stats.variant_count();
    let (forward, reverse) = match (&args.exposure_variants, &args.outcome_variants) {
        (Some(exposure), Some(outcome)) => {
            let table: BidirectionalTable = baselines::bidirectional_table(
                &stats,
                &to_zero_based("exposure variant", exposure, n_variants)?,
                &to_zero_based("outcome variant", outcome, n_variants)?,
            )?;
            (table.forward, table.reverse)
        }
        (None, None) => {
            let all: Vec<usize> = (0..n_variants).collect();
            (
                baselines::direction_estimates(&stats, &all)?,
                baselines::direction_estimates(&stats.swap_xy(), &all)?,
            )
        }
        // clap's `requires` already rejects a single role flag; this arm
        // covers programmatic construction.
        _ => {
            return Err(Error::InvalidParameter(
                "--exposure-variants and --outcome-variants must be given together".into(),
            ))
        }
    };
    let document = BaselinesDocument {
        format: BASELINES_FORMAT.to_string(),
        version: CLI_DOCUMENT_VERSION,
        input: input_label,
        n_obs: stats.n_obs(),
        n_variants,
        exposure_variants: args.exposure_variants.clone(),
        outcome_variants: args.outcome_variants.clone(),
        forward,
        reverse,
    };
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&document)?)?;
    if args.out.is_some() {
        print_baselines_table(&document);
    }
    Ok(())
}

fn print_baselines_table(document: &BaselinesDocument) {
    println!("direction  variant  estimate      se");
    for (label, estimates) in
        [("X->Y", &document.forward), ("Y->X", &document.reverse)]
    {
        for ratio in &estimates.per_variant {
            println!(
                "{label:<9}  G{:<6}  {:>9.4}  {:>9.4}",
                ratio.variant + 1,
                ratio.estimate,
                ratio.se
            );
        }
        if let Some(pooled) = &estimates.pooled {
            println!(
                "{label:<9}  IVW      {:>9.4}  {:>9.4}",
                pooled.estimate, pooled.se
            );
        }
    }
}
