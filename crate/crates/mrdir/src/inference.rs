//! Causal-direction inference: fits the structural model in each candidate
//! direction by nested sampling, turns the two evidences into a Bayes factor
//! and posterior model probabilities, and combines the per-model effect
//! posteriors into a model-averaged posterior with an explicit point mass at
//! zero from the competing model.
//!
//! The forward model treats the recorded exposure as the cause of the
//! recorded outcome; the reverse model swaps the two roles and reuses the
//! identical code path and priors, so neither direction is privileged. For a
//! direction with posterior probability `p`, the model-averaged posterior of
//! its causal effect is
//!
//! ```text
//! p(effect | data) = p · p(effect | data, model) + (1 − p) · δ₀(effect)
//! ```
//!
//! where `δ₀` is a Dirac point mass at zero: under the competing model this
//! direction's effect is exactly absent. The atom is carried explicitly as a
//! `(weight, location)` record and never folded into the continuous draws.

use std::cell::RefCell;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nested::{self, EvidenceResult, SamplerConfig, TerminationReason};
use crate::priors::{self, HyperWeights, ParamLayout, PriorConfig, PriorSpec};
use crate::sem::{
    RescaledParams, SemLikelihood, StatsSource, StructuralParams, SufficientStats,
};

/// Number of equal-weight posterior draws kept per direction fit.
pub const DEFAULT_POSTERIOR_DRAWS: usize = 4000;

/// Default confidence level of Bayes-factor intervals.
pub const DEFAULT_INTERVAL_LEVEL: f64 = 0.95;

/// Quantile probabilities reported for effect posteriors.
pub const REPORT_QUANTILE_PROBS: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

/// `format` field of serialized fit reports.
pub const REPORT_FORMAT: &str = "direction-fit-report";

/// Newest supported fit-report version.
pub const REPORT_VERSION: u32 = 1;

/// Candidate causal direction between the recorded exposure X and outcome Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The exposure drives the outcome.
    XToY,
    /// The outcome drives the exposure.
    YToX,
}

impl Direction {
    /// The competing direction.
    pub fn opposite(self) -> Self {
        match self {
            Direction::XToY => Direction::YToX,
            Direction::YToX => Direction::XToY,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::XToY => "X->Y",
            Direction::YToX => "Y->X",
        })
    }
}

/// One equal-weight posterior draw, kept on both parameter scales.
///
/// For a reverse fit the "exposure" role is the recorded outcome, so
/// `original` is expressed in the swapped roles: its `beta` is the effect of
/// Y on X in data units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParameterSample {
    /// Standardized-scale parameters as sampled.
    pub rescaled: RescaledParams,
    /// Data-scale parameters for this fit's exposure/outcome roles.
    pub original: StructuralParams,
    /// Slab-weight hyperparameters attached to the draw.
    pub weights: HyperWeights,
}

/// Result of fitting one causal direction.
#[derive(Debug, Clone)]
pub struct DirectionFit {
    /// Which direction was fit.
    pub direction: Direction,
    /// Evidence estimate with weighted posterior samples and diagnostics.
    pub evidence: EvidenceResult,
    /// Equal-weight draws of the causal effect on the data scale, for this
    /// direction's exposure/outcome roles. Index-aligned with
    /// `parameter_samples`.
    pub beta_samples: Vec<f64>,
    /// Equal-weight full posterior draws on both scales.
    pub parameter_samples: Vec<ParameterSample>,
    prior: PriorSpec,
    genotype_sds: Vec<f64>,
}

impl DirectionFit {
    /// Resolved prior the fit sampled under.
    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    /// Per-variant genotype standard deviations used for scale conversion.
    pub fn genotype_sds(&self) -> &[f64] {
        &self.genotype_sds
    }

    /// Weighted posterior draws `(value, weight)` of the data-scale causal
    /// effect; weights sum to one.
    pub fn weighted_beta(&self) -> Vec<(f64, f64)> {
        let l = self.prior.layout();
        self.evidence
            .samples
            .iter()
            .map(|s| {
                let value = s.point[l.beta()] * s.point[l.sigma_y()] / s.point[l.sigma_x()];
                (value, s.weight)
            })
            .collect()
    }

    /// Weighted posterior draws of variant `j`'s direct effect on this
    /// direction's outcome, data scale.
    pub fn weighted_alpha(&self, j: usize) -> Vec<(f64, f64)> {
        let l = self.prior.layout();
        let sd = self.genotype_sds[j];
        self.evidence
            .samples
            .iter()
            .map(|s| {
                let value = s.point[l.alpha().start + j] * s.point[l.sigma_y()] / sd;
                (value, s.weight)
            })
            .collect()
    }

    /// Reported quantiles of the data-scale causal effect.
    pub fn beta_quantiles(&self) -> Quantiles {
        Quantiles::from_weighted(&self.weighted_beta())
    }

    /// Reported quantiles of every variant's direct effect, data scale.
    pub fn alpha_quantiles(&self) -> Vec<Quantiles> {
        (0..self.genotype_sds.len())
            .map(|j| Quantiles::from_weighted(&self.weighted_alpha(j)))
            .collect()
    }
}

/// The quantile grid reported for a scalar posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantiles {
    /// 2.5% quantile.
    pub q2_5: f64,
    /// 25% quantile.
    pub q25: f64,
    /// Median.
    pub q50: f64,
    /// 75% quantile.
    pub q75: f64,
    /// 97.5% quantile.
    pub q97_5: f64,
}

impl Quantiles {
    /// Quantiles of weighted draws `(value, weight)`; order-independent.
    pub fn from_weighted(pairs: &[(f64, f64)]) -> Self {
        let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = sorted.iter().map(|p| p.1).sum();
        let q = |p: f64| weighted_quantile_sorted(&sorted, total, p);
        Self { q2_5: q(0.025), q25: q(0.25), q50: q(0.5), q75: q(0.75), q97_5: q(0.975) }
    }

    /// Quantiles of equal-weight draws; order-independent.
    pub fn from_draws(values: &[f64]) -> Self {
        let pairs: Vec<(f64, f64)> = values.iter().map(|&v| (v, 1.0)).collect();
        Self::from_weighted(&pairs)
    }
}

/// Smallest value whose cumulative weight reaches `p` of the total weight.
///
/// `sorted` must be ascending in value; weights need not be normalized.
fn weighted_quantile_sorted(sorted: &[(f64, f64)], total: f64, p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let target = p * total;
    let mut cum = 0.0;
    for &(value, weight) in sorted {
        cum += weight;
        if cum >= target {
            return value;
        }
    }
    sorted[sorted.len() - 1].0
}

/// Weighted quantile of unsorted `(value, weight)` draws.
pub fn weighted_quantile(pairs: &[(f64, f64)], p: f64) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidInput("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("quantile probability {p} outside [0, 1]")));
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = sorted.iter().map(|q| q.1).sum();
    Ok(weighted_quantile_sorted(&sorted, total, p))
}

/// Linearly interpolated empirical quantile of ascending `sorted` values
/// (index `h = p (n − 1)`, interpolating between the bracketing order
/// statistics).
pub fn interpolated_quantile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InvalidInput("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("quantile probability {p} outside [0, 1]")));
    }
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Writes the data-scale parameters for a flat standardized-scale vector
/// into `out`, using this layout and the per-variant genotype standard
/// deviations. Inverse of the standardization the priors are placed on;
/// agrees with [`crate::sem::unrescale`].
fn fill_original(
    layout: &ParamLayout,
    genotype_sds: &[f64],
    theta: &[f64],
    out: &mut StructuralParams,
) {
    let sigma_x = theta[layout.sigma_x()];
    let sigma_y = theta[layout.sigma_y()];
    let gamma_start = layout.gamma().start;
    let alpha_start = layout.alpha().start;
    for (j, sd) in genotype_sds.iter().enumerate() {
        out.gamma[j] = theta[gamma_start + j] * sigma_x / sd;
        out.alpha[j] = theta[alpha_start + j] * sigma_y / sd;
    }
    out.beta = theta[layout.beta()] * sigma_y / sigma_x;
    out.kappa_x = theta[layout.kappa_x()] * sigma_x;
    out.kappa_y = theta[layout.kappa_y()] * sigma_y;
    out.sigma_x = sigma_x;
    out.sigma_y = sigma_y;
}

/// Statistics, prior and likelihood prepared for one direction.
struct DirectionProblem {
    stats: SufficientStats,
    prior: PriorSpec,
    genotype_sds: Vec<f64>,
}

fn prepare_direction(
    stats: &SufficientStats,
    direction: Direction,
    prior_config: &PriorConfig,
) -> Result<DirectionProblem> {
    let working = match direction {
        Direction::XToY => stats.clone(),
        Direction::YToX => stats.swap_xy(),
    };
    let prior = PriorSpec::resolve(
        prior_config,
        working.variant_count(),
        working.var_x().sqrt(),
        working.var_y().sqrt(),
    )?;
    let genotype_sds: Vec<f64> =
        working.genotype_spec().variances().iter().map(|v| v.sqrt()).collect();
    Ok(DirectionProblem { stats: working, prior, genotype_sds })
}

/// Runs nested sampling for one prepared direction problem.
fn run_problem(problem: &DirectionProblem, sampler: &SamplerConfig) -> Result<EvidenceResult> {
    let layout = problem.prior.layout();
    let dim = layout.dimension();
    let j = problem.stats.variant_count();
    let likelihood = SemLikelihood::new(&problem.stats);
    let scratch = RefCell::new(StructuralParams {
        gamma: vec![0.0; j],
        alpha: vec![0.0; j],
        beta: 0.0,
        kappa_x: 0.0,
        kappa_y: 0.0,
        sigma_x: 1.0,
        sigma_y: 1.0,
    });
    let transform = |u: &[f64], theta: &mut [f64]| problem.prior.transform_into(u, theta);
    let log_like = |theta: &[f64]| {
        let mut params = scratch.borrow_mut();
        fill_original(&layout, &problem.genotype_sds, theta, &mut params);
        likelihood.log_density(&params)
    };
    let evidence = nested::run(dim, transform, log_like, sampler)?;
    if evidence.terminated == TerminationReason::MaxIterations {
        // The first folded live point starts at the remaining prior volume.
        let log_volume_remaining = evidence
            .samples
            .get(evidence.iterations)
            .map_or(f64::NEG_INFINITY, |s| s.log_volume);
        return Err(Error::NotConverged {
            iterations: evidence.iterations,
            log_z: evidence.log_z,
            log_volume_remaining,
        });
    }
    Ok(evidence)
}

/// Fits one causal direction with [`DEFAULT_POSTERIOR_DRAWS`] equal-weight
/// posterior draws.
pub fn fit_direction(
    stats: &SufficientStats,
    direction: Direction,
    prior_config: &PriorConfig,
    sampler: &SamplerConfig,
) -> Result<DirectionFit> {
    fit_direction_with_draws(stats, direction, prior_config, sampler, DEFAULT_POSTERIOR_DRAWS)
}

/// Fits one causal direction.
///
/// For [`Direction::YToX`] the exposure and outcome roles in the statistics
/// are swapped and the identical model, priors and sampler are applied, so
/// the reverse fit is the same computation on the mirrored problem. The
/// returned samples are expressed in the fit's own roles: a reverse fit's
/// `beta` is the data-scale effect of the recorded outcome on the recorded
/// exposure.
///
/// The sampler sees the standardized parameter scale; draws are converted
/// back to the data scale with the direction's own noise scales, so every
/// returned `beta` sample equals `rescaled.beta · sigma_y / sigma_x` of the
/// same draw.
///
/// A run that hits the iteration cap before the evidence converges is an
/// [`Error::NotConverged`] carrying the partial log evidence and remaining
/// prior volume.
pub fn fit_direction_with_draws(
    stats: &SufficientStats,
    direction: Direction,
    prior_config: &PriorConfig,
    sampler: &SamplerConfig,
    draws: usize,
) -> Result<DirectionFit> {
    if draws == 0 {
        return Err(Error::InvalidParameter("posterior draw count must be >= 1".into()));
    }
    let problem = prepare_direction(stats, direction, prior_config)?;
    let evidence = run_problem(&problem, sampler)?;
    let layout = problem.prior.layout();
    let j = problem.stats.variant_count();
    let points = nested::equal_weight_resample(&evidence, draws, resample_seed_for(sampler.seed, direction))?;
    let mut beta_samples = Vec::with_capacity(points.len());
    let mut parameter_samples = Vec::with_capacity(points.len());
    for theta in &points {
        let (rescaled, weights) = problem.prior.unpack(theta);
        let mut original = StructuralParams {
            gamma: vec![0.0; j],
            alpha: vec![0.0; j],
            beta: 0.0,
            kappa_x: 0.0,
            kappa_y: 0.0,
            sigma_x: 1.0,
            sigma_y: 1.0,
        };
        fill_original(&layout, &problem.genotype_sds, theta, &mut original);
        beta_samples.push(original.beta);
        parameter_samples.push(ParameterSample { rescaled, original, weights });
    }
    Ok(DirectionFit {
        direction,
        evidence,
        beta_samples,
        parameter_samples,
        prior: problem.prior,
        genotype_sds: problem.genotype_sds,
    })
}

/// Deterministic resample seed, distinct per direction.
fn resample_seed_for(sampler_seed: u64, direction: Direction) -> u64 {
    let salt: u64 = match direction {
        Direction::XToY => 0x5eed_f0d5_0000_0001,
        Direction::YToX => 0x5eed_f0d5_0000_0002,
    };
    sampler_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt)
}

/// Point mass (Dirac atom) carried by a mixture posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMass {
    /// Probability carried by the atom.
    pub weight: f64,
    /// Location of the atom; zero for an absent causal effect.
    pub location: f64,
}

/// Model-averaged posterior of one direction's causal effect: a continuous
/// component from that direction's own fit plus a point mass at zero from
/// the competing model.
#[derive(Debug, Clone)]
pub struct MixedEffectPosterior {
    /// Direction whose effect this posterior describes.
    pub direction: Direction,
    /// Equal-weight draws of the continuous component, i.e. of the effect
    /// conditional on this direction's model. The component carries total
    /// probability `1 − atom.weight`.
    pub samples: Vec<f64>,
    /// Explicit point mass at zero with the competing model's posterior
    /// probability; never folded into the draws.
    pub atom: PointMass,
}

/// Posterior comparison of the two direction models.
#[derive(Debug, Clone)]
pub struct ModelAveragedPosterior {
    /// Posterior probability of the forward (X drives Y) model.
    pub p_forward: f64,
    /// Posterior probability of the reverse model; `p_forward + p_reverse`
    /// is exactly one.
    pub p_reverse: f64,
    /// Prior odds in favor of the forward model; may be infinite.
    pub prior_odds: f64,
    /// Posterior odds `bayes_factor · prior_odds`.
    pub posterior_odds: f64,
    /// Log Bayes factor `log Z_forward − log Z_reverse`.
    pub log_bayes_factor: f64,
    /// Bayes factor in favor of the forward model.
    pub bayes_factor: f64,
    /// Bayes-factor interval from Gaussian propagation of the log-evidence
    /// errors, at `interval_level`.
    pub bf_interval: (f64, f64),
    /// Confidence level of `bf_interval`.
    pub interval_level: f64,
    /// Model-averaged posterior of the forward effect.
    pub forward_effect: MixedEffectPosterior,
    /// Model-averaged posterior of the reverse effect.
    pub reverse_effect: MixedEffectPosterior,
}

/// Numerically stable logistic function; maps `±inf` to 1 and 0.
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Gaussian-propagation interval for the Bayes factor: treats the two log
/// evidences as independent Gaussians, so the interval is
/// `exp(log BF ± z · sqrt(err_f² + err_r²))` with `z` the two-sided normal
/// quantile at `level`. Zero errors give a degenerate interval at the Bayes
/// factor itself.
pub fn bf_interval(
    forward: &EvidenceResult,
    reverse: &EvidenceResult,
    level: f64,
) -> Result<(f64, f64)> {
    check_level(level)?;
    for (name, err) in [("forward", forward.log_z_err), ("reverse", reverse.log_z_err)] {
        if !err.is_finite() || err < 0.0 {
            return Err(Error::InvalidInput(format!(
                "{name} log-evidence error must be finite and >= 0, got {err}"
            )));
        }
    }
    let sd = forward.log_z_err.hypot(reverse.log_z_err);
    let z = priors::phi_inv(0.5 + 0.5 * level);
    let log_bf = forward.log_z - reverse.log_z;
    Ok(((log_bf - z * sd).exp(), (log_bf + z * sd).exp()))
}

/// Empirical Bayes-factor interval from repeated independent runs: takes one
/// log Bayes factor per seed and returns the central `level` quantile range
/// of the implied Bayes factors (interpolated empirical quantiles).
pub fn bf_repeated_interval(log_bayes_factors: &[f64], level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if log_bayes_factors.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 repeated runs for an empirical interval, got {}",
            log_bayes_factors.len()
        )));
    }
    if log_bayes_factors.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite log Bayes factor in repeated runs".into()));
    }
    let mut sorted = log_bayes_factors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = interpolated_quantile(&sorted, 0.5 - 0.5 * level)?;
    let hi = interpolated_quantile(&sorted, 0.5 + 0.5 * level)?;
    Ok((lo.exp(), hi.exp()))
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "interval level must lie strictly in (0, 1), got {level}"
        )));
    }
    Ok(())
}

fn check_prior_odds(prior_odds: f64) -> Result<()> {
    if prior_odds.is_nan() || prior_odds < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "prior odds must be a nonnegative real (possibly infinite), got {prior_odds}"
        )));
    }
    Ok(())
}

/// Combines a forward and a reverse fit into posterior model probabilities
/// and model-averaged effect posteriors, at [`DEFAULT_INTERVAL_LEVEL`].
///
/// `prior_odds` is the prior probability ratio of the forward to the reverse
/// model; `1` treats both directions as equally plausible a priori, and an
/// infinite value forces `p_forward = 1` (the forward effect's zero atom
/// then has weight exactly 0).
pub fn model_average(
    forward: &DirectionFit,
    reverse: &DirectionFit,
    prior_odds: f64,
) -> Result<ModelAveragedPosterior> {
    model_average_at_level(forward, reverse, prior_odds, DEFAULT_INTERVAL_LEVEL)
}

/// [`model_average`] with an explicit Bayes-factor interval level.
pub fn model_average_at_level(
    forward: &DirectionFit,
    reverse: &DirectionFit,
    prior_odds: f64,
    level: f64,
) -> Result<ModelAveragedPosterior> {
    if forward.direction != Direction::XToY || reverse.direction != Direction::YToX {
        return Err(Error::InvalidInput(format!(
            "model average needs one {} fit and one {} fit, got {} and {}",
            Direction::XToY,
            Direction::YToX,
            forward.direction,
            reverse.direction
        )));
    }
    check_prior_odds(prior_odds)?;
    let log_bf = forward.evidence.log_z - reverse.evidence.log_z;
    let bayes_factor = log_bf.exp();
    let bf_interval = bf_interval(&forward.evidence, &reverse.evidence, level)?;
    let posterior_odds = bayes_factor * prior_odds;
    let p_forward = logistic(log_bf + prior_odds.ln());
    let p_reverse = 1.0 - p_forward;
    Ok(ModelAveragedPosterior {
        p_forward,
        p_reverse,
        prior_odds,
        posterior_odds,
        log_bayes_factor: log_bf,
        bayes_factor,
        bf_interval,
        interval_level: level,
        forward_effect: MixedEffectPosterior {
            direction: Direction::XToY,
            samples: forward.beta_samples.clone(),
            atom: PointMass { weight: p_reverse, location: 0.0 },
        },
        reverse_effect: MixedEffectPosterior {
            direction: Direction::YToX,
            samples: reverse.beta_samples.clone(),
            atom: PointMass { weight: p_forward, location: 0.0 },
        },
    })
}

/// Which direction models to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionChoice {
    /// Fit both directions and compare them.
    Both,
    /// Fit only X→Y and assign it probability one.
    Forward,
    /// Fit only Y→X and assign it probability one.
    Reverse,
}

/// Serializes possibly-infinite odds as a number or the string `"inf"`.
mod odds_serde {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            serializer.serialize_f64(*value)
        } else {
            serializer.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(x) => Ok(x),
            Raw::Text(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Text(s) => Err(D::Error::custom(format!(
                "odds must be a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Everything a full analysis needs besides the data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Which direction models to fit.
    pub direction: DirectionChoice,
    /// Prior configuration shared by both directions.
    pub prior: PriorConfig,
    /// Sampler configuration shared by both directions.
    pub sampler: SamplerConfig,
    /// Prior odds of the forward over the reverse model; may be infinite.
    #[serde(with = "odds_serde")]
    pub prior_odds: f64,
    /// Equal-weight posterior draws kept per fitted direction.
    pub posterior_draws: usize,
    /// Independent run pairs for the empirical Bayes-factor interval; `1`
    /// reports the Gaussian interval only.
    pub bf_runs: usize,
    /// Confidence level of the Bayes-factor intervals.
    pub interval_level: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            direction: DirectionChoice::Both,
            prior: PriorConfig::default(),
            sampler: SamplerConfig::default(),
            prior_odds: 1.0,
            posterior_draws: DEFAULT_POSTERIOR_DRAWS,
            bf_runs: 1,
            interval_level: DEFAULT_INTERVAL_LEVEL,
        }
    }
}

impl AnalysisOptions {
    /// Validates ranges; the sampler config is checked when it is resolved.
    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        check_prior_odds(self.prior_odds)?;
        check_level(self.interval_level)?;
        if self.posterior_draws == 0 {
            return Err(Error::InvalidParameter("posterior draw count must be >= 1".into()));
        }
        if self.bf_runs == 0 {
            return Err(Error::InvalidParameter("run count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Echo of the configuration and input summary a report was produced from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    /// Which direction models were fit.
    pub direction: DirectionChoice,
    /// Prior configuration.
    pub prior: PriorConfig,
    /// Sampler configuration as requested (per-run seeds are derived from
    /// its seed; each direction report records the seed it used).
    pub sampler: SamplerConfig,
    /// Prior odds of the forward model.
    #[serde(with = "odds_serde")]
    pub prior_odds: f64,
    /// Equal-weight posterior draws per direction.
    pub posterior_draws: usize,
    /// Independent run pairs used for the empirical interval.
    pub bf_runs: usize,
    /// Confidence level of the Bayes-factor intervals.
    pub interval_level: f64,
    /// Where the statistics came from.
    pub stats_source: StatsSource,
    /// Sample size behind the statistics.
    pub n_obs: u64,
    /// Number of variants.
    pub n_variants: usize,
    /// Allele frequencies assumed for the variants.
    pub eaf: Vec<f64>,
    /// Allele copies per variant.
    pub allele_copies: u32,
    /// Input path or label, filled by callers that read from files.
    pub input: Option<String>,
}

/// Evidence, diagnostics and effect posterior summary of one fitted
/// direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionReport {
    /// Which direction.
    pub direction: Direction,
    /// Log evidence.
    pub log_z: f64,
    /// Standard error of the log evidence.
    pub log_z_err: f64,
    /// Information (prior-to-posterior KL divergence), nats.
    pub information: f64,
    /// Dead-point iterations.
    pub iterations: usize,
    /// Total likelihood evaluations.
    pub n_like_evals: u64,
    /// Live points used.
    pub n_live: usize,
    /// Slice updates per replacement.
    pub slice_steps: usize,
    /// Seed this direction's run used.
    pub seed: u64,
    /// How the run ended.
    pub terminated: TerminationReason,
    /// Posterior quantiles of the causal effect, data scale, conditional on
    /// this direction's model.
    pub beta: Quantiles,
    /// Posterior quantiles of each variant's direct effect on this
    /// direction's outcome, data scale.
    pub alpha: Vec<Quantiles>,
    /// Weight of the point mass at exactly zero in the model-averaged
    /// posterior of this direction's effect (the competing model's
    /// probability).
    pub atom_weight_at_zero: f64,
}

/// One Bayes-factor interval with its construction labeled.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalReport {
    /// How the interval was built.
    pub method: String,
    /// Confidence level.
    pub level: f64,
    /// Lower endpoint.
    pub low: f64,
    /// Upper endpoint.
    pub high: f64,
}

/// Empirical interval from repeated independent run pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepeatedRunsReport {
    /// How the interval was built.
    pub method: String,
    /// Confidence level.
    pub level: f64,
    /// Lower endpoint.
    pub low: f64,
    /// Upper endpoint.
    pub high: f64,
    /// Number of independent run pairs.
    pub n_runs: usize,
    /// One log Bayes factor per run pair, in run order.
    pub log_bayes_factors: Vec<f64>,
}

/// Bayes-factor section of a report; present when both directions were fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesFactorReport {
    /// Log Bayes factor of forward over reverse.
    pub log_bayes_factor: f64,
    /// Bayes factor of forward over reverse.
    pub bayes_factor: f64,
    /// Interval from Gaussian propagation of the log-evidence errors.
    pub gaussian_interval: IntervalReport,
    /// Interval from repeated independent runs, when more than one run pair
    /// was requested.
    pub repeated_runs_interval: Option<RepeatedRunsReport>,
    /// Prior odds applied.
    #[serde(with = "odds_serde")]
    pub prior_odds: f64,
    /// Posterior odds `bayes_factor · prior_odds`.
    #[serde(with = "odds_serde")]
    pub posterior_odds: f64,
}

/// Label of the Gaussian log-evidence-propagation interval.
pub const GAUSSIAN_INTERVAL_METHOD: &str = "gaussian-log-evidence-propagation";

/// Label of the repeated-runs empirical interval.
pub const REPEATED_RUNS_METHOD: &str = "repeated-runs-empirical";

/// Complete, serializable record of an analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReport {
    /// Always [`REPORT_FORMAT`].
    pub format: String,
    /// Document version.
    pub version: u32,
    /// Configuration and input echo.
    pub config: ConfigEcho,
    /// One entry per fitted direction, forward first when both ran.
    pub directions: Vec<DirectionReport>,
    /// Posterior probability of the forward model.
    pub p_forward: f64,
    /// Posterior probability of the reverse model; complements `p_forward`
    /// exactly.
    pub p_reverse: f64,
    /// Evidence comparison; absent when only one direction was fit (the
    /// direction choice then dictates the model probabilities).
    pub bayes_factor: Option<BayesFactorReport>,
}

impl FitReport {
    /// Serializes the report as pretty-printed JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a JSON report.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: FitReport = serde_json::from_str(text)?;
        if report.format != REPORT_FORMAT {
            return Err(Error::InvalidInput(format!(
                "expected a {REPORT_FORMAT:?} document, got format {:?}",
                report.format
            )));
        }
        if report.version > REPORT_VERSION {
            return Err(Error::InvalidInput(format!(
                "report version {} is newer than the supported version {REPORT_VERSION}",
                report.version
            )));
        }
        Ok(report)
    }
}

/// A full analysis: the per-direction fits, the model comparison when both
/// directions ran, and the serializable report.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// Forward fit, when requested.
    pub forward: Option<DirectionFit>,
    /// Reverse fit, when requested.
    pub reverse: Option<DirectionFit>,
    /// Model comparison; present only when both directions were fit.
    pub combined: Option<ModelAveragedPosterior>,
    /// Serializable record of the analysis.
    pub report: FitReport,
}

/// Seed of repeated run `k`; run 0 uses the configured seed unchanged.
fn run_seed(base: u64, k: usize) -> u64 {
    base.wrapping_add((k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn direction_report(fit: &DirectionFit, atom_weight_at_zero: f64) -> DirectionReport {
    DirectionReport {
        direction: fit.direction,
        log_z: fit.evidence.log_z,
        log_z_err: fit.evidence.log_z_err,
        information: fit.evidence.information,
        iterations: fit.evidence.iterations,
        n_like_evals: fit.evidence.n_like_evals,
        n_live: fit.evidence.config.n_live,
        slice_steps: fit.evidence.config.slice_steps,
        seed: fit.evidence.config.seed,
        terminated: fit.evidence.terminated,
        beta: fit.beta_quantiles(),
        alpha: fit.alpha_quantiles(),
        atom_weight_at_zero,
    }
}

fn config_echo(stats: &SufficientStats, options: &AnalysisOptions) -> ConfigEcho {
    ConfigEcho {
        direction: options.direction,
        prior: options.prior.clone(),
        sampler: options.sampler.clone(),
        prior_odds: options.prior_odds,
        posterior_draws: options.posterior_draws,
        bf_runs: options.bf_runs,
        interval_level: options.interval_level,
        stats_source: stats.provenance().source.clone(),
        n_obs: stats.n_obs(),
        n_variants: stats.variant_count(),
        eaf: stats.genotype_spec().eaf().to_vec(),
        allele_copies: stats.genotype_spec().allele_copies(),
        input: None,
    }
}

/// Runs the requested direction fits on one set of sufficient statistics
/// and assembles the model comparison and report.
///
/// With [`DirectionChoice::Both`], the forward and reverse models are fit
/// with identical priors and sampler settings and compared through their
/// evidences. With a single-direction choice, the skipped model is assigned
/// posterior probability zero by fiat — the report then carries no Bayes
/// factor and the fitted direction's zero atom has weight exactly 0.
///
/// When `bf_runs > 1`, the remaining run pairs rerun both directions with
/// derived seeds purely to build the empirical Bayes-factor interval; every
/// reported posterior summary comes from the first pair.
pub fn analyze(stats: &SufficientStats, options: &AnalysisOptions) -> Result<Analysis> {
    options.validate()?;
    let echo = config_echo(stats, options);
    match options.direction {
        DirectionChoice::Both => {
            let forward = fit_direction_with_draws(
                stats,
                Direction::XToY,
                &options.prior,
                &options.sampler,
                options.posterior_draws,
            )?;
            let reverse = fit_direction_with_draws(
                stats,
                Direction::YToX,
                &options.prior,
                &options.sampler,
                options.posterior_draws,
            )?;
            let combined =
                model_average_at_level(&forward, &reverse, options.prior_odds, options.interval_level)?;
            let repeated_runs_interval = if options.bf_runs > 1 {
                let mut log_bfs = vec![combined.log_bayes_factor];
                for k in 1..options.bf_runs {
                    let sampler_k =
                        SamplerConfig { seed: run_seed(options.sampler.seed, k), ..options.sampler.clone() };
                    let fwd = run_problem(
                        &prepare_direction(stats, Direction::XToY, &options.prior)?,
                        &sampler_k,
                    )?;
                    let rev = run_problem(
                        &prepare_direction(stats, Direction::YToX, &options.prior)?,
                        &sampler_k,
                    )?;
                    log_bfs.push(fwd.log_z - rev.log_z);
                }
                let (low, high) = bf_repeated_interval(&log_bfs, options.interval_level)?;
                Some(RepeatedRunsReport {
                    method: REPEATED_RUNS_METHOD.to_string(),
                    level: options.interval_level,
                    low,
                    high,
                    n_runs: options.bf_runs,
                    log_bayes_factors: log_bfs,
                })
            } else {
                None
            };
            let report = FitReport {
                format: REPORT_FORMAT.to_string(),
                version: REPORT_VERSION,
                config: echo,
                directions: vec![
                    direction_report(&forward, combined.forward_effect.atom.weight),
                    direction_report(&reverse, combined.reverse_effect.atom.weight),
                ],
                p_forward: combined.p_forward,
                p_reverse: combined.p_reverse,
                bayes_factor: Some(BayesFactorReport {
                    log_bayes_factor: combined.log_bayes_factor,
                    bayes_factor: combined.bayes_factor,
                    gaussian_interval: IntervalReport {
                        method: GAUSSIAN_INTERVAL_METHOD.to_string(),
                        level: combined.interval_level,
                        low: combined.bf_interval.0,
                        high: combined.bf_interval.1,
                    },
                    repeated_runs_interval,
                    prior_odds: combined.prior_odds,
                    posterior_odds: combined.posterior_odds,
                }),
            };
            Ok(Analysis { forward: Some(forward), reverse: Some(reverse), combined: Some(combined), report })
        }
        DirectionChoice::Forward | DirectionChoice::Reverse => {
            let direction = if options.direction == DirectionChoice::Forward {
                Direction::XToY
            } else {
                Direction::YToX
            };
            let fit = fit_direction_with_draws(
                stats,
                direction,
                &options.prior,
                &options.sampler,
                options.posterior_draws,
            )?;
            let (p_forward, p_reverse) = match direction {
                Direction::XToY => (1.0, 0.0),
                Direction::YToX => (0.0, 1.0),
            };
            let report = FitReport {
                format: REPORT_FORMAT.to_string(),
                version: REPORT_VERSION,
                config: echo,
                directions: vec![direction_report(&fit, 0.0)],
                p_forward,
                p_reverse,
                bayes_factor: None,
            };
            let (forward, reverse) = match direction {
                Direction::XToY => (Some(fit), None),
                Direction::YToX => (None, Some(fit)),
            };
            Ok(Analysis { forward, reverse, combined: None, report })
        }
    }
}
