//! Synthetic data generation for the structural-equation scenarios used in
//! the experiments: the single-instrument ideal case, its weakly confounded
//! variant, multi-variant pleiotropy with a controllable valid fraction, the
//! two-instrument cross-effect (bidirectional) design, and the nonlinearity
//! and heavy-tail sensitivity variants.
//!
//! Generation is fully deterministic given the scenario: one seeded
//! generator drives every draw, so an identical [`Scenario`] always yields
//! an identical table.

use rand::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::data_io::IndividualData;
use crate::error::{Error, Result};
use crate::sem::StructuralParams;

/// Lower clamp for uniformly drawn effect allele frequencies.
pub const EAF_CLAMP_MIN: f64 = 0.01;
/// Upper clamp for uniformly drawn effect allele frequencies.
pub const EAF_CLAMP_MAX: f64 = 0.99;

/// Valid-fraction settings swept in the multi-variant pleiotropy study.
pub const VALID_FRACTION_GRID: [f64; 6] = [1.0, 0.8, 0.6, 0.4, 0.2, 0.0];
/// Cross-effect grid for the two-instrument design: −0.5 to 0.5, step 0.1.
pub const DELTA_GRID: [f64; 11] =
    [-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
/// Saturation-scale grid for the nonlinearity sensitivity sweep.
pub const TANH_SCALE_GRID: [f64; 7] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
/// Degrees-of-freedom grid for the heavy-tail sensitivity sweep.
pub const T_DOF_GRID: [f64; 7] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 6] = [
    "iv_example",
    "near_lcd",
    "pleiotropy_robustness",
    "bidirectional",
    "nonlinear_tanh",
    "t_noise",
];

/// Which generating design a scenario uses.
///
/// `custom`, `iv_example` and `near_lcd` share the plain linear mechanism and
/// differ only in how their parameters are filled in; the remaining kinds
/// add kind-specific construction or mechanisms, each controlled by one knob.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Fully user-specified linear model.
    Custom,
    /// Single valid instrument with strong confounding.
    IvExample,
    /// Single instrument with weak pleiotropy and weak confounding.
    NearLcd,
    /// Many variants, of which only `valid_fraction` have zero pleiotropy.
    PleiotropyRobustness,
    /// Two variants, each instrumenting one phenotype, with symmetric
    /// cross effects of size `delta`.
    Bidirectional,
    /// Linear model with the outcome's causal term saturated through
    /// `A·tanh(X/A)`.
    NonlinearTanh,
    /// Linear model with Student-t distributed outcome noise.
    TNoise,
}

/// Where effect allele frequencies come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EafSource {
    /// One frequency per variant, each strictly inside (0, 1).
    Fixed(Vec<f64>),
    /// Independent Uniform(lo, hi) draws, clamped to
    /// [[`EAF_CLAMP_MIN`], [`EAF_CLAMP_MAX`]] to avoid near-degenerate
    /// variants.
    Uniform { uniform: (f64, f64) },
}

/// Where a structural coefficient comes from: a fixed value, per-variant
/// fixed values, or a seeded random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefSource {
    /// The same fixed value in every slot.
    Fixed(f64),
    /// Per-variant fixed values (vector coefficients only).
    PerVariant(Vec<f64>),
    /// Zero-mean Gaussian draw with the given standard deviation.
    Gaussian {
        /// Standard deviation of the draw.
        gaussian_sd: f64,
    },
    /// Absolute value of a zero-mean Gaussian draw (used for noise scales).
    HalfGaussian {
        /// Scale of the underlying Gaussian.
        half_gaussian_sd: f64,
    },
}

impl CoefSource {
    fn validate(&self, name: &str) -> Result<()> {
        let check = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name}: non-finite {what}")))
            }
        };
        match self {
            CoefSource::Fixed(v) => check(*v, "value"),
            CoefSource::PerVariant(values) => {
                if values.is_empty() {
                    return Err(Error::InvalidParameter(format!("{name}: empty value list")));
                }
                values.iter().try_for_each(|&v| check(v, "value"))
            }
            CoefSource::Gaussian { gaussian_sd } => {
                check(*gaussian_sd, "scale")?;
                if *gaussian_sd < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{name}: negative draw scale {gaussian_sd}"
                    )));
                }
                Ok(())
            }
            CoefSource::HalfGaussian { half_gaussian_sd } => {
                check(*half_gaussian_sd, "scale")?;
                if *half_gaussian_sd <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{name}: noise draw scale must be positive, got {half_gaussian_sd}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Draws a length-`count` coefficient vector (fixed scalars broadcast).
    fn draw_vector(&self, name: &str, count: usize, rng: &mut ChaCha12Rng) -> Result<Vec<f64>> {
        match self {
            CoefSource::Fixed(v) => Ok(vec![*v; count]),
            CoefSource::PerVariant(values) => {
                if values.len() != count {
                    return Err(Error::DimensionMismatch(format!(
                        "{name} lists {} values for {count} variants",
                        values.len()
                    )));
                }
                Ok(values.clone())
            }
            CoefSource::Gaussian { gaussian_sd } => Ok((0..count)
                .map(|_| gaussian_sd * rng.sample::<f64, _>(StandardNormal))
                .collect()),
            CoefSource::HalfGaussian { half_gaussian_sd } => Ok((0..count)
                .map(|_| (half_gaussian_sd * rng.sample::<f64, _>(StandardNormal)).abs())
                .collect()),
        }
    }

    /// Draws a single coefficient.
    fn draw_scalar(&self, name: &str, rng: &mut ChaCha12Rng) -> Result<f64> {
        match self {
            CoefSource::PerVariant(values) if values.len() != 1 => {
                Err(Error::DimensionMismatch(format!(
                    "{name} is a scalar coefficient but lists {} values",
                    values.len()
                )))
            }
            other => Ok(other.draw_vector(name, 1, rng)?[0]),
        }
    }
}

/// A fully specified generating scenario. Serializable so every dataset can
/// be reproduced from its scenario document alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Generating design.
    pub kind: ScenarioKind,
    /// Number of genetic variants `J`.
    pub n_variants: usize,
    /// Number of rows `N` to generate.
    pub n_samples: usize,
    /// Allele copies per genotype (binomial `n`), usually 2.
    #[serde(default = "default_allele_copies")]
    pub allele_copies: u32,
    /// Effect allele frequency source.
    pub eaf: EafSource,
    /// Instrument strengths (exposure equation, one per variant).
    pub gamma: CoefSource,
    /// Direct genotype–outcome effects (one per variant). For
    /// `bidirectional` scenarios this must be fixed 0: the cross effects
    /// come from `delta`.
    pub alpha: CoefSource,
    /// Causal effect of the exposure on the outcome.
    pub beta: CoefSource,
    /// Confounder loading on the exposure.
    pub kappa_x: CoefSource,
    /// Confounder loading on the outcome.
    pub kappa_y: CoefSource,
    /// Exposure noise scale.
    pub sigma_x: CoefSource,
    /// Outcome noise scale.
    pub sigma_y: CoefSource,
    /// `pleiotropy_robustness` only: fraction of variants with zero
    /// pleiotropy, in [0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valid_fraction: Option<f64>,
    /// `bidirectional` only: size of the symmetric cross effects.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// `nonlinear_tanh` only: saturation scale `A` (> 0); the outcome's
    /// `β·X` term becomes `β·A·tanh(X/A)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tanh_scale: Option<f64>,
    /// `t_noise` only: degrees of freedom `ν` (≥ 1) of the Student-t
    /// outcome noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_dof: Option<f64>,
    /// Seed for the generator driving every draw.
    pub rng_seed: u64,
}

fn default_allele_copies() -> u32 {
    2
}

/// What actually generated a dataset: the realized frequencies and
/// structural parameters, the knob values that modified the mechanism, and
/// which variants instrument which phenotype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Realized effect allele frequencies.
    pub eaf: Vec<f64>,
    /// Allele copies per genotype.
    pub allele_copies: u32,
    /// Realized structural parameters. For `bidirectional` scenarios the
    /// cross effects appear as `gamma[1]` and `alpha[0]` (both equal to
    /// `delta`).
    pub params: StructuralParams,
    /// Cross-effect size for `bidirectional` scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Saturation scale for `nonlinear_tanh` scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tanh_scale: Option<f64>,
    /// Outcome-noise degrees of freedom for `t_noise` scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_dof: Option<f64>,
    /// Variants intended as instruments for the exposure.
    pub exposure_instruments: Vec<usize>,
    /// Variants intended as instruments for the outcome (empty except in
    /// `bidirectional` scenarios).
    pub outcome_instruments: Vec<usize>,
}

impl Scenario {
    /// Checks the scenario invariants: positive sample count, frequency
    /// sources inside (0, 1), kind-matched knobs, and admissible knob
    /// ranges.
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        if self.n_variants == 0 {
            return Err(Error::InvalidParameter("n_variants must be at least 1".into()));
        }
        if self.allele_copies == 0 {
            return Err(Error::InvalidParameter("allele_copies must be at least 1".into()));
        }
        match &self.eaf {
            EafSource::Fixed(values) => {
                if values.len() != self.n_variants {
                    return Err(Error::DimensionMismatch(format!(
                        "eaf lists {} frequencies for {} variants",
                        values.len(),
                        self.n_variants
                    )));
                }
                if values.iter().any(|f| !(f.is_finite() && *f > 0.0 && *f < 1.0)) {
                    return Err(Error::DegenerateGenotype(
                        "fixed allele frequencies must lie strictly in (0, 1)".into(),
                    ));
                }
            }
            EafSource::Uniform { uniform: (lo, hi) } => {
                if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo < hi && *hi < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform eaf range ({lo}, {hi}) must satisfy 0 < lo < hi < 1"
                    )));
                }
            }
        }
        self.gamma.validate("gamma")?;
        self.alpha.validate("alpha")?;
        self.beta.validate("beta")?;
        self.kappa_x.validate("kappa_x")?;
        self.kappa_y.validate("kappa_y")?;
        self.sigma_x.validate("sigma_x")?;
        self.sigma_y.validate("sigma_y")?;

        let knob = |present: bool, name: &str, wanted: ScenarioKind| -> Result<()> {
            if present && self.kind != wanted {
                return Err(Error::InvalidParameter(format!(
                    "{name} only applies to {wanted:?} scenarios"
                )));
            }
            if !present && self.kind == wanted {
                return Err(Error::InvalidParameter(format!(
                    "{wanted:?} scenarios require {name}"
                )));
            }
            Ok(())
        };
        knob(
            self.valid_fraction.is_some(),
            "valid_fraction",
            ScenarioKind::PleiotropyRobustness,
        )?;
        knob(self.delta.is_some(), "delta", ScenarioKind::Bidirectional)?;
        knob(self.tanh_scale.is_some(), "tanh_scale", ScenarioKind::NonlinearTanh)?;
        knob(self.t_dof.is_some(), "t_dof", ScenarioKind::TNoise)?;

        if let Some(vf) = self.valid_fraction {
            if !(vf.is_finite() && (0.0..=1.0).contains(&vf)) {
                return Err(Error::InvalidParameter(format!(
                    "valid_fraction must lie in [0, 1], got {vf}"
                )));
            }
        }
        if let Some(delta) = self.delta {
            if !delta.is_finite() {
                return Err(Error::InvalidParameter("delta must be finite".into()));
            }
        }
        if let Some(a) = self.tanh_scale {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tanh_scale must be positive, got {a}"
                )));
            }
        }
        if let Some(nu) = self.t_dof {
            if !(nu.is_finite() && nu >= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "t_dof must be at least 1, got {nu}"
                )));
            }
        }
        if self.kind == ScenarioKind::Bidirectional {
            if self.n_variants != 2 {
                return Err(Error::InvalidParameter(format!(
                    "bidirectional scenarios need exactly 2 variants, got {}",
                    self.n_variants
                )));
            }
            if self.alpha != CoefSource::Fixed(0.0) {
                return Err(Error::InvalidParameter(
                    "bidirectional scenarios derive the cross effects from delta; \
                     leave alpha fixed at 0"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Draws the realized frequencies and structural parameters for this
    /// scenario using the given generator.
    fn realize(&self, rng: &mut ChaCha12Rng) -> Result<GroundTruth> {
        let j = self.n_variants;
        let eaf: Vec<f64> = match &self.eaf {
            EafSource::Fixed(values) => values.clone(),
            EafSource::Uniform { uniform: (lo, hi) } => (0..j)
                .map(|_| rng.random_range(*lo..*hi).clamp(EAF_CLAMP_MIN, EAF_CLAMP_MAX))
                .collect(),
        };

        let gamma;
        let alpha;
        let mut exposure_instruments: Vec<usize> = (0..j).collect();
        let mut outcome_instruments: Vec<usize> = Vec::new();
        match self.kind {
            ScenarioKind::Bidirectional => {
                let delta = self.delta.expect("validated");
                let strengths = self.gamma.draw_vector("gamma", 2, rng)?;
                gamma = vec![strengths[0], delta];
                alpha = vec![delta, strengths[1]];
                exposure_instruments = vec![0];
                outcome_instruments = vec![1];
            }
            ScenarioKind::PleiotropyRobustness => {
                gamma = self.gamma.draw_vector("gamma", j, rng)?;
                let vf = self.valid_fraction.expect("validated");
                let n_invalid = ((j as f64) * (1.0 - vf)).round() as usize;
                let n_invalid = n_invalid.min(j);
                let invalid = rand::seq::index::sample(rng, j, n_invalid);
                let draws = self.alpha.draw_vector("alpha", n_invalid, rng)?;
                let mut masked = vec![0.0; j];
                for (slot, value) in invalid.iter().zip(draws) {
                    masked[slot] = value;
                }
                alpha = masked;
            }
            _ => {
                gamma = self.gamma.draw_vector("gamma", j, rng)?;
                alpha = self.alpha.draw_vector("alpha", j, rng)?;
            }
        }

        let params = StructuralParams {
            gamma,
            alpha,
            beta: self.beta.draw_scalar("beta", rng)?,
            kappa_x: self.kappa_x.draw_scalar("kappa_x", rng)?,
            kappa_y: self.kappa_y.draw_scalar("kappa_y", rng)?,
            sigma_x: self.sigma_x.draw_scalar("sigma_x", rng)?,
            sigma_y: self.sigma_y.draw_scalar("sigma_y", rng)?,
        };
        params.validate()?;
        Ok(GroundTruth {
            eaf,
            allele_copies: self.allele_copies,
            params,
            delta: self.delta,
            tanh_scale: self.tanh_scale,
            t_dof: self.t_dof,
            exposure_instruments,
            outcome_instruments,
        })
    }

    /// Generates the dataset: binomial genotypes, a standard-normal
    /// confounder, noise draws, and the structural equations applied in
    /// topological order (genotypes and confounder, then exposure, then
    /// outcome).
    pub fn generate(&self) -> Result<(IndividualData, GroundTruth)> {
        self.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(self.rng_seed);
        let truth = self.realize(&mut rng)?;

        let j = self.n_variants;
        let n = self.n_samples;
        let p = &truth.params;
        let binomials: Vec<Binomial> = truth
            .eaf
            .iter()
            .map(|&f| {
                Binomial::new(u64::from(self.allele_copies), f).map_err(|e| {
                    Error::InvalidParameter(format!("genotype distribution: {e}"))
                })
            })
            .collect::<Result<_>>()?;
        let t_noise = match self.t_dof {
            Some(nu) => Some(StudentT::new(nu).map_err(|e| {
                Error::InvalidParameter(format!("outcome noise distribution: {e}"))
            })?),
            None => None,
        };

        let mut genotypes = vec![0u8; n * j];
        let mut exposure = vec![0.0; n];
        let mut outcome = vec![0.0; n];
        for i in 0..n {
            let row = &mut genotypes[i * j..(i + 1) * j];
            let mut genetic_x = 0.0;
            let mut genetic_y = 0.0;
            for (k, binomial) in binomials.iter().enumerate() {
                let g = rng.sample(binomial) as u8;
                row[k] = g;
                genetic_x += p.gamma[k] * f64::from(g);
                genetic_y += p.alpha[k] * f64::from(g);
            }
            let confounder: f64 = rng.sample(StandardNormal);
            let noise_x: f64 = rng.sample(StandardNormal);
            let x = genetic_x + p.kappa_x * confounder + p.sigma_x * noise_x;
            let causal = match self.tanh_scale {
                Some(a) => p.beta * a * (x / a).tanh(),
                None => p.beta * x,
            };
            let noise_y = match &t_noise {
                Some(t) => rng.sample(t),
                None => rng.sample(StandardNormal),
            };
            let y = genetic_y + causal + p.kappa_y * confounder + p.sigma_y * noise_y;
            exposure[i] = x;
            outcome[i] = y;
        }

        let data = IndividualData::new(j, self.allele_copies, genotypes, exposure, outcome)?;
        Ok((data, truth))
    }

    /// Serializes the scenario as a TOML document.
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Parses and validates a scenario from TOML text. Unknown keys are
    /// rejected.
    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Returns the preset scenario for one of the named study designs, with
/// `N = 10⁴`, seed 0, and the sweep knobs at their reference values
/// (`valid_fraction = 0.8`, `delta = 0`, `tanh_scale = 8`, `t_dof = 8`);
/// callers sweep the knobs over [`VALID_FRACTION_GRID`], [`DELTA_GRID`],
/// [`TANH_SCALE_GRID`] and [`T_DOF_GRID`].
pub fn preset(name: &str) -> Result<Scenario> {
    let single_instrument = |alpha: f64, kappa: f64| Scenario {
        kind: ScenarioKind::Custom,
        n_variants: 1,
        n_samples: 10_000,
        allele_copies: 2,
        eaf: EafSource::Fixed(vec![0.3]),
        gamma: CoefSource::Fixed(1.0),
        alpha: CoefSource::Fixed(alpha),
        beta: CoefSource::Fixed(1.0),
        kappa_x: CoefSource::Fixed(kappa),
        kappa_y: CoefSource::Fixed(kappa),
        sigma_x: CoefSource::Fixed(1.0),
        sigma_y: CoefSource::Fixed(1.0),
        valid_fraction: None,
        delta: None,
        tanh_scale: None,
        t_dof: None,
        rng_seed: 0,
    };
    match name {
        // One strong valid instrument, strong confounding.
        "iv_example" => Ok(Scenario { kind: ScenarioKind::IvExample, ..single_instrument(0.0, 1.0) }),
        // Weak pleiotropy and weak confounding around a unit causal effect.
        "near_lcd" => Ok(Scenario { kind: ScenarioKind::NearLcd, ..single_instrument(0.1, 0.1) }),
        // 25 variants with drawn strengths; only a fraction stay pleiotropy-free.
        "pleiotropy_robustness" => Ok(Scenario {
            kind: ScenarioKind::PleiotropyRobustness,
            n_variants: 25,
            n_samples: 10_000,
            allele_copies: 2,
            eaf: EafSource::Uniform { uniform: (0.05, 0.95) },
            gamma: CoefSource::Gaussian { gaussian_sd: 0.1 },
            alpha: CoefSource::Gaussian { gaussian_sd: 0.1 },
            beta: CoefSource::Fixed(1.0),
            kappa_x: CoefSource::Gaussian { gaussian_sd: 1.0 },
            kappa_y: CoefSource::Gaussian { gaussian_sd: 1.0 },
            sigma_x: CoefSource::HalfGaussian { half_gaussian_sd: 1.0 },
            sigma_y: CoefSource::HalfGaussian { half_gaussian_sd: 1.0 },
            valid_fraction: Some(0.8),
            delta: None,
            tanh_scale: None,
            t_dof: None,
            rng_seed: 0,
        }),
        // Two strong instruments, one per phenotype, symmetric cross effects.
        "bidirectional" => Ok(Scenario {
            kind: ScenarioKind::Bidirectional,
            n_variants: 2,
            eaf: EafSource::Fixed(vec![0.3, 0.3]),
            delta: Some(0.0),
            ..single_instrument(0.0, 1.0)
        }),
        // Saturated causal term on the weakly confounded generator.
        "nonlinear_tanh" => Ok(Scenario {
            kind: ScenarioKind::NonlinearTanh,
            tanh_scale: Some(8.0),
            ..single_instrument(0.1, 0.1)
        }),
        // Heavy-tailed outcome noise on the weakly confounded generator.
        "t_noise" => Ok(Scenario {
            kind: ScenarioKind::TNoise,
            t_dof: Some(8.0),
            ..single_instrument(0.1, 0.1)
        }),
        other => Err(Error::InvalidInput(format!(
            "unknown preset {other:?}; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines;
    use crate::data_io;
    use crate::sem::{self, GenotypeSpec};
    use nalgebra::DMatrix;

    fn sample_cov(data: &IndividualData) -> DMatrix<f64> {
        data_io::stats_from_individual(data, None).unwrap().cov().clone()
    }

    #[test]
    fn identical_scenario_identical_table() {
        let mut scenario = preset("pleiotropy_robustness").unwrap();
        scenario.n_samples = 500;
        scenario.rng_seed = 7;
        let (a, truth_a) = scenario.generate().unwrap();
        let (b, truth_b) = scenario.generate().unwrap();
        assert_eq!(a, b);
        assert_eq!(truth_a, truth_b);
        assert!(a
            .exposure()
            .iter()
            .zip(b.exposure())
            .all(|(x, y)| x.to_bits() == y.to_bits()));

        let mut reseeded = scenario.clone();
        reseeded.rng_seed = 8;
        let (c, _) = reseeded.generate().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ideal_instrument_sample_covariance_near_population() {
        let mut scenario = preset("iv_example").unwrap();
        scenario.rng_seed = 1;
        let (data, truth) = scenario.generate().unwrap();
        assert_eq!(data.n_rows(), 10_000);
        let cov = sample_cov(&data);
        let expected = [
            [0.42, 0.42, 0.42],
            [0.42, 2.42, 3.42],
            [0.42, 3.42, 6.42],
        ];
        // Population moments from the realized parameters must agree with
        // the closed-form values exactly.
        let spec = GenotypeSpec::new(truth.eaf.clone(), 2).unwrap();
        let (_, pop) = sem::marginal_moments(&truth.params, &spec).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert!((pop[(r, c)] - expected[r][c]).abs() < 1e-12);
            }
        }
        // The sampled covariance lands within 3 Monte Carlo standard errors.
        let n = data.n_rows() as f64;
        for r in 0..3 {
            for c in 0..3 {
                let se = ((expected[r][r] * expected[c][c]
                    + expected[r][c] * expected[r][c])
                    / n)
                    .sqrt();
                let diff = (cov[(r, c)] - expected[r][c]).abs();
                assert!(
                    diff <= 3.0 * se,
                    "entry ({r},{c}): |{} - {}| > 3·{se}",
                    cov[(r, c)],
                    expected[r][c]
                );
            }
        }
    }

    #[test]
    fn zero_coefficients_give_independent_columns() {
        let scenario = Scenario {
            kind: ScenarioKind::Custom,
            n_variants: 2,
            n_samples: 10_000,
            allele_copies: 2,
            eaf: EafSource::Fixed(vec![0.3, 0.6]),
            gamma: CoefSource::Fixed(0.0),
            alpha: CoefSource::Fixed(0.0),
            beta: CoefSource::Fixed(0.0),
            kappa_x: CoefSource::Fixed(0.0),
            kappa_y: CoefSource::Fixed(0.0),
            sigma_x: CoefSource::Fixed(1.0),
            sigma_y: CoefSource::Fixed(1.0),
            valid_fraction: None,
            delta: None,
            tanh_scale: None,
            t_dof: None,
            rng_seed: 3,
        };
        let (data, _) = scenario.generate().unwrap();
        let cov = sample_cov(&data);
        let bound = 4.0 / (data.n_rows() as f64).sqrt();
        for r in 0..4 {
            for c in (r + 1)..4 {
                let corr = cov[(r, c)] / (cov[(r, r)] * cov[(c, c)]).sqrt();
                assert!(
                    corr.abs() < bound,
                    "columns {r} and {c} correlate: {corr} (bound {bound})"
                );
            }
        }
    }

    #[test]
    fn tanh_at_large_scale_matches_linear_model() {
        let mut linear = preset("near_lcd").unwrap();
        linear.n_samples = 100_000;
        linear.rng_seed = 12;
        let mut saturated = preset("nonlinear_tanh").unwrap();
        saturated.n_samples = 100_000;
        saturated.rng_seed = 12;
        saturated.tanh_scale = Some(32.0);

        // Identical seeds couple every draw, so the only difference is the
        // saturation of the causal term.
        let (lin, _) = linear.generate().unwrap();
        let (sat, _) = saturated.generate().unwrap();
        assert_eq!(
            lin.genotype_column(0),
            sat.genotype_column(0),
            "genotype draws must be identical under coupling"
        );
        assert_eq!(lin.exposure(), sat.exposure());

        let cov_lin = sample_cov(&lin);
        let cov_sat = sample_cov(&sat);
        let rel = ((cov_sat[(1, 2)] - cov_lin[(1, 2)]) / cov_lin[(1, 2)]).abs();
        assert!(rel < 0.01, "Cov(X, Y) deviates by {rel} at saturation scale 32");
    }

    #[test]
    fn pleiotropy_valid_fraction_masks_exact_count() {
        for (vf, want) in [(1.0, 0), (0.8, 5), (0.6, 10), (0.4, 15), (0.2, 20), (0.0, 25)] {
            let mut scenario = preset("pleiotropy_robustness").unwrap();
            scenario.n_samples = 10;
            scenario.valid_fraction = Some(vf);
            scenario.rng_seed = 42;
            let (_, truth) = scenario.generate().unwrap();
            let nonzero = truth.params.alpha.iter().filter(|a| **a != 0.0).count();
            assert_eq!(nonzero, want, "valid_fraction {vf}");
            assert_eq!(truth.params.alpha.len(), 25);
            // Strengths are drawn for every variant regardless of validity.
            assert!(truth.params.gamma.iter().all(|g| *g != 0.0));
        }
    }

    #[test]
    fn uniform_eaf_draws_are_clamped() {
        let scenario = Scenario {
            kind: ScenarioKind::Custom,
            n_variants: 300,
            n_samples: 1,
            allele_copies: 2,
            eaf: EafSource::Uniform { uniform: (0.001, 0.999) },
            gamma: CoefSource::Fixed(0.0),
            alpha: CoefSource::Fixed(0.0),
            beta: CoefSource::Fixed(0.0),
            kappa_x: CoefSource::Fixed(0.0),
            kappa_y: CoefSource::Fixed(0.0),
            sigma_x: CoefSource::Fixed(1.0),
            sigma_y: CoefSource::Fixed(1.0),
            valid_fraction: None,
            delta: None,
            tanh_scale: None,
            t_dof: None,
            rng_seed: 5,
        };
        let (_, truth) = scenario.generate().unwrap();
        assert!(truth
            .eaf
            .iter()
            .all(|f| (EAF_CLAMP_MIN..=EAF_CLAMP_MAX).contains(f)));
        // The wide range above actually exercises the clamp.
        assert!(truth.eaf.iter().any(|f| *f == EAF_CLAMP_MIN || *f == EAF_CLAMP_MAX));
    }

    #[test]
    fn cross_effect_population_ratios_follow_closed_forms() {
        // Ties the scenario construction, the model's population moments and
        // the ratio estimators together: forward 1+δ, reverse δ/(1+δ).
        for delta in DELTA_GRID {
            let mut scenario = preset("bidirectional").unwrap();
            scenario.delta = Some(delta);
            scenario.n_samples = 10;
            let (_, truth) = scenario.generate().unwrap();
            assert_eq!(truth.params.gamma, vec![1.0, delta]);
            assert_eq!(truth.params.alpha, vec![delta, 1.0]);

            let spec = GenotypeSpec::new(truth.eaf.clone(), 2).unwrap();
            let (_, pop) = sem::marginal_moments(&truth.params, &spec).unwrap();
            let stats = sem::SufficientStats::from_covariance(pop, 10_000, spec).unwrap();
            let table = baselines::bidirectional_table(
                &stats,
                &truth.exposure_instruments,
                &truth.outcome_instruments,
            )
            .unwrap();
            let forward = table.forward.per_variant[0].estimate;
            let reverse = table.reverse.per_variant[0].estimate;
            assert!(
                (forward - (1.0 + delta)).abs() < 1e-12,
                "forward ratio at delta {delta}: {forward}"
            );
            assert!(
                (reverse - delta / (1.0 + delta)).abs() < 1e-12,
                "reverse ratio at delta {delta}: {reverse}"
            );
        }
    }

    #[test]
    fn sample_moments_converge_at_root_n_rate() {
        let spec = GenotypeSpec::new(vec![0.3], 2).unwrap();
        let truth = preset("iv_example").unwrap();
        let params = {
            let mut s = truth.clone();
            s.n_samples = 10;
            s.generate().unwrap().1.params
        };
        let (_, pop) = sem::marginal_moments(&params, &spec).unwrap();
        let pop_scale = pop.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        let mut errors = Vec::new();
        for n in [1_000usize, 10_000, 100_000] {
            let mut scenario = truth.clone();
            scenario.n_samples = n;
            scenario.rng_seed = 17;
            let (data, _) = scenario.generate().unwrap();
            let cov = sample_cov(&data);
            let err = (0..3)
                .flat_map(|r| (0..3).map(move |c| (r, c)))
                .map(|(r, c)| (cov[(r, c)] - pop[(r, c)]).abs())
                .fold(0.0f64, f64::max);
            // Consistent with a 1/√N rate: bounded by a fixed multiple of
            // the population scale over √N.
            assert!(
                err <= 8.0 * pop_scale / (n as f64).sqrt(),
                "error {err} too large at N = {n}"
            );
            errors.push(err);
        }
        assert!(
            errors[2] < errors[0],
            "error did not shrink from N=10³ ({}) to N=10⁵ ({})",
            errors[0],
            errors[2]
        );
    }

    #[test]
    fn heavy_tail_noise_inflates_outcome_variance() {
        // The t draw is used raw, so at ν = 8 the outcome noise variance is
        // ν/(ν−2) = 4/3 instead of 1; the outcome variance must reflect the
        // extra ν/(ν−2) − 1 = 1/3 on top of the linear-model value.
        let mut scenario = preset("t_noise").unwrap();
        scenario.n_samples = 100_000;
        scenario.rng_seed = 21;
        let (data, truth) = scenario.generate().unwrap();
        let spec = GenotypeSpec::new(truth.eaf.clone(), 2).unwrap();
        let (_, pop_linear) = sem::marginal_moments(&truth.params, &spec).unwrap();
        let cov = sample_cov(&data);
        let inflation = cov[(2, 2)] - pop_linear[(2, 2)];
        assert!(
            (0.25..=0.42).contains(&inflation),
            "outcome variance inflation {inflation} outside [0.25, 0.42]"
        );

        // ν = 1 (undefined mean and variance) must still generate cleanly.
        let mut cauchy = preset("t_noise").unwrap();
        cauchy.t_dof = Some(1.0);
        cauchy.n_samples = 200;
        let (data, _) = cauchy.generate().unwrap();
        assert!(data.outcome().iter().all(|y| y.is_finite()));
    }

    #[test]
    fn preset_values_match_documented_settings() {
        let pleio = preset("pleiotropy_robustness").unwrap();
        assert_eq!(pleio.n_variants, 25);
        assert_eq!(pleio.gamma, CoefSource::Gaussian { gaussian_sd: 0.1 });
        assert_eq!(pleio.alpha, CoefSource::Gaussian { gaussian_sd: 0.1 });
        assert_eq!(pleio.beta, CoefSource::Fixed(1.0));
        assert_eq!(
            pleio.sigma_x,
            CoefSource::HalfGaussian { half_gaussian_sd: 1.0 }
        );

        let near = preset("near_lcd").unwrap();
        assert_eq!(near.alpha, CoefSource::Fixed(0.1));
        assert_eq!(near.kappa_x, CoefSource::Fixed(0.1));
        assert_eq!(near.kappa_y, CoefSource::Fixed(0.1));
        assert_eq!(near.gamma, CoefSource::Fixed(1.0));
        assert_eq!(near.beta, CoefSource::Fixed(1.0));

        let ideal = preset("iv_example").unwrap();
        assert_eq!(ideal.kappa_x, CoefSource::Fixed(1.0));
        assert_eq!(ideal.eaf, EafSource::Fixed(vec![0.3]));
        assert_eq!(ideal.n_samples, 10_000);

        let bidir = preset("bidirectional").unwrap();
        assert_eq!(bidir.delta, Some(0.0));
        assert_eq!(bidir.eaf, EafSource::Fixed(vec![0.3, 0.3]));
        assert_eq!(DELTA_GRID.len(), 11);
        assert!((DELTA_GRID[0] - -0.5).abs() < 1e-15);
        assert!((DELTA_GRID[10] - 0.5).abs() < 1e-15);
        for w in DELTA_GRID.windows(2) {
            assert!((w[1] - w[0] - 0.1).abs() < 1e-12);
        }

        assert_eq!(TANH_SCALE_GRID, [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
        assert_eq!(T_DOF_GRID, [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);
        assert!(preset("not_a_preset").is_err());
    }

    #[test]
    fn scenario_toml_round_trip_and_validation() {
        let scenario = preset("pleiotropy_robustness").unwrap();
        let text = scenario.to_toml().unwrap();
        let parsed = Scenario::from_toml(&text).unwrap();
        assert_eq!(parsed, scenario);

        // Unknown top-level keys are rejected.
        let with_typo = format!("valid_fractoin = 0.5\n{text}");
        assert!(Scenario::from_toml(&with_typo).is_err());

        // Invariant violations are rejected.
        let mut bad = scenario.clone();
        bad.n_samples = 0;
        assert!(bad.validate().is_err());
        let mut bad = scenario.clone();
        bad.valid_fraction = Some(1.5);
        assert!(bad.validate().is_err());
        let mut bad = preset("nonlinear_tanh").unwrap();
        bad.tanh_scale = Some(0.0);
        assert!(bad.validate().is_err());
        let mut bad = preset("t_noise").unwrap();
        bad.t_dof = Some(0.5);
        assert!(bad.validate().is_err());

        // Knobs are tied to their scenario kinds.
        let mut bad = preset("near_lcd").unwrap();
        bad.delta = Some(0.1);
        assert!(bad.validate().is_err());
        let mut bad = preset("nonlinear_tanh").unwrap();
        bad.tanh_scale = None;
        assert!(bad.validate().is_err());
        let mut bad = preset("bidirectional").unwrap();
        bad.alpha = CoefSource::Fixed(0.2);
        assert!(bad.validate().is_err());
    }
}
