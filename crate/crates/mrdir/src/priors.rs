//! Spike-and-slab priors on the standardized parameter scale and the
//! unit-cube transform used by the nested sampler.
//!
//! Each standardized coefficient gets a two-component Gaussian scale
//! mixture,
//!
//! ```text
//! p(x) = w N(x; 0, τ²) + (1 − w) N(x; 0, λτ²),     λ ∈ (0, 1]
//! ```
//!
//! where the slab `N(0, τ²)` carries weight `w` and the spike `N(0, λτ²)`
//! concentrates near zero. The slab weights for the instrument strengths and
//! the pleiotropic effects may be learned: `w ~ Uniform(0, 1)` becomes an
//! extra coordinate shared by all coordinates of its block. Noise scales get
//! half-Gaussian priors whose scale defaults to twice the observed standard
//! deviation of the matching variable, which keeps inference invariant under
//! rescaling of the data.
//!
//! The sampler sees the prior only through [`PriorSpec::transform`], which
//! maps a point of the unit cube to a flat parameter vector laid out as
//!
//! ```text
//! [w_γ?] [w_α?] γ̃_1 … γ̃_J  α̃_1 … α̃_J  β̃  κ̃_X  κ̃_Y  σ_X  σ_Y
//! ```
//!
//! (hierarchical weight coordinates present only when learned). The map is
//! the conditional inverse-CDF transform: weights first, then each
//! coefficient through the mixture quantile given its weight. It is monotone
//! in each coordinate and pushes the uniform distribution on the cube
//! forward to the prior exactly.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf;

use crate::error::{Error, Result};
use crate::sem::RescaledParams;

/// Cube coordinates are clamped to `[U_EPS, 1 − U_EPS]` before quantile
/// evaluation so boundary inputs stay finite.
pub const U_EPS: f64 = 1e-12;

/// Multiplier applied to an observed standard deviation to obtain the
/// default half-Gaussian scale for the matching noise parameter.
pub const AUTO_SIGMA_SCALE_MULTIPLIER: f64 = 2.0;

/// Absolute tolerance on `CDF(quantile(u)) − u` for the mixture quantile.
const QUANTILE_TOL: f64 = 1e-13;

/// Standard normal CDF, accurate in both tails.
fn phi(z: f64) -> f64 {
    0.5 * erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile via the complementary inverse error function.
pub(crate) fn phi_inv(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * u)
}

fn normal_log_pdf(x: f64, sd: f64) -> f64 {
    let z = x / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

fn normal_pdf(x: f64, sd: f64) -> f64 {
    normal_log_pdf(x, sd).exp()
}

/// Slab weight of a mixture prior: either a fixed value in `[0, 1]` or
/// learned with a `Uniform(0, 1)` hyperprior shared across the block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightPrior {
    /// Fixed slab weight.
    Fixed(f64),
    /// Learned slab weight with a flat hyperprior.
    Hierarchical,
}

impl WeightPrior {
    fn validate(&self, name: &str) -> Result<()> {
        if let WeightPrior::Fixed(w) = self {
            if !w.is_finite() || *w < 0.0 || *w > 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {w}"
                )));
            }
        }
        Ok(())
    }

    fn is_hierarchical(&self) -> bool {
        matches!(self, WeightPrior::Hierarchical)
    }
}

/// Sentinel accepted in config files for a learned weight.
const HIER_SENTINEL: &str = "hier";

impl Serialize for WeightPrior {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WeightPrior::Fixed(w) => s.serialize_f64(*w),
            WeightPrior::Hierarchical => s.serialize_str(HIER_SENTINEL),
        }
    }
}

impl<'de> Deserialize<'de> for WeightPrior {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(w) => Ok(WeightPrior::Fixed(w)),
            Raw::Word(s) if s == HIER_SENTINEL => Ok(WeightPrior::Hierarchical),
            Raw::Word(s) => Err(serde::de::Error::custom(format!(
                "expected a number in [0, 1] or \"{HIER_SENTINEL}\", got \"{s}\""
            ))),
        }
    }
}

/// Half-Gaussian scale for a noise parameter: automatic (data-driven) or
/// fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaScale {
    /// `AUTO_SIGMA_SCALE_MULTIPLIER`× the observed standard deviation.
    Auto,
    /// Fixed half-Gaussian scale.
    Fixed(f64),
}

const AUTO_SENTINEL: &str = "auto";

impl Serialize for SigmaScale {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SigmaScale::Fixed(v) => s.serialize_f64(*v),
            SigmaScale::Auto => s.serialize_str(AUTO_SENTINEL),
        }
    }
}

impl<'de> Deserialize<'de> for SigmaScale {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(SigmaScale::Fixed(v)),
            Raw::Word(s) if s == AUTO_SENTINEL => Ok(SigmaScale::Auto),
            Raw::Word(s) => Err(serde::de::Error::custom(format!(
                "expected a positive number or \"{AUTO_SENTINEL}\", got \"{s}\""
            ))),
        }
    }
}

/// Serializable prior configuration with the documented key set. Unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorConfig {
    /// Slab variance τ².
    pub tau2: f64,
    /// Spike-to-slab variance ratio λ ∈ (0, 1].
    pub lambda: f64,
    /// Slab weight for the instrument strengths γ̃.
    pub w_gamma: WeightPrior,
    /// Slab weight for the pleiotropic effects α̃.
    pub w_alpha: WeightPrior,
    /// Slab weight for the causal effect β̃.
    pub w_beta: WeightPrior,
    /// Slab weight shared by the confounder loadings κ̃_X, κ̃_Y.
    pub w_kappa: WeightPrior,
    /// Half-Gaussian scale for σ_X and σ_Y.
    pub sigma_prior_scale: SigmaScale,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            tau2: 1.0,
            lambda: 0.01,
            w_gamma: WeightPrior::Hierarchical,
            w_alpha: WeightPrior::Hierarchical,
            w_beta: WeightPrior::Fixed(0.5),
            w_kappa: WeightPrior::Fixed(0.5),
            sigma_prior_scale: SigmaScale::Auto,
        }
    }
}

impl PriorConfig {
    /// Validates ranges; hierarchical weights are only supported for the
    /// per-variant blocks γ̃ and α̃.
    pub fn validate(&self) -> Result<()> {
        if !self.tau2.is_finite() || self.tau2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tau2 must be positive, got {}",
                self.tau2
            )));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 || self.lambda > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        self.w_gamma.validate("w_gamma")?;
        self.w_alpha.validate("w_alpha")?;
        self.w_beta.validate("w_beta")?;
        self.w_kappa.validate("w_kappa")?;
        if self.w_beta.is_hierarchical() || self.w_kappa.is_hierarchical() {
            return Err(Error::InvalidParameter(
                "w_beta and w_kappa must be fixed values in [0, 1]".into(),
            ));
        }
        if let SigmaScale::Fixed(v) = self.sigma_prior_scale {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "sigma_prior_scale must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Parses a TOML config document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PriorConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Serializes to TOML.
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

/// Two-component Gaussian scale mixture, parameterized by slab variance,
/// spike ratio and slab weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixturePrior {
    sd_slab: f64,
    sd_spike: f64,
}

impl MixturePrior {
    fn new(tau2: f64, lambda: f64) -> Self {
        let tau = tau2.sqrt();
        Self { sd_slab: tau, sd_spike: tau * lambda.sqrt() }
    }

    /// Density at `x` given slab weight `w`.
    pub fn density(&self, x: f64, w: f64) -> f64 {
        w * normal_pdf(x, self.sd_slab) + (1.0 - w) * normal_pdf(x, self.sd_spike)
    }

    /// Log density at `x` given slab weight `w`.
    pub fn log_density(&self, x: f64, w: f64) -> f64 {
        if w >= 1.0 {
            return normal_log_pdf(x, self.sd_slab);
        }
        if w <= 0.0 {
            return normal_log_pdf(x, self.sd_spike);
        }
        let a = w.ln() + normal_log_pdf(x, self.sd_slab);
        let b = (1.0 - w).ln() + normal_log_pdf(x, self.sd_spike);
        let m = a.max(b);
        m + ((a - m).exp() + (b - m).exp()).ln()
    }

    /// CDF at `x` given slab weight `w`.
    pub fn cdf(&self, x: f64, w: f64) -> f64 {
        w * phi(x / self.sd_slab) + (1.0 - w) * phi(x / self.sd_spike)
    }

    /// Quantile by safeguarded Newton iteration on the closed-form CDF.
    ///
    /// The two component quantiles bracket the mixture quantile because the
    /// mixture CDF lies pointwise between the component CDFs; Newton steps
    /// that leave the shrinking bracket fall back to bisection. Terminates
    /// when `|CDF(x) − u| ≤ 1e-13` or the bracket collapses.
    pub fn quantile(&self, u: f64, w: f64) -> f64 {
        let u = u.clamp(U_EPS, 1.0 - U_EPS);
        if u == 0.5 {
            return 0.0;
        }
        if u < 0.5 {
            return -self.quantile(1.0 - u, w);
        }
        let z = phi_inv(u);
        if w >= 1.0 {
            return self.sd_slab * z;
        }
        if w <= 0.0 {
            return self.sd_spike * z;
        }
        let mut lo = self.sd_spike * z;
        let mut hi = self.sd_slab * z;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.cdf(x, w) - u;
            if f.abs() <= QUANTILE_TOL {
                return x;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= 1e-15 * (1.0 + x.abs()) {
                return 0.5 * (lo + hi);
            }
            let pdf = self.density(x, w);
            let newton = x - f / pdf;
            x = if pdf > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }

    /// Ancestral draw given slab weight `w`.
    pub fn sample<R: Rng + ?Sized>(&self, w: f64, rng: &mut R) -> f64 {
        let sd = if rng.random::<f64>() < w { self.sd_slab } else { self.sd_spike };
        sd * rng.sample::<f64, _>(rand_distr::StandardNormal)
    }
}

/// Half-Gaussian prior on a positive scale parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalePrior {
    /// Scale of the underlying Gaussian.
    pub scale: f64,
}

impl ScalePrior {
    /// Log density; `−∞` for non-positive arguments.
    pub fn log_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        std::f64::consts::LN_2 + normal_log_pdf(x, self.scale)
    }

    /// Quantile `scale · Φ⁻¹((1 + u) / 2)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(U_EPS, 1.0 - U_EPS);
        self.scale * std::f64::consts::SQRT_2 * erf::erf_inv(u)
    }

    /// CDF on the positive half-line.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            2.0 * phi(x / self.scale) - 1.0
        }
    }

    /// Ancestral draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (self.scale * rng.sample::<f64, _>(rand_distr::StandardNormal)).abs()
    }
}

/// Realized slab weights for the two per-variant blocks; equal to the fixed
/// configuration value when the weight is not learned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperWeights {
    /// Slab weight applied to the γ̃ block.
    pub gamma: f64,
    /// Slab weight applied to the α̃ block.
    pub alpha: f64,
}

/// Index layout of the flat parameter vector (and of the matching unit-cube
/// vector): optional hyperweights, then γ̃ block, α̃ block, β̃, κ̃_X, κ̃_Y,
/// σ_X, σ_Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    /// Number of variants J.
    pub variants: usize,
    /// Whether w_γ is a coordinate.
    pub hier_gamma: bool,
    /// Whether w_α is a coordinate.
    pub hier_alpha: bool,
}

impl ParamLayout {
    /// Total number of coordinates: `2J + 5` plus one per learned weight.
    pub fn dimension(&self) -> usize {
        2 * self.variants + 5 + usize::from(self.hier_gamma) + usize::from(self.hier_alpha)
    }

    /// Index of the learned w_γ coordinate, if any.
    pub fn w_gamma(&self) -> Option<usize> {
        self.hier_gamma.then_some(0)
    }

    /// Index of the learned w_α coordinate, if any.
    pub fn w_alpha(&self) -> Option<usize> {
        self.hier_alpha.then_some(usize::from(self.hier_gamma))
    }

    fn blocks_start(&self) -> usize {
        usize::from(self.hier_gamma) + usize::from(self.hier_alpha)
    }

    /// Indices of the γ̃ block.
    pub fn gamma(&self) -> Range<usize> {
        let s = self.blocks_start();
        s..s + self.variants
    }

    /// Indices of the α̃ block.
    pub fn alpha(&self) -> Range<usize> {
        let s = self.blocks_start() + self.variants;
        s..s + self.variants
    }

    /// Index of β̃.
    pub fn beta(&self) -> usize {
        self.blocks_start() + 2 * self.variants
    }

    /// Index of κ̃_X.
    pub fn kappa_x(&self) -> usize {
        self.beta() + 1
    }

    /// Index of κ̃_Y.
    pub fn kappa_y(&self) -> usize {
        self.beta() + 2
    }

    /// Index of σ_X.
    pub fn sigma_x(&self) -> usize {
        self.beta() + 3
    }

    /// Index of σ_Y.
    pub fn sigma_y(&self) -> usize {
        self.beta() + 4
    }
}

/// Fully resolved prior: mixture components per block, half-Gaussian noise
/// priors with concrete scales, and the coordinate layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    /// Mixture for the γ̃ block.
    pub gamma: MixturePrior,
    /// Mixture for the α̃ block.
    pub alpha: MixturePrior,
    /// Mixture for β̃.
    pub beta: MixturePrior,
    /// Mixture for κ̃_X and κ̃_Y.
    pub kappa: MixturePrior,
    /// Half-Gaussian prior for σ_X.
    pub sigma_x: ScalePrior,
    /// Half-Gaussian prior for σ_Y.
    pub sigma_y: ScalePrior,
    w_gamma: WeightPrior,
    w_alpha: WeightPrior,
    w_beta: f64,
    w_kappa: f64,
    layout: ParamLayout,
}

impl PriorSpec {
    /// Resolves a configuration against the data: `sd_x`, `sd_y` are the
    /// observed standard deviations used for automatic noise-prior scales.
    pub fn resolve(config: &PriorConfig, variants: usize, sd_x: f64, sd_y: f64) -> Result<Self> {
        config.validate()?;
        if variants == 0 {
            return Err(Error::DimensionMismatch("at least one variant required".into()));
        }
        let resolve_scale = |sd: f64, name: &str| -> Result<f64> {
            match config.sigma_prior_scale {
                SigmaScale::Fixed(v) => Ok(v),
                SigmaScale::Auto => {
                    if !(sd > 0.0) || !sd.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "cannot derive automatic sigma prior scale: {name} standard \
                             deviation is {sd}"
                        )));
                    }
                    Ok(AUTO_SIGMA_SCALE_MULTIPLIER * sd)
                }
            }
        };
        let mix = MixturePrior::new(config.tau2, config.lambda);
        let w_fixed = |w: &WeightPrior| match w {
            WeightPrior::Fixed(v) => *v,
            WeightPrior::Hierarchical => unreachable!("validated fixed"),
        };
        Ok(Self {
            gamma: mix,
            alpha: mix,
            beta: mix,
            kappa: mix,
            sigma_x: ScalePrior { scale: resolve_scale(sd_x, "exposure")? },
            sigma_y: ScalePrior { scale: resolve_scale(sd_y, "outcome")? },
            w_gamma: config.w_gamma,
            w_alpha: config.w_alpha,
            w_beta: w_fixed(&config.w_beta),
            w_kappa: w_fixed(&config.w_kappa),
            layout: ParamLayout {
                variants,
                hier_gamma: config.w_gamma.is_hierarchical(),
                hier_alpha: config.w_alpha.is_hierarchical(),
            },
        })
    }

    /// Coordinate layout of the flat parameter vector.
    pub fn layout(&self) -> ParamLayout {
        self.layout
    }

    /// Number of sampled coordinates.
    pub fn dimension(&self) -> usize {
        self.layout.dimension()
    }

    fn realized_weight(&self, prior: WeightPrior, coord: Option<f64>) -> f64 {
        match prior {
            WeightPrior::Fixed(w) => w,
            WeightPrior::Hierarchical => coord.expect("hierarchical weight coordinate"),
        }
    }

    /// Maps a unit-cube point to the flat parameter vector. Coordinates are
    /// clamped to `[U_EPS, 1 − U_EPS]`; the output layout matches
    /// [`PriorSpec::layout`]. Panics if `u.len() != dimension()`.
    pub fn transform(&self, u: &[f64]) -> Vec<f64> {
        let mut theta = vec![0.0; u.len()];
        self.transform_into(u, &mut theta);
        theta
    }

    /// Allocation-free variant of [`PriorSpec::transform`].
    pub fn transform_into(&self, u: &[f64], theta: &mut [f64]) {
        let l = &self.layout;
        assert_eq!(u.len(), l.dimension(), "cube point has wrong dimension");
        assert_eq!(theta.len(), u.len(), "output buffer has wrong dimension");
        let cu = |i: usize| u[i].clamp(U_EPS, 1.0 - U_EPS);
        if let Some(i) = l.w_gamma() {
            theta[i] = cu(i);
        }
        if let Some(i) = l.w_alpha() {
            theta[i] = cu(i);
        }
        let wg = self.realized_weight(self.w_gamma, l.w_gamma().map(&cu));
        let wa = self.realized_weight(self.w_alpha, l.w_alpha().map(&cu));
        for i in l.gamma() {
            theta[i] = self.gamma.quantile(cu(i), wg);
        }
        for i in l.alpha() {
            theta[i] = self.alpha.quantile(cu(i), wa);
        }
        theta[l.beta()] = self.beta.quantile(cu(l.beta()), self.w_beta);
        theta[l.kappa_x()] = self.kappa.quantile(cu(l.kappa_x()), self.w_kappa);
        theta[l.kappa_y()] = self.kappa.quantile(cu(l.kappa_y()), self.w_kappa);
        theta[l.sigma_x()] = self.sigma_x.quantile(cu(l.sigma_x()));
        theta[l.sigma_y()] = self.sigma_y.quantile(cu(l.sigma_y()));
    }

    /// Splits a flat parameter vector into structured standardized
    /// parameters and the realized hyperweights.
    pub fn unpack(&self, theta: &[f64]) -> (RescaledParams, HyperWeights) {
        let l = &self.layout;
        assert_eq!(theta.len(), l.dimension(), "parameter vector has wrong dimension");
        let weights = HyperWeights {
            gamma: self.realized_weight(self.w_gamma, l.w_gamma().map(|i| theta[i])),
            alpha: self.realized_weight(self.w_alpha, l.w_alpha().map(|i| theta[i])),
        };
        let params = RescaledParams {
            gamma: theta[l.gamma()].to_vec(),
            alpha: theta[l.alpha()].to_vec(),
            beta: theta[l.beta()],
            kappa_x: theta[l.kappa_x()],
            kappa_y: theta[l.kappa_y()],
            sigma_x: theta[l.sigma_x()],
            sigma_y: theta[l.sigma_y()],
        };
        (params, weights)
    }

    /// Inverse of [`PriorSpec::unpack`].
    pub fn pack(&self, params: &RescaledParams, weights: &HyperWeights) -> Vec<f64> {
        let l = &self.layout;
        assert_eq!(params.gamma.len(), l.variants, "gamma block has wrong dimension");
        assert_eq!(params.alpha.len(), l.variants, "alpha block has wrong dimension");
        let mut theta = vec![0.0; l.dimension()];
        if let Some(i) = l.w_gamma() {
            theta[i] = weights.gamma;
        }
        if let Some(i) = l.w_alpha() {
            theta[i] = weights.alpha;
        }
        theta[l.gamma()].copy_from_slice(&params.gamma);
        theta[l.alpha()].copy_from_slice(&params.alpha);
        theta[l.beta()] = params.beta;
        theta[l.kappa_x()] = params.kappa_x;
        theta[l.kappa_y()] = params.kappa_y;
        theta[l.sigma_x()] = params.sigma_x;
        theta[l.sigma_y()] = params.sigma_y;
        theta
    }

    /// Joint log prior density of a flat parameter vector, including the
    /// flat hyperpriors of any learned weights. `−∞` outside the support.
    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let l = &self.layout;
        assert_eq!(theta.len(), l.dimension(), "parameter vector has wrong dimension");
        let check_weight = |i: Option<usize>| -> f64 {
            match i {
                Some(i) => theta[i],
                None => f64::NAN,
            }
        };
        let wg_coord = check_weight(l.w_gamma());
        let wa_coord = check_weight(l.w_alpha());
        for w in [wg_coord, wa_coord] {
            if !w.is_nan() && !(0.0..=1.0).contains(&w) {
                return f64::NEG_INFINITY;
            }
        }
        let wg = self.realized_weight(self.w_gamma, l.w_gamma().map(|_| wg_coord));
        let wa = self.realized_weight(self.w_alpha, l.w_alpha().map(|_| wa_coord));
        let mut lp = 0.0;
        for i in l.gamma() {
            lp += self.gamma.log_density(theta[i], wg);
        }
        for i in l.alpha() {
            lp += self.alpha.log_density(theta[i], wa);
        }
        lp += self.beta.log_density(theta[l.beta()], self.w_beta);
        lp += self.kappa.log_density(theta[l.kappa_x()], self.w_kappa);
        lp += self.kappa.log_density(theta[l.kappa_y()], self.w_kappa);
        lp += self.sigma_x.log_density(theta[l.sigma_x()]);
        lp += self.sigma_y.log_density(theta[l.sigma_y()]);
        lp
    }

    /// Ancestral draw from the prior, returned as a flat parameter vector.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let l = &self.layout;
        let mut theta = vec![0.0; l.dimension()];
        let wg = match self.w_gamma {
            WeightPrior::Fixed(w) => w,
            WeightPrior::Hierarchical => {
                let w = rng.random::<f64>();
                theta[l.w_gamma().unwrap()] = w;
                w
            }
        };
        let wa = match self.w_alpha {
            WeightPrior::Fixed(w) => w,
            WeightPrior::Hierarchical => {
                let w = rng.random::<f64>();
                theta[l.w_alpha().unwrap()] = w;
                w
            }
        };
        for i in l.gamma() {
            theta[i] = self.gamma.sample(wg, rng);
        }
        for i in l.alpha() {
            theta[i] = self.alpha.sample(wa, rng);
        }
        theta[l.beta()] = self.beta.sample(self.w_beta, rng);
        theta[l.kappa_x()] = self.kappa.sample(self.w_kappa, rng);
        theta[l.kappa_y()] = self.kappa.sample(self.w_kappa, rng);
        theta[l.sigma_x()] = self.sigma_x.sample(rng);
        theta[l.sigma_y()] = self.sigma_y.sample(rng);
        theta
    }
}
