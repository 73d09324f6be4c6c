//! Linear structural equation model for Mendelian randomization with
//! pleiotropy and unobserved confounding.
//!
//! The generative model for one individual with genotypes `G = (G_1, …, G_J)`,
//! exposure `X` and outcome `Y` is
//!
//! ```text
//! G_j ~ Binomial(n, f_j)                 (allele copies n, frequency f_j)
//! U   ~ N(0, 1)                          (latent confounder)
//! X := γᵀG + κ_X U + ε_X,   ε_X ~ N(0, σ_X²)
//! Y := αᵀG + β X + κ_Y U + ε_Y,   ε_Y ~ N(0, σ_Y²)
//! ```
//!
//! Conditional on `G = g`, the pair `(X, Y)` is bivariate normal with mean
//! `μ = (γᵀg, (α + βγ)ᵀg)` and covariance
//!
//! ```text
//! Σ₁₁ = σ_X² + κ_X²
//! Σ₁₂ = κ_X κ_Y + β (σ_X² + κ_X²)
//! Σ₂₂ = σ_Y² + β² σ_X² + (κ_Y + β κ_X)²
//! ```
//!
//! Because the conditional distribution is Gaussian with mean linear in `g`,
//! the log-likelihood of a data set depends on it only through the sample
//! size and the second-moment matrix of `(G, X, Y)`. [`log_likelihood`]
//! evaluates, up to the parameter-free constant `−N log 2π`,
//!
//! ```text
//! log L = −(N/2) (log det Σ + tr{Σ⁻¹ S})
//! ```
//!
//! where `S` is the residual second-moment matrix expanded algebraically from
//! the stored covariances, so the cost per evaluation is `O(J²)` regardless
//! of `N`. All variables enter the expansion in deviation form: `S` is built
//! from central second moments, which makes the likelihood invariant to the
//! (unmodelled) intercepts of `X` and `Y`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible determinant of the 2×2 conditional covariance.
const DET_FLOOR: f64 = 1e-300;

/// Largest admissible condition number of the conditional covariance.
const CONDITION_CAP: f64 = 1e12;

/// Genotype model: allele frequencies and the number of allele copies.
///
/// Variant `j` has mean `n f_j` and variance `n f_j (1 − f_j)` under
/// Hardy-Weinberg equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenotypeSpec {
    eaf: Vec<f64>,
    allele_copies: u32,
}

impl GenotypeSpec {
    /// Builds a genotype spec; every frequency must lie strictly in (0, 1)
    /// and at least one allele copy is required.
    pub fn new(eaf: Vec<f64>, allele_copies: u32) -> Result<Self> {
        if eaf.is_empty() {
            return Err(Error::DegenerateGenotype("no variants".into()));
        }
        if allele_copies == 0 {
            return Err(Error::DegenerateGenotype("allele_copies must be >= 1".into()));
        }
        for (j, &f) in eaf.iter().enumerate() {
            if !f.is_finite() || f <= 0.0 || f >= 1.0 {
                return Err(Error::DegenerateGenotype(format!(
                    "allele frequency {f} for variant {} outside (0, 1)",
                    j + 1
                )));
            }
        }
        Ok(Self { eaf, allele_copies })
    }

    /// Number of variants J.
    pub fn variant_count(&self) -> usize {
        self.eaf.len()
    }

    /// Allele frequencies.
    pub fn eaf(&self) -> &[f64] {
        &self.eaf
    }

    /// Number of allele copies n (2 for diploid biallelic variants).
    pub fn allele_copies(&self) -> u32 {
        self.allele_copies
    }

    /// Mean allele count `n f_j` of variant j.
    pub fn mean(&self, j: usize) -> f64 {
        f64::from(self.allele_copies) * self.eaf[j]
    }

    /// Variance `n f_j (1 − f_j)` of variant j; strictly positive.
    pub fn variance(&self, j: usize) -> f64 {
        let f = self.eaf[j];
        f64::from(self.allele_copies) * f * (1.0 - f)
    }

    /// All variant variances.
    pub fn variances(&self) -> Vec<f64> {
        (0..self.variant_count()).map(|j| self.variance(j)).collect()
    }
}

/// Structural parameters on the scale of the observed data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralParams {
    /// Instrument strengths γ (exposure per allele copy), length J.
    pub gamma: Vec<f64>,
    /// Direct (pleiotropic) genotype-outcome effects α, length J.
    pub alpha: Vec<f64>,
    /// Causal effect β of the exposure on the outcome.
    pub beta: f64,
    /// Confounder loading on the exposure.
    pub kappa_x: f64,
    /// Confounder loading on the outcome.
    pub kappa_y: f64,
    /// Exposure noise standard deviation, > 0.
    pub sigma_x: f64,
    /// Outcome noise standard deviation, > 0.
    pub sigma_y: f64,
}

impl StructuralParams {
    /// Checks finiteness, positive noise scales and matching lengths.
    pub fn validate(&self) -> Result<()> {
        if self.gamma.len() != self.alpha.len() {
            return Err(Error::DimensionMismatch(format!(
                "gamma has {} entries but alpha has {}",
                self.gamma.len(),
                self.alpha.len()
            )));
        }
        let scalars = [self.beta, self.kappa_x, self.kappa_y, self.sigma_x, self.sigma_y];
        if scalars.iter().any(|v| !v.is_finite())
            || self.gamma.iter().chain(&self.alpha).any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite structural parameter".into()));
        }
        if self.sigma_x <= 0.0 || self.sigma_y <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "noise scales must be positive (sigma_x={}, sigma_y={})",
                self.sigma_x, self.sigma_y
            )));
        }
        Ok(())
    }

    /// Number of variants this parameter set describes.
    pub fn variant_count(&self) -> usize {
        self.gamma.len()
    }
}

/// Structural parameters on the standardized scale used by the priors.
///
/// With `s_j = sqrt(n f_j (1 − f_j))` the map from [`StructuralParams`] is
///
/// ```text
/// γ̃_j = γ_j s_j / σ_X      β̃ = β σ_X / σ_Y      α̃_j = α_j s_j / σ_Y
/// κ̃_X = κ_X / σ_X          κ̃_Y = κ_Y / σ_Y
/// ```
///
/// so each coefficient measures the effect of one standard deviation of its
/// source variable in units of the target's noise standard deviation. The
/// noise scales themselves stay on the original scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledParams {
    /// Standardized instrument strengths γ̃, length J.
    pub gamma: Vec<f64>,
    /// Standardized pleiotropic effects α̃, length J.
    pub alpha: Vec<f64>,
    /// Standardized causal effect β̃.
    pub beta: f64,
    /// Standardized confounder loading κ̃_X.
    pub kappa_x: f64,
    /// Standardized confounder loading κ̃_Y.
    pub kappa_y: f64,
    /// Exposure noise standard deviation (original scale), > 0.
    pub sigma_x: f64,
    /// Outcome noise standard deviation (original scale), > 0.
    pub sigma_y: f64,
}

/// Maps original-scale parameters to the standardized scale.
pub fn rescale(params: &StructuralParams, spec: &GenotypeSpec) -> Result<RescaledParams> {
    params.validate()?;
    check_spec_len(params.variant_count(), spec)?;
    let s: Vec<f64> = spec.variances().iter().map(|v| v.sqrt()).collect();
    Ok(RescaledParams {
        gamma: params
            .gamma
            .iter()
            .zip(&s)
            .map(|(g, sj)| g * sj / params.sigma_x)
            .collect(),
        alpha: params
            .alpha
            .iter()
            .zip(&s)
            .map(|(a, sj)| a * sj / params.sigma_y)
            .collect(),
        beta: params.beta * params.sigma_x / params.sigma_y,
        kappa_x: params.kappa_x / params.sigma_x,
        kappa_y: params.kappa_y / params.sigma_y,
        sigma_x: params.sigma_x,
        sigma_y: params.sigma_y,
    })
}

/// Inverse of [`rescale`]; exact round trip up to floating-point error.
pub fn unrescale(params: &RescaledParams, spec: &GenotypeSpec) -> Result<StructuralParams> {
    check_spec_len(params.gamma.len(), spec)?;
    if params.gamma.len() != params.alpha.len() {
        return Err(Error::DimensionMismatch(format!(
            "gamma has {} entries but alpha has {}",
            params.gamma.len(),
            params.alpha.len()
        )));
    }
    if !(params.sigma_x > 0.0) || !(params.sigma_y > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise scales must be positive (sigma_x={}, sigma_y={})",
            params.sigma_x, params.sigma_y
        )));
    }
    let s: Vec<f64> = spec.variances().iter().map(|v| v.sqrt()).collect();
    Ok(StructuralParams {
        gamma: params
            .gamma
            .iter()
            .zip(&s)
            .map(|(g, sj)| g * params.sigma_x / sj)
            .collect(),
        alpha: params
            .alpha
            .iter()
            .zip(&s)
            .map(|(a, sj)| a * params.sigma_y / sj)
            .collect(),
        beta: params.beta * params.sigma_y / params.sigma_x,
        kappa_x: params.kappa_x * params.sigma_x,
        kappa_y: params.kappa_y * params.sigma_y,
        sigma_x: params.sigma_x,
        sigma_y: params.sigma_y,
    })
}

fn check_spec_len(len: usize, spec: &GenotypeSpec) -> Result<()> {
    if len != spec.variant_count() {
        return Err(Error::DimensionMismatch(format!(
            "parameters describe {len} variants but genotype spec has {}",
            spec.variant_count()
        )));
    }
    Ok(())
}

/// Mean and covariance of `(X, Y)` given a genotype vector `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMoments {
    /// `(E[X|g], E[Y|g])`.
    pub mean: [f64; 2],
    /// 2×2 conditional covariance, independent of `g`.
    pub cov: [[f64; 2]; 2],
}

/// Conditional mean and covariance of `(X, Y)` given `G = g`.
pub fn implied_conditional_moments(
    params: &StructuralParams,
    g: &[f64],
) -> Result<ConditionalMoments> {
    params.validate()?;
    if g.len() != params.variant_count() {
        return Err(Error::DimensionMismatch(format!(
            "genotype vector has {} entries but parameters describe {} variants",
            g.len(),
            params.variant_count()
        )));
    }
    let mu_x: f64 = params.gamma.iter().zip(g).map(|(c, gj)| c * gj).sum();
    let mu_a: f64 = params.alpha.iter().zip(g).map(|(c, gj)| c * gj).sum();
    let (s11, s12, s22) = conditional_cov(params);
    Ok(ConditionalMoments {
        mean: [mu_x, mu_a + params.beta * mu_x],
        cov: [[s11, s12], [s12, s22]],
    })
}

fn conditional_cov(p: &StructuralParams) -> (f64, f64, f64) {
    let sx2 = p.sigma_x * p.sigma_x;
    let sy2 = p.sigma_y * p.sigma_y;
    let s11 = sx2 + p.kappa_x * p.kappa_x;
    let s12 = p.kappa_x * p.kappa_y + p.beta * s11;
    let ky_eff = p.kappa_y + p.beta * p.kappa_x;
    let s22 = sy2 + p.beta * p.beta * sx2 + ky_eff * ky_eff;
    (s11, s12, s22)
}

/// Marginal mean vector and covariance matrix of `(G_1, …, G_J, X, Y)`
/// implied by the model; variant order first, then exposure, then outcome.
pub fn marginal_moments(
    params: &StructuralParams,
    spec: &GenotypeSpec,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    params.validate()?;
    check_spec_len(params.variant_count(), spec)?;
    let j = spec.variant_count();
    let dim = j + 2;
    let mut mean = DVector::zeros(dim);
    let mut cov = DMatrix::zeros(dim, dim);

    let a: Vec<f64> = params
        .alpha
        .iter()
        .zip(&params.gamma)
        .map(|(al, ga)| al + params.beta * ga)
        .collect();

    let mut mu_x = 0.0;
    let mut mu_y = 0.0;
    let mut var_gx = 0.0;
    let mut cov_gxy = 0.0;
    let mut var_gy = 0.0;
    for k in 0..j {
        let m = spec.mean(k);
        let v = spec.variance(k);
        mean[k] = m;
        mu_x += params.gamma[k] * m;
        mu_y += a[k] * m;
        cov[(k, k)] = v;
        cov[(k, j)] = params.gamma[k] * v;
        cov[(j, k)] = cov[(k, j)];
        cov[(k, j + 1)] = a[k] * v;
        cov[(j + 1, k)] = cov[(k, j + 1)];
        var_gx += params.gamma[k] * params.gamma[k] * v;
        cov_gxy += params.gamma[k] * a[k] * v;
        var_gy += a[k] * a[k] * v;
    }
    mean[j] = mu_x;
    mean[j + 1] = mu_y;

    let (s11, s12, s22) = conditional_cov(params);
    cov[(j, j)] = var_gx + s11;
    cov[(j, j + 1)] = cov_gxy + s12;
    cov[(j + 1, j)] = cov[(j, j + 1)];
    cov[(j + 1, j + 1)] = var_gy + s22;
    Ok((mean, cov))
}

/// Where a [`SufficientStats`] instance came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsSource {
    /// Computed from individual-level rows.
    Individual,
    /// Reconstructed from per-variant summary statistics.
    Summary,
    /// Supplied directly as a covariance matrix.
    Covariance,
    /// Generated by the simulator.
    Simulated,
}

/// Bookkeeping attached to sufficient statistics: centering offsets that were
/// subtracted from X and Y, dropped incomplete rows, and eigenvalue clipping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsProvenance {
    /// How the statistics were obtained.
    pub source: StatsSource,
    /// Sample mean subtracted from the exposure column.
    pub x_offset: f64,
    /// Sample mean subtracted from the outcome column.
    pub y_offset: f64,
    /// Rows dropped for missing values during ingestion.
    pub rows_dropped: usize,
    /// Most negative eigenvalue clipped to zero, if any clipping occurred.
    pub clipped_min_eigenvalue: Option<f64>,
}

impl StatsProvenance {
    /// Provenance with no centering and no dropped rows.
    pub fn new(source: StatsSource) -> Self {
        Self {
            source,
            x_offset: 0.0,
            y_offset: 0.0,
            rows_dropped: 0,
            clipped_min_eigenvalue: None,
        }
    }
}

/// Sufficient statistics of a data set for this model: sample size, mean
/// vector and covariance matrix of `(G_1, …, G_J, X, Y)`, plus the genotype
/// spec and provenance.
///
/// The stored covariance uses the `1/N` (population) normalization. Genotype
/// means are kept as observed; the exposure and outcome means are zero after
/// ingestion-time centering, with the subtracted offsets recorded in
/// [`StatsProvenance`]. The likelihood reads only the covariance block.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    n_obs: u64,
    genotype_spec: GenotypeSpec,
    provenance: StatsProvenance,
}

/// Eigenvalues above this floor (relative to the largest) are accepted;
/// anything in `[floor, 0)` is clipped to zero, anything below is an error.
pub const EIGENVALUE_FLOOR: f64 = -1e-8;

/// Relative tolerance for the genotype-variance consistency check between
/// the covariance diagonal and the genotype spec.
pub const GENOTYPE_VARIANCE_TOLERANCE: f64 = 0.1;

impl SufficientStats {
    /// Builds sufficient statistics from parts, validating dimensions,
    /// symmetry and positive semidefiniteness (eigenvalues below
    /// [`EIGENVALUE_FLOOR`] are rejected; small negatives are clipped to zero
    /// and recorded in the provenance).
    pub fn from_parts(
        mean: DVector<f64>,
        cov: DMatrix<f64>,
        n_obs: u64,
        genotype_spec: GenotypeSpec,
        mut provenance: StatsProvenance,
    ) -> Result<Self> {
        let j = genotype_spec.variant_count();
        let dim = j + 2;
        if mean.len() != dim || cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected mean of length {dim} and {dim}x{dim} covariance for {j} variants, \
                 got mean of length {} and {}x{} covariance",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) || cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite sufficient statistic".into()));
        }
        let scale = cov.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for r in 0..dim {
            for c in (r + 1)..dim {
                if (cov[(r, c)] - cov[(c, r)]).abs() > 1e-8 * scale {
                    return Err(Error::InvalidInput(format!(
                        "covariance is not symmetric at ({r}, {c})"
                    )));
                }
            }
        }
        let cov = symmetrize(cov);
        let (cov, clipped) = clip_to_psd(cov)?;
        if clipped.is_some() {
            provenance.clipped_min_eigenvalue = clipped;
            log::warn!(
                "covariance had a slightly negative eigenvalue ({:.3e}); clipped to zero",
                clipped.unwrap()
            );
        }
        // For stats built from summary data or a published covariance the
        // genotype spec is an independent input; require the diagonal to be
        // consistent with it. Individual-level and simulated statistics
        // estimate the spec from the same sample, so sampling noise in the
        // diagonal is expected there.
        if matches!(provenance.source, StatsSource::Summary | StatsSource::Covariance) {
            for k in 0..j {
                let expected = genotype_spec.variance(k);
                let got = cov[(k, k)];
                if (got - expected).abs() > GENOTYPE_VARIANCE_TOLERANCE * expected {
                    return Err(Error::InvalidInput(format!(
                        "variance of variant {} is {got:.6}, inconsistent with genotype spec \
                         value {expected:.6}",
                        k + 1
                    )));
                }
            }
        }
        Ok(Self { mean, cov, n_obs, genotype_spec, provenance })
    }

    /// Builds statistics from a bare covariance matrix (published-matrix
    /// workflow). Genotype means are taken from the spec; X and Y means are
    /// zero by construction.
    pub fn from_covariance(
        cov: DMatrix<f64>,
        n_obs: u64,
        genotype_spec: GenotypeSpec,
    ) -> Result<Self> {
        let j = genotype_spec.variant_count();
        let mut mean = DVector::zeros(j + 2);
        for k in 0..j {
            mean[k] = genotype_spec.mean(k);
        }
        Self::from_parts(
            mean,
            cov,
            n_obs,
            genotype_spec,
            StatsProvenance::new(StatsSource::Covariance),
        )
    }

    /// Sample size N.
    pub fn n_obs(&self) -> u64 {
        self.n_obs
    }

    /// Number of variants J.
    pub fn variant_count(&self) -> usize {
        self.genotype_spec.variant_count()
    }

    /// Mean vector of `(G, X, Y)`; X/Y entries are zero after centering.
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Covariance matrix of `(G, X, Y)` with `1/N` normalization.
    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Genotype model the statistics refer to.
    pub fn genotype_spec(&self) -> &GenotypeSpec {
        &self.genotype_spec
    }

    /// Ingestion bookkeeping.
    pub fn provenance(&self) -> &StatsProvenance {
        &self.provenance
    }

    /// Sample variance of the exposure.
    pub fn var_x(&self) -> f64 {
        let j = self.variant_count();
        self.cov[(j, j)]
    }

    /// Sample variance of the outcome.
    pub fn var_y(&self) -> f64 {
        let j = self.variant_count();
        self.cov[(j + 1, j + 1)]
    }

    /// Statistics for the reversed causal question: exposure and outcome
    /// swap roles, genotype block unchanged.
    pub fn swap_xy(&self) -> Self {
        let j = self.variant_count();
        let mut mean = self.mean.clone();
        mean.swap_rows(j, j + 1);
        let mut cov = self.cov.clone();
        cov.swap_rows(j, j + 1);
        cov.swap_columns(j, j + 1);
        let mut provenance = self.provenance.clone();
        std::mem::swap(&mut provenance.x_offset, &mut provenance.y_offset);
        Self {
            mean,
            cov,
            n_obs: self.n_obs,
            genotype_spec: self.genotype_spec.clone(),
            provenance,
        }
    }
}

fn symmetrize(mut cov: DMatrix<f64>) -> DMatrix<f64> {
    let dim = cov.nrows();
    for r in 0..dim {
        for c in (r + 1)..dim {
            let v = 0.5 * (cov[(r, c)] + cov[(c, r)]);
            cov[(r, c)] = v;
            cov[(c, r)] = v;
        }
    }
    cov
}

/// Checks positive semidefiniteness against [`EIGENVALUE_FLOOR`] (scaled by
/// the largest eigenvalue magnitude) and clips small negative eigenvalues to
/// zero, returning the repaired matrix and the clipped minimum if any.
fn clip_to_psd(cov: DMatrix<f64>) -> Result<(DMatrix<f64>, Option<f64>)> {
    let eigen = cov.clone().symmetric_eigen();
    let scale = eigen.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let min_eig = eigen.eigenvalues.min();
    if min_eig < EIGENVALUE_FLOOR * scale {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min_eig });
    }
    if min_eig >= 0.0 {
        return Ok((cov, None));
    }
    let mut eigen = eigen;
    for v in eigen.eigenvalues.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok((symmetrize(eigen.recompose()), Some(min_eig)))
}

/// Precomputed covariance blocks for repeated likelihood evaluation against
/// one data set. Evaluation is `O(J²)` with no allocation beyond one
/// length-J scratch vector.
#[derive(Debug, Clone)]
pub struct SemLikelihood {
    j: usize,
    n_obs: f64,
    c_gg: Vec<f64>,
    c_gx: Vec<f64>,
    c_gy: Vec<f64>,
    c_xx: f64,
    c_xy: f64,
    c_yy: f64,
}

impl SemLikelihood {
    /// Extracts the covariance blocks of `stats` once.
    pub fn new(stats: &SufficientStats) -> Self {
        let j = stats.variant_count();
        let cov = stats.cov();
        let mut c_gg = vec![0.0; j * j];
        let mut c_gx = vec![0.0; j];
        let mut c_gy = vec![0.0; j];
        for r in 0..j {
            for c in 0..j {
                c_gg[r * j + c] = cov[(r, c)];
            }
            c_gx[r] = cov[(r, j)];
            c_gy[r] = cov[(r, j + 1)];
        }
        Self {
            j,
            n_obs: stats.n_obs() as f64,
            c_gg,
            c_gx,
            c_gy,
            c_xx: cov[(j, j)],
            c_xy: cov[(j, j + 1)],
            c_yy: cov[(j + 1, j + 1)],
        }
    }

    /// Log-likelihood up to the constant `−N log 2π`; returns `−∞` when the
    /// conditional covariance is numerically singular or ill-conditioned.
    /// Parameters are assumed valid (see [`log_likelihood`] for the checked
    /// entry point).
    pub fn log_density(&self, params: &StructuralParams) -> f64 {
        if self.n_obs == 0.0 {
            return 0.0;
        }
        let (s11, s12, s22) = conditional_cov(params);
        let det = s11 * s22 - s12 * s12;
        if !(det > DET_FLOOR) || !det.is_finite() {
            return f64::NEG_INFINITY;
        }
        let trace = s11 + s22;
        let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
        let lambda_min = 0.5 * (trace - disc);
        if !(lambda_min > 0.0) || 0.5 * (trace + disc) > CONDITION_CAP * lambda_min {
            return f64::NEG_INFINITY;
        }

        // Residual second moments from the covariance blocks, with
        // a = α + βγ the reduced-form genotype-outcome coefficient:
        //   S₁₁ = C_XX − 2 γᵀC_GX + γᵀC_GG γ
        //   S₁₂ = C_XY − γᵀC_GY − aᵀC_GX + γᵀC_GG a
        //   S₂₂ = C_YY − 2 aᵀC_GY + aᵀC_GG a
        let j = self.j;
        let gamma = &params.gamma;
        let a: Vec<f64> = params
            .alpha
            .iter()
            .zip(gamma)
            .map(|(al, ga)| al + params.beta * ga)
            .collect();
        let mut qgg = 0.0;
        let mut qga = 0.0;
        let mut qaa = 0.0;
        for r in 0..j {
            let row = &self.c_gg[r * j..(r + 1) * j];
            let mut tg = 0.0;
            let mut ta = 0.0;
            for c in 0..j {
                tg += row[c] * gamma[c];
                ta += row[c] * a[c];
            }
            qgg += gamma[r] * tg;
            qga += gamma[r] * ta;
            qaa += a[r] * ta;
        }
        let mut gx = 0.0;
        let mut gy = 0.0;
        let mut ax = 0.0;
        let mut ay = 0.0;
        for r in 0..j {
            gx += gamma[r] * self.c_gx[r];
            gy += gamma[r] * self.c_gy[r];
            ax += a[r] * self.c_gx[r];
            ay += a[r] * self.c_gy[r];
        }
        let m11 = self.c_xx - 2.0 * gx + qgg;
        let m12 = self.c_xy - gy - ax + qga;
        let m22 = self.c_yy - 2.0 * ay + qaa;

        let tr_term = (s22 * m11 - 2.0 * s12 * m12 + s11 * m22) / det;
        let ll = -0.5 * self.n_obs * (det.ln() + tr_term);
        if ll.is_nan() {
            f64::NEG_INFINITY
        } else {
            ll
        }
    }
}

/// Checked log-likelihood of `params` against `stats`, up to `−N log 2π`.
pub fn log_likelihood(params: &StructuralParams, stats: &SufficientStats) -> Result<f64> {
    params.validate()?;
    if params.variant_count() != stats.variant_count() {
        return Err(Error::DimensionMismatch(format!(
            "parameters describe {} variants but statistics have {}",
            params.variant_count(),
            stats.variant_count()
        )));
    }
    Ok(SemLikelihood::new(stats).log_density(params))
}
