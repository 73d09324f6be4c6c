//! Classical summary-statistic estimators kept as baselines: per-variant
//! Wald ratios with delta-method standard errors, their fixed-effect
//! inverse-variance-weighted combination, and a bidirectional table that
//! applies both to each causal direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sem::SufficientStats;

/// Wald ratio estimate for a single variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    /// Zero-based variant index the ratio was computed from.
    pub variant: usize,
    /// `Cov(G_j, outcome) / Cov(G_j, exposure)`.
    pub estimate: f64,
    /// Delta-method standard error.
    pub se: f64,
}

/// Inverse-variance-weighted combination of ratio estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledEstimate {
    /// Precision-weighted mean.
    pub estimate: f64,
    /// `(Σ se_j⁻²)^{−1/2}`.
    pub se: f64,
    /// Number of estimates combined.
    pub n_variants: usize,
}

/// Wald ratio `Cov(G_j, Y) / Cov(G_j, X)` for variant `variant`, with the
/// delta-method standard error obtained from the sampling variances of the
/// two regression coefficients `Cov(G_j, ·) / Var(G_j)`.
pub fn wald_ratio(stats: &SufficientStats, variant: usize) -> Result<RatioEstimate> {
    let j = stats.variant_count();
    if variant >= j {
        return Err(Error::DimensionMismatch(format!(
            "variant index {variant} out of range for {j} variants"
        )));
    }
    if stats.n_obs() == 0 {
        return Err(Error::InvalidInput(
            "Wald standard errors require a positive sample size".into(),
        ));
    }
    let cov = stats.cov();
    let v_g = cov[(variant, variant)];
    let c_gx = cov[(variant, j)];
    let c_gy = cov[(variant, j + 1)];
    if c_gx == 0.0 {
        return Err(Error::WeakInstrument { variant });
    }
    let r_x = c_gx / v_g;
    let r_y = c_gy / v_g;
    let n = stats.n_obs() as f64;
    // Residual-variance form of the regression-coefficient variances; the
    // Cauchy-Schwarz inequality keeps both nonnegative.
    let var_rx = ((stats.var_x() / v_g - r_x * r_x) / n).max(0.0);
    let var_ry = ((stats.var_y() / v_g - r_y * r_y) / n).max(0.0);
    let se2 = var_ry / (r_x * r_x) + (r_y * r_y) * var_rx / (r_x * r_x * r_x * r_x);
    Ok(RatioEstimate {
        variant,
        estimate: r_y / r_x,
        se: se2.max(0.0).sqrt(),
    })
}

/// Fixed-effect inverse-variance-weighted mean of ratio estimates. Requires
/// at least one estimate with a finite, positive standard error; estimates
/// not meeting that are rejected.
pub fn ivw(estimates: &[RatioEstimate]) -> Result<PooledEstimate> {
    if estimates.is_empty() {
        return Err(Error::InvalidInput("no estimates to combine".into()));
    }
    let mut sum_w = 0.0;
    let mut sum_we = 0.0;
    for e in estimates {
        if !e.se.is_finite() || e.se <= 0.0 || !e.estimate.is_finite() {
            return Err(Error::InvalidInput(format!(
                "estimate for variant {} has invalid se {} or value {}",
                e.variant + 1,
                e.se,
                e.estimate
            )));
        }
        let w = 1.0 / (e.se * e.se);
        sum_w += w;
        sum_we += w * e.estimate;
    }
    Ok(PooledEstimate {
        estimate: sum_we / sum_w,
        se: sum_w.sqrt().recip(),
        n_variants: estimates.len(),
    })
}

/// Ratio estimates for one causal direction: one row per instrument plus
/// the pooled combination when more than one instrument is available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionEstimates {
    /// Per-instrument Wald ratios.
    pub per_variant: Vec<RatioEstimate>,
    /// IVW combination; present when at least two instruments were used.
    pub pooled: Option<PooledEstimate>,
}

/// Wald/IVW estimates for both causal directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidirectionalTable {
    /// Exposure → outcome estimates using the exposure's instruments.
    pub forward: DirectionEstimates,
    /// Outcome → exposure estimates using the outcome's instruments.
    pub reverse: DirectionEstimates,
}

/// Per-instrument Wald ratios for `variants` plus their IVW combination
/// (absent when fewer than two instruments are given).
pub fn direction_estimates(
    stats: &SufficientStats,
    variants: &[usize],
) -> Result<DirectionEstimates> {
    let per_variant: Vec<RatioEstimate> = variants
        .iter()
        .map(|&v| wald_ratio(stats, v))
        .collect::<Result<_>>()?;
    let pooled = if per_variant.len() > 1 { Some(ivw(&per_variant)?) } else { None };
    Ok(DirectionEstimates { per_variant, pooled })
}

/// Computes forward estimates from `exposure_variants` and reverse
/// estimates (roles of X and Y swapped) from `outcome_variants`. The two
/// instrument sets must be disjoint and non-empty.
pub fn bidirectional_table(
    stats: &SufficientStats,
    exposure_variants: &[usize],
    outcome_variants: &[usize],
) -> Result<BidirectionalTable> {
    if exposure_variants.is_empty() || outcome_variants.is_empty() {
        return Err(Error::InvalidInput(
            "both directions need at least one instrument".into(),
        ));
    }
    if exposure_variants.iter().any(|v| outcome_variants.contains(v)) {
        return Err(Error::InvalidInput(
            "exposure and outcome instrument sets overlap".into(),
        ));
    }
    Ok(BidirectionalTable {
        forward: direction_estimates(stats, exposure_variants)?,
        reverse: direction_estimates(&stats.swap_xy(), outcome_variants)?,
    })
}
