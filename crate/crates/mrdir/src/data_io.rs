//! Data ingestion and serialization: individual-level tables, per-variant
//! summary-statistic records, and sufficient-statistics documents.
//!
//! Three on-disk formats are supported, all versioned:
//!
//! * **Individual-level table** — delimiter-separated text with a header row
//!   naming the columns `G1, …, GJ, X, Y`. Lines starting with `#` are
//!   comments. Rows with missing cells (empty, `NA`, or `NaN`) are dropped
//!   and counted (complete-case policy).
//! * **Summary document** — one JSON document holding per-variant regression
//!   summaries (EAF, gene–exposure and gene–outcome coefficients with
//!   standard errors and sample sizes) plus the observational
//!   exposure–outcome coefficient.
//! * **Sufficient-statistics document** — one JSON document holding the
//!   sample size, genotype spec, mean vector, covariance matrix and
//!   provenance, so a fit can be re-run without the raw data.

use std::io::{Read as _, Write as _};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sem::{GenotypeSpec, StatsProvenance, StatsSource, SufficientStats};

/// Version tag written into (and required from) individual-level tables.
pub const INDIVIDUAL_FORMAT: &str = "individual-table v1";
/// Format tag for summary documents.
pub const SUMMARY_FORMAT: &str = "variant-summaries";
/// Format tag for sufficient-statistics documents.
pub const STATS_FORMAT: &str = "sufficient-statistics";
/// Current version number of the JSON document schemas.
pub const DOCUMENT_VERSION: u32 = 1;

/// An individual-level data set: `N` rows of `J` genotype dosages plus the
/// exposure and outcome values.
///
/// Genotypes are stored row-major as allele counts in `0..=allele_copies`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndividualData {
    n_variants: usize,
    allele_copies: u32,
    /// Row-major `N × J` allele counts.
    genotypes: Vec<u8>,
    exposure: Vec<f64>,
    outcome: Vec<f64>,
}

impl IndividualData {
    /// Builds a table, validating that the column lengths agree and every
    /// genotype lies in `0..=allele_copies`.
    pub fn new(
        n_variants: usize,
        allele_copies: u32,
        genotypes: Vec<u8>,
        exposure: Vec<f64>,
        outcome: Vec<f64>,
    ) -> Result<Self> {
        if n_variants == 0 {
            return Err(Error::InvalidInput("need at least one variant column".into()));
        }
        if allele_copies == 0 {
            return Err(Error::InvalidInput("allele_copies must be at least 1".into()));
        }
        let n = exposure.len();
        if outcome.len() != n || genotypes.len() != n * n_variants {
            return Err(Error::DimensionMismatch(format!(
                "expected {n} outcome values and {} genotype cells, got {} and {}",
                n * n_variants,
                outcome.len(),
                genotypes.len()
            )));
        }
        if let Some(bad) = genotypes.iter().find(|&&g| u32::from(g) > allele_copies) {
            return Err(Error::InvalidInput(format!(
                "genotype value {bad} exceeds allele_copies = {allele_copies}"
            )));
        }
        if exposure.iter().chain(&outcome).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite exposure or outcome value".into()));
        }
        Ok(Self { n_variants, allele_copies, genotypes, exposure, outcome })
    }

    /// Number of rows `N`.
    pub fn n_rows(&self) -> usize {
        self.exposure.len()
    }

    /// Number of variant columns `J`.
    pub fn n_variants(&self) -> usize {
        self.n_variants
    }

    /// Number of allele copies per genotype (binomial `n`).
    pub fn allele_copies(&self) -> u32 {
        self.allele_copies
    }

    /// Allele count of variant `j` for row `i`.
    pub fn genotype(&self, i: usize, j: usize) -> u8 {
        self.genotypes[i * self.n_variants + j]
    }

    /// Exposure column.
    pub fn exposure(&self) -> &[f64] {
        &self.exposure
    }

    /// Outcome column.
    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    /// Genotype column `j` as `f64` values.
    pub fn genotype_column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| f64::from(self.genotype(i, j))).collect()
    }
}

/// Writes an individual-level table as delimiter-separated text with a
/// `G1, …, GJ, X, Y` header and a format comment line.
pub fn write_individual_csv<P: AsRef<Path>>(path: P, data: &IndividualData) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# format: {INDIVIDUAL_FORMAT}\n"));
    out.push_str(&format!("# allele_copies: {}\n", data.allele_copies()));
    let mut header: Vec<String> =
        (1..=data.n_variants()).map(|j| format!("G{j}")).collect();
    header.push("X".into());
    header.push("Y".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..data.n_rows() {
        for j in 0..data.n_variants() {
            out.push_str(itoa_u8(data.genotype(i, j)));
            out.push(',');
        }
        out.push_str(&format!("{},{}\n", data.exposure()[i], data.outcome()[i]));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn itoa_u8(v: u8) -> &'static str {
    // Allele counts are tiny; avoid per-cell formatting allocations.
    const DIGITS: [&str; 10] = ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"];
    DIGITS.get(v as usize).copied().unwrap_or("?")
}

/// Result of reading an individual-level table: the complete-case data plus
/// the number of rows dropped for missing values.
#[derive(Debug, Clone)]
pub struct IndividualRead {
    /// Complete-case rows.
    pub data: IndividualData,
    /// Rows dropped because a cell was empty, `NA`, or `NaN`.
    pub rows_dropped: usize,
}

/// Reads an individual-level table written by [`write_individual_csv`] (or
/// any delimiter-separated file with the same `G1, …, GJ, X, Y` header).
///
/// `#`-prefixed lines are treated as comments. A `# allele_copies:` comment
/// overrides the default of 2. Rows with missing cells are dropped and
/// counted; malformed rows (wrong field count, non-integer or out-of-range
/// genotypes, non-numeric phenotypes) are hard errors.
pub fn read_individual_csv<P: AsRef<Path>>(path: P) -> Result<IndividualRead> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    parse_individual_csv(&text)
}

/// Parses individual-level table text; see [`read_individual_csv`].
pub fn parse_individual_csv(text: &str) -> Result<IndividualRead> {
    let mut allele_copies: u32 = 2;
    for line in text.lines() {
        let Some(comment) = line.strip_prefix('#') else { continue };
        if let Some(value) = comment.trim().strip_prefix("allele_copies:") {
            allele_copies = value.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("unreadable allele_copies comment: {line:?}"))
            })?;
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let n_cols = headers.len();
    if n_cols < 3 {
        return Err(Error::InvalidInput(format!(
            "expected at least 3 columns (G1, X, Y), found {n_cols}"
        )));
    }
    let n_variants = n_cols - 2;
    for j in 0..n_variants {
        let expected = format!("G{}", j + 1);
        if headers[j] != expected {
            return Err(Error::InvalidInput(format!(
                "column {} is named {:?}, expected {:?}",
                j + 1,
                &headers[j],
                expected
            )));
        }
    }
    if &headers[n_variants] != "X" || &headers[n_variants + 1] != "Y" {
        return Err(Error::InvalidInput(format!(
            "last two columns must be named \"X\" and \"Y\", found {:?} and {:?}",
            &headers[n_variants],
            &headers[n_variants + 1]
        )));
    }

    let mut genotypes = Vec::new();
    let mut exposure = Vec::new();
    let mut outcome = Vec::new();
    let mut rows_dropped = 0usize;
    'rows: for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != n_cols {
            return Err(Error::InvalidInput(format!(
                "row {} has {} fields, expected {n_cols}",
                row_idx + 1,
                record.len()
            )));
        }
        let mut row_genotypes = Vec::with_capacity(n_variants);
        let mut row_xy = [0.0f64; 2];
        for (c, cell) in record.iter().enumerate() {
            if is_missing(cell) {
                rows_dropped += 1;
                continue 'rows;
            }
            if c < n_variants {
                row_genotypes.push(parse_genotype(cell, allele_copies, row_idx, c)?);
            } else {
                let value: f64 = cell.parse().map_err(|_| {
                    Error::InvalidInput(format!(
                        "row {}: unreadable value {cell:?} in column {:?}",
                        row_idx + 1,
                        &headers[c]
                    ))
                })?;
                if value.is_nan() {
                    rows_dropped += 1;
                    continue 'rows;
                }
                if !value.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "row {}: non-finite value in column {:?}",
                        row_idx + 1,
                        &headers[c]
                    )));
                }
                row_xy[c - n_variants] = value;
            }
        }
        genotypes.extend_from_slice(&row_genotypes);
        exposure.push(row_xy[0]);
        outcome.push(row_xy[1]);
    }

    if exposure.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 complete rows, found {} ({rows_dropped} dropped)",
            exposure.len()
        )));
    }
    let data = IndividualData::new(n_variants, allele_copies, genotypes, exposure, outcome)?;
    Ok(IndividualRead { data, rows_dropped })
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan")
}

fn parse_genotype(cell: &str, allele_copies: u32, row_idx: usize, col: usize) -> Result<u8> {
    let value: f64 = cell.parse().map_err(|_| {
        Error::InvalidInput(format!(
            "row {}: unreadable genotype {cell:?} in column G{}",
            row_idx + 1,
            col + 1
        ))
    })?;
    if value.fract() != 0.0 || value < 0.0 || value > f64::from(allele_copies) {
        return Err(Error::InvalidInput(format!(
            "row {}: genotype {cell:?} in column G{} is not an integer in 0..={allele_copies}",
            row_idx + 1,
            col + 1
        )));
    }
    Ok(value as u8)
}

/// Computes sufficient statistics from individual-level rows.
///
/// Sample means and the covariance matrix use the `1/N` denominator. The
/// exposure and outcome columns are centered, with the subtracted offsets
/// recorded in the provenance. When `spec` is absent, effect allele
/// frequencies are estimated from the genotype column means
/// (`f̂_j = mean(G_j) / allele_copies`).
pub fn stats_from_individual(
    data: &IndividualData,
    spec: Option<GenotypeSpec>,
) -> Result<SufficientStats> {
    stats_with_source(data, spec, StatsSource::Individual, 0)
}

pub(crate) fn stats_with_source(
    data: &IndividualData,
    spec: Option<GenotypeSpec>,
    source: StatsSource,
    rows_dropped: usize,
) -> Result<SufficientStats> {
    let n = data.n_rows();
    let j = data.n_variants();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 rows, found {n}")));
    }
    let dim = j + 2;

    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for k in 0..j {
        columns.push(data.genotype_column(k));
    }
    columns.push(data.exposure().to_vec());
    columns.push(data.outcome().to_vec());

    let means: Vec<f64> =
        columns.iter().map(|col| col.iter().sum::<f64>() / n as f64).collect();
    let mut centered = columns;
    for (col, mean) in centered.iter_mut().zip(&means) {
        for v in col.iter_mut() {
            *v -= mean;
        }
    }

    let mut cov = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in r..dim {
            let s: f64 =
                centered[r].iter().zip(&centered[c]).map(|(a, b)| a * b).sum();
            cov[(r, c)] = s / n as f64;
            cov[(c, r)] = cov[(r, c)];
        }
    }

    for k in 0..j {
        if cov[(k, k)] == 0.0 {
            return Err(Error::DegenerateGenotype(format!(
                "column G{} has zero variance",
                k + 1
            )));
        }
    }
    for (idx, name) in [(j, "X"), (j + 1, "Y")] {
        if cov[(idx, idx)] == 0.0 {
            return Err(Error::InvalidInput(format!("column {name} has zero variance")));
        }
    }

    let spec = match spec {
        Some(spec) => {
            if spec.variant_count() != j {
                return Err(Error::DimensionMismatch(format!(
                    "genotype spec has {} variants but the table has {j}",
                    spec.variant_count()
                )));
            }
            spec
        }
        None => {
            let eaf: Vec<f64> =
                means[..j].iter().map(|m| m / f64::from(data.allele_copies())).collect();
            GenotypeSpec::new(eaf, data.allele_copies())?
        }
    };

    let mut mean = DVector::zeros(dim);
    for k in 0..j {
        mean[k] = means[k];
    }
    let provenance = StatsProvenance {
        source,
        x_offset: means[j],
        y_offset: means[j + 1],
        rows_dropped,
        clipped_min_eigenvalue: None,
    };
    SufficientStats::from_parts(mean, cov, n as u64, spec, provenance)
}

/// Per-variant regression summaries: the gene–exposure and gene–outcome
/// simple-regression coefficients with their standard errors and sample
/// sizes, plus the effect allele frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSummary {
    /// Effect allele frequency estimate, in (0, 1).
    pub eaf: f64,
    /// Gene–exposure regression coefficient.
    pub beta_gx: f64,
    /// Standard error of `beta_gx`, > 0.
    pub se_gx: f64,
    /// Sample size behind `beta_gx`, ≥ 2.
    pub n_gx: u64,
    /// Gene–outcome regression coefficient.
    pub beta_gy: f64,
    /// Standard error of `beta_gy`, > 0.
    pub se_gy: f64,
    /// Sample size behind `beta_gy`, ≥ 2.
    pub n_gy: u64,
}

/// Observational exposure–outcome association: the coefficient from
/// regressing the outcome on the exposure, optionally with its sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationalAssoc {
    /// Regression coefficient of the outcome on the exposure.
    pub estimate: f64,
    /// Sample size of the observational study, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

/// A set of per-variant summary statistics plus the study-level
/// observational association — the inputs required by the
/// moment-reconstruction path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryData {
    /// Document tag; must equal [`SUMMARY_FORMAT`].
    pub format: String,
    /// Schema version; must equal [`DOCUMENT_VERSION`].
    pub version: u32,
    /// Number of allele copies per genotype (binomial `n`), usually 2.
    pub allele_copies: u32,
    /// Observational exposure–outcome regression coefficient. Required for
    /// reconstructing `Cov(X, Y)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs_assoc: Option<ObservationalAssoc>,
    /// One summary per variant.
    pub variants: Vec<VariantSummary>,
}

impl SummaryData {
    /// Builds a document with the current format tags.
    pub fn new(
        allele_copies: u32,
        obs_assoc: Option<ObservationalAssoc>,
        variants: Vec<VariantSummary>,
    ) -> Self {
        Self {
            format: SUMMARY_FORMAT.into(),
            version: DOCUMENT_VERSION,
            allele_copies,
            obs_assoc,
            variants,
        }
    }

    /// Checks field ranges and format tags.
    pub fn validate(&self) -> Result<()> {
        check_format(&self.format, self.version, SUMMARY_FORMAT)?;
        if self.allele_copies == 0 {
            return Err(Error::InvalidInput("allele_copies must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidInput("summary document lists no variants".into()));
        }
        for (idx, v) in self.variants.iter().enumerate() {
            let tag = format!("variant {}", idx + 1);
            if !(v.eaf > 0.0 && v.eaf < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "{tag}: eaf must lie strictly in (0, 1), got {}",
                    v.eaf
                )));
            }
            if !(v.se_gx > 0.0 && v.se_gx.is_finite())
                || !(v.se_gy > 0.0 && v.se_gy.is_finite())
            {
                return Err(Error::InvalidInput(format!(
                    "{tag}: standard errors must be positive and finite"
                )));
            }
            if !v.beta_gx.is_finite() || !v.beta_gy.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{tag}: regression coefficients must be finite"
                )));
            }
            if v.n_gx < 2 || v.n_gy < 2 {
                return Err(Error::InvalidInput(format!("{tag}: sample sizes must be ≥ 2")));
            }
        }
        if let Some(obs) = &self.obs_assoc {
            if !obs.estimate.is_finite() {
                return Err(Error::InvalidInput(
                    "observational coefficient must be finite".into(),
                ));
            }
            if let Some(n) = obs.n {
                if n < 2 {
                    return Err(Error::InvalidInput(
                        "observational sample size must be ≥ 2".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Reads a summary document from JSON.
pub fn read_summary<P: AsRef<Path>>(path: P) -> Result<SummaryData> {
    let text = std::fs::read_to_string(path)?;
    let doc: SummaryData = serde_json::from_str(&text)?;
    doc.validate()?;
    Ok(doc)
}

/// Writes a summary document as pretty-printed JSON.
pub fn write_summary<P: AsRef<Path>>(path: P, doc: &SummaryData) -> Result<()> {
    doc.validate()?;
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, doc)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Reconstructs sufficient statistics from per-variant regression summaries.
///
/// Writing `v_j = n·f̂_j(1−f̂_j)` for the model-implied genotype variance:
///
/// ```text
/// E[G_j]     = n·f̂_j                         Cov(G_j, X) = v_j·γ̂_j
/// Var(G_j)   = v_j                            Cov(G_j, Y) = v_j·Γ̂_j
/// Var(X)_j   = v_j·(γ̂_j² + N_{γ̂_j}·σ̂²_{γ̂_j})   (averaged across variants)
/// Var(Y)_j   = v_j·(Γ̂_j² + N_{Γ̂_j}·σ̂²_{Γ̂_j})   (averaged across variants)
/// Cov(X, Y)  = Var(X)·β̂_obs
/// ```
///
/// Cross-variant genotype covariances are set to zero (the model's variant
/// independence assumption; variants in linkage disequilibrium must be
/// pruned upstream). The sample size is the minimum of all supplied sizes,
/// including the observational one when present. The reconstructed matrix is
/// validated for positive semidefiniteness.
///
/// The reconstructed exposure and outcome means `Σ_j E[G_j]·coefficient` are
/// stored as centering offsets in the provenance; the likelihood depends
/// only on the covariance, so they are reported but never enter a fit.
pub fn stats_from_summary(doc: &SummaryData) -> Result<SufficientStats> {
    doc.validate()?;
    let obs = doc.obs_assoc.as_ref().ok_or_else(|| {
        Error::InvalidInput(
            "summary document lacks obs_assoc (observational exposure–outcome \
             coefficient), required to reconstruct Cov(X, Y)"
            .into(),
        )
    })?;

    let j = doc.variants.len();
    let dim = j + 2;
    let copies = f64::from(doc.allele_copies);
    let mut mean = DVector::zeros(dim);
    let mut cov = DMatrix::zeros(dim, dim);
    let mut var_x_estimates = Vec::with_capacity(j);
    let mut var_y_estimates = Vec::with_capacity(j);
    let mut mu_x = 0.0;
    let mut mu_y = 0.0;
    let mut n_min = u64::MAX;

    for (k, v) in doc.variants.iter().enumerate() {
        let mean_g = copies * v.eaf;
        let var_g = copies * v.eaf * (1.0 - v.eaf);
        mean[k] = mean_g;
        cov[(k, k)] = var_g;
        cov[(k, j)] = var_g * v.beta_gx;
        cov[(j, k)] = cov[(k, j)];
        cov[(k, j + 1)] = var_g * v.beta_gy;
        cov[(j + 1, k)] = cov[(k, j + 1)];
        mu_x += mean_g * v.beta_gx;
        mu_y += mean_g * v.beta_gy;
        var_x_estimates.push(var_g * (v.beta_gx * v.beta_gx + v.n_gx as f64 * v.se_gx * v.se_gx));
        var_y_estimates.push(var_g * (v.beta_gy * v.beta_gy + v.n_gy as f64 * v.se_gy * v.se_gy));
        n_min = n_min.min(v.n_gx).min(v.n_gy);
    }
    if let Some(n_obs) = obs.n {
        n_min = n_min.min(n_obs);
    }

    let var_x = var_x_estimates.iter().sum::<f64>() / j as f64;
    let var_y = var_y_estimates.iter().sum::<f64>() / j as f64;
    cov[(j, j)] = var_x;
    cov[(j + 1, j + 1)] = var_y;
    cov[(j, j + 1)] = var_x * obs.estimate;
    cov[(j + 1, j)] = cov[(j, j + 1)];

    let eaf: Vec<f64> = doc.variants.iter().map(|v| v.eaf).collect();
    let spec = GenotypeSpec::new(eaf, doc.allele_copies)?;
    let provenance = StatsProvenance {
        source: StatsSource::Summary,
        x_offset: mu_x,
        y_offset: mu_y,
        rows_dropped: 0,
        clipped_min_eigenvalue: None,
    };
    SufficientStats::from_parts(mean, cov, n_min, spec, provenance)
}

/// Simple linear regression of `y` on `x`: returns the slope and its
/// standard error (residual-based, `RSS/(N−2)` noise estimate).
pub fn simple_regression(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "regression inputs have lengths {n} and {}",
            y.len()
        )));
    }
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 points for a slope standard error, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput("regressor has zero variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut rss = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - intercept - slope * xi;
        rss += r * r;
    }
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    Ok((slope, se))
}

/// Computes per-variant regression summaries from individual-level data:
/// the bridge from a raw table to the summary-statistics workflow, used to
/// validate the moment reconstruction round trip.
///
/// EAFs are estimated from genotype column means; every slope uses the full
/// sample, so all sample sizes equal `N`.
pub fn summarize_individual(data: &IndividualData) -> Result<SummaryData> {
    let n = data.n_rows() as u64;
    let copies = f64::from(data.allele_copies());
    let mut variants = Vec::with_capacity(data.n_variants());
    for k in 0..data.n_variants() {
        let g = data.genotype_column(k);
        let eaf = g.iter().sum::<f64>() / (g.len() as f64 * copies);
        if !(eaf > 0.0 && eaf < 1.0) {
            return Err(Error::DegenerateGenotype(format!(
                "column G{} has allele frequency {eaf}, outside (0, 1)",
                k + 1
            )));
        }
        let (beta_gx, se_gx) = simple_regression(&g, data.exposure())?;
        let (beta_gy, se_gy) = simple_regression(&g, data.outcome())?;
        variants.push(VariantSummary {
            eaf,
            beta_gx,
            se_gx,
            n_gx: n,
            beta_gy,
            se_gy,
            n_gy: n,
        });
    }
    let (obs_beta, _) = simple_regression(data.exposure(), data.outcome())?;
    let obs_assoc = Some(ObservationalAssoc { estimate: obs_beta, n: Some(n) });
    Ok(SummaryData::new(data.allele_copies(), obs_assoc, variants))
}

/// Serializable form of [`SufficientStats`]: one JSON document from which a
/// fit can be re-run without the raw data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsDocument {
    /// Document tag; must equal [`STATS_FORMAT`].
    pub format: String,
    /// Schema version; must equal [`DOCUMENT_VERSION`].
    pub version: u32,
    /// Sample size `N`.
    pub n_obs: u64,
    /// Number of allele copies per genotype.
    pub allele_copies: u32,
    /// Effect allele frequencies, length `J`.
    pub eaf: Vec<f64>,
    /// Mean vector of `(G_1, …, G_J, X, Y)`; X and Y entries are zero after
    /// centering.
    pub mean: Vec<f64>,
    /// Covariance matrix (`1/N` denominator), row by row.
    pub cov: Vec<Vec<f64>>,
    /// Where the statistics came from and what was done to them.
    pub provenance: StatsProvenance,
}

impl StatsDocument {
    /// Captures sufficient statistics into the document form.
    pub fn from_stats(stats: &SufficientStats) -> Self {
        let dim = stats.mean().len();
        let cov = (0..dim)
            .map(|r| (0..dim).map(|c| stats.cov()[(r, c)]).collect())
            .collect();
        Self {
            format: STATS_FORMAT.into(),
            version: DOCUMENT_VERSION,
            n_obs: stats.n_obs(),
            allele_copies: stats.genotype_spec().allele_copies(),
            eaf: stats.genotype_spec().eaf().to_vec(),
            mean: stats.mean().iter().copied().collect(),
            cov,
            provenance: stats.provenance().clone(),
        }
    }

    /// Rebuilds validated sufficient statistics from the document.
    pub fn into_stats(self) -> Result<SufficientStats> {
        check_format(&self.format, self.version, STATS_FORMAT)?;
        let dim = self.mean.len();
        if self.cov.len() != dim || self.cov.iter().any(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "covariance must be {dim}×{dim} to match the mean vector"
            )));
        }
        let spec = GenotypeSpec::new(self.eaf, self.allele_copies)?;
        let mean = DVector::from_vec(self.mean);
        let cov = DMatrix::from_fn(dim, dim, |r, c| self.cov[r][c]);
        SufficientStats::from_parts(mean, cov, self.n_obs, spec, self.provenance)
    }
}

/// Reads a sufficient-statistics document from JSON and revalidates it.
pub fn read_stats<P: AsRef<Path>>(path: P) -> Result<SufficientStats> {
    let text = std::fs::read_to_string(path)?;
    let doc: StatsDocument = serde_json::from_str(&text)?;
    doc.into_stats()
}

/// Writes sufficient statistics as a pretty-printed JSON document.
pub fn write_stats<P: AsRef<Path>>(path: P, stats: &SufficientStats) -> Result<()> {
    let doc = StatsDocument::from_stats(stats);
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &doc)?;
    file.write_all(b"\n")?;
    Ok(())
}

fn check_format(format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected {
        return Err(Error::InvalidInput(format!(
            "document format is {format:?}, expected {expected:?}"
        )));
    }
    if version != DOCUMENT_VERSION {
        return Err(Error::InvalidInput(format!(
            "document version {version} is not supported (current: {DOCUMENT_VERSION})"
        )));
    }
    Ok(())
}
