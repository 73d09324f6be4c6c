//! End-to-end acceptance suite.
//!
//! Each test checks one externally stated target for the library: reference
//! Bayes-factor intervals on published covariance tables, classical baseline
//! identities, analytic evidence oracles, exact likelihood equivalences,
//! summary-statistic roundtrips, and invariance or robustness properties of
//! the full pipeline. Every test prints a single `criterion NN: PASS/FAIL`
//! line (visible under `--nocapture`) before asserting.
//!
//! The sampler settings used here are chosen for reliable evidence estimates
//! at each problem's dimension; seeds are fixed so every run is reproducible
//! bit for bit.

use mrdir::baselines;
use mrdir::data_io::{self, IndividualData};
use mrdir::inference::{analyze, AnalysisOptions, DirectionChoice};
use mrdir::nested::{self, SamplerConfig};
use mrdir::priors::WeightPrior;
use mrdir::sem::{
    self, GenotypeSpec, StatsProvenance, StatsSource, StructuralParams, SufficientStats,
};
use mrdir::simulate::{self, CoefSource, EafSource, Scenario, ScenarioKind};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Prints the per-criterion verdict line, then asserts.
fn verdict(label: &str, ok: bool, detail: String) {
    println!("{label}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{label}: {detail}");
}

/// Reference covariance of (G, X, Y) for the single-instrument example with
/// strong confounding: one variant at allele frequency 0.3, N = 10000.
fn strong_confounding_stats() -> SufficientStats {
    let cov = DMatrix::from_row_slice(
        3,
        3,
        &[0.421, 0.434, 0.441, 0.434, 2.447, 3.439, 0.441, 3.439, 6.404],
    );
    SufficientStats::from_covariance(cov, 10_000, GenotypeSpec::new(vec![0.3], 2).unwrap())
        .unwrap()
}

/// Reference covariance for the single-instrument example with weak
/// pleiotropy and weak confounding (same frequency and sample size).
fn weak_confounding_stats() -> SufficientStats {
    let cov = DMatrix::from_row_slice(
        3,
        3,
        &[0.425, 0.430, 0.481, 0.430, 1.477, 1.538, 0.481, 1.538, 2.645],
    );
    SufficientStats::from_covariance(cov, 10_000, GenotypeSpec::new(vec![0.3], 2).unwrap())
        .unwrap()
}

fn sampler(n_live: usize, slice_steps: usize, seed: u64) -> SamplerConfig {
    SamplerConfig {
        n_live: Some(n_live),
        slice_steps: Some(slice_steps),
        seed,
        ..Default::default()
    }
}

fn median(sorted_or_not: &[f64]) -> f64 {
    let mut v = sorted_or_not.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

fn mass_in(samples: &[f64], lo: f64, hi: f64) -> f64 {
    samples.iter().filter(|&&b| b >= lo && b <= hi).count() as f64 / samples.len() as f64
}

/// Bayes factors on the strong-confounding covariance land in the reference
/// interval [0.959, 2.505] (target 1.55) in at least 4 of 5 seeded runs.
#[test]
fn criterion_01_strong_confounding_bayes_factor_within_reference_interval() {
    let stats = strong_confounding_stats();
    let mut bfs = Vec::new();
    for seed in 0..5u64 {
        let options = AnalysisOptions {
            sampler: sampler(1800, 90, seed),
            posterior_draws: 10,
            ..Default::default()
        };
        let analysis = analyze(&stats, &options).unwrap();
        bfs.push(analysis.report.bayes_factor.unwrap().bayes_factor);
    }
    let hits = bfs.iter().filter(|&&b| (0.959..=2.505).contains(&b)).count();
    verdict(
        "criterion 01",
        hits >= 4,
        format!("{hits}/5 Bayes factors in [0.959, 2.505] (target 1.55): {bfs:?}"),
    );
}

/// With the pleiotropy prior forced to the spike (slab weight 0 for the
/// direct effects), the same covariance yields Bayes factors in
/// [59.42, 169.51] (target 100.36) in at least 4 of 5 seeded runs.
#[test]
fn criterion_02_spiked_pleiotropy_prior_bayes_factor_within_reference_interval() {
    let stats = strong_confounding_stats();
    let mut bfs = Vec::new();
    for seed in 0..5u64 {
        let mut options = AnalysisOptions {
            sampler: sampler(1800, 90, seed),
            posterior_draws: 10,
            ..Default::default()
        };
        options.prior.w_alpha = WeightPrior::Fixed(0.0);
        let analysis = analyze(&stats, &options).unwrap();
        bfs.push(analysis.report.bayes_factor.unwrap().bayes_factor);
    }
    let hits = bfs.iter().filter(|&&b| (59.42..=169.51).contains(&b)).count();
    verdict(
        "criterion 02",
        hits >= 4,
        format!("{hits}/5 Bayes factors in [59.42, 169.51] (target 100.36): {bfs:?}"),
    );
}

/// On the weak-confounding covariance the Bayes factor lands in
/// [3.68, 9.47] (target 5.90) and at least half of the forward causal-effect
/// posterior lies in [0.8, 1.2].
#[test]
fn criterion_03_weak_confounding_direction_and_effect_recovery() {
    let stats = weak_confounding_stats();
    let options = AnalysisOptions {
        sampler: sampler(900, 90, 0),
        posterior_draws: 2000,
        ..Default::default()
    };
    let analysis = analyze(&stats, &options).unwrap();
    let bf = analysis.report.bayes_factor.as_ref().unwrap().bayes_factor;
    let beta = &analysis.forward.as_ref().unwrap().beta_samples;
    let mass = mass_in(beta, 0.8, 1.2);
    let ok = (3.68..=9.47).contains(&bf) && mass >= 0.5;
    verdict(
        "criterion 03",
        ok,
        format!("Bayes factor {bf:.3} vs [3.68, 9.47] (target 5.90); effect mass in [0.8, 1.2] = {mass:.3}"),
    );
}

/// Many-variant robustness: with 40% of 25 variants pleiotropy-free the
/// forward effect posterior median stays in [0.8, 1.2]; with none valid the
/// posterior concentrates on the true effect, the null effect, or both.
#[test]
fn criterion_04_pleiotropy_robustness_effect_posterior() {
    let fit = |valid_fraction: f64, data_seed: u64| {
        let mut scenario = simulate::preset("pleiotropy_robustness").unwrap();
        scenario.valid_fraction = Some(valid_fraction);
        scenario.rng_seed = data_seed;
        let (data, _truth) = scenario.generate().unwrap();
        let stats = data_io::stats_from_individual(&data, None).unwrap();
        let options = AnalysisOptions {
            direction: DirectionChoice::Forward,
            sampler: sampler(150, 60, 0),
            posterior_draws: 4000,
            ..Default::default()
        };
        analyze(&stats, &options).unwrap().forward.unwrap().beta_samples
    };

    let beta_mixed = fit(0.4, 0);
    let med = median(&beta_mixed);

    let beta_none = fit(0.0, 0);
    let bimodal_mass = mass_in(&beta_none, 0.8, 1.2) + mass_in(&beta_none, -0.2, 0.2);

    let ok = (0.8..=1.2).contains(&med) && bimodal_mass > 0.8;
    verdict(
        "criterion 04",
        ok,
        format!(
            "valid_fraction 0.4: effect median {med:.4} vs [0.8, 1.2]; \
             valid_fraction 0.0: mass near 1 plus mass near 0 = {bimodal_mass:.3} (> 0.8 required)"
        ),
    );
}

/// Reference table for the two-instrument design: forward Wald estimate and
/// standard error at each cross-effect size delta, plus the model
/// probabilities checked in the fitting part.
const TWO_INSTRUMENT_TABLE: [(f64, f64, f64); 11] = [
    (-0.5, 0.517, 0.0346),
    (-0.4, 0.615, 0.0348),
    (-0.3, 0.712, 0.0350),
    (-0.2, 0.810, 0.0353),
    (-0.1, 0.908, 0.0356),
    (0.0, 1.006, 0.0359),
    (0.1, 1.105, 0.0362),
    (0.2, 1.204, 0.0366),
    (0.3, 1.303, 0.0370),
    (0.4, 1.402, 0.0374),
    (0.5, 1.501, 0.0378),
];

/// Classical baselines on the two-instrument feedback design: population
/// covariances give forward Wald 1+delta and reverse delta/(1+delta) to
/// 1e-12; sampled data tracks the reference forward column within 3 reported
/// standard errors; and the forward model keeps posterior probability > 0.5
/// for small cross effects.
#[test]
fn criterion_05_two_instrument_wald_identities_and_direction_probability() {
    // Exact population covariances.
    let spec = GenotypeSpec::new(vec![0.3, 0.3], 2).unwrap();
    let mut worst_pop = 0.0f64;
    for (delta, _, _) in TWO_INSTRUMENT_TABLE {
        let params = StructuralParams {
            gamma: vec![1.0, delta],
            alpha: vec![delta, 1.0],
            beta: 1.0,
            kappa_x: 1.0,
            kappa_y: 1.0,
            sigma_x: 1.0,
            sigma_y: 1.0,
        };
        let (mean, cov) = sem::marginal_moments(&params, &spec).unwrap();
        let stats = SufficientStats::from_parts(
            mean,
            cov,
            10_000,
            spec.clone(),
            StatsProvenance::new(StatsSource::Covariance),
        )
        .unwrap();
        let table = baselines::bidirectional_table(&stats, &[0], &[1]).unwrap();
        let fwd = table.forward.per_variant[0].estimate;
        let rev = table.reverse.per_variant[0].estimate;
        worst_pop = worst_pop
            .max((fwd - (1.0 + delta)).abs())
            .max((rev - delta / (1.0 + delta)).abs());
    }

    // Sampled data versus the reference forward column.
    let mut worst_z = 0.0f64;
    for (delta, ref_est, ref_se) in TWO_INSTRUMENT_TABLE {
        let mut scenario = simulate::preset("bidirectional").unwrap();
        scenario.delta = Some(delta);
        scenario.rng_seed = 0;
        let (data, _truth) = scenario.generate().unwrap();
        let stats = data_io::stats_from_individual(&data, None).unwrap();
        let table = baselines::bidirectional_table(&stats, &[0], &[1]).unwrap();
        let z = (table.forward.per_variant[0].estimate - ref_est).abs() / ref_se;
        worst_z = worst_z.max(z);
    }

    // Forward-model probability under weak cross effects (reference values
    // 0.894, 0.907 and 0.774 at delta = -0.1, 0, 0.1).
    let mut probs = Vec::new();
    for delta in [-0.1, 0.0, 0.1] {
        let mut scenario = simulate::preset("bidirectional").unwrap();
        scenario.delta = Some(delta);
        scenario.rng_seed = 0;
        let (data, _truth) = scenario.generate().unwrap();
        let stats = data_io::stats_from_individual(&data, None).unwrap();
        let options = AnalysisOptions {
            sampler: sampler(600, 60, 0),
            posterior_draws: 10,
            ..Default::default()
        };
        probs.push(analyze(&stats, &options).unwrap().report.p_forward);
    }

    let ok = worst_pop <= 1e-12 && worst_z <= 3.0 && probs.iter().all(|&p| p > 0.5);
    verdict(
        "criterion 05",
        ok,
        format!(
            "population Wald max error {worst_pop:.2e} (<= 1e-12); sampled forward max |z| \
             {worst_z:.2} (<= 3); forward probabilities {probs:?} (all > 0.5)"
        ),
    );
}

fn gaussian_transform(u: &[f64], out: &mut [f64]) {
    for (o, &v) in out.iter_mut().zip(u) {
        let c = v.clamp(1e-12, 1.0 - 1e-12);
        *o = -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * c);
    }
}

fn gaussian_loglike(theta: &[f64]) -> f64 {
    let d = theta.len() as f64;
    let q: f64 = theta.iter().map(|v| v * v).sum();
    -0.5 * q - 0.5 * d * (2.0 * std::f64::consts::PI).ln()
}

/// Analytic evidence of the standard-normal likelihood under a
/// standard-normal prior: -(d/2)·log(4π).
fn gaussian_log_z(dim: usize) -> f64 {
    -(dim as f64) / 2.0 * (4.0 * std::f64::consts::PI).ln()
}

/// Evidence calibration against a conjugate Gaussian with closed-form
/// evidence: at dimensions 2, 5 and 10 the estimate stays within three
/// reported standard errors in at least 18 of 20 seeded runs, and a
/// constant likelihood integrates to exactly one.
#[test]
fn criterion_06_gaussian_evidence_oracle_and_constant_likelihood() {
    let mut detail = String::new();
    let mut ok = true;
    for dim in [2usize, 5, 10] {
        let mut pass = 0;
        for seed in 0..20u64 {
            let config = SamplerConfig { seed, ..Default::default() };
            let r = nested::run(dim, gaussian_transform, gaussian_loglike, &config).unwrap();
            if (r.log_z - gaussian_log_z(dim)).abs() <= 3.0 * r.log_z_err {
                pass += 1;
            }
        }
        ok &= pass >= 18;
        detail.push_str(&format!("d={dim}: {pass}/20; "));
    }

    let identity = |u: &[f64], out: &mut [f64]| out.copy_from_slice(u);
    let constant =
        nested::run(3, identity, |_| 0.0, &SamplerConfig { n_live: Some(100), ..Default::default() })
            .unwrap();
    ok &= constant.log_z.abs() <= 1e-6;
    detail.push_str(&format!("constant likelihood log Z = {:.2e} (|.| <= 1e-6)", constant.log_z));

    verdict("criterion 06", ok, detail);
}

/// Draws random structural parameters with well-conditioned noise scales.
fn random_params(j: usize, rng: &mut ChaCha12Rng) -> StructuralParams {
    let mut coef = |scale: f64| rng.random_range(-scale..scale);
    StructuralParams {
        gamma: (0..j).map(|_| coef(1.0)).collect(),
        alpha: (0..j).map(|_| coef(1.0)).collect(),
        beta: coef(1.0),
        kappa_x: coef(1.0),
        kappa_y: coef(1.0),
        sigma_x: rng.random_range(0.5..2.0),
        sigma_y: rng.random_range(0.5..2.0),
    }
}

/// Per-row conditional bivariate-normal log-likelihood with the intercepts
/// profiled out (residuals centered), written directly from the structural
/// equations as an independent oracle.
fn per_row_log_likelihood(data: &IndividualData, p: &StructuralParams) -> f64 {
    let n = data.n_rows();
    let j = data.n_variants();
    let mut rx = Vec::with_capacity(n);
    let mut ry = Vec::with_capacity(n);
    for i in 0..n {
        let mut mx = 0.0;
        let mut my = 0.0;
        for k in 0..j {
            let g = f64::from(data.genotype(i, k));
            mx += p.gamma[k] * g;
            my += (p.alpha[k] + p.beta * p.gamma[k]) * g;
        }
        rx.push(data.exposure()[i] - mx);
        ry.push(data.outcome()[i] - my);
    }
    let mrx = rx.iter().sum::<f64>() / n as f64;
    let mry = ry.iter().sum::<f64>() / n as f64;

    // Cov[(X, Y) | G] assembled from the error terms of the two equations.
    let s11 = p.kappa_x * p.kappa_x + p.sigma_x * p.sigma_x;
    let s12 = p.kappa_x * p.kappa_y + p.beta * s11;
    let s22 = p.kappa_y * p.kappa_y
        + p.sigma_y * p.sigma_y
        + 2.0 * p.beta * p.kappa_x * p.kappa_y
        + p.beta * p.beta * s11;
    let det = s11 * s22 - s12 * s12;

    let mut ll = -(n as f64) * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * (n as f64) * det.ln();
    for i in 0..n {
        let ax = rx[i] - mrx;
        let ay = ry[i] - mry;
        ll -= 0.5 * (s22 * ax * ax - 2.0 * s12 * ax * ay + s11 * ay * ay) / det;
    }
    ll
}

/// The sufficient-statistic likelihood agrees with a per-row bivariate
/// normal evaluation: across 100 random (θ₁, θ₂, dataset) triples at N = 50
/// the log-likelihood differences match within 1e-8.
#[test]
fn criterion_07_sufficient_statistic_likelihood_matches_per_row_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let j = 1 + (trial as usize) % 3;
        let scenario = Scenario {
            kind: ScenarioKind::Custom,
            n_variants: j,
            n_samples: 50,
            allele_copies: 2,
            eaf: EafSource::Uniform { uniform: (0.2, 0.8) },
            gamma: CoefSource::Gaussian { gaussian_sd: 0.6 },
            alpha: CoefSource::Gaussian { gaussian_sd: 0.4 },
            beta: CoefSource::Gaussian { gaussian_sd: 0.7 },
            kappa_x: CoefSource::Gaussian { gaussian_sd: 0.8 },
            kappa_y: CoefSource::Gaussian { gaussian_sd: 0.8 },
            sigma_x: CoefSource::Fixed(0.8),
            sigma_y: CoefSource::Fixed(1.3),
            valid_fraction: None,
            delta: None,
            tanh_scale: None,
            t_dof: None,
            rng_seed: 1000 + trial,
        };
        let (data, _truth) = scenario.generate().unwrap();
        let stats = data_io::stats_from_individual(&data, None).unwrap();

        let theta1 = random_params(j, &mut rng);
        let theta2 = random_params(j, &mut rng);
        let d_stats = sem::log_likelihood(&theta1, &stats).unwrap()
            - sem::log_likelihood(&theta2, &stats).unwrap();
        let d_oracle =
            per_row_log_likelihood(&data, &theta1) - per_row_log_likelihood(&data, &theta2);
        worst = worst.max((d_stats - d_oracle).abs());
    }
    verdict(
        "criterion 07",
        worst <= 1e-8,
        format!("max |suff-stat difference - per-row difference| = {worst:.2e} (<= 1e-8)"),
    );
}

/// Summary-statistic roundtrip: simulating 8 variants at N = 10000,
/// summarizing to per-variant regressions, and reconstructing the
/// sufficient statistics reproduces every covariance entry within 2%
/// (5% for Var(Y)) of the direct sample covariance, on the scale of the
/// entries' geometric mean of variances.
#[test]
fn criterion_08_summary_roundtrip_reconstructs_sample_covariance() {
    let scenario = Scenario {
        kind: ScenarioKind::Custom,
        n_variants: 8,
        n_samples: 10_000,
        allele_copies: 2,
        eaf: EafSource::Uniform { uniform: (0.1, 0.9) },
        gamma: CoefSource::Gaussian { gaussian_sd: 0.3 },
        alpha: CoefSource::Gaussian { gaussian_sd: 0.1 },
        beta: CoefSource::Fixed(1.0),
        kappa_x: CoefSource::Fixed(1.0),
        kappa_y: CoefSource::Fixed(1.0),
        sigma_x: CoefSource::Fixed(1.0),
        sigma_y: CoefSource::Fixed(1.0),
        valid_fraction: None,
        delta: None,
        tanh_scale: None,
        t_dof: None,
        rng_seed: 6,
    };
    let (data, _truth) = scenario.generate().unwrap();
    let direct = data_io::stats_from_individual(&data, None).unwrap();
    let summary = data_io::summarize_individual(&data).unwrap();
    let recon = data_io::stats_from_summary(&summary).unwrap();

    let d = direct.cov();
    let r = recon.cov();
    let dim = data.n_variants() + 2;
    let y = dim - 1;
    let mut worst = 0.0f64;
    for row in 0..dim {
        for col in 0..dim {
            let tol = if row == y && col == y { 0.05 } else { 0.02 };
            let scale = (d[(row, row)] * d[(col, col)]).sqrt();
            worst = worst.max((d[(row, col)] - r[(row, col)]).abs() / (tol * scale));
        }
    }
    verdict(
        "criterion 08",
        worst <= 1.0,
        format!("worst entry error at {:.3} of its tolerance (<= 1)", worst),
    );
}

/// Rescaling the exposure by 10 leaves the Bayes factor unchanged within
/// three combined evidence errors on matched seeds and divides the effect
/// posterior median by 10 within 10%.
#[test]
fn criterion_09_exposure_rescaling_invariance() {
    let stats = strong_confounding_stats();
    let scaled = {
        let mut mean = stats.mean().clone();
        let mut cov = stats.cov().clone();
        let x = 1;
        mean[x] *= 10.0;
        for k in 0..3 {
            cov[(x, k)] *= 10.0;
            cov[(k, x)] *= 10.0;
        }
        SufficientStats::from_parts(
            mean,
            cov,
            stats.n_obs(),
            stats.genotype_spec().clone(),
            StatsProvenance::new(StatsSource::Covariance),
        )
        .unwrap()
    };

    let options = AnalysisOptions {
        sampler: sampler(600, 60, 1),
        posterior_draws: 2000,
        ..Default::default()
    };
    let reference = analyze(&stats, &options).unwrap();
    let rescaled = analyze(&scaled, &options).unwrap();

    let lbf_ref = reference.report.bayes_factor.as_ref().unwrap().log_bayes_factor;
    let lbf_scl = rescaled.report.bayes_factor.as_ref().unwrap().log_bayes_factor;
    let combined_err = reference
        .report
        .directions
        .iter()
        .chain(&rescaled.report.directions)
        .map(|d| d.log_z_err * d.log_z_err)
        .sum::<f64>()
        .sqrt();
    let bf_shift = (lbf_scl - lbf_ref).abs();

    let med_ref = median(&reference.forward.as_ref().unwrap().beta_samples);
    let med_scl = median(&rescaled.forward.as_ref().unwrap().beta_samples);
    let ratio = med_scl * 10.0 / med_ref;

    let ok = bf_shift < 3.0 * combined_err && (ratio - 1.0).abs() <= 0.1;
    verdict(
        "criterion 09",
        ok,
        format!(
            "log Bayes-factor shift {bf_shift:.4} (< {:.4}); effect median ratio x10 = \
             {ratio:.4} (within 10% of 1)",
            3.0 * combined_err
        ),
    );
}

/// Robustness to model misspecification on the weakly confounded generator:
/// with a saturated causal term (scale 8) or heavy-tailed outcome noise
/// (8 degrees of freedom), the effect posterior median stays in [0.9, 1.1]
/// and the forward model keeps probability > 0.7.
#[test]
fn criterion_10_nonlinearity_and_heavy_tail_robustness() {
    let mut detail = String::new();
    let mut ok = true;
    for preset_name in ["nonlinear_tanh", "t_noise"] {
        let mut scenario = simulate::preset(preset_name).unwrap();
        scenario.rng_seed = 0;
        let (data, _truth) = scenario.generate().unwrap();
        let stats = data_io::stats_from_individual(&data, None).unwrap();
        let options = AnalysisOptions {
            sampler: sampler(600, 60, 0),
            posterior_draws: 2000,
            ..Default::default()
        };
        let analysis = analyze(&stats, &options).unwrap();
        let med = median(&analysis.forward.as_ref().unwrap().beta_samples);
        let p_forward = analysis.report.p_forward;
        ok &= (0.9..=1.1).contains(&med) && p_forward > 0.7;
        detail.push_str(&format!(
            "{preset_name}: effect median {med:.4} (in [0.9, 1.1]), p(forward) {p_forward:.3} (> 0.7); "
        ));
    }
    verdict("criterion 10", ok, detail);
}
