//! Nested-sampling evidence engine (Skilling 2006) with slice-sampled
//! likelihood-constrained replacement in the unit cube.
//!
//! The engine maintains `n_live` live points drawn from the prior through a
//! caller-supplied unit-cube transform. Each iteration removes the worst
//! live point as a dead sample, credits it the deterministic prior-volume
//! shell
//!
//! ```text
//! log ΔX_k = log X_{k−1} + log(1 − e^{−1/n_live})
//! ```
//!
//! (`E[log t] = −1/n_live` shrinkage), and replaces it with a point sampled
//! from the prior subject to a strict likelihood constraint by slice
//! sampling, starting from a randomly chosen surviving live point. Slice
//! directions are drawn from the live set's empirical covariance (a
//! periodically refreshed Cholesky factor applied to an isotropic Gaussian
//! draw), so proposal scales track the anisotropy of the constrained region
//! as it contracts. Proposals outside the cube shrink the bracket without a
//! likelihood evaluation; in-cube proposals at or below the threshold
//! shrink it toward the current point.
//!
//! Likelihood plateaus (several live points with exactly equal likelihood,
//! in particular `−∞` regions) break the distinct-order-statistics
//! assumption behind the `e^{−1/n}` shrinkage, so tied minima are removed
//! as a group: `m` tied points shrink the volume by the plug-in factor
//! `(n − m)/n` and share the removed shell equally. When the entire live
//! set is tied the constrained prior has been reduced to one plateau and the
//! run folds it into the evidence directly.
//!
//! The run terminates when the largest live likelihood times the remaining
//! prior volume could change the accumulated evidence by less than
//! `termination_frac`, i.e. `max log L + log X_k < log(frac · Z)`. The
//! remaining volume is then distributed evenly over the live points, which
//! enter the sample list as a final batch. The evidence uncertainty is the
//! standard information-based estimate `sqrt(H / n_live)`.

use nalgebra::{Cholesky, DMatrix};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiplier giving the default live-point count `25 · dim`.
pub const DEFAULT_N_LIVE_PER_DIM: usize = 25;

/// Multiplier giving the default slice updates per replacement `5 · dim`.
pub const DEFAULT_SLICE_STEPS_PER_DIM: usize = 5;

/// Default evidence-increment termination fraction.
pub const DEFAULT_TERMINATION_FRAC: f64 = 1e-3;

/// Nested-sampler configuration. Live-point and slice-step counts default
/// to multiples of the problem dimension when left unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerConfig {
    /// Number of live points; `None` resolves to `25 · dim`.
    pub n_live: Option<usize>,
    /// Slice-direction updates per replacement; `None` resolves to `5 · dim`.
    pub slice_steps: Option<usize>,
    /// Termination threshold on the relative remaining evidence.
    pub termination_frac: f64,
    /// Hard iteration cap; exceeding it is a non-convergence error.
    pub max_iterations: usize,
    /// RNG seed; equal seeds and configs reproduce runs bit for bit.
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_live: None,
            slice_steps: None,
            termination_frac: DEFAULT_TERMINATION_FRAC,
            max_iterations: 1_000_000,
            seed: 0,
        }
    }
}

/// Configuration with dimension-dependent defaults filled in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSamplerConfig {
    /// Problem dimension.
    pub dim: usize,
    /// Number of live points.
    pub n_live: usize,
    /// Slice-direction updates per replacement.
    pub slice_steps: usize,
    /// Termination threshold on the relative remaining evidence.
    pub termination_frac: f64,
    /// Hard iteration cap.
    pub max_iterations: usize,
    /// RNG seed.
    pub seed: u64,
}

impl SamplerConfig {
    /// Resolves defaults for a `dim`-dimensional problem and validates.
    pub fn resolve(&self, dim: usize) -> Result<ResolvedSamplerConfig> {
        if dim == 0 {
            return Err(Error::InvalidParameter("sampler dimension must be >= 1".into()));
        }
        let n_live = self.n_live.unwrap_or(DEFAULT_N_LIVE_PER_DIM * dim);
        let slice_steps = self.slice_steps.unwrap_or(DEFAULT_SLICE_STEPS_PER_DIM * dim);
        if n_live < 2 * dim {
            return Err(Error::InvalidParameter(format!(
                "n_live must be >= 2·dim = {}, got {n_live}",
                2 * dim
            )));
        }
        if slice_steps == 0 {
            return Err(Error::InvalidParameter("slice_steps must be >= 1".into()));
        }
        if !self.termination_frac.is_finite()
            || self.termination_frac <= 0.0
            || self.termination_frac >= 1.0
        {
            return Err(Error::InvalidParameter(format!(
                "termination_frac must lie in (0, 1), got {}",
                self.termination_frac
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        Ok(ResolvedSamplerConfig {
            dim,
            n_live,
            slice_steps,
            termination_frac: self.termination_frac,
            max_iterations: self.max_iterations,
            seed: self.seed,
        })
    }
}

/// One weighted posterior sample produced by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    /// Transformed parameter vector.
    pub point: Vec<f64>,
    /// Log-likelihood at the point.
    pub log_like: f64,
    /// Normalized importance weight; the weights of a run sum to one.
    pub weight: f64,
    /// Log prior-volume estimate at the point's removal.
    pub log_volume: f64,
    /// Iteration at which the point was recorded (live-fold points continue
    /// the count past the last removal).
    pub iteration: usize,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// The evidence increment dropped below the configured fraction.
    Converged,
    /// The iteration cap was reached first; the result is partial.
    MaxIterations,
}

/// Evidence estimate with weighted posterior samples and run diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceResult {
    /// Log evidence estimate.
    pub log_z: f64,
    /// Information-based standard error `sqrt(H / n_live)`.
    pub log_z_err: f64,
    /// Information (KL divergence from prior to posterior) in nats.
    pub information: f64,
    /// Dead points in removal order followed by the folded live points in
    /// increasing likelihood order.
    pub samples: Vec<WeightedSample>,
    /// Number of dead-point iterations.
    pub iterations: usize,
    /// Total likelihood evaluations, including rejected slice proposals.
    pub n_like_evals: u64,
    /// How the run ended.
    pub terminated: TerminationReason,
    /// Configuration the run actually used.
    pub config: ResolvedSamplerConfig,
}

fn logsumexp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

struct LivePoint {
    u: Vec<f64>,
    log_like: f64,
}

/// Lower-triangular Cholesky factor (row-major, dense) of the live set's
/// empirical covariance, used to scale slice directions. Falls back to a
/// floored diagonal of per-coordinate standard deviations when the
/// covariance is numerically singular.
fn live_scale_factor(live: &[LivePoint], dim: usize) -> Vec<f64> {
    let n = live.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in live {
        for (m, &u) in mean.iter_mut().zip(&p.u) {
            *m += u;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for p in live {
        for r in 0..dim {
            let dr = p.u[r] - mean[r];
            for c in 0..=r {
                cov[(r, c)] += dr * (p.u[c] - mean[c]);
            }
        }
    }
    for r in 0..dim {
        for c in 0..=r {
            let v = cov[(r, c)] / n;
            cov[(r, c)] = v;
            cov[(c, r)] = v;
        }
        cov[(r, r)] += 1e-12;
    }
    match Cholesky::new(cov.clone()) {
        Some(ch) => {
            let l = ch.l();
            let mut flat = vec![0.0; dim * dim];
            for r in 0..dim {
                for c in 0..=r {
                    flat[r * dim + c] = l[(r, c)];
                }
            }
            flat
        }
        None => {
            let mut flat = vec![0.0; dim * dim];
            for r in 0..dim {
                flat[r * dim + r] = cov[(r, r)].sqrt().max(1e-6);
            }
            flat
        }
    }
}

/// Runs nested sampling. `transform` maps a unit-cube point into an
/// equal-length parameter buffer; `log_like` evaluates the log-likelihood of
/// a transformed point. A NaN likelihood is a hard error; reaching the
/// iteration cap yields a result flagged [`TerminationReason::MaxIterations`].
pub fn run(
    dim: usize,
    transform: impl Fn(&[f64], &mut [f64]),
    log_like: impl Fn(&[f64]) -> f64,
    config: &SamplerConfig,
) -> Result<EvidenceResult> {
    let cfg = config.resolve(dim)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_live;
    let nf = n as f64;
    let mut n_evals: u64 = 0;
    let mut theta = vec![0.0; dim];

    let eval = |u: &[f64], theta: &mut [f64], n_evals: &mut u64| -> Result<f64> {
        transform(u, theta);
        let ll = log_like(theta);
        *n_evals += 1;
        if ll.is_nan() {
            return Err(Error::LikelihoodNaN { point: theta.to_vec() });
        }
        Ok(ll)
    };

    let mut live: Vec<LivePoint> = Vec::with_capacity(n);
    for _ in 0..n {
        let u: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
        let ll = eval(&u, &mut theta, &mut n_evals)?;
        live.push(LivePoint { u, log_like: ll });
    }

    // log(1 − e^{−1/n}), the shell fraction of a single-point removal.
    let log_shell = (-(-1.0 / nf).exp()).ln_1p();
    let mut log_z = f64::NEG_INFINITY;
    let mut log_x = 0.0;
    let mut samples: Vec<WeightedSample> = Vec::new();
    let mut dir = vec![0.0; dim];
    let mut iso = vec![0.0; dim];
    let mut proposal = vec![0.0; dim];
    let mut k = 0usize;
    // Slice brackets are expressed in whitened units: direction vectors
    // carry the live set's covariance scale, so ±SLICE_BRACKET standard
    // deviations cover the constrained region from any interior start.
    const SLICE_BRACKET: f64 = 3.0;
    let scale_refresh = (n / 10).max(1);
    let mut scale = live_scale_factor(&live, dim);
    let mut scale_age = 0usize;

    let terminated = loop {
        let worst = live
            .iter()
            .map(|p| p.log_like)
            .fold(f64::INFINITY, f64::min);
        let ties = live.iter().filter(|p| p.log_like == worst).count();
        if ties == live.len() {
            break TerminationReason::Converged;
        }
        if k >= cfg.max_iterations {
            break TerminationReason::MaxIterations;
        }

        // Remove every point tied at the minimum as one group of size m:
        // a single point shrinks the volume by e^{−1/n}, a plateau group by
        // the plug-in factor (n − m)/n; the group shares the shell equally.
        let m = ties;
        let (log_x_new, log_dx) = if m == 1 {
            (log_x - 1.0 / nf, log_x + log_shell)
        } else {
            (
                log_x + ((n - m) as f64 / nf).ln(),
                log_x + (m as f64 / nf).ln(),
            )
        };
        log_z = logsumexp2(log_z, worst + log_dx);
        let mut removed = 0;
        let mut idx = 0;
        while idx < live.len() {
            if live[idx].log_like == worst {
                let p = live.remove(idx);
                removed += 1;
                k += 1;
                transform(&p.u, &mut theta);
                samples.push(WeightedSample {
                    point: theta.clone(),
                    log_like: worst,
                    weight: worst + log_dx - (m as f64).ln(),
                    log_volume: log_x_new,
                    iteration: k,
                });
            } else {
                idx += 1;
            }
        }
        debug_assert_eq!(removed, m);
        log_x = log_x_new;

        let log_l_max = live
            .iter()
            .map(|p| p.log_like)
            .fold(f64::NEG_INFINITY, f64::max);
        if log_l_max > f64::NEG_INFINITY
            && log_z > f64::NEG_INFINITY
            && log_l_max + log_x <= cfg.termination_frac.ln() + log_z
        {
            break TerminationReason::Converged;
        }

        // Refill the removed slots: slice-sample above the strict threshold,
        // starting from a randomly chosen current live point.
        scale_age += m;
        if scale_age >= scale_refresh {
            scale = live_scale_factor(&live, dim);
            scale_age = 0;
        }
        for _ in 0..m {
            let start = rng.random_range(0..live.len());
            let mut u = live[start].u.clone();
            let mut cur_ll = live[start].log_like;
            for _ in 0..cfg.slice_steps {
                for v in iso.iter_mut() {
                    *v = rng.sample(rand_distr::StandardNormal);
                }
                for (r, d) in dir.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for (c, &v) in iso.iter().enumerate().take(r + 1) {
                        s += scale[r * dim + c] * v;
                    }
                    *d = s;
                }
                let mut t_lo = -SLICE_BRACKET;
                let mut t_hi = SLICE_BRACKET;
                loop {
                    let t = rng.random_range(t_lo..t_hi);
                    let mut inside = true;
                    for i in 0..dim {
                        let v = u[i] + t * dir[i];
                        proposal[i] = v;
                        if !(0.0..=1.0).contains(&v) {
                            inside = false;
                            break;
                        }
                    }
                    if inside {
                        let ll = eval(&proposal, &mut theta, &mut n_evals)?;
                        if ll > worst {
                            u.copy_from_slice(&proposal);
                            cur_ll = ll;
                            break;
                        }
                    }
                    if t < 0.0 {
                        t_lo = t;
                    } else {
                        t_hi = t;
                    }
                    if t_hi - t_lo < 1e-14 {
                        break;
                    }
                }
            }
            live.push(LivePoint { u, log_like: cur_ll });
        }
    };

    // Fold the remaining live points: each carries an equal share of the
    // remaining volume, entered in increasing likelihood order.
    let log_x_share = log_x - (live.len() as f64).ln();
    live.sort_by(|a, b| a.log_like.partial_cmp(&b.log_like).unwrap());
    let n_fold = live.len();
    for (i, p) in live.iter().enumerate() {
        let lw = p.log_like + log_x_share;
        log_z = logsumexp2(log_z, lw);
        transform(&p.u, &mut theta);
        samples.push(WeightedSample {
            point: theta.clone(),
            log_like: p.log_like,
            weight: lw,
            log_volume: log_x + ((n_fold - i) as f64 / n_fold as f64).ln(),
            iteration: k + i + 1,
        });
    }

    // Normalize weights and accumulate the information integral.
    let mut information = 0.0;
    for s in samples.iter_mut() {
        if s.weight == f64::NEG_INFINITY || log_z == f64::NEG_INFINITY {
            s.weight = 0.0;
            continue;
        }
        let w = (s.weight - log_z).exp();
        s.weight = w;
        if w > 0.0 {
            information += w * (s.log_like - log_z);
        }
    }
    let information = information.max(0.0);

    Ok(EvidenceResult {
        log_z,
        log_z_err: (information / nf).sqrt(),
        information,
        samples,
        iterations: k,
        n_like_evals: n_evals,
        terminated,
        config: cfg,
    })
}

/// Draws `count` equally weighted points from a run's weighted samples by
/// multinomial resampling. Errors if the weights do not form a distribution.
pub fn equal_weight_resample(
    result: &EvidenceResult,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let total: f64 = result.samples.iter().map(|s| s.weight).sum();
    if result.samples.is_empty() || !(total > 0.0) {
        return Err(Error::InvalidInput(
            "cannot resample: no samples with positive weight".into(),
        ));
    }
    let mut cumulative = Vec::with_capacity(result.samples.len());
    let mut acc = 0.0;
    for s in &result.samples {
        acc += s.weight;
        cumulative.push(acc);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        let target = rng.random::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c < target).min(result.samples.len() - 1);
        draws.push(result.samples[idx].point.clone());
    }
    Ok(draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn identity(u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(u);
    }

    /// Unit-cube transform to independent standard normals.
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
    /// standard-normal prior: −(d/2)·log(4π).
    fn gaussian_log_z(dim: usize) -> f64 {
        -(dim as f64) / 2.0 * (4.0 * std::f64::consts::PI).ln()
    }

    #[test]
    fn constant_likelihood_recovers_value_exactly() {
        let config = SamplerConfig { n_live: Some(50), seed: 1, ..Default::default() };
        let result = run(3, identity, |_| 5.0, &config).unwrap();
        assert_relative_eq!(result.log_z, 5.0, epsilon = 1e-9);
        assert!(result.log_z_err.abs() < 1e-6);
        let total: f64 = result.samples.iter().map(|s| s.weight).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig { n_live: Some(1), ..Default::default() }.resolve(2).is_err());
        assert!(SamplerConfig { termination_frac: 0.0, ..Default::default() }.resolve(2).is_err());
        assert!(SamplerConfig { termination_frac: 1.0, ..Default::default() }.resolve(2).is_err());
        assert!(SamplerConfig { slice_steps: Some(0), ..Default::default() }.resolve(2).is_err());
        assert!(SamplerConfig::default().resolve(0).is_err());
        let cfg = SamplerConfig::default().resolve(4).unwrap();
        assert_eq!(cfg.n_live, 100);
        assert_eq!(cfg.slice_steps, 20);
        assert_eq!(cfg.termination_frac, 1e-3);
    }

    #[test]
    fn gaussian_evidence_within_three_sigma() {
        for dim in [2usize, 5] {
            let config = SamplerConfig { seed: 7, ..Default::default() };
            let result = run(dim, gaussian_transform, gaussian_loglike, &config).unwrap();
            let err = (result.log_z - gaussian_log_z(dim)).abs();
            assert!(
                err <= 3.0 * result.log_z_err,
                "dim {dim}: |{} - {}| > 3·{}",
                result.log_z,
                gaussian_log_z(dim),
                result.log_z_err
            );
            assert!(result.log_z_err > 0.0);
            assert!(result.information > 0.0);
        }
    }

    #[test]
    fn subcube_indicator_recovers_log_volume() {
        // Likelihood 1 on [0, 0.2] × [0, 1], −∞ elsewhere.
        let loglike = |theta: &[f64]| if theta[0] <= 0.2 { 0.0 } else { f64::NEG_INFINITY };
        let config = SamplerConfig { n_live: Some(100), seed: 3, ..Default::default() };
        let result = run(2, identity, loglike, &config).unwrap();
        let expected = 0.2f64.ln();
        assert!(
            (result.log_z - expected).abs() <= 3.0 * result.log_z_err.max(0.05),
            "log_z {} vs {expected}",
            result.log_z
        );
    }

    #[test]
    fn dead_points_have_nondecreasing_likelihood_and_valid_weights() {
        let config = SamplerConfig { seed: 11, ..Default::default() };
        let result = run(3, gaussian_transform, gaussian_loglike, &config).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for s in &result.samples[..result.iterations] {
            assert!(s.log_like >= prev);
            prev = s.log_like;
        }
        assert!(result.samples.iter().all(|s| s.weight >= 0.0));
        let total: f64 = result.samples.iter().map(|s| s.weight).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
        assert!(result.samples.len() > result.iterations);
        // Trace volumes shrink monotonically over the dead sequence.
        for pair in result.samples[..result.iterations].windows(2) {
            assert!(pair[1].log_volume < pair[0].log_volume);
        }
    }

    #[test]
    fn identical_seeds_reproduce_runs_exactly() {
        let config = SamplerConfig { seed: 42, ..Default::default() };
        let a = run(2, gaussian_transform, gaussian_loglike, &config).unwrap();
        let b = run(2, gaussian_transform, gaussian_loglike, &config).unwrap();
        assert_eq!(a.log_z, b.log_z);
        assert_eq!(a.n_like_evals, b.n_like_evals);
        assert_eq!(a.samples, b.samples);
        let c = run(
            2,
            gaussian_transform,
            gaussian_loglike,
            &SamplerConfig { seed: 43, ..Default::default() },
        )
        .unwrap();
        assert_ne!(a.log_z, c.log_z);
    }

    #[test]
    fn doubling_live_points_tightens_gaussian_evidence() {
        let analytic = gaussian_log_z(2);
        let med = |n_live: usize| {
            let mut errs: Vec<f64> = (0..20)
                .map(|seed| {
                    let config = SamplerConfig {
                        n_live: Some(n_live),
                        seed: 1000 + seed,
                        ..Default::default()
                    };
                    let r = run(2, gaussian_transform, gaussian_loglike, &config).unwrap();
                    (r.log_z - analytic).abs()
                })
                .collect();
            errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            0.5 * (errs[9] + errs[10])
        };
        assert!(med(100) < med(25));
    }

    #[test]
    fn nan_likelihood_is_an_error() {
        let config = SamplerConfig { seed: 5, ..Default::default() };
        let err = run(2, identity, |t| if t[0] > 0.5 { f64::NAN } else { 0.0 }, &config);
        assert!(matches!(err, Err(Error::LikelihoodNaN { .. })));
    }

    #[test]
    fn iteration_cap_flags_result_as_nonconverged() {
        let config = SamplerConfig { max_iterations: 5, seed: 2, ..Default::default() };
        let result = run(2, gaussian_transform, gaussian_loglike, &config).unwrap();
        assert_eq!(result.terminated, TerminationReason::MaxIterations);
        assert_eq!(result.iterations, 5);
        let total: f64 = result.samples.iter().map(|s| s.weight).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn resampling_respects_weights() {
        let config = SamplerConfig { seed: 9, ..Default::default() };
        let result = run(2, gaussian_transform, gaussian_loglike, &config).unwrap();
        let draws = equal_weight_resample(&result, 4000, 1).unwrap();
        assert_eq!(draws.len(), 4000);
        // The resampled first coordinate should match the weighted posterior
        // mean (zero) within Monte Carlo error.
        let mean: f64 = draws.iter().map(|p| p[0]).sum::<f64>() / 4000.0;
        assert!(mean.abs() < 0.1, "resampled mean {mean}");
        assert!(equal_weight_resample(&result, 0, 1).unwrap().is_empty());
    }
}
