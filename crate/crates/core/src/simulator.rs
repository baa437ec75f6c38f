//! Exact stationary Gaussian AR simulation and the Monte Carlo bias oracle.
//!
//! Series start from the exact stationary joint distribution of the first
//! `order` values (no burn-in), so finite-n bias measurements are not
//! contaminated by transients. Replications draw from deterministic
//! substreams: replication `r` seeds its own generator with a SplitMix64 mix
//! of `(master_seed, r)`, so runs are reproducible bit-for-bit regardless of
//! how replications are scheduled across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::EstimatorDef;
use crate::model::{ArModel, MomentContext};

/// Configuration of a Monte Carlo bias experiment.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub model: ArModel,
    /// Series length per replication; must exceed `order + 2`.
    pub n: usize,
    /// Number of replications; must be at least 1.
    pub reps: usize,
    pub estimator: EstimatorDef,
    pub seed: u64,
}

/// Per-coefficient comparison of empirical moments against the expansion
/// engine's order-1/n predictions.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CoeffReport {
    pub index: usize,
    pub truth: f64,
    pub empirical_bias: f64,
    /// Sample variance across replications; `None` with fewer than two
    /// successful replications.
    pub empirical_variance: Option<f64>,
    /// Standard error of the empirical bias; `None` as above.
    pub std_error: Option<f64>,
    /// Predicted bias `b/n` from the expansion engine.
    pub predicted_bias: f64,
    /// Predicted variance `v/n`.
    pub predicted_variance: f64,
    /// `(empirical - predicted) / std_error`.
    pub z_score: Option<f64>,
}

/// Outcome of [`mc_bias`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct McReport {
    pub coeffs: Vec<CoeffReport>,
    pub reps_requested: usize,
    /// Replications whose fit succeeded and entered the averages.
    pub reps_used: usize,
    pub failures: usize,
    pub warnings: Vec<String>,
}

/// A length-`n` stationary Gaussian realization of the model, deterministic
/// in `seed`. `σ² = 0` degenerates to the all-zero series.
pub fn simulate(model: &ArModel, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !model.is_admissible() {
        return Err(Error::Inadmissible(format!("phi = {:?}", model.phi())));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    Ok(simulate_with_rng(model, n, &mut rng))
}

fn simulate_with_rng(model: &ArModel, n: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let mut z = vec![0.0; n];
    let sigma2 = model.sigma2();
    if sigma2 == 0.0 || n == 0 {
        return z;
    }
    let sigma = sigma2.sqrt();
    let phi = model.phi();
    match model.order() {
        1 => {
            let g0 = sigma2 / (1.0 - phi[0] * phi[0]);
            z[0] = g0.sqrt() * rng.sample::<f64, _>(StandardNormal);
            for t in 1..n {
                z[t] = phi[0] * z[t - 1] + sigma * rng.sample::<f64, _>(StandardNormal);
            }
        }
        _ => {
            let rho1 = phi[0] / (1.0 - phi[1]);
            let rho2 = phi[0] * rho1 + phi[1];
            let g0 = sigma2 / (1.0 - phi[0] * rho1 - phi[1] * rho2);
            let g1 = rho1 * g0;
            z[0] = g0.sqrt() * rng.sample::<f64, _>(StandardNormal);
            if n > 1 {
                // z2 | z1 ~ N(rho1 z1, g0 (1 - rho1^2))
                let cond_sd = (g0 - g1 * g1 / g0).sqrt();
                z[1] = (g1 / g0) * z[0] + cond_sd * rng.sample::<f64, _>(StandardNormal);
            }
            for t in 2..n {
                z[t] = phi[0] * z[t - 1]
                    + phi[1] * z[t - 2]
                    + sigma * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
    z
}

/// SplitMix64-style mix of the master seed and a replication counter.
pub(crate) fn substream_seed(master: u64, counter: u64) -> u64 {
    let mut z = master.wrapping_add(counter.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `reps` independent replications of simulate-then-fit and compares
/// the empirical bias and variance of each coefficient with the expansion
/// engine's predictions.
///
/// Failed fits are counted and excluded from the averages; a failure rate
/// above 1% adds a warning. Results are independent of worker scheduling:
/// replication outputs are reduced in replication order.
pub fn mc_bias(config: &McConfig) -> Result<McReport> {
    let order = config.estimator.order;
    if config.reps == 0 {
        return Err(Error::InvalidParameter(
            "at least one replication required".into(),
        ));
    }
    if config.n <= order + 2 {
        return Err(Error::InvalidParameter(format!(
            "series length {} too short for order {order}",
            config.n
        )));
    }
    if config.model.order() != order {
        return Err(Error::InvalidParameter(format!(
            "estimator order {order} does not match model order {}",
            config.model.order()
        )));
    }

    // Predictions first: this also validates admissibility and sigma2 > 0.
    let ctx = MomentContext::new(config.model)?;
    let expansions = config.estimator.expand(&ctx)?;
    let n = config.n;

    let estimates = collect_estimates(&config.model, n, config.reps, config.seed, |series| {
        config.estimator.fit(series)
    });
    summarize(config, &expansions, estimates)
}

/// Simulate-and-fit across replications; one slot per replication, in order.
fn collect_estimates<F>(
    model: &ArModel,
    n: usize,
    reps: usize,
    seed: u64,
    fit: F,
) -> Vec<Result<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha12Rng::seed_from_u64(substream_seed(seed, r as u64));
            let series = simulate_with_rng(model, n, &mut rng);
            fit(&series)
        })
        .collect()
}

fn summarize(
    config: &McConfig,
    expansions: &[crate::expansion::ExpansionResult],
    estimates: Vec<Result<Vec<f64>>>,
) -> Result<McReport> {
    let order = config.estimator.order;
    let n = config.n as f64;
    let reps = config.reps;
    let mut warnings = Vec::new();

    let mut used = 0usize;
    let mut sums = vec![0.0; order];
    for est in estimates.iter().flatten() {
        used += 1;
        for j in 0..order {
            sums[j] += est[j];
        }
    }
    let failures = reps - used;
    if failures > 0 {
        let rate = failures as f64 / reps as f64;
        if rate > 0.01 {
            warnings.push(format!(
                "failure rate {:.2}% exceeds 1% ({failures} of {reps} replications)",
                100.0 * rate
            ));
        }
    }
    if used == 0 {
        return Err(Error::DegenerateInput(
            "every replication failed to fit".into(),
        ));
    }
    let means: Vec<f64> = sums.iter().map(|s| s / used as f64).collect();

    // Second pass for variances, in replication order.
    let mut sq = vec![0.0; order];
    for est in estimates.iter().flatten() {
        for j in 0..order {
            let d = est[j] - means[j];
            sq[j] += d * d;
        }
    }
    if used < 2 {
        warnings.push("fewer than two successful replications: standard errors undefined".into());
    }

    let coeffs = (0..order)
        .map(|j| {
            let truth = config.model.phi()[j];
            let empirical_bias = means[j] - truth;
            let variance = (used >= 2).then(|| sq[j] / (used - 1) as f64);
            let std_error = variance.map(|v| (v / used as f64).sqrt());
            let predicted_bias = expansions[j].bias_coefficient / n;
            let predicted_variance = expansions[j].variance_coefficient / n;
            let z_score = std_error
                .filter(|se| *se > 0.0)
                .map(|se| (empirical_bias - predicted_bias) / se);
            CoeffReport {
                index: j,
                truth,
                empirical_bias,
                empirical_variance: variance,
                std_error,
                predicted_bias,
                predicted_variance,
                z_score,
            }
        })
        .collect();

    Ok(McReport {
        coeffs,
        reps_requested: reps,
        reps_used: used,
        failures,
        warnings,
    })
}
