use super::chernoff::RankOneFamily;
use super::{map_trials, params, ExperimentSummary, Mode, Stopwatch, TrialPlan, DEFAULT_EXHAUSTIVE_CAP, SLACK_SIGMAS};
use crate::combinatorics::{for_each_combination, for_each_multiset, power_u128};
use crate::error::{Error, Result};
use crate::seeding;
use crate::srht::sample_without_replacement;
use rand::Rng;

/// Trace-mgf comparison between sampling without and with replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct MgfConfig {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    pub thetas: Vec<f64>,
    pub seed: u64,
    pub mode: Mode,
    /// Monte Carlo draws per sampling model; ignored in exhaustive mode.
    pub trials: usize,
    pub exhaustive_cap: u128,
}

impl Default for MgfConfig {
    fn default() -> Self {
        Self {
            n: 8,
            k: 2,
            ell: 3,
            thetas: vec![0.5, 1.0, 2.0],
            seed: 0,
            mode: Mode::Exhaustive,
            trials: 10_000,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

/// Relative tolerance of the exhaustive comparison.
pub const MGF_RELATIVE_TOLERANCE: f64 = 1e-10;

/// Weighted spectra: `(weight, eigenvalues)` with weights summing to 1.
type Ensemble = Vec<(f64, Vec<f64>)>;

fn trace_mgf(ensemble: &Ensemble, theta: f64) -> f64 {
    ensemble
        .iter()
        .map(|(w, eig)| w * eig.iter().map(|l| (theta * l).exp()).sum::<f64>())
        .sum()
}

fn mean_and_stderr(ensemble: &Ensemble, theta: f64) -> (f64, f64) {
    let values: Vec<f64> = ensemble
        .iter()
        .map(|(_, eig)| eig.iter().map(|l| (theta * l).exp()).sum::<f64>())
        .collect();
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    (mean, (var / m).sqrt())
}

/// For every `θ`, `E tr exp(θ Σ X_j)` with the `ℓ` matrices drawn without
/// replacement (`empirical`) and with replacement (`bound`) from the rank-one
/// family of a random orthonormal `W`.
///
/// Exhaustive mode averages over every subset and over every multiset with
/// its multinomial weight, and passes when
/// `without ≤ with · (1 + 1e-10)`. Monte Carlo mode draws `trials` samples
/// per model and allows four combined standard errors.
pub fn run_mgf_domination(cfg: &MgfConfig) -> Result<Vec<ExperimentSummary>> {
    let clock = Stopwatch::start();
    if cfg.ell == 0 || cfg.ell > cfg.n {
        return Err(Error::SampleCountOutOfRange { ell: cfg.ell, n: cfg.n });
    }
    let plan = match cfg.mode {
        Mode::Exhaustive => {
            let sequences = power_u128(cfg.n as u64, cfg.ell as u64).unwrap_or(u128::MAX);
            if sequences > cfg.exhaustive_cap {
                return Err(Error::CapExceeded {
                    size: sequences,
                    cap: cfg.exhaustive_cap,
                });
            }
            TrialPlan::exhaustive(cfg.n, cfg.k, cfg.ell, cfg.seed, cfg.exhaustive_cap)?
        }
        Mode::MonteCarlo => TrialPlan::monte_carlo(cfg.n, cfg.k, cfg.ell, cfg.trials, cfg.seed)?,
    };
    let family = RankOneFamily::random(cfg.n, cfg.k, cfg.seed)?;

    let (without, with) = match cfg.mode {
        Mode::Exhaustive => exhaustive_ensembles(&family, cfg.ell)?,
        Mode::MonteCarlo => sampled_ensembles(&family, cfg.ell, cfg.trials, cfg.seed)?,
    };
    let elapsed = clock.seconds();
    let sigma_min = without.iter().map(|e| *e.1.last().unwrap()).fold(f64::INFINITY, f64::min).max(0.0).sqrt();
    let sigma_max = without.iter().map(|e| e.1[0]).fold(0.0, f64::max).sqrt();

    let out = cfg
        .thetas
        .iter()
        .map(|&theta| {
            let (lhs, rhs, passed) = match cfg.mode {
                Mode::Exhaustive => {
                    let (lhs, rhs) = (trace_mgf(&without, theta), trace_mgf(&with, theta));
                    (lhs, rhs, lhs <= rhs * (1.0 + MGF_RELATIVE_TOLERANCE))
                }
                Mode::MonteCarlo => {
                    let (lhs, se_l) = mean_and_stderr(&without, theta);
                    let (rhs, se_r) = mean_and_stderr(&with, theta);
                    (lhs, rhs, lhs <= rhs + SLACK_SIGMAS * se_l.hypot(se_r))
                }
            };
            ExperimentSummary {
                name: format!("mgf[theta={theta}]"),
                plan,
                empirical: lhs,
                bound: rhs,
                extreme_sigma_min: sigma_min,
                extreme_sigma_max: sigma_max,
                passed,
                elapsed_seconds: elapsed,
                parameters: params([
                    ("theta", theta),
                    ("margin", rhs - lhs),
                    ("relative_margin", (rhs - lhs) / rhs),
                ]),
            }
        })
        .collect();
    Ok(out)
}

fn exhaustive_ensembles(family: &RankOneFamily, ell: usize) -> Result<(Ensemble, Ensemble)> {
    let n = family.n();
    let mut failure = None;

    let mut subsets = Vec::new();
    for_each_combination(n, ell, |s| {
        if failure.is_none() {
            match family.sum_eigenvalues(s) {
                Ok(e) => subsets.push(e),
                Err(err) => failure = Some(err),
            }
        }
    });
    let m = subsets.len() as f64;
    let without = subsets.into_iter().map(|e| (1.0 / m, e)).collect();

    let total = power_u128(n as u64, ell as u64).unwrap_or(u128::MAX) as f64;
    let mut with = Vec::new();
    for_each_multiset(n, ell, |s, weight| {
        if failure.is_none() {
            match family.sum_eigenvalues(s) {
                Ok(e) => with.push((weight as f64 / total, e)),
                Err(err) => failure = Some(err),
            }
        }
    });
    match failure {
        Some(err) => Err(err),
        None => Ok((without, with)),
    }
}

fn sampled_ensembles(family: &RankOneFamily, ell: usize, trials: usize, seed: u64) -> Result<(Ensemble, Ensemble)> {
    let n = family.n();
    let w = 1.0 / trials as f64;
    let pairs = map_trials(trials, |t| {
        let mut rng = seeding::rng_from_seed(seeding::trial_seed(seed, t));
        let subset = sample_without_replacement(n, ell, &mut rng)?;
        let sequence: Vec<usize> = (0..ell).map(|_| rng.gen_range(0..n)).collect();
        Ok((
            (w, family.sum_eigenvalues(subset.indices())?),
            (w, family.sum_eigenvalues(&sequence)?),
        ))
    })?;
    Ok(pairs.into_iter().unzip())
}
