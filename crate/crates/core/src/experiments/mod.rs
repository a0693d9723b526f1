//! Monte Carlo and exhaustive validation of the SRHT bounds.
//!
//! Each `run_*` function draws its randomness from per-trial substreams of a
//! master seed (see [`crate::seeding`]), runs the trials in parallel, and
//! reduces the per-trial records in trial order. The resulting
//! [`ExperimentSummary`] numbers depend only on the plan, never on the thread
//! count.
//!
//! Monte Carlo verdicts use one rule: an empirical frequency passes when it is
//! at most `b + 4·√(b(1−b)/trials)`, with `b` the analytic bound capped at 1.

mod chernoff;
mod coupon;
mod embedding;
mod flatten;
mod mgf;
mod report;
mod rownorm;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial_u128;
use crate::error::{Error, Result};

pub use chernoff::{run_chernoff_validation, ChernoffConfig};
pub use coupon::run_coupon_trials;
pub use embedding::{run_embedding_trials, EmbeddingConfig};
pub use flatten::{flattening_threshold, run_flattening_trials, run_flattening_trials_for};
pub use mgf::{run_mgf_domination, MgfConfig};
pub use report::{write_csv, CSV_COLUMNS};
pub use rownorm::run_row_norm_trials;

/// Number of binomial standard deviations allowed above a bound.
pub const SLACK_SIGMAS: f64 = 4.0;

/// Largest number of subsets (or sequences) an exhaustive run may visit.
pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    MonteCarlo,
    Exhaustive,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::MonteCarlo => "monte_carlo",
            Mode::Exhaustive => "exhaustive",
        }
    }
}

/// Dimensions and sampling budget of one experiment. `ell = 0` marks
/// experiments that do not subsample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl TrialPlan {
    pub fn monte_carlo(n: usize, k: usize, ell: usize, trials: usize, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(Self {
            n,
            k,
            ell,
            trials,
            seed,
            mode: Mode::MonteCarlo,
        })
    }

    /// Plan covering all `C(n, ell)` subsets; errors past `cap`.
    pub fn exhaustive(n: usize, k: usize, ell: usize, seed: u64, cap: u128) -> Result<Self> {
        let subsets = binomial_u128(n as u64, ell as u64).unwrap_or(u128::MAX);
        if subsets > cap {
            return Err(Error::CapExceeded { size: subsets, cap });
        }
        Ok(Self {
            n,
            k,
            ell,
            trials: subsets as usize,
            seed,
            mode: Mode::Exhaustive,
        })
    }
}

/// Outcome of one experiment (or one grid point of a sweep).
///
/// `empirical` and `bound` are frequencies for the tail experiments and
/// trace-mgf values for the mgf comparison. The two extremes hold the
/// experiment's natural extreme statistic, e.g. `min σ_k` and `max σ₁` of the
/// sketched matrices, or the smallest and largest per-trial maximum row norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub plan: TrialPlan,
    pub empirical: f64,
    pub bound: f64,
    pub extreme_sigma_min: f64,
    pub extreme_sigma_max: f64,
    pub passed: bool,
    pub elapsed_seconds: f64,
    /// Experiment-specific inputs and derived quantities.
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl ExperimentSummary {
    /// Copy with the wall-clock time zeroed, for byte-stable output.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_seconds: 0.0,
            ..self.clone()
        }
    }
}

/// `4·√(b(1−b)/trials)` with `b` clamped to `[0, 1]`.
pub fn binomial_slack(bound: f64, trials: usize) -> f64 {
    let b = bound.clamp(0.0, 1.0);
    SLACK_SIGMAS * (b * (1.0 - b) / trials as f64).sqrt()
}

/// The shared Monte Carlo verdict: `frequency ≤ min(b, 1) + slack`.
pub fn within_bound(frequency: f64, bound: f64, trials: usize) -> bool {
    frequency <= bound.min(1.0) + binomial_slack(bound, trials)
}

/// Runs `trials` independent trials in parallel and returns their records in
/// trial order.
pub(crate) fn map_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}

pub(crate) struct Stopwatch(Instant);

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self(Instant::now())
    }

    pub(crate) fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

pub(crate) fn params<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

/// Fraction of `flags` that are set.
pub(crate) fn frequency(flags: impl Iterator<Item = bool>, trials: usize) -> f64 {
    flags.filter(|f| *f).count() as f64 / trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_rule() {
        assert_eq!(binomial_slack(0.0, 100), 0.0);
        assert_eq!(binomial_slack(3.0, 100), 0.0);
        let s = binomial_slack(3.0 / 16.0, 200);
        assert!((3.0 / 16.0 + s - 0.298).abs() < 5e-4);
        assert!(within_bound(1.0, 64.0, 10));
        assert!(!within_bound(0.5, 0.1, 10_000));
    }

    #[test]
    fn plans() {
        assert!(TrialPlan::monte_carlo(8, 2, 3, 0, 0).is_err());
        let p = TrialPlan::exhaustive(16, 2, 6, 0, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert_eq!(p.trials, 8008);
        assert!(matches!(
            TrialPlan::exhaustive(64, 2, 32, 0, DEFAULT_EXHAUSTIVE_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn timing_can_be_dropped() {
        let s = ExperimentSummary {
            name: "x".into(),
            plan: TrialPlan::monte_carlo(2, 1, 1, 1, 0).unwrap(),
            empirical: 0.0,
            bound: 1.0,
            extreme_sigma_min: 0.0,
            extreme_sigma_max: 0.0,
            passed: true,
            elapsed_seconds: 1.5,
            parameters: BTreeMap::new(),
        };
        assert_eq!(s.without_timing().elapsed_seconds, 0.0);
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains(r#""mode":"monte_carlo""#));
    }
}
