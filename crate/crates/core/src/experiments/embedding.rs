use super::{binomial_slack, frequency, map_trials, params, ExperimentSummary, Stopwatch, TrialPlan};
use crate::bounds::{embedding_lower, embedding_upper, required_samples_thm31};
use crate::error::{Error, Result};
use crate::linalg::{random_orthonormal, random_orthonormal_with, singular_values};
use crate::seeding::{self, purpose};
use crate::srht::draw_srht_with;

/// Embedding experiment: fixed orthonormal `V`, a fresh SRHT per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingConfig {
    pub n: usize,
    pub k: usize,
    /// Defaults to the standard sample size for `(k, n)`.
    pub ell: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Draw a new `V` in every trial instead of fixing one.
    pub fresh_v: bool,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            n: 65_536,
            k: 16,
            ell: None,
            trials: 200,
            seed: 0,
            fresh_v: false,
        }
    }
}

struct Trial {
    violated: bool,
    sigma_min: f64,
    sigma_max: f64,
}

/// Fraction of trials where `σ_k(ΦV) < 1/√6` or `σ₁(ΦV) > √(13/6)`,
/// compared with the failure probability `3/k`.
pub fn run_embedding_trials(cfg: &EmbeddingConfig) -> Result<ExperimentSummary> {
    let clock = Stopwatch::start();
    let ell = cfg.ell.unwrap_or_else(|| required_samples_thm31(cfg.k, cfg.n).ell);
    if ell == 0 || ell > cfg.n {
        return Err(Error::SampleCountOutOfRange { ell, n: cfg.n });
    }
    if cfg.k > ell {
        return Err(Error::invalid("k", format!("k = {} exceeds ell = {ell}", cfg.k)));
    }
    let plan = TrialPlan::monte_carlo(cfg.n, cfg.k, ell, cfg.trials, cfg.seed)?;
    let fixed_v = random_orthonormal(cfg.n, cfg.k, seeding::derive_seed(cfg.seed, purpose::TEST_MATRIX))?;
    let (lower, upper) = (embedding_lower(), embedding_upper());

    let records = map_trials(cfg.trials, |t| {
        let mut rng = seeding::rng_from_seed(seeding::trial_seed(cfg.seed, t));
        let fresh;
        let v = if cfg.fresh_v {
            fresh = random_orthonormal_with(cfg.n, cfg.k, &mut rng)?;
            &fresh
        } else {
            &fixed_v
        };
        let phi = draw_srht_with(cfg.n, ell, &mut rng)?;
        let sv = singular_values(&phi.apply_to_matrix(v.matrix())?)?;
        let (sigma_min, sigma_max) = (sv.smallest(), sv.largest());
        Ok(Trial {
            violated: sigma_min < lower || sigma_max > upper,
            sigma_min,
            sigma_max,
        })
    })?;

    let empirical = frequency(records.iter().map(|r| r.violated), cfg.trials);
    let bound = 3.0 / cfg.k as f64;
    let slack = binomial_slack(bound, cfg.trials);
    Ok(ExperimentSummary {
        name: "embedding".into(),
        plan,
        empirical,
        bound,
        extreme_sigma_min: records.iter().map(|r| r.sigma_min).fold(f64::INFINITY, f64::min),
        extreme_sigma_max: records.iter().map(|r| r.sigma_max).fold(f64::NEG_INFINITY, f64::max),
        passed: empirical <= bound.min(1.0) + slack,
        elapsed_seconds: clock.seconds(),
        parameters: params([
            ("window_lower", lower),
            ("window_upper", upper),
            ("slack", slack),
            ("fresh_v", f64::from(u8::from(cfg.fresh_v))),
        ]),
    })
}
