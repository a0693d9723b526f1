use super::{
    binomial_slack, map_trials, params, ExperimentSummary, Mode, Stopwatch, TrialPlan, DEFAULT_EXHAUSTIVE_CAP,
};
use crate::bounds::{chernoff_lower_tail, chernoff_upper_tail, ChernoffParams};
use crate::combinatorics::for_each_combination;
use crate::error::{Error, Result};
use crate::linalg::{random_orthonormal, symmetric_eigenvalues, DenseMatrix};
use crate::seeding::{self, purpose};
use crate::srht::sample_without_replacement;

/// The family `{w_j w_j* : j = 0..n}` built from the rows of an orthonormal
/// `n × k` matrix `W`.
pub(crate) struct RankOneFamily {
    w: DenseMatrix,
    /// `max_j ‖w_j‖²`, the uniform bound on `λ_max`.
    pub(crate) b: f64,
}

impl RankOneFamily {
    pub(crate) fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        let w = random_orthonormal(n, k, seeding::derive_seed(seed, purpose::TEST_MATRIX))?.into_inner();
        let b = w.row_norms().into_iter().map(|r| r * r).fold(0.0, f64::max);
        Ok(Self { w, b })
    }

    pub(crate) fn n(&self) -> usize {
        self.w.rows()
    }

    pub(crate) fn k(&self) -> usize {
        self.w.cols()
    }

    /// Eigenvalues (descending) of `Σ_{j ∈ picks} w_j w_j*`; repeats allowed.
    pub(crate) fn sum_eigenvalues(&self, picks: &[usize]) -> Result<Vec<f64>> {
        let k = self.k();
        let mut y = DenseMatrix::zeros(k, k);
        for &j in picks {
            let row = self.w.row(j);
            for p in 0..k {
                for q in 0..k {
                    y.set(p, q, y.get(p, q) + row[p] * row[q]);
                }
            }
        }
        symmetric_eigenvalues(&y)
    }
}

/// Matrix Chernoff validation on the rank-one family of a random `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffConfig {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    /// Used as `δ` for the lower tail (values must lie in `[0, 1]`) and as `η`
    /// for the upper tail.
    pub deviations: Vec<f64>,
    pub seed: u64,
    pub mode: Mode,
    /// Monte Carlo sample count; ignored in exhaustive mode.
    pub trials: usize,
    pub exhaustive_cap: u128,
}

impl Default for ChernoffConfig {
    fn default() -> Self {
        Self {
            n: 16,
            k: 2,
            ell: 6,
            deviations: (1..=9).map(|i| i as f64 / 10.0).collect(),
            seed: 0,
            mode: Mode::Exhaustive,
            trials: 10_000,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

/// For each deviation, the probability that `λ_min(Y) ≤ (1−δ)ℓ/n` and that
/// `λ_max(Y) ≥ (1+η)ℓ/n`, where `Y` sums `ℓ` members of the family drawn
/// without replacement, set against the Chernoff bounds with
/// `μ_min = μ_max = ℓ/n` and `B = max_j ‖w_j‖²`.
///
/// Returns the lower-tail summaries followed by the upper-tail summaries. The
/// extremes are `√(min λ_min)` and `√(max λ_max)` over all samples.
pub fn run_chernoff_validation(cfg: &ChernoffConfig) -> Result<Vec<ExperimentSummary>> {
    let clock = Stopwatch::start();
    if cfg.ell == 0 || cfg.ell > cfg.n {
        return Err(Error::SampleCountOutOfRange { ell: cfg.ell, n: cfg.n });
    }
    if let Some(bad) = cfg.deviations.iter().find(|d| !(0.0..=1.0).contains(*d)) {
        return Err(Error::invalid("deviations", format!("{bad} is outside [0, 1]")));
    }
    let plan = match cfg.mode {
        Mode::Exhaustive => TrialPlan::exhaustive(cfg.n, cfg.k, cfg.ell, cfg.seed, cfg.exhaustive_cap)?,
        Mode::MonteCarlo => TrialPlan::monte_carlo(cfg.n, cfg.k, cfg.ell, cfg.trials, cfg.seed)?,
    };
    let family = RankOneFamily::random(cfg.n, cfg.k, cfg.seed)?;

    // (λ_min, λ_max) of every sampled Y.
    let extremes: Vec<(f64, f64)> = match cfg.mode {
        Mode::Exhaustive => {
            let mut out = Vec::with_capacity(plan.trials);
            let mut failure = None;
            for_each_combination(cfg.n, cfg.ell, |subset| {
                if failure.is_some() {
                    return;
                }
                match family.sum_eigenvalues(subset) {
                    Ok(e) => out.push((e[e.len() - 1], e[0])),
                    Err(err) => failure = Some(err),
                }
            });
            if let Some(err) = failure {
                return Err(err);
            }
            out
        }
        Mode::MonteCarlo => map_trials(plan.trials, |t| {
            let mut rng = seeding::rng_from_seed(seeding::trial_seed(cfg.seed, t));
            let subset = sample_without_replacement(cfg.n, cfg.ell, &mut rng)?;
            let e = family.sum_eigenvalues(subset.indices())?;
            Ok((e[e.len() - 1], e[0]))
        })?,
    };

    let samples = extremes.len();
    let mu = cfg.ell as f64 / cfg.n as f64;
    let sigma_min = extremes.iter().map(|e| e.0).fold(f64::INFINITY, f64::min).max(0.0).sqrt();
    let sigma_max = extremes.iter().map(|e| e.1).fold(0.0, f64::max).sqrt();
    let elapsed = clock.seconds();
    let chernoff = |deviation| ChernoffParams {
        k: cfg.k,
        b: family.b,
        mu_min: mu,
        mu_max: mu,
        deviation,
    };
    let verdict = |probability: f64, bound: f64| match cfg.mode {
        Mode::Exhaustive => probability <= bound,
        Mode::MonteCarlo => probability <= bound + binomial_slack(bound, samples),
    };
    let summary = |name: String, probability: f64, bound: f64, key: &str, deviation: f64| ExperimentSummary {
        name,
        plan,
        empirical: probability,
        bound,
        extreme_sigma_min: sigma_min,
        extreme_sigma_max: sigma_max,
        passed: verdict(probability, bound),
        elapsed_seconds: elapsed,
        parameters: params([(key, deviation), ("mu_min", mu), ("mu_max", mu), ("B", family.b)]),
    };

    let mut out = Vec::with_capacity(2 * cfg.deviations.len());
    for &delta in &cfg.deviations {
        let threshold = (1.0 - delta) * mu;
        let hits = extremes.iter().filter(|e| e.0 <= threshold).count();
        let bound = chernoff_lower_tail(&chernoff(delta))?;
        out.push(summary(
            format!("chernoff_lower[delta={delta}]"),
            hits as f64 / samples as f64,
            bound,
            "delta",
            delta,
        ));
    }
    for &eta in &cfg.deviations {
        let threshold = (1.0 + eta) * mu;
        let hits = extremes.iter().filter(|e| e.1 >= threshold).count();
        let bound = chernoff_upper_tail(&chernoff(eta))?;
        out.push(summary(
            format!("chernoff_upper[eta={eta}]"),
            hits as f64 / samples as f64,
            bound,
            "eta",
            eta,
        ));
    }
    Ok(out)
}
