use rand::Rng;
use rand_distr::StandardNormal;

use super::{binomial_slack, frequency, map_trials, params, ExperimentSummary, Stopwatch, TrialPlan};
use crate::bounds::hoeffding_component_tail;
use crate::error::{Error, Result};
use crate::seeding::{self, purpose};
use crate::srht::SignVector;
use crate::wht::HadamardDim;

/// The flattening scale `√(ln n / n)`.
pub fn flattening_threshold(n: usize) -> f64 {
    ((n as f64).ln() / n as f64).sqrt()
}

/// Flattening experiment on a random unit vector fixed by `seed`.
pub fn run_flattening_trials(n: usize, trials: usize, seed: u64) -> Result<ExperimentSummary> {
    HadamardDim::new(n)?;
    let mut rng = seeding::substream(seed, purpose::TEST_VECTOR);
    let mut x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    run_flattening_trials_for(&x, trials, seed)
}

/// Frequency with which some component of `HDx` reaches `√(ln n / n)` over
/// fresh sign draws, against the union bound `n · 2e^{−nt²/2}`. The bound is
/// recorded raw even when it exceeds 1.
///
/// The extremes are the smallest and largest per-trial `max_i |(HDx)_i|`.
pub fn run_flattening_trials_for(x: &[f64], trials: usize, seed: u64) -> Result<ExperimentSummary> {
    let clock = Stopwatch::start();
    let n = x.len();
    let dim = HadamardDim::new(n)?;
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("x", format!("must be a unit vector, has norm {norm}")));
    }
    let plan = TrialPlan::monte_carlo(n, 1, 0, trials, seed)?;
    let t = flattening_threshold(n);

    let maxima = map_trials(trials, |trial| {
        let mut rng = seeding::rng_from_seed(seeding::trial_seed(seed, trial));
        let signs = SignVector::draw(n, &mut rng);
        let mut y = x.to_vec();
        signs.flatten_inplace(&mut y, dim)?;
        Ok(y.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    })?;

    let per_component = hoeffding_component_tail(n, t)?;
    let bound = n as f64 * per_component;
    let empirical = frequency(maxima.iter().map(|m| *m >= t), trials);
    let slack = binomial_slack(bound, trials);
    Ok(ExperimentSummary {
        name: "flatten".into(),
        plan,
        empirical,
        bound,
        extreme_sigma_min: maxima.iter().copied().fold(f64::INFINITY, f64::min),
        extreme_sigma_max: maxima.iter().copied().fold(0.0, f64::max),
        passed: empirical <= bound.min(1.0) + slack,
        elapsed_seconds: clock.seconds(),
        parameters: params([
            ("threshold", t),
            ("component_bound", per_component),
            ("slack", slack),
        ]),
    })
}
