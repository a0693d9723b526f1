use super::{binomial_slack, frequency, map_trials, params, ExperimentSummary, Stopwatch, TrialPlan};
use crate::bounds::row_norm_bound;
use crate::error::{Error, Result};
use crate::linalg::{orthonormality_error, random_orthonormal_with, DenseMatrix, OrthonormalColumns};
use crate::seeding;
use crate::srht::SignVector;
use crate::wht::HadamardDim;

struct Trial {
    max_row_norm: f64,
    orthonormality_error: f64,
}

/// Exceedance frequency of `max_j ‖e_j*(HDV)‖` over
/// `√(k/n) + √(8 ln(βn)/n)`, against the probability `1/β`. Every trial
/// draws a fresh `V` and fresh signs and also checks that `HDV` keeps
/// orthonormal columns; a failed check fails the experiment.
///
/// The extremes are the smallest and largest per-trial maximum row norm.
pub fn run_row_norm_trials(n: usize, k: usize, beta: f64, trials: usize, seed: u64) -> Result<ExperimentSummary> {
    let clock = Stopwatch::start();
    let dim = HadamardDim::new(n)?;
    if k == 0 || k > n {
        return Err(Error::invalid("k", format!("need 1 <= k <= n, got {k}")));
    }
    let threshold = row_norm_bound(n, k, beta)?;
    let plan = TrialPlan::monte_carlo(n, k, 0, trials, seed)?;

    let records = map_trials(trials, |t| {
        let mut rng = seeding::rng_from_seed(seeding::trial_seed(seed, t));
        let v = random_orthonormal_with(n, k, &mut rng)?;
        let signs = SignVector::draw(n, &mut rng);
        let hdv = flatten_columns(&v, &signs, dim)?;
        Ok(Trial {
            max_row_norm: hdv.row_norms().into_iter().fold(0.0, f64::max),
            orthonormality_error: orthonormality_error(&hdv),
        })
    })?;

    let empirical = frequency(records.iter().map(|r| r.max_row_norm >= threshold.bound), trials);
    let bound = threshold.exceedance_probability;
    let slack = binomial_slack(bound, trials);
    let worst_orthonormality = records.iter().map(|r| r.orthonormality_error).fold(0.0, f64::max);
    Ok(ExperimentSummary {
        name: "rownorm".into(),
        plan,
        empirical,
        bound,
        extreme_sigma_min: records.iter().map(|r| r.max_row_norm).fold(f64::INFINITY, f64::min),
        extreme_sigma_max: records.iter().map(|r| r.max_row_norm).fold(0.0, f64::max),
        passed: empirical <= bound.min(1.0) + slack
            && worst_orthonormality <= OrthonormalColumns::TOLERANCE,
        elapsed_seconds: clock.seconds(),
        parameters: params([
            ("beta", beta),
            ("row_norm_bound", threshold.bound),
            ("slack", slack),
            ("max_orthonormality_error", worst_orthonormality),
        ]),
    })
}

/// `HDV`, column by column through the fast transform.
fn flatten_columns(v: &OrthonormalColumns, signs: &SignVector, dim: HadamardDim) -> Result<DenseMatrix> {
    let m = v.matrix();
    let columns = (0..m.cols())
        .map(|j| {
            let mut col = m.column(j);
            signs.flatten_inplace(&mut col, dim)?;
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    DenseMatrix::from_columns(&columns)
}
