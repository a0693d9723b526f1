use super::{map_trials, params, ExperimentSummary, Stopwatch, TrialPlan, SLACK_SIGMAS};
use crate::bounds::coupon_coverage_probability;
use crate::error::{Error, Result};
use crate::linalg::{column_singular_values, decimated_identity};
use crate::seeding;
use crate::srht::draw_srht;

/// One summary per `ell`: how often `ΦW` has full rank for the decimated
/// identity `W` (`n = k²`), compared with the exact probability that an
/// `ell`-subset meets all `k` row classes.
///
/// Trial seeds are keyed by the value of `ell`, so a grid point's result does
/// not depend on the rest of the grid. Passes when
/// `|empirical − p| ≤ 4·√(p(1−p)/trials)`.
pub fn run_coupon_trials(k: usize, ell_grid: &[usize], trials: usize, seed: u64) -> Result<Vec<ExperimentSummary>> {
    let w = decimated_identity(k)?;
    let n = k * k;
    ell_grid
        .iter()
        .map(|&ell| {
            let clock = Stopwatch::start();
            if ell == 0 || ell > n {
                return Err(Error::SampleCountOutOfRange { ell, n });
            }
            let plan = TrialPlan::monte_carlo(n, k, ell, trials, seed)?;
            let exact = coupon_coverage_probability(k, ell)?;
            let grid_seed = seeding::derive_seed(seed, ell as u64);
            let spectra = map_trials(trials, |t| {
                let phi = draw_srht(n, ell, seeding::trial_seed(grid_seed, t))?;
                column_singular_values(&phi.apply_to_matrix(w.matrix())?)
            })?;
            let full_rank = spectra.iter().filter(|s| s.is_full_rank()).count();
            let empirical = full_rank as f64 / trials as f64;
            let tolerance = SLACK_SIGMAS * (exact * (1.0 - exact) / trials as f64).sqrt();
            Ok(ExperimentSummary {
                name: format!("coupon[ell={ell}]"),
                plan,
                empirical,
                bound: exact,
                extreme_sigma_min: spectra.iter().map(|s| s.smallest()).fold(f64::INFINITY, f64::min),
                extreme_sigma_max: spectra.iter().map(|s| s.largest()).fold(0.0, f64::max),
                passed: (empirical - exact).abs() <= tolerance,
                elapsed_seconds: clock.seconds(),
                parameters: params([("tolerance", tolerance)]),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremes_of_the_grid() {
        let s = run_coupon_trials(4, &[3, 16], 200, 1).unwrap();
        assert_eq!(s[0].empirical, 0.0);
        assert_eq!(s[0].bound, 0.0);
        assert_eq!(s[1].empirical, 1.0);
        assert_eq!(s[1].bound, 1.0);
        assert!(s.iter().all(|x| x.passed));
    }

    #[test]
    fn small_case_tracks_two_thirds() {
        let s = &run_coupon_trials(2, &[2], 4000, 11).unwrap()[0];
        assert!((s.bound - 2.0 / 3.0).abs() < 1e-15);
        assert!(s.passed, "{s:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(run_coupon_trials(3, &[2], 10, 0).is_err());
        assert!(run_coupon_trials(4, &[17], 10, 0).is_err());
    }
}
