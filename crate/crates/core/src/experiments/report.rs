use std::io::Write;

use serde::Serialize;

use super::ExperimentSummary;
use crate::error::{Error, Result};

/// Header of the CSV summary format.
pub const CSV_COLUMNS: [&str; 12] = [
    "name",
    "n",
    "k",
    "ell",
    "trials",
    "mode",
    "empirical",
    "bound",
    "extreme_sigma_min",
    "extreme_sigma_max",
    "passed",
    "elapsed_seconds",
];

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    n: usize,
    k: usize,
    ell: usize,
    trials: usize,
    mode: &'static str,
    empirical: f64,
    bound: f64,
    extreme_sigma_min: f64,
    extreme_sigma_max: f64,
    passed: bool,
    elapsed_seconds: f64,
}

/// Writes summaries as CSV rows under [`CSV_COLUMNS`].
pub fn write_csv<W: Write>(summaries: &[ExperimentSummary], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let err = |e: csv::Error| Error::Csv(e.to_string());
    writer.write_record(CSV_COLUMNS).map_err(err)?;
    for s in summaries {
        writer
            .serialize(CsvRow {
                name: &s.name,
                n: s.plan.n,
                k: s.plan.k,
                ell: s.plan.ell,
                trials: s.plan.trials,
                mode: s.plan.mode.as_str(),
                empirical: s.empirical,
                bound: s.bound,
                extreme_sigma_min: s.extreme_sigma_min,
                extreme_sigma_max: s.extreme_sigma_max,
                passed: s.passed,
                elapsed_seconds: s.elapsed_seconds,
            })
            .map_err(err)?;
    }
    writer.flush().map_err(|e| Error::Csv(e.to_string()))
}
