//! Rate experiments. Each runner takes resolved [`Settings`] and returns a
//! [`RateReport`] whose verdict follows from its checks alone.
//!
//! Cells `(t, n)` are evaluated in parallel and collected in input order,
//! so reports do not depend on the thread count.

mod dirichlet;
mod harmonic;
mod matrix;
mod metrics;
mod report;
mod unitary;

pub use dirichlet::run_dirichlet;
pub use harmonic::{run_correction_check, run_harmonic_rate};
pub use matrix::{bch_leading_term, build_pair, run_chernoff, run_matrix_bch};
pub use metrics::{opnorm_diff, sup_diff};
pub use report::{Check, ErrorRow, RateReport, SeriesFit, Verdict};
pub use unitary::{random_unit_states, run_unitary};

use crate::config::{ExperimentKind, Settings};
use crate::error::Result;
use crate::numerics::{fit_loglog, FitResult};

pub fn run_experiment(settings: &Settings) -> Result<RateReport> {
    match settings.kind {
        ExperimentKind::HarmonicRate => run_harmonic_rate(settings),
        ExperimentKind::Correction => run_correction_check(settings),
        ExperimentKind::MatrixBch => run_matrix_bch(settings),
        ExperimentKind::Chernoff => run_chernoff(settings),
        ExperimentKind::Dirichlet => run_dirichlet(settings),
        ExperimentKind::Unitary => run_unitary(settings),
    }
}

/// `(t index, t, n)` for every cell, `t`-major.
fn cells(ts: &[f64], ns: &[u32]) -> Vec<(usize, f64, u32)> {
    ts.iter().enumerate().flat_map(|(i, &t)| ns.iter().map(move |&n| (i, t, n))).collect()
}

fn fit_series(rows: &[ErrorRow], t: f64, series: &str) -> Result<FitResult> {
    let pts: Vec<(u64, f64)> = rows
        .iter()
        .filter(|r| r.t == t && r.series == series)
        .map(|r| (u64::from(r.n), r.primary_error()))
        .collect();
    fit_loglog(&pts)
}
