use serde::{Deserialize, Serialize};

use crate::numerics::FitResult;

/// Error metrics of one `(t, n)` cell of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub t: f64,
    pub n: u32,
    /// Empty for single-series experiments.
    pub series: String,
    pub sup_error: f64,
    pub opnorm_error: Option<f64>,
    /// `n^p · error` for the experiment's order `p`.
    pub scaled_error: f64,
}

impl ErrorRow {
    /// The error used for rate fits: the operator-norm error when measured.
    pub fn primary_error(&self) -> f64 {
        self.opnorm_error.unwrap_or(self.sup_error)
    }
}

/// One named pass/fail criterion: `lo ≤ value ≤ hi`, missing bounds ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub t: Option<f64>,
    /// `None` when the quantity could not be computed or was not finite.
    pub value: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, t: Option<f64>, value: f64, lo: Option<f64>, hi: Option<f64>) -> Self {
        let value = value.is_finite().then_some(value);
        let mut c = Self { name: name.into(), t, value, lo, hi, passed: false };
        c.passed = c.evaluate();
        c
    }

    pub fn at_least(name: impl Into<String>, t: Option<f64>, value: f64, lo: f64) -> Self {
        Self::new(name, t, value, Some(lo), None)
    }

    pub fn at_most(name: impl Into<String>, t: Option<f64>, value: f64, hi: f64) -> Self {
        Self::new(name, t, value, None, Some(hi))
    }

    pub fn within(name: impl Into<String>, t: Option<f64>, value: f64, lo: f64, hi: f64) -> Self {
        Self::new(name, t, value, Some(lo), Some(hi))
    }

    /// Reported quantity without a criterion; passes whenever it is finite.
    pub fn info(name: impl Into<String>, t: Option<f64>, value: f64) -> Self {
        Self::new(name, t, value, None, None)
    }

    pub fn evaluate(&self) -> bool {
        match self.value {
            Some(v) => self.lo.is_none_or(|lo| v >= lo) && self.hi.is_none_or(|hi| v <= hi),
            None => false,
        }
    }

    pub fn describe(&self) -> String {
        let at = self.t.map(|t| format!(" at t={t}")).unwrap_or_default();
        let value = self.value.map_or("n/a".to_string(), |v| format!("{v:.6e}"));
        let lo = self.lo.map_or("-inf".to_string(), |v| format!("{v:e}"));
        let hi = self.hi.map_or("+inf".to_string(), |v| format!("{v:e}"));
        format!("{}{at}: value {value}, required [{lo}, {hi}]", self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// Every criterion passed because the splitting is exact.
    PassTrivial,
    Fail,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        !matches!(self, Self::Fail)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::PassTrivial => "pass-trivial",
            Self::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFit {
    pub t: f64,
    pub series: String,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub experiment: String,
    /// Sorted by `(t, n, series)`.
    pub rows: Vec<ErrorRow>,
    /// Fit of the primary series; set when the report covers a single `t`.
    pub fit: Option<FitResult>,
    pub primary_series: String,
    pub fits: Vec<SeriesFit>,
    pub checks: Vec<Check>,
    /// Splitting was exact, so no rates were fitted.
    pub trivial: bool,
    pub verdict: Verdict,
}

impl RateReport {
    pub fn assemble(
        experiment: impl Into<String>,
        mut rows: Vec<ErrorRow>,
        fits: Vec<SeriesFit>,
        checks: Vec<Check>,
        primary_series: impl Into<String>,
        trivial: bool,
    ) -> Self {
        rows.sort_by(|a, b| {
            a.t.total_cmp(&b.t).then(a.n.cmp(&b.n)).then_with(|| a.series.cmp(&b.series))
        });
        let mut report = Self {
            experiment: experiment.into(),
            rows,
            fit: None,
            primary_series: primary_series.into(),
            fits,
            checks,
            trivial,
            verdict: Verdict::Fail,
        };
        let ts = report.t_values();
        if ts.len() == 1 {
            report.fit = report.fit_for(ts[0], &report.primary_series.clone()).cloned();
        }
        report.verdict = report.derive_verdict();
        report
    }

    /// Recomputes the verdict from the checks alone.
    pub fn derive_verdict(&self) -> Verdict {
        if !self.checks.iter().all(Check::evaluate) {
            Verdict::Fail
        } else if self.trivial {
            Verdict::PassTrivial
        } else {
            Verdict::Pass
        }
    }

    pub fn t_values(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.rows.iter().map(|r| r.t).collect();
        ts.dedup_by(|a, b| a.to_bits() == b.to_bits());
        ts
    }

    pub fn fit_for(&self, t: f64, series: &str) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.t == t && f.series == series).map(|f| &f.fit)
    }

    pub fn rows_for<'a>(&'a self, t: f64, series: &'a str) -> impl Iterator<Item = &'a ErrorRow> + 'a {
        self.rows.iter().filter(move |r| r.t == t && r.series == series)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.evaluate())
    }

    /// The part of the report belonging to one `t`; untimed checks are kept.
    pub fn for_t(&self, t: f64) -> Self {
        let rows = self.rows.iter().filter(|r| r.t == t).cloned().collect();
        let fits = self.fits.iter().filter(|f| f.t == t).cloned().collect();
        let checks = self.checks.iter().filter(|c| c.t.is_none_or(|ct| ct == t)).cloned().collect();
        Self::assemble(self.experiment.clone(), rows, fits, checks, self.primary_series.clone(), self.trivial)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, n: u32, e: f64) -> ErrorRow {
        ErrorRow { t, n, series: String::new(), sup_error: e, opnorm_error: None, scaled_error: e * f64::from(n) }
    }

    #[test]
    fn rows_sorted_and_verdict_recomputable() {
        let checks = vec![Check::within("slope", Some(1.0), -2.0, -2.2, -1.8)];
        let r = RateReport::assemble("x", vec![row(1.0, 8, 0.1), row(0.5, 4, 0.2), row(1.0, 4, 0.3)], vec![], checks, "", false);
        assert_eq!(r.rows.iter().map(|r| (r.t, r.n)).collect::<Vec<_>>(), vec![(0.5, 4), (1.0, 4), (1.0, 8)]);
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.derive_verdict(), r.verdict);
        assert_eq!(r.for_t(0.5).rows.len(), 1);
    }

    #[test]
    fn failing_and_non_finite_checks() {
        assert!(!Check::at_most("a", None, 2.0, 1.0).passed);
        assert!(!Check::info("b", None, f64::NAN).passed);
        assert!(Check::info("c", None, 3.0).passed);
        let r = RateReport::assemble("x", vec![row(1.0, 4, 0.0)], vec![], vec![Check::at_most("a", None, 2.0, 1.0)], "", true);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.failed_checks().count(), 1);
    }

    #[test]
    fn verdict_labels() {
        assert_eq!(serde_json::to_string(&Verdict::PassTrivial).unwrap(), "\"pass-trivial\"");
        assert_eq!(Verdict::Fail.label(), "fail");
    }
}
