use rayon::prelude::*;

use crate::config::Settings;
use crate::error::{invalid, Result};
use crate::kernels::{dirichlet_heat_kernel, dirichlet_terms};
use crate::propagators::projected_heat_at;

use super::report::{Check, ErrorRow, RateReport, SeriesFit};
use super::{cells, fit_series};

fn probe_label(p: (f64, f64)) -> String {
    format!("probe({},{})", p.0, p.1)
}

/// Pointwise convergence of the projected heat product on `(0, 1)` to the
/// Dirichlet heat kernel at interior probes.
pub fn run_dirichlet(s: &Settings) -> Result<RateReport> {
    if s.n_values.len() < 2 {
        return invalid("Dirichlet experiment needs at least 2 n_values");
    }
    let g = &s.grid;
    let min_points = s.tol("dirichlet.min_points") as usize;
    if g.n_points() < min_points {
        return invalid(format!("Dirichlet experiment needs a grid of at least {min_points} points, got {}", g.n_points()));
    }
    let margin = s.tol("dirichlet.margin");
    for &(x, y) in &s.probes {
        if [x, y].iter().any(|&v| v < margin || v > 1.0 - margin) {
            return invalid(format!("probe ({x}, {y}) lies within {margin} of the boundary"));
        }
    }
    let n_max = f64::from(*s.n_values.last().expect("nonempty"));
    let spacings = s.tol("dirichlet.width_spacings");
    for &t in &s.t_values {
        let width = (2.0 * t / n_max).sqrt();
        if width < spacings * g.spacing() {
            let needed = ((g.x_max() - g.x_min()) * spacings / width).ceil() as usize + 1;
            return invalid(format!(
                "heat kernel width {width:.3e} at t = {t}, n = {n_max} is below {spacings} grid spacings; \
                 the grid needs at least {needed} points"
            ));
        }
    }

    let reference: Vec<Vec<f64>> = s
        .t_values
        .iter()
        .map(|&t| {
            let terms = dirichlet_terms(t)?;
            s.probes.iter().map(|&(x, y)| dirichlet_heat_kernel(t, x, y, terms)).collect()
        })
        .collect::<Result<_>>()?;
    let order = 1.0 / 6.0;
    let rows: Vec<ErrorRow> = cells(&s.t_values, &s.n_values)
        .into_par_iter()
        .map(|(ti, t, n)| {
            let values = projected_heat_at(t, n, g, &s.probes)?;
            let errs: Vec<f64> = values.iter().zip(&reference[ti]).map(|(v, r)| (v - r).abs()).collect();
            let row = |series: String, e: f64| ErrorRow {
                t,
                n,
                series,
                sup_error: e,
                opnorm_error: None,
                scaled_error: f64::from(n).powf(order) * e,
            };
            let mut out: Vec<ErrorRow> = s.probes.iter().zip(&errs).map(|(&p, &e)| row(probe_label(p), e)).collect();
            out.push(row("max".into(), errs.iter().copied().fold(0.0, f64::max)));
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut fits = Vec::new();
    let mut checks = Vec::new();
    let slope_max = s.tol("dirichlet.slope_max");
    for (ti, &t) in s.t_values.iter().enumerate() {
        let labels = s.probes.iter().map(|&p| probe_label(p)).chain(std::iter::once("max".to_string()));
        for label in labels {
            let errs: Vec<f64> = rows.iter().filter(|r| r.t == t && r.series == label).map(|r| r.sup_error).collect();
            let fit = fit_series(&rows, t, &label)?;
            if label != "max" {
                let bad_steps = errs.windows(2).filter(|w| w[1] >= w[0]).count();
                checks.push(Check::at_most(format!("not_decreasing[{label}]"), Some(t), bad_steps as f64, 0.0));
            }
            checks.push(Check::at_most(format!("slope[{label}]"), Some(t), fit.slope, slope_max));
            fits.push(SeriesFit { t, series: label, fit });
        }
        for (&p, &r) in s.probes.iter().zip(&reference[ti]) {
            checks.push(Check::info(format!("reference[{}]", probe_label(p)), Some(t), r));
        }
    }
    Ok(RateReport::assemble(s.kind.label(), rows, fits, checks, "max", false))
}
