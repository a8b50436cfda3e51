use rayon::prelude::*;

use crate::config::Settings;
use crate::error::{invalid, Result};
use crate::kernels::{kn_coefficients, mehler_kernel, r_correction};
use crate::numerics::QuadGrid;
use crate::propagators::{product_formula_kernel, r_operator_quadrature, SampledKernel, SplitScheme};

use super::metrics::{opnorm_diff, sup_diff};
use super::report::{Check, ErrorRow, RateReport, SeriesFit};
use super::{cells, fit_series};

fn harmonic_potential(x: f64) -> f64 {
    0.5 * x * x
}

fn mehler_sampled(grid: &QuadGrid, t: f64) -> Result<SampledKernel> {
    SampledKernel::try_from_fn(grid, |x, y| mehler_kernel(t, x, y))
}

/// Sampled n-step kernel: the closed form for the potential-outer symmetric
/// scheme, grid composition otherwise.
fn product_sampled(s: &Settings, t: f64, n: u32) -> Result<SampledKernel> {
    if s.scheme == SplitScheme::SYMMETRIC_POTENTIAL {
        let k = kn_coefficients(t, n)?;
        Ok(SampledKernel::from_fn(&s.grid, |x, y| k.eval(x, y)))
    } else {
        product_formula_kernel(t, n, s.scheme, &harmonic_potential, 0.5, &s.grid)
    }
}

/// Operator-norm and pointwise rates of the product formula for the
/// harmonic oscillator, with the two-sided `n⁻²` band.
pub fn run_harmonic_rate(s: &Settings) -> Result<RateReport> {
    if s.n_values.len() < 2 {
        return invalid("harmonic rate needs at least 2 n_values");
    }
    let references: Vec<SampledKernel> =
        s.t_values.iter().map(|&t| mehler_sampled(&s.grid, t)).collect::<Result<_>>()?;
    let rows: Vec<ErrorRow> = cells(&s.t_values, &s.n_values)
        .into_par_iter()
        .map(|(ti, t, n)| {
            let k = product_sampled(s, t, n)?;
            let sup = sup_diff(&k, &references[ti], s.window)?;
            let op = opnorm_diff(&k, &references[ti], s.power_options())?;
            let n2 = f64::from(n).powi(2);
            Ok(ErrorRow { t, n, series: String::new(), sup_error: sup, opnorm_error: Some(op), scaled_error: n2 * op })
        })
        .collect::<Result<_>>()?;

    let mut fits = Vec::new();
    let mut checks = Vec::new();
    for &t in &s.t_values {
        let fit = fit_series(&rows, t, "")?;
        checks.push(Check::within("slope", Some(t), fit.slope, s.tol("harmonic.slope_min"), s.tol("harmonic.slope_max")));
        let of_t: Vec<&ErrorRow> = rows.iter().filter(|r| r.t == t).collect();
        let last = of_t.last().expect("rows for every t").scaled_error;
        let n_min = s.tol("harmonic.band_n_min");
        let ratios: Vec<f64> =
            of_t.iter().filter(|r| f64::from(r.n) >= n_min).map(|r| r.scaled_error / last).collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::at_least("scaled_lower_band", Some(t), lo, s.tol("harmonic.band_lo")));
        checks.push(Check::at_most("scaled_upper_band", Some(t), hi, s.tol("harmonic.band_hi")));
        let bound = of_t.iter().map(|r| r.scaled_error).fold(0.0, f64::max);
        checks.push(Check::info("scaled_bound", Some(t), bound));
        fits.push(SeriesFit { t, series: String::new(), fit });
    }
    Ok(RateReport::assemble(s.kind.label(), rows, fits, checks, "", false))
}

struct CorrectionCell {
    rho: f64,
    origin: Option<f64>,
    sign_mismatches: usize,
}

/// Compares `n²(K⁽ⁿ⁾ − e^{−tH})` with the correction kernel `R` and
/// cross-checks the closed-form `R` against its quadrature construction.
pub fn run_correction_check(s: &Settings) -> Result<RateReport> {
    if s.n_values.len() < 2 {
        return invalid("correction check needs at least 2 n_values");
    }
    let window = s.grid.indices_within(-s.window, s.window);
    if window.is_empty() {
        return invalid(format!("window {} contains no grid points", s.window));
    }
    let xs: Vec<f64> = window.iter().map(|&i| s.grid.point(i)).collect();
    let origin = xs.iter().position(|&x| x == 0.0);
    let m = xs.len();

    struct PerT {
        mehler: Vec<f64>,
        r: Vec<f64>,
        r_max: f64,
    }
    let per_t: Vec<PerT> = s
        .t_values
        .iter()
        .map(|&t| {
            let mut mehler = Vec::with_capacity(m * m);
            let mut r = Vec::with_capacity(m * m);
            for &x in &xs {
                for &y in &xs {
                    mehler.push(mehler_kernel(t, x, y)?);
                    r.push(r_correction(t, x, y)?);
                }
            }
            let r_max = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            Ok(PerT { mehler, r, r_max })
        })
        .collect::<Result<_>>()?;

    let n_last = *s.n_values.last().expect("nonempty");
    let frac = s.tol("correction.sign_fraction");
    let results: Vec<(f64, u32, CorrectionCell)> = cells(&s.t_values, &s.n_values)
        .into_par_iter()
        .map(|(ti, t, n)| {
            let k = kn_coefficients(t, n)?;
            let pt = &per_t[ti];
            let n2 = f64::from(n).powi(2);
            let mut rho: f64 = 0.0;
            let mut sign_mismatches = 0;
            let mut origin_value = None;
            for (a, &x) in xs.iter().enumerate() {
                for (b, &y) in xs.iter().enumerate() {
                    let idx = a * m + b;
                    let d = n2 * (k.eval(x, y) - pt.mehler[idx]);
                    let r = pt.r[idx];
                    rho = rho.max((d - r).abs());
                    if r.abs() > frac * pt.r_max && d.signum() != r.signum() {
                        sign_mismatches += 1;
                    }
                    if Some(a) == origin && Some(b) == origin {
                        origin_value = Some(d);
                    }
                }
            }
            Ok((t, n, CorrectionCell { rho, origin: origin_value, sign_mismatches }))
        })
        .collect::<Result<_>>()?;

    let quad_grid = QuadGrid::new(s.grid.x_min(), s.grid.x_max(), s.quad_points)?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    for (ti, &t) in s.t_values.iter().enumerate() {
        let of_t: Vec<(u32, &CorrectionCell)> =
            results.iter().filter(|(ct, _, _)| *ct == t).map(|(_, n, c)| (*n, c)).collect();
        for &(n, c) in &of_t {
            rows.push(ErrorRow {
                t,
                n,
                series: String::new(),
                sup_error: c.rho,
                opnorm_error: None,
                scaled_error: f64::from(n) * c.rho,
            });
        }
        fits.push(SeriesFit { t, series: String::new(), fit: fit_series(&rows, t, "")? });

        for w in of_t.windows(2) {
            let ((n1, c1), (n2, c2)) = (w[0], w[1]);
            // residual ratio per doubling of n
            let ratio = (c1.rho / c2.rho).powf(std::f64::consts::LN_2 / (f64::from(n2) / f64::from(n1)).ln());
            checks.push(Check::within(
                format!("residual_ratio[n={n1}]"),
                Some(t),
                ratio,
                s.tol("correction.ratio_min"),
                s.tol("correction.ratio_max"),
            ));
        }
        let (first, last) = (of_t[0].1, of_t[of_t.len() - 1].1);
        checks.push(Check::at_least("residual_decay", Some(t), first.rho / last.rho, s.tol("correction.decay_factor")));
        if let Some(d0) = last.origin {
            let r0 = r_correction(t, 0.0, 0.0)?;
            checks.push(Check::info(format!("scaled_difference_origin[n={n_last}]"), Some(t), d0));
            checks.push(Check::at_most("origin_vs_correction", Some(t), (d0 - r0).abs(), s.tol("correction.origin_tol")));
        }
        checks.push(Check::at_most("sign_pattern_mismatches", Some(t), last.sign_mismatches as f64, 0.0));
        let pt = &per_t[ti];
        let both_signs = pt.r.iter().any(|&v| v > 0.0) && pt.r.iter().any(|&v| v < 0.0);
        checks.push(Check::at_least("correction_changes_sign", Some(t), if both_signs { 1.0 } else { 0.0 }, 1.0));

        let quad = r_operator_quadrature(t, &quad_grid, s.s_steps)?;
        let mut worst: f64 = 0.0;
        for i in quad_grid.indices_within(-s.window, s.window) {
            for j in quad_grid.indices_within(-s.window, s.window) {
                let closed = r_correction(t, quad_grid.point(i), quad_grid.point(j))?;
                worst = worst.max((quad.at(i, j) - closed).abs());
            }
        }
        checks.push(Check::at_most("quadrature_vs_closed_form", Some(t), worst, s.tol("correction.quadrature_tol")));
    }
    Ok(RateReport::assemble(s.kind.label(), rows, fits, checks, "", false))
}
