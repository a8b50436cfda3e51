use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::config::{Settings, MAX_REFERENCE_STEPS};
use crate::error::{invalid, Result};
use crate::propagators::SplitStepPropagator;

use super::report::{Check, ErrorRow, RateReport, SeriesFit};
use super::fit_series;

/// `count` random complex states of unit ℓ² norm, Gaussian entries.
pub fn random_unit_states(count: usize, len: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                .collect();
            let norm = l2(&v);
            v.into_iter().map(|z| z / norm).collect()
        })
        .collect()
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Batch-max state error of the unitary split-step scheme against the same
/// scheme at `n_ref` steps.
pub fn run_unitary(s: &Settings) -> Result<RateReport> {
    if s.n_values.len() < 2 {
        return invalid("unitary experiment needs at least 2 n_values");
    }
    let n_max = *s.n_values.last().expect("nonempty");
    if s.n_ref > MAX_REFERENCE_STEPS {
        return invalid(format!("n_ref = {} exceeds the step budget {MAX_REFERENCE_STEPS}", s.n_ref));
    }
    if s.n_ref <= n_max {
        return invalid(format!("n_ref = {} must exceed the largest n = {n_max}", s.n_ref));
    }
    let grid = &s.periodic;
    let pot = s.potential;
    let v = move |x: f64| pot.eval(x);
    let states = random_unit_states(s.batch, grid.n_points(), s.seed);

    let mut rows = Vec::new();
    let mut drift: f64 = 0.0;
    for &t in &s.t_values {
        let reference = SplitStepPropagator::new(t, s.n_ref, s.mass, &v, grid)?;
        let props: Vec<SplitStepPropagator> = s
            .n_values
            .iter()
            .map(|&n| SplitStepPropagator::new(t, n, s.mass, &v, grid))
            .collect::<Result<_>>()?;
        // per state: (l2 error, max-abs error) for every n, plus norm drift
        let per_state: Vec<(Vec<(f64, f64)>, f64)> = states
            .par_iter()
            .map(|psi| {
                let exact = reference.evolve(psi)?;
                let mut d = (l2(&exact) - 1.0).abs();
                let mut errs = Vec::with_capacity(props.len());
                for p in &props {
                    let out = p.evolve(psi)?;
                    d = d.max((l2(&out) - 1.0).abs());
                    let diff: Vec<Complex64> = out.iter().zip(&exact).map(|(a, b)| a - b).collect();
                    let sup = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    errs.push((l2(&diff), sup));
                }
                Ok((errs, d))
            })
            .collect::<Result<_>>()?;
        for (k, &n) in s.n_values.iter().enumerate() {
            let op = per_state.iter().map(|(e, _)| e[k].0).fold(0.0, f64::max);
            let sup = per_state.iter().map(|(e, _)| e[k].1).fold(0.0, f64::max);
            rows.push(ErrorRow {
                t,
                n,
                series: String::new(),
                sup_error: sup,
                opnorm_error: Some(op),
                scaled_error: f64::from(n).powi(2) * op,
            });
        }
        drift = per_state.iter().map(|(_, d)| *d).fold(drift, f64::max);
    }

    let mut checks = vec![Check::at_most("unitarity_drift", None, drift, s.tol("unitary.unitarity_tol"))];
    let exact_tol = s.tol("unitary.exact_tol");
    let worst = rows.iter().map(ErrorRow::primary_error).fold(0.0, f64::max);
    if worst <= exact_tol {
        checks.push(Check::at_most("exact_splitting", None, worst, exact_tol));
        return Ok(RateReport::assemble(s.kind.label(), rows, vec![], checks, "", true));
    }
    let mut fits = Vec::new();
    for &t in &s.t_values {
        let fit = fit_series(&rows, t, "")?;
        checks.push(Check::within("slope", Some(t), fit.slope, s.tol("unitary.slope_min"), s.tol("unitary.slope_max")));
        fits.push(SeriesFit { t, series: String::new(), fit });
    }
    Ok(RateReport::assemble(s.kind.label(), rows, fits, checks, "", false))
}
