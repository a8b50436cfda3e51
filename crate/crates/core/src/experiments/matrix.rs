use rayon::prelude::*;

use crate::config::{PairKind, Settings};
use crate::error::{invalid, Error, Result};
use crate::numerics::{jacobi_eigh, spectral_norm, DenseMatrix};
use crate::propagators::{matrix_product_formula, MatrixPair, SchemeKind, SplitOrder, SplitScheme};

use super::report::{Check, ErrorRow, RateReport, SeriesFit};
use super::{cells, fit_series};

pub fn build_pair(kind: PairKind, dim: usize, seed: u64) -> Result<MatrixPair> {
    match kind {
        PairKind::Fixed => Ok(MatrixPair::fixed()),
        PairKind::Random => MatrixPair::random(dim, seed),
        PairKind::Commuting => MatrixPair::commuting(dim, seed),
        PairKind::Zero => MatrixPair::zero(dim),
    }
}

fn commutator(x: &DenseMatrix, y: &DenseMatrix) -> Result<DenseMatrix> {
    x.matmul(y)?.sub(&y.matmul(x)?)
}

/// `‖(t²/24) ∫₀ᵗ e^{−(t−s)H} [2I+O, [I, O]] e^{−sH} ds‖` where `I` is the
/// inner and `O` the outer operator of the symmetric scheme; the limit of
/// `n²·‖product − e^{−tH}‖`. Returns the norm of the double commutator too.
pub fn bch_leading_term(pair: &MatrixPair, t: f64, outer: SplitOrder, s_steps: usize) -> Result<(f64, f64)> {
    if s_steps < 1 {
        return invalid("need at least one s-step");
    }
    let (inner_op, outer_op) = match outer {
        SplitOrder::Potential => (pair.a(), pair.b()),
        SplitOrder::Kinetic => (pair.b(), pair.a()),
    };
    let c = commutator(&inner_op.scaled(2.0).add(outer_op)?, &commutator(inner_op, outer_op)?)?;
    let h = pair.h_eigen();
    let hs = t / s_steps as f64;
    let mut acc = DenseMatrix::zeros(pair.dim(), pair.dim());
    for k in 0..=s_steps {
        let s = k as f64 * hs;
        let w = if k == 0 || k == s_steps { 0.5 } else { 1.0 };
        let term = h.map(|l| (-(t - s) * l).exp()).matmul(&c)?.matmul(&h.map(|l| (-s * l).exp()))?;
        acc = acc.add(&term.scaled(w))?;
    }
    let lead = acc.scaled(t * t / 24.0 * hs);
    Ok((spectral_norm(&lead)?, spectral_norm(&c)?))
}

/// Nonsymmetric and symmetric product-formula rates for a matrix pair, and
/// the symmetric leading-error term.
pub fn run_matrix_bch(s: &Settings) -> Result<RateReport> {
    if s.n_values.len() < 2 {
        return invalid("matrix experiment needs at least 2 n_values");
    }
    let pair = build_pair(s.pair, s.dim, s.seed)?;
    let sym = s.scheme.with_kind(SchemeKind::Symmetric);
    let nonsym = s.scheme.with_kind(SchemeKind::Nonsymmetric);
    let exact: Vec<DenseMatrix> = s.t_values.iter().map(|&t| pair.semigroup(t)).collect();
    let rows: Vec<ErrorRow> = cells(&s.t_values, &s.n_values)
        .into_par_iter()
        .map(|(ti, t, n)| {
            let mut out = Vec::with_capacity(2);
            for (scheme, label, p) in [(nonsym, "nonsymmetric", 1), (sym, "symmetric", 2)] {
                let diff = matrix_product_formula(&pair, t, n, scheme)?.sub(&exact[ti])?;
                let op = spectral_norm(&diff)?;
                out.push(ErrorRow {
                    t,
                    n,
                    series: label.to_string(),
                    sup_error: diff.max_abs(),
                    opnorm_error: Some(op),
                    scaled_error: f64::from(n).powi(p) * op,
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let exact_tol = s.tol("matrix.exact_tol");
    let worst = rows.iter().map(ErrorRow::primary_error).fold(0.0, f64::max);
    if worst <= exact_tol {
        let checks = vec![Check::at_most("exact_splitting", None, worst, exact_tol)];
        return Ok(RateReport::assemble(s.kind.label(), rows, vec![], checks, "symmetric", true));
    }

    let mut fits = Vec::new();
    let mut checks = Vec::new();
    let n_last = *s.n_values.last().expect("nonempty");
    for &t in &s.t_values {
        let fn_ = fit_series(&rows, t, "nonsymmetric")?;
        let fs = fit_series(&rows, t, "symmetric")?;
        checks.push(Check::within(
            "nonsymmetric_slope",
            Some(t),
            fn_.slope,
            s.tol("matrix.nonsym_slope_min"),
            s.tol("matrix.nonsym_slope_max"),
        ));
        checks.push(Check::within(
            "symmetric_slope",
            Some(t),
            fs.slope,
            s.tol("matrix.sym_slope_min"),
            s.tol("matrix.sym_slope_max"),
        ));
        fits.push(SeriesFit { t, series: "nonsymmetric".into(), fit: fn_ });
        fits.push(SeriesFit { t, series: "symmetric".into(), fit: fs });

        let (lead, cnorm) = bch_leading_term(&pair, t, s.scheme.outer, s.s_steps)?;
        checks.push(Check::info("double_commutator_norm", Some(t), cnorm));
        checks.push(Check::info("leading_term_norm", Some(t), lead));
        let scaled_last = rows
            .iter()
            .find(|r| r.t == t && r.n == n_last && r.series == "symmetric")
            .expect("row present")
            .scaled_error;
        checks.push(Check::at_most(
            "leading_term_rel_error",
            Some(t),
            (scaled_last - lead).abs() / lead,
            s.tol("matrix.lead_rel_tol"),
        ));
        let violations = s
            .n_values
            .iter()
            .filter(|&&n| {
                let err = |series: &str| {
                    rows.iter().find(|r| r.t == t && r.n == n && r.series == series).map(ErrorRow::primary_error)
                };
                err("symmetric") >= err("nonsymmetric")
            })
            .count();
        checks.push(Check::at_most("symmetric_not_better", Some(t), violations as f64, 0.0));
    }
    Ok(RateReport::assemble(s.kind.label(), rows, fits, checks, "symmetric", false))
}

fn symmetric_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = jacobi_eigh(&m.symmetrized())?;
    if eig.values.first().is_none_or(|&l| l <= 0.0) {
        return Err(Error::Precondition("matrix to invert is not positive definite".into()));
    }
    Ok(eig.map(|l| 1.0 / l))
}

const CONTRACTION_TIMES: [f64; 3] = [0.1, 1.0, 10.0];
const RESOLVENT_LEVELS: u32 = 10;

/// Resolvent closeness of `F(τ) = e^{−τB/2}e^{−τA}e^{−τB/2}` to `H = A + B`
/// and the product-error bound it implies.
pub fn run_chernoff(s: &Settings) -> Result<RateReport> {
    if s.n_values.len() < 2 {
        return invalid("Chernoff experiment needs at least 2 n_values");
    }
    let pair = build_pair(s.pair, s.dim, s.seed)?;
    let scheme = SplitScheme::new(SchemeKind::Symmetric, s.scheme.outer);
    let f = |tau: f64| matrix_product_formula(&pair, tau, 1, scheme);
    let spectral_tol = s.tol("chernoff.spectral_tol");
    let mut checks = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in CONTRACTION_TIMES {
        let eig = jacobi_eigh(&f(t)?.symmetrized())?;
        lo = lo.min(eig.values[0]);
        hi = hi.max(*eig.values.last().expect("nonempty"));
    }
    if lo < -spectral_tol || hi > 1.0 + spectral_tol {
        return Err(Error::Precondition(format!(
            "F(t) spectrum [{lo:e}, {hi:e}] leaves [0, 1] for t in {CONTRACTION_TIMES:?}"
        )));
    }
    checks.push(Check::at_least("contraction_min_eigenvalue", None, lo, -spectral_tol));
    checks.push(Check::at_most("contraction_max_eigenvalue", None, hi, 1.0 + spectral_tol));

    let dim = pair.dim();
    let id = DenseMatrix::identity(dim);
    let target = pair.h_eigen().map(|l| 1.0 / (1.0 + l));
    let resolvent: Vec<(u32, f64)> = (1..=RESOLVENT_LEVELS)
        .into_par_iter()
        .map(|k| {
            let n = 1u32 << k;
            let tau = 1.0 / f64::from(n);
            let s_tau = id.sub(&f(tau)?)?.scaled(1.0 / tau);
            let diff = symmetric_inverse(&id.add(&s_tau)?)?.sub(&target)?;
            Ok((n, spectral_norm(&diff)?))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &t in &s.t_values {
        let exact = pair.semigroup(t);
        for &(n, err) in &resolvent {
            rows.push(ErrorRow {
                t,
                n,
                series: "resolvent".into(),
                sup_error: err,
                opnorm_error: Some(err),
                scaled_error: f64::from(n) * err,
            });
        }
        let product: Vec<(u32, f64)> = s
            .n_values
            .par_iter()
            .map(|&n| Ok((n, spectral_norm(&matrix_product_formula(&pair, t, n, scheme)?.sub(&exact)?)?)))
            .collect::<Result<_>>()?;
        for (n, err) in product {
            rows.push(ErrorRow {
                t,
                n,
                series: "product".into(),
                sup_error: err,
                opnorm_error: Some(err),
                scaled_error: f64::from(n) * err,
            });
        }
    }

    let exact_tol = s.tol("chernoff.exact_tol");
    let worst = rows.iter().map(ErrorRow::primary_error).fold(0.0, f64::max);
    if worst <= exact_tol {
        checks.push(Check::at_most("exact_splitting", None, worst, exact_tol));
        return Ok(RateReport::assemble(s.kind.label(), rows, vec![], checks, "product", true));
    }

    let mut fits = Vec::new();
    for &t in &s.t_values {
        let fr = fit_series(&rows, t, "resolvent")?;
        let fp = fit_series(&rows, t, "product")?;
        let alpha = -fr.slope;
        checks.push(Check::at_least("resolvent_rate", Some(t), alpha, s.tol("chernoff.alpha_min")));
        checks.push(Check::at_most("product_slope", Some(t), fp.slope, s.tol("chernoff.product_slope_max")));
        let product: Vec<&ErrorRow> = rows.iter().filter(|r| r.t == t && r.series == "product").collect();
        // anchor the constant at the smallest n
        let first = product[0];
        let c = first.primary_error() * f64::from(first.n).powf(alpha);
        let ratio = product
            .iter()
            .map(|r| r.primary_error() / (c * f64::from(r.n).powf(-alpha)))
            .fold(0.0, f64::max);
        checks.push(Check::info("bound_constant", Some(t), c));
        checks.push(Check::at_most("product_vs_bound", Some(t), ratio, s.tol("chernoff.bound_factor")));
        fits.push(SeriesFit { t, series: "resolvent".into(), fit: fr });
        fits.push(SeriesFit { t, series: "product".into(), fit: fp });
    }
    Ok(RateReport::assemble(s.kind.label(), rows, fits, checks, "product", false))
}
