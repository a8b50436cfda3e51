use num_complex::Complex64;
use trotterlab_core::experiments::{opnorm_diff, random_unit_states, sup_diff};
use trotterlab_core::kernels::{
    dirichlet_heat_kernel, dirichlet_terms, free_heat_kernel, kn_closed_form, mehler_kernel, r_correction,
};
use trotterlab_core::numerics::{fit_loglog, PeriodicGrid, PowerOptions, QuadGrid};
use trotterlab_core::propagators::{
    compose_kernels, matrix_product_formula, product_formula_kernel, projected_heat_at, projected_heat_product,
    r_operator_quadrature, reference_semigroup_grid, unitary_split_step, MatrixPair, SampledKernel, SchemeKind,
    SplitOrder, SplitScheme,
};

fn harmonic(x: f64) -> f64 {
    x * x / 2.0
}

fn zero(_: f64) -> f64 {
    0.0
}

fn grid(n: usize) -> QuadGrid {
    QuadGrid::new(-8.0, 8.0, n).unwrap()
}

fn mehler_on(g: &QuadGrid, t: f64) -> SampledKernel {
    SampledKernel::from_fn(g, |x, y| mehler_kernel(t, x, y).unwrap())
}

#[test]
fn compose_free_heat_is_chapman_kolmogorov() {
    let g = grid(1025);
    let k1 = SampledKernel::from_fn(&g, |x, y| free_heat_kernel(0.3, x, y, 1.0).unwrap());
    let k2 = SampledKernel::from_fn(&g, |x, y| free_heat_kernel(0.5, x, y, 1.0).unwrap());
    let k = compose_kernels(&k1, &k2).unwrap();
    let exact = SampledKernel::from_fn(&g, |x, y| free_heat_kernel(0.8, x, y, 1.0).unwrap());
    // free kernels feel the walls at ±8 from |x| near 6; stay well inside
    assert!(sup_diff(&k, &exact, 2.0).unwrap() < 1e-8);
}

#[test]
fn harmonic_product_matches_closed_form() {
    let g = grid(1025);
    let k = product_formula_kernel(1.0, 8, SplitScheme::SYMMETRIC_POTENTIAL, &harmonic, 0.5, &g).unwrap();
    let exact = SampledKernel::from_fn(&g, |x, y| kn_closed_form(1.0, 8, x, y).unwrap());
    assert!(sup_diff(&k, &exact, 8.0).unwrap() < 1e-7);
}

#[test]
fn zero_potential_reproduces_free_heat_for_every_scheme() {
    let g = grid(513);
    let exact = SampledKernel::from_fn(&g, |x, y| free_heat_kernel(1.0, x, y, 0.5).unwrap());
    for kind in [SchemeKind::Symmetric, SchemeKind::Nonsymmetric] {
        for outer in [SplitOrder::Potential, SplitOrder::Kinetic] {
            let scheme = SplitScheme::new(kind, outer);
            for n in [3, 4] {
                let k = product_formula_kernel(1.0, n, scheme, &zero, 0.5, &g).unwrap();
                let d = sup_diff(&k, &exact, 2.0).unwrap();
                assert!(d < 1e-8, "{scheme} n={n}: {d:e}");
            }
        }
    }
}

#[test]
fn product_kernels_are_positive_self_adjoint_contractions() {
    let g = grid(513);
    let opts = PowerOptions::with_seed(3);
    let zero_kernel = SampledKernel::from_fn(&g, |_, _| 0.0);
    for scheme in [SplitScheme::SYMMETRIC_POTENTIAL, SplitScheme::SYMMETRIC_KINETIC] {
        for n in [1, 4, 16] {
            let k = product_formula_kernel(1.0, n, scheme, &harmonic, 0.5, &g).unwrap();
            let v = k.values();
            assert!(v.data().iter().all(|&e| e >= 0.0), "{scheme} n={n} has a negative entry");
            assert!(k.symmetry_defect() <= 1e-10 * v.max_abs(), "{scheme} n={n} not symmetric");
            let norm = opnorm_diff(&k, &zero_kernel, opts).unwrap();
            assert!(norm <= 1.0 + 1e-8, "{scheme} n={n}: norm {norm}");
        }
    }
}

#[test]
fn kinetic_outer_scheme_has_the_same_order() {
    let g = grid(513);
    let exact = mehler_on(&g, 1.0);
    let opts = PowerOptions::with_seed(1);
    let pts: Vec<(u64, f64)> = [4u32, 8, 16, 32, 64, 128, 256]
        .iter()
        .map(|&n| {
            let k = product_formula_kernel(1.0, n, SplitScheme::SYMMETRIC_KINETIC, &harmonic, 0.5, &g).unwrap();
            (u64::from(n), opnorm_diff(&k, &exact, opts).unwrap())
        })
        .collect();
    let fit = fit_loglog(&pts).unwrap();
    assert!((fit.slope + 2.0).abs() <= 0.15, "slope {}", fit.slope);
}

#[test]
fn nonsymmetric_scheme_is_first_order() {
    let g = grid(513);
    let exact = mehler_on(&g, 1.0);
    let scheme = SplitScheme::SYMMETRIC_POTENTIAL.with_kind(SchemeKind::Nonsymmetric);
    let pts: Vec<(u64, f64)> = [8u32, 16, 32, 64]
        .iter()
        .map(|&n| {
            let k = product_formula_kernel(1.0, n, scheme, &harmonic, 0.5, &g).unwrap();
            (u64::from(n), sup_diff(&k, &exact, 6.0).unwrap())
        })
        .collect();
    let fit = fit_loglog(&pts).unwrap();
    assert!((fit.slope + 1.0).abs() <= 0.15, "slope {}", fit.slope);
}

#[test]
fn closed_form_sup_error_quarters_on_doubling() {
    let g = grid(1025);
    let exact = mehler_on(&g, 1.0);
    let e = |n: u32| {
        let k = SampledKernel::from_fn(&g, |x, y| kn_closed_form(1.0, n, x, y).unwrap());
        sup_diff(&k, &exact, 6.0).unwrap()
    };
    let ratio = e(16) / e(32);
    assert!((3.7..=4.3).contains(&ratio), "{ratio}");
}

#[test]
fn closed_form_opnorm_error_quarters_on_doubling() {
    let g = grid(1025);
    let exact = mehler_on(&g, 1.0);
    let opts = PowerOptions::with_seed(9);
    let e = |n: u32| {
        let k = SampledKernel::from_fn(&g, |x, y| kn_closed_form(1.0, n, x, y).unwrap());
        opnorm_diff(&k, &exact, opts).unwrap()
    };
    let ratio = e(64) / e(128);
    assert!((3.7..=4.3).contains(&ratio), "{ratio}");
}

#[test]
fn reference_semigroup_harmonic_origin() {
    let g = grid(513);
    let k = reference_semigroup_grid(1.0, &harmonic, 0.5, &g).unwrap();
    let i0 = g.index_of(0.0).unwrap();
    assert!((k.at(i0, i0) - 0.36800).abs() < 5e-4, "{}", k.at(i0, i0));
}

#[test]
fn reference_semigroup_tracks_mehler_in_window() {
    let g = grid(513);
    let k = reference_semigroup_grid(1.0, &harmonic, 0.5, &g).unwrap();
    let d = sup_diff(&k, &mehler_on(&g, 1.0), 6.0).unwrap();
    assert!(d < 5e-4, "{d:e}");
}

#[test]
fn reference_semigroup_long_time_is_rank_one() {
    // e^{−tH} → e^{−t/2} φ₀ ⊗ φ₀ for the oscillator
    let g = grid(513);
    let t = 20.0;
    let k = reference_semigroup_grid(t, &harmonic, 0.5, &g).unwrap();
    let i0 = g.index_of(0.0).unwrap();
    let ground = |x: f64| std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    for x in [0.0, 0.5, 1.0, 2.0] {
        let i = g.index_of(x).unwrap();
        let expected = (-t / 2.0).exp() * ground(x) * ground(0.0);
        assert!(((k.at(i, i0) - expected) / expected).abs() < 2e-3, "x={x}");
    }
}

#[test]
fn quadrature_correction_converges_at_second_order() {
    let g = QuadGrid::new(-8.0, 8.0, 129).unwrap();
    let exact = SampledKernel::from_fn(&g, |x, y| r_correction(1.0, x, y).unwrap());
    let err = |s: usize| sup_diff(&r_operator_quadrature(1.0, &g, s).unwrap(), &exact, 6.0).unwrap();
    let (e8, e16, e32) = (err(8), err(16), err(32));
    for r in [e8 / e16, e16 / e32] {
        assert!((3.5..=4.5).contains(&r), "ratios {e8:e} {e16:e} {e32:e}");
    }
}

#[test]
fn quadrature_correction_at_origin() {
    let g = QuadGrid::new(-8.0, 8.0, 257).unwrap();
    let q = r_operator_quadrature(1.0, &g, 256).unwrap();
    let i0 = g.index_of(0.0).unwrap();
    let r = r_correction(1.0, 0.0, 0.0).unwrap();
    assert!((q.at(i0, i0) - r).abs() < 1e-4, "{} vs {r}", q.at(i0, i0));
}

#[test]
fn projected_heat_decreases_toward_dirichlet() {
    let g = QuadGrid::new(0.0, 1.0, 1025).unwrap();
    let target = dirichlet_heat_kernel(0.1, 0.5, 0.5, dirichlet_terms(0.1).unwrap()).unwrap();
    let vals: Vec<f64> =
        [1, 2, 4, 8, 16, 32].iter().map(|&n| projected_heat_at(0.1, n, &g, &[(0.5, 0.5)]).unwrap()[0]).collect();
    assert!((vals[0] - free_heat_kernel(0.1, 0.5, 0.5, 1.0).unwrap()).abs() < 1e-12);
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    assert!(vals.iter().all(|&v| v > target));
}

#[test]
fn projected_heat_matrix_agrees_with_nystrom_on_nodes() {
    let g = QuadGrid::new(0.0, 1.0, 257).unwrap();
    let k = projected_heat_product(0.1, 4, &g).unwrap();
    let (i, j) = (g.index_of(0.25).unwrap(), g.index_of(0.5).unwrap());
    let v = projected_heat_at(0.1, 4, &g, &[(0.25, 0.5)]).unwrap()[0];
    assert!((k.at(i, j) - v).abs() < 1e-12 * v);
}

fn max_state_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn unitary_self_refinement() {
    let g = PeriodicGrid::new(std::f64::consts::TAU, 512).unwrap();
    let states = random_unit_states(4, 512, 11);
    let v = |x: f64| x.cos();
    let mut worst_16: f64 = 0.0;
    let mut worst_32: f64 = 0.0;
    let mut worst_64: f64 = 0.0;
    for s in &states {
        let reference = unitary_split_step(s, 1.0, 4096, 1.0, &v, &g).unwrap();
        let e = |n| max_state_diff(&unitary_split_step(s, 1.0, n, 1.0, &v, &g).unwrap(), &reference);
        worst_16 = worst_16.max(e(16));
        worst_32 = worst_32.max(e(32));
        worst_64 = worst_64.max(e(64));
    }
    let ratio = worst_16 / worst_32;
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    // discrepancy at 64 is on the O(64⁻²) scale set by n = 32
    assert!(worst_64 <= worst_32 / 3.5, "{worst_32:e} {worst_64:e}");
}

#[test]
fn fixed_pair_single_step_error_is_cubic() {
    let pair = MatrixPair::fixed();
    let err = |t: f64| {
        let p = matrix_product_formula(&pair, t, 1, SplitScheme::SYMMETRIC_POTENTIAL).unwrap();
        p.sub(&pair.semigroup(t)).unwrap().frobenius_norm()
    };
    let ratio = err(0.02) / err(0.01);
    assert!((ratio - 8.0).abs() < 0.2, "{ratio}");
}
