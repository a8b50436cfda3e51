use crate::error::{invalid, Result};
use crate::kernels::{mehler_kernel, mehler_kernel_dt};
use crate::numerics::{jacobi_eigh, DenseMatrix, QuadGrid};

use super::sampled::{Potential, SampledKernel};

/// Largest grid accepted by [`reference_semigroup_grid`].
pub const MAX_REFERENCE_POINTS: usize = 1024;

/// `e^{−tH}` for `H = −D∂² + V`, discretized by central differences with
/// Dirichlet walls at both grid ends.
///
/// Rows and columns of the end points are zero; interior entries are
/// `Σ_k e^{−tμ_k} φ_k(x_i) φ_k(x_j)` with continuum-normalized `φ_k`.
pub fn reference_semigroup_grid(
    t: f64,
    potential: Potential<'_>,
    diffusion: f64,
    grid: &QuadGrid,
) -> Result<SampledKernel> {
    let n = grid.n_points();
    if n > MAX_REFERENCE_POINTS {
        return invalid(format!(
            "reference semigroup is limited to {MAX_REFERENCE_POINTS} grid points, got {n}"
        ));
    }
    if n < 3 {
        return invalid("reference semigroup needs at least one interior point");
    }
    if !(t > 0.0 && t.is_finite()) || !(diffusion > 0.0 && diffusion.is_finite()) {
        return invalid(format!("need t > 0 and diffusion > 0, got t = {t}, D = {diffusion}"));
    }
    let h = grid.spacing();
    let m = n - 2;
    let off = -diffusion / (h * h);
    let mut v = Vec::with_capacity(m);
    for i in 1..=m {
        let x = grid.point(i);
        let p = potential(x);
        if !p.is_finite() {
            return invalid(format!("potential is not finite at x = {x}"));
        }
        v.push(p);
    }
    let op = DenseMatrix::from_fn(m, m, |i, j| {
        if i == j {
            -2.0 * off + v[i]
        } else if i.abs_diff(j) == 1 {
            off
        } else {
            0.0
        }
    });
    let eig = jacobi_eigh(&op)?;
    let inner = eig.map(|mu| (-t * mu).exp());
    let values = DenseMatrix::from_fn(n, n, |i, j| {
        if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
            0.0
        } else {
            inner[(i - 1, j - 1)] / h
        }
    });
    SampledKernel::new(grid.clone(), values)
}

/// Kernel of `−(t²/24) ∫₀ᵗ e^{−(t−s)H} (−4H + 6V) e^{−sH} ds` for the
/// harmonic oscillator, by the trapezoid rule in `s` and grid quadrature in
/// the intermediate variable.
///
/// `H e^{−sH}` is taken as `−∂_s` of the Mehler kernel and `6V` as
/// multiplication by `3z²`. At `s = 0` and `s = t` one Mehler factor is a
/// delta function, so those two nodes are evaluated analytically. Nodes
/// `s` and `t − s` are paired, which makes the result exactly symmetric.
pub fn r_operator_quadrature(t: f64, grid: &QuadGrid, s_steps: usize) -> Result<SampledKernel> {
    if s_steps < 8 {
        return invalid(format!("need at least 8 s-steps, got {s_steps}"));
    }
    mehler_kernel(t, 0.0, 0.0)?;
    let x = grid.points();
    let n = x.len();
    let hs = t / s_steps as f64;

    // s = 0 contributes e^{−tH}(−4H + 6V)
    let first = DenseMatrix::from_fn(n, n, |i, j| {
        let (xi, yj) = (x[i], x[j]);
        4.0 * mehler_kernel_dt(t, xi, yj).unwrap_or(f64::NAN)
            + 3.0 * yj * yj * mehler_kernel(t, xi, yj).unwrap_or(f64::NAN)
    });
    // s = t contributes the transpose
    let mut acc = first.add(&first.transpose())?.scaled(0.5);

    let integrand = |k: usize| -> Result<DenseMatrix> {
        let s = k as f64 * hs;
        let left = DenseMatrix::from_fn(n, n, |i, m| mehler_kernel(t - s, x[i], x[m]).unwrap_or(f64::NAN));
        let right = DenseMatrix::from_fn(n, n, |m, j| {
            let (z, y) = (x[m], x[j]);
            4.0 * mehler_kernel_dt(s, z, y).unwrap_or(f64::NAN)
                + 3.0 * z * z * mehler_kernel(s, z, y).unwrap_or(f64::NAN)
        });
        left.weighted_product(Some(grid.weights()), &right)
    };
    for k in 1..s_steps {
        let mirror = s_steps - k;
        if k > mirror {
            break;
        }
        let f = integrand(k)?;
        let pair = if k == mirror { f.add(&f.transpose())?.scaled(0.5) } else { f.add(&f.transpose())? };
        acc = acc.add(&pair)?;
    }
    SampledKernel::new(grid.clone(), acc.scaled(-t * t / 24.0 * hs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::free_heat_kernel;

    #[test]
    fn budget_and_argument_checks() {
        let zero = |_: f64| 0.0;
        let big = QuadGrid::new(-1.0, 1.0, 1025).unwrap();
        assert!(reference_semigroup_grid(1.0, &zero, 0.5, &big).is_err());
        let g = QuadGrid::new(-1.0, 1.0, 17).unwrap();
        assert!(reference_semigroup_grid(0.0, &zero, 0.5, &g).is_err());
        assert!(r_operator_quadrature(1.0, &g, 7).is_err());
        assert!(r_operator_quadrature(-1.0, &g, 8).is_err());
    }

    #[test]
    fn free_case_matches_heat_kernel_in_interior() {
        let zero = |_: f64| 0.0;
        let g = QuadGrid::new(-10.0, 10.0, 401).unwrap();
        let k = reference_semigroup_grid(0.5, &zero, 1.0, &g).unwrap();
        let mut worst: f64 = 0.0;
        for i in g.indices_within(-2.0, 2.0) {
            for j in g.indices_within(-2.0, 2.0) {
                let exact = free_heat_kernel(0.5, g.point(i), g.point(j), 1.0).unwrap();
                worst = worst.max((k.at(i, j) - exact).abs());
            }
        }
        assert!(worst < 1e-3, "worst {worst}");
        assert_eq!(k.at(0, 5), 0.0);
    }

    #[test]
    fn quadrature_r_is_symmetric() {
        let g = QuadGrid::new(-6.0, 6.0, 49).unwrap();
        let r = r_operator_quadrature(1.0, &g, 8).unwrap();
        assert_eq!(r.symmetry_defect(), 0.0);
    }
}
