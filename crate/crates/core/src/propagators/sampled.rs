use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::free_heat_kernel;
use crate::numerics::{DenseMatrix, QuadGrid};

/// Real potential `V(x)`.
pub type Potential<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

/// Integral operator sampled on a grid: `(Tf)(x_i) = Σ_j w_j K(x_i, x_j) f(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernel {
    grid: QuadGrid,
    values: DenseMatrix,
}

impl SampledKernel {
    pub fn new(grid: QuadGrid, values: DenseMatrix) -> Result<Self> {
        let n = grid.n_points();
        if values.rows() != n || values.cols() != n {
            return invalid(format!(
                "kernel values are {}x{}, grid has {n} points",
                values.rows(),
                values.cols()
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &QuadGrid, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let x = grid.points();
        let n = x.len();
        let values = DenseMatrix::from_fn(n, n, |i, j| f(x[i], x[j]));
        Self { grid: grid.clone(), values }
    }

    /// Like [`SampledKernel::from_fn`] for fallible kernels; the first error wins.
    pub fn try_from_fn(grid: &QuadGrid, f: impl Fn(f64, f64) -> Result<f64> + Sync) -> Result<Self> {
        let x = grid.points();
        let rows: Vec<Vec<f64>> = x
            .par_iter()
            .map(|&xi| x.iter().map(|&xj| f(xi, xj)).collect::<Result<Vec<f64>>>())
            .collect::<Result<_>>()?;
        let values = DenseMatrix::from_rows(&rows)?;
        Ok(Self { grid: grid.clone(), values })
    }

    /// The quadrature identity `δ_ij / w_j`.
    pub fn identity(grid: &QuadGrid) -> Self {
        let w = grid.weights();
        let values = DenseMatrix::diagonal(&w.iter().map(|v| 1.0 / v).collect::<Vec<_>>());
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &QuadGrid {
        &self.grid
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn into_values(self) -> DenseMatrix {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Applies the operator to samples `f(x_j)`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.grid.n_points() {
            return invalid("vector length does not match grid");
        }
        let wf: Vec<f64> = f.iter().zip(self.grid.weights()).map(|(a, w)| a * w).collect();
        Ok(self.values.matvec(&wf))
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.values.symmetry_defect()
    }
}

/// `(k1 ∘ k2)(x_i, x_j) = Σ_m w_m k1(x_i, x_m) k2(x_m, x_j)`.
pub fn compose_kernels(k1: &SampledKernel, k2: &SampledKernel) -> Result<SampledKernel> {
    if k1.grid != k2.grid {
        return invalid("cannot compose kernels sampled on different grids");
    }
    let values = k1.values.weighted_product(Some(k1.grid.weights()), &k2.values)?;
    Ok(SampledKernel { grid: k1.grid.clone(), values })
}

/// `k^n`, by repeated squaring when `n` is a power of two.
fn kernel_power(step: SampledKernel, n: u32) -> Result<SampledKernel> {
    if n == 0 {
        return invalid("step count must be at least 1");
    }
    let mut k = step.clone();
    if n.is_power_of_two() {
        for _ in 0..n.trailing_zeros() {
            k = compose_kernels(&k, &k)?;
        }
    } else {
        for _ in 1..n {
            k = compose_kernels(&k, &step)?;
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Symmetric,
    Nonsymmetric,
}

/// The operator that sits outside (symmetric) or acts first (nonsymmetric).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitOrder {
    Kinetic,
    Potential,
}

/// Which product formula to use.
///
/// * symmetric, potential outside: `e^{−τV/2} e^{−τH₀} e^{−τV/2}`
/// * symmetric, kinetic outside: `e^{−τH₀/2} e^{−τV} e^{−τH₀/2}`
/// * nonsymmetric: `e^{−τA} e^{−τB}` with `A` the `outer` operator
///
/// where `τ = t/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitScheme {
    pub kind: SchemeKind,
    pub outer: SplitOrder,
}

impl SplitScheme {
    pub const SYMMETRIC_POTENTIAL: Self = Self { kind: SchemeKind::Symmetric, outer: SplitOrder::Potential };
    pub const SYMMETRIC_KINETIC: Self = Self { kind: SchemeKind::Symmetric, outer: SplitOrder::Kinetic };

    pub fn new(kind: SchemeKind, outer: SplitOrder) -> Self {
        Self { kind, outer }
    }

    pub fn with_kind(self, kind: SchemeKind) -> Self {
        Self { kind, ..self }
    }
}

impl Default for SplitScheme {
    fn default() -> Self {
        Self::SYMMETRIC_POTENTIAL
    }
}

impl fmt::Display for SplitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SchemeKind::Symmetric => "symmetric",
            SchemeKind::Nonsymmetric => "nonsymmetric",
        };
        let outer = match self.outer {
            SplitOrder::Kinetic => "kinetic",
            SplitOrder::Potential => "potential",
        };
        write!(f, "{kind}-{outer}")
    }
}

fn sample_potential(grid: &QuadGrid, potential: Potential<'_>) -> Result<Vec<f64>> {
    let v: Vec<f64> = grid.points().into_iter().map(potential).collect();
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return invalid(format!("potential is not finite at x = {}", grid.point(i)));
    }
    Ok(v)
}

fn free_heat_sampled(grid: &QuadGrid, t: f64, diffusion: f64) -> Result<SampledKernel> {
    // validates t and diffusion once so the sampling closure cannot fail
    free_heat_kernel(t, 0.0, 0.0, diffusion)?;
    Ok(SampledKernel::from_fn(grid, |x, y| free_heat_kernel(t, x, y, diffusion).unwrap_or(f64::NAN)))
}

/// Sampled kernel of the n-step product formula for `H₀ = −D∂²` and `V`.
pub fn product_formula_kernel(
    t: f64,
    n: u32,
    scheme: SplitScheme,
    potential: Potential<'_>,
    diffusion: f64,
    grid: &QuadGrid,
) -> Result<SampledKernel> {
    if n == 0 {
        return invalid("step count must be at least 1");
    }
    let tau = t / f64::from(n);
    let v = sample_potential(grid, potential)?;
    let damp = |c: f64| v.iter().map(|vi| (-c * tau * vi).exp()).collect::<Vec<f64>>();
    let step = match (scheme.kind, scheme.outer) {
        (SchemeKind::Symmetric, SplitOrder::Potential) => {
            let mut k = free_heat_sampled(grid, tau, diffusion)?;
            let half = damp(0.5);
            k.values.scale_rows(&half);
            k.values.scale_cols(&half);
            k
        }
        (SchemeKind::Symmetric, SplitOrder::Kinetic) => {
            let g = free_heat_sampled(grid, 0.5 * tau, diffusion)?;
            let w: Vec<f64> = damp(1.0).iter().zip(grid.weights()).map(|(d, w)| d * w).collect();
            let values = g.values.weighted_product(Some(&w), &g.values)?;
            SampledKernel { grid: grid.clone(), values }
        }
        (SchemeKind::Nonsymmetric, SplitOrder::Kinetic) => {
            let mut k = free_heat_sampled(grid, tau, diffusion)?;
            k.values.scale_cols(&damp(1.0));
            k
        }
        (SchemeKind::Nonsymmetric, SplitOrder::Potential) => {
            let mut k = free_heat_sampled(grid, tau, diffusion)?;
            k.values.scale_rows(&damp(1.0));
            k
        }
    };
    kernel_power(step, n)
}

fn check_unit_interval(grid: &QuadGrid) -> Result<()> {
    if grid.x_min() != 0.0 || grid.x_max() != 1.0 {
        return invalid(format!(
            "projected heat product needs a grid on [0, 1], got [{}, {}]",
            grid.x_min(),
            grid.x_max()
        ));
    }
    Ok(())
}

/// `(χ e^{τ∂²} χ)ⁿ` with `χ` the indicator of `[0, 1]`, `τ = t/n`.
pub fn projected_heat_product(t: f64, n: u32, grid: &QuadGrid) -> Result<SampledKernel> {
    check_unit_interval(grid)?;
    if n == 0 {
        return invalid("step count must be at least 1");
    }
    let step = free_heat_sampled(grid, t / f64::from(n), 1.0)?;
    kernel_power(step, n)
}

/// Values of [`projected_heat_product`] at arbitrary points of `[0, 1]²`.
///
/// Uses the Nyström extension: the outermost factors are evaluated at the
/// requested points and the inner `n − 1` integrals by grid quadrature, so
/// at grid points this agrees with the full matrix product.
pub fn projected_heat_at(t: f64, n: u32, grid: &QuadGrid, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    check_unit_interval(grid)?;
    if n == 0 {
        return invalid("step count must be at least 1");
    }
    for &(x, y) in points {
        if !((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)) {
            return invalid(format!("point ({x}, {y}) lies outside [0, 1]²"));
        }
    }
    let tau = t / f64::from(n);
    let z = grid.points();
    let w = grid.weights();
    let step = free_heat_sampled(grid, tau, 1.0)?;
    let g = |a: f64, b: f64| free_heat_kernel(tau, a, b, 1.0);
    points
        .iter()
        .map(|&(x, y)| {
            if n == 1 {
                return g(x, y);
            }
            let mut u = z.iter().map(|&zj| g(zj, y)).collect::<Result<Vec<f64>>>()?;
            for _ in 1..n - 1 {
                u = step.apply(&u)?;
            }
            let mut acc = 0.0;
            for ((&zj, &wj), &uj) in z.iter().zip(w).zip(&u) {
                acc += wj * g(x, zj)? * uj;
            }
            Ok(acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::kn_closed_form;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_grid() -> QuadGrid {
        QuadGrid::new(-8.0, 8.0, 257).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let g = small_grid();
        let k = SampledKernel::from_fn(&g, |x, y| (-(x - y).powi(2) - 0.1 * x * x).exp());
        let id = SampledKernel::identity(&g);
        let left = compose_kernels(&id, &k).unwrap();
        let right = compose_kernels(&k, &id).unwrap();
        assert!(left.values.sub(&k.values).unwrap().max_abs() < 1e-10);
        assert!(right.values.sub(&k.values).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn composition_is_bilinear() {
        let g = QuadGrid::new(-1.0, 1.0, 33).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mk = |rng: &mut ChaCha8Rng| {
            let data = (0..33 * 33).map(|_| rng.gen_range(-1.0..1.0)).collect();
            SampledKernel::new(g.clone(), DenseMatrix::new(33, 33, data).unwrap()).unwrap()
        };
        let (a, b, c) = (mk(&mut rng), mk(&mut rng), mk(&mut rng));
        let ab = SampledKernel::new(g.clone(), a.values.scaled(2.0).add(&b.values.scaled(-3.0)).unwrap()).unwrap();
        let lhs = compose_kernels(&ab, &c).unwrap().values;
        let rhs = compose_kernels(&a, &c)
            .unwrap()
            .values
            .scaled(2.0)
            .add(&compose_kernels(&b, &c).unwrap().values.scaled(-3.0))
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = SampledKernel::identity(&QuadGrid::new(0.0, 1.0, 5).unwrap());
        let b = SampledKernel::identity(&QuadGrid::new(0.0, 2.0, 5).unwrap());
        assert!(compose_kernels(&a, &b).is_err());
    }

    #[test]
    fn single_step_is_not_composed() {
        let g = small_grid();
        let v = |x: f64| 0.5 * x * x;
        let k = product_formula_kernel(0.7, 1, SplitScheme::SYMMETRIC_POTENTIAL, &v, 0.5, &g).unwrap();
        let i = g.index_of(1.0).unwrap();
        let j = g.index_of(-0.5).unwrap();
        let expected = crate::kernels::strang_step_kernel(0.7, 1.0, -0.5).unwrap();
        assert!((k.at(i, j) - expected).abs() < 1e-15);
    }

    #[test]
    fn non_power_of_two_matches_closed_form() {
        let g = small_grid();
        let v = |x: f64| 0.5 * x * x;
        let k = product_formula_kernel(1.0, 3, SplitScheme::SYMMETRIC_POTENTIAL, &v, 0.5, &g).unwrap();
        let i = g.index_of(0.5).unwrap();
        let j = g.index_of(-1.0).unwrap();
        assert!((k.at(i, j) - kn_closed_form(1.0, 3, 0.5, -1.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn non_finite_potential_is_rejected() {
        let g = small_grid();
        let v = |x: f64| 1.0 / x;
        let r = product_formula_kernel(1.0, 2, SplitScheme::default(), &v, 0.5, &g);
        assert!(r.is_err());
    }

    #[test]
    fn projected_product_needs_unit_interval() {
        assert!(projected_heat_product(0.1, 2, &small_grid()).is_err());
        let g = QuadGrid::new(0.0, 1.0, 65).unwrap();
        assert!(projected_heat_at(0.1, 2, &g, &[(1.5, 0.5)]).is_err());
        assert!(projected_heat_product(0.1, 0, &g).is_err());
    }

    #[test]
    fn nystrom_matches_matrix_product_on_grid() {
        let g = QuadGrid::new(0.0, 1.0, 129).unwrap();
        for n in [1, 2, 5, 8] {
            let k = projected_heat_product(0.1, n, &g).unwrap();
            let (i, j) = (32, 96);
            let v = projected_heat_at(0.1, n, &g, &[(g.point(i), g.point(j))]).unwrap()[0];
            assert!((v - k.at(i, j)).abs() < 1e-12 * k.at(i, j).abs().max(1.0), "n = {n}");
        }
    }

    #[test]
    fn scheme_serde_and_display() {
        let s: SplitScheme = serde_json::from_str(r#"{"kind":"nonsymmetric","outer":"kinetic"}"#).unwrap();
        assert_eq!(s, SplitScheme::new(SchemeKind::Nonsymmetric, SplitOrder::Kinetic));
        assert_eq!(s.to_string(), "nonsymmetric-kinetic");
        assert!(serde_json::from_str::<SplitScheme>(r#"{"kind":"symmetric","outer":"x"}"#).is_err());
    }
}
