use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

use super::matrix::{dot, norm2, DenseMatrix};

pub const DEFAULT_POWER_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 20_000;

/// A real linear map given only by its action and the action of its transpose.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn apply_transpose(&self, y: &[f64]) -> Vec<f64>;
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.matvec_transpose(y)
    }
}

/// Closure-backed operator. For a symmetric map pass the same closure twice.
pub struct FnOperator<F, G> {
    nrows: usize,
    ncols: usize,
    forward: F,
    transpose: G,
}

impl<F, G> FnOperator<F, G>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(nrows: usize, ncols: usize, forward: F, transpose: G) -> Self {
        Self { nrows, ncols, forward, transpose }
    }
}

impl<F, G> LinearOperator for FnOperator<F, G>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (self.forward)(x)
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        (self.transpose)(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_POWER_TOL, max_iter: DEFAULT_MAX_ITER, seed: 0 }
    }
}

impl PowerOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Largest singular value of `op` by power iteration on `AᵀA`.
///
/// The start vector is drawn from `opts.seed` on every call, so the result
/// depends only on the operator and the options.
pub fn opnorm_power_iteration(op: &dyn LinearOperator, opts: PowerOptions) -> Result<f64> {
    let dim = op.ncols();
    if dim == 0 {
        return invalid("power iteration needs dim >= 1");
    }
    if !(opts.tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {}", opts.tol));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);

    let mut estimate = 0.0;
    for iter in 0..opts.max_iter {
        let y = op.apply(&x);
        // Rayleigh quotient of AᵀA at unit x
        let rayleigh = dot(&y, &y);
        let z = op.apply_transpose(&y);
        let nz = norm2(&z);
        if rayleigh == 0.0 || nz == 0.0 {
            return Ok(0.0);
        }
        if iter > 0 && (rayleigh - estimate).abs() < opts.tol * rayleigh {
            return Ok(rayleigh.sqrt());
        }
        estimate = rayleigh;
        x = z.into_iter().map(|v| v / nz).collect();
    }
    Err(Error::NotConverged { iterations: opts.max_iter, last_estimate: estimate.sqrt() })
}
