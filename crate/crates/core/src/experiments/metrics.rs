use crate::error::{invalid, Result};
use crate::numerics::{opnorm_power_iteration, DenseMatrix, PowerOptions};
use crate::propagators::SampledKernel;

fn same_grid(k1: &SampledKernel, k2: &SampledKernel) -> Result<()> {
    if k1.grid() != k2.grid() {
        return invalid("kernels are sampled on different grids");
    }
    Ok(())
}

/// `max |k1 − k2|` over grid points with `|x_i|, |x_j| ≤ window`.
pub fn sup_diff(k1: &SampledKernel, k2: &SampledKernel, window: f64) -> Result<f64> {
    same_grid(k1, k2)?;
    let idx = k1.grid().indices_within(-window, window);
    if idx.is_empty() {
        return invalid(format!("window {window} contains no grid points"));
    }
    let mut worst: f64 = 0.0;
    for &i in &idx {
        for &j in &idx {
            worst = worst.max((k1.at(i, j) - k2.at(i, j)).abs());
        }
    }
    Ok(worst)
}

/// L² operator norm of the difference of two integral operators, estimated
/// as the top singular value of `W^{1/2}(K1 − K2)W^{1/2}`.
pub fn opnorm_diff(k1: &SampledKernel, k2: &SampledKernel, opts: PowerOptions) -> Result<f64> {
    same_grid(k1, k2)?;
    let sw: Vec<f64> = k1.grid().weights().iter().map(|w| w.sqrt()).collect();
    let (a, b) = (k1.values(), k2.values());
    let n = sw.len();
    let m = DenseMatrix::from_fn(n, n, |i, j| sw[i] * (a[(i, j)] - b[(i, j)]) * sw[j]);
    opnorm_power_iteration(&m, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::QuadGrid;

    #[test]
    fn self_difference_is_zero() {
        let g = QuadGrid::new(-8.0, 8.0, 129).unwrap();
        let k = SampledKernel::from_fn(&g, |x, y| (-(x - y).powi(2)).exp());
        assert_eq!(sup_diff(&k, &k, 6.0).unwrap(), 0.0);
        assert_eq!(opnorm_diff(&k, &k, PowerOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn uniform_shift_inside_window() {
        let g = QuadGrid::new(-8.0, 8.0, 129).unwrap();
        let k1 = SampledKernel::from_fn(&g, |x, y| (-(x - y).powi(2)).exp());
        let k2 = SampledKernel::from_fn(&g, |x, y| {
            (-(x - y).powi(2)).exp() + if x.abs() <= 6.0 && y.abs() <= 6.0 { 0.25 } else { 10.0 }
        });
        assert!((sup_diff(&k1, &k2, 6.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rank_one_kernel_has_unit_norm() {
        let g = QuadGrid::new(-8.0, 8.0, 1025).unwrap();
        let raw: Vec<f64> = g.points().iter().map(|x| (-x * x / 2.0).exp()).collect();
        let norm: f64 = raw.iter().zip(g.weights()).map(|(p, w)| p * p * w).sum::<f64>().sqrt();
        let phi: Vec<f64> = raw.iter().map(|p| p / norm).collect();
        let k = SampledKernel::new(g.clone(), DenseMatrix::from_fn(1025, 1025, |i, j| phi[i] * phi[j])).unwrap();
        let zero = SampledKernel::new(g, DenseMatrix::zeros(1025, 1025)).unwrap();
        assert!((opnorm_diff(&k, &zero, PowerOptions::default()).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_mismatch() {
        let a = SampledKernel::identity(&QuadGrid::new(0.0, 1.0, 9).unwrap());
        let b = SampledKernel::identity(&QuadGrid::new(0.0, 1.0, 17).unwrap());
        assert!(sup_diff(&a, &b, 1.0).is_err());
        assert!(opnorm_diff(&a, &b, PowerOptions::default()).is_err());
        assert!(sup_diff(&a, &a, 1e-9).is_ok());
    }
}
