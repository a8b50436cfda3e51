use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::numerics::{FftPlan, PeriodicGrid};

use super::sampled::Potential;

/// Precomputed phases of `e^{−iτV/2} F⁻¹ e^{−iτω(k)} F e^{−iτV/2}`, with
/// `ω(k) = √(k² + m²)` and `τ = t/n`.
#[derive(Debug, Clone)]
pub struct SplitStepPropagator {
    n: u32,
    plan: FftPlan,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
}

impl SplitStepPropagator {
    pub fn new(t: f64, n: u32, mass: f64, potential: Potential<'_>, grid: &PeriodicGrid) -> Result<Self> {
        if n == 0 {
            return invalid("step count must be at least 1");
        }
        if !t.is_finite() || !(mass >= 0.0 && mass.is_finite()) {
            return invalid(format!("need finite t and mass >= 0, got t = {t}, m = {mass}"));
        }
        let tau = t / f64::from(n);
        let mut half_potential = Vec::with_capacity(grid.n_points());
        for x in grid.points() {
            let v = potential(x);
            if !v.is_finite() {
                return invalid(format!("potential is not finite at x = {x}"));
            }
            half_potential.push(Complex64::from_polar(1.0, -0.5 * tau * v));
        }
        let kinetic = grid
            .wavenumbers()
            .iter()
            .map(|k| Complex64::from_polar(1.0, -tau * (k * k + mass * mass).sqrt()))
            .collect();
        Ok(Self { n, plan: FftPlan::new(grid.n_points())?, half_potential, kinetic })
    }

    pub fn evolve(&self, state: &[Complex64]) -> Result<Vec<Complex64>> {
        if state.len() != self.plan.len() {
            return invalid(format!(
                "state has {} entries, grid has {}",
                state.len(),
                self.plan.len()
            ));
        }
        let mut psi = state.to_vec();
        for _ in 0..self.n {
            psi.iter_mut().zip(&self.half_potential).for_each(|(p, h)| *p *= h);
            self.plan.process(&mut psi, false)?;
            psi.iter_mut().zip(&self.kinetic).for_each(|(p, k)| *p *= k);
            self.plan.process(&mut psi, true)?;
            psi.iter_mut().zip(&self.half_potential).for_each(|(p, h)| *p *= h);
        }
        Ok(psi)
    }
}

/// Applies the n-step symmetric split-step propagator for
/// `H = √(−∂² + m²) + V` to `state`.
pub fn unitary_split_step(
    state: &[Complex64],
    t: f64,
    n: u32,
    mass: f64,
    potential: Potential<'_>,
    grid: &PeriodicGrid,
) -> Result<Vec<Complex64>> {
    SplitStepPropagator::new(t, n, mass, potential, grid)?.evolve(state)
}
