use std::f64::consts::TAU;

use crate::error::{invalid, Result};

/// Uniform grid on `[x_min, x_max]` with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    spacing: f64,
    weights: Vec<f64>,
}

impl QuadGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return invalid(format!("grid needs at least 2 points, got {n_points}"));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return invalid(format!("grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"));
        }
        let spacing = (x_max - x_min) / (n_points - 1) as f64;
        let mut weights = vec![spacing; n_points];
        weights[0] = 0.5 * spacing;
        weights[n_points - 1] = 0.5 * spacing;
        Ok(Self { x_min, x_max, n_points, spacing, weights })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Index of the grid node equal to `x` (within a millionth of a spacing).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let pos = (x - self.x_min) / self.spacing;
        let i = pos.round();
        if i < 0.0 || i >= self.n_points as f64 || (pos - i).abs() > 1e-6 {
            return None;
        }
        Some(i as usize)
    }

    /// Indices of nodes with `lo <= x <= hi`.
    pub fn indices_within(&self, lo: f64, hi: f64) -> Vec<usize> {
        let slack = 1e-9 * self.spacing;
        (0..self.n_points)
            .filter(|&i| {
                let x = self.point(i);
                x >= lo - slack && x <= hi + slack
            })
            .collect()
    }
}

/// Periodic grid of `n_points` (a power of two) nodes on `[0, length)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    length: f64,
    n_points: usize,
    spacing: f64,
    wavenumbers: Vec<f64>,
}

impl PeriodicGrid {
    pub fn new(length: f64, n_points: usize) -> Result<Self> {
        if !n_points.is_power_of_two() {
            return invalid(format!("periodic grid size must be a power of two, got {n_points}"));
        }
        if !(length.is_finite() && length > 0.0) {
            return invalid(format!("period must be positive, got {length}"));
        }
        let scale = TAU / length;
        let half = n_points / 2;
        let wavenumbers = (0..n_points)
            .map(|j| {
                let k = if j < half.max(1) { j as f64 } else { j as f64 - n_points as f64 };
                k * scale
            })
            .collect();
        Ok(Self { length, n_points, spacing: length / n_points as f64, wavenumbers })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// FFT-ordered angular wavenumbers `0, 1, …, n/2-1, -n/2, …, -1` times `2π/length`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }
}
