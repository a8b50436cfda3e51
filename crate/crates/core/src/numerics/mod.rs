//! Dependency-free numerical primitives.

mod eigen;
mod fft;
mod fit;
mod grid;
mod matrix;
mod power;

pub use eigen::{jacobi_eigh, jacobi_eigh_with, spectral_norm, SymmetricEigen, DEFAULT_JACOBI_THRESHOLD};
pub use fft::{fft, fft_in_place, FftPlan};
pub use fit::{fit_loglog, FitResult};
pub use grid::{PeriodicGrid, QuadGrid};
pub use matrix::DenseMatrix;
pub use power::{
    opnorm_power_iteration, FnOperator, LinearOperator, PowerOptions, DEFAULT_MAX_ITER,
    DEFAULT_POWER_TOL,
};
