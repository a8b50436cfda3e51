//! Numerical laboratory for exponential (Trotter–Kato) product formulas.
//!
//! The crate is split bottom-up:
//!
//! * [`numerics`]: FFT, quadrature grids, dense matrices, Jacobi eigensolver,
//!   power iteration and log–log fits.
//! * [`kernels`]: closed-form integral kernels (free heat, Mehler, the n-step
//!   Strang product kernel, its leading correction, Dirichlet heat kernel).
//! * [`propagators`]: sampled kernels and their composition, product formulas
//!   on grids, split-step unitary evolution, dense-matrix product formulas.
//! * [`experiments`]: rate experiments producing [`experiments::RateReport`]s.

pub mod config;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod numerics;
pub mod propagators;

pub use error::{Error, Result};
