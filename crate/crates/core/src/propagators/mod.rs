//! Numerical realizations of product formulas.

mod matrix;
mod reference;
mod sampled;
mod unitary;

pub use matrix::{matrix_power, matrix_product_formula, MatrixPair};
pub use reference::{r_operator_quadrature, reference_semigroup_grid, MAX_REFERENCE_POINTS};
pub use sampled::{
    compose_kernels, product_formula_kernel, projected_heat_at, projected_heat_product,
    Potential, SampledKernel, SchemeKind, SplitScheme, SplitOrder,
};
pub use unitary::{unitary_split_step, SplitStepPropagator};
