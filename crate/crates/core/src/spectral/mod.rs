//! Graph Fourier bases, fractional operators of both kinds and their order
//! gradients.
//!
//! Every operator here is diagonal on the eigenvectors `V` of the GFT matrix
//! `F`, so it is stored and applied as `V diag(m) V^{-1}` for a vector of
//! spectral multipliers `m`. The polynomial constructions in `F` are kept
//! alongside as cross-checks.

mod basis;
mod gradient;
mod operator;

pub use basis::{
    frac_power, gft_basis, principal_ln, SpectralBasis, CONDITION_WARNING, DISTINCTNESS_TOL,
};
pub use gradient::{
    grad_gfrft_scalar, grad_mpgfrft_i, grad_mpgfrft_i_poly, grad_mpgfrft_ii, gradient,
    orders_grad_from_multiplier_grad, type_i_multiplier_derivs, type_ii_slice_coeffs,
    GradientTensor,
};
pub use operator::{
    gfrft, mpgfrft_i, mpgfrft_i_poly, mpgfrft_ii, mpgfrft_ii_poly, multipliers,
    type_i_coefficients, type_i_multipliers, type_ii_coefficients, type_ii_invertibility,
    type_ii_multipliers, FractionalOperator, OrderVector, TransformKind, INVERTIBILITY_TOL,
};
