//! Singular systems of the n-fold integration operator on `L^2[0, 1]`.
//!
//! The operator `(J^n x)(s) = ∫_0^s (s - t)^(n-1) / (n-1)! x(t) dt` is compact
//! with singular values `sigma_i = sqrt(lambda_i)`. The eigenvalues of
//! `(J^n)* J^n` are `lambda_i = z_i^(-2n)`, where the `z_i` are the positive
//! zeros of a characteristic function built from sums of `2n`-th roots of
//! unity. This crate computes those zeros, the singular functions, the
//! asymptotic expansion of the zeros for `n = 2`, and spectral cut-off
//! regularization for `J^n x = y`.

pub mod char_equation;
pub mod eigen_solver;
pub mod eigenfunctions;
pub mod epsilon_series;
pub mod error;
pub mod numerics;
pub mod spectral_cutoff;
pub mod unity_spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use numerics::PrecisionContext;
