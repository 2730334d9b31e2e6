//! Variational tools for nonlinear elasticity with locking constraints: cofactor and
//! determinant algebra, relaxation of locked energies through gradient Young measures,
//! and finite-element minimization of gradient-polyconvex energies.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod app;
pub mod energy;
pub mod error;
pub mod fem;
pub mod optim;
pub mod relaxation;
pub mod sampling;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{FourthOrderTensor, Matrix, ThirdOrderTensor};
