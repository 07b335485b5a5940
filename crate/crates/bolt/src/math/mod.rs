//! Small numeric building blocks shared across modules: a CSR sparse matrix,
//! a matrix-free conjugate gradient, and forward-mode dual numbers.

pub mod cg;
pub mod csr;
pub mod dual;

pub use cg::{conjugate_gradient, CgOutcome};
pub use csr::Csr;
pub use dual::Dual;
