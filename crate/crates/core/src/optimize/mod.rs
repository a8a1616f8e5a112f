//! Numerical optimization: quasi-Newton minimization, bracketed root finding
//! and finite-difference derivatives.

pub mod brent;
pub mod lbfgs;
pub mod numdiff;

pub use brent::{find_root, BrentError, Root};
pub use lbfgs::{minimize, LbfgsOptions, Minimum, Objective, Termination};
pub use numdiff::{gradient, hessian, jacobian};
