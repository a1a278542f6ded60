//! Exact rational dense linear algebra.
//!
//! Everything here is computed over Q with arbitrary-precision rationals:
//! row reduction, kernel and column-space bases, linear solving, inversion,
//! Fitting decompositions of square matrices, and subspace arithmetic in a
//! canonical form where subspace equality is value equality.
//!
//! All values are immutable after construction and all operations are pure,
//! so everything can be freely shared across threads.

mod mat;
mod scalar;
mod subspace;

pub use mat::{fitting_index, Fitting, Mat, MatError};
pub use scalar::{
    format_rational, frac, int, one, parse_rational, zero, ParseRationalError, Scalar,
};
pub use subspace::{subspace_ops, Subspace, SubspaceOps};
