//! Quadratic Lie algebras over the rationals and their central extensions.
//!
//! A quadratic Lie algebra carries a non-degenerate symmetric bilinear form
//! `B` with `B([x,y],z) = B(x,[y,z])`. This crate builds such algebras from
//! structure constants, constructs central extensions from tuples of
//! `B`-skew derivations, and recovers the structural maps that control when
//! and how an extension carrying an invariant metric splits.
//!
//! Everything is exact: scalars are arbitrary-precision rationals from
//! [`exactlin`], and every claimed identity is checked, not assumed.

pub mod doublecentral;
pub mod extensions;
pub mod liealg;
pub mod nilpotent2;
pub mod suite;
