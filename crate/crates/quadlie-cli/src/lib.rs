//! File formats and reporting for the `quadlie` command line tool.
//!
//! Everything on disk is JSON, with rationals as exact strings: `"p/q"`, the
//! denominator omitted when it is 1. No floating point exists anywhere in
//! the format, so emit-then-load reproduces structure tensors and forms
//! bit for bit.

pub mod format;
pub mod report;
