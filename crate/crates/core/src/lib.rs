// Index loops over the three components read closer to the formulas, and
// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod driver;
pub mod eos;
pub mod error;
pub mod evolve;
pub mod fields;
pub mod grid;
pub mod oracle;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
pub use fields::{MatrixField, ScalarField, VectorField};
pub use grid::Grid;
