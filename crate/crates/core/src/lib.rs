//! A desk-scale laboratory for the circle method on prime points of
//! affine hypersurfaces `F(x) = 0`.
//!
//! * [`forms`]: exact integer polynomials and their algebra.
//! * [`singular_locus`]: Birch-rank estimation and the structural dichotomy.
//! * [`arith`]: sieves, arithmetic functions, Vaughan pieces, characters.
//! * [`expsums`]: weighted exponential sums and complete sums.
//! * [`local`]: p-adic densities and the singular series.
//! * [`analytic`]: smooth weights, oscillatory integrals, singular integral.
//! * [`harness`]: arcs, brute-force counts, predictions and reports.

pub mod analytic;
pub mod arith;
pub mod error;
pub mod expsums;
pub mod forms;
pub mod harness;
pub mod local;
pub mod par;

mod modpoly;
pub mod singular_locus;

pub use error::{Error, Result};
pub use forms::{Form, MultilinearTable, VariablePartition};
