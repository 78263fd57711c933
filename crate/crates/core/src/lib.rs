//! Exact symbolic exterior calculus on `R^n` with polynomial coefficients,
//! together with the machinery that enumerates, certifies and decomposes the
//! natural operations between differential forms, and the Chern-Weil forms
//! built from connections on trivial principal bundles.
//!
//! Coordinates and form indices are 0-based in the API and rendered 1-based
//! (`x1` is coordinate 0, `dx1^dx3` is the tuple `[0, 2]`).

pub mod chern_weil;
pub mod classifier;
pub mod error;
pub mod expr;
pub mod form;
pub mod graded;
pub mod linalg;
pub mod perm;
pub mod poly;
pub mod sampler;
pub mod scalar;
pub mod tensor;

pub use chern_weil::{InvariantPoly, LieForm, MatLieAlg, ScalarMatrix};
pub use classifier::{NaturalOp, Signature, Verdict, WitnessAssignment, WitnessCase};
pub use error::{Error, Result};
pub use expr::ExprNode;
pub use form::{DiffForm, SmoothMap};
pub use graded::{GradedAlgebra, GradedMono, GradedPoly, GradedVar};
pub use poly::Poly;
pub use scalar::Scalar;
pub use tensor::CovTensor;
