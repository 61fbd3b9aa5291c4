//! Saddle points of mountain-pass type.
//!
//! Two solvers share one scalar-field abstraction: a global level-set
//! bisection on planar fields (`bisection`) and a fast local iteration that
//! works in any dimension (`local`). The `wilkinson` module applies the local
//! iteration to the smallest singular value of `A - zI`, which yields the
//! distance from a matrix to the set of matrices with a repeated eigenvalue.

pub mod bisection;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod linalg;
pub mod local;
pub mod path;
pub mod vecops;
pub mod wilkinson;

mod scalar;

pub use error::{Error, Result};
pub use field::{builtin_problems, find_problem, Objective, Point, Region, ScalarField, TestProblem};
pub use num_complex::Complex64;
