//! Unital subalgebras of M_n(C): structure, compressibility verdicts and
//! randomized corner-closure checks.

pub mod checker;
pub mod classifier;
pub mod cli;
pub mod error;
pub mod families;
pub mod matcore;
pub mod random;
pub mod structure;
pub mod subalgebra;

pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, Tolerance, C64};
pub use subalgebra::{MatrixAlgebra, MatrixSubspace};
