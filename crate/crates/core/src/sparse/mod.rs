//! Sparse storage, direct factorizations and the small dense least-squares
//! kernel used by Anderson acceleration.

mod csr;
mod factor;
mod lsq;
mod multifrontal;

pub use csr::CsrMatrix;
pub use factor::{factorize, FactorKind, Factorization, Factorizer};
pub use multifrontal::{FrontalLu, FrontalSymbolic};
pub use lsq::{dot, solve_gram, weighted_least_squares, DenseLsq, DEFAULT_GRAM_REGULARIZATION};
