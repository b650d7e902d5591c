//! Direct sparse factorizations backed by `faer`.
//!
//! [`CsrMatrix`] storage is handed to `faer` without copying by reading it as
//! the column-compressed storage of the transpose. LU therefore factors `Aᵀ`
//! and answers `A x = b` with a transposed solve; Cholesky needs no such
//! trick since the matrix is symmetric.
//!
//! [`FactorKind::PositiveReal`] routes to the multifrontal LU without
//! pivoting in [`super::multifrontal`].

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use std::sync::Arc;

use faer::{MatMut, Side};

use super::multifrontal::{FrontalLu, FrontalSymbolic};
use super::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// LU with partial pivoting.
    General,
    /// Cholesky.
    Spd,
    /// Symmetric pattern and positive definite symmetric part; LU without
    /// pivoting under a fill-reducing symmetric ordering.
    PositiveReal,
}

enum Numeric {
    Lu(Lu<usize, f64>),
    Llt(Llt<usize, f64>),
    Frontal(FrontalLu),
}

/// Reusable numeric factorization of a square sparse matrix.
pub struct Factorization {
    n: usize,
    kind: FactorKind,
    numeric: Numeric,
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Factorization")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .finish()
    }
}

enum Symbolic {
    Lu(SymbolicLu<usize>),
    Llt(SymbolicLlt<usize>),
    Frontal(Arc<FrontalSymbolic>),
}

/// Holds the symbolic analysis of the last pattern it saw and reuses it
/// while subsequent matrices keep that pattern.
pub struct Factorizer {
    kind: FactorKind,
    pattern: Option<(Vec<usize>, Vec<usize>)>,
    symbolic: Option<Symbolic>,
    symbolic_runs: usize,
}

fn view(a: &CsrMatrix) -> SparseColMatRef<'_, usize, f64> {
    let sym = SymbolicSparseColMatRef::new_checked(a.ncols(), a.nrows(), a.row_ptr(), None, a.col_idx());
    SparseColMatRef::new(sym, a.values())
}

impl Factorizer {
    pub fn new(kind: FactorKind) -> Self {
        Self {
            kind,
            pattern: None,
            symbolic: None,
            symbolic_runs: 0,
        }
    }

    /// Number of symbolic analyses performed so far.
    pub fn symbolic_runs(&self) -> usize {
        self.symbolic_runs
    }

    pub fn factorize(&mut self, a: &CsrMatrix) -> Result<Factorization> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let reuse = matches!(&self.pattern, Some((rp, ci)) if rp == a.row_ptr() && ci == a.col_idx());
        if !reuse {
            let mat = view(a);
            let failed = |e: faer::sparse::FaerError| Error::Factorization {
                row: 0,
                reason: format!("symbolic analysis failed: {e:?}"),
            };
            let symbolic = match self.kind {
                FactorKind::General => Symbolic::Lu(SymbolicLu::try_new(mat.symbolic()).map_err(failed)?),
                FactorKind::Spd => Symbolic::Llt(SymbolicLlt::try_new(mat.symbolic(), Side::Lower).map_err(failed)?),
                FactorKind::PositiveReal => Symbolic::Frontal(FrontalSymbolic::analyze(a)?),
            };
            self.symbolic = Some(symbolic);
            self.pattern = Some((a.row_ptr().to_vec(), a.col_idx().to_vec()));
            self.symbolic_runs += 1;
        }
        let mat = view(a);
        let numeric = match self.symbolic.as_ref().expect("symbolic analysis present") {
            Symbolic::Lu(s) => Lu::try_new_with_symbolic(s.clone(), mat)
                .map(Numeric::Lu)
                .map_err(|e| match e {
                    faer::sparse::linalg::LuError::SymbolicSingular { index } => Error::Factorization {
                        row: index,
                        reason: "structurally singular".into(),
                    },
                    other => Error::Factorization {
                        row: 0,
                        reason: format!("{other:?}"),
                    },
                })?,
            Symbolic::Llt(s) => Llt::try_new_with_symbolic(s.clone(), mat, Side::Lower)
                .map(Numeric::Llt)
                .map_err(|e| match e {
                    faer::sparse::linalg::LltError::Numeric(
                        faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index },
                    ) => Error::Factorization {
                        // faer counts pivots from one
                        row: index.saturating_sub(1),
                        reason: "non-positive pivot".into(),
                    },
                    other => Error::Factorization {
                        row: 0,
                        reason: format!("{other:?}"),
                    },
                })?,
            Symbolic::Frontal(s) => Numeric::Frontal(s.factorize(a)?),
        };
        let f = Factorization {
            n: a.nrows(),
            kind: self.kind,
            numeric,
        };
        f.probe(a)?;
        Ok(f)
    }
}

/// One-shot factorization without symbolic reuse.
pub fn factorize(a: &CsrMatrix, kind: FactorKind) -> Result<Factorization> {
    Factorizer::new(kind).factorize(a)
}

impl Factorization {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: x.len(),
            });
        }
        let n = self.n;
        match &self.numeric {
            Numeric::Lu(lu) => lu.solve_transpose_in_place(MatMut::from_column_major_slice_mut(x, n, 1)),
            Numeric::Llt(llt) => llt.solve_in_place(MatMut::from_column_major_slice_mut(x, n, 1)),
            Numeric::Frontal(lu) => lu.solve_in_place(x),
        }
        Ok(())
    }

    /// Numerically singular pivots surface as non-finite values when solving
    /// against the row sums; the first offending row is reported.
    fn probe(&self, a: &CsrMatrix) -> Result<()> {
        let ones = vec![1.0; self.n];
        let b = a.mul_vec(&ones);
        let x = self.solve(&b)?;
        if let Some(row) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Factorization {
                row,
                reason: "numerically singular pivot".into(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve_is_noop() {
        let f = factorize(&CsrMatrix::identity(5), FactorKind::General).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        assert_eq!(f.solve(&b).unwrap(), b);
    }

    #[test]
    fn two_by_two_hand_solution() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)]);
        for kind in [FactorKind::General, FactorKind::Spd, FactorKind::PositiveReal] {
            let x = factorize(&a, kind).unwrap().solve(&[3.0, 3.0]).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn nonsymmetric_solve_uses_correct_orientation() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 1.0)]);
        let x = factorize(&a, FactorKind::General).unwrap().solve(&[5.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(matches!(
            factorize(&a, FactorKind::General),
            Err(Error::Factorization { .. })
        ));
        let empty_row = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0)]);
        assert!(matches!(
            factorize(&empty_row, FactorKind::General),
            Err(Error::Factorization { .. })
        ));
        let indefinite = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            factorize(&indefinite, FactorKind::Spd),
            Err(Error::Factorization { row: 1, .. })
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let f = factorize(&CsrMatrix::identity(3), FactorKind::General).unwrap();
        assert!(matches!(f.solve(&[1.0]), Err(Error::Dimension { expected: 3, got: 1 })));
    }

    #[test]
    fn symbolic_reused_for_same_pattern() {
        let mut fz = Factorizer::new(FactorKind::General);
        let mut a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)]);
        fz.factorize(&a).unwrap();
        a.values_mut()[0] = 4.0;
        let x = fz.factorize(&a).unwrap().solve(&[5.0, 3.0]).unwrap();
        assert_eq!(fz.symbolic_runs(), 1);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
