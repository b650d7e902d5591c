use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Relative diagonal shift added to Gram systems, scaled by the mean diagonal.
pub const DEFAULT_GRAM_REGULARIZATION: f64 = 1e-12;

/// A small dense least-squares problem `min ‖target − Σ γᵢ columnsᵢ‖`.
#[derive(Debug, Clone, Default)]
pub struct DenseLsq {
    pub columns: Vec<Vec<f64>>,
    pub target: Vec<f64>,
}

impl DenseLsq {
    pub fn new(columns: Vec<Vec<f64>>, target: Vec<f64>) -> Self {
        Self { columns, target }
    }

    pub fn residual(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut r = self.target.clone();
        for (col, &g) in self.columns.iter().zip(coeffs) {
            for (ri, ci) in r.iter_mut().zip(col) {
                *ri -= g * ci;
            }
        }
        r
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes the residual in the norm induced by the symmetric positive
/// semidefinite `weight`, through the regularized Gram normal equations.
pub fn weighted_least_squares(problem: &DenseLsq, weight: &CsrMatrix) -> Result<Vec<f64>> {
    let n = problem.target.len();
    if weight.nrows() != n || weight.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: weight.nrows(),
        });
    }
    if let Some(bad) = problem.columns.iter().find(|c| c.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: bad.len(),
        });
    }
    let m = problem.columns.len();
    if m == 0 || problem.target.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; m]);
    }
    let weighted: Vec<Vec<f64>> = problem.columns.iter().map(|c| weight.mul_vec(c)).collect();
    let mut gram = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let g = dot(&problem.columns[j], &weighted[i]);
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let rhs: Vec<f64> = weighted.iter().map(|w| dot(w, &problem.target)).collect();
    Ok(solve_gram(&gram, &rhs, DEFAULT_GRAM_REGULARIZATION))
}

/// Solves `(G + λI) γ = rhs` with `λ = reg · trace(G) / m`, followed by one
/// step of iterative refinement toward `G γ = rhs`. A zero Gram matrix
/// yields zero coefficients.
pub fn solve_gram(gram: &[Vec<f64>], rhs: &[f64], reg: f64) -> Vec<f64> {
    let m = rhs.len();
    if m == 0 {
        return Vec::new();
    }
    let trace: f64 = (0..m).map(|i| gram[i][i]).sum();
    if !(trace > 0.0) {
        return vec![0.0; m];
    }
    let shift = reg * trace / m as f64;
    let g = Mat::<f64>::from_fn(m, m, |i, j| gram[i][j] + if i == j { shift } else { 0.0 });
    let b = Mat::<f64>::from_fn(m, 1, |i, _| rhs[i]);
    let solve: Box<dyn Fn(&Mat<f64>) -> Mat<f64>> = match g.llt(Side::Lower) {
        Ok(llt) => Box::new(move |r| llt.solve(r)),
        Err(_) => {
            let lu = g.partial_piv_lu();
            Box::new(move |r| lu.solve(r))
        }
    };
    let mut x = solve(&b);
    // one refinement step against the unshifted Gram matrix removes the
    // shift bias on well-conditioned problems and stays bounded otherwise
    let r = Mat::<f64>::from_fn(m, 1, |i, _| rhs[i] - (0..m).map(|j| gram[i][j] * x[(j, 0)]).sum::<f64>());
    let dx = solve(&r);
    x += &dx;
    (0..m).map(|i| x[(i, 0)]).collect()
}
