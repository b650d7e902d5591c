//! Multifrontal LU without pivoting for matrices with a symmetric sparsity
//! pattern whose symmetric part is positive definite.
//!
//! For such matrices every leading principal submatrix is nonsingular under
//! any symmetric permutation, so the fill-reducing ordering and supernode
//! structure of a Cholesky analysis carry over unchanged to LU. The symbolic
//! phase is delegated to `faer` (AMD plus relaxed supernodes); the numeric
//! phase below assembles one dense frontal matrix per supernode.

use std::sync::Arc;

use faer::linalg::matmul::matmul;
use faer::linalg::triangular_solve::solve_unit_lower_triangular_in_place;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymbolicCholeskyRaw, SymmetricOrdering,
};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::SymbolicSparseColMatRef;
use faer::{Accum, MatMut, MatRef, Par, Side};

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Symbolic analysis: permutation, supernode partition and assembly tree.
#[derive(Debug, Clone)]
pub struct FrontalSymbolic {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    /// `inv[old] = new`.
    inv: Vec<usize>,
    begin: Vec<usize>,
    /// Off-diagonal row indices of each supernode, in permuted numbering.
    rows: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    /// Position of the transposed entry for every stored entry of the matrix.
    transpose_pos: Vec<usize>,
}

/// Numeric factors: per supernode, the `f × k` column panel holding
/// `L11\U11` and `L21`, and the `k × r` block `U12`.
#[derive(Debug, Clone)]
pub struct FrontalLu {
    symbolic: Arc<FrontalSymbolic>,
    panels: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
}

impl FrontalSymbolic {
    pub fn analyze(a: &CsrMatrix) -> Result<Arc<Self>> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: a.ncols(),
            });
        }
        let transpose_pos = transpose_positions(a)?;
        let pattern = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let params = CholeskySymbolicParams {
            supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
            ..Default::default()
        };
        let sym = factorize_symbolic_cholesky(pattern, Side::Upper, SymmetricOrdering::Amd, params).map_err(|e| {
            Error::Factorization {
                row: 0,
                reason: format!("symbolic analysis failed: {e:?}"),
            }
        })?;
        let (perm, inv) = match sym.perm() {
            Some(p) => {
                let (fwd, inv) = p.arrays();
                (fwd.to_vec(), inv.to_vec())
            }
            None => ((0..n).collect(), (0..n).collect()),
        };
        let (begin, rows): (Vec<usize>, Vec<Vec<usize>>) = match sym.raw() {
            SymbolicCholeskyRaw::Supernodal(sn) => {
                let ns = sn.n_supernodes();
                let begin = sn.supernode_begin().iter().copied().chain([n]).take(ns + 1).collect();
                (begin, (0..ns).map(|s| sn.supernode(s).pattern().to_vec()).collect())
            }
            // tiny problems may still come back simplicial: one column per supernode
            SymbolicCholeskyRaw::Simplicial(sp) => {
                let (cp, ri) = (sp.col_ptr(), sp.row_idx());
                let rows = (0..n).map(|j| ri[cp[j]..cp[j + 1]].iter().copied().filter(|&r| r > j).collect());
                ((0..=n).collect(), rows.collect())
            }
        };
        let ns = rows.len();
        let mut owner = vec![0usize; n];
        for s in 0..ns {
            owner[begin[s]..begin[s + 1]].fill(s);
        }
        let mut children = vec![Vec::new(); ns];
        for s in 0..ns {
            if let Some(&r) = rows[s].first() {
                children[owner[r]].push(s);
            }
        }
        Ok(Arc::new(Self {
            n,
            perm,
            inv,
            begin,
            rows,
            children,
            transpose_pos,
        }))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn n_supernodes(&self) -> usize {
        self.rows.len()
    }

    /// Stored entries of `L` and `U` together, including the diagonal once.
    pub fn factor_nnz(&self) -> usize {
        (0..self.n_supernodes())
            .map(|s| {
                let k = self.begin[s + 1] - self.begin[s];
                k * k + 2 * k * self.rows[s].len()
            })
            .sum()
    }

    pub fn factorize(self: &Arc<Self>, a: &CsrMatrix) -> Result<FrontalLu> {
        if a.nrows() != self.n || a.nnz() != self.transpose_pos.len() {
            return Err(Error::Dimension {
                expected: self.n,
                got: a.nrows(),
            });
        }
        let ns = self.n_supernodes();
        let vals = a.values();
        let (rp, ci) = (a.row_ptr(), a.col_idx());
        let mut loc = vec![usize::MAX; self.n];
        let mut updates: Vec<Option<Vec<f64>>> = vec![None; ns];
        let mut panels = Vec::with_capacity(ns);
        let mut upper = Vec::with_capacity(ns);

        for s in 0..ns {
            let (c0, c1) = (self.begin[s], self.begin[s + 1]);
            let k = c1 - c0;
            let rows = &self.rows[s];
            let r = rows.len();
            let f = k + r;
            for (i, g) in (c0..c1).chain(rows.iter().copied()).enumerate() {
                loc[g] = i;
            }
            let mut front = vec![0.0; f * f];

            // original entries: rows and columns of the pivot block
            for p in 0..k {
                let orig = self.perm[c0 + p];
                for e in rp[orig]..rp[orig + 1] {
                    let pc = self.inv[ci[e]];
                    if pc < c0 {
                        continue;
                    }
                    let j = loc[pc];
                    debug_assert!(j < f, "entry outside the front");
                    front[p + j * f] += vals[e];
                    if j >= k {
                        front[j + p * f] += vals[self.transpose_pos[e]];
                    }
                }
            }
            // extend-add of the children's Schur complements
            for &c in &self.children[s] {
                let upd = updates[c].take().expect("child processed before parent");
                let crows = &self.rows[c];
                let m = crows.len();
                for (b, &gb) in crows.iter().enumerate() {
                    let jb = loc[gb] * f;
                    for (a_, &ga) in crows.iter().enumerate() {
                        front[loc[ga] + jb] += upd[a_ + b * m];
                    }
                }
            }

            // unblocked LU of the f × k column panel
            for p in 0..k {
                let piv = front[p + p * f];
                if piv == 0.0 || !piv.is_finite() {
                    return Err(Error::Factorization {
                        row: self.perm[c0 + p],
                        reason: "zero pivot without pivoting".into(),
                    });
                }
                let inv_piv = 1.0 / piv;
                let col_p = p * f;
                for i in p + 1..f {
                    front[i + col_p] *= inv_piv;
                }
                for j in p + 1..k {
                    let u = front[p + j * f];
                    if u == 0.0 {
                        continue;
                    }
                    let (head, tail) = front.split_at_mut(j * f);
                    let lcol = &head[col_p..col_p + f];
                    let dst = &mut tail[..f];
                    for i in p + 1..f {
                        dst[i] -= lcol[i] * u;
                    }
                }
            }

            let (left, right) = front.split_at_mut(k * f);
            if r > 0 {
                let panel = MatRef::from_column_major_slice(&*left, f, k);
                let l11 = panel.subrows(0, k);
                let l21 = panel.subrows(k, r);
                let right = MatMut::from_column_major_slice_mut(right, f, r);
                let (mut u12, f22) = right.split_at_row_mut(k);
                solve_unit_lower_triangular_in_place(l11, u12.as_mut(), Par::Seq);
                matmul(f22, Accum::Add, l21, u12.as_ref(), -1.0, Par::Seq);
            }
            let mut u12 = Vec::with_capacity(k * r);
            let mut schur = Vec::with_capacity(r * r);
            for j in 0..r {
                let col = &right[j * f..(j + 1) * f];
                u12.extend_from_slice(&col[..k]);
                schur.extend_from_slice(&col[k..]);
            }
            if r > 0 {
                updates[s] = Some(schur);
            }
            panels.push(left.to_vec());
            upper.push(u12);
            for g in (c0..c1).chain(rows.iter().copied()) {
                loc[g] = usize::MAX;
            }
        }
        Ok(FrontalLu {
            symbolic: Arc::clone(self),
            panels,
            upper,
        })
    }
}

impl FrontalLu {
    pub fn dim(&self) -> usize {
        self.symbolic.n
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let sym = &self.symbolic;
        let mut y: Vec<f64> = sym.perm.iter().map(|&o| x[o]).collect();
        let ns = sym.n_supernodes();
        // L y = b
        for s in 0..ns {
            let (c0, c1) = (sym.begin[s], sym.begin[s + 1]);
            let k = c1 - c0;
            let rows = &sym.rows[s];
            let f = k + rows.len();
            let panel = &self.panels[s];
            for p in 0..k {
                let yp = y[c0 + p];
                if yp == 0.0 {
                    continue;
                }
                let col = &panel[p * f..(p + 1) * f];
                for i in p + 1..k {
                    y[c0 + i] -= col[i] * yp;
                }
                for (i, &g) in rows.iter().enumerate() {
                    y[g] -= col[k + i] * yp;
                }
            }
        }
        // U x = y
        for s in (0..ns).rev() {
            let (c0, c1) = (sym.begin[s], sym.begin[s + 1]);
            let k = c1 - c0;
            let rows = &sym.rows[s];
            let f = k + rows.len();
            let panel = &self.panels[s];
            let u12 = &self.upper[s];
            for (j, &g) in rows.iter().enumerate() {
                let yg = y[g];
                if yg == 0.0 {
                    continue;
                }
                let col = &u12[j * k..(j + 1) * k];
                for i in 0..k {
                    y[c0 + i] -= col[i] * yg;
                }
            }
            for p in (0..k).rev() {
                let col = &panel[p * f..p * f + k];
                let v = y[c0 + p] / col[p];
                y[c0 + p] = v;
                for i in 0..p {
                    y[c0 + i] -= col[i] * v;
                }
            }
        }
        for (new, &old) in sym.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }
}

/// For each stored entry `(i, j)` the position of `(j, i)`; fails when the
/// pattern is not symmetric.
fn transpose_positions(a: &CsrMatrix) -> Result<Vec<usize>> {
    let n = a.nrows();
    let (rp, ci) = (a.row_ptr(), a.col_idx());
    let mut cursor = rp[..n].to_vec();
    let mut out = vec![usize::MAX; ci.len()];
    // rows are visited in increasing order, so for column j the entries
    // (i, j) arrive with increasing i, matching the sorted row j
    for i in 0..n {
        for e in rp[i]..rp[i + 1] {
            let j = ci[e];
            let t = cursor[j];
            if t >= rp[j + 1] || ci[t] != i {
                return Err(Error::Factorization {
                    row: i,
                    reason: "sparsity pattern is not symmetric".into(),
                });
            }
            out[e] = t;
            cursor[j] += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random positive-real matrix on a symmetric pattern: diagonally
    /// dominant symmetric part plus a skew part of comparable size.
    fn random_positive_real(n: usize, density: f64, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        let mut diag = vec![1.0; n];
        for i in 0..n {
            for j in 0..i {
                if rng.random::<f64>() < density {
                    let s: f64 = rng.random_range(-1.0..1.0);
                    let k: f64 = rng.random_range(-2.0..2.0);
                    t.push((i, j, s + k));
                    t.push((j, i, s - k));
                    diag[i] += s.abs();
                    diag[j] += s.abs();
                }
            }
        }
        for (i, d) in diag.into_iter().enumerate() {
            t.push((i, i, d));
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x).iter().zip(b).map(|(ax, b)| (ax - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn solves_random_positive_real_systems() {
        for (n, density, seed) in [(1, 0.0, 1), (7, 0.5, 2), (60, 0.1, 3), (300, 0.02, 4)] {
            let a = random_positive_real(n, density, seed);
            let lu = FrontalSymbolic::analyze(&a).unwrap().factorize(&a).unwrap();
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut x = b.clone();
            lu.solve_in_place(&mut x);
            assert!(residual(&a, &x, &b) < 1e-11, "n = {n}");
        }
    }

    #[test]
    fn symbolic_reused_across_values() {
        let mut a = random_positive_real(80, 0.08, 9);
        let sym = FrontalSymbolic::analyze(&a).unwrap();
        for v in a.values_mut() {
            *v *= 1.5;
        }
        let lu = sym.factorize(&a).unwrap();
        let b = vec![1.0; 80];
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        assert!(residual(&a, &x, &b) < 1e-11);
    }

    #[test]
    fn rejects_unsymmetric_pattern() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]);
        assert!(FrontalSymbolic::analyze(&a).is_err());
    }

    #[test]
    fn zero_pivot_reported() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 0.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0)]);
        let sym = FrontalSymbolic::analyze(&a).unwrap();
        assert!(matches!(sym.factorize(&a), Err(Error::Factorization { .. })));
    }
}
