//! Sparse kernels and factorizations checked against dense nalgebra.

use ahns::sparse::{factorize, solve_gram, weighted_least_squares, CsrMatrix, DenseLsq, FactorKind, Factorizer};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    let rows = a.to_dense();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| rows[i][j])
}

/// Random matrix with a symmetric pattern and a diagonally dominant,
/// unsymmetric part on top of an SPD-ish diagonal.
fn positive_real(n: usize, density: f64, skew: f64, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut row_sum = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            if rng.random_bool(density) {
                let s: f64 = rng.random_range(-1.0..1.0);
                let k: f64 = skew * rng.random_range(-1.0..1.0);
                t.push((i, j, s + k));
                t.push((j, i, s - k));
                row_sum[i] += (s + k).abs();
                row_sum[j] += (s - k).abs();
            }
        }
    }
    for (i, r) in row_sum.iter().enumerate() {
        t.push((i, i, r + 1.0));
    }
    CsrMatrix::from_triplets(n, n, &t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matvec_and_transpose_match_dense(n in 1usize..40, seed in any::<u64>()) {
        let a = positive_real(n, 0.2, 3.0, seed);
        let d = dense(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = a.mul_vec(&x);
        let yd = &d * DVector::from_vec(x.clone());
        for i in 0..n {
            prop_assert!((y[i] - yd[i]).abs() < 1e-12);
        }
        let mut z = vec![0.0; n];
        a.mul_transpose_add(&x, &mut z);
        let zd = d.transpose() * DVector::from_vec(x.clone());
        for i in 0..n {
            prop_assert!((z[i] - zd[i]).abs() < 1e-12);
        }
        prop_assert_eq!(dense(&a.transpose()), d.transpose());
    }

    #[test]
    fn factorizations_agree_with_dense_lu(n in 1usize..80, seed in any::<u64>(), skew in 0.0f64..4.0) {
        let a = positive_real(n, 0.1, skew, seed);
        let d = dense(&a);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
        let xd = d.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for kind in [FactorKind::General, FactorKind::PositiveReal] {
            let x = factorize(&a, kind).unwrap().solve(&b).unwrap();
            for i in 0..n {
                prop_assert!((x[i] - xd[i]).abs() < 1e-9 * (1.0 + xd[i].abs()), "{kind:?} row {i}");
            }
        }
    }

    #[test]
    fn gram_solve_matches_normal_equations(m in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 30;
        let cols: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let target: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = DMatrix::from_fn(n, m, |i, j| cols[j][i]);
        let g = c.transpose() * &c;
        let rhs = c.transpose() * DVector::from_vec(target.clone());
        let expect = g.clone().cholesky().unwrap().solve(&rhs);

        let gram: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| g[(i, j)]).collect()).collect();
        let got = solve_gram(&gram, rhs.as_slice(), 1e-12);
        let lsq = weighted_least_squares(&DenseLsq::new(cols, target), &CsrMatrix::identity(n)).unwrap();
        for j in 0..m {
            prop_assert!((got[j] - expect[j]).abs() < 1e-8 * (1.0 + expect[j].abs()));
            prop_assert!((lsq[j] - expect[j]).abs() < 1e-8 * (1.0 + expect[j].abs()));
        }
    }
}

#[test]
fn spd_cholesky_matches_dense() {
    let a = positive_real(50, 0.15, 0.0, 3);
    let b: Vec<f64> = (0..50).map(|i| i as f64).collect();
    let x = factorize(&a, FactorKind::Spd).unwrap().solve(&b).unwrap();
    let xd = dense(&a).cholesky().unwrap().solve(&DVector::from_vec(b));
    for i in 0..50 {
        assert!((x[i] - xd[i]).abs() < 1e-10);
    }
}

#[test]
fn factorizer_reuses_symbolic_analysis() {
    let mut f = Factorizer::new(FactorKind::PositiveReal);
    let a = positive_real(40, 0.2, 1.0, 5);
    let mut b = a.clone();
    b.scale(2.0);
    f.factorize(&a).unwrap();
    f.factorize(&b).unwrap();
    assert_eq!(f.symbolic_runs(), 1);
    f.factorize(&positive_real(40, 0.2, 1.0, 6)).unwrap();
    assert_eq!(f.symbolic_runs(), 2);
}

#[test]
fn singular_matrix_is_reported() {
    let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
    assert!(factorize(&a, FactorKind::PositiveReal).and_then(|f| f.solve(&[1.0, 1.0])).is_err());
}
