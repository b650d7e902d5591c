//! Anderson acceleration on maps with known fixed points.

use ahns::anderson::{AndersonConfig, AndersonWorkspace, InnerProduct};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `g(x) = M x + b` with `‖M‖ ≤ 0.9` and its fixed point.
fn affine(n: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let s = m.norm();
    m *= 0.9 / s;
    let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let fixed = (DMatrix::identity(n, n) - &m).lu().solve(&b).unwrap();
    (m, b, fixed)
}

fn iterate(cfg: AndersonConfig, m: &DMatrix<f64>, b: &DVector<f64>, steps: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = b.len();
    let mut ws = AndersonWorkspace::new(cfg, None).unwrap();
    ws.start(&vec![0.0; n]);
    let mut xs = Vec::new();
    for _ in 0..steps {
        let x = ws
            .step(|x| Ok((m * DVector::from_column_slice(x) + b).as_slice().to_vec()))
            .unwrap();
        xs.push(x);
    }
    (xs, ws.gains().theta.clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn depth_zero_undamped_is_the_plain_iteration(n in 1usize..12, seed in any::<u64>()) {
        let (m, b, _) = affine(n, seed);
        let cfg = AndersonConfig::new(0).with_damping(1.0).with_inner_product(InnerProduct::Euclidean);
        let (xs, _) = iterate(cfg, &m, &b, 15);
        let mut x = DVector::zeros(n);
        for xa in xs {
            x = &m * &x + &b;
            prop_assert_eq!(xa, x.as_slice().to_vec());
        }
    }

    #[test]
    fn gains_never_exceed_one(n in 1usize..12, depth in 0usize..6, beta in 0.1f64..1.0, seed in any::<u64>()) {
        let (m, b, _) = affine(n, seed);
        let cfg = AndersonConfig::new(depth).with_damping(beta).with_inner_product(InnerProduct::Euclidean);
        let (_, thetas) = iterate(cfg, &m, &b, 25);
        prop_assert!(thetas.iter().all(|t| (0.0..=1.0).contains(t)));
    }

    #[test]
    fn full_depth_finds_affine_fixed_point(n in 1usize..8, seed in any::<u64>()) {
        // with a window at least n, the (n+1)-th residual combination spans
        // the whole space and the next iterate is the fixed point
        let (m, b, fixed) = affine(n, seed);
        let cfg = AndersonConfig::new(n).with_inner_product(InnerProduct::Euclidean);
        let (xs, _) = iterate(cfg, &m, &b, n + 3);
        let last = DVector::from_column_slice(xs.last().unwrap());
        prop_assert!((last - &fixed).norm() < 1e-6 * (1.0 + fixed.norm()));
    }
}

#[test]
fn acceleration_beats_plain_iteration_on_slow_contraction() {
    let n = 20;
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 0.95 - 0.01 * i as f64 } else { 0.0 });
    let b = DVector::from_element(n, 1.0);
    let fixed = (DMatrix::identity(n, n) - &m).lu().solve(&b).unwrap();
    let err = |cfg| {
        let (xs, _) = iterate(cfg, &m, &b, 30);
        (DVector::from_column_slice(xs.last().unwrap()) - &fixed).norm()
    };
    let plain = err(AndersonConfig::new(0));
    let accelerated = err(AndersonConfig::new(5).with_inner_product(InnerProduct::Euclidean));
    assert!(accelerated < 1e-3 * plain, "{accelerated} vs {plain}");
}
