//! Assembled operators against values computed by hand or by a second route.

use std::sync::Arc;

use ahns::fem::{
    assemble_convection, assemble_scalar_laplacian, assemble_scalar_mass, build_dofmap, BoundaryConditionSet, DofMap,
    ElementPair,
};
use ahns::mesh::{alfeld_split, build_step_channel_mesh, build_unit_square_mesh, Mesh, Point2};
use ahns::solvers::Discretization;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dofmap(mesh: Mesh, pair: ElementPair) -> Arc<DofMap> {
    Arc::new(build_dofmap(Arc::new(mesh), pair, &BoundaryConditionSet::cavity()).unwrap())
}

fn square(n: usize, pair: ElementPair) -> Arc<DofMap> {
    let m = build_unit_square_mesh(n).unwrap();
    match pair {
        ElementPair::ScottVogelius => dofmap(alfeld_split(&m).unwrap(), pair),
        ElementPair::TaylorHood => dofmap(m, pair),
    }
}

fn random(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn rel_gap(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let n: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / n
}

/// `G v` three ways: the assembled grad-div matrix, the element-local
/// penalty matrix, and `Bᵀ M_p⁻¹ B v` through the global pressure mass solve.
fn graddiv_routes(d: Arc<DofMap>, v: &[f64]) -> (Vec<f64>, Option<Vec<f64>>, Vec<f64>) {
    let disc = Discretization::unforced(d).unwrap();
    let direct = disc.graddiv().mul_vec(v);
    let local = disc.penalty().map(|p| p.mul_vec(v));
    let proj = disc.projected_divergence(v).unwrap();
    let mut via_mass = vec![0.0; v.len()];
    disc.divergence().mul_transpose_add(&proj, &mut via_mass);
    (direct, local, via_mass)
}

#[test]
fn scott_vogelius_graddiv_matches_projected_divergence() {
    let d = square(4, ElementPair::ScottVogelius);
    let v = random(d.velocity_dofs(), 11);
    let (direct, local, via_mass) = graddiv_routes(d, &v);
    assert!(rel_gap(&via_mass, &direct) < 1e-12, "{}", rel_gap(&via_mass, &direct));
    assert!(rel_gap(&local.unwrap(), &direct) < 1e-12);
}

#[test]
fn taylor_hood_graddiv_differs_from_projected_divergence() {
    // continuous P1 does not contain the divergence of P2 velocities
    let d = square(4, ElementPair::TaylorHood);
    let v = random(d.velocity_dofs(), 12);
    let (direct, local, via_mass) = graddiv_routes(d, &v);
    assert!(local.is_none());
    assert!(rel_gap(&via_mass, &direct) > 1e-2);
}

#[test]
fn scalar_mass_integrates_area() {
    for (mesh, area) in [
        (build_unit_square_mesh(5).unwrap(), 1.0),
        (build_step_channel_mesh(1.0).unwrap(), 399.0),
    ] {
        let d = dofmap(mesh, ElementPair::TaylorHood);
        let m = assemble_scalar_mass(&d);
        let ones = vec![1.0; m.nrows()];
        assert!((m.bilinear(&ones, &ones) - area).abs() < 1e-10 * area);
    }
}

#[test]
fn scalar_laplacian_energy_of_linear_function() {
    // ∫ |∇(2x − 3y)|² over the unit square is 13
    let d = square(6, ElementPair::TaylorHood);
    let k = assemble_scalar_laplacian(&d);
    let f: Vec<f64> = d.node_points().iter().map(|p| 2.0 * p.x - 3.0 * p.y).collect();
    assert!((k.bilinear(&f, &f) - 13.0).abs() < 1e-10);
    let ones = vec![1.0; f.len()];
    assert!(k.mul_vec(&ones).iter().all(|r| r.abs() < 1e-12));
}

#[test]
fn convection_of_linear_field_matches_hand_integral() {
    // u = (1, 0), v = (x, 0), w = (y, 0): ∫ (u·∇v)·w = 1/2 and
    // ∫ (u·∇w)·v = 0, so the skew form is 1/4
    let d = square(4, ElementPair::TaylorHood);
    let n = d.n_nodes();
    let pts = d.node_points();
    let mut u = vec![0.0; 2 * n];
    let mut v = vec![0.0; 2 * n];
    let mut w = vec![0.0; 2 * n];
    for (i, p) in pts.iter().enumerate() {
        u[i] = 1.0;
        v[i] = p.x;
        w[i] = p.y;
    }
    let nm = assemble_convection(&d, &u);
    assert!((nm.bilinear(&w, &v) - 0.25).abs() < 1e-12, "{}", nm.bilinear(&w, &v));
}

#[test]
fn interpolated_quadratic_is_exact() {
    let d = square(3, ElementPair::ScottVogelius);
    let f = |p: Point2| [p.x * p.y, p.y * p.y - p.x];
    let u = d.interpolate_velocity(f);
    let n = d.n_nodes();
    for (i, p) in d.node_points().iter().enumerate() {
        let e = f(*p);
        assert!((u[i] - e[0]).abs() < 1e-14 && (u[n + i] - e[1]).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn convection_is_skew(seed in any::<u64>(), n in 2usize..6, sv in any::<bool>()) {
        let pair = if sv { ElementPair::ScottVogelius } else { ElementPair::TaylorHood };
        let d = square(n, pair);
        let u = random(d.velocity_dofs(), seed);
        let v = random(d.velocity_dofs(), seed.wrapping_add(1));
        let w = random(d.velocity_dofs(), seed.wrapping_add(2));
        let nm = assemble_convection(&d, &u);
        let scale = nm.max_abs() * d.velocity_dofs() as f64;
        prop_assert!(nm.bilinear(&v, &v).abs() <= 1e-13 * scale);
        prop_assert!((nm.bilinear(&v, &w) + nm.bilinear(&w, &v)).abs() <= 1e-13 * scale);
    }

    #[test]
    fn graddiv_is_symmetric_positive_semidefinite(seed in any::<u64>()) {
        let d = square(3, ElementPair::TaylorHood);
        let disc = Discretization::unforced(d.clone()).unwrap();
        let v = random(d.velocity_dofs(), seed);
        let w = random(d.velocity_dofs(), seed ^ 0x5a5a);
        let g = disc.graddiv();
        prop_assert!(g.bilinear(&v, &v) >= -1e-12);
        prop_assert!((g.bilinear(&v, &w) - g.bilinear(&w, &v)).abs() < 1e-10);
    }
}
