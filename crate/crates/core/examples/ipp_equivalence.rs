//! Grad-div AH with ρ = 1/ν, α = ε/ν, γ = 1/ε next to iterated penalty
//! Picard with penalty ε: the two iterations coincide step by step.

use std::sync::Arc;

use ahns::fem::{build_dofmap, BoundaryConditionSet, ElementPair};
use ahns::mesh::{alfeld_split, build_unit_square_mesh};
use ahns::solvers::{solve_stokes_initial, Discretization, Method, NsConfig, NsSolver};

fn main() -> ahns::Result<()> {
    let eps = 0.1;
    let mesh = alfeld_split(&build_unit_square_mesh(16)?)?;
    let d = build_dofmap(Arc::new(mesh), ElementPair::ScottVogelius, &BoundaryConditionSet::cavity())?;
    let disc = Arc::new(Discretization::unforced(Arc::new(d))?);

    let ah_cfg = NsConfig::new(100.0).ipp_equivalent(eps);
    let mut ipp_cfg = ah_cfg.clone();
    ipp_cfg.method = Method::Ipp;
    println!("rho = {}, alpha = {}, gamma = {}, eps = {eps}", ah_cfg.rho, ah_cfg.alpha, ah_cfg.gamma);

    let mut ah = NsSolver::new(disc.clone(), ah_cfg.clone())?;
    let mut ipp = NsSolver::new(disc.clone(), ipp_cfg)?;
    let mut a = solve_stokes_initial(&disc)?;
    let mut b = a.clone();
    let norms = disc.norms();
    for k in 1..=20 {
        let next_a = ah.graddiv_ah_step(&a)?;
        let next_b = ipp.ipp_step(&b)?;
        let du: Vec<f64> = next_a.u.iter().zip(&next_b.u).map(|(x, y)| x - y).collect();
        let dp: Vec<f64> = next_a.p.iter().zip(&next_b.p).map(|(x, y)| x - y).collect();
        let step: Vec<f64> = next_b.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
        let gap = norms.h_norm(&du, &dp, ah_cfg.alpha)? / norms.h_norm(&next_b.u, &next_b.p, ah_cfg.alpha)?;
        println!("iter {k:>2}: update {:.3e}, relative gap {gap:.2e}", norms.l2_velocity(&step));
        (a, b) = (next_a, next_b);
    }
    Ok(())
}
