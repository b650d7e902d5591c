//! Taylor-Hood against Scott-Vogelius on the cavity: convergence of plain
//! Arrow-Hurwicz and the divergence left in the computed velocity.

use ahns::fem::ElementPair;
use ahns::harness::{run_single, Problem, RunSpec};

fn main() -> ahns::Result<()> {
    println!("{:<4} {:>6} {:>5} {:>10} {:>6} {:>12}", "pair", "gamma", "rho", "status", "iters", "|div u|");
    for element in [ElementPair::TaylorHood, ElementPair::ScottVogelius] {
        for gamma in [0.0, 1.0] {
            for rho in [5.0, 20.0] {
                let mut spec = RunSpec::new(Problem::Cavity, 100.0);
                spec.h = 1.0 / 16.0;
                spec.ns.element = element;
                spec.ns.gamma = gamma;
                spec.ns.rho = rho;
                spec.ns.alpha = 100.0;
                spec.ns.max_iters = 1000;
                let out = run_single(&spec)?;
                println!(
                    "{:<4} {:>6} {:>5} {:>10} {:>6} {:>12.3e}",
                    element.short_name(),
                    gamma,
                    rho,
                    out.trace.status.to_string(),
                    out.trace.iterations(),
                    out.trace.last().div_l2
                );
            }
        }
    }
    Ok(())
}
