//! Channel flow past a step at Re = 100, grad-div AH with depth-100
//! Anderson acceleration, and the velocity field as VTK.
//!
//! cargo run --release --example step_channel [out_dir]

use ahns::anderson::AndersonConfig;
use ahns::harness::{run_single, Problem, RunSpec};

fn main() -> ahns::Result<()> {
    let mut spec = RunSpec::new(Problem::Step, 100.0);
    spec.ns.gamma = 10.0;
    spec.ns.rho = 50.0;
    spec.ns.alpha = 100.0;
    spec.anderson = Some(AndersonConfig::new(100));
    spec.write_mesh = true;
    spec.out_dir = Some(std::env::args().nth(1).unwrap_or_else(|| "out/step_channel".into()).into());

    let d = spec.build_dofmap()?;
    println!("{} cells, {} velocity dofs, {} pressure dofs", d.n_cells(), d.velocity_dofs(), d.pressure_dofs());
    let out = run_single(&spec)?;
    println!("{}", out.summary_line());
    for a in &out.artifacts {
        println!("wrote {}", a.display());
    }
    Ok(())
}
