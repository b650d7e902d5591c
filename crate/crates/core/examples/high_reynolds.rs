//! High-Reynolds cavity with deep Anderson acceleration. The default mesh
//! is h = 1/32; pass `--fine` for h = 1/64 (slow).

use ahns::anderson::AndersonConfig;
use ahns::harness::{run_single, Problem, RunSpec};

fn main() -> ahns::Result<()> {
    let fine = std::env::args().any(|a| a == "--fine");
    for (re, rho, gamma) in [(5000.0, 100.0, 1.0), (10000.0, 150.0, 10.0)] {
        let mut spec = RunSpec::new(Problem::Cavity, re);
        spec.h = if fine { 1.0 / 64.0 } else { 1.0 / 32.0 };
        spec.ns.rho = rho;
        spec.ns.gamma = gamma;
        spec.ns.max_iters = 5000;
        spec.anderson = Some(AndersonConfig::new(100));
        spec.write_vtk = false;
        let out = run_single(&spec)?;
        println!("{}", out.summary_line());
    }
    Ok(())
}
