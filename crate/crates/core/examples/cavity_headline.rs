//! Lid-driven cavity at Re = 100 with grad-div Arrow-Hurwicz on
//! Scott-Vogelius elements, without acceleration.
//!
//! cargo run --release --example cavity_headline [out_dir]

use ahns::fem::ElementPair;
use ahns::harness::{run_single, Problem, RunSpec};

fn main() -> ahns::Result<()> {
    let mut spec = RunSpec::new(Problem::Cavity, 100.0);
    spec.h = 1.0 / 32.0;
    spec.ns.element = ElementPair::ScottVogelius;
    spec.ns.rho = 20.0;
    spec.ns.alpha = 100.0;
    spec.ns.gamma = 1.0;
    spec.out_dir = std::env::args().nth(1).map(Into::into);

    for d in spec.ns.diagnostics() {
        println!("note: {d}");
    }
    let out = run_single(&spec)?;
    println!("{}", out.summary_line());
    let updates = out.trace.update_l2();
    for (k, u) in updates.iter().enumerate().step_by(10) {
        println!("  iter {:>3}  |u_k - u_k-1| = {u:.3e}", k + 1);
    }
    for a in &out.artifacts {
        println!("wrote {}", a.display());
    }
    Ok(())
}
