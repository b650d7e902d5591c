//! Anderson depth sweep for the Re = 1000 cavity, with a convergence plot.
//!
//! cargo run --release --example anderson_depth [out_dir]

use std::path::PathBuf;

use ahns::harness::{run_sweep, Params};

fn main() -> ahns::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "out/anderson_depth".into()).into();
    let params = Params::parse(
        "problem = cavity
         re = 1000
         element = sv
         gamma = 1
         rho = 50
         alpha = 1/nu
         depth = 0, 1, 5, 10
         max_iters = 1000",
    )?;
    let sweep = run_sweep(&params.to_sweep()?, Some(&out))?;
    for e in &sweep.entries {
        let depth = e.spec.anderson.as_ref().map_or(0, |a| a.depth);
        match &e.result {
            Ok(s) => {
                let thetas = s.trace.thetas();
                let gain = match thetas.len() {
                    0 => "-".to_string(),
                    n => format!("{:.3}", thetas.iter().sum::<f64>() / n as f64),
                };
                println!("m = {depth:>2}: {} after {:>4} iterations, mean gain {gain}", s.status, s.iterations);
            }
            Err(msg) => println!("m = {depth:>2}: {msg}"),
        }
    }
    for a in &sweep.artifacts {
        println!("wrote {}", a.display());
    }
    Ok(())
}
