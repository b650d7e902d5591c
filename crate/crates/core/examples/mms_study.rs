//! Manufactured-solution convergence tables for both element pairs, Stokes
//! and Navier-Stokes.

use ahns::fem::ElementPair;
use ahns::harness::{mms_convergence_study, MmsFlow, MmsStudy};

fn main() -> ahns::Result<()> {
    let hs = [1.0 / 4.0, 1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
    for element in [ElementPair::TaylorHood, ElementPair::ScottVogelius] {
        for flow in [MmsFlow::Stokes, MmsFlow::NavierStokes] {
            let table = mms_convergence_study(&hs, &MmsStudy::new(element, flow))?;
            println!("{element}, {flow:?}\n{table}");
        }
    }
    Ok(())
}
