//! Every output format from one small sweep: per-run and merged trace CSV,
//! the run summary, an SVG convergence plot and VTK fields.
//!
//! cargo run --release --example export_outputs [out_dir]

use std::path::PathBuf;

use ahns::harness::{export_svg_plot, export_vtk, read_trace_csv, run_sweep, Params, PlotSeries};

fn main() -> ahns::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "out/export".into()).into();
    let mut params = Params::parse("problem = cavity\nh = 1/16\nre = 400\nrho = 40\nalpha = 1/nu\ndepth = 0, 10")?;
    params.set("vtk", "true")?;
    let sweep = run_sweep(&params.to_sweep()?, Some(&out))?;
    for a in &sweep.artifacts {
        println!("wrote {}", a.display());
    }

    // read the merged trace back and plot the divergence instead
    let records = read_trace_csv(out.join("sweep.csv"))?;
    let mut series: Vec<PlotSeries> = Vec::new();
    for r in records {
        if series.last().is_none_or(|s| s.label != r.run_id) {
            series.push(PlotSeries { label: r.run_id.clone(), values: Vec::new() });
        }
        series.last_mut().unwrap().values.push(r.div_l2);
    }
    let path = out.join("divergence.svg");
    export_svg_plot(&series, &path)?;
    println!("wrote {}", path.display());

    // a field file written directly from a final state
    let entry = &sweep.entries[1];
    let d = entry.spec.build_dofmap()?;
    let outcome = ahns::harness::run_single(&entry.spec)?;
    let path = out.join("final_state.vtk");
    export_vtk(&outcome.state, &d, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
