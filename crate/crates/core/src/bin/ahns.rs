//! Command-line front end: single runs, sweeps, presets and MMS studies.

use std::path::PathBuf;
use std::process::ExitCode;

use ahns::fem::ElementPair;
use ahns::harness::{
    mms_convergence_study, parse_number, preset_names, run_single, run_sweep, MmsFlow, MmsStudy, Params, RunSpec,
};
use ahns::Error;
use clap::Parser;

#[derive(Parser, Debug)]
#[command(name = "ahns", version, about = "Steady Navier-Stokes fixed-point solvers and benchmark runs")]
struct Cli {
    /// Configuration file of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Shipped configuration (fig1 ... fig9), applied before --config.
    #[arg(long)]
    preset: Option<String>,
    /// cavity, step or mms.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    re: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    /// A number, `1/nu` or `eps/nu`.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Anderson depth m; 0 disables acceleration.
    #[arg(long)]
    depth: Option<String>,
    /// Anderson damping.
    #[arg(long)]
    beta: Option<String>,
    /// th or sv.
    #[arg(long)]
    element: Option<String>,
    /// Mesh spacing, e.g. 1/32.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    /// ah, graddiv-ah, ipp or picard.
    #[arg(long)]
    method: Option<String>,
    /// Output directory for CSV, VTK and SVG files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any other configuration key, as KEY=VALUE.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Run a manufactured-solution convergence study over these spacings
    /// (e.g. 1/8,1/16,1/32) instead of a solve.
    #[arg(long, value_delimiter = ',')]
    mms_study: Option<Vec<String>>,
    /// List the shipped presets and exit.
    #[arg(long)]
    list_presets: bool,
}

fn params(cli: &Cli) -> ahns::Result<Params> {
    let mut p = match &cli.preset {
        Some(name) => Params::preset(name)?,
        None => Params::new(),
    };
    if let Some(path) = &cli.config {
        p.merge(&Params::from_file(path)?);
    }
    let mut flags = Params::new();
    let pairs = [
        ("problem", &cli.problem),
        ("re", &cli.re),
        ("rho", &cli.rho),
        ("alpha", &cli.alpha),
        ("gamma", &cli.gamma),
        ("depth", &cli.depth),
        ("beta", &cli.beta),
        ("element", &cli.element),
        ("h", &cli.h),
        ("tol", &cli.tol),
        ("max_iters", &cli.max_iters),
        ("method", &cli.method),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            flags.set(k, v)?;
        }
    }
    if let Some(out) = &cli.out {
        flags.set("out", &out.to_string_lossy())?;
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        flags.set(k, v)?;
    }
    p.merge(&flags);
    Ok(p)
}

fn run(cli: &Cli) -> ahns::Result<()> {
    if cli.list_presets {
        for name in preset_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let p = params(cli)?;
    if let Some(hs) = &cli.mms_study {
        let hs = hs.iter().map(|h| parse_number(h)).collect::<ahns::Result<Vec<_>>>()?;
        let element: ElementPair = p.get("element").map_or(Ok(ElementPair::ScottVogelius), |v| v[0].parse())?;
        for flow in [MmsFlow::Stokes, MmsFlow::NavierStokes] {
            let table = mms_convergence_study(&hs, &MmsStudy::new(element, flow))?;
            println!("{element} {flow:?}\n{table}");
        }
        return Ok(());
    }
    let sweep = p.to_sweep()?;
    if p.is_sweep() {
        let outcome = run_sweep(&sweep, p.out_dir().as_deref())?;
        for e in &outcome.entries {
            match &e.result {
                Ok(s) => println!("{}: {} after {} iterations", s.id, s.status, s.iterations),
                Err(msg) => println!("{}: error: {msg}", e.id()),
            }
        }
        for a in &outcome.artifacts {
            println!("wrote {}", a.display());
        }
    } else {
        let spec = RunSpec::from_values(&sweep.base)?;
        for d in spec.ns.diagnostics() {
            eprintln!("warning: {d}");
        }
        let outcome = run_single(&spec)?;
        println!("{}", outcome.summary_line());
        for a in &outcome.artifacts {
            println!("wrote {}", a.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let config = match &e {
                Error::Config(_) => true,
                Error::Run { source, .. } => matches!(**source, Error::Config(_)),
                _ => false,
            };
            if config {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
