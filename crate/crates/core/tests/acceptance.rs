//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N [PASS|FAIL] ...` line to stderr (outside the test harness's
//! output capture) before asserting.

use std::io::Write;
use std::sync::Arc;

use ahns::anderson::AndersonConfig;
use ahns::fem::{assemble_convection, build_dofmap, BoundaryConditionSet, ElementPair};
use ahns::harness::{
    mms_convergence_study, run_single, run_sweep, MmsFlow, MmsStudy, Params, Problem, RunOutcome, RunSpec,
};
use ahns::mesh::{alfeld_split, build_step_channel_mesh, build_unit_square_mesh, Mesh};
use ahns::solvers::{solve_stokes_initial, Discretization, Method, NsConfig, NsSolver, State, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {n} [{verdict}] {detail}");
}

fn cavity(re: f64, element: ElementPair, h: f64) -> RunSpec {
    let mut spec = RunSpec::new(Problem::Cavity, re);
    spec.h = h;
    spec.ns.element = element;
    spec.write_vtk = false;
    spec
}

fn run(spec: &RunSpec) -> RunOutcome {
    run_single(spec).unwrap_or_else(|e| panic!("{}: {e}", spec.run_id()))
}

fn sweep(text: &str) -> Vec<(String, Option<usize>, bool)> {
    let p = Params::parse(text).unwrap();
    let out = run_sweep(&p.to_sweep().unwrap(), None).unwrap();
    out.entries.iter().map(|e| (e.id(), e.iterations(), e.converged())).collect()
}

#[test]
fn criterion_01_mms_orders() {
    let hs = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for element in [ElementPair::TaylorHood, ElementPair::ScottVogelius] {
        for flow in [MmsFlow::Stokes, MmsFlow::NavierStokes] {
            let table = mms_convergence_study(&hs, &MmsStudy::new(element, flow)).unwrap();
            let h1 = table.h1_velocity_orders();
            let pr = table.l2_pressure_orders();
            let min = h1.iter().chain(&pr).copied().fold(f64::INFINITY, f64::min);
            pass &= min >= 1.9;
            let fmt = |v: &[f64]| v.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>().join("/");
            parts.push(format!("{element} {flow:?}: H1 {} p {}", fmt(&h1), fmt(&pr)));
        }
    }
    report(1, pass, &format!("MMS orders over h 1/8..1/32 (need >= 1.9): {}", parts.join("; ")));
    assert!(pass, "MMS orders below 1.9: {parts:?}");
}

#[test]
fn criterion_02_skew_symmetry() {
    let square = build_unit_square_mesh(8).unwrap();
    let meshes: Vec<(&str, Mesh, ElementPair, BoundaryConditionSet)> = vec![
        ("square TH", square.clone(), ElementPair::TaylorHood, BoundaryConditionSet::cavity()),
        ("square SV", alfeld_split(&square).unwrap(), ElementPair::ScottVogelius, BoundaryConditionSet::cavity()),
        (
            "step TH",
            build_step_channel_mesh(1.0).unwrap(),
            ElementPair::TaylorHood,
            BoundaryConditionSet::step_channel(1.0),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for (_, mesh, pair, bcs) in meshes {
        let d = build_dofmap(Arc::new(mesh), pair, &bcs).unwrap();
        let n = d.velocity_dofs();
        for _ in 0..100 {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let nm = assemble_convection(&d, &u);
            let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
            let ratio = nm.bilinear(&v, &v).abs() / (norm(&u) * norm(&v).powi(2));
            worst = worst.max(ratio);
        }
    }
    let pass = worst <= 1e-12;
    report(2, pass, &format!("max |v'N(u)v| / (|u||v|^2) over 3 meshes x 100 pairs = {worst:.2e} (need <= 1e-12)"));
    assert!(pass);
}

#[test]
fn criterion_03_ipp_equivalence() {
    let eps = 0.1;
    let mesh = alfeld_split(&build_unit_square_mesh(16).unwrap()).unwrap();
    let d = Arc::new(build_dofmap(Arc::new(mesh), ElementPair::ScottVogelius, &BoundaryConditionSet::cavity()).unwrap());
    let disc = Arc::new(Discretization::unforced(d).unwrap());
    let mut ah_cfg = NsConfig::new(100.0).ipp_equivalent(eps);
    ah_cfg.method = Method::GradDivAh;
    let mut ipp_cfg = ah_cfg.clone();
    ipp_cfg.method = Method::Ipp;
    let alpha = ah_cfg.alpha;

    let mut ah = NsSolver::new(disc.clone(), ah_cfg).unwrap();
    let mut ipp = NsSolver::new(disc.clone(), ipp_cfg).unwrap();
    let start = solve_stokes_initial(&disc).unwrap();
    let (mut a, mut b) = (start.clone(), start);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        a = ah.graddiv_ah_step(&a).unwrap();
        b = ipp.ipp_step(&b).unwrap();
        let du: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
        let dp: Vec<f64> = a.p.iter().zip(&b.p).map(|(x, y)| x - y).collect();
        let norms = disc.norms();
        let rel = norms.h_norm(&du, &dp, alpha).unwrap() / norms.h_norm(&b.u, &b.p, alpha).unwrap();
        worst = worst.max(rel);
    }
    let pass = worst <= 1e-10;
    report(3, pass, &format!("grad-div AH vs IPP, 20 iterations, max relative H-norm gap {worst:.2e} (need <= 1e-10)"));
    assert!(pass);
}

#[test]
fn criterion_04_cavity_headline() {
    let mut spec = cavity(100.0, ElementPair::ScottVogelius, 1.0 / 32.0);
    spec.ns.gamma = 1.0;
    spec.ns.alpha = 100.0;
    spec.ns.rho = 20.0;
    let out = run(&spec);
    let k = out.trace.iterations();
    let pass = out.trace.converged() && (56..=104).contains(&k);
    report(4, pass, &format!("SV cavity Re=100: {} after {k} iterations (need converged in 56..=104)", out.trace.status));
    assert!(pass);
}

#[test]
fn criterion_05_taylor_hood_failure_mode() {
    let runs = sweep(
        "problem = cavity\nelement = th\ngamma = 0\nre = 100, 1000\nrho = 1, 5, 20, 50\nalpha = 1/nu\nmax_iters = 1000\nvtk = false",
    );
    let failed = runs.iter().filter(|r| !r.2).count();
    let pass = failed * 4 >= runs.len() * 3;
    report(5, pass, &format!("TH gamma=0: {failed} of {} runs fail to converge within 1000 iterations (need >= 75%)", runs.len()));
    assert!(pass, "{runs:?}");
}

#[test]
fn criterion_06_anderson_improvement() {
    let runs = sweep(
        "problem = cavity\nelement = sv\ngamma = 1\nre = 1000\nrho = 50\nalpha = 1/nu\ndepth = 0, 1, 5, 10\nmax_iters = 1000\nvtk = false",
    );
    let iters: Vec<usize> = runs
        .iter()
        .map(|r| if r.2 { r.1.unwrap() } else { usize::MAX })
        .collect();
    let (m0, m1, m5, m10) = (iters[0], iters[1], iters[2], iters[3]);
    let pass = m5 != usize::MAX && 2 * m5 <= m0 && m10 <= m1;
    let show = |k: usize| if k == usize::MAX { "none".to_string() } else { k.to_string() };
    report(
        6,
        pass,
        &format!(
            "SV Re=1000 rho=50: iterations m=0 {}, m=1 {}, m=5 {}, m=10 {} (need m5 <= m0/2 and m10 <= m1)",
            show(m0),
            show(m1),
            show(m5),
            show(m10)
        ),
    );
    assert!(pass, "{runs:?}");
}

#[test]
fn criterion_07_anderson_reduction_identity() {
    let mut spec = cavity(100.0, ElementPair::ScottVogelius, 1.0 / 16.0);
    spec.ns.rho = 20.0;
    spec.ns.alpha = 100.0;
    spec.ns.max_iters = 40;
    let plain = run(&spec);
    spec.anderson = Some(AndersonConfig::new(0).with_damping(1.0));
    let reduced = run(&spec);

    let bits = |s: &State| s.u.iter().chain(&s.p).map(|v| v.to_bits()).collect::<Vec<_>>();
    let upd = |o: &RunOutcome| o.trace.update_l2().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    let identical = bits(&plain.state) == bits(&reduced.state) && upd(&plain) == upd(&reduced);

    let mut thetas = reduced.trace.thetas();
    for (re, depth, beta) in [(100.0, 1, 1.0), (100.0, 5, 0.5), (1000.0, 10, 1.0)] {
        let mut s = cavity(re, ElementPair::ScottVogelius, 1.0 / 16.0);
        s.ns.rho = 20.0;
        s.ns.alpha = re;
        s.ns.max_iters = 200;
        s.anderson = Some(AndersonConfig::new(depth).with_damping(beta));
        thetas.extend(run(&s).trace.thetas());
    }
    let max_theta = thetas.iter().copied().fold(0.0, f64::max);
    let pass = identical && thetas.iter().all(|t| *t <= 1.0);
    report(
        7,
        pass,
        &format!(
            "m=0 beta=1 trace bit-identical to plain: {identical}; max theta over {} accelerated steps = {max_theta:.4} (need <= 1)",
            thetas.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_divergence_identity() {
    let mesh = alfeld_split(&build_unit_square_mesh(16).unwrap()).unwrap();
    let d = Arc::new(build_dofmap(Arc::new(mesh), ElementPair::ScottVogelius, &BoundaryConditionSet::cavity()).unwrap());
    let disc = Arc::new(Discretization::unforced(d).unwrap());
    let mut cfg = NsConfig::new(100.0);
    cfg.rho = 20.0;
    cfg.alpha = 100.0;
    cfg.gamma = 1.0;
    let mut solver = NsSolver::new(disc.clone(), cfg.clone()).unwrap();
    let mut s = solve_stokes_initial(&disc).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let next = solver.graddiv_ah_step(&s).unwrap();
        let div = disc.norms().divergence_l2(&next.u);
        let dp: Vec<f64> = next.p.iter().zip(&s.p).map(|(a, b)| a - b).collect();
        let jump = cfg.alpha / cfg.rho * disc.norms().l2_pressure(&dp);
        worst = worst.max((div - jump).abs() / div.max(jump).max(1.0));
        s = next;
    }
    let pass = worst <= 1e-12;
    report(8, pass, &format!("SV |div u| vs (alpha/rho)|p_new - p_old| over 30 steps, max gap {worst:.2e} (need <= 1e-12)"));
    assert!(pass);
}

#[test]
#[ignore = "long-running high-Reynolds cavity runs"]
fn criterion_09_high_reynolds_cavity() {
    let mut results = Vec::new();
    let mut pass = true;
    for (re, rho, gamma, band) in [(5000.0, 100.0, 1.0, 300..=700), (10000.0, 150.0, 10.0, 140..=400)] {
        let mut spec = cavity(re, ElementPair::ScottVogelius, 1.0 / 64.0);
        spec.ns.rho = rho;
        spec.ns.gamma = gamma;
        spec.ns.max_iters = 5000;
        spec.anderson = Some(AndersonConfig::new(100));
        let out = run(&spec);
        let k = out.trace.iterations();
        pass &= out.trace.converged() && band.contains(&k);
        results.push(format!("Re={re}: {} after {k} (band {band:?})", out.trace.status));
    }
    report(9, pass, &results.join("; "));
    assert!(pass);
}

#[test]
fn criterion_10_step_channel() {
    let runs = sweep(
        "problem = step\nh = 0.5\nre = 100\nelement = sv\ngamma = 10\nrho = 50, 100\nalpha = 1/nu, eps/nu\n\
         paired = rho, alpha\ndepth = 100\nmax_iters = 1000\nvtk = false",
    );
    let (ah, ipp) = (&runs[0], &runs[1]);
    let converged = ah.2;
    let ordered = ah.2 && (!ipp.2 || ipp.1.unwrap() > ah.1.unwrap());
    let pass = converged && ordered;
    let show = |r: &(String, Option<usize>, bool)| match (r.1, r.2) {
        (Some(k), true) => format!("converged in {k}"),
        (Some(k), false) => format!("not converged after {k}"),
        _ => "error".to_string(),
    };
    report(
        10,
        pass,
        &format!(
            "step Re=100 gamma=10 m=100: (rho=50, alpha=1/nu) {}; IPP parameters (rho=100, alpha=eps/nu) {} (need first converged, second slower)",
            show(ah),
            show(ipp)
        ),
    );
    assert!(converged, "{runs:?}");
    assert!(ordered, "IPP-parameter run was not slower: {runs:?}");
}

#[test]
fn diverged_status_is_reported() {
    // a guard that the driver's divergence path stays reachable from a full run
    let mut spec = cavity(1000.0, ElementPair::TaylorHood, 1.0 / 8.0);
    spec.ns.gamma = 0.0;
    spec.ns.rho = 5000.0;
    spec.ns.alpha = 1.0;
    spec.ns.max_iters = 200;
    let out = run(&spec);
    assert_ne!(out.trace.status, Status::Converged);
}
