//! Problem presets, single runs, parameter sweeps and their artifacts
//! (CSV traces, VTK fields, SVG convergence plots).

mod config;
mod mms;
mod output;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

pub use config::{parse_number, preset_names, AlphaSpec, Params, SWEEPABLE};
pub use mms::{mms_convergence_study, Manufactured, MmsErrors, MmsFlow, MmsRow, MmsStudy, RateTable};
pub use output::{export_svg_plot, read_trace_csv, trace_records, write_trace_csv, CsvRecord, PlotSeries};
pub use sweep::{run_sweep, RunSummary, SweepEntry, SweepOutcome};

use crate::anderson::{AndersonConfig, Damping, GainTrace};
use crate::error::{Error, Result};
use crate::fem::{build_dofmap, BoundaryConditionSet, DofMap, ElementPair};
use crate::mesh::{alfeld_split, build_step_channel_graded, build_step_channel_mesh, build_unit_square_mesh, Mesh};
use crate::solvers::{driver_with_gains, solve_stokes_initial, Discretization, IterationTrace, Method, NsConfig, NsSolver, State};
use crate::vtk::{write_mesh_vtk, write_solution_vtk};

/// Largest sweep accepted unless the configuration raises `max_runs`.
pub const DEFAULT_SWEEP_CAP: usize = 200;

/// End of the fine region of the graded step-channel mesh.
pub const STEP_FINE_UNTIL: f64 = 28.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// Lid-driven cavity on the unit square.
    Cavity,
    /// Channel flow past a step.
    Step,
    /// Manufactured smooth solution on the unit square.
    Mms,
}

impl Problem {
    pub fn default_re(self) -> f64 {
        match self {
            Problem::Cavity | Problem::Step => 100.0,
            Problem::Mms => 1.0,
        }
    }

    pub fn default_h(self) -> f64 {
        match self {
            Problem::Cavity => 1.0 / 32.0,
            Problem::Step => 0.5,
            Problem::Mms => 1.0 / 8.0,
        }
    }

    pub fn default_tol(self) -> f64 {
        match self {
            Problem::Mms => 1e-10,
            _ => 1e-6,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Cavity => "cavity",
            Problem::Step => "step",
            Problem::Mms => "mms",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cavity" => Ok(Problem::Cavity),
            "step" | "step_channel" | "channel" => Ok(Problem::Step),
            "mms" => Ok(Problem::Mms),
            other => Err(Error::config(format!("unknown problem `{other}`"))),
        }
    }
}

/// Step-channel grid: uniform spacing `h`, or `h` up to
/// [`STEP_FINE_UNTIL`] and `2h` beyond.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMesh {
    #[default]
    Graded,
    Uniform,
}

/// Everything one run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub name: Option<String>,
    pub problem: Problem,
    /// Mesh spacing before any Alfeld split.
    pub h: f64,
    pub step_mesh: StepMesh,
    /// Peak inflow speed of the step channel.
    pub u_max: f64,
    pub ns: NsConfig,
    pub anderson: Option<AndersonConfig>,
    pub out_dir: Option<PathBuf>,
    /// Final-state field file; sweeps leave it off unless asked.
    pub write_vtk: bool,
    pub write_mesh: bool,
}

impl RunSpec {
    /// Problem defaults at Reynolds number `re`.
    pub fn new(problem: Problem, re: f64) -> Self {
        let mut ns = NsConfig::new(re);
        ns.tol = problem.default_tol();
        Self {
            name: None,
            problem,
            h: problem.default_h(),
            step_mesh: StepMesh::Graded,
            u_max: 1.0,
            ns,
            anderson: None,
            out_dir: None,
            write_vtk: true,
            write_mesh: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ns.nu > 0.0) {
            return Err(Error::config("re must be positive"));
        }
        self.ns.validate()?;
        if let Some(aa) = &self.anderson {
            aa.validate()?;
        }
        match self.problem {
            Problem::Cavity | Problem::Mms => {
                unit_square_cells(self.h)?;
            }
            Problem::Step => {
                if !(self.h > 0.0 && self.h <= 1.0) {
                    return Err(Error::config(format!("step channel spacing must lie in (0, 1], got {}", self.h)));
                }
            }
        }
        Ok(())
    }

    /// The configured name, or one built from the parameters.
    pub fn run_id(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        let c = &self.ns;
        let method = match c.method {
            Method::Ah | Method::GradDivAh => "ah",
            Method::Ipp => "ipp",
            Method::Picard => "picard",
        };
        let mut id = format!(
            "{}_re{}_{}_{}_rho{}_alpha{}_gamma{}_m{}",
            self.problem,
            short(c.reynolds()),
            c.element.short_name().to_ascii_lowercase(),
            method,
            short(c.rho),
            short(c.alpha),
            short(c.gamma),
            self.anderson.as_ref().map_or(0, |a| a.depth),
        );
        if (self.h - self.problem.default_h()).abs() > 1e-14 {
            id += &format!("_h{}", short(self.h));
        }
        if let Some(Damping::Constant(b)) = self.anderson.as_ref().map(|a| &a.damping) {
            if *b != 1.0 {
                id += &format!("_beta{}", short(*b));
            }
        }
        if c.method == Method::Ipp {
            id += &format!("_eps{}", short(c.epsilon));
        }
        id
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        let base = match self.problem {
            Problem::Cavity | Problem::Mms => build_unit_square_mesh(unit_square_cells(self.h)?)?,
            Problem::Step => match self.step_mesh {
                StepMesh::Graded => build_step_channel_graded(self.h, 2.0 * self.h, STEP_FINE_UNTIL)?,
                StepMesh::Uniform => build_step_channel_mesh(self.h)?,
            },
        };
        match self.ns.element {
            ElementPair::ScottVogelius => alfeld_split(&base),
            ElementPair::TaylorHood => Ok(base),
        }
    }

    pub fn boundary_conditions(&self) -> BoundaryConditionSet {
        match self.problem {
            Problem::Cavity => BoundaryConditionSet::cavity(),
            Problem::Step => BoundaryConditionSet::step_channel(self.u_max),
            Problem::Mms => Manufactured::trigonometric().boundary_conditions(),
        }
    }

    pub fn build_dofmap(&self) -> Result<DofMap> {
        build_dofmap(Arc::new(self.build_mesh()?), self.ns.element, &self.boundary_conditions())
    }

    pub fn build_discretization(&self) -> Result<Discretization> {
        let d = Arc::new(self.build_dofmap()?);
        match self.problem {
            Problem::Mms => {
                let sol = Manufactured::trigonometric();
                let nu = self.ns.nu;
                Discretization::new(d, move |p| sol.forcing(p, nu, true))
            }
            _ => Discretization::unforced(d),
        }
    }
}

/// Cells per side of the unit square for spacing `h`.
fn unit_square_cells(h: f64) -> Result<usize> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::config(format!("h must lie in (0, 1], got {h}")));
    }
    let n = (1.0 / h).round();
    if ((1.0 / h) - n).abs() > 1e-9 * n {
        return Err(Error::config(format!("h = {h} does not divide the unit square")));
    }
    Ok(n as usize)
}

/// Compact number formatting for identifiers.
fn short(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Base values plus swept axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: BTreeMap<String, String>,
    pub axes: Vec<(String, Vec<String>)>,
    /// Axes varied together rather than crossed.
    pub paired: Vec<String>,
    pub cap: usize,
}

impl SweepSpec {
    pub fn new(
        base: BTreeMap<String, String>,
        axes: Vec<(String, Vec<String>)>,
        paired: Vec<String>,
        cap: usize,
    ) -> Result<Self> {
        let lens: Vec<usize> = paired
            .iter()
            .map(|k| {
                axes.iter()
                    .find(|(a, _)| a == k)
                    .map(|(_, v)| v.len())
                    .ok_or_else(|| Error::config(format!("paired key `{k}` has no value list")))
            })
            .collect::<Result<_>>()?;
        if lens.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::config("paired value lists must have equal lengths"));
        }
        Ok(Self { base, axes, paired, cap })
    }

    /// A sweep of exactly one run.
    pub fn single(base: BTreeMap<String, String>) -> Self {
        Self {
            base,
            axes: Vec::new(),
            paired: Vec::new(),
            cap: DEFAULT_SWEEP_CAP,
        }
    }

    pub fn len(&self) -> usize {
        let crossed: usize = self
            .axes
            .iter()
            .filter(|(k, _)| !self.paired.contains(k))
            .map(|(_, v)| v.len())
            .product();
        let paired = self
            .axes
            .iter()
            .find(|(k, _)| self.paired.contains(k))
            .map_or(1, |(_, v)| v.len());
        crossed * paired
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every run of the product, in a fixed order.
    pub fn expand(&self) -> Result<Vec<RunSpec>> {
        let n = self.len();
        if n > self.cap {
            return Err(Error::config(format!(
                "sweep has {n} runs, above the cap of {}; raise max_runs to allow it",
                self.cap
            )));
        }
        // one group per crossed axis, one for all paired axes together
        let mut groups: Vec<Vec<Vec<(String, String)>>> = Vec::new();
        let paired: Vec<&(String, Vec<String>)> = self.axes.iter().filter(|(k, _)| self.paired.contains(k)).collect();
        if let Some((_, first)) = paired.first() {
            groups.push(
                (0..first.len())
                    .map(|i| paired.iter().map(|(k, v)| (k.clone(), v[i].clone())).collect())
                    .collect(),
            );
        }
        for (k, v) in self.axes.iter().filter(|(k, _)| !self.paired.contains(k)) {
            groups.push(v.iter().map(|x| vec![(k.clone(), x.clone())]).collect());
        }
        let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for g in &groups {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    g.iter().map(move |choice| {
                        let mut c = c.clone();
                        c.extend(choice.iter().cloned());
                        c
                    })
                })
                .collect();
        }
        let mut runs = Vec::with_capacity(combos.len());
        for combo in combos {
            let mut values = self.base.clone();
            let prefix = values.remove("name");
            values.extend(combo);
            let mut spec = RunSpec::from_values(&values)?;
            if n > 1 && !self.base.contains_key("vtk") {
                spec.write_vtk = false;
            }
            if let Some(p) = prefix {
                spec.name = None;
                if n > 1 {
                    spec.name = Some(format!("{p}-{}", spec.run_id()));
                } else {
                    spec.name = Some(p);
                }
            }
            runs.push(spec);
        }
        let mut ids: Vec<String> = runs.iter().map(RunSpec::run_id).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::config(format!("sweep produces the run `{}` twice", w[0])));
        }
        Ok(runs)
    }
}

/// Result of [`run_single`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub id: String,
    pub spec: RunSpec,
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
    pub state: State,
    pub trace: IterationTrace,
    pub gains: Option<GainTrace>,
    /// Errors against the exact solution, for manufactured problems.
    pub mms_errors: Option<MmsErrors>,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    /// One line: identifier, status, iterations and final norms.
    pub fn summary_line(&self) -> String {
        let last = self.trace.last();
        let mut line = format!(
            "{}: {} after {} iterations, update {}, div {:.3e}, {} velocity dofs, {:.0} ms",
            self.id,
            self.trace.status,
            self.trace.iterations(),
            last.update.map_or("-".to_string(), |u| format!("{u:.3e}")),
            last.div_l2,
            self.velocity_dofs,
            last.wall_ms,
        );
        if let Some(e) = &self.mms_errors {
            line += &format!(
                ", errors: L2 {:.3e}, H1 {:.3e}, pressure {:.3e}",
                e.l2_velocity, e.h1_velocity, e.l2_pressure
            );
        }
        line
    }
}

/// Mesh, dof map, assembly, Stokes start and the fixed-point driver, then
/// the artifacts requested by `spec`. Failures carry the run identifier.
pub fn run_single(spec: &RunSpec) -> Result<RunOutcome> {
    let id = spec.run_id();
    run_inner(spec, &id).map_err(|e| Error::Run {
        run: id.clone(),
        source: Box::new(e),
    })
}

fn run_inner(spec: &RunSpec, id: &str) -> Result<RunOutcome> {
    spec.validate()?;
    let disc = Arc::new(spec.build_discretization()?);
    let initial = solve_stokes_initial(&disc)?;
    let mut solver = NsSolver::new(disc.clone(), spec.ns.clone())?;
    let (state, trace, gains) = driver_with_gains(initial, &mut solver, &spec.ns, spec.anderson.as_ref())?;
    let d = disc.dofmap();
    let mms_errors = (spec.problem == Problem::Mms).then(|| Manufactured::trigonometric().errors(d, &state));

    let mut artifacts = Vec::new();
    if let Some(dir) = &spec.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv = dir.join(format!("{id}.csv"));
        write_trace_csv(&csv, &[(id, &trace)])?;
        artifacts.push(csv);
        if spec.write_vtk {
            let path = dir.join(format!("{id}.vtk"));
            write_solution_vtk(d, &state, &path)?;
            artifacts.push(path);
        }
        if spec.write_mesh {
            let path = dir.join(format!("{id}_mesh.vtk"));
            write_mesh_vtk(d.mesh(), &path)?;
            artifacts.push(path);
        }
    }
    Ok(RunOutcome {
        id: id.to_string(),
        spec: spec.clone(),
        velocity_dofs: d.velocity_dofs(),
        pressure_dofs: d.pressure_dofs(),
        state,
        trace,
        gains,
        mms_errors,
        artifacts,
    })
}

/// Writes `state` as a VTK field file.
pub fn export_vtk(state: &State, dofmap: &DofMap, path: impl AsRef<Path>) -> Result<()> {
    write_solution_vtk(dofmap, state, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn run_ids_are_descriptive() {
        let s = RunSpec::from_values(&values(&[("re", "100"), ("rho", "20"), ("alpha", "100"), ("depth", "5")])).unwrap();
        assert_eq!(s.run_id(), "cavity_re100_sv_ah_rho20_alpha100_gamma1_m5");
    }

    #[test]
    fn empty_sweep_is_single_run() {
        let sweep = SweepSpec::single(values(&[("re", "100")]));
        assert_eq!(sweep.expand().unwrap().len(), 1);
    }

    #[test]
    fn sweep_cap_enforced() {
        let axes = vec![
            ("rho".to_string(), (1..=20).map(|i| i.to_string()).collect()),
            ("gamma".to_string(), (1..=11).map(|i| i.to_string()).collect()),
        ];
        let sweep = SweepSpec::new(BTreeMap::new(), axes, vec![], DEFAULT_SWEEP_CAP).unwrap();
        assert_eq!(sweep.len(), 220);
        let err = sweep.expand().unwrap_err().to_string();
        assert!(err.contains("cap"), "{err}");
    }

    #[test]
    fn paired_axes_vary_together() {
        let axes = vec![
            ("rho".to_string(), vec!["50".into(), "50".into(), "100".into()]),
            ("alpha".to_string(), vec!["1/nu".into(), "eps/nu".into(), "1/nu".into()]),
            ("depth".to_string(), vec!["0".into(), "10".into()]),
        ];
        let base = values(&[("gamma", "10")]);
        let sweep = SweepSpec::new(base, axes, vec!["rho".into(), "alpha".into()], DEFAULT_SWEEP_CAP).unwrap();
        let runs = sweep.expand().unwrap();
        assert_eq!(runs.len(), 6);
        assert_eq!(runs[0].ns.rho, 50.0);
        assert_eq!(runs[0].ns.alpha, 100.0);
        assert_eq!(runs[1].anderson.as_ref().unwrap().depth, 10);
        assert!((runs[2].ns.alpha - 10.0).abs() < 1e-9);
        assert_eq!(runs[4].ns.rho, 100.0);
        assert!(SweepSpec::new(
            BTreeMap::new(),
            vec![("rho".into(), vec!["1".into(), "2".into()]), ("alpha".into(), vec!["1".into()])],
            vec!["rho".into(), "alpha".into()],
            10
        )
        .is_err());
    }

    #[test]
    fn unit_square_spacing_checked() {
        assert_eq!(unit_square_cells(0.125).unwrap(), 8);
        assert!(unit_square_cells(0.3).is_err());
    }

    #[test]
    fn short_numbers() {
        assert_eq!(short(20.0), "20");
        assert_eq!(short(0.1), "0.1");
        assert_eq!(short(10.000000000000002), "10");
    }
}
