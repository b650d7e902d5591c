//! Manufactured solutions and discretization convergence studies.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{build_dofmap, pressure_error, velocity_errors, BoundaryConditionSet, DofMap, ElementPair, VelocityCondition};
use crate::mesh::{alfeld_split, build_unit_square_mesh, Point2};
use crate::solvers::{fixed_point_solve, solve_stokes_initial, Discretization, Method, NsConfig, NsSolver, State};

/// A divergence-free velocity and a zero-mean pressure on the unit square,
/// with the derivatives needed for the forcing and the error norms.
#[derive(Clone, Copy)]
pub struct Manufactured {
    pub velocity: fn(Point2) -> [f64; 2],
    /// `[[∂x u1, ∂y u1], [∂x u2, ∂y u2]]`.
    pub gradient: fn(Point2) -> [[f64; 2]; 2],
    pub laplacian: fn(Point2) -> [f64; 2],
    pub pressure: fn(Point2) -> f64,
    pub pressure_gradient: fn(Point2) -> [f64; 2],
}

impl fmt::Debug for Manufactured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Manufactured").finish_non_exhaustive()
    }
}

fn sin(v: f64) -> f64 {
    v.sin()
}

fn cos(v: f64) -> f64 {
    v.cos()
}

impl Manufactured {
    /// `u = (π sin²(πx) sin(2πy), −π sin(2πx) sin²(πy))`,
    /// `p = cos(πx) cos(πy)`; the velocity vanishes on the boundary.
    pub fn trigonometric() -> Self {
        Self {
            velocity: |p| {
                let (x, y) = (p.x, p.y);
                [
                    PI * sin(PI * x).powi(2) * sin(2.0 * PI * y),
                    -PI * sin(2.0 * PI * x) * sin(PI * y).powi(2),
                ]
            },
            gradient: |p| {
                let (x, y) = (p.x, p.y);
                let pi2 = PI * PI;
                [
                    [
                        pi2 * sin(2.0 * PI * x) * sin(2.0 * PI * y),
                        2.0 * pi2 * sin(PI * x).powi(2) * cos(2.0 * PI * y),
                    ],
                    [
                        -2.0 * pi2 * cos(2.0 * PI * x) * sin(PI * y).powi(2),
                        -pi2 * sin(2.0 * PI * x) * sin(2.0 * PI * y),
                    ],
                ]
            },
            laplacian: |p| {
                let (x, y) = (p.x, p.y);
                let pi3 = PI * PI * PI;
                [
                    2.0 * pi3 * cos(2.0 * PI * x) * sin(2.0 * PI * y)
                        - 4.0 * pi3 * sin(PI * x).powi(2) * sin(2.0 * PI * y),
                    4.0 * pi3 * sin(2.0 * PI * x) * sin(PI * y).powi(2)
                        - 2.0 * pi3 * sin(2.0 * PI * x) * cos(2.0 * PI * y),
                ]
            },
            pressure: |p| cos(PI * p.x) * cos(PI * p.y),
            pressure_gradient: |p| {
                [
                    -PI * sin(PI * p.x) * cos(PI * p.y),
                    -PI * cos(PI * p.x) * sin(PI * p.y),
                ]
            },
        }
    }

    /// `u = (y², x²)`, `p = x − 1/2`: inside both discrete spaces.
    pub fn polynomial() -> Self {
        Self {
            velocity: |p| [p.y * p.y, p.x * p.x],
            gradient: |p| [[0.0, 2.0 * p.y], [2.0 * p.x, 0.0]],
            laplacian: |_| [2.0, 2.0],
            pressure: |p| p.x - 0.5,
            pressure_gradient: |_| [1.0, 0.0],
        }
    }

    /// `−νΔu + ∇p`, plus `(u·∇)u` when `convection`.
    pub fn forcing(&self, p: Point2, nu: f64, convection: bool) -> [f64; 2] {
        let lap = (self.laplacian)(p);
        let gp = (self.pressure_gradient)(p);
        let mut f = [-nu * lap[0] + gp[0], -nu * lap[1] + gp[1]];
        if convection {
            let u = (self.velocity)(p);
            let g = (self.gradient)(p);
            for (i, fi) in f.iter_mut().enumerate() {
                *fi += u[0] * g[i][0] + u[1] * g[i][1];
            }
        }
        f
    }

    /// The exact velocity on every boundary edge of the unit square.
    pub fn boundary_conditions(&self) -> BoundaryConditionSet {
        let v = self.velocity;
        let exact = VelocityCondition::Profile(Arc::new(v));
        BoundaryConditionSet {
            lid: exact.clone(),
            wall: exact.clone(),
            inflow: exact.clone(),
            outflow: exact,
        }
    }

    pub fn errors(&self, d: &DofMap, state: &State) -> MmsErrors {
        let (l2_velocity, h1_velocity) = velocity_errors(d, &state.u, self.velocity, self.gradient);
        MmsErrors {
            l2_velocity,
            h1_velocity,
            l2_pressure: pressure_error(d, &state.p, self.pressure),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsErrors {
    pub l2_velocity: f64,
    pub h1_velocity: f64,
    pub l2_pressure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MmsFlow {
    /// Unit-viscosity Stokes.
    Stokes,
    /// Navier-Stokes solved by Picard iteration from the Stokes solution.
    NavierStokes,
}

#[derive(Debug, Clone)]
pub struct MmsStudy {
    pub solution: Manufactured,
    pub element: ElementPair,
    pub flow: MmsFlow,
    pub nu: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl MmsStudy {
    pub fn new(element: ElementPair, flow: MmsFlow) -> Self {
        Self {
            solution: Manufactured::trigonometric(),
            element,
            flow,
            nu: 1.0,
            tol: 1e-10,
            max_iters: 100,
        }
    }

    /// Solves on the uniform mesh of spacing `h`.
    pub fn solve(&self, h: f64) -> Result<MmsRow> {
        let n = (1.0 / h).round() as usize;
        if n == 0 || ((1.0 / h) - n as f64).abs() > 1e-9 * n as f64 {
            return Err(Error::config(format!("h = {h} does not divide the unit square")));
        }
        let mut mesh = build_unit_square_mesh(n)?;
        if self.element == ElementPair::ScottVogelius {
            mesh = alfeld_split(&mesh)?;
        }
        let d = Arc::new(build_dofmap(Arc::new(mesh), self.element, &self.solution.boundary_conditions())?);
        let sol = self.solution;
        let (state, iterations) = match self.flow {
            MmsFlow::Stokes => {
                let disc = Discretization::new(d.clone(), move |p| sol.forcing(p, 1.0, false))?;
                (solve_stokes_initial(&disc)?, 0)
            }
            MmsFlow::NavierStokes => {
                let nu = self.nu;
                let disc = Arc::new(Discretization::new(d.clone(), move |p| sol.forcing(p, nu, true))?);
                let initial = solve_stokes_initial(&disc)?;
                let mut config = NsConfig::new(1.0 / nu);
                config.element = self.element;
                config.method = Method::Picard;
                config.gamma = 0.0;
                config.tol = self.tol;
                config.max_iters = self.max_iters;
                let mut solver = NsSolver::new(disc, config.clone())?;
                let (s, trace) = fixed_point_solve(initial, &mut solver, &config, None)?;
                if !trace.converged() {
                    return Err(Error::config(format!(
                        "Picard iteration did not converge at h = {h}: {} after {} iterations",
                        trace.status,
                        trace.iterations()
                    )));
                }
                (s, trace.iterations())
            }
        };
        let e = sol.errors(&d, &state);
        Ok(MmsRow {
            h,
            velocity_dofs: d.velocity_dofs(),
            pressure_dofs: d.pressure_dofs(),
            errors: e,
            iterations,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsRow {
    pub h: f64,
    pub velocity_dofs: usize,
    pub pressure_dofs: usize,
    pub errors: MmsErrors,
    /// Nonlinear iterations; zero for Stokes.
    pub iterations: usize,
}

/// Errors per mesh and the observed orders between consecutive meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<MmsRow>,
}

impl RateTable {
    fn orders(&self, pick: impl Fn(&MmsErrors) -> f64) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (pick(&w[0].errors) / pick(&w[1].errors)).ln() / (w[0].h / w[1].h).ln())
            .collect()
    }

    pub fn l2_velocity_orders(&self) -> Vec<f64> {
        self.orders(|e| e.l2_velocity)
    }

    pub fn h1_velocity_orders(&self) -> Vec<f64> {
        self.orders(|e| e.h1_velocity)
    }

    pub fn l2_pressure_orders(&self) -> Vec<f64> {
        self.orders(|e| e.l2_pressure)
    }
}

impl fmt::Display for RateTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10} {:>9} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}",
            "h", "u dofs", "|u-uh|", "rate", "|grad e|", "rate", "|p-ph|", "rate"
        )?;
        let (l2, h1, pr) = (self.l2_velocity_orders(), self.h1_velocity_orders(), self.l2_pressure_orders());
        for (i, r) in self.rows.iter().enumerate() {
            let rate = |v: &[f64]| match i {
                0 => "-".to_string(),
                _ => format!("{:.2}", v[i - 1]),
            };
            writeln!(
                f,
                "{:>10.5} {:>9} {:>12.4e} {:>6} {:>12.4e} {:>6} {:>12.4e} {:>6}",
                r.h,
                r.velocity_dofs,
                r.errors.l2_velocity,
                rate(&l2),
                r.errors.h1_velocity,
                rate(&h1),
                r.errors.l2_pressure,
                rate(&pr)
            )?;
        }
        Ok(())
    }
}

/// Runs `study` on each spacing of `h_list`, coarse to fine.
pub fn mms_convergence_study(h_list: &[f64], study: &MmsStudy) -> Result<RateTable> {
    if h_list.is_empty() {
        return Err(Error::config("empty list of mesh sizes"));
    }
    let rows = h_list.iter().map(|&h| study.solve(h)).collect::<Result<Vec<_>>>()?;
    Ok(RateTable { rows })
}
