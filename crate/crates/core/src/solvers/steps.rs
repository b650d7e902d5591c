use std::sync::Arc;

use super::{Discretization, Method, NsConfig, State};
use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, assemble_convection, assemble_scalar_convection, constrain_rows, eliminate_rhs, DirichletSet,
    ElementPair,
};
use crate::sparse::{CsrMatrix, FactorKind, Factorizer};

/// A fixed-point map on `(u, p)` iterates.
pub trait Stepper {
    fn step(&mut self, state: &State) -> Result<State>;

    fn discretization(&self) -> &Discretization;
}

/// The four steppers over one discretization. Factorizers keep the symbolic
/// analysis of each system pattern across iterations.
pub struct NsSolver {
    disc: Arc<Discretization>,
    config: NsConfig,
    velocity: Factorizer,
    scalar: Factorizer,
    coupled: Factorizer,
}

impl NsSolver {
    pub fn new(disc: Arc<Discretization>, config: NsConfig) -> Result<Self> {
        config.validate()?;
        if config.element != disc.dofmap().pair() {
            return Err(Error::config(format!(
                "configuration asks for {} elements but the discretization uses {}",
                config.element,
                disc.dofmap().pair()
            )));
        }
        // with a penalty block the coupled IPP matrix has a positive definite
        // symmetric part; Picard's zero block needs pivoting
        let coupled = match config.method {
            Method::Ipp => FactorKind::PositiveReal,
            _ => FactorKind::General,
        };
        Ok(Self {
            disc,
            config,
            velocity: Factorizer::new(FactorKind::PositiveReal),
            scalar: Factorizer::new(FactorKind::PositiveReal),
            coupled: Factorizer::new(coupled),
        })
    }

    pub fn config(&self) -> &NsConfig {
        &self.config
    }

    pub fn disc(&self) -> &Arc<Discretization> {
        &self.disc
    }

    /// Arrow-Hurwicz: velocity from `(1/ρ)A + N(u^m)`, explicit pressure
    /// update. Any grad-div parameter in the configuration is ignored.
    pub fn ah_step(&mut self, s: &State) -> Result<State> {
        self.arrow_hurwicz(s, 0.0)
    }

    /// Arrow-Hurwicz with `γG` added to the velocity matrix.
    pub fn graddiv_ah_step(&mut self, s: &State) -> Result<State> {
        self.arrow_hurwicz(s, self.config.gamma)
    }

    fn arrow_hurwicz(&mut self, s: &State, gamma: f64) -> Result<State> {
        let d = &*self.disc;
        let c = &self.config;
        let inv_rho = 1.0 / c.rho;
        // f + (1/ρ − ν) A u^m + Bᵀ p^m
        let mut rhs = d.forcing().to_vec();
        let au = d.laplacian().mul_vec(&s.u);
        let shift = inv_rho - c.nu;
        for (r, a) in rhs.iter_mut().zip(&au) {
            *r += shift * a;
        }
        d.divergence().mul_transpose_add(&s.p, &mut rhs);

        let u = if gamma == 0.0 {
            solve_componentwise(d, &mut self.scalar, inv_rho, &s.u, rhs)?
        } else {
            let n = assemble_convection(d.dofmap(), &s.u);
            let mut k = CsrMatrix::combine(&[(inv_rho, d.laplacian()), (gamma, d.graddiv()), (1.0, &n)]);
            apply_dirichlet(&mut k, &mut rhs, d.velocity_dirichlet());
            self.velocity.factorize(&k)?.solve(&rhs)?
        };
        let p = self.pressure_update(&s.p, &u, c.rho / c.alpha)?;
        Ok(State { u, p })
    }

    /// `p − s · M_p⁻¹ B u`, mean-normalized for enclosed flows.
    fn pressure_update(&self, p_old: &[f64], u: &[f64], s: f64) -> Result<Vec<f64>> {
        let div = self.disc.projected_divergence(u)?;
        let mut p: Vec<f64> = p_old.iter().zip(&div).map(|(p, d)| p - s * d).collect();
        self.disc.normalize_pressure(&mut p);
        Ok(p)
    }

    /// Iterated penalty Picard with penalty `ε`. Discontinuous pressures are
    /// eliminated element by element; continuous ones are solved coupled.
    pub fn ipp_step(&mut self, s: &State) -> Result<State> {
        let d = &*self.disc;
        let c = &self.config;
        let eps = c.epsilon;
        let n = assemble_convection(d.dofmap(), &s.u);
        match d.dofmap().pair() {
            ElementPair::ScottVogelius => {
                let penalty = d.penalty().expect("penalty assembled for discontinuous pressure");
                let mut k = CsrMatrix::combine(&[(c.nu, d.laplacian()), (1.0, &n), (1.0 / eps, penalty)]);
                let mut rhs = d.forcing().to_vec();
                d.divergence().mul_transpose_add(&s.p, &mut rhs);
                apply_dirichlet(&mut k, &mut rhs, d.velocity_dirichlet());
                let u = self.velocity.factorize(&k)?.solve(&rhs)?;
                let p = self.pressure_update(&s.p, &u, 1.0 / eps)?;
                Ok(State { u, p })
            }
            ElementPair::TaylorHood => {
                let k = CsrMatrix::combine(&[(c.nu, d.laplacian()), (1.0, &n)]);
                let mut dblock = d.pressure_mass().clone();
                dblock.scale(eps);
                let g = dblock.mul_vec(&s.p);
                let mut out = d.solve_coupled(&mut self.coupled, &k, Some(&dblock), d.forcing(), &g)?;
                d.normalize_pressure(&mut out.p);
                Ok(out)
            }
        }
    }

    /// Coupled Picard: `[[νA + N(u^m) + γG, −Bᵀ], [B, 0]]`.
    pub fn picard_step(&mut self, s: &State) -> Result<State> {
        let d = &*self.disc;
        let c = &self.config;
        let n = assemble_convection(d.dofmap(), &s.u);
        let k = CsrMatrix::combine(&[(c.nu, d.laplacian()), (1.0, &n), (c.gamma, d.graddiv())]);
        let g = vec![0.0; d.pressure_dofs()];
        d.solve_coupled(&mut self.coupled, &k, None, d.forcing(), &g)
    }

    /// Symbolic analyses performed by all factorizers so far.
    pub fn symbolic_runs(&self) -> usize {
        self.velocity.symbolic_runs() + self.scalar.symbolic_runs() + self.coupled.symbolic_runs()
    }
}

/// Without grad-div the velocity matrix is block diagonal with two equal
/// blocks, so both components share one scalar factorization.
fn solve_componentwise(
    d: &Discretization,
    factorizer: &mut Factorizer,
    inv_rho: f64,
    u_old: &[f64],
    rhs: Vec<f64>,
) -> Result<Vec<f64>> {
    let n = d.dofmap().n_nodes();
    let conv = assemble_scalar_convection(d.dofmap(), u_old);
    let mut k = CsrMatrix::combine(&[(inv_rho, d.scalar_laplacian()), (1.0, &conv)]);
    let bc = d.velocity_dirichlet();
    let half = |r: std::ops::Range<usize>| DirichletSet {
        mask: bc.mask[r.clone()].to_vec(),
        values: bc.values[r].to_vec(),
    };
    let (bx, by) = (half(0..n), half(n..2 * n));
    let mut rx = rhs[..n].to_vec();
    let mut ry = rhs[n..].to_vec();
    eliminate_rhs(&k, &mut rx, &bx);
    eliminate_rhs(&k, &mut ry, &by);
    debug_assert_eq!(bx.mask, by.mask);
    constrain_rows(&mut k, &bx.mask);
    let f = factorizer.factorize(&k)?;
    f.solve_in_place(&mut rx)?;
    f.solve_in_place(&mut ry)?;
    rx.extend_from_slice(&ry);
    Ok(rx)
}

impl Stepper for NsSolver {
    fn step(&mut self, state: &State) -> Result<State> {
        match self.config.method {
            Method::Ah => self.ah_step(state),
            Method::GradDivAh => self.graddiv_ah_step(state),
            Method::Ipp => self.ipp_step(state),
            Method::Picard => self.picard_step(state),
        }
    }

    fn discretization(&self) -> &Discretization {
        &self.disc
    }
}
