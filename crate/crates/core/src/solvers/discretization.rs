use std::sync::Arc;

use super::State;
use crate::error::Result;
use crate::fem::{
    apply_dirichlet, assemble_divergence, assemble_penalty, assemble_rhs, assemble_scalar_laplacian, remove_pressure_mean,
    DirichletSet, DofMap, ElementPair, NormMatrices,
};
use crate::mesh::Point2;
use crate::sparse::{factorize, CsrMatrix, FactorKind, Factorization, Factorizer};

/// Every iteration-independent operator of one discrete problem.
pub struct Discretization {
    dofmap: Arc<DofMap>,
    norms: NormMatrices,
    scalar_laplacian: CsrMatrix,
    divergence: CsrMatrix,
    neg_divergence_t: CsrMatrix,
    penalty: Option<CsrMatrix>,
    forcing: Vec<f64>,
    pressure_mass_factor: Factorization,
    zero_pressure_block: CsrMatrix,
    coupled_dirichlet: DirichletSet,
}

impl std::fmt::Debug for Discretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Discretization").field("dofmap", &self.dofmap).finish_non_exhaustive()
    }
}

impl Discretization {
    pub fn new(dofmap: Arc<DofMap>, forcing: impl Fn(Point2) -> [f64; 2] + Sync) -> Result<Self> {
        let forcing = assemble_rhs(&dofmap, forcing);
        Self::with_load(dofmap, forcing)
    }

    pub fn unforced(dofmap: Arc<DofMap>) -> Result<Self> {
        let n = dofmap.velocity_dofs();
        Self::with_load(dofmap, vec![0.0; n])
    }

    /// Uses an already assembled load vector `(f, φ_i)`.
    pub fn with_load(dofmap: Arc<DofMap>, forcing: Vec<f64>) -> Result<Self> {
        let d = &*dofmap;
        let norms = NormMatrices::new(dofmap.clone());
        let divergence = assemble_divergence(d);
        let mut neg_divergence_t = divergence.transpose();
        neg_divergence_t.scale(-1.0);
        let penalty = match d.pair() {
            ElementPair::ScottVogelius => Some(assemble_penalty(d)?),
            ElementPair::TaylorHood => None,
        };
        let pressure_mass_factor = factorize(&norms.pressure_mass, FactorKind::Spd)?;
        let np = d.pressure_dofs();
        let mut zero_pressure_block = CsrMatrix::identity(np);
        zero_pressure_block.scale(0.0);
        let nu = d.velocity_dofs();
        let mut coupled_dirichlet = d.dirichlet().padded(nu + np);
        if d.pressure_null_space() {
            // pin one pressure value; the mean is removed afterwards
            coupled_dirichlet.constrain(nu, 0.0);
        }
        Ok(Self {
            scalar_laplacian: assemble_scalar_laplacian(d),
            dofmap,
            norms,
            divergence,
            neg_divergence_t,
            penalty,
            forcing,
            pressure_mass_factor,
            zero_pressure_block,
            coupled_dirichlet,
        })
    }

    pub fn dofmap(&self) -> &Arc<DofMap> {
        &self.dofmap
    }

    pub fn norms(&self) -> &NormMatrices {
        &self.norms
    }

    pub fn velocity_dofs(&self) -> usize {
        self.dofmap.velocity_dofs()
    }

    pub fn pressure_dofs(&self) -> usize {
        self.dofmap.pressure_dofs()
    }

    /// Vector Laplacian `(∇u, ∇v)`.
    pub fn laplacian(&self) -> &CsrMatrix {
        &self.norms.laplacian
    }

    pub fn scalar_laplacian(&self) -> &CsrMatrix {
        &self.scalar_laplacian
    }

    pub fn graddiv(&self) -> &CsrMatrix {
        &self.norms.graddiv
    }

    pub fn pressure_mass(&self) -> &CsrMatrix {
        &self.norms.pressure_mass
    }

    pub fn velocity_mass(&self) -> &CsrMatrix {
        &self.norms.velocity_mass
    }

    /// `B`, pressure rows by velocity columns.
    pub fn divergence(&self) -> &CsrMatrix {
        &self.divergence
    }

    /// `Bᵀ M_p⁻¹ B`, available for discontinuous pressures only.
    pub fn penalty(&self) -> Option<&CsrMatrix> {
        self.penalty.as_ref()
    }

    pub fn forcing(&self) -> &[f64] {
        &self.forcing
    }

    pub fn velocity_dirichlet(&self) -> &DirichletSet {
        self.dofmap.dirichlet()
    }

    /// `M_p⁻¹ B u`: the L2 projection of `∇·u` onto the pressure space.
    pub fn projected_divergence(&self, u: &[f64]) -> Result<Vec<f64>> {
        let bu = self.divergence.mul_vec(u);
        self.pressure_mass_factor.solve(&bu)
    }

    pub fn solve_pressure_mass(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.pressure_mass_factor.solve(rhs)
    }

    /// Removes the pressure mean when the pressure is only determined up to a
    /// constant.
    pub fn normalize_pressure(&self, p: &mut [f64]) {
        if self.dofmap.pressure_null_space() {
            remove_pressure_mean(&self.norms.pressure_mass, p);
        }
    }

    /// Solves `[[k, −Bᵀ], [B, d]] (u, p) = (f, g)` with the velocity
    /// boundary data imposed, and the pressure pinned when it has a null
    /// space and `d` is singular. A pinned pressure is mean-normalized.
    pub(crate) fn solve_coupled(
        &self,
        factorizer: &mut Factorizer,
        k: &CsrMatrix,
        d: Option<&CsrMatrix>,
        f: &[f64],
        g: &[f64],
    ) -> Result<State> {
        let nu = self.velocity_dofs();
        let pin = d.is_none();
        let d = d.unwrap_or(&self.zero_pressure_block);
        let mut m = CsrMatrix::block_2x2(k, Some(&self.neg_divergence_t), Some(&self.divergence), Some(d), self.pressure_dofs());
        let mut rhs = Vec::with_capacity(m.nrows());
        rhs.extend_from_slice(f);
        rhs.extend_from_slice(g);
        if pin {
            apply_dirichlet(&mut m, &mut rhs, &self.coupled_dirichlet);
        } else {
            let bc = self.dofmap.dirichlet().padded(m.nrows());
            apply_dirichlet(&mut m, &mut rhs, &bc);
        }
        let x = factorizer.factorize(&m)?.solve(&rhs)?;
        let mut s = State::split(&x, nu);
        if pin {
            self.normalize_pressure(&mut s.p);
        }
        Ok(s)
    }
}

/// Stokes problem with unit viscosity and the full boundary data: the
/// starting iterate of every method.
pub fn solve_stokes_initial(disc: &Discretization) -> Result<State> {
    let g = vec![0.0; disc.pressure_dofs()];
    disc.solve_coupled(&mut Factorizer::new(FactorKind::General), disc.laplacian(), None, disc.forcing(), &g)
}
