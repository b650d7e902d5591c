//! P2 velocity spaces paired with continuous (Taylor-Hood) or discontinuous
//! (Scott-Vogelius) P1 pressures, and the operators assembled on them.

mod assembly;
mod basis;
mod bc;
mod dofmap;
mod norms;
mod quadrature;

pub use assembly::{
    apply_dirichlet, assemble_convection, assemble_divergence, assemble_graddiv, assemble_penalty,
    assemble_pressure_mass, assemble_rhs, assemble_scalar_convection, assemble_scalar_laplacian,
    assemble_scalar_mass, assemble_vector_laplacian, assemble_velocity_mass, constrain_rows, eliminate_rhs, pressure_mean,
    remove_pressure_mean,
};
pub use basis::{p1_values, p2_gradients, p2_values, ElementGeometry, EDGE_VERTICES};
pub use bc::{BoundaryConditionSet, VelocityCondition, VelocityField};
pub use dofmap::{build_dofmap, DirichletSet, DofMap, ElementLayout, ElementPair};
pub use norms::{divergence_l2, pressure_error, velocity_errors, FieldNorms, NormMatrices};
pub use quadrature::QuadratureRule;
