use std::sync::Arc;

use rayon::prelude::*;

use super::assembly::{
    assemble_graddiv, assemble_pressure_mass, assemble_vector_laplacian, assemble_velocity_mass, ElementQuadrature,
};
use super::dofmap::DofMap;
use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};
use crate::mesh::Point2;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldNorms {
    pub l2_velocity: f64,
    pub h1_seminorm_velocity: f64,
    pub l2_pressure: f64,
    pub divergence_l2: f64,
}

fn energy(m: &CsrMatrix, x: &[f64]) -> f64 {
    m.bilinear(x, x).max(0.0).sqrt()
}

/// Matrices defining the discrete norms of a (velocity, pressure) pair.
#[derive(Debug, Clone)]
pub struct NormMatrices {
    dofmap: Arc<DofMap>,
    pub velocity_mass: CsrMatrix,
    pub laplacian: CsrMatrix,
    pub graddiv: CsrMatrix,
    pub pressure_mass: CsrMatrix,
}

impl NormMatrices {
    pub fn new(dofmap: Arc<DofMap>) -> Self {
        let d = &*dofmap;
        Self {
            velocity_mass: assemble_velocity_mass(d),
            laplacian: assemble_vector_laplacian(d),
            graddiv: assemble_graddiv(d),
            pressure_mass: assemble_pressure_mass(d),
            dofmap,
        }
    }

    /// Reuses already assembled operators.
    pub fn from_parts(
        dofmap: Arc<DofMap>,
        velocity_mass: CsrMatrix,
        laplacian: CsrMatrix,
        graddiv: CsrMatrix,
        pressure_mass: CsrMatrix,
    ) -> Self {
        Self {
            dofmap,
            velocity_mass,
            laplacian,
            graddiv,
            pressure_mass,
        }
    }

    pub fn dofmap(&self) -> &Arc<DofMap> {
        &self.dofmap
    }

    pub fn l2_velocity(&self, u: &[f64]) -> f64 {
        energy(&self.velocity_mass, u)
    }

    pub fn h1_seminorm(&self, u: &[f64]) -> f64 {
        energy(&self.laplacian, u)
    }

    pub fn l2_pressure(&self, p: &[f64]) -> f64 {
        energy(&self.pressure_mass, p)
    }

    /// `‖∇·u‖`, integrated element by element; equal to `sqrt(uᵀGu)` but
    /// free of the cancellation in the global quadratic form when the
    /// divergence is small.
    pub fn divergence_l2(&self, u: &[f64]) -> f64 {
        divergence_l2(&self.dofmap, u)
    }

    /// `sqrt(‖∇u‖² + α‖p‖²)`.
    pub fn h_norm(&self, u: &[f64], p: &[f64], alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::config(format!("H-norm needs alpha > 0, got {alpha}")));
        }
        let a = self.laplacian.bilinear(u, u).max(0.0);
        let m = self.pressure_mass.bilinear(p, p).max(0.0);
        Ok((a + alpha * m).sqrt())
    }

    pub fn all(&self, u: &[f64], p: &[f64]) -> FieldNorms {
        FieldNorms {
            l2_velocity: self.l2_velocity(u),
            h1_seminorm_velocity: self.h1_seminorm(u),
            l2_pressure: self.l2_pressure(p),
            divergence_l2: self.divergence_l2(u),
        }
    }
}

pub fn divergence_l2(d: &DofMap, u: &[f64]) -> f64 {
    let rule = QuadratureRule::degree5();
    let n = d.n_nodes();
    let parts: Vec<f64> = (0..d.n_cells())
        .into_par_iter()
        .map(|t| {
            let eq = ElementQuadrature::new(d, t, &rule);
            let cell = d.velocity_cell(t);
            let mut s = 0.0;
            for q in 0..eq.len() {
                let mut div = 0.0;
                for k in 0..6 {
                    div += u[cell[k]] * eq.dphi[q][k][0] + u[n + cell[k]] * eq.dphi[q][k][1];
                }
                s += eq.jw[q] * div * div;
            }
            s
        })
        .collect();
    parts.iter().sum::<f64>().sqrt()
}

/// Errors of a discrete velocity against an exact field and its gradient
/// `[[∂x u1, ∂y u1], [∂x u2, ∂y u2]]`: returns `(‖u − u_h‖, ‖∇(u − u_h)‖)`.
pub fn velocity_errors(
    d: &DofMap,
    u: &[f64],
    exact: impl Fn(Point2) -> [f64; 2] + Sync,
    exact_grad: impl Fn(Point2) -> [[f64; 2]; 2] + Sync,
) -> (f64, f64) {
    let rule = QuadratureRule::degree5();
    let n = d.n_nodes();
    let parts: Vec<(f64, f64)> = (0..d.n_cells())
        .into_par_iter()
        .map(|t| {
            let eq = ElementQuadrature::new(d, t, &rule);
            let cell = d.velocity_cell(t);
            let (mut l2, mut h1) = (0.0, 0.0);
            for q in 0..eq.len() {
                let mut uh = [0.0; 2];
                let mut gh = [[0.0; 2]; 2];
                for k in 0..6 {
                    let c = [u[cell[k]], u[n + cell[k]]];
                    for comp in 0..2 {
                        uh[comp] += c[comp] * eq.phi[q][k];
                        gh[comp][0] += c[comp] * eq.dphi[q][k][0];
                        gh[comp][1] += c[comp] * eq.dphi[q][k][1];
                    }
                }
                let ue = exact(eq.x[q]);
                let ge = exact_grad(eq.x[q]);
                for comp in 0..2 {
                    l2 += eq.jw[q] * (ue[comp] - uh[comp]).powi(2);
                    h1 += eq.jw[q] * ((ge[comp][0] - gh[comp][0]).powi(2) + (ge[comp][1] - gh[comp][1]).powi(2));
                }
            }
            (l2, h1)
        })
        .collect();
    let (l2, h1) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    (l2.sqrt(), h1.sqrt())
}

/// `‖p − p_h‖` over the domain.
pub fn pressure_error(d: &DofMap, p: &[f64], exact: impl Fn(Point2) -> f64 + Sync) -> f64 {
    let rule = QuadratureRule::degree5();
    let parts: Vec<f64> = (0..d.n_cells())
        .into_par_iter()
        .map(|t| {
            let eq = ElementQuadrature::new(d, t, &rule);
            let cell = d.pressure_cell(t);
            let mut s = 0.0;
            for q in 0..eq.len() {
                let ph: f64 = (0..3).map(|a| p[cell[a]] * eq.psi[q][a]).sum();
                s += eq.jw[q] * (exact(eq.x[q]) - ph).powi(2);
            }
            s
        })
        .collect();
    parts.iter().sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_dofmap, BoundaryConditionSet, ElementPair};
    use crate::mesh::build_unit_square_mesh;

    fn norms(n: usize) -> NormMatrices {
        let mesh = Arc::new(build_unit_square_mesh(n).unwrap());
        NormMatrices::new(Arc::new(
            build_dofmap(mesh, ElementPair::TaylorHood, &BoundaryConditionSet::cavity()).unwrap(),
        ))
    }

    #[test]
    fn zero_state_has_zero_norms() {
        let nm = norms(2);
        let d = nm.dofmap().clone();
        let u = vec![0.0; d.velocity_dofs()];
        let p = vec![0.0; d.pressure_dofs()];
        assert_eq!(nm.all(&u, &p), FieldNorms::default());
        assert_eq!(nm.h_norm(&u, &p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn shear_field_has_unit_seminorm() {
        let nm = norms(3);
        let u = nm.dofmap().interpolate_velocity(|p| [p.x, 0.0]);
        assert!((nm.h1_seminorm(&u) - 1.0).abs() < 1e-13);
        assert!((nm.divergence_l2(&u) - 1.0).abs() < 1e-13);
        let p = vec![0.0; nm.dofmap().pressure_dofs()];
        assert!((nm.h_norm(&u, &p, 1e-9).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn h_norm_rejects_nonpositive_alpha() {
        let nm = norms(1);
        let u = vec![0.0; nm.dofmap().velocity_dofs()];
        let p = vec![0.0; nm.dofmap().pressure_dofs()];
        assert!(nm.h_norm(&u, &p, 0.0).is_err());
        assert!(nm.h_norm(&u, &p, -1.0).is_err());
    }

    #[test]
    fn elementwise_divergence_matches_quadratic_form() {
        let nm = norms(3);
        let u = nm.dofmap().interpolate_velocity(|p| [p.x * p.y, p.y.sin()]);
        let direct = nm.graddiv.bilinear(&u, &u).sqrt();
        assert!((nm.divergence_l2(&u) - direct).abs() < 1e-12);
    }

    #[test]
    fn errors_vanish_for_quadratic_fields() {
        let nm = norms(2);
        let d = nm.dofmap();
        let u = d.interpolate_velocity(|p| [p.x * p.x, p.x * p.y]);
        let (l2, h1) = velocity_errors(d, &u, |p| [p.x * p.x, p.x * p.y], |p| [[2.0 * p.x, 0.0], [p.y, p.x]]);
        assert!(l2 < 1e-14 && h1 < 1e-13);
        let p = d.interpolate_pressure(|q| q.x - q.y);
        assert!(pressure_error(d, &p, |q| q.x - q.y) < 1e-14);
    }
}
