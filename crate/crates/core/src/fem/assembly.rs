//! Element-by-element assembly of every operator the iterations use.
//!
//! Local blocks are computed in parallel and scattered in element order, so
//! assembling twice yields bit-identical matrices.

use rayon::prelude::*;

use super::basis::{p2_gradients, p2_values, ElementGeometry};
use super::dofmap::{DirichletSet, DofMap, ElementLayout};
use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};
use crate::mesh::Point2;
use crate::sparse::CsrMatrix;

use super::ElementPair;

/// Basis data at the quadrature points of one triangle.
pub(crate) struct ElementQuadrature {
    pub geo: ElementGeometry,
    /// `2 · area · w_q`, so that `Σ_q jw[q] g(x_q) = ∫_T g`.
    pub jw: Vec<f64>,
    pub phi: Vec<[f64; 6]>,
    pub dphi: Vec<[[f64; 2]; 6]>,
    pub psi: Vec<[f64; 3]>,
    pub x: Vec<Point2>,
}

impl ElementQuadrature {
    pub fn new(d: &DofMap, t: usize, rule: &QuadratureRule) -> Self {
        let geo = ElementGeometry::new(d.mesh().triangle_points(t));
        let jw = rule.weights.iter().map(|w| 2.0 * geo.area * w).collect();
        let phi = rule.points.iter().map(p2_values).collect();
        let dphi = rule.points.iter().map(|l| p2_gradients(l, &geo.grad_lambda)).collect();
        let psi = rule.points.clone();
        let x = rule.points.iter().map(|l| geo.map(l)).collect();
        Self {
            geo,
            jw,
            phi,
            dphi,
            psi,
            x,
        }
    }

    pub fn len(&self) -> usize {
        self.jw.len()
    }

    /// Divergence of the 12 local vector basis functions (x-components
    /// first) at quadrature point `q`.
    pub fn div(&self, q: usize) -> [f64; 12] {
        let mut out = [0.0; 12];
        for i in 0..6 {
            out[i] = self.dphi[q][i][0];
            out[6 + i] = self.dphi[q][i][1];
        }
        out
    }
}

fn assemble_with<F>(d: &DofMap, layout: &ElementLayout, local: F) -> CsrMatrix
where
    F: Fn(&ElementQuadrature, usize, &mut [f64]) + Sync,
{
    let rule = QuadratureRule::degree5();
    let (r, c) = layout.block;
    let size = r * c;
    let mut blocks = vec![0.0; d.n_cells() * size];
    blocks.par_chunks_mut(size).enumerate().for_each(|(t, block)| {
        let eq = ElementQuadrature::new(d, t, &rule);
        local(&eq, t, block);
    });
    let mut m = layout.empty_matrix();
    let vals = m.values_mut();
    for (&pos, &v) in layout.positions.iter().zip(&blocks) {
        vals[pos] += v;
    }
    m
}

fn scalar_laplacian_block(eq: &ElementQuadrature) -> [[f64; 6]; 6] {
    let mut k = [[0.0; 6]; 6];
    for q in 0..eq.len() {
        let g = &eq.dphi[q];
        for i in 0..6 {
            for j in 0..6 {
                k[i][j] += eq.jw[q] * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
            }
        }
    }
    k
}

fn scalar_mass_block(eq: &ElementQuadrature) -> [[f64; 6]; 6] {
    let mut k = [[0.0; 6]; 6];
    for q in 0..eq.len() {
        let p = &eq.phi[q];
        for i in 0..6 {
            for j in 0..6 {
                k[i][j] += eq.jw[q] * p[i] * p[j];
            }
        }
    }
    k
}

fn write_blockdiag(k: &[[f64; 6]; 6], out: &mut [f64]) {
    for i in 0..6 {
        for j in 0..6 {
            out[i * 12 + j] = k[i][j];
            out[(6 + i) * 12 + 6 + j] = k[i][j];
        }
    }
}

fn write_scalar(k: &[[f64; 6]; 6], out: &mut [f64]) {
    for i in 0..6 {
        out[i * 6..i * 6 + 6].copy_from_slice(&k[i]);
    }
}

/// `(∇φ_j, ∇φ_i)` on one scalar P2 component.
pub fn assemble_scalar_laplacian(d: &DofMap) -> CsrMatrix {
    assemble_with(d, d.scalar_layout(), |eq, _, out| write_scalar(&scalar_laplacian_block(eq), out))
}

/// `(φ_j, φ_i)` on one scalar P2 component.
pub fn assemble_scalar_mass(d: &DofMap) -> CsrMatrix {
    assemble_with(d, d.scalar_layout(), |eq, _, out| write_scalar(&scalar_mass_block(eq), out))
}

/// `(∇u, ∇v)` on the vector velocity space, without the viscosity.
pub fn assemble_vector_laplacian(d: &DofMap) -> CsrMatrix {
    assemble_with(d, d.vector_layout(), |eq, _, out| write_blockdiag(&scalar_laplacian_block(eq), out))
}

/// `(u, v)` on the vector velocity space.
pub fn assemble_velocity_mass(d: &DofMap) -> CsrMatrix {
    assemble_with(d, d.vector_layout(), |eq, _, out| write_blockdiag(&scalar_mass_block(eq), out))
}

/// `(∇·u, ∇·v)`, without the grad-div parameter.
pub fn assemble_graddiv(d: &DofMap) -> CsrMatrix {
    assemble_with(d, d.vector_layout(), |eq, _, out| {
        for q in 0..eq.len() {
            let dv = eq.div(q);
            for i in 0..12 {
                for j in 0..12 {
                    out[i * 12 + j] += eq.jw[q] * dv[i] * dv[j];
                }
            }
        }
    })
}

/// `B_{qj} = (∇·φ_j, ψ_q)`, pressure rows by velocity columns.
pub fn assemble_divergence(d: &DofMap) -> CsrMatrix {
    assemble_with(d, d.divergence_layout(), |eq, _, out| divergence_block(eq, out))
}

fn divergence_block(eq: &ElementQuadrature, out: &mut [f64]) {
    for q in 0..eq.len() {
        let dv = eq.div(q);
        for a in 0..3 {
            for j in 0..12 {
                out[a * 12 + j] += eq.jw[q] * eq.psi[q][a] * dv[j];
            }
        }
    }
}

/// `(p, q)` on the pressure space.
pub fn assemble_pressure_mass(d: &DofMap) -> CsrMatrix {
    assemble_with(d, d.pressure_layout(), |eq, _, out| {
        for q in 0..eq.len() {
            for a in 0..3 {
                for b in 0..3 {
                    out[a * 3 + b] += eq.jw[q] * eq.psi[q][a] * eq.psi[q][b];
                }
            }
        }
    })
}

fn local_velocity(d: &DofMap, u: &[f64], t: usize) -> ([f64; 6], [f64; 6]) {
    let cell = d.velocity_cell(t);
    let n = d.n_nodes();
    let mut ux = [0.0; 6];
    let mut uy = [0.0; 6];
    for k in 0..6 {
        ux[k] = u[cell[k]];
        uy[k] = u[n + cell[k]];
    }
    (ux, uy)
}

fn convection_block(eq: &ElementQuadrature, ux: &[f64; 6], uy: &[f64; 6]) -> [[f64; 6]; 6] {
    // c[i][j] = ½ ∫ (u·∇φ_j) φ_i ; skew part gives b*(u, φ_j, φ_i)
    let mut c = [[0.0; 6]; 6];
    for q in 0..eq.len() {
        let phi = &eq.phi[q];
        let (mut a, mut b) = (0.0, 0.0);
        for k in 0..6 {
            a += ux[k] * phi[k];
            b += uy[k] * phi[k];
        }
        let w = 0.5 * eq.jw[q];
        for j in 0..6 {
            let adv = a * eq.dphi[q][j][0] + b * eq.dphi[q][j][1];
            for i in 0..6 {
                c[i][j] += w * adv * phi[i];
            }
        }
    }
    let mut k = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            k[i][j] = c[i][j] - c[j][i];
        }
    }
    k
}

fn check_velocity(d: &DofMap, u: &[f64]) {
    assert_eq!(u.len(), d.velocity_dofs(), "velocity vector does not match the dof map");
}

/// `N(u)_{ij} = b*(u, φ_j, φ_i)` with the skew-symmetric trilinear form.
/// Components do not couple, so the matrix is block diagonal.
pub fn assemble_convection(d: &DofMap, u: &[f64]) -> CsrMatrix {
    check_velocity(d, u);
    assemble_with(d, d.vector_layout(), |eq, t, out| {
        let (ux, uy) = local_velocity(d, u, t);
        write_blockdiag(&convection_block(eq, &ux, &uy), out)
    })
}

/// One diagonal block of [`assemble_convection`].
pub fn assemble_scalar_convection(d: &DofMap, u: &[f64]) -> CsrMatrix {
    check_velocity(d, u);
    assemble_with(d, d.scalar_layout(), |eq, t, out| {
        let (ux, uy) = local_velocity(d, u, t);
        write_scalar(&convection_block(eq, &ux, &uy), out)
    })
}

/// `Bᵀ M_p⁻¹ B` for discontinuous pressures, assembled triangle by triangle
/// from the local 3×3 mass inverses. For Scott-Vogelius this is the
/// grad-div matrix computed through the pressure space.
pub fn assemble_penalty(d: &DofMap) -> Result<CsrMatrix> {
    if d.pair() != ElementPair::ScottVogelius {
        return Err(Error::config("element-wise penalty elimination needs discontinuous pressure"));
    }
    Ok(assemble_with(d, d.vector_layout(), |eq, _, out| {
        let mut b = [0.0; 36];
        divergence_block(eq, &mut b);
        // P1 mass is area/12 (I + J); its inverse is (12 I − 3 J) / area
        let area = eq.geo.area;
        let mut minv = [[-3.0 / area; 3]; 3];
        for (i, row) in minv.iter_mut().enumerate() {
            row[i] = 9.0 / area;
        }
        let mut mb = [0.0; 36];
        for a in 0..3 {
            for j in 0..12 {
                mb[a * 12 + j] = (0..3).map(|c| minv[a][c] * b[c * 12 + j]).sum();
            }
        }
        for i in 0..12 {
            for j in 0..12 {
                out[i * 12 + j] = (0..3).map(|a| b[a * 12 + i] * mb[a * 12 + j]).sum();
            }
        }
    }))
}

/// `(f, φ_i)` for a vector forcing.
pub fn assemble_rhs(d: &DofMap, f: impl Fn(Point2) -> [f64; 2] + Sync) -> Vec<f64> {
    let rule = QuadratureRule::degree5();
    let locals: Vec<[f64; 12]> = (0..d.n_cells())
        .into_par_iter()
        .map(|t| {
            let eq = ElementQuadrature::new(d, t, &rule);
            let mut out = [0.0; 12];
            for q in 0..eq.len() {
                let fq = f(eq.x[q]);
                for i in 0..6 {
                    out[i] += eq.jw[q] * fq[0] * eq.phi[q][i];
                    out[6 + i] += eq.jw[q] * fq[1] * eq.phi[q][i];
                }
            }
            out
        })
        .collect();
    let mut rhs = vec![0.0; d.velocity_dofs()];
    for (t, local) in locals.iter().enumerate() {
        for (k, &dof) in d.vector_cell(t).iter().enumerate() {
            rhs[dof] += local[k];
        }
    }
    rhs
}

/// Symmetric elimination of constrained entries. Constrained rows become
/// identity rows carrying the prescribed value; the constrained columns of
/// the remaining rows are moved to the right-hand side. The sparsity pattern
/// is kept.
pub fn apply_dirichlet(a: &mut CsrMatrix, rhs: &mut [f64], bc: &DirichletSet) {
    eliminate_rhs(a, rhs, bc);
    constrain_rows(a, &bc.mask);
}

/// Right-hand-side half of [`apply_dirichlet`], computed against the
/// unconstrained matrix. Lets several right-hand sides share one
/// constrained matrix.
pub fn eliminate_rhs(a: &CsrMatrix, rhs: &mut [f64], bc: &DirichletSet) {
    assert_eq!(a.nrows(), bc.len());
    assert_eq!(rhs.len(), bc.len());
    for r in 0..rhs.len() {
        if bc.mask[r] {
            rhs[r] = bc.values[r];
            continue;
        }
        for (c, v) in a.row(r) {
            if c < bc.len() && bc.mask[c] {
                rhs[r] -= v * bc.values[c];
            }
        }
    }
}

/// Matrix half of [`apply_dirichlet`].
pub fn constrain_rows(a: &mut CsrMatrix, mask: &[bool]) {
    assert_eq!(a.nrows(), mask.len());
    let row_ptr = a.row_ptr().to_vec();
    let cols = a.col_idx().to_vec();
    let vals = a.values_mut();
    for r in 0..mask.len() {
        for k in row_ptr[r]..row_ptr[r + 1] {
            let c = cols[k];
            if mask[r] {
                vals[k] = if c == r { 1.0 } else { 0.0 };
            } else if c < mask.len() && mask[c] {
                vals[k] = 0.0;
            }
        }
    }
}

/// Mean pressure `∫p / |Ω|` given the pressure mass matrix.
pub fn pressure_mean(mp: &CsrMatrix, p: &[f64]) -> f64 {
    let ones = vec![1.0; p.len()];
    let area: f64 = mp.bilinear(&ones, &ones);
    mp.bilinear(&ones, p) / area
}

/// Shifts `p` to zero mean. Constants lie in both pressure spaces, so this is
/// the M_p-orthogonal projection onto zero-mean functions.
pub fn remove_pressure_mean(mp: &CsrMatrix, p: &mut [f64]) {
    let m = pressure_mean(mp, p);
    p.iter_mut().for_each(|v| *v -= m);
}
