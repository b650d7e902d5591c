use std::fmt;
use std::sync::{Arc, OnceLock};

use super::bc::BoundaryConditionSet;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh, Point2};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementPair {
    /// Continuous P2 velocity, continuous P1 pressure.
    TaylorHood,
    /// Continuous P2 velocity, discontinuous P1 pressure on an Alfeld split.
    ScottVogelius,
}

impl ElementPair {
    pub fn short_name(self) -> &'static str {
        match self {
            ElementPair::TaylorHood => "TH",
            ElementPair::ScottVogelius => "SV",
        }
    }
}

impl fmt::Display for ElementPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for ElementPair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "th" | "taylorhood" | "taylor-hood" => Ok(ElementPair::TaylorHood),
            "sv" | "scottvogelius" | "scott-vogelius" => Ok(ElementPair::ScottVogelius),
            other => Err(Error::config(format!("unknown element pair `{other}`"))),
        }
    }
}

/// Constrained entries of a linear system with their prescribed values.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSet {
    pub mask: Vec<bool>,
    pub values: Vec<f64>,
}

impl DirichletSet {
    pub fn empty(n: usize) -> Self {
        Self {
            mask: vec![false; n],
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn constrain(&mut self, i: usize, value: f64) {
        self.mask[i] = true;
        self.values[i] = value;
    }

    /// Same constraints with all values set to zero.
    pub fn homogeneous(&self) -> Self {
        Self {
            mask: self.mask.clone(),
            values: vec![0.0; self.mask.len()],
        }
    }

    /// Extends to a larger system; the extra entries are unconstrained.
    pub fn padded(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.mask.resize(n, false);
        out.values.resize(n, 0.0);
        out
    }

    /// Overwrites constrained entries of `x` with their prescribed values.
    pub fn impose(&self, x: &mut [f64]) {
        for ((xi, &m), &v) in x.iter_mut().zip(&self.mask).zip(&self.values) {
            if m {
                *xi = v;
            }
        }
    }

    /// Zeros constrained entries of `x`.
    pub fn zero_out(&self, x: &mut [f64]) {
        for (xi, &m) in x.iter_mut().zip(&self.mask) {
            if m {
                *xi = 0.0;
            }
        }
    }
}

/// Fixed sparsity pattern for an element-wise assembled operator together
/// with, for every element, the value positions of its local block in
/// row-major order.
#[derive(Debug, Clone)]
pub struct ElementLayout {
    pub pattern: CsrMatrix,
    pub positions: Vec<usize>,
    pub block: (usize, usize),
}

impl ElementLayout {
    fn build(nrows: usize, ncols: usize, n_elements: usize, rows: impl Fn(usize) -> Vec<usize>, cols: impl Fn(usize) -> Vec<usize>) -> Self {
        let mut triplets = Vec::new();
        let mut block = (0, 0);
        for e in 0..n_elements {
            let (r, c) = (rows(e), cols(e));
            block = (r.len(), c.len());
            for &i in &r {
                for &j in &c {
                    triplets.push((i, j, 0.0));
                }
            }
        }
        let pattern = CsrMatrix::from_triplets(nrows, ncols, &triplets);
        let mut positions = Vec::with_capacity(triplets.len());
        for e in 0..n_elements {
            let (r, c) = (rows(e), cols(e));
            for &i in &r {
                for &j in &c {
                    positions.push(pattern.position(i, j).expect("entry in pattern"));
                }
            }
        }
        Self { pattern, positions, block }
    }

    pub fn element_positions(&self, e: usize) -> &[usize] {
        let n = self.block.0 * self.block.1;
        &self.positions[e * n..(e + 1) * n]
    }

    pub fn empty_matrix(&self) -> CsrMatrix {
        self.pattern.clone()
    }
}

/// Degrees of freedom of a velocity/pressure pair on one mesh.
///
/// Velocity is P2 with one scalar node per vertex and per edge; component
/// `c` of node `i` is dof `c * n_nodes + i`. Pressure is P1, continuous
/// (vertex dofs) for Taylor-Hood and three dofs per triangle for
/// Scott-Vogelius.
pub struct DofMap {
    mesh: Arc<Mesh>,
    pair: ElementPair,
    n_nodes: usize,
    node_points: Vec<Point2>,
    velocity_cells: Vec<[usize; 6]>,
    pressure_cells: Vec<[usize; 3]>,
    n_pressure: usize,
    dirichlet: DirichletSet,
    pressure_null_space: bool,
    scalar_layout: OnceLock<ElementLayout>,
    vector_layout: OnceLock<ElementLayout>,
    pressure_layout: OnceLock<ElementLayout>,
    divergence_layout: OnceLock<ElementLayout>,
}

impl fmt::Debug for DofMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DofMap")
            .field("pair", &self.pair)
            .field("velocity_dofs", &self.velocity_dofs())
            .field("pressure_dofs", &self.n_pressure)
            .field("dirichlet", &self.dirichlet.count())
            .field("pressure_null_space", &self.pressure_null_space)
            .finish()
    }
}

/// Builds the dof map; Scott-Vogelius is refused on meshes that are not
/// barycentric refinements.
pub fn build_dofmap(mesh: Arc<Mesh>, pair: ElementPair, bcs: &BoundaryConditionSet) -> Result<DofMap> {
    if pair == ElementPair::ScottVogelius && !mesh.is_alfeld_split() {
        return Err(Error::config(
            "Scott-Vogelius elements require a barycentrically (Alfeld) refined mesh",
        ));
    }
    let nv = mesh.n_vertices();
    let n_nodes = nv + mesh.n_edges();
    let mut node_points = mesh.points().to_vec();
    node_points.extend(mesh.edges().iter().map(|e| {
        mesh.points()[e.vertices[0]].midpoint(mesh.points()[e.vertices[1]])
    }));

    let velocity_cells: Vec<[usize; 6]> = mesh
        .triangles()
        .iter()
        .zip(mesh.triangle_edges())
        .map(|(t, e)| {
            let v = t.vertices;
            [v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]]
        })
        .collect();

    let (pressure_cells, n_pressure): (Vec<[usize; 3]>, usize) = match pair {
        ElementPair::TaylorHood => (mesh.triangles().iter().map(|t| t.vertices).collect(), nv),
        ElementPair::ScottVogelius => (
            (0..mesh.n_triangles()).map(|t| [3 * t, 3 * t + 1, 3 * t + 2]).collect(),
            3 * mesh.n_triangles(),
        ),
    };

    // strongest boundary tag per node among Dirichlet-carrying edges
    let mut node_tag: Vec<Option<BoundaryTag>> = vec![None; n_nodes];
    let mut claim = |node: usize, tag: BoundaryTag| {
        let slot = &mut node_tag[node];
        match slot {
            Some(old) if BoundaryConditionSet::priority(*old) <= BoundaryConditionSet::priority(tag) => {}
            _ => *slot = Some(tag),
        }
    };
    for (id, edge) in mesh.edges().iter().enumerate() {
        if !edge.is_boundary() {
            continue;
        }
        let Some(cond) = bcs.condition(edge.tag) else { continue };
        if !cond.is_dirichlet() {
            continue;
        }
        claim(edge.vertices[0], edge.tag);
        claim(edge.vertices[1], edge.tag);
        claim(nv + id, edge.tag);
    }
    let mut dirichlet = DirichletSet::empty(2 * n_nodes);
    for (node, tag) in node_tag.iter().enumerate() {
        let Some(tag) = tag else { continue };
        let value = bcs
            .condition(*tag)
            .and_then(|c| c.value_at(node_points[node]))
            .expect("Dirichlet tag has a value");
        dirichlet.constrain(node, value[0]);
        dirichlet.constrain(n_nodes + node, value[1]);
    }

    let pressure_null_space = !mesh.edges().iter().any(|e| {
        e.is_boundary() && !bcs.condition(e.tag).is_some_and(|c| c.is_dirichlet())
    });

    Ok(DofMap {
        mesh,
        pair,
        n_nodes,
        node_points,
        velocity_cells,
        pressure_cells,
        n_pressure,
        dirichlet,
        pressure_null_space,
        scalar_layout: OnceLock::new(),
        vector_layout: OnceLock::new(),
        pressure_layout: OnceLock::new(),
        divergence_layout: OnceLock::new(),
    })
}

impl DofMap {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn pair(&self) -> ElementPair {
        self.pair
    }

    /// Scalar P2 nodes (vertices followed by edge midpoints).
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn node_points(&self) -> &[Point2] {
        &self.node_points
    }

    pub fn velocity_dofs(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn pressure_dofs(&self) -> usize {
        self.n_pressure
    }

    pub fn velocity_cell(&self, t: usize) -> &[usize; 6] {
        &self.velocity_cells[t]
    }

    pub fn pressure_cell(&self, t: usize) -> &[usize; 3] {
        &self.pressure_cells[t]
    }

    pub fn n_cells(&self) -> usize {
        self.velocity_cells.len()
    }

    /// Velocity dofs of one element, x-components first.
    pub fn vector_cell(&self, t: usize) -> [usize; 12] {
        let s = &self.velocity_cells[t];
        let mut out = [0usize; 12];
        for i in 0..6 {
            out[i] = s[i];
            out[6 + i] = self.n_nodes + s[i];
        }
        out
    }

    pub fn dirichlet(&self) -> &DirichletSet {
        &self.dirichlet
    }

    /// True when the whole boundary carries Dirichlet velocity data, so the
    /// pressure is only determined up to a constant.
    pub fn pressure_null_space(&self) -> bool {
        self.pressure_null_space
    }

    /// Scalar P2 operator pattern (`n_nodes` square).
    pub fn scalar_layout(&self) -> &ElementLayout {
        self.scalar_layout.get_or_init(|| {
            ElementLayout::build(self.n_nodes, self.n_nodes, self.n_cells(), |e| self.velocity_cells[e].to_vec(), |e| {
                self.velocity_cells[e].to_vec()
            })
        })
    }

    /// Velocity operator pattern with full component coupling.
    pub fn vector_layout(&self) -> &ElementLayout {
        self.vector_layout.get_or_init(|| {
            let n = self.velocity_dofs();
            ElementLayout::build(n, n, self.n_cells(), |e| self.vector_cell(e).to_vec(), |e| self.vector_cell(e).to_vec())
        })
    }

    pub fn pressure_layout(&self) -> &ElementLayout {
        self.pressure_layout.get_or_init(|| {
            ElementLayout::build(self.n_pressure, self.n_pressure, self.n_cells(), |e| self.pressure_cells[e].to_vec(), |e| {
                self.pressure_cells[e].to_vec()
            })
        })
    }

    /// Pressure rows by velocity columns.
    pub fn divergence_layout(&self) -> &ElementLayout {
        self.divergence_layout.get_or_init(|| {
            ElementLayout::build(self.n_pressure, self.velocity_dofs(), self.n_cells(), |e| self.pressure_cells[e].to_vec(), |e| {
                self.vector_cell(e).to_vec()
            })
        })
    }

    /// Nodal interpolant of a velocity field.
    pub fn interpolate_velocity(&self, f: impl Fn(Point2) -> [f64; 2]) -> Vec<f64> {
        let mut u = vec![0.0; self.velocity_dofs()];
        for (i, &p) in self.node_points.iter().enumerate() {
            let v = f(p);
            u[i] = v[0];
            u[self.n_nodes + i] = v[1];
        }
        u
    }

    /// Nodal interpolant of a pressure field (per-triangle vertex values for
    /// the discontinuous space).
    pub fn interpolate_pressure(&self, f: impl Fn(Point2) -> f64) -> Vec<f64> {
        let mut p = vec![0.0; self.n_pressure];
        for (t, cell) in self.pressure_cells.iter().enumerate() {
            let verts = self.mesh.triangle_points(t);
            for (k, &dof) in cell.iter().enumerate() {
                p[dof] = f(verts[k]);
            }
        }
        p
    }
}
