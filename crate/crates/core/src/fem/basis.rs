//! Lagrange bases on a physical triangle, expressed through barycentric
//! coordinates. P2 local order: vertices 0, 1, 2, then the midpoints of the
//! edges opposite vertices 0, 1, 2.

use crate::mesh::Point2;

/// Affine data of one triangle: area and the constant barycentric gradients.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub vertices: [Point2; 3],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(vertices: [Point2; 3]) -> Self {
        let [a, b, c] = vertices;
        let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        let inv = 1.0 / det;
        // ∇λ_i is the inward normal of the opposite edge scaled by 1 / (2 area)
        let grad_lambda = [
            [(b.y - c.y) * inv, (c.x - b.x) * inv],
            [(c.y - a.y) * inv, (a.x - c.x) * inv],
            [(a.y - b.y) * inv, (b.x - a.x) * inv],
        ];
        Self {
            vertices,
            area: 0.5 * det,
            grad_lambda,
        }
    }

    pub fn map(&self, lambda: &[f64; 3]) -> Point2 {
        let [a, b, c] = self.vertices;
        Point2::new(
            lambda[0] * a.x + lambda[1] * b.x + lambda[2] * c.x,
            lambda[0] * a.y + lambda[1] * b.y + lambda[2] * c.y,
        )
    }
}

/// Local edge `k` joins these two local vertices.
pub const EDGE_VERTICES: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

pub fn p2_values(l: &[f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
        4.0 * l[0] * l[1],
    ]
}

pub fn p2_gradients(l: &[f64; 3], g: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        out[i] = [s * g[i][0], s * g[i][1]];
    }
    for (k, &(i, j)) in EDGE_VERTICES.iter().enumerate() {
        out[3 + k] = [
            4.0 * (l[i] * g[j][0] + l[j] * g[i][0]),
            4.0 * (l[i] * g[j][1] + l[j] * g[i][1]),
        ];
    }
    out
}

pub fn p1_values(l: &[f64; 3]) -> [f64; 3] {
    *l
}
