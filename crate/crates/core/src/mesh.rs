//! Two-dimensional triangulations: the unit-square cavity mesh, the step
//! channel, and barycentric (Alfeld) refinement.
//!
//! A [`Mesh`] is immutable once built. Every generator runs [`Mesh::validate`]
//! before returning, so downstream code can rely on positive areas, a
//! conforming edge table and complete boundary tags.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

/// Vertex indices in counter-clockwise order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub vertices: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Lid,
    Wall,
    Inflow,
    Outflow,
    Interior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints, smaller index first.
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
    /// Adjacent triangles; the second slot is empty on the boundary.
    pub triangles: [usize; 2],
    pub n_triangles: u8,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.n_triangles == 1
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    points: Vec<Point2>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    /// Local edge `i` of a triangle is the one opposite local vertex `i`.
    triangle_edges: Vec<[usize; 3]>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds the edge table and tags every boundary edge with `tagger`,
    /// which receives the two endpoints of the edge.
    pub fn from_parts<F>(points: Vec<Point2>, triangles: Vec<Triangle>, tagger: F) -> Result<Self>
    where
        F: Fn(Point2, Point2) -> BoundaryTag,
    {
        let mut edges: Vec<Edge> = Vec::with_capacity(points.len() + triangles.len());
        let mut edge_lookup = HashMap::with_capacity(points.len() + triangles.len());
        let mut triangle_edges = Vec::with_capacity(triangles.len());

        for (t, tri) in triangles.iter().enumerate() {
            let v = tri.vertices;
            if v.iter().any(|&i| i >= points.len()) {
                return Err(Error::mesh(format!("triangle {t} references a missing vertex")));
            }
            let mut local = [0usize; 3];
            for (i, slot) in local.iter_mut().enumerate() {
                let key = edge_key(v[(i + 1) % 3], v[(i + 2) % 3]);
                let id = *edge_lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        tag: BoundaryTag::Interior,
                        triangles: [t, usize::MAX],
                        n_triangles: 0,
                    });
                    edges.len() - 1
                });
                let edge = &mut edges[id];
                match edge.n_triangles {
                    0 => edge.triangles[0] = t,
                    1 => edge.triangles[1] = t,
                    _ => {
                        return Err(Error::mesh(format!(
                            "edge ({}, {}) is shared by more than two triangles",
                            key.0, key.1
                        )))
                    }
                }
                edge.n_triangles += 1;
                *slot = id;
            }
            triangle_edges.push(local);
        }

        for edge in &mut edges {
            if edge.is_boundary() {
                edge.tag = tagger(points[edge.vertices[0]], points[edge.vertices[1]]);
            }
        }

        let mesh = Mesh {
            points,
            triangles,
            edges,
            triangle_edges,
            edge_lookup,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&Edge> {
        self.edge_lookup.get(&edge_key(a, b)).map(|&i| &self.edges[i])
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let v = self.triangles[t].vertices;
        [self.points[v[0]], self.points[v[1]], self.points[v[2]]]
    }

    /// Signed area; positive for counter-clockwise triangles.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.edges.iter().any(|e| e.tag == tag)
    }

    /// Conformity, positive-area and boundary-tag completeness checks.
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::mesh(format!("vertex {i} has non-finite coordinates")));
            }
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.vertices;
            if a == b || b == c || a == c {
                return Err(Error::mesh(format!("triangle {t} repeats a vertex")));
            }
            if self.signed_area(t) <= 0.0 {
                return Err(Error::mesh(format!("triangle {t} has non-positive area")));
            }
        }
        for edge in &self.edges {
            let interior = edge.n_triangles == 2;
            if interior != (edge.tag == BoundaryTag::Interior) {
                return Err(Error::mesh(format!(
                    "edge ({}, {}) has {} triangle(s) but tag {:?}",
                    edge.vertices[0], edge.vertices[1], edge.n_triangles, edge.tag
                )));
            }
        }
        self.check_no_hanging_nodes()
    }

    /// No vertex may lie strictly inside a boundary edge; interior hanging
    /// nodes always produce such an edge, so boundary edges suffice.
    fn check_no_hanging_nodes(&self) -> Result<()> {
        let boundary: Vec<&Edge> = self.edges.iter().filter(|e| e.is_boundary()).collect();
        if boundary.is_empty() {
            return Ok(());
        }
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &self.points {
            xmin = xmin.min(p.x);
            xmax = xmax.max(p.x);
            ymin = ymin.min(p.y);
            ymax = ymax.max(p.y);
        }
        let cells = (self.points.len() as f64).sqrt().ceil().max(1.0) as usize;
        let cw = ((xmax - xmin) / cells as f64).max(f64::MIN_POSITIVE);
        let ch = ((ymax - ymin) / cells as f64).max(f64::MIN_POSITIVE);
        let cell_of = |x: f64, y: f64| {
            let i = (((x - xmin) / cw) as usize).min(cells - 1);
            let j = (((y - ymin) / ch) as usize).min(cells - 1);
            (i, j)
        };
        let mut buckets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, p) in self.points.iter().enumerate() {
            buckets.entry(cell_of(p.x, p.y)).or_default().push(i);
        }
        for edge in boundary {
            let [ia, ib] = edge.vertices;
            let (a, b) = (self.points[ia], self.points[ib]);
            let len2 = (b.x - a.x).powi(2) + (b.y - a.y).powi(2);
            let (c0, c1) = (cell_of(a.x.min(b.x), a.y.min(b.y)), cell_of(a.x.max(b.x), a.y.max(b.y)));
            for i in c0.0..=c1.0 {
                for j in c0.1..=c1.1 {
                    let Some(list) = buckets.get(&(i, j)) else { continue };
                    for &k in list {
                        if k == ia || k == ib {
                            continue;
                        }
                        let p = self.points[k];
                        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
                        let dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
                        if cross.abs() <= 1e-12 * len2 && dot > 0.0 && dot < len2 {
                            return Err(Error::mesh(format!(
                                "vertex {k} hangs on boundary edge ({ia}, {ib})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// True when triangles come in consecutive triples `3k..3k+3` that share
    /// an interior vertex of degree three sitting at their union's barycenter,
    /// the layout produced by [`alfeld_split`].
    pub fn is_alfeld_split(&self) -> bool {
        if self.triangles.is_empty() || !self.triangles.len().is_multiple_of(3) {
            return false;
        }
        let mut degree = vec![0usize; self.points.len()];
        for tri in &self.triangles {
            for &v in &tri.vertices {
                degree[v] += 1;
            }
        }
        self.triangles.chunks(3).all(|group| {
            let c = group[0].vertices[2];
            if degree[c] != 3 || group.iter().any(|t| t.vertices[2] != c) {
                return false;
            }
            let outer = [group[0].vertices[0], group[1].vertices[0], group[2].vertices[0]];
            if group[0].vertices[1] != outer[1] || group[1].vertices[1] != outer[2] || group[2].vertices[1] != outer[0] {
                return false;
            }
            let (sx, sy) = outer
                .iter()
                .fold((0.0, 0.0), |(sx, sy), &v| (sx + self.points[v].x, sy + self.points[v].y));
            let (bx, by) = (sx / 3.0, sy / 3.0);
            let scale = outer
                .iter()
                .map(|&v| (self.points[v].x - bx).abs() + (self.points[v].y - by).abs())
                .fold(0.0, f64::max);
            (self.points[c].x - bx).abs() <= 1e-12 * scale && (self.points[c].y - by).abs() <= 1e-12 * scale
        })
    }
}

/// Uniform mesh of the unit square with `n` cells per side, every cell cut
/// along its lower-left to upper-right diagonal. Edges on `y = 1` are tagged
/// [`BoundaryTag::Lid`], the rest of the boundary [`BoundaryTag::Wall`].
pub fn build_unit_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::config("unit square mesh needs at least one subdivision"));
    }
    let lines: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let (points, triangles) = tensor_triangulation(&lines, &lines, |_, _| true);
    Mesh::from_parts(points, triangles, |a, b| {
        if a.y == 1.0 && b.y == 1.0 {
            BoundaryTag::Lid
        } else {
            BoundaryTag::Wall
        }
    })
}

/// Triangulates the tensor grid spanned by `xs` and `ys`, keeping the cells
/// for which `keep(center_x, center_y)` holds. Unused vertices are dropped.
fn tensor_triangulation<K>(xs: &[f64], ys: &[f64], keep: K) -> (Vec<Point2>, Vec<Triangle>)
where
    K: Fn(f64, f64) -> bool,
{
    let nx = xs.len() - 1;
    let ny = ys.len() - 1;
    let grid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut raw = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            if !keep(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])) {
                continue;
            }
            let (a, b, c, d) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
            raw.push([a, b, c]);
            raw.push([a, c, d]);
        }
    }
    let mut renumber = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut used = vec![false; renumber.len()];
    for tri in &raw {
        for &v in tri {
            used[v] = true;
        }
    }
    let mut points = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let g = grid(i, j);
            if used[g] {
                renumber[g] = points.len();
                points.push(Point2::new(xs[i], ys[j]));
            }
        }
    }
    let triangles = raw
        .into_iter()
        .map(|t| Triangle {
            vertices: [renumber[t[0]], renumber[t[1]], renumber[t[2]]],
        })
        .collect();
    (points, triangles)
}

/// Barycentric refinement: every triangle `[a, b, c]` becomes
/// `[a, b, m]`, `[b, c, m]`, `[c, a, m]` with `m` its barycenter.
/// Parent boundary edges keep their tags.
pub fn alfeld_split(mesh: &Mesh) -> Result<Mesh> {
    let nv = mesh.n_vertices();
    let mut points = Vec::with_capacity(nv + mesh.n_triangles());
    points.extend_from_slice(mesh.points());
    let mut triangles = Vec::with_capacity(3 * mesh.n_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let [a, b, c] = mesh.triangle_points(t);
        points.push(Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0));
        let m = nv + t;
        let [va, vb, vc] = tri.vertices;
        triangles.push(Triangle { vertices: [va, vb, m] });
        triangles.push(Triangle { vertices: [vb, vc, m] });
        triangles.push(Triangle { vertices: [vc, va, m] });
    }
    // Boundary edges of the children are exactly the parent's boundary edges,
    // so tags are looked up by endpoint coordinates.
    let mut tags: HashMap<[u64; 4], BoundaryTag> = HashMap::new();
    let key = |p: Point2, q: Point2| {
        let (p, q) = if (p.x, p.y) <= (q.x, q.y) { (p, q) } else { (q, p) };
        [p.x.to_bits(), p.y.to_bits(), q.x.to_bits(), q.y.to_bits()]
    };
    for e in mesh.edges().iter().filter(|e| e.is_boundary()) {
        let (p, q) = (mesh.points()[e.vertices[0]], mesh.points()[e.vertices[1]]);
        tags.insert(key(p, q), e.tag);
    }
    Mesh::from_parts(points, triangles, |p, q| {
        tags.get(&key(p, q)).copied().unwrap_or(BoundaryTag::Interior)
    })
}

/// Channel length, height, and the removed step `[STEP_X0, STEP_X1] x [0, STEP_H]`.
pub const CHANNEL_LENGTH: f64 = 40.0;
pub const CHANNEL_HEIGHT: f64 = 10.0;
pub const STEP_X0: f64 = 5.0;
pub const STEP_X1: f64 = 6.0;
pub const STEP_H: f64 = 1.0;

/// Uniform structured mesh of the step channel with spacing `h`, which must
/// divide 1 so the step is resolved exactly.
pub fn build_step_channel_mesh(h: f64) -> Result<Mesh> {
    let per_unit = resolve_unit_divisor(h)?;
    let lines = |len: f64| -> Vec<f64> {
        let n = (len as usize) * per_unit;
        (0..=n).map(|i| i as f64 / per_unit as f64).collect()
    };
    build_step_channel_from_lines(&lines(CHANNEL_LENGTH), &lines(CHANNEL_HEIGHT))
}

/// Step channel on a graded tensor grid: spacing `fine_h` for
/// `x <= fine_until` and `coarse_h` beyond, `fine_h` in `y` everywhere.
/// Both spacings must divide 1 and `fine_until` must be an integer.
pub fn build_step_channel_graded(fine_h: f64, coarse_h: f64, fine_until: f64) -> Result<Mesh> {
    let fine = resolve_unit_divisor(fine_h)?;
    let coarse = resolve_unit_divisor(coarse_h)?;
    if fine_until.fract() != 0.0 || !(STEP_X1..=CHANNEL_LENGTH).contains(&fine_until) {
        return Err(Error::config(format!(
            "fine region must end at an integer x in [{STEP_X1}, {CHANNEL_LENGTH}], got {fine_until}"
        )));
    }
    let split = fine_until as usize;
    let mut xs: Vec<f64> = (0..split * fine).map(|i| i as f64 / fine as f64).collect();
    let rest = (CHANNEL_LENGTH as usize - split) * coarse;
    xs.extend((0..=rest).map(|i| fine_until + i as f64 / coarse as f64));
    let ys: Vec<f64> = (0..=(CHANNEL_HEIGHT as usize) * fine).map(|i| i as f64 / fine as f64).collect();
    build_step_channel_from_lines(&xs, &ys)
}

fn resolve_unit_divisor(h: f64) -> Result<usize> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::config(format!("step channel spacing must lie in (0, 1], got {h}")));
    }
    let k = (1.0 / h).round();
    if ((1.0 / h) - k).abs() > 1e-9 * k {
        return Err(Error::config(format!("spacing {h} does not divide the unit step")));
    }
    Ok(k as usize)
}

/// Triangulates the channel over arbitrary grid lines, which must contain
/// the channel ends and the step corners.
pub fn build_step_channel_from_lines(xs: &[f64], ys: &[f64]) -> Result<Mesh> {
    let contains = |lines: &[f64], v: f64| lines.contains(&v);
    let sorted = |lines: &[f64]| lines.windows(2).all(|w| w[0] < w[1]);
    if !sorted(xs) || !sorted(ys) {
        return Err(Error::config("grid lines must be strictly increasing"));
    }
    for (lines, required) in [
        (xs, [0.0, STEP_X0, STEP_X1, CHANNEL_LENGTH].as_slice()),
        (ys, [0.0, STEP_H, CHANNEL_HEIGHT].as_slice()),
    ] {
        for &v in required {
            if !contains(lines, v) {
                return Err(Error::config(format!("grid lines do not resolve the step geometry at {v}")));
            }
        }
    }
    if xs[0] != 0.0 || *xs.last().unwrap() != CHANNEL_LENGTH || ys[0] != 0.0 || *ys.last().unwrap() != CHANNEL_HEIGHT {
        return Err(Error::config("grid lines must span the channel exactly"));
    }
    let in_step = |x: f64, y: f64| x > STEP_X0 && x < STEP_X1 && y < STEP_H;
    let (points, triangles) = tensor_triangulation(xs, ys, |x, y| !in_step(x, y));
    Mesh::from_parts(points, triangles, |a, b| {
        if a.x == 0.0 && b.x == 0.0 {
            BoundaryTag::Inflow
        } else if a.x == CHANNEL_LENGTH && b.x == CHANNEL_LENGTH {
            BoundaryTag::Outflow
        } else {
            BoundaryTag::Wall
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        let m = build_unit_square_mesh(1).unwrap();
        assert_eq!((m.n_vertices(), m.n_triangles(), m.n_edges()), (4, 2, 5));
        let m = build_unit_square_mesh(32).unwrap();
        assert_eq!((m.n_vertices(), m.n_triangles()), (1089, 2048));
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(build_unit_square_mesh(0), Err(Error::Config(_))));
    }

    #[test]
    fn unit_square_areas() {
        let m = build_unit_square_mesh(2).unwrap();
        for t in 0..m.n_triangles() {
            assert!((m.signed_area(t) - 0.125).abs() < 1e-15);
        }
        assert!((m.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lid_tags_only_on_top() {
        let m = build_unit_square_mesh(4).unwrap();
        for e in m.edges().iter().filter(|e| e.is_boundary()) {
            let (a, b) = (m.points()[e.vertices[0]], m.points()[e.vertices[1]]);
            let top = a.y == 1.0 && b.y == 1.0;
            assert_eq!(e.tag == BoundaryTag::Lid, top);
        }
    }

    #[test]
    fn alfeld_counts_and_tags() {
        let m = build_unit_square_mesh(1).unwrap();
        let a = alfeld_split(&m).unwrap();
        assert_eq!((a.n_vertices(), a.n_triangles()), (6, 6));
        assert!(a.is_alfeld_split());
        assert!(!m.is_alfeld_split());
        let lid = a.edges().iter().filter(|e| e.tag == BoundaryTag::Lid).count();
        assert_eq!(lid, 1);
        let m32 = build_unit_square_mesh(32).unwrap();
        assert_eq!(alfeld_split(&m32).unwrap().n_triangles(), 6144);
    }

    #[test]
    fn step_channel_h1() {
        let m = build_step_channel_mesh(1.0).unwrap();
        assert_eq!(m.n_triangles(), 798);
        assert!((m.total_area() - 399.0).abs() < 1e-12);
        assert!(m.has_tag(BoundaryTag::Inflow) && m.has_tag(BoundaryTag::Outflow));
    }

    #[test]
    fn step_faces_are_walls() {
        let m = build_step_channel_mesh(0.5).unwrap();
        for e in m.edges().iter().filter(|e| e.is_boundary()) {
            let (a, b) = (m.points()[e.vertices[0]], m.points()[e.vertices[1]]);
            let mid = a.midpoint(b);
            let on_step = (mid.x == STEP_X0 || mid.x == STEP_X1) && mid.y < STEP_H
                || (mid.y == STEP_H && mid.x > STEP_X0 && mid.x < STEP_X1);
            if on_step {
                assert_eq!(e.tag, BoundaryTag::Wall);
            }
        }
        // the step's interior is not meshed
        assert!(m.points().iter().all(|p| !(p.x > STEP_X0 && p.x < STEP_X1 && p.y < STEP_H)));
    }

    #[test]
    fn step_spacing_must_divide_unit() {
        assert!(build_step_channel_mesh(0.3).is_err());
        assert!(build_step_channel_mesh(0.0).is_err());
        assert!(build_step_channel_graded(0.5, 1.0, 5.5).is_err());
    }

    #[test]
    fn hanging_node_detected() {
        // a vertex in the middle of the bottom edge that no triangle uses as a corner
        let points = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.5, 0.0),
        ];
        let tris = vec![Triangle { vertices: [0, 1, 2] }];
        let err = Mesh::from_parts(points, tris, |_, _| BoundaryTag::Wall).unwrap_err();
        assert!(matches!(err, Error::Mesh(_)));
    }

    #[test]
    fn clockwise_triangle_rejected() {
        let points = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let tris = vec![Triangle { vertices: [0, 2, 1] }];
        assert!(Mesh::from_parts(points, tris, |_, _| BoundaryTag::Wall).is_err());
    }
}
