//! Conforming triangulations of polygonal domains.
//!
//! A [`Mesh`] stores flat index arrays: counterclockwise vertex triples per
//! triangle, the sorted vertex pair of every edge, and the one or two triangles
//! adjacent to each edge. Local edge `i` of a triangle is the side opposite its
//! local vertex `i`.
//!
//! Edge frames use one global convention. The `plus` triangle of an interior
//! edge is the adjacent triangle with the smaller index and the unit normal
//! points from `plus` into `minus`; on the boundary the normal is outward.
//! Jumps are `[[v]] = v|plus - v|minus` (just the trace on boundary edges).

mod io;
mod refine;

use std::collections::HashMap;

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub use io::{read_mesh, write_mesh};

/// A point (or vector) in the plane.
pub type Point = Vector2<f64>;

/// Local vertex indices `(a, b)` of local edge `i`, i.e. the side opposite vertex `i`.
#[inline]
pub fn local_edge_vertices(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_triangles: Vec<(usize, Option<usize>)>,
    triangle_edges: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
    refinement_edge: Vec<u8>,
    generation: Vec<u32>,
}

/// Orientation data of one edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFrame {
    pub normal: Point,
    /// The normal rotated by +90 degrees.
    pub tangent: Point,
    pub length: f64,
    pub plus: usize,
    pub minus: Option<usize>,
}

impl EdgeFrame {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

impl Mesh {
    /// Builds the full topology of a conforming triangulation.
    ///
    /// Every triangle's refinement edge is set to its longest side, ties going
    /// to the side whose opposite vertex has the smallest global index.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Mesh> {
        validate_triangles(&vertices, &triangles)?;
        let refinement_edge = triangles.iter().map(|tri| longest_edge(&vertices, tri)).collect();
        let generation = vec![0; triangles.len()];
        Mesh::from_parts(vertices, triangles, refinement_edge, generation)
    }

    pub(crate) fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        refinement_edge: Vec<u8>,
        generation: Vec<u32>,
    ) -> Result<Mesh> {
        validate_triangles(&vertices, &triangles)?;

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::new();
        // Directed traversal of each edge by its first triangle; a second
        // triangle must traverse it the other way round.
        let mut first_direction = Vec::new();
        let mut edge_triangles: Vec<(usize, Option<usize>)> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());

        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (i, slot) in local.iter_mut().enumerate() {
                let (a, b) = local_edge_vertices(i);
                let (p, q) = (tri[a], tri[b]);
                let key = if p < q { [p, q] } else { [q, p] };
                let e = match edge_index.get(&key) {
                    Some(&e) => {
                        match edge_triangles[e] {
                            (_, Some(_)) => {
                                return Err(Error::NonConforming(format!(
                                    "edge ({}, {}) is shared by more than two triangles",
                                    key[0], key[1]
                                )))
                            }
                            (first, None) => {
                                if first_direction[e] == (p, q) {
                                    return Err(Error::NonConforming(format!(
                                        "triangles {first} and {t} overlap along edge ({}, {})",
                                        key[0], key[1]
                                    )));
                                }
                                edge_triangles[e] = (first, Some(t));
                            }
                        }
                        e
                    }
                    None => {
                        let e = edges.len();
                        edges.push(key);
                        edge_index.insert(key, e);
                        first_direction.push((p, q));
                        edge_triangles.push((t, None));
                        e
                    }
                };
                *slot = e;
            }
            triangle_edges.push(local);
        }

        let mut used = vec![false; vertices.len()];
        for tri in &triangles {
            for &v in tri {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::IsolatedVertex(v));
        }

        let mut boundary_vertex = vec![false; vertices.len()];
        for (e, adj) in edge_triangles.iter().enumerate() {
            if adj.1.is_none() {
                boundary_vertex[edges[e][0]] = true;
                boundary_vertex[edges[e][1]] = true;
            }
        }

        Ok(Mesh {
            vertices,
            triangles,
            edges,
            edge_triangles,
            triangle_edges,
            boundary_vertex,
            refinement_edge,
            generation,
        })
    }

    /// The unit square split by the diagonal from (0,0) to (1,1).
    pub fn unit_square() -> Mesh {
        let vertices = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        Mesh::new(vertices, vec![[0, 1, 2], [0, 2, 3]]).expect("valid square mesh")
    }

    /// The L-shape (-1,1)^2 minus [0,1)x(-1,0]: three unit squares, each cut
    /// by the diagonal through the re-entrant corner.
    pub fn l_shape() -> Mesh {
        let vertices = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
            Point::new(-1.0, 1.0),
            Point::new(-1.0, 0.0),
            Point::new(-1.0, -1.0),
            Point::new(0.0, -1.0),
        ];
        let triangles = vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 5, 6], [0, 6, 7]];
        Mesh::new(vertices, triangles).expect("valid L-shape mesh")
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    /// Sorted vertex pair of edge `e`.
    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// `(plus, minus)` triangles of edge `e`; `minus` is `None` on the boundary.
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        self.edge_triangles[e]
    }

    /// Global edge ids of the three local edges of triangle `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_triangles[e].1.is_none()
    }

    /// Local index of the newest-vertex-bisection refinement edge of `t`.
    pub fn refinement_edge(&self, t: usize) -> usize {
        self.refinement_edge[t] as usize
    }

    pub fn generation(&self, t: usize) -> u32 {
        self.generation[t]
    }

    pub fn n_boundary_edges(&self) -> usize {
        self.edge_triangles.iter().filter(|adj| adj.1.is_none()).count()
    }

    /// `V - E + T`; equals one minus the number of holes.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(&a, &b, &c)
    }

    pub fn area(&self, t: usize) -> f64 {
        self.signed_area(t).abs()
    }

    /// Diameter `h_K`, the longest side.
    pub fn diameter(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        (0..3)
            .map(|i| {
                let (a, b) = local_edge_vertices(i);
                (p[b] - p[a]).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e];
        (self.vertices[b] - self.vertices[a]).norm()
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e];
        (self.vertices[a] + self.vertices[b]) * 0.5
    }

    /// Local index of global edge `e` within triangle `t`.
    pub fn local_edge_index(&self, t: usize, e: usize) -> Option<usize> {
        self.triangle_edges[t].iter().position(|&x| x == e)
    }

    /// Outward unit normal of triangle `t` on its local edge `i`.
    pub fn outward_normal(&self, t: usize, i: usize) -> Point {
        let p = self.triangle_points(t);
        let (a, b) = local_edge_vertices(i);
        let d = p[b] - p[a];
        Point::new(d.y, -d.x) / d.norm()
    }

    pub fn edge_frame(&self, e: usize) -> EdgeFrame {
        let (plus, minus) = self.edge_triangles[e];
        let local = self.local_edge_index(plus, e).expect("edge adjacency is consistent");
        let normal = self.outward_normal(plus, local);
        EdgeFrame {
            normal,
            tangent: Point::new(-normal.y, normal.x),
            length: self.edge_length(e),
            plus,
            minus,
        }
    }

    /// Smallest interior angle of triangle `t` in radians.
    pub fn min_angle(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        (0..3)
            .map(|i| {
                let u = p[(i + 1) % 3] - p[i];
                let v = p[(i + 2) % 3] - p[i];
                (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Barycentric coordinates of `x` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, x: &Point) -> [f64; 3] {
        let [a, b, c] = self.triangle_points(t);
        barycentric(&a, &b, &c, x)
    }

    /// Uniform red refinement: every triangle is split into four similar children.
    pub fn refine_uniform(&self) -> Mesh {
        refine::refine_uniform(self)
    }

    /// Newest-vertex bisection of the marked triangles plus the closure needed
    /// to keep the mesh conforming.
    pub fn refine_nvb(&self, marked: &[usize]) -> Mesh {
        refine::refine_nvb(self, marked)
    }
}

pub fn signed_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

pub fn barycentric(a: &Point, b: &Point, c: &Point, x: &Point) -> [f64; 3] {
    let area = signed_area(a, b, c);
    let l0 = signed_area(x, b, c) / area;
    let l1 = signed_area(a, x, c) / area;
    [l0, l1, 1.0 - l0 - l1]
}

fn validate_triangles(vertices: &[Point], triangles: &[[usize; 3]]) -> Result<()> {
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            if v >= vertices.len() {
                return Err(Error::VertexOutOfRange {
                    triangle: t,
                    vertex: v,
                    count: vertices.len(),
                });
            }
        }
        let area = signed_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
        // NaN coordinates fail this test as well.
        if !(area > 0.0) {
            return Err(Error::DegenerateTriangle { triangle: t, area });
        }
    }
    Ok(())
}

fn longest_edge(vertices: &[Point], tri: &[usize; 3]) -> u8 {
    let mut best = 0usize;
    let mut best_len = -1.0;
    for i in 0..3 {
        let (a, b) = local_edge_vertices(i);
        let len = (vertices[tri[b]] - vertices[tri[a]]).norm_squared();
        let better = len > best_len || (len == best_len && tri[i] < tri[best]);
        if better {
            best = i;
            best_len = len;
        }
    }
    best as u8
}
