//! Continuous quadratic Lagrange elements.
//!
//! Local basis: `λ_i (2λ_i - 1)` for the vertices, then `4 λ_{i+1} λ_{i+2}` for
//! the midpoint of local edge `i`. Globally the vertex DOFs come first,
//! followed by one DOF per edge.

use crate::error::Result;
use crate::mesh::{Mesh, Point};
use crate::Tensor;

use super::{check_order, Derivative};

/// Geometry of one triangle needed to push P2 derivatives forward.
#[derive(Clone, Copy, Debug)]
pub struct P2Element {
    pub grad_lambda: [Point; 3],
    pub area: f64,
}

impl P2Element {
    pub fn new(p: &[Point; 3]) -> P2Element {
        let area = crate::mesh::signed_area(&p[0], &p[1], &p[2]);
        let mut grad_lambda = [Point::zeros(); 3];
        for (i, g) in grad_lambda.iter_mut().enumerate() {
            // ∇λ_i is the inward normal of the opposite side scaled by 1/height.
            let d = p[(i + 2) % 3] - p[(i + 1) % 3];
            *g = Point::new(-d.y, d.x) / (2.0 * area);
        }
        P2Element { grad_lambda, area }
    }

    pub fn of(mesh: &Mesh, t: usize) -> P2Element {
        P2Element::new(&mesh.triangle_points(t))
    }

    pub fn basis_values(l: &[f64; 3]) -> [f64; 6] {
        [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
            4.0 * l[0] * l[1],
        ]
    }

    pub fn basis_gradients(&self, l: &[f64; 3]) -> [Point; 6] {
        let g = &self.grad_lambda;
        [
            g[0] * (4.0 * l[0] - 1.0),
            g[1] * (4.0 * l[1] - 1.0),
            g[2] * (4.0 * l[2] - 1.0),
            (g[1] * l[2] + g[2] * l[1]) * 4.0,
            (g[2] * l[0] + g[0] * l[2]) * 4.0,
            (g[0] * l[1] + g[1] * l[0]) * 4.0,
        ]
    }

    /// Hessians of the six basis functions; constant on the triangle.
    pub fn basis_hessians(&self) -> [Tensor; 6] {
        let g = &self.grad_lambda;
        let sym = |a: &Point, b: &Point| (a * b.transpose() + b * a.transpose()) * 4.0;
        [
            g[0] * g[0].transpose() * 4.0,
            g[1] * g[1].transpose() * 4.0,
            g[2] * g[2].transpose() * 4.0,
            sym(&g[1], &g[2]),
            sym(&g[2], &g[0]),
            sym(&g[0], &g[1]),
        ]
    }

    pub fn value(dofs: &[f64; 6], l: &[f64; 3]) -> f64 {
        P2Element::basis_values(l).iter().zip(dofs).map(|(b, c)| b * c).sum()
    }

    pub fn gradient(&self, dofs: &[f64; 6], l: &[f64; 3]) -> Point {
        self.basis_gradients(l)
            .iter()
            .zip(dofs)
            .fold(Point::zeros(), |acc, (g, c)| acc + g * *c)
    }

    pub fn hessian(&self, dofs: &[f64; 6]) -> Tensor {
        self.basis_hessians()
            .iter()
            .zip(dofs)
            .fold(Tensor::zeros(), |acc, (h, c)| acc + h * *c)
    }

    /// Value (order 0), gradient (1) or hessian (2) at barycentric point `l`.
    pub fn eval(&self, dofs: &[f64; 6], l: &[f64; 3], order: u8) -> Result<Derivative> {
        check_order(order)?;
        Ok(match order {
            0 => Derivative::Value(P2Element::value(dofs, l)),
            1 => Derivative::Gradient(self.gradient(dofs, l)),
            _ => Derivative::Hessian(self.hessian(dofs)),
        })
    }
}

/// Global numbering of P2 DOFs with the clamped boundary DOFs set apart.
#[derive(Clone, Debug)]
pub struct P2DofMap {
    n_vertices: usize,
    triangle_dofs: Vec<[usize; 6]>,
    free_index: Vec<Option<usize>>,
    free: Vec<usize>,
}

impl P2DofMap {
    pub fn new(mesh: &Mesh) -> P2DofMap {
        let nv = mesh.n_vertices();
        let dim = nv + mesh.n_edges();
        let triangle_dofs = (0..mesh.n_triangles())
            .map(|t| {
                let [a, b, c] = mesh.triangle(t);
                let [e0, e1, e2] = mesh.triangle_edges(t);
                [a, b, c, nv + e0, nv + e1, nv + e2]
            })
            .collect();
        let mut free_index = vec![None; dim];
        let mut free = Vec::new();
        for (dof, slot) in free_index.iter_mut().enumerate() {
            let constrained = if dof < nv {
                mesh.is_boundary_vertex(dof)
            } else {
                mesh.is_boundary_edge(dof - nv)
            };
            if !constrained {
                *slot = Some(free.len());
                free.push(dof);
            }
        }
        P2DofMap {
            n_vertices: nv,
            triangle_dofs,
            free_index,
            free,
        }
    }

    pub fn dim(&self) -> usize {
        self.free_index.len()
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    /// Global ids of the free DOFs in free-index order.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.free_index[dof].is_none()
    }

    pub fn triangle_dofs(&self, t: usize) -> [usize; 6] {
        self.triangle_dofs[t]
    }

    pub fn local_values(&self, t: usize, coeffs: &[f64]) -> [f64; 6] {
        self.triangle_dofs[t].map(|d| coeffs[d])
    }

    /// Nodal interpolant; constrained DOFs take the nodal values as well.
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn(Point) -> f64) -> Vec<f64> {
        let mut out: Vec<f64> = mesh.vertices().iter().map(|p| f(*p)).collect();
        out.extend((0..mesh.n_edges()).map(|e| f(mesh.edge_midpoint(e))));
        debug_assert_eq!(out.len(), self.dim());
        out
    }

    /// Expands a vector over the free DOFs to all DOFs, with zeros on the boundary.
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (&dof, &v) in self.free.iter().zip(free_values) {
            out[dof] = v;
        }
        out
    }

    pub fn restrict(&self, all: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| all[d]).collect()
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
}
