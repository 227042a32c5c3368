//! Linear Hellan–Herrmann–Johnson symmetric tensors.
//!
//! On a triangle a field is written `τ = Σ λ_i S_i`, so `S_i` is its value at
//! vertex `i`. The DOFs are the moments of the normal-normal trace on each
//! edge against the two endpoint hat functions (lower global vertex first),
//! and the three moments against the constant tensors `E11`, `E22` and
//! `E12 + E21`. Global numbering: edge `e` owns `2e, 2e+1`, triangle `t` owns
//! `2E + 3t .. 2E + 3t + 3`.

use nalgebra::{SMatrix, SVector};

use crate::mesh::{local_edge_vertices, Mesh, Point};
use crate::Tensor;

type Mat9 = SMatrix<f64, 9, 9>;
type Vec9 = SVector<f64, 9>;

#[derive(Clone, Debug)]
pub struct HhjElement {
    /// DOFs as a linear map of the vertex tensors `(s11, s22, s12)` of `S_0, S_1, S_2`.
    dof_matrix: Mat9,
    inverse: Mat9,
}

impl HhjElement {
    /// `endpoints[i]` lists the local vertices of edge `i` in DOF order.
    pub fn new(p: &[Point; 3], endpoints: [(usize, usize); 3]) -> HhjElement {
        let area = crate::mesh::signed_area(&p[0], &p[1], &p[2]).abs();
        let mut m = Mat9::zeros();
        for i in 0..3 {
            let (a, b) = endpoints[i];
            let d = p[b] - p[a];
            let h = d.norm();
            let n = Point::new(d.y, -d.x) / h;
            let nn = [n.x * n.x, n.y * n.y, 2.0 * n.x * n.y];
            for (row, (first, second)) in [(2 * i, (a, b)), (2 * i + 1, (b, a))] {
                for c in 0..3 {
                    m[(row, 3 * first + c)] = h * nn[c] / 3.0;
                    m[(row, 3 * second + c)] = h * nn[c] / 6.0;
                }
            }
        }
        for k in 0..3 {
            for c in 0..3 {
                let factor = if c == 2 { 2.0 } else { 1.0 };
                m[(6 + c, 3 * k + c)] = factor * area / 3.0;
            }
        }
        let inverse = m.try_inverse().expect("HHJ DOFs are unisolvent");
        HhjElement { dof_matrix: m, inverse }
    }

    pub fn of(mesh: &Mesh, t: usize) -> HhjElement {
        let tri = mesh.triangle(t);
        let endpoints = [0, 1, 2].map(|i| {
            let (a, b) = local_edge_vertices(i);
            if tri[a] < tri[b] {
                (a, b)
            } else {
                (b, a)
            }
        });
        HhjElement::new(&mesh.triangle_points(t), endpoints)
    }

    pub fn dof_matrix(&self) -> &Mat9 {
        &self.dof_matrix
    }

    /// Vertex values `S_0, S_1, S_2` of the field with the given DOFs.
    pub fn vertex_tensors(&self, dofs: &[f64; 9]) -> [Tensor; 3] {
        let s = self.inverse * Vec9::from_row_slice(dofs);
        [0, 1, 2].map(|k| Tensor::new(s[3 * k], s[3 * k + 2], s[3 * k + 2], s[3 * k + 1]))
    }

    /// DOFs of the linear field with vertex values `s`.
    pub fn dofs_of(&self, s: &[Tensor; 3]) -> [f64; 9] {
        let mut v = Vec9::zeros();
        for k in 0..3 {
            v[3 * k] = s[k][(0, 0)];
            v[3 * k + 1] = s[k][(1, 1)];
            v[3 * k + 2] = 0.5 * (s[k][(0, 1)] + s[k][(1, 0)]);
        }
        let d = self.dof_matrix * v;
        std::array::from_fn(|i| d[i])
    }

    pub fn eval(&self, dofs: &[f64; 9], l: &[f64; 3]) -> Tensor {
        let s = self.vertex_tensors(dofs);
        s[0] * l[0] + s[1] * l[1] + s[2] * l[2]
    }
}

/// Evaluates a linear field from its vertex tensors.
pub fn eval_linear(s: &[Tensor; 3], l: &[f64; 3]) -> Tensor {
    s[0] * l[0] + s[1] * l[1] + s[2] * l[2]
}

#[derive(Clone, Debug)]
pub struct HhjSpace {
    elements: Vec<HhjElement>,
    triangle_dofs: Vec<[usize; 9]>,
    n_edges: usize,
}

impl HhjSpace {
    pub fn new(mesh: &Mesh) -> HhjSpace {
        let ne = mesh.n_edges();
        let elements = (0..mesh.n_triangles()).map(|t| HhjElement::of(mesh, t)).collect();
        let triangle_dofs = (0..mesh.n_triangles())
            .map(|t| {
                let e = mesh.triangle_edges(t);
                [
                    2 * e[0],
                    2 * e[0] + 1,
                    2 * e[1],
                    2 * e[1] + 1,
                    2 * e[2],
                    2 * e[2] + 1,
                    2 * ne + 3 * t,
                    2 * ne + 3 * t + 1,
                    2 * ne + 3 * t + 2,
                ]
            })
            .collect();
        HhjSpace {
            elements,
            triangle_dofs,
            n_edges: ne,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.n_edges + 3 * self.elements.len()
    }

    pub fn element(&self, t: usize) -> &HhjElement {
        &self.elements[t]
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn triangle_dofs(&self, t: usize) -> [usize; 9] {
        self.triangle_dofs[t]
    }

    pub fn edge_dofs(&self, e: usize) -> [usize; 2] {
        [2 * e, 2 * e + 1]
    }

    pub fn interior_dofs(&self, t: usize) -> [usize; 3] {
        let base = 2 * self.n_edges + 3 * t;
        [base, base + 1, base + 2]
    }

    pub fn local_values(&self, t: usize, coeffs: &[f64]) -> [f64; 9] {
        self.triangle_dofs[t].map(|d| coeffs[d])
    }

    pub fn vertex_tensors(&self, t: usize, coeffs: &[f64]) -> [Tensor; 3] {
        self.elements[t].vertex_tensors(&self.local_values(t, coeffs))
    }
}
