//! Hsieh–Clough–Tocher C1 macroelement.
//!
//! Each triangle is split at its barycenter into three sub-triangles carrying
//! one cubic each. Sub-triangle `i` is `(P, V_{i+1}, V_{i+2})` and so contains
//! the macro edge `i`. The twelve local DOFs are, in order, value and
//! gradient at the three vertices followed by the normal derivative at the
//! three edge midpoints, taken along the global normal of each edge.

use std::sync::OnceLock;

use nalgebra::{DMatrix, Matrix2, SMatrix, SVector};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::Tensor;

use super::{check_order, Derivative, TriangleRule};

type Nullspace = SMatrix<f64, 30, 12>;

/// Monomials `1, x, y, x², xy, y², x³, x²y, xy², y³`.
fn monomials(p: &Point) -> [f64; 10] {
    let (x, y) = (p.x, p.y);
    [
        1.0,
        x,
        y,
        x * x,
        x * y,
        y * y,
        x * x * x,
        x * x * y,
        x * y * y,
        y * y * y,
    ]
}

fn monomial_gradients(p: &Point) -> [[f64; 2]; 10] {
    let (x, y) = (p.x, p.y);
    [
        [0.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [2.0 * x, 0.0],
        [y, x],
        [0.0, 2.0 * y],
        [3.0 * x * x, 0.0],
        [2.0 * x * y, x * x],
        [y * y, 2.0 * x * y],
        [0.0, 3.0 * y * y],
    ]
}

/// Second derivatives `(xx, xy, yy)` of the monomials.
fn monomial_hessians(p: &Point) -> [[f64; 3]; 10] {
    let (x, y) = (p.x, p.y);
    [
        [0.0; 3],
        [0.0; 3],
        [0.0; 3],
        [2.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 2.0],
        [6.0 * x, 0.0, 0.0],
        [2.0 * y, 2.0 * x, 0.0],
        [0.0, 2.0 * y, 2.0 * x],
        [0.0, 0.0, 6.0 * y],
    ]
}

const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

fn ref_vertex(i: usize) -> Point {
    Point::new(REF_VERTICES[i][0], REF_VERTICES[i][1])
}

fn ref_barycenter() -> Point {
    Point::new(1.0 / 3.0, 1.0 / 3.0)
}

/// Vertices of sub-triangle `i` in reference coordinates.
pub fn sub_reference_vertices(i: usize) -> [Point; 3] {
    [ref_barycenter(), ref_vertex((i + 1) % 3), ref_vertex((i + 2) % 3)]
}

/// Basis of the piecewise cubics on the reference split that are C1 across
/// the three internal edges, as 30 monomial coefficients per column.
fn reference_nullspace() -> &'static Nullspace {
    static N: OnceLock<Nullspace> = OnceLock::new();
    N.get_or_init(|| {
        let mut rows: Vec<[f64; 30]> = Vec::with_capacity(30);
        let p = ref_barycenter();
        for j in 0..3 {
            // P–V_j is shared by the sub-triangles j+1 and j+2.
            let (a, b) = ((j + 2) % 3, (j + 1) % 3);
            let v = ref_vertex(j);
            for k in 0..4 {
                let x = p + (v - p) * (k as f64 / 3.0);
                let m = monomials(&x);
                let mut row = [0.0; 30];
                for c in 0..10 {
                    row[10 * a + c] = m[c];
                    row[10 * b + c] = -m[c];
                }
                rows.push(row);
            }
            for k in 0..3 {
                let x = p + (v - p) * (k as f64 / 2.0);
                let g = monomial_gradients(&x);
                for d in 0..2 {
                    let mut row = [0.0; 30];
                    for c in 0..10 {
                        row[10 * a + c] = g[c][d];
                        row[10 * b + c] = -g[c][d];
                    }
                    rows.push(row);
                }
            }
        }
        let c = DMatrix::from_fn(rows.len(), 30, |r, k| rows[r][k]);
        let svd = c.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let max = svd.singular_values.max();
        let null: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] < 1e-10 * max)
            .collect();
        assert_eq!(null.len(), 12, "C1 piecewise cubics on the split have dimension 12");
        Nullspace::from_fn(|r, k| v_t[(null[k], r)])
    })
}

/// Piecewise cubic on one macro triangle, ready for evaluation.
#[derive(Clone, Copy, Debug)]
pub struct HctLocal {
    coeffs: SVector<f64, 30>,
    jinv_t: Matrix2<f64>,
}

impl HctLocal {
    fn sub(&self, sub: usize) -> &[f64] {
        &self.coeffs.as_slice()[10 * sub..10 * sub + 10]
    }

    /// Value at reference point `xr` of sub-triangle `sub`.
    pub fn value(&self, sub: usize, xr: &Point) -> f64 {
        monomials(xr).iter().zip(self.sub(sub)).map(|(m, c)| m * c).sum()
    }

    /// Physical gradient at reference point `xr` of sub-triangle `sub`.
    pub fn gradient(&self, sub: usize, xr: &Point) -> Point {
        let mut g = Point::zeros();
        for (m, c) in monomial_gradients(xr).iter().zip(self.sub(sub)) {
            g += Point::new(m[0], m[1]) * *c;
        }
        self.jinv_t * g
    }

    /// Physical hessian at reference point `xr` of sub-triangle `sub`.
    pub fn hessian(&self, sub: usize, xr: &Point) -> Tensor {
        let mut h = Tensor::zeros();
        for (m, c) in monomial_hessians(xr).iter().zip(self.sub(sub)) {
            h += Tensor::new(m[0], m[1], m[1], m[2]) * *c;
        }
        self.jinv_t * h * self.jinv_t.transpose()
    }
}

#[derive(Clone, Debug)]
pub struct HctElement {
    origin: Point,
    jac: Matrix2<f64>,
    jinv: Matrix2<f64>,
    coeff_map: SMatrix<f64, 30, 12>,
    normals: [Point; 3],
}

impl HctElement {
    /// `normals[i]` is the unit normal used for the midpoint DOF of edge `i`.
    pub fn new(p: &[Point; 3], normals: [Point; 3]) -> HctElement {
        let jac = Matrix2::from_columns(&[p[1] - p[0], p[2] - p[0]]);
        let jinv = jac.try_inverse().expect("non-degenerate triangle");
        let jinv_t = jinv.transpose();
        let n = reference_nullspace();

        let mut dof_matrix = SMatrix::<f64, 12, 12>::zeros();
        for j in 0..12 {
            let basis = HctLocal {
                coeffs: n.column(j).into_owned(),
                jinv_t,
            };
            let dofs = nodal_values(&basis, &normals);
            dof_matrix.set_column(j, &SVector::<f64, 12>::from_row_slice(&dofs));
        }
        let inv = dof_matrix.try_inverse().expect("HCT DOFs are unisolvent");
        HctElement {
            origin: p[0],
            jac,
            jinv,
            coeff_map: n * inv,
            normals,
        }
    }

    pub fn of(mesh: &Mesh, t: usize) -> HctElement {
        let normals = mesh.triangle_edges(t).map(|e| mesh.edge_frame(e).normal);
        HctElement::new(&mesh.triangle_points(t), normals)
    }

    pub fn normals(&self) -> &[Point; 3] {
        &self.normals
    }

    pub fn local(&self, dofs: &[f64; 12]) -> HctLocal {
        HctLocal {
            coeffs: self.coeff_map * SVector::<f64, 12>::from_row_slice(dofs),
            jinv_t: self.jinv.transpose(),
        }
    }

    pub fn to_reference(&self, x: &Point) -> Point {
        self.jinv * (x - self.origin)
    }

    pub fn to_physical(&self, xr: &Point) -> Point {
        self.origin + self.jac * xr
    }

    /// Sub-triangle containing `x` and its reference coordinates. Points on an
    /// internal edge go to the lower sub-triangle index.
    pub fn locate(&self, x: &Point) -> Result<(usize, Point)> {
        let xr = self.to_reference(x);
        let l = [1.0 - xr.x - xr.y, xr.x, xr.y];
        let mut sub = 0;
        for i in 1..3 {
            if l[i] < l[sub] {
                sub = i;
            }
        }
        if l[sub] < -1e-12 {
            return Err(Error::PointOutside { x: x.x, y: x.y });
        }
        Ok((sub, xr))
    }

    /// Quadrature over the three sub-triangles: sub-triangle index, reference
    /// point (equal to the macro barycentric coordinates `(λ1, λ2)`) and
    /// physical weight.
    pub fn sub_quadrature(&self, rule: &TriangleRule) -> Vec<(usize, Point, f64)> {
        // Each sub-triangle has a third of the area; reference rules weigh 1/2.
        let scale = self.jac.determinant().abs() / 3.0;
        let mut out = Vec::with_capacity(3 * rule.len());
        for i in 0..3 {
            let v = sub_reference_vertices(i);
            for (l, &w) in rule.points.iter().zip(&rule.weights) {
                out.push((i, v[0] * l[0] + v[1] * l[1] + v[2] * l[2], w * scale));
            }
        }
        out
    }

    /// Physical vertices of sub-triangle `i`.
    pub fn sub_triangle(&self, i: usize) -> [Point; 3] {
        sub_reference_vertices(i).map(|v| self.to_physical(&v))
    }

    /// Value, gradient or hessian at the physical point `x`.
    pub fn eval(&self, dofs: &[f64; 12], x: &Point, order: u8) -> Result<Derivative> {
        check_order(order)?;
        let (sub, xr) = self.locate(x)?;
        let local = self.local(dofs);
        Ok(match order {
            0 => Derivative::Value(local.value(sub, &xr)),
            1 => Derivative::Gradient(local.gradient(sub, &xr)),
            _ => Derivative::Hessian(local.hessian(sub, &xr)),
        })
    }

    /// DOFs of a C1 function given by its value and gradient.
    pub fn interpolate(&self, f: impl Fn(Point) -> (f64, Point)) -> [f64; 12] {
        let mut dofs = [0.0; 12];
        for k in 0..3 {
            let (v, g) = f(self.to_physical(&ref_vertex(k)));
            dofs[3 * k] = v;
            dofs[3 * k + 1] = g.x;
            dofs[3 * k + 2] = g.y;
        }
        for i in 0..3 {
            let mid = (ref_vertex((i + 1) % 3) + ref_vertex((i + 2) % 3)) * 0.5;
            let (_, g) = f(self.to_physical(&mid));
            dofs[9 + i] = self.normals[i].dot(&g);
        }
        dofs
    }
}

/// The twelve DOF functionals applied to a local piecewise cubic.
fn nodal_values(f: &HctLocal, normals: &[Point; 3]) -> [f64; 12] {
    let mut dofs = [0.0; 12];
    for k in 0..3 {
        // V_k belongs to sub-triangle k+2.
        let sub = (k + 2) % 3;
        let v = ref_vertex(k);
        let g = f.gradient(sub, &v);
        dofs[3 * k] = f.value(sub, &v);
        dofs[3 * k + 1] = g.x;
        dofs[3 * k + 2] = g.y;
    }
    for i in 0..3 {
        let mid = (ref_vertex((i + 1) % 3) + ref_vertex((i + 2) % 3)) * 0.5;
        dofs[9 + i] = normals[i].dot(&f.gradient(i, &mid));
    }
    dofs
}

/// Global HCT space. Vertex `v` owns DOFs `3v..3v+3` (value, ∂x, ∂y) and edge
/// `e` owns DOF `3V + e`. DOFs on the boundary are held at zero by callers.
#[derive(Clone, Debug)]
pub struct HctSpace {
    elements: Vec<HctElement>,
    triangle_dofs: Vec<[usize; 12]>,
    constrained: Vec<bool>,
}

impl HctSpace {
    pub fn new(mesh: &Mesh) -> HctSpace {
        let nv = mesh.n_vertices();
        let elements = (0..mesh.n_triangles()).map(|t| HctElement::of(mesh, t)).collect();
        let triangle_dofs = (0..mesh.n_triangles())
            .map(|t| {
                let v = mesh.triangle(t);
                let e = mesh.triangle_edges(t);
                let mut d = [0usize; 12];
                for k in 0..3 {
                    for c in 0..3 {
                        d[3 * k + c] = 3 * v[k] + c;
                    }
                    d[9 + k] = 3 * nv + e[k];
                }
                d
            })
            .collect();
        let mut constrained = vec![false; 3 * nv + mesh.n_edges()];
        for v in 0..nv {
            if mesh.is_boundary_vertex(v) {
                constrained[3 * v..3 * v + 3].fill(true);
            }
        }
        for e in 0..mesh.n_edges() {
            constrained[3 * nv + e] = mesh.is_boundary_edge(e);
        }
        HctSpace {
            elements,
            triangle_dofs,
            constrained,
        }
    }

    pub fn dim(&self) -> usize {
        self.constrained.len()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn element(&self, t: usize) -> &HctElement {
        &self.elements[t]
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn triangle_dofs(&self, t: usize) -> [usize; 12] {
        self.triangle_dofs[t]
    }

    pub fn local_values(&self, t: usize, coeffs: &[f64]) -> [f64; 12] {
        self.triangle_dofs[t].map(|d| coeffs[d])
    }

    pub fn local(&self, t: usize, coeffs: &[f64]) -> HctLocal {
        self.elements[t].local(&self.local_values(t, coeffs))
    }

    pub fn eval(&self, t: usize, coeffs: &[f64], x: &Point, order: u8) -> Result<Derivative> {
        self.elements[t].eval(&self.local_values(t, coeffs), x, order)
    }
}
