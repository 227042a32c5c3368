//! The C0 interior penalty discretisation of the clamped plate.
//!
//! `a_IP(u, v) = Σ_K ∫_K D²u : D²v
//!             - Σ_e ∫_e ([[∂_n u]] {{∂_nn v}} + {{∂_nn u}} [[∂_n v]])
//!             + Σ_e σ/h_e ∫_e [[∂_n u]] [[∂_n v]]`
//!
//! with the sums over all edges, boundary jumps and averages being plain
//! traces. The value condition `u = 0` is imposed by dropping boundary DOFs;
//! the slope condition enters weakly through the boundary edge terms.

use crate::error::{Error, Result};
use crate::fespace::{edge_rule, triangle_rule, P2DofMap, P2Element};
use crate::mesh::{Mesh, Point};
use crate::solver::{CholeskySolver, SparseSpdMatrix};
use crate::Tensor;

/// A scalar weight that can be integrated against finite element functions.
pub trait Density: Sync {
    /// Appends points and weights such that `Σ w v(x) ≈ ∫_K ρ v` for the
    /// piecewise polynomials used here.
    fn weighted_points(&self, mesh: &Mesh, t: usize, out: &mut Vec<(Point, f64)>);

    /// `∫_K ρ²`.
    fn square_integral(&self, mesh: &Mesh, t: usize) -> f64;
}

/// A smooth density integrated with a single rule of fixed degree.
pub struct FnDensity<F> {
    pub f: F,
    pub degree: usize,
}

impl<F: Fn(Point) -> f64 + Sync> FnDensity<F> {
    pub fn new(f: F, degree: usize) -> FnDensity<F> {
        FnDensity { f, degree }
    }
}

impl<F: Fn(Point) -> f64 + Sync> Density for FnDensity<F> {
    fn weighted_points(&self, mesh: &Mesh, t: usize, out: &mut Vec<(Point, f64)>) {
        let rule = triangle_rule(self.degree).expect("supported degree");
        let tri = mesh.triangle_points(t);
        out.extend(rule.mapped(&tri).map(|(x, w)| (x, w * (self.f)(x))));
    }

    fn square_integral(&self, mesh: &Mesh, t: usize) -> f64 {
        let rule =
            triangle_rule((2 * self.degree).min(crate::fespace::quadrature::MAX_DEGREE)).expect("supported degree");
        rule.integrate(&mesh.triangle_points(t), |x| (self.f)(x).powi(2))
    }
}

/// The zero density.
pub struct Zero;

impl Density for Zero {
    fn weighted_points(&self, _: &Mesh, _: usize, _: &mut Vec<(Point, f64)>) {}

    fn square_integral(&self, _: &Mesh, _: usize) -> f64 {
        0.0
    }
}

/// A density evaluated once on a fixed mesh and replayed afterwards.
///
/// Only valid for the mesh it was built on; `weighted_points` and
/// `square_integral` ignore their mesh argument.
pub struct Tabulated {
    offsets: Vec<usize>,
    points: Vec<(Point, f64)>,
    squares: Vec<f64>,
}

impl Tabulated {
    pub fn new(mesh: &Mesh, rho: &dyn Density) -> Tabulated {
        let mut offsets = Vec::with_capacity(mesh.n_triangles() + 1);
        let mut points = Vec::new();
        offsets.push(0);
        for t in 0..mesh.n_triangles() {
            rho.weighted_points(mesh, t, &mut points);
            offsets.push(points.len());
        }
        let squares = (0..mesh.n_triangles()).map(|t| rho.square_integral(mesh, t)).collect();
        Tabulated {
            offsets,
            points,
            squares,
        }
    }

    pub fn n_triangles(&self) -> usize {
        self.squares.len()
    }
}

impl Density for Tabulated {
    fn weighted_points(&self, _: &Mesh, t: usize, out: &mut Vec<(Point, f64)>) {
        out.extend_from_slice(&self.points[self.offsets[t]..self.offsets[t + 1]]);
    }

    fn square_integral(&self, _: &Mesh, t: usize) -> f64 {
        self.squares[t]
    }
}

/// Barycentric coordinates in triangle `t` of the point at parameter `s`
/// along edge `e`, measured from its lower global vertex.
pub fn edge_barycentric(mesh: &Mesh, t: usize, e: usize, s: f64) -> [f64; 3] {
    let [a, b] = mesh.edge(e);
    let tri = mesh.triangle(t);
    let mut l = [0.0; 3];
    for k in 0..3 {
        if tri[k] == a {
            l[k] = 1.0 - s;
        } else if tri[k] == b {
            l[k] = s;
        }
    }
    l
}

/// Side data of one edge: triangle, sign in the jump, weight in the average.
pub fn edge_sides(mesh: &Mesh, e: usize) -> Vec<(usize, f64, f64)> {
    let (plus, minus) = mesh.edge_triangles(e);
    match minus {
        Some(m) => vec![(plus, 1.0, 0.5), (m, -1.0, 0.5)],
        None => vec![(plus, 1.0, 1.0)],
    }
}

/// Stiffness matrix on the free DOFs.
pub fn assemble_aip(mesh: &Mesh, dofs: &P2DofMap, sigma: f64) -> Result<SparseSpdMatrix> {
    let triplets = assemble(mesh, dofs, sigma, |g| dofs.free_index(g))?;
    Ok(SparseSpdMatrix::from_triplets(dofs.free_count(), &triplets))
}

/// The form on all DOFs, boundary ones included. Only positive semidefinite.
pub fn assemble_aip_unconstrained(mesh: &Mesh, dofs: &P2DofMap, sigma: f64) -> Result<SparseSpdMatrix> {
    let triplets = assemble(mesh, dofs, sigma, Some)?;
    Ok(SparseSpdMatrix::from_triplets(dofs.dim(), &triplets))
}

fn assemble(
    mesh: &Mesh,
    dofs: &P2DofMap,
    sigma: f64,
    index: impl Fn(usize) -> Option<usize>,
) -> Result<Vec<(usize, usize, f64)>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidPenalty(sigma));
    }
    let mut triplets = Vec::with_capacity(36 * mesh.n_triangles() + 144 * mesh.n_edges());
    let mut push = |gi: usize, gj: usize, v: f64| {
        if let (Some(i), Some(j)) = (index(gi), index(gj)) {
            triplets.push((i, j, v));
        }
    };

    for t in 0..mesh.n_triangles() {
        let el = P2Element::of(mesh, t);
        let h = el.basis_hessians();
        let g = dofs.triangle_dofs(t);
        for i in 0..6 {
            for j in 0..6 {
                push(g[i], g[j], el.area * h[i].dot(&h[j]));
            }
        }
    }

    let rule = edge_rule(3)?;
    for e in 0..mesh.n_edges() {
        let frame = mesh.edge_frame(e);
        let n = frame.normal;
        let len = frame.length;
        // Up to 12 edge-local functions; shared DOFs appear twice and are summed.
        let mut ids = Vec::with_capacity(12);
        let mut avg = Vec::with_capacity(12);
        let mut jump: Vec<Vec<f64>> = Vec::with_capacity(12);
        for (t, sign, weight) in edge_sides(mesh, e) {
            let el = P2Element::of(mesh, t);
            let h = el.basis_hessians();
            let grads: Vec<[Point; 6]> = rule
                .points
                .iter()
                .map(|&s| el.basis_gradients(&edge_barycentric(mesh, t, e, s)))
                .collect();
            for (k, &dof) in dofs.triangle_dofs(t).iter().enumerate() {
                ids.push(dof);
                avg.push(weight * n.dot(&(h[k] * n)));
                jump.push(grads.iter().map(|g| sign * g[k].dot(&n)).collect());
            }
        }
        for i in 0..ids.len() {
            for j in 0..ids.len() {
                let mut v = 0.0;
                for (q, &w) in rule.weights.iter().enumerate() {
                    let (ji, jj) = (jump[i][q], jump[j][q]);
                    v += w * len * (-(ji * avg[j] + avg[i] * jj) + sigma / len * ji * jj);
                }
                push(ids[i], ids[j], v);
            }
        }
    }
    Ok(triplets)
}

/// `∫ ρ φ` for every P2 basis function, constrained DOFs included.
pub fn load_vector(mesh: &Mesh, dofs: &P2DofMap, rho: &dyn Density) -> Vec<f64> {
    let mut out = vec![0.0; dofs.dim()];
    let mut pts = Vec::new();
    for t in 0..mesh.n_triangles() {
        pts.clear();
        rho.weighted_points(mesh, t, &mut pts);
        let g = dofs.triangle_dofs(t);
        let mut local = [0.0; 6];
        for (x, w) in &pts {
            let phi = P2Element::basis_values(&mesh.barycentric(t, x));
            for k in 0..6 {
                local[k] += w * phi[k];
            }
        }
        for k in 0..6 {
            out[g[k]] += local[k];
        }
    }
    out
}

/// Load vector restricted to the free DOFs.
pub fn assemble_load(mesh: &Mesh, dofs: &P2DofMap, rho: &dyn Density) -> Vec<f64> {
    dofs.restrict(&load_vector(mesh, dofs, rho))
}

/// `∫ ρ v_h` for a P2 function given by all its coefficients.
pub fn integrate_p2(mesh: &Mesh, dofs: &P2DofMap, coeffs: &[f64], rho: &dyn Density) -> f64 {
    load_vector(mesh, dofs, rho)
        .iter()
        .zip(coeffs)
        .map(|(a, b)| a * b)
        .sum()
}

/// Primal and dual discrete solutions over all P2 DOFs.
#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub sigma: f64,
}

/// Assembles and factors `a_IP` once and solves for both loads.
pub fn solve_primal_dual(
    mesh: &Mesh,
    dofs: &P2DofMap,
    sigma: f64,
    f: &dyn Density,
    f_dual: &dyn Density,
    rel_tol: f64,
) -> Result<DiscreteSolution> {
    let a = assemble_aip(mesh, dofs, sigma)?;
    let chol = CholeskySolver::new(&a)?;
    let u = chol.solve(&assemble_load(mesh, dofs, f), rel_tol)?;
    let z = chol.solve(&assemble_load(mesh, dofs, f_dual), rel_tol)?;
    Ok(DiscreteSolution {
        primal: dofs.expand(&u),
        dual: dofs.expand(&z),
        sigma,
    })
}

/// `a_IP(u, v)` for two P2 functions given by all their coefficients.
pub fn aip_form(mesh: &Mesh, dofs: &P2DofMap, sigma: f64, u: &[f64], v: &[f64]) -> Result<f64> {
    let a = assemble_aip(mesh, dofs, sigma)?;
    let au = a.mul_vec(&dofs.restrict(u));
    Ok(au.iter().zip(dofs.restrict(v)).map(|(p, q)| p * q).sum())
}

/// Discrete energy norm `(Σ_K ‖D²v‖² + Σ_e σ/h_e ‖[[∂_n v]]‖²)^{1/2}` of a
/// broken H² function described by per-triangle hessian and gradient
/// callbacks, integrated exactly for polynomials of degree `degree`.
pub fn ip_norm(
    mesh: &Mesh,
    sigma: f64,
    degree: usize,
    hessian: impl Fn(usize, Point) -> Tensor,
    gradient: impl Fn(usize, Point) -> Point,
) -> Result<f64> {
    let tri_rule = triangle_rule(degree)?;
    let e_rule = edge_rule(degree)?;
    let mut sum = 0.0;
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle_points(t);
        sum += tri_rule.integrate(&tri, |x| hessian(t, x).norm_squared());
    }
    for e in 0..mesh.n_edges() {
        let frame = mesh.edge_frame(e);
        let [a, b] = mesh.edge(e);
        let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
        let mut jj = 0.0;
        for (&s, &w) in e_rule.points.iter().zip(&e_rule.weights) {
            let x = pa * (1.0 - s) + pb * s;
            let mut j = 0.0;
            for (t, sign, _) in edge_sides(mesh, e) {
                j += sign * gradient(t, x).dot(&frame.normal);
            }
            jj += w * j * j;
        }
        sum += sigma / frame.length * jj * frame.length;
    }
    Ok(sum.sqrt())
}

/// Energy norm of a P2 function.
pub fn ip_norm_p2(mesh: &Mesh, dofs: &P2DofMap, sigma: f64, coeffs: &[f64]) -> Result<f64> {
    ip_norm(
        mesh,
        sigma,
        2,
        |t, _| P2Element::of(mesh, t).hessian(&dofs.local_values(t, coeffs)),
        |t, x| {
            let l = mesh.barycentric(t, &x);
            P2Element::of(mesh, t).gradient(&dofs.local_values(t, coeffs), &l)
        },
    )
}
