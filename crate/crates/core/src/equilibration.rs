//! Equilibrated moment tensors for C0 interior penalty solutions.
//!
//! The normal-normal trace on every edge is
//! `{{∂_nn u}} - σ/h_e [[∂_n u]]` and the interior moments against constant
//! tensors `q` are `∫_K D²u : q - Σ_{e ⊂ ∂K} γ_e ∫_e [[∂_n u]] q_nn` with
//! `γ_e = 1/2` on interior and `1` on boundary edges. Tested against a P2
//! function `v` the resulting tensor reproduces `a_IP(u, v)` through the
//! broken pairing `Σ_K ∫_K σ : D²v - Σ_e ∫_e σ_nn [[∂_n v]]`.

use crate::assembly::{edge_barycentric, edge_sides};
use crate::fespace::hhj::eval_linear;
use crate::fespace::{edge_rule, triangle_rule, HctSpace, HhjSpace, P2DofMap, P2Element};
use crate::mesh::Mesh;
use crate::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Primal,
    Dual,
}

/// HHJ coefficients of an equilibrated moment tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTensor {
    pub coeffs: Vec<f64>,
    pub source: Source,
}

impl MomentTensor {
    pub fn zero(space: &HhjSpace, source: Source) -> MomentTensor {
        MomentTensor {
            coeffs: vec![0.0; space.dim()],
            source,
        }
    }
}

/// Normal-derivative jump `[[∂_n u]]` at both ends of edge `e` (lower
/// global vertex first).
pub fn normal_jump_endpoints(mesh: &Mesh, dofs: &P2DofMap, u: &[f64], e: usize) -> [f64; 2] {
    let n = mesh.edge_frame(e).normal;
    let mut j = [0.0; 2];
    for (t, sign, _) in edge_sides(mesh, e) {
        let el = P2Element::of(mesh, t);
        let local = dofs.local_values(t, u);
        for (k, s) in [0.0, 1.0].into_iter().enumerate() {
            j[k] += sign * el.gradient(&local, &edge_barycentric(mesh, t, e, s)).dot(&n);
        }
    }
    j
}

/// Average `{{∂_nn u}}` on edge `e`; constant for P2.
pub fn normal_normal_average(mesh: &Mesh, dofs: &P2DofMap, u: &[f64], e: usize) -> f64 {
    let n = mesh.edge_frame(e).normal;
    edge_sides(mesh, e)
        .into_iter()
        .map(|(t, _, w)| {
            let h = P2Element::of(mesh, t).hessian(&dofs.local_values(t, u));
            w * n.dot(&(h * n))
        })
        .sum()
}

/// The equilibrated tensor built from the P2 field `u` with penalty `sigma`.
pub fn build_equilibrated_tensor(
    mesh: &Mesh,
    dofs: &P2DofMap,
    space: &HhjSpace,
    u: &[f64],
    sigma: f64,
    source: Source,
) -> MomentTensor {
    let mut coeffs = vec![0.0; space.dim()];
    let mut jumps = Vec::with_capacity(mesh.n_edges());
    for e in 0..mesh.n_edges() {
        let h = mesh.edge_length(e);
        let jump = normal_jump_endpoints(mesh, dofs, u, e);
        let avg = normal_normal_average(mesh, dofs, u, e);
        let g0 = avg - sigma / h * jump[0];
        let g1 = avg - sigma / h * jump[1];
        let [d0, d1] = space.edge_dofs(e);
        coeffs[d0] = h * (g0 / 3.0 + g1 / 6.0);
        coeffs[d1] = h * (g0 / 6.0 + g1 / 3.0);
        jumps.push(jump);
    }
    for t in 0..mesh.n_triangles() {
        let area = mesh.area(t);
        let hess = P2Element::of(mesh, t).hessian(&dofs.local_values(t, u));
        let mut m = [area * hess[(0, 0)], area * hess[(1, 1)], 2.0 * area * hess[(0, 1)]];
        for e in mesh.triangle_edges(t) {
            let gamma = if mesh.is_boundary_edge(e) { 1.0 } else { 0.5 };
            let n = mesh.edge_frame(e).normal;
            let jump_integral = mesh.edge_length(e) * 0.5 * (jumps[e][0] + jumps[e][1]);
            let q = [n.x * n.x, n.y * n.y, 2.0 * n.x * n.y];
            for k in 0..3 {
                m[k] -= gamma * jump_integral * q[k];
            }
        }
        for (d, v) in space.interior_dofs(t).into_iter().zip(m) {
            coeffs[d] = v;
        }
    }
    MomentTensor { coeffs, source }
}

/// `Σ_K ∫_K σ : D²φ - Σ_e ∫_e σ_nn [[∂_n φ]]` for every P2 basis function φ.
pub fn div_div_pairing(mesh: &Mesh, dofs: &P2DofMap, space: &HhjSpace, tensor: &MomentTensor) -> Vec<f64> {
    let mut out = vec![0.0; dofs.dim()];
    let tri_rule = triangle_rule(1).expect("degree 1");
    for t in 0..mesh.n_triangles() {
        let el = P2Element::of(mesh, t);
        let h = el.basis_hessians();
        let s = space.vertex_tensors(t, &tensor.coeffs);
        let area = mesh.area(t);
        let mut mean = Tensor::zeros();
        for (l, w) in tri_rule.points.iter().zip(&tri_rule.weights) {
            mean += eval_linear(&s, l) * (2.0 * w);
        }
        for (k, &g) in dofs.triangle_dofs(t).iter().enumerate() {
            out[g] += area * mean.dot(&h[k]);
        }
    }
    let rule = edge_rule(2).expect("degree 2");
    for e in 0..mesh.n_edges() {
        let frame = mesh.edge_frame(e);
        let n = frame.normal;
        // σ_nn from the plus side; it is single valued.
        let s_plus = space.vertex_tensors(frame.plus, &tensor.coeffs);
        let snn: Vec<f64> = rule
            .points
            .iter()
            .map(|&q| {
                let tau = eval_linear(&s_plus, &edge_barycentric(mesh, frame.plus, e, q));
                n.dot(&(tau * n))
            })
            .collect();
        for (t, sign, _) in edge_sides(mesh, e) {
            let el = P2Element::of(mesh, t);
            let g = dofs.triangle_dofs(t);
            for (qi, (&q, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
                let grads = el.basis_gradients(&edge_barycentric(mesh, t, e, q));
                for k in 0..6 {
                    out[g[k]] -= w * frame.length * snn[qi] * sign * grads[k].dot(&n);
                }
            }
        }
    }
    out
}

/// Largest equilibrium defect `|⟨div div σ, φ⟩ - (f, φ)|` over the free P2
/// basis functions, relative to the largest load entry. `load` holds
/// `(f, φ)` for all DOFs, as returned by [`crate::assembly::load_vector`].
pub fn verify_equilibrium(mesh: &Mesh, dofs: &P2DofMap, space: &HhjSpace, tensor: &MomentTensor, load: &[f64]) -> f64 {
    let pairing = div_div_pairing(mesh, dofs, space, tensor);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &d in dofs.free_dofs() {
        worst = worst.max((pairing[d] - load[d]).abs());
        scale = scale.max(load[d].abs());
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// A hessian field to compare a moment tensor with.
#[derive(Clone, Copy)]
pub enum HessianField<'a> {
    P2 { dofs: &'a P2DofMap, coeffs: &'a [f64] },
    Hct { space: &'a HctSpace, coeffs: &'a [f64] },
}

/// `‖σ - D²v‖` over the mesh together with the per-triangle contributions
/// `‖σ - D²v‖_K`.
pub fn tensor_minus_hessian_norm(
    mesh: &Mesh,
    space: &HhjSpace,
    tensor: &MomentTensor,
    v: HessianField,
) -> (f64, Vec<f64>) {
    let rule = triangle_rule(4).expect("degree 4");
    let mut per = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let s = space.vertex_tensors(t, &tensor.coeffs);
        let sq = match v {
            HessianField::P2 { dofs, coeffs } => {
                let h = P2Element::of(mesh, t).hessian(&dofs.local_values(t, coeffs));
                let scale = 2.0 * mesh.area(t);
                rule.points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(l, w)| w * scale * (eval_linear(&s, l) - h).norm_squared())
                    .sum::<f64>()
            }
            HessianField::Hct { space: hct, coeffs } => {
                let el = hct.element(t);
                let local = hct.local(t, coeffs);
                el.sub_quadrature(rule)
                    .into_iter()
                    .map(|(sub, xr, w)| {
                        let l = [1.0 - xr.x - xr.y, xr.x, xr.y];
                        w * (eval_linear(&s, &l) - local.hessian(sub, &xr)).norm_squared()
                    })
                    .sum::<f64>()
            }
        };
        per.push(sq.sqrt());
    }
    let total = per.iter().map(|v| v * v).sum::<f64>().sqrt();
    (total, per)
}
