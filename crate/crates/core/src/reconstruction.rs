//! C1 potential reconstruction by nodal averaging into the HCT space.

use crate::assembly::Density;
use crate::equilibration::Source;
use crate::fespace::{HctSpace, P2DofMap, P2Element};
use crate::mesh::Mesh;

/// HCT coefficients of a clamped C1 reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialReconstruction {
    pub coeffs: Vec<f64>,
    pub source: Source,
}

/// Averages the vertex values, vertex gradients and edge-midpoint normal
/// derivatives of the P2 field `v` over the triangles sharing each node.
/// Boundary DOFs are set to zero.
pub fn enrich(mesh: &Mesh, dofs: &P2DofMap, hct: &HctSpace, v: &[f64], source: Source) -> PotentialReconstruction {
    let mut sum = vec![0.0; hct.dim()];
    let mut count = vec![0u32; hct.dim()];
    const CORNERS: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    const MIDPOINTS: [[f64; 3]; 3] = [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];

    // Triangles in increasing index order, so every mean is summed the same way.
    for t in 0..mesh.n_triangles() {
        let el = P2Element::of(mesh, t);
        let local = dofs.local_values(t, v);
        let g = hct.triangle_dofs(t);
        let normals = hct.element(t).normals();
        for k in 0..3 {
            let grad = el.gradient(&local, &CORNERS[k]);
            for (c, value) in [P2Element::value(&local, &CORNERS[k]), grad.x, grad.y]
                .into_iter()
                .enumerate()
            {
                sum[g[3 * k + c]] += value;
                count[g[3 * k + c]] += 1;
            }
            let dn = el.gradient(&local, &MIDPOINTS[k]).dot(&normals[k]);
            sum[g[9 + k]] += dn;
            count[g[9 + k]] += 1;
        }
    }
    let coeffs = (0..hct.dim())
        .map(|d| {
            if hct.is_constrained(d) || count[d] == 0 {
                0.0
            } else {
                sum[d] / count[d] as f64
            }
        })
        .collect();
    PotentialReconstruction { coeffs, source }
}

/// `∫ ρ (s - v)` over the mesh and `|∫_K ρ (s - v)|` per triangle.
pub fn nonconformity_goal_term(
    mesh: &Mesh,
    dofs: &P2DofMap,
    hct: &HctSpace,
    s: &PotentialReconstruction,
    v: &[f64],
    rho: &dyn Density,
) -> (f64, Vec<f64>) {
    let mut signed = Vec::with_capacity(mesh.n_triangles());
    let mut pts = Vec::new();
    for t in 0..mesh.n_triangles() {
        pts.clear();
        rho.weighted_points(mesh, t, &mut pts);
        let el = hct.element(t);
        let local = hct.local(t, &s.coeffs);
        let p2 = dofs.local_values(t, v);
        let mut acc = 0.0;
        for (x, w) in &pts {
            let (sub, xr) = el.locate(x).expect("quadrature point inside its triangle");
            let l = [1.0 - xr.x - xr.y, xr.x, xr.y];
            acc += w * (local.value(sub, &xr) - P2Element::value(&p2, &l));
        }
        signed.push(acc);
    }
    let global = signed.iter().sum();
    (global, signed.into_iter().map(f64::abs).collect())
}

/// `∫ ρ s` for an HCT function.
pub fn integrate_hct(mesh: &Mesh, hct: &HctSpace, s: &[f64], rho: &dyn Density) -> f64 {
    let mut pts = Vec::new();
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        pts.clear();
        rho.weighted_points(mesh, t, &mut pts);
        let el = hct.element(t);
        let local = hct.local(t, s);
        for (x, w) in &pts {
            let (sub, xr) = el.locate(x).expect("quadrature point inside its triangle");
            total += w * local.value(sub, &xr);
        }
    }
    total
}

/// Largest two-sided mismatch of value and gradient of an HCT function
/// across interior edges, sampled at `samples` equispaced interior points of
/// each edge.
pub fn c1_mismatch(mesh: &Mesh, hct: &HctSpace, s: &[f64], samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for e in 0..mesh.n_edges() {
        let (t0, Some(t1)) = mesh.edge_triangles(e) else {
            continue;
        };
        let [a, b] = mesh.edge(e);
        for k in 1..=samples {
            let q = k as f64 / (samples + 1) as f64;
            let x = mesh.vertex(a) * (1.0 - q) + mesh.vertex(b) * q;
            let eval = |t: usize| {
                let (sub, xr) = hct.element(t).locate(&x).expect("edge point inside its triangle");
                let local = hct.local(t, s);
                (local.value(sub, &xr), local.gradient(sub, &xr))
            };
            let ((v0, g0), (v1, g1)) = (eval(t0), eval(t1));
            worst = worst.max((v0 - v1).abs()).max((g0 - g1).amax());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{FnDensity, Zero};
    use crate::fespace::{edge_rule, HctElement};
    use crate::mesh::Point;

    fn setup() -> (Mesh, P2DofMap, HctSpace) {
        let m = Mesh::unit_square().refine_uniform().refine_nvb(&[2, 5]);
        let d = P2DofMap::new(&m);
        let h = HctSpace::new(&m);
        (m, d, h)
    }

    #[test]
    fn zero_in_zero_out() {
        let (m, d, h) = setup();
        let s = enrich(&m, &d, &h, &vec![0.0; d.dim()], Source::Primal);
        assert!(s.coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn global_quadratic_is_reproduced_at_interior_nodes() {
        let (m, d, h) = setup();
        let q = |p: Point| p.x * p.x - 3.0 * p.x * p.y + 0.5 * p.y * p.y;
        let gq = |p: Point| Point::new(2.0 * p.x - 3.0 * p.y, -3.0 * p.x + p.y);
        let v = d.interpolate(&m, q);
        let s = enrich(&m, &d, &h, &v, Source::Primal);
        for t in 0..m.n_triangles() {
            let direct = h.element(t).interpolate(|x| (q(x), gq(x)));
            for (k, &g) in h.triangle_dofs(t).iter().enumerate() {
                let expected = if h.is_constrained(g) { 0.0 } else { direct[k] };
                assert!((s.coeffs[g] - expected).abs() < 1e-12, "dof {g}");
            }
        }
    }

    #[test]
    fn gradient_jump_is_averaged() {
        // |x - y| kinks along the diagonal through the interior vertex (0.5, 0.5).
        let m = Mesh::unit_square().refine_uniform();
        let d = P2DofMap::new(&m);
        let h = HctSpace::new(&m);
        let v = d.interpolate(&m, |p| (p.x - p.y).abs());
        let s = enrich(&m, &d, &h, &v, Source::Primal);
        let center = (0..m.n_vertices())
            .find(|&i| m.vertex(i) == Point::new(0.5, 0.5))
            .unwrap();
        let mut grads = Vec::new();
        for t in 0..m.n_triangles() {
            if let Some(k) = m.triangle(t).iter().position(|&i| i == center) {
                let mut l = [0.0; 3];
                l[k] = 1.0;
                grads.push(P2Element::of(&m, t).gradient(&d.local_values(t, &v), &l));
            }
        }
        let mean = grads.iter().sum::<Point>() / grads.len() as f64;
        assert!((s.coeffs[3 * center + 1] - mean.x).abs() < 1e-14);
        assert!((s.coeffs[3 * center + 2] - mean.y).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_is_c1_and_clamped() {
        let (m, d, h) = setup();
        let v = d.interpolate(&m, |p| (p.x * (1.0 - p.x) * p.y * (1.0 - p.y)) * (3.0 * p.x).exp());
        let v: Vec<f64> = (0..d.dim())
            .map(|i| if d.is_constrained(i) { 0.0 } else { v[i] })
            .collect();
        let s = enrich(&m, &d, &h, &v, Source::Primal);
        let rule = edge_rule(4).unwrap();
        for e in 0..m.n_edges() {
            let f = m.edge_frame(e);
            let [a, b] = m.edge(e);
            for &q in &rule.points {
                let x = m.vertex(a) * (1.0 - q) + m.vertex(b) * q;
                let eval = |t: usize| {
                    let el: &HctElement = h.element(t);
                    let (sub, xr) = el.locate(&x).unwrap();
                    let local = h.local(t, &s.coeffs);
                    (local.value(sub, &xr), local.gradient(sub, &xr))
                };
                let (v0, g0) = eval(f.plus);
                match f.minus {
                    Some(mn) => {
                        let (v1, g1) = eval(mn);
                        assert!((v0 - v1).abs() < 1e-10);
                        assert!((g0 - g1).norm() < 1e-10);
                    }
                    None => assert!(v0.abs() < 1e-10 && g0.dot(&f.normal).abs() < 1e-10),
                }
            }
        }
    }

    #[test]
    fn c1_mismatch_vanishes_on_the_global_space() {
        let (m, d, h) = setup();
        let v = d.interpolate(&m, |p| (p.x * (1.0 - p.x) * p.y * (1.0 - p.y)) * (2.0 * p.y).sin());
        let s = enrich(&m, &d, &h, &v, Source::Primal);
        assert!(c1_mismatch(&m, &h, &s.coeffs, 3) < 1e-12);
        // Every coefficient vector of the global space is C1.
        let mut other = s.coeffs.clone();
        let interior = (0..h.dim()).find(|&g| !h.is_constrained(g)).unwrap();
        other[interior] += 1.0;
        assert!(c1_mismatch(&m, &h, &other, 3) < 1e-12);
    }

    #[test]
    fn nonconformity_term() {
        let (m, d, h) = setup();
        let v = d.interpolate(&m, |p| p.x * (1.0 - p.x) * p.y * (1.0 - p.y));
        let v: Vec<f64> = (0..d.dim())
            .map(|i| if d.is_constrained(i) { 0.0 } else { v[i] })
            .collect();
        let s = enrich(&m, &d, &h, &v, Source::Primal);
        let rho = FnDensity::new(|p: Point| 1.0 + p.x, 4);
        let (global, per) = nonconformity_goal_term(&m, &d, &h, &s, &v, &rho);
        assert!(per.iter().sum::<f64>() >= global.abs());
        let (zero, per0) = nonconformity_goal_term(&m, &d, &h, &s, &v, &Zero);
        assert_eq!(zero, 0.0);
        assert!(per0.iter().all(|&x| x == 0.0));
        let direct = integrate_hct(&m, &h, &s.coeffs, &rho) - crate::assembly::integrate_p2(&m, &d, &v, &rho);
        assert!((global - direct).abs() < 1e-14);
    }
}
