//! Goal-oriented error estimators built from equilibrated moments and C1
//! reconstructions of the primal and dual discrete solutions.

use crate::assembly::{edge_barycentric, edge_sides, integrate_p2, load_vector, Density, DiscreteSolution};
use crate::equilibration::{
    build_equilibrated_tensor, div_div_pairing, tensor_minus_hessian_norm, HessianField, MomentTensor, Source,
};
use crate::error::{Error, Result};
use crate::fespace::hhj::eval_linear;
use crate::fespace::{edge_rule, triangle_rule, HctSpace, HhjSpace, P2DofMap, P2Element};
use crate::mesh::{Mesh, Point};
use crate::reconstruction::{enrich, integrate_hct, nonconformity_goal_term, PotentialReconstruction};
use crate::Tensor;

/// Upper bound of the constant in `‖f - f_h‖_{-2} ≤ c (Σ h_K⁴ ‖f‖²_K)^{1/2}`.
pub const OSCILLATION_CONSTANT: f64 = 0.3682146;

/// `½ (σ̃_eq + D²s̃_h)`, evaluated lazily on HCT sub-triangles.
pub struct AverageMomentTensor<'a> {
    hhj: &'a HhjSpace,
    hct: &'a HctSpace,
    tensor: &'a MomentTensor,
    potential: &'a PotentialReconstruction,
}

impl AverageMomentTensor<'_> {
    /// Value in triangle `t`, sub-triangle `sub`, at reference point `xr`.
    pub fn eval(&self, t: usize, sub: usize, xr: &Point) -> Tensor {
        let l = [1.0 - xr.x - xr.y, xr.x, xr.y];
        let s = eval_linear(&self.hhj.vertex_tensors(t, &self.tensor.coeffs), &l);
        let h = self.hct.local(t, &self.potential.coeffs).hessian(sub, xr);
        (s + h) * 0.5
    }
}

/// Pairs a moment tensor with a reconstruction of the same mesh.
pub fn average_moment<'a>(
    hhj: &'a HhjSpace,
    hct: &'a HctSpace,
    tensor: &'a MomentTensor,
    potential: &'a PotentialReconstruction,
) -> Result<AverageMomentTensor<'a>> {
    check_len(hhj.dim(), tensor.coeffs.len())?;
    check_len(hct.dim(), potential.coeffs.len())?;
    check_len(hhj.n_elements(), hct.n_elements())?;
    Ok(AverageMomentTensor {
        hhj,
        hct,
        tensor,
        potential,
    })
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::MeshMismatch)
    }
}

/// `(σ_eq - D²s_h, σ̃_m)` over the mesh.
pub fn goal_correction(
    mesh: &Mesh,
    hhj: &HhjSpace,
    hct: &HctSpace,
    tensor: &MomentTensor,
    potential: &PotentialReconstruction,
    average: &AverageMomentTensor,
) -> f64 {
    let rule = triangle_rule(2).expect("degree 2");
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let s = hhj.vertex_tensors(t, &tensor.coeffs);
        let local = hct.local(t, &potential.coeffs);
        for (sub, xr, w) in hct.element(t).sub_quadrature(rule) {
            let l = [1.0 - xr.x - xr.y, xr.x, xr.y];
            let diff = eval_linear(&s, &l) - local.hessian(sub, &xr);
            total += w * diff.dot(&average.eval(t, sub, &xr));
        }
    }
    total
}

/// `η_h η̃_h / 2 + η_NC`.
pub fn abstract_goal_bound(eta_h: f64, eta_tilde: f64, eta_nc: f64) -> Result<f64> {
    for (name, value) in [("eta_h", eta_h), ("eta_tilde", eta_tilde), ("eta_nc", eta_nc)] {
        if !(value >= 0.0) {
            return Err(Error::NegativeEstimator { name, value });
        }
    }
    Ok(eta_h * eta_tilde / 2.0 + eta_nc)
}

/// Bound with the data oscillation of both loads kept.
///
/// `omega` and `omega_tilde` bound `‖f - f_h‖_{-2}` and `‖f̃ - f̃_h‖_{-2}`;
/// `defect` is `⟨f - f_h, s̃_h⟩ + Q(s_h - u_h)`. With
/// `X = ω̃ + (ω̃² + η̃²)^{1/2} ≥ ‖D²(ũ - s̃_h)‖` the bound reads
/// `η_h (η̃/2 + (ω̃ X)^{1/2}) + |defect| + ω X`.
pub fn full_goal_bound(eta_h: f64, eta_tilde: f64, omega: f64, omega_tilde: f64, defect: f64) -> Result<f64> {
    for (name, value) in [
        ("eta_h", eta_h),
        ("eta_tilde", eta_tilde),
        ("omega", omega),
        ("omega_tilde", omega_tilde),
    ] {
        if !(value >= 0.0) {
            return Err(Error::NegativeEstimator { name, value });
        }
    }
    let x = omega_tilde + omega_tilde.hypot(eta_tilde);
    Ok(eta_h * (eta_tilde / 2.0 + (omega_tilde * x).sqrt()) + defect.abs() + omega * x)
}

/// Signed residual estimator
/// `Σ_K ∫_K (σ_eq - D²u_h) : σ̃_eq + Σ_e ∫_e [[∂_n u_h]] σ̃_nn`
/// and its split over triangles, each edge shared with weight `γ_e`.
pub fn residual_goal_estimator(
    mesh: &Mesh,
    dofs: &P2DofMap,
    hhj: &HhjSpace,
    u: &[f64],
    tensor: &MomentTensor,
    dual_tensor: &MomentTensor,
) -> (f64, Vec<f64>) {
    let rule = triangle_rule(2).expect("degree 2");
    let mut per = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let s = hhj.vertex_tensors(t, &tensor.coeffs);
        let st = hhj.vertex_tensors(t, &dual_tensor.coeffs);
        let h = P2Element::of(mesh, t).hessian(&dofs.local_values(t, u));
        let scale = 2.0 * mesh.area(t);
        let v: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(l, w)| w * scale * (eval_linear(&s, l) - h).dot(&eval_linear(&st, l)))
            .sum();
        per.push(v);
    }
    let e_rule = edge_rule(2).expect("degree 2");
    for e in 0..mesh.n_edges() {
        let frame = mesh.edge_frame(e);
        let n = frame.normal;
        let sides = edge_sides(mesh, e);
        let st = hhj.vertex_tensors(frame.plus, &dual_tensor.coeffs);
        let mut integral = 0.0;
        for (&q, &w) in e_rule.points.iter().zip(&e_rule.weights) {
            let mut jump = 0.0;
            for &(t, sign, _) in &sides {
                let l = edge_barycentric(mesh, t, e, q);
                jump += sign * P2Element::of(mesh, t).gradient(&dofs.local_values(t, u), &l).dot(&n);
            }
            let tau = eval_linear(&st, &edge_barycentric(mesh, frame.plus, e, q));
            integral += w * frame.length * jump * n.dot(&(tau * n));
        }
        for (t, _, gamma) in sides {
            per[t] += gamma * integral;
        }
    }
    (per.iter().sum(), per)
}

/// `Σ_φ ((f, φ) - ⟨div div σ_eq, φ⟩) ũ_φ` over the free P2 DOFs.
pub fn equilibrium_diagnostic(
    mesh: &Mesh,
    dofs: &P2DofMap,
    hhj: &HhjSpace,
    tensor: &MomentTensor,
    load: &dyn Density,
    dual: &[f64],
) -> f64 {
    let pairing = div_div_pairing(mesh, dofs, hhj, tensor);
    let rhs = load_vector(mesh, dofs, load);
    dofs.free_dofs().iter().map(|&d| (rhs[d] - pairing[d]) * dual[d]).sum()
}

/// `c (Σ_K h_K⁴ ‖f‖²_K)^{1/2}` with `h_K` the longest edge.
pub fn oscillation_bound(mesh: &Mesh, f: &dyn Density) -> f64 {
    let sum: f64 = (0..mesh.n_triangles())
        .map(|t| mesh.diameter(t).powi(4) * f.square_integral(mesh, t))
        .sum();
    OSCILLATION_CONSTANT * sum.sqrt()
}

/// `(f, s) - Σ_K ∫_K σ : D²s` for a clamped C1 function `s`.
pub fn load_defect(
    mesh: &Mesh,
    hhj: &HhjSpace,
    hct: &HctSpace,
    tensor: &MomentTensor,
    s: &[f64],
    f: &dyn Density,
) -> f64 {
    let rule = triangle_rule(2).expect("degree 2");
    let mut pairing = 0.0;
    for t in 0..mesh.n_triangles() {
        let st = hhj.vertex_tensors(t, &tensor.coeffs);
        let local = hct.local(t, s);
        for (sub, xr, w) in hct.element(t).sub_quadrature(rule) {
            let l = [1.0 - xr.x - xr.y, xr.x, xr.y];
            pairing += w * eval_linear(&st, &l).dot(&local.hessian(sub, &xr));
        }
    }
    integrate_hct(mesh, hct, s, f) - pairing
}

/// Every goal-error quantity of one mesh level.
#[derive(Clone, Debug, PartialEq)]
pub struct GoalReport {
    /// `Q(u_h) + (σ_eq - D²s_h, σ̃_m)`.
    pub q_h: f64,
    /// `Q(u_h)` alone.
    pub q_uh: f64,
    pub q_ref: Option<f64>,
    /// `|Q_ref - Q_h|`.
    pub e_goal: Option<f64>,
    /// `Q_ref - Q_h`.
    pub signed_error: Option<f64>,
    pub eta_h: f64,
    pub eta_tilde: f64,
    pub eta_nc: f64,
    pub eta_abs: f64,
    pub eta_res: f64,
    pub effectivity_abs: Option<f64>,
    pub effectivity_res: Option<f64>,
    pub eta_h_k: Vec<f64>,
    pub eta_tilde_k: Vec<f64>,
    pub eta_nc_k: Vec<f64>,
    pub eta_res_k: Vec<f64>,
    /// Oscillation bounds of the primal load and of the goal density.
    pub osc_primal: f64,
    pub osc_dual: f64,
    /// Equilibrium defect tested with the dual solution.
    pub eta_o: f64,
    /// Bound keeping the data oscillation, when requested.
    pub full_bound: Option<f64>,
}

/// Discrete data of one level.
pub struct LevelInputs<'a> {
    pub mesh: &'a Mesh,
    pub dofs: &'a P2DofMap,
    pub load: &'a dyn Density,
    pub goal: &'a dyn Density,
    pub solution: &'a DiscreteSolution,
    pub q_ref: Option<f64>,
    pub full_bound: bool,
}

/// Assembles a report from already computed constituents.
#[allow(clippy::too_many_arguments)]
pub fn goal_report(
    q_uh: f64,
    correction: f64,
    q_ref: Option<f64>,
    (eta_h, eta_h_k): (f64, Vec<f64>),
    (eta_tilde, eta_tilde_k): (f64, Vec<f64>),
    (nc_signed, eta_nc_k): (f64, Vec<f64>),
    (eta_res, eta_res_k): (f64, Vec<f64>),
) -> Result<GoalReport> {
    let eta_nc = nc_signed.abs();
    let eta_abs = abstract_goal_bound(eta_h, eta_tilde, eta_nc)?;
    let q_h = q_uh + correction;
    let signed_error = q_ref.map(|q| q - q_h);
    let e_goal = signed_error.map(f64::abs);
    let ratio = |num: f64| e_goal.filter(|&e| e > 0.0).map(|e| num / e);
    Ok(GoalReport {
        q_h,
        q_uh,
        q_ref,
        e_goal,
        signed_error,
        eta_h,
        eta_tilde,
        eta_nc,
        eta_abs,
        eta_res,
        effectivity_abs: ratio(eta_abs),
        effectivity_res: ratio(eta_res.abs()),
        eta_h_k,
        eta_tilde_k,
        eta_nc_k,
        eta_res_k,
        osc_primal: 0.0,
        osc_dual: 0.0,
        eta_o: 0.0,
        full_bound: None,
    })
}

/// Equilibrated tensors and reconstructions of one level.
pub struct LevelFields {
    pub hhj: HhjSpace,
    pub hct: HctSpace,
    pub sigma_eq: MomentTensor,
    pub sigma_dual: MomentTensor,
    pub s_h: PotentialReconstruction,
    pub s_dual: PotentialReconstruction,
}

/// Builds the equilibrated tensors and reconstructions of both solutions and
/// evaluates every estimator.
pub fn estimate_level(input: &LevelInputs) -> Result<GoalReport> {
    estimate_level_fields(input).map(|(report, _)| report)
}

/// [`estimate_level`] together with the intermediate fields.
pub fn estimate_level_fields(input: &LevelInputs) -> Result<(GoalReport, LevelFields)> {
    let LevelInputs {
        mesh,
        dofs,
        load,
        goal,
        solution,
        ..
    } = *input;
    check_len(dofs.dim(), solution.primal.len())?;
    check_len(dofs.dim(), solution.dual.len())?;
    let hhj = HhjSpace::new(mesh);
    let hct = HctSpace::new(mesh);
    let (u, z) = (&solution.primal, &solution.dual);

    let sigma_eq = build_equilibrated_tensor(mesh, dofs, &hhj, u, solution.sigma, Source::Primal);
    let sigma_dual = build_equilibrated_tensor(mesh, dofs, &hhj, z, solution.sigma, Source::Dual);
    let s_h = enrich(mesh, dofs, &hct, u, Source::Primal);
    let s_dual = enrich(mesh, dofs, &hct, z, Source::Dual);

    let eta = tensor_minus_hessian_norm(
        mesh,
        &hhj,
        &sigma_eq,
        HessianField::Hct {
            space: &hct,
            coeffs: &s_h.coeffs,
        },
    );
    let eta_tilde = tensor_minus_hessian_norm(
        mesh,
        &hhj,
        &sigma_dual,
        HessianField::Hct {
            space: &hct,
            coeffs: &s_dual.coeffs,
        },
    );
    let nc = nonconformity_goal_term(mesh, dofs, &hct, &s_h, u, goal);
    let res = residual_goal_estimator(mesh, dofs, &hhj, u, &sigma_eq, &sigma_dual);
    let average = average_moment(&hhj, &hct, &sigma_dual, &s_dual)?;
    let correction = goal_correction(mesh, &hhj, &hct, &sigma_eq, &s_h, &average);
    let q_uh = integrate_p2(mesh, dofs, u, goal);
    let nc_signed = nc.0;

    let mut report = goal_report(q_uh, correction, input.q_ref, eta, eta_tilde, nc, res)?;
    report.osc_primal = oscillation_bound(mesh, load);
    report.osc_dual = oscillation_bound(mesh, goal);
    report.eta_o = equilibrium_diagnostic(mesh, dofs, &hhj, &sigma_eq, load, z);
    if input.full_bound {
        let defect = load_defect(mesh, &hhj, &hct, &sigma_eq, &s_dual.coeffs, load) + nc_signed;
        report.full_bound = Some(full_goal_bound(
            report.eta_h,
            report.eta_tilde,
            report.osc_primal,
            report.osc_dual,
            defect,
        )?);
    }
    let fields = LevelFields {
        hhj,
        hct,
        sigma_eq,
        sigma_dual,
        s_h,
        s_dual,
    };
    Ok((report, fields))
}
