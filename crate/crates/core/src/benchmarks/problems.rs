//! The smooth square plate and the singular L-shaped plate.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::assembly::Density;
use crate::benchmarks::goal::GoalWeight;
use crate::benchmarks::jet::Jet4;
use crate::benchmarks::poly::{bilaplacian_poly, BivariatePolynomial};
use crate::error::{Error, Result};
use crate::fespace::triangle_rule;
use crate::mesh::{Mesh, Point};

/// Exponent of the corner singularity.
pub const ALPHA: f64 = 0.5444837367;
/// Interior angle of the re-entrant corner.
pub const OMEGA: f64 = 1.5 * PI;

/// Published goal values.
pub const EXAMPLE_1_PUBLISHED: f64 = 0.06044290015;
pub const EXAMPLE_2_PUBLISHED: f64 = 0.018334438;

/// `∫_ω u` to double precision, evaluated exactly for the polynomial plate, by
/// adaptive double-exponential quadrature in polar coordinates for the
/// singular one.
pub const EXAMPLE_1_REFERENCE: f64 = 0.06044290015314739;
pub const EXAMPLE_2_REFERENCE: f64 = 0.018317707517523815;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemId {
    Example1,
    Example2,
}

impl ProblemId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemId::Example1 => "example_1",
            ProblemId::Example2 => "example_2",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<ProblemId> {
        match s {
            "example_1" => Ok(ProblemId::Example1),
            "example_2" => Ok(ProblemId::Example2),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }
}

/// Published reference goal for a problem id.
pub fn reference_goal(id: &str) -> Result<f64> {
    Ok(match id.parse::<ProblemId>()? {
        ProblemId::Example1 => EXAMPLE_1_PUBLISHED,
        ProblemId::Example2 => EXAMPLE_2_PUBLISHED,
    })
}

/// `10¹² x¹⁰ (1-x)¹⁰ y¹⁰ (1-y)¹⁰`, expanded about `(1/2, 1/2)` where it
/// reads `10¹² (1/4 - s²)¹⁰ (1/4 - t²)¹⁰`.
pub fn example_1_solution() -> BivariatePolynomial {
    let c = Point::new(0.5, 0.5);
    let quarter = BivariatePolynomial::constant(0.25, c);
    let s = BivariatePolynomial::monomial(2, 0, 1.0, c);
    let t = BivariatePolynomial::monomial(0, 2, 1.0, c);
    let a = (&quarter - &s).powi(10);
    let b = (&quarter - &t).powi(10);
    (&a * &b).scale(1e12)
}

/// The smooth solution in factored form.
pub fn example_1_u(p: Point) -> f64 {
    1e12 * (p.x * (1.0 - p.x) * p.y * (1.0 - p.y)).powi(10)
}

pub fn example_1_gradient(p: Point) -> Point {
    let (a, b) = (p.x * (1.0 - p.x), p.y * (1.0 - p.y));
    Point::new(
        1e13 * a.powi(9) * (1.0 - 2.0 * p.x) * b.powi(10),
        1e13 * a.powi(10) * b.powi(9) * (1.0 - 2.0 * p.y),
    )
}

/// Polar angle in `[0, 2π)`; the L-shape covers `[0, 3π/2]`.
pub fn polar_angle(p: Point) -> f64 {
    let t = p.y.atan2(p.x);
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

fn g_coefficients() -> (f64, f64) {
    let (am, ap) = (ALPHA - 1.0, ALPHA + 1.0);
    let a = (am * OMEGA).sin() / am - (ap * OMEGA).sin() / ap;
    let b = (am * OMEGA).cos() - (ap * OMEGA).cos();
    (a, b)
}

/// Angular factor `g_{α,ω}(θ)` of the corner singularity.
pub fn g_alpha_omega(theta: f64) -> f64 {
    let (am, ap) = (ALPHA - 1.0, ALPHA + 1.0);
    let (a, b) = g_coefficients();
    a * ((am * theta).cos() - (ap * theta).cos()) - ((am * theta).sin() / am - (ap * theta).sin() / ap) * b
}

fn g_jet(theta: Jet4) -> Jet4 {
    let (am, ap) = (ALPHA - 1.0, ALPHA + 1.0);
    let (a, b) = g_coefficients();
    ((theta * am).cos() - (theta * ap).cos()) * a - ((theta * am).sin() / am - (theta * ap).sin() / ap) * b
}

fn polar_jets(p: Point) -> Result<(Jet4, Jet4, Jet4, Jet4)> {
    if p.x == 0.0 && p.y == 0.0 {
        return Err(Error::SingularPoint);
    }
    let (x, y) = (Jet4::x(p.x), Jet4::y(p.y));
    let r = (x * x + y * y).sqrt();
    let mut theta = y.atan2(&x);
    if theta.value() < 0.0 {
        theta = theta + 2.0 * PI;
    }
    Ok((x, y, r, theta))
}

/// `r^{1+α} g_{α,ω}(θ)` as a jet: biharmonic away from the corner.
pub fn singular_part_jet(p: Point) -> Result<Jet4> {
    let (_, _, r, theta) = polar_jets(p)?;
    Ok(r.powf(1.0 + ALPHA) * g_jet(theta))
}

/// `(1 - x²)² (1 - y²)² r^{1+α} g_{α,ω}(θ)` as a jet.
pub fn singular_solution_jet(p: Point) -> Result<Jet4> {
    let (x, y, r, theta) = polar_jets(p)?;
    let cx = 1.0 - x * x;
    let cy = 1.0 - y * y;
    Ok(cx * cx * cy * cy * r.powf(1.0 + ALPHA) * g_jet(theta))
}

/// The singular solution; zero at the corner.
pub fn singular_u(p: Point) -> f64 {
    let r2 = p.norm_squared();
    if r2 == 0.0 {
        return 0.0;
    }
    let cut = (1.0 - p.x * p.x).powi(2) * (1.0 - p.y * p.y).powi(2);
    cut * r2.sqrt().powf(1.0 + ALPHA) * g_alpha_omega(polar_angle(p))
}

/// `(u, Δ²u)` of the singular solution.
pub fn singular_u_and_f(p: Point) -> Result<(f64, f64)> {
    let jet = singular_solution_jet(p)?;
    Ok((singular_u(p), jet.bilaplacian()))
}

/// Applies `rule` on each sub-triangle of `depth` uniform refinements of `tri`.
fn composite_points(
    tri: &[Point; 3],
    degree: usize,
    depth: usize,
    f: &dyn Fn(Point) -> f64,
    out: &mut Vec<(Point, f64)>,
) {
    if depth == 0 {
        let rule = triangle_rule(degree).expect("supported degree");
        out.extend(rule.mapped(tri).map(|(x, w)| (x, w * f(x))));
        return;
    }
    let m = [
        (tri[1] + tri[2]) / 2.0,
        (tri[2] + tri[0]) / 2.0,
        (tri[0] + tri[1]) / 2.0,
    ];
    for child in [
        [tri[0], m[2], m[1]],
        [m[2], tri[1], m[0]],
        [m[1], m[0], tri[2]],
        [m[0], m[1], m[2]],
    ] {
        composite_points(&child, degree, depth - 1, f, out);
    }
}

/// The load `Δ²u` of the polynomial plate, integrated exactly against P2
/// functions and piecewise cubic HCT functions.
pub struct PolynomialLoad {
    pub f: BivariatePolynomial,
}

impl PolynomialLoad {
    pub fn new(f: BivariatePolynomial) -> PolynomialLoad {
        PolynomialLoad { f }
    }
}

impl Density for PolynomialLoad {
    fn weighted_points(&self, mesh: &Mesh, t: usize, out: &mut Vec<(Point, f64)>) {
        let p = mesh.triangle_points(t);
        let c = (p[0] + p[1] + p[2]) / 3.0;
        let degree = (self.f.degree() + 3).min(crate::fespace::quadrature::MAX_DEGREE);
        let rule = triangle_rule(degree).expect("supported degree");
        for i in 0..3 {
            let sub = [c, p[(i + 1) % 3], p[(i + 2) % 3]];
            out.extend(rule.mapped(&sub).map(|(x, w)| (x, w * self.f.eval(x))));
        }
    }

    fn square_integral(&self, mesh: &Mesh, t: usize) -> f64 {
        let degree = (2 * self.f.degree()).min(crate::fespace::quadrature::MAX_DEGREE);
        triangle_rule(degree)
            .expect("supported degree")
            .integrate(&mesh.triangle_points(t), |x| self.f.eval(x).powi(2))
    }
}

/// Degree of the rule used for the singular load.
pub const SINGULAR_LOAD_DEGREE: usize = 12;

/// The load of the singular plate. Triangles touching the corner get one
/// extra level of uniform subdivision; all quadrature points are interior.
pub struct SingularLoad;

impl SingularLoad {
    fn depth(mesh: &Mesh, t: usize) -> usize {
        if mesh.triangle_points(t).iter().any(|p| p.x == 0.0 && p.y == 0.0) {
            1
        } else {
            0
        }
    }

    fn f(x: Point) -> f64 {
        singular_u_and_f(x).expect("interior quadrature point").1
    }
}

impl Density for SingularLoad {
    fn weighted_points(&self, mesh: &Mesh, t: usize, out: &mut Vec<(Point, f64)>) {
        let depth = SingularLoad::depth(mesh, t);
        composite_points(
            &mesh.triangle_points(t),
            SINGULAR_LOAD_DEGREE,
            depth,
            &SingularLoad::f,
            out,
        );
    }

    fn square_integral(&self, mesh: &Mesh, t: usize) -> f64 {
        let mut pts = Vec::new();
        let depth = SingularLoad::depth(mesh, t);
        composite_points(
            &mesh.triangle_points(t),
            SINGULAR_LOAD_DEGREE,
            depth,
            &|x| SingularLoad::f(x).powi(2),
            &mut pts,
        );
        pts.iter().map(|(_, w)| w).sum()
    }
}

/// A benchmark: initial mesh, load, goal weight and reference goal value.
pub struct Problem {
    pub id: ProblemId,
    pub initial_mesh: Mesh,
    pub load: Box<dyn Density + Send>,
    pub goal: GoalWeight,
    pub q_ref: f64,
}

impl Problem {
    /// The benchmark with an unnormalized goal weight `χ_ω`, matching the
    /// published reference values.
    pub fn new(id: ProblemId) -> Problem {
        Problem::with_normalization(id, false)
    }

    /// The benchmark with `χ_ω` or `χ_ω / |ω|`; the reference value is
    /// scaled accordingly.
    pub fn with_normalization(id: ProblemId, normalized: bool) -> Problem {
        let (initial_mesh, load, goal, q): (Mesh, Box<dyn Density + Send>, GoalWeight, f64) = match id {
            ProblemId::Example1 => (
                Mesh::unit_square(),
                Box::new(PolynomialLoad::new(bilaplacian_poly(&example_1_solution()))),
                GoalWeight::strip(normalized),
                EXAMPLE_1_REFERENCE,
            ),
            ProblemId::Example2 => (
                Mesh::l_shape(),
                Box::new(SingularLoad),
                GoalWeight::disk(normalized),
                EXAMPLE_2_REFERENCE,
            ),
        };
        let q_ref = q * goal.height();
        Problem {
            id,
            initial_mesh,
            load,
            goal,
            q_ref,
        }
    }

    /// Exact solution.
    pub fn exact(&self, p: Point) -> f64 {
        match self.id {
            ProblemId::Example1 => example_1_u(p),
            ProblemId::Example2 => singular_u(p),
        }
    }
}
