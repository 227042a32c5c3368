//! Gauss quadrature on the reference triangle and on the unit interval.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss–Legendre
//! rules, so every degree up to [`MAX_DEGREE`] is available with positive
//! weights and strictly interior points. Each rule is checked against the
//! exact monomial integrals when it is first built.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Highest polynomial degree for which rules are provided.
pub const MAX_DEGREE: usize = 60;

#[derive(Clone, Debug)]
pub struct TriangleRule {
    /// Barycentric coordinates with respect to the reference vertices
    /// (0,0), (1,0), (0,1).
    pub points: Vec<[f64; 3]>,
    /// Weights summing to 1/2, the reference area.
    pub weights: Vec<f64>,
    pub degree: usize,
}

#[derive(Clone, Debug)]
pub struct EdgeRule {
    /// Parameters in (0, 1).
    pub points: Vec<f64>,
    /// Weights summing to 1.
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical points and weights on the triangle `tri`; weights sum to its area.
    pub fn mapped<'a>(&'a self, tri: &'a [Point; 3]) -> impl Iterator<Item = (Point, f64)> + 'a {
        let scale = 2.0 * crate::mesh::signed_area(&tri[0], &tri[1], &tri[2]).abs();
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(l, &w)| (tri[0] * l[0] + tri[1] * l[1] + tri[2] * l[2], w * scale))
    }

    /// Integral of `f` over the triangle `tri`.
    pub fn integrate(&self, tri: &[Point; 3], mut f: impl FnMut(Point) -> f64) -> f64 {
        self.mapped(tri).map(|(x, w)| w * f(x)).sum()
    }
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Rule on the reference triangle, exact for polynomials of total degree `degree`.
pub fn triangle_rule(degree: usize) -> Result<&'static TriangleRule> {
    static RULES: OnceLock<Vec<OnceLock<TriangleRule>>> = OnceLock::new();
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    let rules = RULES.get_or_init(|| (0..=MAX_DEGREE).map(|_| OnceLock::new()).collect());
    Ok(rules[degree].get_or_init(|| build_triangle_rule(degree)))
}

/// Gauss–Legendre rule on [0, 1], exact for polynomials of degree `degree`.
pub fn edge_rule(degree: usize) -> Result<&'static EdgeRule> {
    static RULES: OnceLock<Vec<OnceLock<EdgeRule>>> = OnceLock::new();
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree(degree));
    }
    let rules = RULES.get_or_init(|| (0..=MAX_DEGREE).map(|_| OnceLock::new()).collect());
    Ok(rules[degree].get_or_init(|| {
        let (points, weights) = gauss_legendre(degree / 2 + 1);
        EdgeRule {
            points,
            weights,
            degree,
        }
    }))
}

/// `n`-point Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Roots come out in decreasing order; map [-1,1] to [0,1].
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn build_triangle_rule(degree: usize) -> TriangleRule {
    // x = u, y = v (1 - u) with Jacobian (1 - u): degree + 1 in u, degree in v.
    let n = (degree + 2).div_ceil(2);
    let (t, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (i, &u) in t.iter().enumerate() {
        for (j, &v) in t.iter().enumerate() {
            let x = u;
            let y = v * (1.0 - u);
            points.push([1.0 - x - y, x, y]);
            weights.push(w[i] * w[j] * (1.0 - u));
        }
    }
    let rule = TriangleRule {
        points,
        weights,
        degree,
    };
    let err = monomial_error(&rule);
    assert!(
        err < 1e-12,
        "triangle rule of degree {degree} fails exactness ({err:e})"
    );
    rule
}

/// Exact integral of `x^a y^b` over the reference triangle: `a! b! / (a+b+2)!`.
pub fn reference_monomial_integral(a: usize, b: usize) -> f64 {
    let mut binom = 1.0;
    for k in 1..=b {
        binom *= (a + k) as f64 / k as f64;
    }
    1.0 / (binom * ((a + b + 1) * (a + b + 2)) as f64)
}

/// Largest relative monomial error of `rule` up to its stated degree.
pub fn monomial_error(rule: &TriangleRule) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..=rule.degree {
        for b in 0..=rule.degree - a {
            let approx: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(l, w)| w * l[1].powi(a as i32) * l[2].powi(b as i32))
                .sum();
            let exact = reference_monomial_integral(a, b);
            worst = worst.max(((approx - exact) / exact).abs());
        }
    }
    worst
}
