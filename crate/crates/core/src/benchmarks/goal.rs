//! Characteristic-function goal weights integrated on the exact region.
//!
//! Every triangle is split at its centroid into the three HCT sub-triangles,
//! so that piecewise cubic integrands are smooth on each piece. A strip piece
//! is clipped to a convex polygon and fanned into triangles. A disk piece is
//! decomposed into triangles and curved sectors emanating from an interior
//! point of the convex intersection.

use std::f64::consts::PI;

use crate::assembly::Density;
use crate::fespace::quadrature::gauss_legendre;
use crate::fespace::triangle_rule;
use crate::mesh::{signed_area, Mesh, Point};

/// Polynomial degree integrated exactly on polygonal pieces.
const DEGREE: usize = 8;
/// Gauss points along circular arcs.
const ARC_POINTS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    /// `lo ≤ x + y ≤ hi`.
    Strip { lo: f64, hi: f64 },
    /// `x² + y² ≤ radius²`.
    Disk { radius: f64 },
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::Strip { lo, hi } => (lo..=hi).contains(&(p.x + p.y)),
            Region::Disk { radius } => p.norm_squared() <= radius * radius,
        }
    }
}

/// `χ_ω`, or `χ_ω / |ω|` when normalized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoalWeight {
    pub region: Region,
    /// `|ω ∩ Ω|`.
    pub measure: f64,
    pub normalized: bool,
}

impl GoalWeight {
    /// The strip `0.75 ≤ x + y ≤ 1.25` in the unit square, of area 7/16.
    pub fn strip(normalized: bool) -> GoalWeight {
        GoalWeight {
            region: Region::Strip { lo: 0.75, hi: 1.25 },
            measure: 7.0 / 16.0,
            normalized,
        }
    }

    /// The disk of radius 1/4 about the re-entrant corner of the L-shape,
    /// three quarters of which lie in the domain.
    pub fn disk(normalized: bool) -> GoalWeight {
        GoalWeight {
            region: Region::Disk { radius: 0.25 },
            measure: 0.75 * PI * 0.0625,
            normalized,
        }
    }

    /// Value of the weight inside the region.
    pub fn height(&self) -> f64 {
        if self.normalized {
            1.0 / self.measure
        } else {
            1.0
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        if self.region.contains(p) {
            self.height()
        } else {
            0.0
        }
    }

    /// Points and weights integrating over `K ∩ ω`, without the height.
    pub fn region_points(&self, mesh: &Mesh, t: usize, out: &mut Vec<(Point, f64)>) {
        let p = mesh.triangle_points(t);
        let c = (p[0] + p[1] + p[2]) / 3.0;
        for i in 0..3 {
            let sub = [c, p[(i + 1) % 3], p[(i + 2) % 3]];
            match self.region {
                Region::Strip { lo, hi } => strip_points(&sub, lo, hi, out),
                Region::Disk { radius } => disk_points(&sub, radius, out),
            }
        }
    }
}

impl Density for GoalWeight {
    fn weighted_points(&self, mesh: &Mesh, t: usize, out: &mut Vec<(Point, f64)>) {
        let start = out.len();
        self.region_points(mesh, t, out);
        let h = self.height();
        out[start..].iter_mut().for_each(|(_, w)| *w *= h);
    }

    fn square_integral(&self, mesh: &Mesh, t: usize) -> f64 {
        let mut pts = Vec::new();
        self.region_points(mesh, t, &mut pts);
        self.height().powi(2) * pts.iter().map(|(_, w)| w).sum::<f64>()
    }
}

fn push_triangle(tri: &[Point; 3], out: &mut Vec<(Point, f64)>) {
    if signed_area(&tri[0], &tri[1], &tri[2]).abs() == 0.0 {
        return;
    }
    out.extend(triangle_rule(DEGREE).expect("supported degree").mapped(tri));
}

/// Sutherland–Hodgman clip of a convex polygon to `n · x ≤ c`.
fn clip(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let (da, db) = (n.dot(&a) - c, n.dot(&b) - c);
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            out.push(a + (b - a) * (da / (da - db)));
        }
    }
    out
}

fn strip_points(tri: &[Point; 3], lo: f64, hi: f64, out: &mut Vec<(Point, f64)>) {
    let one = Point::new(1.0, 1.0);
    let poly = clip(&clip(tri, one, hi), -one, -lo);
    for k in 1..poly.len().saturating_sub(1) {
        push_triangle(&[poly[0], poly[k], poly[k + 1]], out);
    }
}

enum Piece {
    Segment(Point, Point),
    Arc(f64, f64),
}

fn disk_points(tri: &[Point; 3], radius: f64, out: &mut Vec<(Point, f64)>) {
    let r2 = radius * radius;
    if tri.iter().all(|p| p.norm_squared() <= r2) {
        push_triangle(tri, out);
        return;
    }
    let ccw = if signed_area(&tri[0], &tri[1], &tri[2]) > 0.0 {
        *tri
    } else {
        [tri[0], tri[2], tri[1]]
    };

    // Boundary of the convex set K ∩ D, counterclockwise.
    let mut segments = Vec::new();
    for k in 0..3 {
        let (a, b) = (ccw[k], ccw[(k + 1) % 3]);
        let d = b - a;
        let qa = d.norm_squared();
        let qb = a.dot(&d);
        let qc = a.norm_squared() - r2;
        let disc = qb * qb - qa * qc;
        if disc <= 0.0 {
            continue;
        }
        let root = disc.sqrt();
        let t0 = ((-qb - root) / qa).max(0.0);
        let t1 = ((-qb + root) / qa).min(1.0);
        if t1 - t0 > 1e-14 {
            segments.push((a + d * t0, a + d * t1));
        }
    }
    if segments.is_empty() {
        if crate::mesh::barycentric(&ccw[0], &ccw[1], &ccw[2], &Point::zeros())
            .iter()
            .all(|&l| l >= 0.0)
        {
            let whole = [Piece::Arc(0.0, 2.0 * PI)];
            emit_pieces(&whole, Point::zeros(), radius, out);
        }
        return;
    }
    let mut pieces = Vec::new();
    for k in 0..segments.len() {
        let (s, e) = segments[k];
        pieces.push(Piece::Segment(s, e));
        let next = segments[(k + 1) % segments.len()].0;
        if (next - e).norm() > 1e-14 * radius {
            let a0 = e.y.atan2(e.x);
            let mut a1 = next.y.atan2(next.x);
            while a1 <= a0 {
                a1 += 2.0 * PI;
            }
            pieces.push(Piece::Arc(a0, a1));
        }
    }
    // A convex combination of boundary points lies inside the convex set.
    let mut center = Point::zeros();
    for piece in &pieces {
        center += match *piece {
            Piece::Segment(s, e) => (s + e) / 2.0,
            Piece::Arc(a0, a1) => {
                let m = 0.5 * (a0 + a1);
                Point::new(m.cos(), m.sin()) * radius
            }
        };
    }
    center /= pieces.len() as f64;
    emit_pieces(&pieces, center, radius, out);
}

fn emit_pieces(pieces: &[Piece], c: Point, radius: f64, out: &mut Vec<(Point, f64)>) {
    let (gp, gw) = gauss_legendre(ARC_POINTS);
    let (sp, sw) = gauss_legendre(DEGREE / 2 + 2);
    for piece in pieces {
        match *piece {
            Piece::Segment(s, e) => push_triangle(&[c, s, e], out),
            Piece::Arc(a0, a1) => {
                let len = a1 - a0;
                for (&xi, &wx) in gp.iter().zip(&gw) {
                    let psi = a0 + len * xi;
                    let q = Point::new(psi.cos(), psi.sin()) * radius;
                    let dq = Point::new(-psi.sin(), psi.cos()) * radius;
                    let v = q - c;
                    let jac = (v.x * dq.y - v.y * dq.x).abs() * len * wx;
                    for (&s, &ws) in sp.iter().zip(&sw) {
                        out.push((c + v * s, jac * s * ws));
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(mesh: &Mesh, w: &GoalWeight, f: impl Fn(Point) -> f64) -> f64 {
        let mut pts = Vec::new();
        (0..mesh.n_triangles())
            .map(|t| {
                pts.clear();
                w.weighted_points(mesh, t, &mut pts);
                pts.iter().map(|(x, wt)| wt * f(*x)).sum::<f64>()
            })
            .sum()
    }

    #[test]
    fn strip_area_and_normalization() {
        for m in [
            Mesh::unit_square(),
            Mesh::unit_square().refine_uniform().refine_nvb(&[0, 3]),
        ] {
            let raw = GoalWeight::strip(false);
            assert!((total(&m, &raw, |_| 1.0) - 0.4375).abs() < 1e-14);
            let normed = GoalWeight::strip(true);
            assert!((total(&m, &normed, |_| 1.0) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn strip_moments_are_exact() {
        // ∫_ω x² y over the strip, integrated symbolically by hand.
        let m = Mesh::unit_square().refine_uniform();
        let f = |p: Point| p.x * p.x * p.y;
        let exact = 67.0 / 1536.0;
        let got = total(&m, &GoalWeight::strip(false), f);
        assert!((got - exact).abs() < 1e-14, "{got} {exact}");
    }

    #[test]
    fn disk_area_on_l_shape() {
        let mut m = Mesh::l_shape();
        for _ in 0..3 {
            let w = GoalWeight::disk(false);
            assert!((total(&m, &w, |_| 1.0) - w.measure).abs() < 1e-13);
            assert!((total(&m, &GoalWeight::disk(true), |_| 1.0) - 1.0).abs() < 1e-12);
            m = m.refine_nvb(&[0, 2, 4]);
        }
    }

    #[test]
    fn disk_polynomial_moment() {
        // ∫ r² over three quarters of the disk = (3/4)(π/2) R⁴.
        let m = Mesh::l_shape().refine_uniform();
        let got = total(&m, &GoalWeight::disk(false), |p| p.norm_squared());
        let exact = 0.75 * PI / 2.0 * 0.25f64.powi(4);
        assert!((got - exact).abs() < 1e-14, "{got} {exact}");
    }

    #[test]
    fn points_stay_in_their_triangle_and_region() {
        let m = Mesh::l_shape().refine_uniform().refine_uniform();
        let w = GoalWeight::disk(false);
        let mut pts = Vec::new();
        for t in 0..m.n_triangles() {
            pts.clear();
            w.weighted_points(&m, t, &mut pts);
            for (x, wt) in &pts {
                assert!(*wt > 0.0);
                assert!(x.norm() <= 0.25 * (1.0 + 1e-12));
                assert!(m.barycentric(t, x).iter().all(|&l| l > -1e-12));
            }
        }
        // A triangle far from the disk gets no points.
        let far = (0..m.n_triangles())
            .find(|&t| m.triangle_points(t).iter().all(|p| p.norm() > 0.5))
            .unwrap();
        pts.clear();
        w.weighted_points(&m, far, &mut pts);
        assert!(pts.is_empty());
        assert_eq!(w.square_integral(&m, far), 0.0);
    }

    #[test]
    fn square_integral_matches_height() {
        let m = Mesh::unit_square().refine_uniform();
        let w = GoalWeight::strip(true);
        let s: f64 = (0..m.n_triangles()).map(|t| w.square_integral(&m, t)).sum();
        assert!((s - 1.0 / w.measure).abs() < 1e-12);
        assert_eq!(w.eval(Point::new(0.5, 0.5)), 1.0 / w.measure);
        assert_eq!(w.eval(Point::new(0.1, 0.1)), 0.0);
    }
}
