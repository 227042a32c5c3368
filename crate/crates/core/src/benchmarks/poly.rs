//! Dense bivariate polynomials in shifted monomials `(x - cx)^i (y - cy)^j`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::mesh::Point;

/// Largest total degree a product may reach.
pub const MAX_DEGREE: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePolynomial {
    center: Point,
    degree: usize,
    // Row-major (degree + 1)² grid, zero above the anti-diagonal.
    coeffs: Vec<f64>,
}

impl BivariatePolynomial {
    pub fn zero(center: Point) -> BivariatePolynomial {
        BivariatePolynomial {
            center,
            degree: 0,
            coeffs: vec![0.0],
        }
    }

    pub fn constant(c: f64, center: Point) -> BivariatePolynomial {
        BivariatePolynomial {
            center,
            degree: 0,
            coeffs: vec![c],
        }
    }

    /// `c (x - cx)^i (y - cy)^j`.
    pub fn monomial(i: usize, j: usize, c: f64, center: Point) -> BivariatePolynomial {
        assert!(i + j <= MAX_DEGREE, "degree {} exceeds {MAX_DEGREE}", i + j);
        let mut p = BivariatePolynomial::with_degree(i + j, center);
        p.set(i, j, c);
        p.trim()
    }

    /// `x` written about `center`.
    pub fn x(center: Point) -> BivariatePolynomial {
        BivariatePolynomial::monomial(1, 0, 1.0, center) + &BivariatePolynomial::constant(center.x, center)
    }

    /// `y` written about `center`.
    pub fn y(center: Point) -> BivariatePolynomial {
        BivariatePolynomial::monomial(0, 1, 1.0, center) + &BivariatePolynomial::constant(center.y, center)
    }

    fn with_degree(degree: usize, center: Point) -> BivariatePolynomial {
        BivariatePolynomial {
            center,
            degree,
            coeffs: vec![0.0; (degree + 1) * (degree + 1)],
        }
    }

    fn set(&mut self, i: usize, j: usize, c: f64) {
        let n = self.degree + 1;
        self.coeffs[i * n + j] = c;
    }

    fn trim(self) -> BivariatePolynomial {
        let degree = (0..=self.degree)
            .flat_map(|i| (0..=self.degree - i).map(move |j| (i, j)))
            .filter(|&(i, j)| self.coeff(i, j) != 0.0)
            .map(|(i, j)| i + j)
            .max()
            .unwrap_or(0);
        if degree == self.degree {
            return self;
        }
        let mut p = BivariatePolynomial::with_degree(degree, self.center);
        for i in 0..=degree {
            for j in 0..=degree - i {
                p.set(i, j, self.coeff(i, j));
            }
        }
        p
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// Exact total degree; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.degree {
            return 0.0;
        }
        self.coeffs[i * (self.degree + 1) + j]
    }

    pub fn eval(&self, p: Point) -> f64 {
        let (s, t) = (p.x - self.center.x, p.y - self.center.y);
        let n = self.degree + 1;
        let mut acc = 0.0;
        for i in (0..n).rev() {
            let row = &self.coeffs[i * n..i * n + (n - i)];
            let inner = row.iter().rev().fold(0.0, |a, &c| a * t + c);
            acc = acc * s + inner;
        }
        acc
    }

    pub fn gradient(&self, p: Point) -> Point {
        Point::new(self.dx().eval(p), self.dy().eval(p))
    }

    pub fn dx(&self) -> BivariatePolynomial {
        self.derive(1, 0)
    }

    pub fn dy(&self) -> BivariatePolynomial {
        self.derive(0, 1)
    }

    /// `∂x^a ∂y^b`.
    pub fn derive(&self, a: usize, b: usize) -> BivariatePolynomial {
        if a + b > self.degree {
            return BivariatePolynomial::zero(self.center);
        }
        let degree = self.degree - a - b;
        let mut p = BivariatePolynomial::with_degree(degree, self.center);
        for i in 0..=degree {
            for j in 0..=degree - i {
                let f = falling(i + a, a) * falling(j + b, b);
                p.set(i, j, f * self.coeff(i + a, j + b));
            }
        }
        p.trim()
    }

    pub fn scale(&self, c: f64) -> BivariatePolynomial {
        let mut p = self.clone();
        p.coeffs.iter_mut().for_each(|v| *v *= c);
        p.trim()
    }

    pub fn powi(&self, n: u32) -> BivariatePolynomial {
        let mut out = BivariatePolynomial::constant(1.0, self.center);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    fn zip(&self, other: &BivariatePolynomial, f: impl Fn(f64, f64) -> f64) -> BivariatePolynomial {
        assert_eq!(self.center, other.center, "polynomials about different centers");
        let degree = self.degree.max(other.degree);
        let mut p = BivariatePolynomial::with_degree(degree, self.center);
        for i in 0..=degree {
            for j in 0..=degree - i {
                p.set(i, j, f(self.coeff(i, j), other.coeff(i, j)));
            }
        }
        p.trim()
    }
}

fn falling(n: usize, k: usize) -> f64 {
    ((n - k + 1)..=n).map(|v| v as f64).product()
}

/// `u_xxxx + 2 u_xxyy + u_yyyy`.
pub fn bilaplacian_poly(u: &BivariatePolynomial) -> BivariatePolynomial {
    &(&u.derive(4, 0) + &u.derive(2, 2).scale(2.0)) + &u.derive(0, 4)
}

impl Add<&BivariatePolynomial> for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn add(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Add<&BivariatePolynomial> for BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn add(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        &self + rhs
    }
}

impl Sub<&BivariatePolynomial> for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn sub(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Neg for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn neg(self) -> BivariatePolynomial {
        self.scale(-1.0)
    }
}

impl Mul<&BivariatePolynomial> for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn mul(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        assert_eq!(self.center, rhs.center, "polynomials about different centers");
        let degree = self.degree + rhs.degree;
        assert!(degree <= MAX_DEGREE, "degree {degree} exceeds {MAX_DEGREE}");
        let mut p = BivariatePolynomial::with_degree(degree, self.center);
        let n = degree + 1;
        for i in 0..=self.degree {
            for j in 0..=self.degree - i {
                let a = self.coeff(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..=rhs.degree {
                    for l in 0..=rhs.degree - k {
                        p.coeffs[(i + k) * n + j + l] += a * rhs.coeff(k, l);
                    }
                }
            }
        }
        p.trim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const O: Point = Point::new(0.0, 0.0);

    #[test]
    fn bilaplacian_of_simple_monomials() {
        let x4 = BivariatePolynomial::monomial(4, 0, 1.0, O);
        let f = bilaplacian_poly(&x4);
        assert_eq!(f.degree(), 0);
        assert_eq!(f.coeff(0, 0), 24.0);
        let x2y2 = BivariatePolynomial::monomial(2, 2, 1.0, O);
        assert_eq!(bilaplacian_poly(&x2y2).coeff(0, 0), 8.0);
        assert_eq!(
            bilaplacian_poly(&BivariatePolynomial::monomial(3, 0, 1.0, O)).degree(),
            0
        );
        assert_eq!(
            bilaplacian_poly(&BivariatePolynomial::monomial(3, 0, 1.0, O)).coeff(0, 0),
            0.0
        );
    }

    #[test]
    fn shifted_variables() {
        let c = Point::new(0.5, -0.25);
        let x = BivariatePolynomial::x(c);
        let y = BivariatePolynomial::y(c);
        let p = &(&x * &x) - &(&y * &x).scale(3.0);
        let q = Point::new(1.3, 0.7);
        assert!((p.eval(q) - (1.69 - 3.0 * 0.91)).abs() < 1e-14);
        assert_eq!(p.degree(), 2);
        assert_eq!((&p - &p).degree(), 0);
    }

    #[test]
    fn derivative_is_exact_index_shift() {
        let p = BivariatePolynomial::monomial(5, 3, 2.0, O);
        let d = p.derive(2, 1);
        assert_eq!(d.degree(), 5);
        assert_eq!(d.coeff(3, 2), 2.0 * 20.0 * 3.0);
        assert_eq!(p.derive(6, 0), BivariatePolynomial::zero(O));
    }

    #[test]
    #[should_panic(expected = "exceeds")]
    fn degree_cap() {
        let p = BivariatePolynomial::monomial(21, 0, 1.0, O);
        let _ = &p * &p;
    }

    fn poly_strategy() -> impl Strategy<Value = BivariatePolynomial> {
        proptest::collection::vec(-3i32..=3, 10).prop_map(|c| {
            let mut p = BivariatePolynomial::zero(O);
            let mut k = 0;
            for i in 0..4 {
                for j in 0..4 - i {
                    p = p + &BivariatePolynomial::monomial(i, j, c[k] as f64, O);
                    k += 1;
                }
            }
            p
        })
    }

    proptest! {
        #[test]
        fn product_evaluates_pointwise(a in poly_strategy(), b in poly_strategy(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let p = Point::new(x, y);
            let prod = &a * &b;
            prop_assert!((prod.eval(p) - a.eval(p) * b.eval(p)).abs() < 1e-11);
            prop_assert!(prod.degree() <= a.degree() + b.degree());
        }

        #[test]
        fn leibniz_rule(a in poly_strategy(), b in poly_strategy()) {
            let lhs = (&a * &b).dx();
            let rhs = &(&a.dx() * &b) + &(&a * &b.dx());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
