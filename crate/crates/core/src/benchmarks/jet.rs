//! Truncated bivariate Taylor arithmetic of total degree four.

use std::ops::{Add, Div, Mul, Neg, Sub};

const N: usize = 15;

fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Coefficients `c_ij` of `Σ c_ij dx^i dy^j`, `i + j ≤ 4`, about a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet4 {
    c: [f64; N],
}

impl Jet4 {
    pub fn constant(v: f64) -> Jet4 {
        let mut c = [0.0; N];
        c[0] = v;
        Jet4 { c }
    }

    /// The coordinate `x` expanded about `x0`.
    pub fn x(x0: f64) -> Jet4 {
        let mut j = Jet4::constant(x0);
        j.c[idx(1, 0)] = 1.0;
        j
    }

    /// The coordinate `y` expanded about `y0`.
    pub fn y(y0: f64) -> Jet4 {
        let mut j = Jet4::constant(y0);
        j.c[idx(0, 1)] = 1.0;
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > 4 {
            0.0
        } else {
            self.c[idx(i, j)]
        }
    }

    /// `∂x^i ∂y^j` at the expansion point.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        self.coeff(i, j) * factorial(i) * factorial(j)
    }

    /// `∂xxxx + 2 ∂xxyy + ∂yyyy` at the expansion point.
    pub fn bilaplacian(&self) -> f64 {
        24.0 * self.coeff(4, 0) + 8.0 * self.coeff(2, 2) + 24.0 * self.coeff(0, 4)
    }

    /// `Σ_k t_k (self - a)^k` with `t_k = f⁽ᵏ⁾(a) / k!` and `a` the value.
    pub fn compose(&self, t: [f64; 5]) -> Jet4 {
        let mut h = *self;
        h.c[0] = 0.0;
        let mut out = Jet4::constant(t[0]);
        let mut power = Jet4::constant(1.0);
        for &tk in &t[1..] {
            power = power * h;
            out = out + power * tk;
        }
        out
    }

    pub fn recip(&self) -> Jet4 {
        let a = self.value();
        let mut t = [0.0; 5];
        let mut p = 1.0 / a;
        for tk in &mut t {
            *tk = p;
            p *= -1.0 / a;
        }
        self.compose(t)
    }

    pub fn powf(&self, e: f64) -> Jet4 {
        let a = self.value();
        let mut t = [0.0; 5];
        let mut binom = 1.0;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = binom * a.powf(e - k as f64);
            binom *= (e - k as f64) / (k + 1) as f64;
        }
        self.compose(t)
    }

    pub fn sqrt(&self) -> Jet4 {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Jet4 {
        let e = self.value().exp();
        self.compose([e, e, e / 2.0, e / 6.0, e / 24.0])
    }

    pub fn ln(&self) -> Jet4 {
        let a = self.value();
        self.compose([
            a.ln(),
            1.0 / a,
            -0.5 / (a * a),
            1.0 / (3.0 * a.powi(3)),
            -0.25 / a.powi(4),
        ])
    }

    pub fn sin(&self) -> Jet4 {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s / 2.0, -c / 6.0, s / 24.0])
    }

    pub fn cos(&self) -> Jet4 {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c / 2.0, s / 6.0, c / 24.0])
    }

    /// `atan2(self, x)` continued from the principal value at the expansion
    /// point. The point must not be the origin.
    pub fn atan2(&self, x: &Jet4) -> Jet4 {
        let (y0, x0) = (self.value(), x.value());
        let theta = y0.atan2(x0);
        // The angle increment is atan(num / den) with num vanishing at the point.
        let num = *self * x0 - *x * y0;
        let den = *x * x0 + *self * y0;
        let ratio = num / den;
        let atan = ratio.compose([0.0, 1.0, 0.0, -1.0 / 3.0, 0.0]);
        atan + theta
    }
}

impl Add for Jet4 {
    type Output = Jet4;
    fn add(mut self, rhs: Jet4) -> Jet4 {
        self.c.iter_mut().zip(rhs.c).for_each(|(a, b)| *a += b);
        self
    }
}

impl Add<f64> for Jet4 {
    type Output = Jet4;
    fn add(mut self, rhs: f64) -> Jet4 {
        self.c[0] += rhs;
        self
    }
}

impl Add<Jet4> for f64 {
    type Output = Jet4;
    fn add(self, rhs: Jet4) -> Jet4 {
        rhs + self
    }
}

impl Neg for Jet4 {
    type Output = Jet4;
    fn neg(self) -> Jet4 {
        self * -1.0
    }
}

impl Sub for Jet4 {
    type Output = Jet4;
    fn sub(self, rhs: Jet4) -> Jet4 {
        self + (-rhs)
    }
}

impl Sub<f64> for Jet4 {
    type Output = Jet4;
    fn sub(self, rhs: f64) -> Jet4 {
        self + (-rhs)
    }
}

impl Sub<Jet4> for f64 {
    type Output = Jet4;
    fn sub(self, rhs: Jet4) -> Jet4 {
        -rhs + self
    }
}

impl Mul for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        let mut c = [0.0; N];
        for d1 in 0..=4 {
            for j1 in 0..=d1 {
                let a = self.c[idx(d1 - j1, j1)];
                if a == 0.0 {
                    continue;
                }
                for d2 in 0..=4 - d1 {
                    for j2 in 0..=d2 {
                        c[idx(d1 - j1 + d2 - j2, j1 + j2)] += a * rhs.c[idx(d2 - j2, j2)];
                    }
                }
            }
        }
        Jet4 { c }
    }
}

impl Mul<f64> for Jet4 {
    type Output = Jet4;
    fn mul(mut self, rhs: f64) -> Jet4 {
        self.c.iter_mut().for_each(|a| *a *= rhs);
        self
    }
}

impl Mul<Jet4> for f64 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        rhs * self
    }
}

impl Div for Jet4 {
    type Output = Jet4;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet4) -> Jet4 {
        self * rhs.recip()
    }
}

impl Div<f64> for Jet4 {
    type Output = Jet4;
    fn div(self, rhs: f64) -> Jet4 {
        self * (1.0 / rhs)
    }
}

impl Div<Jet4> for f64 {
    type Output = Jet4;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet4) -> Jet4 {
        rhs.recip() * self
    }
}
