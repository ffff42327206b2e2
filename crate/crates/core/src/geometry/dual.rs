//! Forward-mode dual numbers and the scalar trait the maps are written over.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Num, One, Zero};

/// `v + d·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    pub const fn new(v: f64, d: f64) -> Self {
        Self { v, d }
    }

    pub const fn constant(v: f64) -> Self {
        Self { v, d: 0.0 }
    }

    /// Seeds `point + ε·direction` componentwise.
    pub fn seed(point: &[f64], direction: &[f64]) -> Vec<Dual> {
        point
            .iter()
            .zip(direction)
            .map(|(&v, &d)| Dual::new(v, d))
            .collect()
    }

    /// Seeds the `axis`-th coordinate direction.
    pub fn seed_axis(point: &[f64], axis: usize) -> Vec<Dual> {
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Dual::new(v, if i == axis { 1.0 } else { 0.0 }))
            .collect()
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.v + rhs.v, self.d + rhs.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.v - rhs.v, self.d - rhs.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(self.v * rhs.v, self.d * rhs.v + self.v * rhs.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        let inv = 1.0 / rhs.v;
        Dual::new(self.v * inv, (self.d * rhs.v - self.v * rhs.d) * inv * inv)
    }
}

impl Rem for Dual {
    type Output = Dual;
    fn rem(self, rhs: Dual) -> Dual {
        let q = (self.v / rhs.v).trunc();
        Dual::new(self.v % rhs.v, self.d - q * rhs.d)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.v, -self.d)
    }
}

impl AddAssign for Dual {
    fn add_assign(&mut self, rhs: Dual) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dual {
    fn sub_assign(&mut self, rhs: Dual) {
        *self = *self - rhs;
    }
}

impl MulAssign for Dual {
    fn mul_assign(&mut self, rhs: Dual) {
        *self = *self * rhs;
    }
}

impl Zero for Dual {
    fn zero() -> Self {
        Dual::constant(0.0)
    }
    fn is_zero(&self) -> bool {
        self.v == 0.0 && self.d == 0.0
    }
}

impl One for Dual {
    fn one() -> Self {
        Dual::constant(1.0)
    }
}

impl Num for Dual {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dual::constant)
    }
}

/// Scalars the programmatic maps are generic over: `f64` for plain
/// evaluation and [`Dual`] for directional derivatives.
pub trait Real:
    Copy
    + Num
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
    + std::fmt::Debug
    + 'static
{
    fn cst(x: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan(self) -> Self;
    fn recip(self) -> Self {
        Self::one() / self
    }
    fn powi(self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc *= self;
        }
        acc
    }
}

impl Real for f64 {
    #[inline]
    fn cst(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn powi(self, n: u32) -> Self {
        f64::powi(self, n as i32)
    }
}

impl Real for Dual {
    #[inline]
    fn cst(x: f64) -> Self {
        Dual::constant(x)
    }
    #[inline]
    fn value(self) -> f64 {
        self.v
    }
    #[inline]
    fn sin(self) -> Self {
        Dual::new(self.v.sin(), self.d * self.v.cos())
    }
    #[inline]
    fn cos(self) -> Self {
        Dual::new(self.v.cos(), -self.d * self.v.sin())
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.v.exp();
        Dual::new(e, self.d * e)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        Dual::new(s, if self.d == 0.0 { 0.0 } else { self.d / (2.0 * s) })
    }
    #[inline]
    fn atan(self) -> Self {
        Dual::new(self.v.atan(), self.d / (1.0 + self.v * self.v))
    }
}

/// Complex scalar over a [`Real`].
pub type Cx<T> = Complex<T>;

pub fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

pub fn cx_const<T: Real>(z: num_complex::Complex64) -> Cx<T> {
    Complex::new(T::cst(z.re), T::cst(z.im))
}

/// Integer power with negative exponents through the reciprocal.
pub fn cx_powi<T: Real>(z: Cx<T>, m: i32) -> Cx<T> {
    let base = if m < 0 {
        let n = z.re * z.re + z.im * z.im;
        Complex::new(z.re / n, -z.im / n)
    } else {
        z
    };
    let mut acc = Complex::new(T::one(), T::zero());
    for _ in 0..m.unsigned_abs() {
        acc = acc * base;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_elementary_functions() {
        let x = Dual::new(0.7, 1.0);
        let cases: [(Dual, f64); 5] = [
            (x.sin(), 0.7f64.cos()),
            (x.cos(), -0.7f64.sin()),
            (x.exp(), 0.7f64.exp()),
            (x.sqrt(), 0.5 / 0.7f64.sqrt()),
            (x.atan(), 1.0 / 1.49),
        ];
        for (got, want) in cases {
            assert!((got.d - want).abs() < 1e-15);
        }
    }

    #[test]
    fn polynomial_derivative_is_exact() {
        // p(x) = 3x^4 - 2x^2 + x, p'(x) = 12x^3 - 4x + 1
        let p = |x: Dual| Dual::cst(3.0) * x.powi(4) - Dual::cst(2.0) * x * x + x;
        for &x0 in &[-1.3, 0.0, 0.4, 2.5] {
            let got = p(Dual::new(x0, 1.0)).d;
            let want = 12.0 * x0 * x0 * x0 - 4.0 * x0 + 1.0;
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn complex_power_derivative() {
        // d/dθ (e^{iθ})^m = i m e^{imθ}
        let th = Dual::new(0.3, 1.0);
        for m in -3..=3 {
            let z = cx_powi(cx(th.cos(), th.sin()), m);
            let want = num_complex::Complex64::new(0.0, m as f64) * num_complex::Complex64::from_polar(1.0, 0.3 * m as f64);
            assert!((z.re.d - want.re).abs() < 1e-14 && (z.im.d - want.im).abs() < 1e-14);
        }
    }
}
