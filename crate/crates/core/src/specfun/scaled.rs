//! Complex numbers with an unbounded exponent range.
//!
//! Transfer coefficients of high-order modes at small regularization are
//! ratios of quantities such as `Γ(n+1/2)·(2/t)^(n+1)` that leave the
//! double range long before the ratio itself does. A value is held as a
//! mantissa with `max(|re|, |im|)` in `[0.5, 1)` times a power of two, so
//! products and quotients only add or subtract exponents and never
//! overflow. [`ScaledComplex::log_mag`] and [`ScaledComplex::phase`] give
//! the log-magnitude / unit-phase view.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    mant: Complex64,
    exp2: i64,
}

/// `x * 2^k` without intermediate overflow of the power.
fn ldexp(x: f64, mut k: i64) -> f64 {
    let mut x = x;
    while k > 1000 {
        x *= f64::from_bits(((1000 + 1023) as u64) << 52);
        k -= 1000;
    }
    while k < -1000 {
        x *= f64::from_bits(((-1000 + 1023) as u64) << 52);
        k += 1000;
    }
    x * f64::from_bits(((k + 1023) as u64) << 52)
}

/// Exponent `e` with `x = f · 2^e`, `f ∈ [0.5, 1)`, for finite nonzero `x`.
fn frexp_exponent(x: f64) -> i64 {
    let bits = x.abs().to_bits();
    let field = ((bits >> 52) & 0x7ff) as i64;
    if field == 0 {
        // subnormal
        frexp_exponent(x * f64::from_bits(((64 + 1023) as u64) << 52)) - 64
    } else {
        field - 1022
    }
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        mant: Complex64::new(0.0, 0.0),
        exp2: 0,
    };

    pub const ONE: ScaledComplex = ScaledComplex {
        mant: Complex64::new(0.5, 0.0),
        exp2: 1,
    };

    fn normalized(mant: Complex64, exp2: i64) -> Self {
        let m = mant.re.abs().max(mant.im.abs());
        if m == 0.0 {
            return Self::ZERO;
        }
        if !m.is_finite() {
            return Self { mant, exp2 };
        }
        let e = frexp_exponent(m);
        Self {
            mant: Complex64::new(ldexp(mant.re, -e), ldexp(mant.im, -e)),
            exp2: exp2 + e,
        }
    }

    /// `exp(log_mag) * phase / |phase|`.
    pub fn from_log_phase(log_mag: f64, phase: Complex64) -> Self {
        let r = phase.norm();
        if r == 0.0 || log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let unit = phase / r;
        if !log_mag.is_finite() {
            return Self {
                mant: unit * f64::INFINITY,
                exp2: 0,
            };
        }
        let k = (log_mag / std::f64::consts::LN_2).floor();
        let frac = log_mag - k * std::f64::consts::LN_2;
        Self::normalized(unit * frac.exp(), k as i64)
    }

    /// Real value `±exp(log_mag)`.
    pub fn from_log_real(log_mag: f64, negative: bool) -> Self {
        let sign = if negative { -1.0 } else { 1.0 };
        Self::from_log_phase(log_mag, Complex64::new(sign, 0.0))
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::normalized(z, 0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::normalized(Complex64::new(x, 0.0), 0)
    }

    pub fn i() -> Self {
        Self {
            mant: Complex64::new(0.0, 0.5),
            exp2: 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    /// Natural log of the modulus (`-inf` for zero).
    pub fn log_mag(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mant.norm().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    /// Unit phase; zero for the zero value.
    pub fn phase(&self) -> Complex64 {
        if self.is_zero() {
            return self.mant;
        }
        self.mant / self.mant.norm()
    }

    /// Plain complex view. Overflows to infinity or underflows to zero when
    /// the value is outside the double range.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(ldexp(self.mant.re, self.exp2), ldexp(self.mant.im, self.exp2))
    }

    pub fn abs(&self) -> f64 {
        ldexp(self.mant.norm(), self.exp2)
    }

    pub fn conj(&self) -> Self {
        Self {
            mant: self.mant.conj(),
            exp2: self.exp2,
        }
    }

    pub fn recip(&self) -> Self {
        Self::ONE / *self
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return *self;
        }
        Self {
            mant: self.mant,
            exp2: self.exp2 + k,
        }
    }

    /// Multiply by `exp(log_factor)` without forming the factor.
    pub fn scale_log(&self, log_factor: f64) -> Self {
        *self * Self::from_log_real(log_factor, false)
    }

    pub fn powi(&self, k: i32) -> Self {
        let mut base = if k < 0 { self.recip() } else { *self };
        let mut e = k.unsigned_abs();
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn add_impl(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.exp2 >= other.exp2 {
            (self, other)
        } else {
            (other, self)
        };
        let shift = small.exp2 - big.exp2;
        if shift < -1100 {
            return big;
        }
        let m = big.mant + Complex64::new(ldexp(small.mant.re, shift), ldexp(small.mant.im, shift));
        Self::normalized(m, big.exp2)
    }
}

impl Default for ScaledComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for ScaledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ScaledComplex(({} {:+}i) * 2^{})",
            self.mant.re, self.mant.im, self.exp2
        )
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl From<f64> for ScaledComplex {
    fn from(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl Mul for ScaledComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::normalized(self.mant * rhs.mant, self.exp2 + rhs.exp2)
    }
}

impl Div for ScaledComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::normalized(self.mant / rhs.mant, self.exp2 - rhs.exp2)
    }
}

impl Add for ScaledComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_impl(rhs)
    }
}

impl Sub for ScaledComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.add_impl(-rhs)
    }
}

impl Neg for ScaledComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            mant: -self.mant,
            exp2: self.exp2,
        }
    }
}

impl Mul<f64> for ScaledComplex {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self * Self::from_real(rhs)
    }
}

impl Mul<Complex64> for ScaledComplex {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        self * Self::from_complex(rhs)
    }
}

impl Div<f64> for ScaledComplex {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self / Self::from_real(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn zero_behaves() {
        let z = ScaledComplex::ZERO;
        assert!(z.is_zero());
        assert_eq!(z.to_complex(), Complex64::new(0.0, 0.0));
        let a = ScaledComplex::from_complex(Complex64::new(2.0, -1.0));
        assert_eq!((a + z).to_complex(), a.to_complex());
        assert!((a * z).is_zero());
        assert!((z / a).is_zero());
        assert!((a - a).is_zero());
    }

    #[test]
    fn overflowing_products_stay_finite() {
        let big = ScaledComplex::from_log_real(800.0, false);
        let small = ScaledComplex::from_log_real(-790.0, true);
        let p = big * small;
        assert!((p.log_mag() - 10.0).abs() < 1e-12);
        assert!(!big.to_complex().re.is_finite());
        assert_eq!(small.to_complex().re, -0.0);
        assert!(close(p.to_complex(), Complex64::new(-10f64.exp(), 0.0), 1e-13));
        let q = big / ScaledComplex::from_log_real(798.0, false);
        assert!(close(q.to_complex(), Complex64::new(2f64.exp(), 0.0), 1e-13));
    }

    #[test]
    fn from_complex_with_overflowing_modulus() {
        let z = Complex64::new(1.5e308, 1.5e308);
        let s = ScaledComplex::from_complex(z);
        assert!(s.log_mag().is_finite());
        assert!((s.log_mag() - (1.5e308f64.ln() + 2f64.sqrt().ln())).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
            let z = Complex64::new(re, im);
            prop_assume!(z.norm() > 1e-300);
            let back = ScaledComplex::from_complex(z).to_complex();
            prop_assert!(close(back, z, 1e-15));
            let s = ScaledComplex::from_complex(z);
            prop_assert!((s.phase().norm() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn arithmetic_matches_plain(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3) {
            let x = Complex64::new(a, b);
            let y = Complex64::new(c, d);
            prop_assume!(x.norm() > 1e-6 && y.norm() > 1e-6);
            let sx = ScaledComplex::from(x);
            let sy = ScaledComplex::from(y);
            prop_assert!(close((sx * sy).to_complex(), x * y, 1e-14));
            prop_assert!(close((sx / sy).to_complex(), x / y, 1e-14));
            let sum = x + y;
            let tol = 1e-14 * (x.norm() + y.norm());
            prop_assert!(((sx + sy).to_complex() - sum).norm() <= tol);
            prop_assert!(((sx - sy).to_complex() - (x - y)).norm() <= tol);
        }

        #[test]
        fn log_magnitudes_add(la in -5000f64..5000.0, lb in -5000f64..5000.0) {
            let a = ScaledComplex::from_log_real(la, false);
            let b = ScaledComplex::from_log_real(lb, true);
            prop_assert!(((a * b).log_mag() - (la + lb)).abs() <= 1e-15 * (la.abs() + lb.abs()) + 1e-15);
            prop_assert!(((a / b).log_mag() - (la - lb)).abs() <= 1e-15 * (la.abs() + lb.abs()) + 1e-15);
            prop_assert!(((a * b) / b / a).to_complex().re - 1.0 < 1e-15);
        }
    }
}
