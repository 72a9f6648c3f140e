//! Exact complex-rational constants.

use std::fmt;

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Largest exact power folded at construction; bigger ones stay symbolic.
pub const MAX_POW_BITS: u64 = 4096;

/// A complex number `re + i·im` with exact rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Const {
    pub re: BigRational,
    pub im: BigRational,
}

impl Const {
    pub fn zero() -> Self {
        Const { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Const::int(1)
    }

    pub fn int(n: i64) -> Self {
        Const { re: BigRational::from_integer(BigInt::from(n)), im: BigRational::zero() }
    }

    /// `num/den`; panics if `den == 0`.
    pub fn rational(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator in rational constant");
        Const {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(re: BigRational) -> Self {
        Const { re, im: BigRational::zero() }
    }

    pub fn complex(re: BigRational, im: BigRational) -> Self {
        Const { re, im }
    }

    pub fn imag_unit() -> Self {
        Const { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True for real constants strictly below zero.
    pub fn is_negative_real(&self) -> bool {
        self.im.is_zero() && self.re.is_negative()
    }

    pub fn add(&self, o: &Const) -> Const {
        Const { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Const) -> Const {
        Const { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &Const) -> Const {
        Const {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn neg(&self) -> Const {
        Const { re: -&self.re, im: -&self.im }
    }

    pub fn conj(&self) -> Const {
        Const { re: self.re.clone(), im: -&self.im }
    }

    /// `None` when dividing by zero.
    pub fn div(&self, o: &Const) -> Option<Const> {
        if o.is_zero() {
            return None;
        }
        let den = &o.re * &o.re + &o.im * &o.im;
        let re = (&self.re * &o.re + &self.im * &o.im) / &den;
        let im = (&self.im * &o.re - &self.re * &o.im) / &den;
        Some(Const { re, im })
    }

    /// Integer power; `None` for a negative power of zero, or when the exact
    /// result would exceed `MAX_POW_BITS` bits.
    pub fn powi(&self, n: i32) -> Option<Const> {
        if n < 0 {
            return Const::one().div(self)?.powi(n.checked_neg()?);
        }
        let bits = [self.re.numer(), self.re.denom(), self.im.numer(), self.im.denom()]
            .iter()
            .map(|b| b.bits())
            .max()
            .unwrap_or(0);
        if bits > 1 && bits.saturating_mul(n as u64) > MAX_POW_BITS {
            return None;
        }
        let mut acc = Const::one();
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        Some(acc)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fallback for magnitudes outside the f64 range.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn fmt_ratio(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Const {
    /// Prints in the expression syntax, e.g. `3/4`, `-2`, `1/2+3*i`, `i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return fmt_ratio(&self.re, f);
        }
        if !self.re.is_zero() {
            fmt_ratio(&self.re, f)?;
            if self.im.is_positive() {
                write!(f, "+")?;
            }
        }
        if self.im.is_one() {
            write!(f, "i")
        } else if (-&self.im).is_one() {
            write!(f, "-i")
        } else {
            fmt_ratio(&self.im, f)?;
            write!(f, "*i")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_exact() {
        let a = Const::rational(1, 3);
        let b = Const::rational(1, 6);
        assert_eq!(a.add(&b), Const::rational(1, 2));
        assert_eq!(a.mul(&b), Const::rational(1, 18));
        assert_eq!(Const::imag_unit().mul(&Const::imag_unit()), Const::int(-1));
        assert_eq!(Const::int(2).powi(-2), Some(Const::rational(1, 4)));
        assert_eq!(Const::zero().powi(-1), None);
        assert_eq!(Const::int(9).powi(i32::MAX), None);
        assert_eq!(Const::int(2).powi(i32::MIN), None);
        assert_eq!(Const::int(-1).powi(i32::MAX), Some(Const::int(-1)));
        assert_eq!(Const::one().div(&Const::zero()), None);
    }

    #[test]
    fn complex_division() {
        // (1+2i)/(3-4i) = (-1+2i)/5
        let a = Const::complex(BigRational::from_integer(1.into()), BigRational::from_integer(2.into()));
        let b = Const::complex(BigRational::from_integer(3.into()), BigRational::from_integer((-4).into()));
        let q = a.div(&b).unwrap();
        assert_eq!(q.re, BigRational::new((-1).into(), 5.into()));
        assert_eq!(q.im, BigRational::new(2.into(), 5.into()));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Const::rational(-3, 4).to_string(), "-3/4");
        assert_eq!(Const::imag_unit().to_string(), "i");
        let c = Const::complex(BigRational::new(1.into(), 2.into()), BigRational::from_integer(3.into()));
        assert_eq!(c.to_string(), "1/2+3*i");
    }
}
