//! Complex and real numbers with an unbounded binary exponent.
//!
//! The inductive constructions drive scalar moduli far outside the `f64`
//! exponent range (the weighted-shift build goes below `2^-290000` by stage 15),
//! while every vector they produce stays moderate. Values here are stored as
//! an `f64` mantissa times `2^exp`, so products of powers of two stay exact
//! and nothing saturates in intermediate steps.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Splits a finite nonzero `x` into `(m, e)` with `x = m * 2^e` and `|m|` in `[0.5, 1)`.
pub(crate) fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    if raw_exp == 0 {
        // subnormal: lift into the normal range first
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let e = raw_exp - 1022;
    let m_bits = (bits & !(0x7ffu64 << 52)) | (1022u64 << 52);
    (f64::from_bits(m_bits), e)
}

/// `x * 2^e`, saturating to `inf` / `0` outside the `f64` range.
pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    e = e.clamp(-2300, 2300);
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Nonnegative real `mant * 2^exp` with `mant` in `[0.5, 1)`, or exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WideReal {
    mant: f64,
    exp: i64,
}

impl WideReal {
    pub const ZERO: WideReal = WideReal { mant: 0.0, exp: 0 };
    pub const ONE: WideReal = WideReal { mant: 0.5, exp: 1 };

    /// Panics on negative or non-finite input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite() && x >= 0.0, "WideReal needs a finite nonnegative value, got {x}");
        if x == 0.0 {
            return Self::ZERO;
        }
        let (mant, exp) = frexp(x);
        WideReal { mant, exp }
    }

    /// `2^e` exactly.
    pub fn pow2(e: i64) -> Self {
        WideReal { mant: 0.5, exp: e + 1 }
    }

    pub fn from_log2(l: f64) -> Self {
        if l == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let whole = l.floor();
        let frac = l - whole;
        Self::normalize(2f64.powf(frac), whole as i64)
    }

    fn normalize(mant: f64, exp: i64) -> Self {
        if mant == 0.0 {
            return Self::ZERO;
        }
        let (m, e) = frexp(mant);
        WideReal { mant: m, exp: exp + e }
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0.0
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp)
    }

    pub fn log2(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mant.log2() + self.exp as f64
        }
    }

    /// Binary exponent `e` with `self` in `[2^(e-1), 2^e)`.
    pub fn exponent(self) -> i64 {
        self.exp
    }

    pub fn sqrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let (m, e) = if self.exp % 2 == 0 { (self.mant, self.exp) } else { (self.mant * 2.0, self.exp - 1) };
        Self::normalize(m.sqrt(), e / 2)
    }

    /// Scientific notation with 17 significant digits, valid far outside the `f64` range.
    pub fn to_sci_string(self) -> String {
        if self.is_zero() {
            return "0.0000000000000000e0".to_string();
        }
        let v = self.to_f64();
        if v.is_normal() {
            return format!("{v:.16e}");
        }
        let log10 = self.log2() * std::f64::consts::LOG10_2;
        let e10 = log10.floor();
        let m10 = 10f64.powf(log10 - e10);
        format!("{m10:.16}e{}", e10 as i64)
    }
}

impl PartialOrd for WideReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => Some(self.exp.cmp(&other.exp).then(self.mant.partial_cmp(&other.mant)?)),
        }
    }
}

impl fmt::Display for WideReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci_string())
    }
}

/// Complex `mant * 2^exp` with `max(|re|, |im|)` of the mantissa in `[0.5, 1)`, or exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WideComplex {
    mant: Complex64,
    exp: i64,
}

impl WideComplex {
    pub const ZERO: WideComplex = WideComplex { mant: Complex64::new(0.0, 0.0), exp: 0 };
    pub const ONE: WideComplex = WideComplex { mant: Complex64::new(0.5, 0.0), exp: 1 };

    fn normalize(mant: Complex64, exp: i64) -> Self {
        let big = mant.re.abs().max(mant.im.abs());
        if big == 0.0 {
            return Self::ZERO;
        }
        let (_, e) = frexp(big);
        WideComplex { mant: Complex64::new(ldexp(mant.re, -e), ldexp(mant.im, -e)), exp: exp + e }
    }

    pub fn from_c64(z: Complex64) -> Self {
        assert!(z.re.is_finite() && z.im.is_finite(), "non-finite complex value {z}");
        Self::normalize(z, 0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }

    /// Modulus `2^log2_modulus`, argument `arg`.
    pub fn from_polar_log2(log2_modulus: f64, arg: f64) -> Self {
        let whole = log2_modulus.floor();
        let frac = log2_modulus - whole;
        Self::normalize(Complex64::from_polar(2f64.powf(frac), arg), whole as i64)
    }

    /// `2^e` exactly.
    pub fn pow2(e: i64) -> Self {
        WideComplex { mant: Complex64::new(0.5, 0.0), exp: e + 1 }
    }

    pub fn is_zero(self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(ldexp(self.mant.re, self.exp), ldexp(self.mant.im, self.exp))
    }

    pub fn abs(self) -> WideReal {
        WideReal::normalize(self.mant.norm(), self.exp)
    }

    pub fn norm_sqr(self) -> WideReal {
        WideReal::normalize(self.mant.norm_sqr(), 2 * self.exp)
    }

    pub fn log2_abs(self) -> f64 {
        self.abs().log2()
    }

    pub fn arg(self) -> f64 {
        self.mant.arg()
    }

    pub fn conj(self) -> Self {
        WideComplex { mant: self.mant.conj(), exp: self.exp }
    }

    pub fn scale_real(self, x: WideReal) -> Self {
        Self::normalize(self.mant * x.mant, self.exp + x.exp)
    }

    pub fn recip(self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Self::normalize(self.mant.inv(), -self.exp)
    }

    /// `self^n` by repeated squaring.
    pub fn powu(self, mut n: u64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }
}

impl From<Complex64> for WideComplex {
    fn from(z: Complex64) -> Self {
        Self::from_c64(z)
    }
}

impl Mul for WideReal {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        Self::normalize(self.mant * other.mant, self.exp + other.exp)
    }
}

impl Div for WideReal {
    type Output = Self;

    fn div(self, other: Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        Self::normalize(self.mant / other.mant, self.exp - other.exp)
    }
}

impl Add for WideReal {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= other.exp { (self, other) } else { (other, self) };
        let shift = lo.exp - hi.exp;
        if shift < -1100 {
            return hi;
        }
        Self::normalize(hi.mant + ldexp(lo.mant, shift), hi.exp)
    }
}

impl Mul for WideComplex {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        Self::normalize(self.mant * other.mant, self.exp + other.exp)
    }
}

impl Div for WideComplex {
    type Output = Self;

    fn div(self, other: Self) -> Self {
        Self::normalize(self.mant / other.mant, self.exp - other.exp)
    }
}

impl Neg for WideComplex {
    type Output = Self;

    fn neg(self) -> Self {
        WideComplex { mant: -self.mant, exp: self.exp }
    }
}

impl Add for WideComplex {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= other.exp { (self, other) } else { (other, self) };
        let shift = lo.exp - hi.exp;
        if shift < -1100 {
            return hi;
        }
        let lo_m = Complex64::new(ldexp(lo.mant.re, shift), ldexp(lo.mant.im, shift));
        Self::normalize(hi.mant + lo_m, hi.exp)
    }
}

impl Sub for WideComplex {
    type Output = Self;

    fn sub(self, other: Self) -> Self {
        self + -other
    }
}
