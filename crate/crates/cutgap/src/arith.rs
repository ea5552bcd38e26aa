//! Scalar arithmetic contexts: plain `f64` and multi-precision floats.
//!
//! Verification code is written once against [`Arith`] and instantiated with
//! either context. The multi-precision context rounds to nearest at a fixed
//! working precision; callers that need a rigorous answer add an explicit
//! rounding allowance (see [`Arith::unit_roundoff`]).

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use std::cmp::Ordering;

pub trait Arith {
    type R: Clone + std::fmt::Debug;

    fn from_f64(&self, x: f64) -> Self::R;
    fn add(&self, a: &Self::R, b: &Self::R) -> Self::R;
    fn sub(&self, a: &Self::R, b: &Self::R) -> Self::R;
    fn mul(&self, a: &Self::R, b: &Self::R) -> Self::R;
    fn div(&self, a: &Self::R, b: &Self::R) -> Self::R;
    fn sqrt(&self, a: &Self::R) -> Self::R;
    fn cmp(&self, a: &Self::R, b: &Self::R) -> Ordering;
    /// Nearest `f64`.
    fn to_f64(&self, a: &Self::R) -> f64;
    /// Relative rounding error of one operation.
    fn unit_roundoff(&self) -> f64;

    fn zero(&self) -> Self::R {
        self.from_f64(0.0)
    }
    fn one(&self) -> Self::R {
        self.from_f64(1.0)
    }
    fn neg(&self, a: &Self::R) -> Self::R {
        self.sub(&self.zero(), a)
    }
    fn abs(&self, a: &Self::R) -> Self::R {
        if self.cmp(a, &self.zero()) == Ordering::Less {
            self.neg(a)
        } else {
            a.clone()
        }
    }
    fn ratio(&self, p: f64, q: f64) -> Self::R {
        self.div(&self.from_f64(p), &self.from_f64(q))
    }
    fn min(&self, a: &Self::R, b: &Self::R) -> Self::R {
        if self.cmp(a, b) == Ordering::Greater {
            b.clone()
        } else {
            a.clone()
        }
    }
    fn max(&self, a: &Self::R, b: &Self::R) -> Self::R {
        if self.cmp(a, b) == Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Double;

impl Arith for Double {
    type R = f64;

    fn from_f64(&self, x: f64) -> f64 {
        x
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn sub(&self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn div(&self, a: &f64, b: &f64) -> f64 {
        a / b
    }
    fn sqrt(&self, a: &f64) -> f64 {
        a.sqrt()
    }
    fn cmp(&self, a: &f64, b: &f64) -> Ordering {
        a.total_cmp(b)
    }
    fn to_f64(&self, a: &f64) -> f64 {
        *a
    }
    fn unit_roundoff(&self) -> f64 {
        f64::EPSILON / 2.0
    }
}

/// Multi-precision context backed by `astro-float`.
#[derive(Clone, Debug)]
pub struct MultiPrecision {
    bits: usize,
}

const RM: RoundingMode = RoundingMode::ToEven;

impl MultiPrecision {
    /// Working precision of at least `digits` significant decimal digits.
    pub fn with_digits(digits: u32) -> Self {
        let bits = (f64::from(digits.max(16)) * std::f64::consts::LOG2_10).ceil() as usize + 8;
        // astro-float works in 64-bit words
        let bits = bits.div_ceil(64) * 64;
        MultiPrecision { bits }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }
}

impl Arith for MultiPrecision {
    type R = BigFloat;

    fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.bits)
    }
    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, RM)
    }
    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, RM)
    }
    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, RM)
    }
    fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, RM)
    }
    fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.bits, RM)
    }
    fn cmp(&self, a: &BigFloat, b: &BigFloat) -> Ordering {
        match a.cmp(b) {
            Some(c) if c < 0 => Ordering::Less,
            Some(c) if c > 0 => Ordering::Greater,
            Some(_) => Ordering::Equal,
            None => panic!("comparison with NaN in multi-precision context"),
        }
    }
    fn to_f64(&self, a: &BigFloat) -> f64 {
        if a.is_zero() {
            return 0.0;
        }
        let mut cc = Consts::new().expect("astro-float constants cache");
        let s = a
            .format(Radix::Dec, RM, &mut cc)
            .expect("formatting a finite BigFloat");
        parse_astro_decimal(&s)
    }
    fn unit_roundoff(&self) -> f64 {
        2f64.powi(-(self.bits as i32))
    }
}

/// Parses astro-float's decimal output, e.g. `1.25e-3` or `-7.5e+1`.
fn parse_astro_decimal(s: &str) -> f64 {
    if let Ok(v) = s.parse::<f64>() {
        return v;
    }
    // never observed, kept as a safety net for exotic formatting
    let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    cleaned
        .parse::<f64>()
        .unwrap_or_else(|_| panic!("unparseable multi-precision value {s}"))
}

/// Smallest `f64` that is `>= x` after moving one ulp up.
pub fn round_up(x: f64) -> f64 {
    x.next_up()
}

pub fn round_down(x: f64) -> f64 {
    x.next_down()
}
