//! Precision policy, adaptive refinement and certified interval arithmetic.

use std::cmp::Ordering;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How much working precision a computation may use and when two
/// evaluations count as agreeing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub base_bits: u32,
    pub max_bits: u32,
    pub agreement_tolerance: f64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            base_bits: 256,
            max_bits: 16384,
            agreement_tolerance: 1e-30,
        }
    }
}

impl PrecisionPolicy {
    pub fn with_base_bits(bits: u32) -> Self {
        let d = Self::default();
        Self {
            base_bits: bits,
            max_bits: d.max_bits.max(bits),
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_bits < 64 {
            return Err(Error::InvalidInput("base_bits must be at least 64".into()));
        }
        if self.max_bits < self.base_bits {
            return Err(Error::InvalidInput("max_bits must be at least base_bits".into()));
        }
        if !(self.agreement_tolerance > 0.0 && self.agreement_tolerance < 1.0) {
            return Err(Error::InvalidInput("agreement_tolerance must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Values that can be compared across two working precisions.
pub trait Agree {
    /// Largest relative discrepancy between corresponding components.
    fn discrepancy(&self, other: &Self) -> f64;
}

/// Relative difference of two reals, with absolute fallback near zero.
pub fn rel_diff(a: &Float, b: &Float) -> f64 {
    let d = Float::with_val(a.prec().max(b.prec()), a - b).abs();
    let scale = a.clone().abs().max(&b.clone().abs());
    if scale.is_zero() {
        return d.to_f64();
    }
    if d.is_zero() {
        return 0.0;
    }
    let r = Float::with_val(64, &d / &scale).to_f64();
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

impl Agree for Float {
    fn discrepancy(&self, other: &Self) -> f64 {
        rel_diff(self, other)
    }
}

impl<T: Agree> Agree for Vec<T> {
    fn discrepancy(&self, other: &Self) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.iter()
            .zip(other)
            .map(|(a, b)| a.discrepancy(b))
            .fold(0.0, f64::max)
    }
}

impl<A: Agree, B: Agree> Agree for (A, B) {
    fn discrepancy(&self, other: &Self) -> f64 {
        self.0.discrepancy(&other.0).max(self.1.discrepancy(&other.1))
    }
}

/// Evaluates `f` at the base precision and at double precision, doubling
/// until two consecutive results agree within the policy tolerance.
/// An inner `PrecisionExhausted` also asks for more bits.
/// Returns the more precise result together with its precision.
pub fn refine<T, F>(policy: &PrecisionPolicy, what: &str, mut f: F) -> Result<(T, u32)>
where
    T: Agree,
    F: FnMut(u32) -> Result<T>,
{
    let mut bits = policy.base_bits;
    let mut prev: Option<T> = None;
    loop {
        match f(bits) {
            Ok(next) => {
                if let Some(p) = &prev {
                    if p.discrepancy(&next) <= policy.agreement_tolerance {
                        return Ok((next, bits));
                    }
                }
                prev = Some(next);
            }
            Err(Error::PrecisionExhausted { .. }) => prev = None,
            Err(e) => return Err(e),
        }
        let next_bits = bits.saturating_mul(2);
        if next_bits > policy.max_bits {
            return Err(Error::PrecisionExhausted {
                what: what.to_string(),
                max_bits: policy.max_bits,
            });
        }
        bits = next_bits;
    }
}

/// A closed real interval `[lo, hi]` with outward-rounded endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Float,
    pub hi: Float,
}

impl Interval {
    pub fn point(x: Float) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn from_integer(n: &Integer, prec: u32) -> Self {
        Self {
            lo: Float::with_val_round(prec, n, Round::Down).0,
            hi: Float::with_val_round(prec, n, Round::Up).0,
        }
    }

    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        Self {
            lo: Float::with_val_round(prec, r, Round::Down).0,
            hi: Float::with_val_round(prec, r, Round::Up).0,
        }
    }

    /// Encloses `mid` with a symmetric radius.
    pub fn around(mid: &Float, rad: &Float) -> Self {
        let prec = mid.prec();
        Self {
            lo: Float::with_val_round(prec, mid - rad, Round::Down).0,
            hi: Float::with_val_round(prec, mid + rad, Round::Up).0,
        }
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec()
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.prec().max(o.prec());
        Self {
            lo: Float::with_val_round(p, &self.lo + &o.lo, Round::Down).0,
            hi: Float::with_val_round(p, &self.hi + &o.hi, Round::Up).0,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.prec().max(o.prec());
        Self {
            lo: Float::with_val_round(p, &self.lo - &o.hi, Round::Down).0,
            hi: Float::with_val_round(p, &self.hi - &o.lo, Round::Up).0,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prec().max(o.prec());
        let pairs = [
            (&self.lo, &o.lo),
            (&self.lo, &o.hi),
            (&self.hi, &o.lo),
            (&self.hi, &o.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let l = Float::with_val_round(p, a * b, Round::Down).0;
            let h = Float::with_val_round(p, a * b, Round::Up).0;
            lo = Some(match lo {
                Some(x) if x <= l => x,
                _ => l,
            });
            hi = Some(match hi {
                Some(x) if x >= h => x,
                _ => h,
            });
        }
        Self {
            lo: lo.expect("four products"),
            hi: hi.expect("four products"),
        }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Square root of an interval contained in `[0, inf)`.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        let lo = if self.lo.is_sign_negative() {
            Float::with_val(p, 0)
        } else {
            Float::with_val_round(p, self.lo.sqrt_ref(), Round::Down).0
        };
        Self {
            lo,
            hi: Float::with_val_round(p, self.hi.sqrt_ref(), Round::Up).0,
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.mul(&Self::from_integer(&Integer::from(k), self.prec()))
    }

    pub fn mid(&self) -> Float {
        let p = self.prec() + 2;
        Float::with_val(p, &self.lo + &self.hi) / 2u32
    }

    pub fn rad(&self) -> Float {
        let p = self.prec();
        Float::with_val_round(p, &self.hi - &self.lo, Round::Up).0 / 2u32
    }

    /// Width relative to magnitude; infinite for intervals straddling zero.
    pub fn rel_width(&self) -> f64 {
        let w = Float::with_val_round(64, &self.hi - &self.lo, Round::Up).0;
        let m = self.lo.clone().abs().min(&self.hi.clone().abs());
        if self.lo.is_sign_negative() != self.hi.is_sign_negative() || m.is_zero() {
            return if w.is_zero() { 0.0 } else { f64::INFINITY };
        }
        Float::with_val(64, &w / &m).to_f64()
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Certified comparison; `None` when the intervals overlap.
    pub fn cmp_certified(&self, o: &Self) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if o.hi < self.lo {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// True if every point exceeds `c`.
    pub fn certainly_gt(&self, c: &Float) -> bool {
        &self.lo > c
    }
}

/// Parses a decimal string such as `-3.25e-4` into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidInput(format!("not a decimal number: {s:?}"));
    let t = s.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if exp.unsigned_abs() > 100_000 {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let mut num = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let shift = exp - frac.len() as i64;
    let ten = Integer::from(10);
    let r = if shift >= 0 {
        Rational::from(num * ten.pow(shift as u32))
    } else {
        Rational::from((num, ten.pow((-shift) as u32)))
    };
    Ok(r)
}

/// Renders a real with `digits` significant decimal digits.
pub fn to_decimal(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

/// Renders a rational as a decimal with `digits` significant digits.
pub fn rational_to_decimal(r: &Rational, digits: usize) -> String {
    let bits = (digits as f64 * 3.33) as u32 + 16;
    to_decimal(&Float::with_val(bits, r), digits)
}

/// The constant pi at the given precision.
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, rug::float::Constant::Pi)
}
