//! Exact arithmetic in `Q(sqrt d)`.
//!
//! Every trace of a surface whose basis traces `x, y` are rational lies in
//! the quadratic field generated by the re-projected third trace, so sink
//! descent and trace-equality certificates can be decided exactly.

use std::cmp::Ordering;

use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::precision::Interval;

/// The element `a + b * sqrt(d)` of a fixed field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    pub a: Rational,
    pub b: Rational,
}

/// The field `Q(sqrt d)`; `d = 0` stands for `Q` itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurdField {
    d: Rational,
}

/// Exact square root of a nonnegative rational, if it is a square.
pub fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.cmp0() == Ordering::Less {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    if n.is_perfect_square() && d.is_perfect_square() {
        Some(Rational::from((n.clone().sqrt(), d.clone().sqrt())))
    } else {
        None
    }
}

impl SurdField {
    /// The field generated by `sqrt d` for `d >= 0`.
    pub fn new(d: Rational) -> Self {
        assert!(d.cmp0() != Ordering::Less, "negative discriminant");
        if rational_sqrt(&d).is_some() {
            Self { d: Rational::new() }
        } else {
            Self { d }
        }
    }

    pub fn is_rational(&self) -> bool {
        self.d.cmp0() == Ordering::Equal
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }

    pub fn rational(&self, r: Rational) -> Surd {
        Surd {
            a: r,
            b: Rational::new(),
        }
    }

    pub fn add(&self, x: &Surd, y: &Surd) -> Surd {
        Surd {
            a: Rational::from(&x.a + &y.a),
            b: Rational::from(&x.b + &y.b),
        }
    }

    pub fn sub(&self, x: &Surd, y: &Surd) -> Surd {
        Surd {
            a: Rational::from(&x.a - &y.a),
            b: Rational::from(&x.b - &y.b),
        }
    }

    pub fn mul(&self, x: &Surd, y: &Surd) -> Surd {
        let bb = Rational::from(&x.b * &y.b) * &self.d;
        Surd {
            a: Rational::from(&x.a * &y.a) + bb,
            b: Rational::from(&x.a * &y.b) + Rational::from(&x.b * &y.a),
        }
    }

    pub fn scale(&self, x: &Surd, k: &Rational) -> Surd {
        Surd {
            a: Rational::from(&x.a * k),
            b: Rational::from(&x.b * k),
        }
    }

    /// Sign of `a + b sqrt d`.
    pub fn sign(&self, x: &Surd) -> Ordering {
        let sa = x.a.cmp0();
        let sb = if self.is_rational() {
            Ordering::Equal
        } else {
            x.b.cmp0()
        };
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // Opposite signs: compare a^2 with b^2 d (never equal for nonsquare d).
        let a2 = Rational::from(x.a.square_ref());
        let b2d = Rational::from(x.b.square_ref()) * &self.d;
        if a2 > b2d {
            sa
        } else {
            sb
        }
    }

    pub fn cmp(&self, x: &Surd, y: &Surd) -> Ordering {
        self.sign(&self.sub(x, y))
    }

    pub fn eq(&self, x: &Surd, y: &Surd) -> bool {
        self.cmp(x, y) == Ordering::Equal
    }

    /// Outward-rounded enclosure at `prec` bits.
    pub fn enclose(&self, x: &Surd, prec: u32) -> Interval {
        let a = Interval::from_rational(&x.a, prec);
        if self.is_rational() || x.b.cmp0() == Ordering::Equal {
            return a;
        }
        let root = Interval::from_rational(&self.d, prec).sqrt();
        a.add(&Interval::from_rational(&x.b, prec).mul(&root))
    }

    /// Nearest double, for reporting.
    pub fn to_f64(&self, x: &Surd) -> f64 {
        self.enclose(x, 128).mid().to_f64()
    }

    /// Midpoint at `prec` bits, rounded to nearest.
    pub fn to_float(&self, x: &Surd, prec: u32) -> Float {
        let e = self.enclose(x, prec + 32);
        Float::with_val_round(prec, e.mid(), Round::Nearest).0
    }
}

impl Surd {
    pub fn from_integer(n: i64) -> Self {
        Self {
            a: Rational::from(Integer::from(n)),
            b: Rational::new(),
        }
    }
}
