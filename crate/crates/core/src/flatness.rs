//! Diophantine side of the boundary: continued fractions, the windowed
//! approximation exponent, explicit non-flat directions, graph flatness
//! profiles and a Monte Carlo over random directions.
//!
//! Directions are stored in a frame: a value `alpha >= 0` given by its
//! continued fraction, and a signed coordinate swap taking `(1, alpha)` to
//! the actual direction. Frames are isometries preserving height, so
//! distances and heights can be computed on convergents `(q_j, p_j)`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey::{add, Vector};
use crate::markoff::SurfaceContext;
use crate::normball::{boundary_point_at, support_functional_at, SupportFunctional};
use crate::precision::{refine, Agree, Interval};

/// Largest `log2 e^{A s}` that [`construct_nonflat`] will evaluate.
pub const DEFAULT_EXP_BUDGET_BITS: u64 = 1 << 20;

/// Largest height of the convergent used as the supporting-line reference.
pub const REFERENCE_HEIGHT_BUDGET: u64 = 10_000_000;

/// Extra convergent levels between the profiled depth and the reference.
pub const REFERENCE_EXTRA_DEPTH: usize = 20;

/// Largest relative change of a profile value under a shallower reference.
pub const SUPPORT_STABILITY_TOLERANCE: f64 = 1e-6;

/// Target gap between the certified lower and upper exponent scores.
const SCORE_TOLERANCE: f64 = 1e-12;

/// Thresholds reported by [`monte_carlo_omega`].
pub const MONTE_CARLO_EPSILONS: [f64; 3] = [0.5, 0.2, 0.1];

/// Samples drawn from one generator stream.
const MONTE_CARLO_BLOCK: usize = 64;

/// Working precision for distances and angle targets.
const DISTANCE_BITS: u32 = 256;

/// `[a0; a1, a2, ...]` with its convergents `p_j / q_j`, `j = 0..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub a0: Integer,
    pub quotients: Vec<Integer>,
    pub convergents: Vec<(Integer, Integer)>,
}

/// JSON form of a [`ContinuedFraction`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuedFractionRow {
    pub a0: String,
    pub quotients: Vec<String>,
}

impl ContinuedFraction {
    pub fn new(a0: Integer, quotients: Vec<Integer>) -> Result<Self> {
        if a0 < 0 {
            return Err(Error::InvalidInput(format!("integer part {a0} must be nonnegative")));
        }
        let mut cf = Self {
            convergents: vec![(a0.clone(), Integer::from(1))],
            a0,
            quotients: Vec::with_capacity(quotients.len()),
        };
        for a in quotients {
            cf.push(a)?;
        }
        Ok(cf)
    }

    pub fn from_u64(a0: u64, quotients: &[u64]) -> Result<Self> {
        Self::new(Integer::from(a0), quotients.iter().map(|&a| Integer::from(a)).collect())
    }

    /// Appends a partial quotient.
    pub fn push(&mut self, a: Integer) -> Result<()> {
        if a < 1 {
            return Err(Error::InvalidInput(format!("partial quotient {a} must be positive")));
        }
        let n = self.convergents.len();
        let (p1, q1) = &self.convergents[n - 1];
        let (p0, q0) = if n >= 2 {
            self.convergents[n - 2].clone()
        } else {
            (Integer::from(1), Integer::from(0))
        };
        let p = Integer::from(&a * p1) + p0;
        let q = Integer::from(&a * q1) + q0;
        self.convergents.push((p, q));
        self.quotients.push(a);
        Ok(())
    }

    /// Denominators `q_0, q_1, ...`.
    pub fn denominators(&self) -> Vec<Integer> {
        self.convergents.iter().map(|(_, q)| q.clone()).collect()
    }

    pub fn row(&self) -> ContinuedFractionRow {
        ContinuedFractionRow {
            a0: self.a0.to_string(),
            quotients: self.quotients.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn from_row(row: &ContinuedFractionRow) -> Result<Self> {
        let parse = |s: &str| {
            Integer::from_str_radix(s, 10).map_err(|_| Error::InvalidInput(format!("bad partial quotient {s:?}")))
        };
        Self::new(
            parse(&row.a0)?,
            row.quotients.iter().map(|s| parse(s)).collect::<Result<_>>()?,
        )
    }
}

/// Canonical expansion of `p / q`, with last quotient at least 2 unless the
/// expansion is `[a0]`.
pub fn cf_of_rational(p: &Integer, q: &Integer) -> Result<ContinuedFraction> {
    if *q < 1 || *p < 0 {
        return Err(Error::InvalidInput(format!("{p}/{q} needs q >= 1 and p >= 0")));
    }
    if Integer::from(p.gcd_ref(q)) != 1 {
        return Err(Error::InvalidInput(format!("{p}/{q} is not in lowest terms")));
    }
    let (mut a, mut b) = (p.clone(), q.clone());
    let mut digits = Vec::new();
    while b != 0 {
        let (d, r) = a.div_rem_floor(b.clone());
        digits.push(d);
        a = b;
        b = r;
    }
    let a0 = digits.remove(0);
    ContinuedFraction::new(a0, digits)
}

/// Growth rate of a constructed direction.
#[derive(Clone, Debug, PartialEq)]
pub enum Rate {
    /// `q_{j+1} >= e^{A q_j}` at every level.
    Fixed(Rational),
    /// `q_{j+1} >= e^{j q_j}`, with `j` the convergent index.
    Growing,
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Fixed(a) => write!(f, "{a}"),
            Rate::Growing => write!(f, "j"),
        }
    }
}

/// Proof data for one constructed level: `s_next >= exp_upper >= e^{A s_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelCertificate {
    /// Index of `s_j` among the convergents.
    pub j: usize,
    pub rate: Rational,
    pub s_j: Integer,
    pub s_next: Integer,
    pub quotient: Integer,
    /// Outward-rounded upper bound for `e^{A s_j}`.
    pub exp_upper: Rational,
}

/// A continued fraction extended level by level so that denominators grow
/// at least exponentially.
#[derive(Clone, Debug, PartialEq)]
pub struct NonflatConstruction {
    pub cf: ContinuedFraction,
    /// Number of quotients supplied by the prefix.
    pub prefix_len: usize,
    pub certificates: Vec<LevelCertificate>,
}

/// Extends `prefix` by `levels` quotients with `s_{j+1} >= e^{A s_j}`.
pub fn construct_nonflat(rate: &Rate, levels: usize, prefix: &ContinuedFraction) -> Result<NonflatConstruction> {
    construct_nonflat_with_budget(rate, levels, prefix, DEFAULT_EXP_BUDGET_BITS)
}

/// As [`construct_nonflat`], refusing exponentials beyond `budget_bits`.
pub fn construct_nonflat_with_budget(
    rate: &Rate,
    levels: usize,
    prefix: &ContinuedFraction,
    budget_bits: u64,
) -> Result<NonflatConstruction> {
    if levels == 0 {
        return Err(Error::InvalidInput("levels must be at least 1".into()));
    }
    if let Rate::Fixed(a) = rate {
        if *a <= 0 {
            return Err(Error::InvalidInput(format!("rate {a} must be positive")));
        }
    }
    let mut cf = prefix.clone();
    let mut certificates = Vec::with_capacity(levels);
    for _ in 0..levels {
        let j = cf.convergents.len() - 1;
        let a = match rate {
            Rate::Fixed(a) => a.clone(),
            Rate::Growing => Rational::from(j),
        };
        let s_j = cf.convergents[j].1.clone();
        let s_prev = if j >= 1 {
            cf.convergents[j - 1].1.clone()
        } else {
            Integer::new()
        };
        let x = Rational::from(&a * &s_j);
        let exp_upper = exp_upper_bound(&x, budget_bits)?;
        // b = ceil((E - s_{j-1}) / s_j), at least 1.
        let need = Rational::from(&exp_upper - &s_prev) / &s_j;
        let b = Integer::from(need.ceil_ref()).max(Integer::from(1));
        let s_next = Integer::from(&b * &s_j) + &s_prev;
        assert!(s_next >= exp_upper, "ceiling construction meets its bound");
        cf.push(b.clone())?;
        certificates.push(LevelCertificate {
            j,
            rate: a,
            s_j,
            s_next,
            quotient: b,
            exp_upper,
        });
    }
    Ok(NonflatConstruction {
        cf,
        prefix_len: prefix.quotients.len(),
        certificates,
    })
}

/// A rational number at least `e^x`, tight to about 64 bits.
fn exp_upper_bound(x: &Rational, budget_bits: u64) -> Result<Rational> {
    let log2 = Float::with_val(64, x) * std::f64::consts::LOG2_E;
    let needed = (log2.to_f64().max(0.0).ceil() as u64).saturating_add(64);
    if needed > budget_bits {
        return Err(Error::OverflowBudget {
            needed_bits: needed,
            budget_bits,
        });
    }
    let prec = u32::try_from(needed + 64).map_err(|_| Error::OverflowBudget {
        needed_bits: needed,
        budget_bits,
    })?;
    let mut e = Float::with_val_round(prec, x, Round::Up).0;
    e.exp_round(Round::Up);
    e.to_rational()
        .ok_or_else(|| Error::InvalidInput("non-finite exponential".into()))
}

/// An irrational (or rational) direction as a continued fraction in a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionTarget {
    pub label: String,
    /// Exchange the coordinates of `(1, alpha)`.
    pub swap: bool,
    /// Then negate the second coordinate.
    pub negate: bool,
    pub a0: Integer,
    /// Known partial quotients `a_1, a_2, ...`.
    pub quotients: Vec<Integer>,
    /// Repeated forever after `quotients` when nonempty.
    pub period: Vec<Integer>,
    /// The quotients are the complete expansion of a rational.
    pub rational: bool,
    /// Convergent index from which successors were constructed.
    pub constructed_from: Option<usize>,
}

impl DirectionTarget {
    /// Periodic expansion `[a0; pre, period, period, ...]`.
    pub fn periodic(label: &str, a0: u64, pre: &[u64], period: &[u64]) -> Result<Self> {
        if period.is_empty() || period.contains(&0) || pre.contains(&0) {
            return Err(Error::InvalidInput(
                "periodic quotients must be positive and the period nonempty".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            swap: false,
            negate: false,
            a0: Integer::from(a0),
            quotients: pre.iter().map(|&a| Integer::from(a)).collect(),
            period: period.iter().map(|&a| Integer::from(a)).collect(),
            rational: false,
            constructed_from: None,
        })
    }

    /// The direction `(1, phi)`.
    pub fn golden() -> Self {
        Self::periodic("golden", 1, &[], &[1]).expect("valid period")
    }

    /// The direction `(1, 1 + sqrt 2)`.
    pub fn silver() -> Self {
        Self::periodic("silver", 2, &[], &[2]).expect("valid period")
    }

    /// Any irrational direction `(1, alpha)` whose expansion starts with the
    /// given quotients.
    pub fn prefix(label: &str, cf: &ContinuedFraction) -> Self {
        Self {
            label: label.into(),
            swap: false,
            negate: false,
            a0: cf.a0.clone(),
            quotients: cf.quotients.clone(),
            period: Vec::new(),
            rational: false,
            constructed_from: None,
        }
    }

    pub fn constructed(label: &str, c: &NonflatConstruction) -> Self {
        Self {
            constructed_from: Some(c.prefix_len),
            ..Self::prefix(label, &c.cf)
        }
    }

    /// The rational direction `(p, q)`.
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::ZeroVector);
        }
        // Line through (p, q) with p >= 0.
        let (p, q) = if p < 0 || (p == 0 && q < 0) { (-p, -q) } else { (p, q) };
        let negate = q < 0;
        let (x, y) = (p.unsigned_abs(), q.unsigned_abs());
        let swap = y > x;
        let (den, num) = if swap { (y, x) } else { (x, y) };
        let g = Integer::from(num).gcd(&Integer::from(den));
        let cf = cf_of_rational(&(Integer::from(num) / &g), &(Integer::from(den) / &g))?;
        Ok(Self {
            label: format!("({p},{q})"),
            swap,
            negate,
            a0: cf.a0,
            quotients: cf.quotients,
            period: Vec::new(),
            rational: true,
            constructed_from: None,
        })
    }

    /// The direction at angle `theta` (radians, reduced into `[0, pi)`),
    /// with quotients extracted from a certified enclosure.
    pub fn from_angle(theta: &Rational, bits: u32) -> Result<Self> {
        let pi_lo = Float::with_val_round(bits, Constant::Pi, Round::Down).0;
        let pi_hi = Float::with_val_round(bits, Constant::Pi, Round::Up).0;
        let k = Float::with_val(bits, Float::with_val(bits, theta) / &pi_lo).floor();
        let k = k.to_integer().expect("finite angle");
        // theta - k pi, outward rounded.
        let (klo, khi) = if k >= 0 { (&pi_hi, &pi_lo) } else { (&pi_lo, &pi_hi) };
        let t = Interval {
            lo: Float::with_val_round(
                bits,
                theta - Float::with_val_round(bits, klo * &k, Round::Up).0,
                Round::Down,
            )
            .0,
            hi: Float::with_val_round(
                bits,
                theta - Float::with_val_round(bits, khi * &k, Round::Down).0,
                Round::Up,
            )
            .0,
        };
        // alpha = tan(phi) with phi in (0, pi/2), in one of four frames.
        let mid = t.mid().to_f64();
        let (swap, negate, phi) = if mid <= PI / 4.0 {
            (false, false, t)
        } else if mid <= PI / 2.0 {
            (true, false, sub_from(&t, &pi_lo, &pi_hi, 2))
        } else if mid < 3.0 * PI / 4.0 {
            (true, true, minus_pi_over(&t, &pi_lo, &pi_hi, 2))
        } else {
            (false, true, sub_from(&t, &pi_lo, &pi_hi, 1))
        };
        let half = Float::with_val_round(bits, &pi_lo / 2u32, Round::Down).0;
        if phi.lo <= 0 || phi.hi >= half {
            return Err(Error::InvalidInput(format!(
                "angle {theta} is too close to a coordinate direction"
            )));
        }
        let lo = Float::with_val_round(bits, phi.lo.tan_ref(), Round::Down).0;
        let hi = Float::with_val_round(bits, phi.hi.tan_ref(), Round::Up).0;
        let (Some(lo), Some(hi)) = (lo.to_rational(), hi.to_rational()) else {
            return Err(Error::InvalidInput(format!("angle {theta} could not be framed")));
        };
        let (Some(a0), quotients) = cf_digits(lo, hi) else {
            return Err(Error::InvalidInput(format!("angle {theta} needs more precision")));
        };
        Ok(Self {
            label: format!("angle {}", theta.to_f64()),
            swap,
            negate,
            a0,
            quotients,
            period: Vec::new(),
            rational: false,
            constructed_from: None,
        })
    }

    /// Partial quotient `a_k` for `k >= 1`, when known.
    pub fn quotient(&self, k: usize) -> Option<Integer> {
        if k == 0 {
            return Some(self.a0.clone());
        }
        let i = k - 1;
        if i < self.quotients.len() {
            return Some(self.quotients[i].clone());
        }
        if self.period.is_empty() {
            return None;
        }
        let r = (i - self.quotients.len()) % self.period.len();
        Some(self.period[r].clone())
    }

    /// The first `n` quotients after `a0`, or as many as are known.
    pub fn expansion(&self, n: usize) -> ContinuedFraction {
        let qs = (1..=n).map_while(|k| self.quotient(k)).collect();
        ContinuedFraction::new(self.a0.clone(), qs).expect("validated quotients")
    }

    /// Expansion extended until the convergent heights exceed `h`, plus
    /// `extra` further levels when known.
    pub fn expansion_beyond(&self, h: &Integer, extra: usize) -> ContinuedFraction {
        let mut cf = ContinuedFraction::new(self.a0.clone(), Vec::new()).expect("valid");
        let mut k = 1;
        let mut past = 0;
        while past <= extra {
            let Some(a) = self.quotient(k) else { break };
            cf.push(a).expect("validated quotients");
            let (p, q) = cf.convergents.last().expect("nonempty");
            if p.max(q) > h {
                past += 1;
            }
            k += 1;
        }
        cf
    }

    /// Maps frame coordinates `(q, p)` to an actual lattice vector.
    pub fn to_vector(&self, q: &Integer, p: &Integer) -> Option<Vector> {
        let (x, y) = (q.to_i64()?, p.to_i64()?);
        let (x, y) = if self.swap { (y, x) } else { (x, y) };
        Some(if self.negate { (x, -y) } else { (x, y) })
    }

    pub fn is_irrational(&self) -> bool {
        !self.rational
    }

    /// Enclosure of the line angle in `[0, pi)` from the first `n` quotients.
    pub fn angle(&self, n: usize, bits: u32) -> Interval {
        let cf = self.expansion(n);
        let (lo, hi) = alpha_bounds(&cf, self.rational);
        let to_angle = |a: &Rational, r: Round| {
            let mut x = Float::with_val_round(bits, a, r).0;
            x.atan_round(r);
            x
        };
        let mut t = Interval {
            lo: to_angle(&lo, Round::Down),
            hi: to_angle(&hi, Round::Up),
        };
        let pi_lo = Float::with_val_round(bits, Constant::Pi, Round::Down).0;
        let pi_hi = Float::with_val_round(bits, Constant::Pi, Round::Up).0;
        if self.swap {
            t = sub_from(&t, &pi_lo, &pi_hi, 2);
        }
        if self.negate {
            t = sub_from(&t, &pi_lo, &pi_hi, 1);
        }
        t
    }
}

/// `pi / k - t` for an interval `t`, outward rounded.
fn sub_from(t: &Interval, pi_lo: &Float, pi_hi: &Float, k: u32) -> Interval {
    let p = t.prec();
    Interval {
        lo: Float::with_val_round(
            p,
            Float::with_val_round(p, pi_lo / k, Round::Down).0 - &t.hi,
            Round::Down,
        )
        .0,
        hi: Float::with_val_round(p, Float::with_val_round(p, pi_hi / k, Round::Up).0 - &t.lo, Round::Up).0,
    }
}

/// `t - pi / k`, outward rounded.
fn minus_pi_over(t: &Interval, pi_lo: &Float, pi_hi: &Float, k: u32) -> Interval {
    let p = t.prec();
    Interval {
        lo: Float::with_val_round(p, &t.lo - Float::with_val_round(p, pi_hi / k, Round::Up).0, Round::Down).0,
        hi: Float::with_val_round(p, &t.hi - Float::with_val_round(p, pi_lo / k, Round::Down).0, Round::Up).0,
    }
}

/// Quotients shared by every number in `[lo, hi]`.
fn cf_digits(mut lo: Rational, mut hi: Rational) -> (Option<Integer>, Vec<Integer>) {
    let mut digits: Vec<Integer> = Vec::new();
    loop {
        let a = Integer::from(lo.floor_ref());
        let b = Integer::from(hi.floor_ref());
        if a != b || digits.len() > 4096 {
            break;
        }
        lo -= &a;
        hi -= &a;
        digits.push(a);
        if lo == 0 {
            break;
        }
        // x -> 1/x reverses the order.
        let (nlo, nhi) = (hi.recip(), lo.recip());
        lo = nlo;
        hi = nhi;
    }
    if digits.is_empty() {
        return (None, digits);
    }
    let a0 = digits.remove(0);
    (Some(a0), digits)
}

/// Rational bounds for `alpha` from a prefix.
fn alpha_bounds(cf: &ContinuedFraction, rational: bool) -> (Rational, Rational) {
    let n = cf.convergents.len() - 1;
    let (p, q) = &cf.convergents[n];
    let a = Rational::from((p.clone(), q.clone()));
    if rational {
        return (a.clone(), a);
    }
    let (pp, qp) = if n >= 1 {
        cf.convergents[n - 1].clone()
    } else {
        (Integer::from(1), Integer::new())
    };
    if qp == 0 {
        // Only [a0] is known: alpha lies in (a0, a0 + 1).
        let b = Rational::from(p + Integer::from(1));
        return (a, b);
    }
    let b = Rational::from((Integer::from(p + &pp), Integer::from(q + &qp)));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Acute angle between the lines through `(q, p)` and `(b, a)`, from the
/// exact rational `tan`.
fn line_distance(q: &Integer, p: &Integer, b: &Integer, a: &Integer, bits: u32) -> Float {
    let det = Integer::from(q * a) - Integer::from(p * b);
    let dot = Integer::from(q * b) + Integer::from(p * a);
    let t = Rational::from((det.abs(), dot));
    Float::with_val(bits, &t).atan()
}

/// One candidate of the approximation exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaWitness {
    /// Lattice vector of the convergent.
    pub p: i64,
    pub q: i64,
    pub height: u64,
    /// Upper bound for the distance to the target.
    pub distance: f64,
    /// `log(1 / distance) / height`, a lower bound.
    pub score: f64,
    /// Score from the lower distance bound; infinite when the target is
    /// not separated from the convergent.
    pub score_upper: f64,
}

/// Windowed estimate of the approximation exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    pub h: u64,
    /// Largest certified score over convergents with height in `[H/2, H]`.
    pub value: f64,
    pub value_upper: f64,
    /// Sorted by height.
    pub witnesses: Vec<OmegaWitness>,
}

impl OmegaEstimate {
    /// The witness attaining [`Self::value`].
    pub fn best(&self) -> Option<&OmegaWitness> {
        self.witnesses
            .iter()
            .max_by(|a, b| a.score.total_cmp(&b.score).then(b.height.cmp(&a.height)))
    }
}

/// `max log(1/d(w, beta)) / height(w)` over convergents `w` of `beta` with
/// height in `[H/2, H]`; zero when the window holds none.
pub fn omega_hat(beta: &DirectionTarget, h: u64) -> Result<OmegaEstimate> {
    if beta.rational {
        return Err(Error::RationalTarget);
    }
    if h < 4 {
        return Err(Error::InvalidInput(format!("window height {h} must be at least 4")));
    }
    // Deepen the enclosure of the target while more quotients are known
    // and the score bounds still differ.
    let mut extra = 4;
    let mut known = 0;
    loop {
        let cf = beta.expansion_beyond(&Integer::from(h), extra);
        let n = cf.quotients.len();
        let est = omega_from(beta, h, &cf);
        if est.value_upper - est.value <= SCORE_TOLERANCE || n == known {
            return Ok(est);
        }
        known = n;
        extra *= 2;
    }
}

fn omega_from(beta: &DirectionTarget, h: u64, cf: &ContinuedFraction) -> OmegaEstimate {
    let (lo, hi) = alpha_bounds(cf, false);
    let ends = [
        (Integer::from(lo.denom()), Integer::from(lo.numer())),
        (Integer::from(hi.denom()), Integer::from(hi.numer())),
    ];
    let n = cf.convergents.len() - 1;
    let mut witnesses = Vec::new();
    for (j, (p, q)) in cf.convergents.iter().enumerate() {
        let height = p.clone().max(q.clone());
        if height > h || Integer::from(&height * 2u32) < h {
            continue;
        }
        let height = height.to_u64().expect("bounded by h");
        let (d_lo, d_hi) = if j < n {
            let d: Vec<Float> = ends
                .iter()
                .map(|(b, a)| line_distance(q, p, b, a, DISTANCE_BITS))
                .collect();
            let (a, b) = (&d[0], &d[1]);
            if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            }
        } else {
            // Last known convergent: the target lies strictly inside the
            // Farey interval towards the mediant with its predecessor.
            let (pp, qp) = if j >= 1 {
                cf.convergents[j - 1].clone()
            } else {
                (Integer::from(1), Integer::new())
            };
            let d = line_distance(q, p, &Integer::from(q + &qp), &Integer::from(p + &pp), DISTANCE_BITS);
            (Float::with_val(DISTANCE_BITS, 0), d)
        };
        let score = |d: &Float| {
            if d.is_zero() {
                f64::INFINITY
            } else {
                (Float::with_val(DISTANCE_BITS, d.recip_ref()).ln() / height as f64).to_f64()
            }
        };
        let v = beta.to_vector(q, p).expect("bounded by h");
        witnesses.push(OmegaWitness {
            p: v.0,
            q: v.1,
            height,
            distance: d_hi.to_f64(),
            score: score(&d_hi).max(0.0),
            score_upper: score(&d_lo).max(0.0),
        });
    }
    let value = witnesses.iter().map(|w| w.score).fold(0.0, f64::max);
    let value_upper = witnesses.iter().map(|w| w.score_upper).fold(0.0, f64::max);
    OmegaEstimate {
        h,
        value,
        value_upper,
        witnesses,
    }
}

/// Fractions of random directions with `omega_hat > eps`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub h: u64,
    pub samples: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
    pub counts: Vec<usize>,
    pub fractions: Vec<f64>,
}

/// Angles drawn uniformly from `[0, pi)`, one ChaCha stream per block.
pub fn sample_angles(samples: usize, seed: u64) -> Vec<f64> {
    let blocks = samples.div_ceil(MONTE_CARLO_BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let n = MONTE_CARLO_BLOCK.min(samples - b * MONTE_CARLO_BLOCK);
            (0..n).map(move |_| rng.random::<f64>() * PI).collect::<Vec<_>>()
        })
        .collect()
}

/// Empirical fraction of uniformly random directions whose windowed
/// exponent at `h` exceeds each of [`MONTE_CARLO_EPSILONS`].
pub fn monte_carlo_omega(samples: usize, h: u64, seed: u64) -> Result<MonteCarloResult> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let angles = sample_angles(samples, seed);
    let values: Vec<f64> = angles
        .par_iter()
        .map(|&t| {
            let theta = Rational::from_f64(t).expect("finite angle");
            match DirectionTarget::from_angle(&theta, DISTANCE_BITS) {
                Ok(beta) => omega_hat(&beta, h).map(|o| o.value),
                // Only the exact angle 0 is rational; it has no finite value
                // and is counted above every threshold.
                Err(Error::InvalidInput(_)) if t == 0.0 => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let counts: Vec<usize> = MONTE_CARLO_EPSILONS
        .iter()
        .map(|&e| values.iter().filter(|&&v| v > e).count())
        .collect();
    Ok(MonteCarloResult {
        h,
        samples,
        seed,
        epsilons: MONTE_CARLO_EPSILONS.to_vec(),
        fractions: counts.iter().map(|&c| c as f64 / samples as f64).collect(),
        counts,
    })
}

/// One convergent of a flatness profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub j: usize,
    pub p: i64,
    pub q: i64,
    pub height: u64,
    /// Tangential coordinate of the boundary point over the convergent.
    pub x: f64,
    /// Its distance above the supporting line at the target.
    pub f: f64,
    /// `ln f`, which stays finite where `f` underflows.
    pub ln_f: f64,
    /// `log f / log |x|`.
    pub order: f64,
    /// Probe column `1.5 x`, on the far side of the convergent.
    pub probe_t: f64,
    /// Certified lower bound for the graph height at the probe, from the
    /// one-sided supporting line at the convergent facing away.
    pub probe_f: f64,
    /// `log probe_f / log |probe_t|`, an upper bound for the order there.
    pub probe_order: f64,
    /// The successor of this convergent was constructed.
    pub constructed: bool,
}

/// Graph-coordinate profile of the boundary around a direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessProfile {
    pub rows: Vec<ProfileRow>,
    pub reference_index: usize,
    pub reference_height: u64,
    /// Shallower reference used for the stability check.
    pub comparison_index: Option<usize>,
    /// Largest relative change of `f` or `probe_f` under that reference.
    pub reference_shift: Option<f64>,
    pub precision_bits: u32,
}

#[derive(Clone)]
struct RawRow {
    x: Float,
    f: Float,
    t: Float,
    ft: Float,
}

impl Agree for RawRow {
    fn discrepancy(&self, o: &Self) -> f64 {
        [(&self.x, &o.x), (&self.f, &o.f), (&self.ft, &o.ft)]
            .iter()
            .map(|(a, b)| (*a).discrepancy(*b))
            .fold(0.0, f64::max)
    }
}

/// Oriented convergent vectors `c_0, ..., c_n` that fit in `i64`.
fn convergent_vectors(beta: &DirectionTarget, cf: &ContinuedFraction) -> Vec<Vector> {
    cf.convergents.iter().map_while(|(p, q)| beta.to_vector(q, p)).collect()
}

fn height(v: Vector) -> u64 {
    v.0.unsigned_abs().max(v.1.unsigned_abs())
}

/// Profile rows in graph coordinates centred at the boundary point over
/// `c_origin`, with the supporting line taken from `c_line`.
fn profile_at(
    ctx: &SurfaceContext,
    cs: &[Vector],
    rows: usize,
    line: usize,
    origin: usize,
    bits: u32,
) -> Result<Vec<RawRow>> {
    // c_k + c_{k-1} is a Farey neighbour of c_k on the side of the target.
    let side = add(cs[line], cs[line - 1]);
    let ell = support_functional_at(ctx, cs[line], side, bits)?;
    let origin = boundary_point_at(ctx, cs[origin], bits);
    let norm = ell.norm();
    // Inward unit normal and a unit tangent.
    let n = [
        Float::with_val(bits, -&ell.coords[0]) / &norm,
        Float::with_val(bits, -&ell.coords[1]) / &norm,
    ];
    let tan = [Float::with_val(bits, -&n[1]), n[0].clone()];
    let dot =
        |a: &[Float; 2], b: &[Float; 2]| Float::with_val(bits, &a[0] * &b[0]) + Float::with_val(bits, &a[1] * &b[1]);
    let apply = |l: &SupportFunctional, a: &[Float; 2]| l.eval_point(&a[0], &a[1]);
    let one = Float::with_val(bits, 1);
    (0..rows)
        .into_par_iter()
        .map(|j| {
            let p = boundary_point_at(ctx, cs[j], bits);
            let rel = [
                Float::with_val(bits, &p[0] - &origin[0]),
                Float::with_val(bits, &p[1] - &origin[1]),
            ];
            let x = dot(&rel, &tan);
            let f = Float::with_val(bits, &one - apply(&ell, &p)) / &norm;
            // Away from the target: det(c_j, -c_{j+1}) has the opposite sign.
            let away = (-cs[j + 1].0, -cs[j + 1].1);
            let mu = support_functional_at(ctx, cs[j], away, bits)?;
            let t = Float::with_val(bits, &x * 3u32) / 2u32;
            let mu0 = apply(&mu, &origin);
            let mut_ = apply(&mu, &tan);
            let mun = apply(&mu, &n);
            let ft = (Float::with_val(bits, &one - &mu0) - Float::with_val(bits, &t * &mut_)) / mun;
            Ok(RawRow { x, f, t, ft })
        })
        .collect()
}

/// Graph profile of the boundary at the direction `beta` over its first
/// `depth + 1` convergents.
///
/// The supporting line at the target is the one-sided functional at a much
/// deeper convergent facing the target, and the boundary point over that
/// convergent stands in for the point over the target. A shallower line
/// checks that the line has settled.
pub fn flatness_profile(ctx: &SurfaceContext, beta: &DirectionTarget, depth: usize) -> Result<FlatnessProfile> {
    if beta.rational {
        return Err(Error::RationalTarget);
    }
    let cf = beta.expansion(depth + REFERENCE_EXTRA_DEPTH + 1);
    let cs = convergent_vectors(beta, &cf);
    let mut k = (depth + REFERENCE_EXTRA_DEPTH).min(cs.len().saturating_sub(1));
    while k > 0 && height(cs[k]) > REFERENCE_HEIGHT_BUDGET {
        k -= 1;
    }
    let rows = (depth + 1).min(k);
    if rows == 0 {
        return Err(Error::InvalidInput(format!(
            "{} has too few usable convergents",
            beta.label
        )));
    }
    let what = format!("flatness profile of {}", beta.label);
    let (raw, bits) = refine(ctx.policy(), &what, |b| profile_at(ctx, &cs, rows, k, k, b))?;
    let cmp = {
        let c = (depth + REFERENCE_EXTRA_DEPTH / 2).min(k.saturating_sub(1));
        (c >= rows && c < k).then_some(c)
    };
    let reference_shift = match cmp {
        Some(c) => {
            let other = profile_at(ctx, &cs, rows, c, k, bits)?;
            let shift = raw
                .iter()
                .zip(&other)
                .map(|(a, b)| a.f.discrepancy(&b.f).max(a.ft.discrepancy(&b.ft)))
                .fold(0.0, f64::max);
            if shift > SUPPORT_STABILITY_TOLERANCE {
                return Err(Error::SupportUnstable { change: shift });
            }
            Some(shift)
        }
        None => None,
    };
    let order = |f: &Float, x: &Float| {
        let lf = Float::with_val(bits, f.ln_ref());
        let lx = Float::with_val(bits, x.clone().abs().ln());
        (lf / lx).to_f64()
    };
    let out = raw
        .iter()
        .enumerate()
        .map(|(j, r)| ProfileRow {
            j,
            p: cs[j].0,
            q: cs[j].1,
            height: height(cs[j]),
            x: r.x.to_f64(),
            f: r.f.to_f64(),
            ln_f: Float::with_val(bits, r.f.ln_ref()).to_f64(),
            order: order(&r.f, &r.x),
            probe_t: r.t.to_f64(),
            probe_f: r.ft.to_f64(),
            probe_order: order(&r.ft, &r.t),
            constructed: beta.constructed_from.is_some_and(|s| j >= s),
        })
        .collect();
    Ok(FlatnessProfile {
        rows: out,
        reference_index: k,
        reference_height: height(cs[k]),
        comparison_index: cmp,
        reference_shift,
        precision_bits: bits,
    })
}

/// Orders convergent rows by `j`; used to check monotone orders.
pub fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0].partial_cmp(&w[1]) == Some(Ordering::Less))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::markoff::{make_surface, SurfaceSpec};
    use crate::precision::PrecisionPolicy;

    fn modular() -> SurfaceContext {
        make_surface(&SurfaceSpec::Modular, PrecisionPolicy::default()).unwrap()
    }

    fn ints(xs: &[Integer]) -> Vec<u64> {
        xs.iter().map(|x| x.to_u64().unwrap()).collect()
    }

    /// Folds `[a0; a1, ..., an]` back into a fraction.
    fn evaluate(a0: u64, qs: &[u64]) -> Rational {
        let mut x: Option<Rational> = None;
        for &a in qs.iter().rev() {
            let v = Rational::from(a) + x.map_or(Rational::new(), |x| x.recip());
            x = Some(v);
        }
        Rational::from(a0) + x.map_or(Rational::new(), |x| x.recip())
    }

    /// Line distance from `(q, p)` to `(1, alpha)` in plain floating point.
    fn naive_distance(q: f64, p: f64, alpha: f64) -> f64 {
        ((q * alpha - p).abs() / (q + p * alpha)).atan()
    }

    fn fib(n: usize) -> Vec<u64> {
        let mut f = vec![1u64, 1];
        while f.len() < n {
            let k = f.len();
            f.push(f[k - 1] + f[k - 2]);
        }
        f
    }

    #[test]
    fn rational_expansions() {
        let cf = |p: u32, q: u32| cf_of_rational(&Integer::from(p), &Integer::from(q)).unwrap();
        let c = cf(3, 2);
        assert_eq!((c.a0.to_u64(), ints(&c.quotients)), (Some(1), vec![2]));
        let c = cf(7, 5);
        assert_eq!((c.a0.to_u64(), ints(&c.quotients)), (Some(1), vec![2, 2]));
        let c = cf(1, 1);
        assert_eq!((c.a0.to_u64(), ints(&c.quotients)), (Some(1), vec![]));
        assert!(cf_of_rational(&Integer::from(2), &Integer::from(4)).is_err());
        assert!(cf_of_rational(&Integer::from(1), &Integer::new()).is_err());
    }

    proptest! {
        #[test]
        fn expansion_round_trips(p in 0u32..100_000, q in 1u32..100_000) {
            let g = Integer::from(p).gcd(&Integer::from(q));
            let (p, q) = (Integer::from(p) / &g, Integer::from(q) / &g);
            let cf = cf_of_rational(&p, &q).unwrap();
            if let Some(last) = cf.quotients.last() {
                prop_assert!(*last >= 2);
            }
            let v = evaluate(cf.a0.to_u64().unwrap(), &ints(&cf.quotients));
            prop_assert_eq!(v, Rational::from((p.clone(), q.clone())));
            let (cp, cq) = cf.convergents.last().unwrap();
            prop_assert_eq!((cp, cq), (&p, &q));
        }

        #[test]
        fn convergent_recurrence(a0 in 0u64..5, qs in proptest::collection::vec(1u64..50, 0..12)) {
            let cf = ContinuedFraction::from_u64(a0, &qs).unwrap();
            let c = &cf.convergents;
            prop_assert_eq!(c.len(), qs.len() + 1);
            prop_assert_eq!(&c[0].1, &Integer::from(1));
            for j in 0..c.len() {
                let (p, q) = &c[j];
                prop_assert_eq!(Integer::from(p.gcd_ref(q)), Integer::from(1));
                prop_assert_eq!(Rational::from((p.clone(), q.clone())), evaluate(a0, &qs[..j]));
                if j + 1 < c.len() {
                    let (p1, q1) = &c[j + 1];
                    let qm = if j == 0 { Integer::new() } else { c[j - 1].1.clone() };
                    prop_assert_eq!(q1.clone(), Integer::from(qs[j]) * q + qm);
                    let det = Integer::from(p * q1) - Integer::from(p1 * q);
                    prop_assert_eq!(det.abs(), Integer::from(1));
                }
            }
        }
    }

    #[test]
    fn zero_quotients_are_rejected() {
        assert!(ContinuedFraction::from_u64(0, &[1, 0, 2]).is_err());
    }

    /// `ln s_next >= A s_j`, checked with a downward-rounded logarithm.
    fn certified_by_log(c: &LevelCertificate) -> bool {
        let mut l = Float::with_val_round(4096, &c.s_next, Round::Down).0;
        l.ln_round(Round::Down);
        let target = Float::with_val_round(4096, Rational::from(&c.rate * &c.s_j), Round::Up).0;
        l >= target
    }

    #[test]
    fn construct_fixed_rate() {
        let pre = ContinuedFraction::from_u64(0, &[1]).unwrap();
        let c = construct_nonflat(&Rate::Fixed(Rational::from(1)), 3, &pre).unwrap();
        assert_eq!(c.prefix_len, 1);
        let qs = ints(&c.cf.quotients);
        assert_eq!(&qs[..3], &[1, 2, 7]);
        // b4 = ceil((e^22 - 3) / 22) from a 30-digit value of e^22.
        let e22 = Rational::from_str_radix("3584912846131591561681159945978", 10).unwrap()
            / Rational::from(Integer::from(Integer::u_pow_u(10, 21)));
        let b4 = Integer::from((Rational::from(&e22 - 3u32) / 22u32).ceil_ref());
        assert_eq!(c.cf.quotients[3], b4);
        let s = ints(&c.cf.denominators());
        assert_eq!(&s[..4], &[1, 1, 3, 22]);
        assert!(s[4] as f64 >= 3.5849e9);
        for cert in &c.certificates {
            assert!(cert.s_next >= cert.exp_upper);
            assert!(certified_by_log(cert), "{cert:?}");
            assert!(cert.quotient >= 1);
        }
        // Minimality: one less in the last quotient misses the bound.
        let last = c.certificates.last().unwrap();
        let smaller = Integer::from(&last.s_next - &last.s_j);
        let mut l = Float::with_val(4096, &smaller);
        l.ln_round(Round::Up);
        assert!(l < 22);
    }

    #[test]
    fn construct_growing_rate() {
        let pre = ContinuedFraction::from_u64(0, &[1]).unwrap();
        let c = construct_nonflat(&Rate::Growing, 2, &pre).unwrap();
        let rates: Vec<_> = c.certificates.iter().map(|c| (c.j, c.rate.clone())).collect();
        assert_eq!(rates, vec![(1, Rational::from(1)), (2, Rational::from(2))]);
        assert_eq!(ints(&c.cf.quotients), vec![1, 2, 135]);
        assert!(c.certificates.iter().all(certified_by_log));
        // e^{3 * 406} needs about 1757 bits.
        let c3 = construct_nonflat(&Rate::Growing, 3, &pre).unwrap();
        assert!(c3.certificates.iter().all(certified_by_log));
        assert!(c3.cf.convergents[4].1.significant_bits() > 1700);
    }

    #[test]
    fn construct_errors() {
        let pre = ContinuedFraction::from_u64(0, &[1]).unwrap();
        assert!(matches!(
            construct_nonflat(&Rate::Fixed(Rational::from(1)), 0, &pre),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            construct_nonflat(&Rate::Fixed(Rational::new()), 1, &pre),
            Err(Error::InvalidInput(_))
        ));
        // The fourth Growing level needs e^{4 q_4} with q_4 of 1760 bits.
        assert!(matches!(
            construct_nonflat(&Rate::Growing, 4, &pre),
            Err(Error::OverflowBudget { .. })
        ));
        assert!(matches!(
            construct_nonflat_with_budget(&Rate::Fixed(Rational::from(1)), 3, &pre, 64),
            Err(Error::OverflowBudget { .. })
        ));
    }

    /// Independent windowed exponent of `(1, phi)` from Fibonacci pairs.
    fn golden_oracle(h: u64) -> f64 {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        fib(40)
            .windows(2)
            .filter(|w| w[1] <= h && 2 * w[1] >= h)
            .map(|w| (1.0 / naive_distance(w[0] as f64, w[1] as f64, phi)).ln() / w[1] as f64)
            .fold(0.0, f64::max)
    }

    #[test]
    fn golden_exponent() {
        for h in [10, 20, 50, 100, 200, 1000, 10_000] {
            let o = omega_hat(&DirectionTarget::golden(), h).unwrap();
            let oracle = golden_oracle(h);
            assert!((o.value - oracle).abs() < 1e-9, "H={h}: {} vs {oracle}", o.value);
            assert!(o.value <= o.value_upper && o.value_upper - o.value < 1e-9);
        }
        let o = omega_hat(&DirectionTarget::golden(), 100).unwrap();
        let best = o.best().unwrap();
        assert_eq!((best.p, best.q), (34, 55));
        assert!((o.value - 0.16624).abs() < 1e-4);
    }

    #[test]
    fn finite_type_exponents_decay() {
        for beta in [DirectionTarget::golden(), DirectionTarget::silver()] {
            // Silver heights grow by 1 + sqrt 2 > 2, so some windows are empty.
            let values: Vec<f64> = (0..7)
                .map(|k| omega_hat(&beta, 50 << k).unwrap().value)
                .filter(|&v| v > 0.0)
                .collect();
            assert!(values.len() >= 6, "{}", beta.label);
            assert!(values.windows(2).all(|w| w[1] < w[0]), "{}: {values:?}", beta.label);
            assert!(*values.last().unwrap() < 0.01);
        }
    }

    #[test]
    fn constructed_exponent() {
        let pre = ContinuedFraction::from_u64(0, &[1]).unwrap();
        let c = construct_nonflat(&Rate::Fixed(Rational::from(1)), 3, &pre).unwrap();
        let beta = DirectionTarget::constructed("a1", &c);
        let o = omega_hat(&beta, 22).unwrap();
        assert!(o.value >= 0.9, "{o:?}");
        let best = o.best().unwrap();
        assert_eq!((best.p, best.q), (22, 15));
        // Oracle: alpha from the known quotients in floating point.
        let alpha = evaluate(0, &ints(&c.cf.quotients)).to_f64();
        let naive = (1.0 / naive_distance(22.0, 15.0, alpha)).ln() / 22.0;
        assert!((o.value - naive).abs() < 1e-6, "{} vs {naive}", o.value);
    }

    #[test]
    fn exponent_errors() {
        assert!(matches!(
            omega_hat(&DirectionTarget::rational(3, 2).unwrap(), 10),
            Err(Error::RationalTarget)
        ));
        assert!(matches!(
            omega_hat(&DirectionTarget::golden(), 3),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn rational_frames() {
        for (p, q) in [(3, 2), (2, 3), (-2, 3), (3, -2), (1, 0), (0, 1), (-5, -7)] {
            let t = DirectionTarget::rational(p, q).unwrap();
            let cf = t.expansion(64);
            let (a, b) = cf.convergents.last().unwrap();
            let v = t.to_vector(b, a).unwrap();
            assert!(v == (p, q) || v == (-p, -q), "{p},{q} -> {v:?}");
        }
    }

    #[test]
    fn angles_enclose() {
        for k in 0..40 {
            let theta = 0.0123 + k as f64 * 0.0785;
            let t = DirectionTarget::from_angle(&Rational::from_f64(theta).unwrap(), 256).unwrap();
            let iv = t.angle(20, 128);
            assert!(
                iv.lo.to_f64() <= theta + 1e-15 && theta - 1e-15 <= iv.hi.to_f64(),
                "{theta}: {iv:?}"
            );
            assert!(iv.hi.to_f64() - iv.lo.to_f64() < 1e-6);
        }
        let g = DirectionTarget::golden().angle(30, 128);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((g.mid().to_f64() - phi.atan()).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn exponent_is_nonnegative(theta in 0.001f64..3.0, h in 4u64..400) {
            let t = DirectionTarget::from_angle(&Rational::from_f64(theta).unwrap(), 256).unwrap();
            let o = omega_hat(&t, h).unwrap();
            prop_assert!(o.value >= 0.0);
            prop_assert!(o.value <= o.value_upper);
            for w in &o.witnesses {
                prop_assert!(w.height <= h && 2 * w.height >= h);
                // Cross-check the distance with plain floating point.
                let d = ((w.p as f64) * theta.sin() - (w.q as f64) * theta.cos()).abs()
                    / ((w.p as f64).hypot(w.q as f64));
                let d = d.asin();
                prop_assert!((d - w.distance).abs() <= 1e-9 + 1e-6 * d, "{} vs {}", d, w.distance);
            }
        }
    }

    #[test]
    fn monte_carlo_properties() {
        let a = monte_carlo_omega(300, 30, 11).unwrap();
        let b = monte_carlo_omega(300, 30, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.fractions[0] <= a.fractions[1] && a.fractions[1] <= a.fractions[2]);
        let c = monte_carlo_omega(300, 30, 12).unwrap();
        assert_ne!(a.counts, c.counts);
        let angles = sample_angles(200, 5);
        assert_eq!(angles.len(), 200);
        assert!(angles.iter().all(|t| (0.0..PI).contains(t)));
        assert_eq!(&sample_angles(100, 5)[..], &angles[..100]);
        assert!(monte_carlo_omega(0, 30, 1).is_err());
    }

    #[test]
    fn golden_profile() {
        let p = flatness_profile(&modular(), &DirectionTarget::golden(), 8).unwrap();
        assert_eq!(p.rows.len(), 9);
        assert_eq!(p.reference_index, 28);
        assert!(p.reference_shift.unwrap() < SUPPORT_STABILITY_TOLERANCE);
        let orders: Vec<f64> = p.rows.iter().map(|r| r.order).collect();
        assert!(strictly_increasing(&orders), "{orders:?}");
        let xs: Vec<f64> = p.rows.iter().map(|r| r.x.abs()).collect();
        assert!(xs.windows(2).all(|w| w[1] < w[0]));
        assert!(xs[8] < 1e-4);
        for (j, r) in p.rows.iter().enumerate() {
            assert!(r.f > 0.0 && r.probe_f > 0.0);
            // Successive convergents sit on opposite sides of the target.
            if j > 0 {
                assert!(r.x * p.rows[j - 1].x < 0.0);
            }
            let fib = fib(12);
            assert_eq!((r.p, r.q), (fib[j] as i64, fib[j + 1] as i64));
            assert!(!r.constructed);
            assert!((r.ln_f - r.f.ln()).abs() < 1e-9 * r.ln_f.abs());
        }
    }

    #[test]
    fn growing_profile_is_not_flat() {
        let pre = ContinuedFraction::from_u64(0, &[1]).unwrap();
        let c = construct_nonflat(&Rate::Growing, 2, &pre).unwrap();
        let beta = DirectionTarget::constructed("n-infinity", &c);
        let p = flatness_profile(&modular(), &beta, 8).unwrap();
        assert_eq!(p.reference_index, 3);
        let constructed: Vec<_> = p.rows.iter().filter(|r| r.constructed).collect();
        assert_eq!(constructed.len(), 2);
        for r in constructed {
            assert!(r.probe_order <= 2.5, "{r:?}");
            assert!(r.probe_f > 0.0);
        }
    }

    #[test]
    fn profile_errors() {
        let ctx = modular();
        assert!(matches!(
            flatness_profile(&ctx, &DirectionTarget::rational(3, 2).unwrap(), 4),
            Err(Error::RationalTarget)
        ));
    }
}
