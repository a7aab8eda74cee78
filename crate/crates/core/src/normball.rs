//! The unit ball of the stable norm: boundary points, one-sided supporting
//! functionals, corner atoms, per-gap normal turn and polygon sandwiches.
//!
//! Lengths come from traces via `L = 2 arccosh(x / 2)`. With
//! `r = e^{L_u / 2}` and Farey neighbours `u, v`, the one-sided functional
//! at `u` selecting the side of `v` takes the value `L_u` on `u` and
//! `2 log A` on `v`, where `A = (x_{u+v} - x_v / r) / (r - 1 / r)`.

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey::{
    add, class_of, det, enumerate_classes, farey_neighbor_vector, gap_endpoints, height_angle_cmp, neg, GapTable,
    PrimitiveClass, Vector,
};
use crate::markoff::SurfaceContext;
use crate::precision::{pi, refine, Agree};

/// Extra bits carried by traces feeding a computation at a given precision.
const GUARD_BITS: u32 = 32;

/// Hyperbolic length of a simple closed geodesic.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthValue {
    pub value: Float,
    pub precision_bits: u32,
}

impl LengthValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

impl Agree for LengthValue {
    fn discrepancy(&self, other: &Self) -> f64 {
        self.value.discrepancy(&other.value)
    }
}

/// A linear functional in standard dual coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportFunctional {
    pub coords: [Float; 2],
    /// Oriented base vector where the functional attains the norm.
    pub base: Vector,
    /// Oriented neighbour selecting the side.
    pub side: Vector,
    pub value_at_base: LengthValue,
    /// Value at `side`.
    pub value_at_side: Float,
}

impl SupportFunctional {
    pub fn base_class(&self) -> PrimitiveClass {
        class_of(self.base)
    }

    pub fn side_class(&self) -> PrimitiveClass {
        class_of(self.side)
    }

    pub fn eval(&self, y: Vector) -> Float {
        let p = self.coords[0].prec();
        Float::with_val(p, &self.coords[0] * y.0) + Float::with_val(p, &self.coords[1] * y.1)
    }

    pub fn eval_point(&self, x: &Float, y: &Float) -> Float {
        let p = self.coords[0].prec();
        Float::with_val(p, &self.coords[0] * x) + Float::with_val(p, &self.coords[1] * y)
    }

    pub fn norm(&self) -> Float {
        let p = self.coords[0].prec();
        Float::with_val(p, self.coords[0].hypot_ref(&self.coords[1]))
    }

    pub fn coords_f64(&self) -> [f64; 2] {
        [self.coords[0].to_f64(), self.coords[1].to_f64()]
    }
}

impl Agree for SupportFunctional {
    fn discrepancy(&self, other: &Self) -> f64 {
        let n = self.norm();
        let p = n.prec();
        let d0 = Float::with_val(p, &self.coords[0] - &other.coords[0]);
        let d1 = Float::with_val(p, &self.coords[1] - &other.coords[1]);
        Float::with_val(p, d0.hypot(&d1) / n).to_f64()
    }
}

/// Intermediate quantities of the corner computation at `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSolve {
    /// `e^{L/2}`.
    pub r: Float,
    /// Trace of `w + u`.
    pub z_plus: Float,
    /// Trace of `w - u`.
    pub z_minus: Float,
    pub a_plus: Float,
    pub a_minus: Float,
}

/// The exterior angle of the ball at a rational direction.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomRecord {
    pub class: PrimitiveClass,
    pub atom: Float,
    pub lambda_plus: SupportFunctional,
    pub lambda_minus: SupportFunctional,
    pub solve: SupportSolve,
    /// `|A+ A- / coth^2(L/2) - 1|`.
    pub coth_residual: Float,
    pub precision_bits: u32,
}

impl Agree for AtomRecord {
    fn discrepancy(&self, other: &Self) -> f64 {
        self.atom.discrepancy(&other.atom)
    }
}

/// A height-H Farey gap with its endpoint functionals and normal turn.
#[derive(Clone, Debug, PartialEq)]
pub struct GapRecord {
    pub u: Vector,
    pub v: Vector,
    pub mediant: PrimitiveClass,
    pub lam_uv: SupportFunctional,
    pub lam_vu: SupportFunctional,
    /// Normal turn over the positive arc of the gap.
    pub turn: Float,
    pub endpoint_defect: Float,
    pub precision_bits: u32,
}

impl Agree for GapRecord {
    fn discrepancy(&self, other: &Self) -> f64 {
        self.turn
            .discrepancy(&other.turn)
            .max(self.endpoint_defect.discrepancy(&other.endpoint_defect))
    }
}

/// Tail turn of the boundary beyond height `H`, computed two ways.
#[derive(Clone, Debug, PartialEq)]
pub struct TailTurn {
    pub h: u64,
    /// `2 pi - 2 * sum of atoms over classes of height <= H`.
    pub from_atoms: Float,
    /// `2 * sum of gap turns over height-H gaps`.
    pub from_gaps: Float,
    pub discrepancy: Float,
    pub precision_bits: u32,
}

impl Agree for TailTurn {
    fn discrepancy(&self, other: &Self) -> f64 {
        self.from_atoms
            .discrepancy(&other.from_atoms)
            .max(self.from_gaps.discrepancy(&other.from_gaps))
    }
}

fn trace_float(ctx: &SurfaceContext, w: Vector, bits: u32) -> Float {
    let iv = ctx.trace_interval(w, bits + GUARD_BITS);
    Float::with_val(bits, iv.mid())
}

/// `e^{L/2}` from the trace `x = 2 cosh(L/2)`.
fn half_exp(x: &Float) -> Float {
    let p = x.prec();
    let disc = Float::with_val(p, x.square_ref()) - 4u32;
    (Float::with_val(p, x + disc.sqrt())) / 2u32
}

fn length_at(ctx: &SurfaceContext, w: Vector, bits: u32) -> Float {
    let r = half_exp(&trace_float(ctx, w, bits));
    r.ln() * 2u32
}

/// Length of the geodesic in class `w`.
pub fn length(ctx: &SurfaceContext, w: &PrimitiveClass) -> Result<LengthValue> {
    let what = format!("length of {w}");
    let (v, bits) = refine(ctx.policy(), &what, |b| {
        Ok(LengthValue {
            value: length_at(ctx, w.vector(), b),
            precision_bits: b,
        })
    })?;
    Ok(LengthValue {
        precision_bits: bits,
        ..v
    })
}

/// The boundary point `w / L(w)` of the unit ball.
pub fn boundary_point(ctx: &SurfaceContext, w: Vector) -> Result<[Float; 2]> {
    let c = class_of(w);
    let l = length(ctx, &c)?.value;
    let p = l.prec();
    Ok([Float::with_val(p, w.0) / &l, Float::with_val(p, w.1) / &l])
}

/// The boundary point `w / L(w)` at a fixed working precision.
pub fn boundary_point_at(ctx: &SurfaceContext, w: Vector, bits: u32) -> [Float; 2] {
    let l = length_at(ctx, w, bits);
    [Float::with_val(bits, w.0) / &l, Float::with_val(bits, w.1) / &l]
}

/// The one-sided supporting functional at `u` selecting the side of `v`,
/// at a fixed working precision.
pub fn support_functional_at(ctx: &SurfaceContext, u: Vector, v: Vector, bits: u32) -> Result<SupportFunctional> {
    let d = det(u, v);
    if d.abs() != 1 {
        return Err(Error::DegenerateBasis { u, v, det: d });
    }
    let d = d as i64;
    let xu = trace_float(ctx, u, bits);
    let y = trace_float(ctx, v, bits);
    let z = trace_float(ctx, add(u, v), bits);
    let r = half_exp(&xu);
    let lu = Float::with_val(bits, r.ln_ref()) * 2u32;
    let rinv = Float::with_val(bits, r.recip_ref());
    let num = Float::with_val(bits, &z - Float::with_val(bits, &y * &rinv));
    let den = Float::with_val(bits, &r - &rinv);
    let a = num / den;
    if a.is_sign_negative() || a.is_zero() {
        return Err(Error::PrecisionExhausted {
            what: format!("support functional at {u:?} toward {v:?}"),
            max_bits: bits,
        });
    }
    let lv = a.ln() * 2u32;
    // Dual basis: u* = (v.1, -v.0) / d, v* = (-u.1, u.0) / d.
    let c0 = (Float::with_val(bits, &lu * v.1) - Float::with_val(bits, &lv * u.1)) * d;
    let c1 = (Float::with_val(bits, &lv * u.0) - Float::with_val(bits, &lu * v.0)) * d;
    Ok(SupportFunctional {
        coords: [c0, c1],
        base: u,
        side: v,
        value_at_base: LengthValue {
            value: lu,
            precision_bits: bits,
        },
        value_at_side: lv,
    })
}

/// The one-sided supporting functional at `u` toward `v`; requires
/// `|det(u, v)| = 1`.
pub fn support_functional(ctx: &SurfaceContext, u: Vector, v: Vector) -> Result<SupportFunctional> {
    let what = format!("support functional at {u:?} toward {v:?}");
    Ok(refine(ctx.policy(), &what, |b| support_functional_at(ctx, u, v, b))?.0)
}

/// Counterclockwise angle from the normal of `a` to the normal of `b`, in
/// `(-pi, pi]`.
pub fn normal_angle(a: &SupportFunctional, b: &SupportFunctional) -> Float {
    let p = a.coords[0].prec().max(b.coords[0].prec());
    let cross = Float::with_val(p, &a.coords[0] * &b.coords[1]) - Float::with_val(p, &a.coords[1] * &b.coords[0]);
    let dot = Float::with_val(p, &a.coords[0] * &b.coords[0]) + Float::with_val(p, &a.coords[1] * &b.coords[1]);
    cross.atan2(&dot)
}

/// Corner atom at `w` using a specific oriented neighbour `u` with
/// `|det(w, u)| = 1`.
pub fn corner_atom_with_neighbor_at(ctx: &SurfaceContext, w: Vector, u: Vector, bits: u32) -> Result<AtomRecord> {
    let lp = support_functional_at(ctx, w, u, bits)?;
    let lm = support_functional_at(ctx, w, neg(u), bits)?;
    let atom = normal_angle(&lp, &lm).abs();
    let xw = trace_float(ctx, w, bits);
    let r = half_exp(&xw);
    let rinv = Float::with_val(bits, r.recip_ref());
    let den = Float::with_val(bits, &r - &rinv);
    let xu = trace_float(ctx, u, bits);
    let xu_r = Float::with_val(bits, &xu * &rinv);
    let z_plus = trace_float(ctx, add(w, u), bits);
    let z_minus = trace_float(ctx, add(w, neg(u)), bits);
    let a_plus = Float::with_val(bits, &z_plus - &xu_r) / &den;
    let a_minus = Float::with_val(bits, &z_minus - &xu_r) / &den;
    // coth(L/2) = (r^2 + 1) / (r^2 - 1).
    let r2 = Float::with_val(bits, r.square_ref());
    let coth = Float::with_val(bits, &r2 + 1u32) / Float::with_val(bits, &r2 - 1u32);
    let prod = Float::with_val(bits, &a_plus * &a_minus);
    let coth_residual = (prod / Float::with_val(bits, coth.square_ref()) - 1u32).abs();
    Ok(AtomRecord {
        class: class_of(w),
        atom,
        lambda_plus: lp,
        lambda_minus: lm,
        solve: SupportSolve {
            r,
            z_plus,
            z_minus,
            a_plus,
            a_minus,
        },
        coth_residual,
        precision_bits: bits,
    })
}

fn corner_atom_at(ctx: &SurfaceContext, w: &PrimitiveClass, bits: u32) -> Result<AtomRecord> {
    let wv = w.vector();
    corner_atom_with_neighbor_at(ctx, wv, farey_neighbor_vector(wv), bits)
}

/// Corner atom at `w`, computed with the deterministic Farey neighbour.
pub fn corner_atom(ctx: &SurfaceContext, w: &PrimitiveClass) -> Result<AtomRecord> {
    let what = format!("corner atom at {w}");
    let (rec, _) = refine(ctx.policy(), &what, |b| corner_atom_at(ctx, w, b))?;
    Ok(rec)
}

/// Corner atoms for many classes, in `(height, angle)` order.
pub fn corner_atoms(ctx: &SurfaceContext, classes: &[PrimitiveClass]) -> Result<Vec<AtomRecord>> {
    let mut sorted = classes.to_vec();
    sorted.sort_by(height_angle_cmp);
    sorted.par_iter().map(|w| corner_atom(ctx, w)).collect()
}

/// Gap record at a fixed precision.
pub fn gap_turn_at(ctx: &SurfaceContext, u: Vector, v: Vector, bits: u32) -> Result<GapRecord> {
    let lam_uv = support_functional_at(ctx, u, v, bits)?;
    let lam_vu = support_functional_at(ctx, v, u, bits)?;
    let turn = normal_angle(&lam_uv, &lam_vu);
    if turn.is_sign_negative() && !turn.is_zero() {
        return Err(Error::TurnAmbiguous { u, v });
    }
    let lv = length_at(ctx, v, bits);
    let lu = lam_uv.value_at_base.value.clone();
    let defect = Float::with_val(bits, &lam_uv.value_at_side - &lv).abs()
        + Float::with_val(bits, &lam_vu.value_at_side - &lu).abs();
    Ok(GapRecord {
        u,
        v,
        mediant: class_of(add(u, v)),
        lam_uv,
        lam_vu,
        turn,
        endpoint_defect: defect,
        precision_bits: bits,
    })
}

/// Normal turn and endpoint defect of an oriented gap `(u, v)` with
/// `det(u, v) = 1`.
pub fn gap_turn(ctx: &SurfaceContext, u: Vector, v: Vector) -> Result<GapRecord> {
    if det(u, v) != 1 {
        return Err(Error::DeterminantViolation { u, v, det: det(u, v) });
    }
    let what = format!("gap turn over ({u:?}, {v:?})");
    Ok(refine(ctx.policy(), &what, |b| gap_turn_at(ctx, u, v, b))?.0)
}

/// Gap records for every gap of a table, in table order.
pub fn gap_records(ctx: &SurfaceContext, table: &GapTable) -> Result<Vec<GapRecord>> {
    table
        .gaps
        .par_iter()
        .map(|g| {
            let (u, v) = gap_endpoints(g)?;
            gap_turn(ctx, u, v)
        })
        .collect()
}

fn tail_turn_at(ctx: &SurfaceContext, table: &GapTable, bits: u32) -> Result<TailTurn> {
    let atoms: Vec<Float> = table
        .classes
        .par_iter()
        .map(|w| corner_atom_at(ctx, w, bits).map(|a| a.atom))
        .collect::<Result<_>>()?;
    let turns: Vec<Float> = table
        .gaps
        .par_iter()
        .map(|g| {
            let (u, v) = gap_endpoints(g)?;
            gap_turn_at(ctx, u, v, bits).map(|r| r.turn)
        })
        .collect::<Result<_>>()?;
    let sum = |xs: &[Float]| xs.iter().fold(Float::with_val(bits, 0), |acc, x| acc + x);
    let from_atoms = Float::with_val(bits, pi(bits) * 2u32) - sum(&atoms) * 2u32;
    let from_gaps = sum(&turns) * 2u32;
    let discrepancy = Float::with_val(bits, &from_atoms - &from_gaps).abs();
    Ok(TailTurn {
        h: table.height_bound,
        from_atoms,
        from_gaps,
        discrepancy,
        precision_bits: bits,
    })
}

/// Tail turn beyond height `h`.
pub fn tail_turn(ctx: &SurfaceContext, h: u64) -> Result<TailTurn> {
    let table = enumerate_classes(h)?;
    let what = format!("tail turn at H={h}");
    Ok(refine(ctx.policy(), &what, |b| tail_turn_at(ctx, &table, b))?.0)
}

/// Tail turn for every `H` in `1..=hmax`.
pub fn tail_turn_scan(ctx: &SurfaceContext, hmax: u64) -> Result<Vec<TailTurn>> {
    (1..=hmax).map(|h| tail_turn(ctx, h)).collect()
}

/// Inner and outer polygons bracketing the boundary of the ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub h: u64,
    /// Boundary points over classes of height at most `H` and their
    /// negatives, counterclockwise from `(1,0)`.
    pub inner: Vec<[f64; 2]>,
    /// Intersection of the supporting half-planes at those points,
    /// counterclockwise.
    pub outer: Vec<[f64; 2]>,
    pub hausdorff_gap: f64,
}

/// Inner and outer polygons for height `h`, dilated by `scale`.
pub fn polygon_sandwich(ctx: &SurfaceContext, h: u64, scale: f64) -> Result<Sandwich> {
    let table = enumerate_classes(h)?;
    let bits = ctx.policy().base_bits;
    let points: Vec<[f64; 2]> = table
        .classes
        .par_iter()
        .map(|c| {
            let u = c.upper_lift();
            let l = length_at(ctx, u, bits).to_f64();
            [u.0 as f64 / l, u.1 as f64 / l]
        })
        .collect();
    let corners: Vec<[f64; 2]> = table
        .gaps
        .par_iter()
        .map(|g| {
            let (u, v) = gap_endpoints(g)?;
            let a = support_functional_at(ctx, u, v, bits)?.coords;
            let b = support_functional_at(ctx, v, u, bits)?.coords;
            let d = Float::with_val(bits, &a[0] * &b[1]) - Float::with_val(bits, &a[1] * &b[0]);
            let x = Float::with_val(bits, &b[1] - &a[1]) / &d;
            let y = Float::with_val(bits, &a[0] - &b[0]) / &d;
            Ok([x.to_f64(), y.to_f64()])
        })
        .collect::<Result<_>>()?;
    let mut inner: Vec<[f64; 2]> = points.clone();
    inner.extend(points.iter().map(|p| [-p[0], -p[1]]));
    let mut outer = Vec::with_capacity(4 * points.len());
    for sign in [1.0, -1.0] {
        for (p, x) in points.iter().zip(&corners) {
            outer.push([sign * p[0], sign * p[1]]);
            outer.push([sign * x[0], sign * x[1]]);
        }
    }
    let hausdorff_gap = outer.iter().map(|x| distance_to_polygon(x, &inner)).fold(0.0, f64::max);
    let dilate = |v: Vec<[f64; 2]>| v.into_iter().map(|p| [p[0] * scale, p[1] * scale]).collect();
    Ok(Sandwich {
        h,
        inner: dilate(inner),
        outer: dilate(outer),
        hausdorff_gap: hausdorff_gap * scale,
    })
}

fn distance_to_polygon(x: &[f64; 2], poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let ab = [b[0] - a[0], b[1] - a[1]];
            let ax = [x[0] - a[0], x[1] - a[1]];
            let t = ((ax[0] * ab[0] + ax[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
            let q = [a[0] + t * ab[0] - x[0], a[1] + t * ab[1] - x[1]];
            q[0].hypot(q[1])
        })
        .fold(f64::INFINITY, f64::min)
}
