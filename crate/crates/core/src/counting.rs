//! Counting lattice points on dilated boundaries: Markoff fibers, length
//! multiplicities, active gaps, sector direction counts and Jarník-type
//! arc bounds.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey::{class_of, det, enumerate_classes, gap_endpoints, height_angle_cmp, PrimitiveClass, Vector};
use crate::markoff::{
    classes_up_to_height_exact, classes_up_to_height_interval, classes_up_to_trace_exact, classes_up_to_trace_interval,
};
use crate::markoff::{orbit, surface_symmetries, Mat2, SurfaceContext, TraceValue};
use crate::normball::{gap_turn, length, LengthValue};
use crate::precision::Interval;

/// Largest fiber allowed by the unicity conjecture, counted mod sign.
pub const UNICITY_BOUND: usize = 6;

/// Constant used when testing arc counts against the Jarník-type bound.
pub const JARNIK_CONSTANT: f64 = 64.0;

/// Extra bits carried by walked traces.
const GUARD_BITS: u32 = 32;

/// The classes with trace `3m` on the modular torus.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberRecord {
    pub m: Integer,
    /// Sorted by height, then angle.
    pub classes: Vec<PrimitiveClass>,
    pub size: usize,
    pub length: LengthValue,
    /// `size / (log log 3m)^2`, defined for `m >= 2`.
    pub bound_ratio: Option<f64>,
}

fn bound_ratio(m: &Integer, size: usize) -> Option<f64> {
    if *m < 2 {
        return None;
    }
    let ll = Float::with_val(64, Integer::from(m * 3u32)).ln().ln().to_f64();
    Some(size as f64 / (ll * ll))
}

fn fiber_record(ctx: &SurfaceContext, m: Integer, mut classes: Vec<PrimitiveClass>) -> Result<FiberRecord> {
    classes.sort_by(height_angle_cmp);
    let length = length(ctx, &classes[0])?;
    Ok(FiberRecord {
        size: classes.len(),
        bound_ratio: bound_ratio(&m, classes.len()),
        m,
        classes,
        length,
    })
}

/// The fiber over the Markoff number `m`.
///
/// Modular traces grow strictly below the base triangle, so the search of
/// all classes with trace at most `3m` is exhaustive.
pub fn markoff_fiber(ctx: &SurfaceContext, m: &Integer) -> Result<FiberRecord> {
    if !ctx.is_modular() {
        return Err(Error::ModularOnly);
    }
    if *m < 1 {
        return Err(Error::NotMarkoff { m: m.to_string() });
    }
    let t = Integer::from(m * 3u32);
    let classes: Vec<_> = classes_up_to_trace_exact(ctx, &t)?
        .into_iter()
        .filter(|(_, x)| *x == t)
        .map(|(c, _)| c)
        .collect();
    if classes.is_empty() {
        return Err(Error::NotMarkoff { m: m.to_string() });
    }
    fiber_record(ctx, m.clone(), classes)
}

/// Every fiber with label at most `max_m`, in increasing order of `m`.
pub fn markoff_fibers(ctx: &SurfaceContext, max_m: &Integer) -> Result<Vec<FiberRecord>> {
    if !ctx.is_modular() {
        return Err(Error::ModularOnly);
    }
    if *max_m < 1 {
        return Err(Error::InvalidInput("max_m must be at least 1".into()));
    }
    let mut by_trace: BTreeMap<Integer, Vec<PrimitiveClass>> = BTreeMap::new();
    for (c, t) in classes_up_to_trace_exact(ctx, &Integer::from(max_m * 3u32))? {
        by_trace.entry(t).or_default().push(c);
    }
    by_trace
        .into_iter()
        .map(|(t, classes)| fiber_record(ctx, t / 3u32, classes))
        .collect()
}

/// Summary of a fiber scan.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberScan {
    pub fibers: Vec<FiberRecord>,
    pub max_size: usize,
    pub max_bound_ratio: f64,
    /// Some fiber exceeds [`UNICITY_BOUND`].
    pub unicity_violation: bool,
}

/// Fibers up to `max_m` with their extremal statistics.
pub fn unicity_scan(ctx: &SurfaceContext, max_m: &Integer) -> Result<FiberScan> {
    let fibers = markoff_fibers(ctx, max_m)?;
    let max_size = fibers.iter().map(|f| f.size).max().unwrap_or(0);
    let max_bound_ratio = fibers.iter().filter_map(|f| f.bound_ratio).fold(0.0, f64::max);
    Ok(FiberScan {
        unicity_violation: max_size > UNICITY_BOUND,
        fibers,
        max_size,
        max_bound_ratio,
    })
}

/// Classes sharing the length of a target class.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplicity {
    pub target: PrimitiveClass,
    pub trace: TraceValue,
    /// Includes the target; sorted by height, then angle.
    pub witnesses: Vec<PrimitiveClass>,
    pub count: usize,
    /// Exact integer equality, or certification by symmetry and disjoint
    /// enclosures.
    pub exact: bool,
    pub precision_bits: u32,
}

/// Counts classes (mod sign) whose length equals that of `target`.
///
/// Off the modular torus two classes are equal when a trace-preserving
/// symmetry maps one to the other and distinct when their enclosures are
/// disjoint; anything else is refined up to the precision ceiling and then
/// reported as [`Error::EqualityUndecidable`].
pub fn multiplicity(ctx: &SurfaceContext, target: &PrimitiveClass) -> Result<Multiplicity> {
    if let Some(t) = ctx.exact_trace(target.vector()) {
        let mut witnesses: Vec<_> = classes_up_to_trace_exact(ctx, &t)?
            .into_iter()
            .filter(|(_, x)| *x == t)
            .map(|(c, _)| c)
            .collect();
        witnesses.sort_by(height_angle_cmp);
        let bits = ctx.policy().base_bits;
        return Ok(Multiplicity {
            target: *target,
            trace: TraceValue::from_exact(t, bits),
            count: witnesses.len(),
            witnesses,
            exact: true,
            precision_bits: bits,
        });
    }
    let group = surface_symmetries(ctx)?;
    let equal: BTreeSet<PrimitiveClass> = orbit(&group, target).into_iter().collect();
    let policy = ctx.policy();
    let mut bits = policy.base_bits;
    let mut pending: Option<Vec<PrimitiveClass>> = None;
    loop {
        let wb = bits + GUARD_BITS;
        let t = ctx.trace_interval(target.vector(), wb);
        let candidates: Vec<PrimitiveClass> = match &pending {
            None => classes_up_to_trace_interval(ctx, &t.hi, wb)
                .into_iter()
                .filter(|(c, iv)| !equal.contains(c) && iv.overlaps(&t))
                .map(|(c, _)| c)
                .collect(),
            Some(prev) => prev
                .iter()
                .copied()
                .filter(|c| ctx.trace_interval(c.vector(), wb).overlaps(&t))
                .collect(),
        };
        if candidates.is_empty() {
            let mut witnesses: Vec<_> = equal.into_iter().collect();
            witnesses.sort_by(height_angle_cmp);
            return Ok(Multiplicity {
                target: *target,
                trace: TraceValue::from_interval(&t),
                count: witnesses.len(),
                witnesses,
                exact: false,
                precision_bits: bits,
            });
        }
        let next = bits.saturating_mul(2);
        if next > policy.max_bits {
            let mut cluster = vec![*target];
            cluster.extend(candidates);
            return Err(Error::EqualityUndecidable { cluster });
        }
        pending = Some(candidates);
        bits = next;
    }
}

/// A closed angular sector and a radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorQuery {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub r: f64,
}

impl SectorQuery {
    pub fn new(theta_lo: f64, theta_hi: f64, r: f64) -> Result<Self> {
        let q = Self { theta_lo, theta_hi, r };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.theta_hi - self.theta_lo;
        if !(self.theta_lo.is_finite() && (0.0..=TAU).contains(&w)) {
            return Err(Error::InvalidInput(format!(
                "sector [{}, {}] must have width in [0, 2pi]",
                self.theta_lo, self.theta_hi
            )));
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return Err(Error::InvalidInput(format!("radius {} must be at least 1", self.r)));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.theta_hi - self.theta_lo
    }

    /// The bound `theta r^2 + 4`.
    pub fn bound(&self) -> f64 {
        self.width() * self.r * self.r + 4.0
    }

    /// Whether the direction of `v` lies in the closed sector.
    pub fn contains_direction(&self, v: Vector) -> bool {
        const SLACK: f64 = 1e-12;
        let w = self.width();
        if w >= TAU - SLACK {
            return true;
        }
        let a = (v.1 as f64).atan2(v.0 as f64);
        let off = (a - self.theta_lo).rem_euclid(TAU);
        off <= w + SLACK || off >= TAU - SLACK
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// Number of oriented primitive vectors of norm at most `r` whose
/// direction lies in the sector, by brute force.
pub fn sector_direction_count(q: &SectorQuery) -> Result<u64> {
    q.validate()?;
    let n = q.r.floor() as i64;
    let r2 = q.r * q.r;
    let mut count = 0;
    for x in -n..=n {
        for y in -n..=n {
            if gcd(x, y) == 1 && ((x * x + y * y) as f64) <= r2 && q.contains_direction((x, y)) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Which classes an active-gap report tracks.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelLabel {
    /// Classes with trace `3m` (modular only).
    Markoff(Integer),
    /// Classes whose length may lie in `[lo, hi]`.
    Length { lo: f64, hi: f64 },
}

impl std::fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LevelLabel::Markoff(m) => write!(f, "m={m}"),
            LevelLabel::Length { lo, hi } => write!(f, "L=[{lo},{hi}]"),
        }
    }
}

/// Height-H gaps containing at least one class of a level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveGapReport {
    pub h: u64,
    pub label: String,
    pub active_count: usize,
    pub total_gaps: usize,
    pub gap_ids: Vec<usize>,
    /// Level classes that are themselves of height at most `H`.
    pub endpoint_classes: usize,
}

/// Classes on a level.
pub fn level_classes(ctx: &SurfaceContext, label: &LevelLabel) -> Result<Vec<PrimitiveClass>> {
    match label {
        LevelLabel::Markoff(m) => Ok(markoff_fiber(ctx, m)?.classes),
        LevelLabel::Length { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite() && 0.0 < *lo && lo <= hi) {
                return Err(Error::InvalidInput(format!("length interval [{lo}, {hi}] is invalid")));
            }
            let bits = ctx.policy().base_bits + GUARD_BITS;
            // t = 2 cosh(L / 2); the slack keeps the window closed under rounding.
            let tr = |l: f64, slack: f64| {
                let x = Float::with_val(bits, l) / 2u32;
                Float::with_val(bits, x.cosh() * 2u32) * (1.0 + slack)
            };
            let window = Interval {
                lo: tr(*lo, -1e-15),
                hi: tr(*hi, 1e-15),
            };
            let mut out: Vec<_> = classes_up_to_trace_interval(ctx, &window.hi, bits)
                .into_iter()
                .filter(|(_, iv)| iv.overlaps(&window))
                .map(|(c, _)| c)
                .collect();
            out.sort_by(height_angle_cmp);
            Ok(out)
        }
    }
}

/// Gaps at height `h` whose open arc contains a class of the level.
pub fn active_gaps(ctx: &SurfaceContext, h: u64, label: &LevelLabel) -> Result<ActiveGapReport> {
    let table = enumerate_classes(h)?;
    let classes = level_classes(ctx, label)?;
    let mut ids = BTreeSet::new();
    let mut endpoint_classes = 0;
    for c in &classes {
        match table.locate(c) {
            Some(i) => {
                ids.insert(i);
            }
            None => endpoint_classes += 1,
        }
    }
    Ok(ActiveGapReport {
        h,
        label: label.to_string(),
        active_count: ids.len(),
        total_gaps: table.gaps.len(),
        gap_ids: ids.into_iter().collect(),
        endpoint_classes,
    })
}

/// Classes sharing one length in a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub id: usize,
    pub trace: TraceValue,
    pub classes: Vec<PrimitiveClass>,
    pub multiplicity: usize,
    /// Every class at this level has height within the scan bound, so the
    /// multiplicity is the full count.
    pub complete: bool,
}

/// Length levels of all classes up to a height.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeScan {
    pub height_bound: u64,
    /// Sorted by trace.
    pub levels: Vec<LevelRecord>,
    /// Multiplicity to number of levels, over certified levels.
    pub histogram: BTreeMap<usize, usize>,
    pub max_multiplicity: usize,
    /// Groups whose enclosures still overlap at the precision ceiling
    /// without a symmetry certifying equality.
    pub overlap_clusters: Vec<Vec<PrimitiveClass>>,
    /// Some level exceeds [`UNICITY_BOUND`] on the modular torus.
    pub unicity_violation: bool,
}

/// Smallest trace below the height frontier, when traces are known to grow
/// from there on. Levels below it are complete.
fn frontier_floor<T: crate::markoff::Label>(
    base: &[T; 3],
    h: u64,
    lower: impl Fn(&T) -> Float,
    upper: impl Fn(&T) -> Float,
) -> Option<Float> {
    let mut floor: Option<Float> = None;
    let mut growing = true;
    crate::markoff::walk_cones(base, |node, xm| {
        if crate::farey::vec_height(node.cone.mediant()) <= h {
            return true;
        }
        let lo = lower(xm);
        if lo < upper(&node.xu) || lo < upper(&node.xv) {
            growing = false;
        }
        floor = Some(match floor.take() {
            Some(f) if f <= lo => f,
            _ => lo,
        });
        false
    });
    if growing {
        floor
    } else {
        None
    }
}

/// Groups every class of height at most `h` by length.
pub fn boundary_lattice_scan(ctx: &SurfaceContext, h: u64) -> Result<LatticeScan> {
    if h == 0 {
        return Err(Error::InvalidInput("height bound must be at least 1".into()));
    }
    crate::farey::check_class_budget(h, crate::farey::DEFAULT_CLASS_BUDGET)?;
    let bits = ctx.policy().base_bits;
    let (groups, clusters, floor): (Vec<(TraceValue, Vec<PrimitiveClass>)>, _, _) = if ctx.is_modular() {
        let mut by: BTreeMap<Integer, Vec<PrimitiveClass>> = BTreeMap::new();
        for (c, t) in classes_up_to_height_exact(ctx, h)? {
            by.entry(t).or_default().push(c);
        }
        let base = [Integer::from(3), Integer::from(3), Integer::from(3)];
        let floor = frontier_floor(&base, h, |t| Float::with_val(bits, t), |t| Float::with_val(bits, t));
        let groups = by
            .into_iter()
            .map(|(t, cs)| (TraceValue::from_exact(t, bits), cs))
            .collect();
        (groups, Vec::new(), floor)
    } else {
        let (groups, clusters) = interval_levels(ctx, h)?;
        let wb = bits + GUARD_BITS;
        let base = ctx.base_intervals(wb);
        let floor = frontier_floor(&base, h, |t| t.lo.clone(), |t| t.hi.clone());
        (groups, clusters, floor)
    };
    let mut levels = Vec::with_capacity(groups.len());
    let mut histogram = BTreeMap::new();
    for (id, (trace, mut classes)) in groups.into_iter().enumerate() {
        classes.sort_by(height_angle_cmp);
        let complete = floor.as_ref().is_some_and(|f| trace.interval().hi < *f);
        *histogram.entry(classes.len()).or_insert(0) += 1;
        levels.push(LevelRecord {
            id,
            multiplicity: classes.len(),
            trace,
            classes,
            complete,
        });
    }
    let max_multiplicity = levels.iter().map(|l| l.multiplicity).max().unwrap_or(0);
    Ok(LatticeScan {
        height_bound: h,
        unicity_violation: ctx.is_modular() && max_multiplicity > UNICITY_BOUND,
        levels,
        histogram,
        max_multiplicity,
        overlap_clusters: clusters,
    })
}

type Levels = (Vec<(TraceValue, Vec<PrimitiveClass>)>, Vec<Vec<PrimitiveClass>>);

/// Splits classes into certified levels and unresolved clusters.
fn interval_levels(ctx: &SurfaceContext, h: u64) -> Result<Levels> {
    let policy = ctx.policy();
    let group = surface_symmetries(ctx)?;
    let bits = policy.base_bits;
    let items = classes_up_to_height_interval(ctx, h, bits + GUARD_BITS);
    let in_range: BTreeSet<PrimitiveClass> = items.iter().map(|(c, _)| *c).collect();
    let mut levels = Vec::new();
    let mut unresolved = Vec::new();
    let mut work = vec![(bits, items)];
    while let Some((bits, mut items)) = work.pop() {
        items.sort_by(|a, b| a.1.lo.total_cmp(&b.1.lo));
        let mut i = 0;
        while i < items.len() {
            let mut j = i + 1;
            let mut hi = items[i].1.hi.clone();
            while j < items.len() && items[j].1.lo <= hi {
                if items[j].1.hi > hi {
                    hi = items[j].1.hi.clone();
                }
                j += 1;
            }
            let cluster = &items[i..j];
            let orbits = orbit_groups(&group, cluster.iter().map(|(c, _)| *c), &in_range);
            if orbits.len() == 1 {
                let iv = cluster
                    .iter()
                    .fold(cluster[0].1.clone(), |acc, (_, iv)| intersect(&acc, iv));
                levels.push((
                    TraceValue::from_interval(&iv),
                    orbits.into_iter().next().unwrap_or_default(),
                ));
            } else {
                let next = bits.saturating_mul(2);
                if next > policy.max_bits {
                    let mut all: Vec<_> = cluster.iter().map(|(c, _)| *c).collect();
                    all.sort_by(height_angle_cmp);
                    unresolved.push(all);
                } else {
                    let refined = cluster
                        .iter()
                        .map(|(c, _)| (*c, ctx.trace_interval(c.vector(), next + GUARD_BITS)))
                        .collect();
                    work.push((next, refined));
                }
            }
            i = j;
        }
    }
    levels.sort_by(|a, b| a.0.approx.total_cmp(&b.0.approx));
    unresolved.sort();
    Ok((levels, unresolved))
}

fn intersect(a: &Interval, b: &Interval) -> Interval {
    let lo = if a.lo >= b.lo { a.lo.clone() } else { b.lo.clone() };
    let hi = if a.hi <= b.hi { a.hi.clone() } else { b.hi.clone() };
    if lo <= hi {
        Interval { lo, hi }
    } else {
        a.clone()
    }
}

/// Partitions classes into symmetry orbits restricted to the scan range.
fn orbit_groups(
    group: &[Mat2],
    classes: impl Iterator<Item = PrimitiveClass>,
    in_range: &BTreeSet<PrimitiveClass>,
) -> Vec<Vec<PrimitiveClass>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for c in classes {
        if seen.contains(&c) {
            continue;
        }
        let o: Vec<_> = orbit(group, &c).into_iter().filter(|x| in_range.contains(x)).collect();
        seen.extend(o.iter().copied());
        out.push(o);
    }
    out
}

/// Lattice points of one boundary arc between consecutive rational
/// directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub gap_index: usize,
    /// `+1` for the arc in the cone of `(u, v)`, `-1` for its negative.
    pub orientation: i8,
    pub u: Vector,
    pub v: Vector,
    pub count: usize,
    /// Length of the inscribed polyline through the arc's endpoints and
    /// lattice points, a lower bound for the arc length.
    pub arc_length: f64,
    pub turn: f64,
    /// `count / (arc_length^{2/3} turn^{1/3} + 1)`.
    pub ratio: f64,
}

/// Arc-by-arc lattice counts on the dilated boundary through one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JarnikReport {
    pub level: PrimitiveClass,
    pub radius: f64,
    pub h: u64,
    /// Oriented lattice points on the dilated boundary.
    pub total_points: usize,
    /// Points in directions of height at most `H`.
    pub points_at_rationals: usize,
    /// Arcs carrying at least one point.
    pub arcs: Vec<ArcRecord>,
    pub max_ratio: f64,
    /// Arcs whose ratio exceeds [`JARNIK_CONSTANT`].
    pub violations: usize,
    /// Triples of collinear points on a common arc.
    pub collinear_triples: usize,
}

/// Counts the lattice points of `R dB` on each height-`h` gap arc, where
/// `R` is the length of `level`.
pub fn jarnik_arc_check(ctx: &SurfaceContext, level: &PrimitiveClass, h: u64) -> Result<JarnikReport> {
    let table = enumerate_classes(h)?;
    let mult = multiplicity(ctx, level)?;
    let radius = length(ctx, level)?.to_f64();
    let mut points: Vec<Vector> = Vec::new();
    for c in &mult.witnesses {
        points.push(c.vector());
        points.push((-c.p(), -c.q()));
    }
    let mut per_arc: BTreeMap<(usize, i8), Vec<Vector>> = BTreeMap::new();
    let mut at_rationals = 0;
    for &z in &points {
        let Some(g) = table.locate(&class_of(z)) else {
            at_rationals += 1;
            continue;
        };
        let (u, v) = gap_endpoints(&table.gaps[g])?;
        let orient = if det(u, z) > 0 && det(z, v) > 0 { 1 } else { -1 };
        per_arc.entry((g, orient)).or_default().push(z);
    }
    let boundary = |w: Vector| -> Result<[f64; 2]> {
        let l = length(ctx, &class_of(w))?.to_f64();
        Ok([radius * w.0 as f64 / l, radius * w.1 as f64 / l])
    };
    let mut arcs = Vec::with_capacity(per_arc.len());
    let mut collinear_triples = 0;
    for ((g, orient), mut zs) in per_arc {
        let (u, v) = gap_endpoints(&table.gaps[g])?;
        let (u, v) = if orient == 1 {
            (u, v)
        } else {
            ((-u.0, -u.1), (-v.0, -v.1))
        };
        zs.sort_by(|a, b| 0.cmp(&det(*a, *b)));
        let mut poly = vec![boundary(u)?];
        poly.extend(zs.iter().map(|z| [z.0 as f64, z.1 as f64]));
        poly.push(boundary(v)?);
        let arc_length: f64 = poly
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum();
        let turn = gap_turn(ctx, u, v)?.turn.to_f64();
        let count = zs.len();
        let ratio = count as f64 / (arc_length.powf(2.0 / 3.0) * turn.powf(1.0 / 3.0) + 1.0);
        for a in 0..count {
            for b in a + 1..count {
                for c in b + 1..count {
                    let (za, zb, zc) = (zs[a], zs[b], zs[c]);
                    if det((zb.0 - za.0, zb.1 - za.1), (zc.0 - za.0, zc.1 - za.1)) == 0 {
                        collinear_triples += 1;
                    }
                }
            }
        }
        arcs.push(ArcRecord {
            gap_index: g,
            orientation: orient,
            u,
            v,
            count,
            arc_length,
            turn,
            ratio,
        });
    }
    let max_ratio = arcs.iter().map(|a| a.ratio).fold(0.0, f64::max);
    Ok(JarnikReport {
        level: *level,
        radius,
        h,
        total_points: points.len(),
        points_at_rationals: at_rationals,
        violations: arcs.iter().filter(|a| a.ratio > JARNIK_CONSTANT).count(),
        arcs,
        max_ratio,
        collinear_triples,
    })
}
