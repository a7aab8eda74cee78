//! Surfaces on the Markoff variety and the trace labels of their simple
//! closed geodesics.
//!
//! A surface is fixed by the traces `(x, y, z)` of the classes
//! `(1,0), (0,1), (1,1)` subject to `x^2 + y^2 + z^2 = xyz`. Every other
//! trace follows from Vieta flips `z -> xy - z` across the Farey tree. On the
//! modular torus `(3, 3, 3)` all traces are integers, `3m` for the Markoff
//! number `m` labelling the class; elsewhere they are carried as certified
//! intervals.

mod cache;
mod sink;
mod surd;
mod tree;

use std::path::Path;

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

pub use cache::{resolve_cache_dir, TraceCache, TraceRecord, TraceStore, CACHE_DIR_ENV};
pub use sink::{apply, bowditch_sink, descend, orbit, surface_symmetries, Mat2, SinkTriangle};
pub use surd::{rational_sqrt, Surd, SurdField};
pub use tree::{
    classes_up_to_height_exact, classes_up_to_height_interval, classes_up_to_trace_exact, classes_up_to_trace_interval,
    fricke_edge_scan, markoff_tree, read_markoff_checkpoint, walk_cones, write_markoff_checkpoint, ConeNode, EdgeScan,
    MarkoffRecord, MarkoffRow,
};

use crate::error::{Error, Result};
use crate::farey::{
    class_of, enumerate_classes, flip_label, gap_endpoints, stern_brocot_path, PrimitiveClass, Vector, BASE_TRIANGLE,
};
use crate::precision::{parse_decimal, rational_to_decimal, Interval, PrecisionPolicy};

/// Relative residual accepted before re-projecting onto the variety.
pub const VARIETY_TOLERANCE: f64 = 1e-9;

/// Default cap on the number of flips in sink descent.
pub const DEFAULT_DESCENT_BUDGET: u64 = 1_000_000;

/// Input description of a surface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SurfaceSpec {
    Modular,
    Triple { x: String, y: String, z: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Modular,
    Triple,
}

/// Arithmetic shared by exact and interval trace labels.
pub trait Label: Clone + Send + Sync {
    /// The Vieta partner `xy - z`.
    fn flip(x: &Self, y: &Self, z: &Self) -> Self;
}

impl Label for Integer {
    fn flip(x: &Self, y: &Self, z: &Self) -> Self {
        Integer::from(x * y) - z
    }
}

impl Label for Interval {
    fn flip(x: &Self, y: &Self, z: &Self) -> Self {
        x.mul(y).sub(z)
    }
}

/// A validated hyperbolic structure together with its precision policy and
/// trace cache.
#[derive(Debug)]
pub struct SurfaceContext {
    kind: SurfaceKind,
    field: SurdField,
    basis: [Surd; 3],
    policy: PrecisionPolicy,
    fingerprint: String,
    descent_budget: u64,
    cache: TraceCache,
    store: Option<TraceStore>,
}

/// A trace label: exact on the modular torus, certified otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceValue {
    pub exact: Option<Integer>,
    pub approx: Float,
    /// Certified half-width of the enclosure around `approx`; zero when exact.
    pub radius: Float,
    pub precision_bits: u32,
}

impl TraceValue {
    pub fn from_exact(n: Integer, bits: u32) -> Self {
        Self {
            approx: Float::with_val(bits, &n),
            radius: Float::with_val(bits, 0),
            exact: Some(n),
            precision_bits: bits,
        }
    }

    pub fn from_interval(iv: &Interval) -> Self {
        let bits = iv.prec();
        let mid = iv.mid();
        let lo_gap = Float::with_val_round(bits, &mid - &iv.lo, Round::Up).0;
        let hi_gap = Float::with_val_round(bits, &iv.hi - &mid, Round::Up).0;
        Self {
            exact: None,
            approx: Float::with_val(bits, &mid),
            radius: lo_gap.max(&hi_gap),
            precision_bits: bits,
        }
    }

    /// Enclosure of the true value.
    pub fn interval(&self) -> Interval {
        match &self.exact {
            Some(n) => Interval::from_integer(n, self.precision_bits),
            None => Interval::around(&self.approx, &self.radius),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.approx.to_f64()
    }

    /// Exact integer digits, or the approximation at full precision.
    pub fn to_decimal_string(&self) -> String {
        match &self.exact {
            Some(n) => n.to_string(),
            None => {
                let digits = (self.precision_bits as f64 * std::f64::consts::LOG10_2) as usize + 2;
                self.approx.to_string_radix(10, Some(digits))
            }
        }
    }
}

/// Builds and validates a surface.
pub fn make_surface(spec: &SurfaceSpec, policy: PrecisionPolicy) -> Result<SurfaceContext> {
    policy.validate()?;
    match spec {
        SurfaceSpec::Modular => {
            let three = Surd::from_integer(3);
            Ok(SurfaceContext {
                kind: SurfaceKind::Modular,
                field: SurdField::new(Rational::new()),
                basis: [three.clone(), three.clone(), three],
                policy,
                fingerprint: "modular".to_string(),
                descent_budget: DEFAULT_DESCENT_BUDGET,
                cache: TraceCache::default(),
                store: None,
            })
        }
        SurfaceSpec::Triple { x, y, z } => {
            let (x, y, z) = (parse_decimal(x)?, parse_decimal(y)?, parse_decimal(z)?);
            let (field, basis) = project_onto_variety(&x, &y, &z)?;
            let fingerprint = basis
                .iter()
                .map(|s| {
                    let f = field.to_float(s, 256);
                    f.to_string_radix(10, Some(64))
                })
                .collect::<Vec<_>>()
                .join(",");
            Ok(SurfaceContext {
                kind: SurfaceKind::Triple,
                field,
                basis,
                policy,
                fingerprint,
                descent_budget: DEFAULT_DESCENT_BUDGET,
                cache: TraceCache::default(),
                store: None,
            })
        }
    }
}

/// Checks the variety relation and hyperbolicity, then replaces `z` by the
/// nearest exact root of `Z^2 - xyZ + x^2 + y^2 = 0`.
fn project_onto_variety(x: &Rational, y: &Rational, z: &Rational) -> Result<(SurdField, [Surd; 3])> {
    let xy = Rational::from(x * y);
    let sq = Rational::from(x.square_ref()) + Rational::from(y.square_ref());
    let lhs = &sq + Rational::from(z.square_ref());
    let rhs = Rational::from(&xy * z);
    let scale = lhs.clone().abs().max(rhs.clone().abs()).max(Rational::from(1));
    let residual = Float::with_val(64, (lhs - &rhs).abs() / scale).to_f64();
    if residual > VARIETY_TOLERANCE {
        return Err(Error::NotOnVariety { residual });
    }
    let two = Rational::from(2);
    for (which, v) in [("x", x), ("y", y), ("z", z)] {
        if *v <= two {
            return Err(Error::NonHyperbolic {
                which,
                value: rational_to_decimal(v, 20),
            });
        }
    }
    let disc = Rational::from(xy.square_ref()) - Rational::from(4) * &sq;
    if disc < 0 {
        return Err(Error::NotOnVariety { residual });
    }
    let half = Rational::from((1, 2));
    let field = SurdField::new(disc.clone());
    let (plus, minus) = match rational_sqrt(&disc) {
        Some(r) => (
            field.rational((Rational::from(&xy + &r)) * &half),
            field.rational((Rational::from(&xy - &r)) * &half),
        ),
        None => (
            Surd {
                a: Rational::from(&xy * &half),
                b: half.clone(),
            },
            Surd {
                a: Rational::from(&xy * &half),
                b: -half.clone(),
            },
        ),
    };
    let zs = field.rational(z.clone());
    let dp = field.sub(&plus, &zs);
    let dm = field.sub(&minus, &zs);
    let closer_plus = field.cmp(&mul_sign(&field, &dp), &mul_sign(&field, &dm)) != std::cmp::Ordering::Greater;
    let z_new = if closer_plus { plus } else { minus };
    if field.sign(&field.sub(&z_new, &field.rational(two))) != std::cmp::Ordering::Greater {
        return Err(Error::NonHyperbolic {
            which: "z",
            value: format!("{:.20}", field.to_f64(&z_new)),
        });
    }
    Ok((
        field.clone(),
        [field.rational(x.clone()), field.rational(y.clone()), z_new],
    ))
}

fn mul_sign(field: &SurdField, s: &Surd) -> Surd {
    if field.sign(s) == std::cmp::Ordering::Less {
        field.scale(s, &Rational::from(-1))
    } else {
        s.clone()
    }
}

impl SurfaceContext {
    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn is_modular(&self) -> bool {
        self.kind == SurfaceKind::Modular
    }

    pub fn policy(&self) -> &PrecisionPolicy {
        &self.policy
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn field(&self) -> &SurdField {
        &self.field
    }

    /// Exact traces of `(1,0), (0,1), (1,1)`.
    pub fn basis(&self) -> &[Surd; 3] {
        &self.basis
    }

    pub fn basis_f64(&self) -> [f64; 3] {
        self.basis.clone().map(|s| self.field.to_f64(&s))
    }

    pub fn descent_budget(&self) -> u64 {
        self.descent_budget
    }

    pub fn with_descent_budget(mut self, steps: u64) -> Self {
        self.descent_budget = steps;
        self
    }

    pub fn with_policy(mut self, policy: PrecisionPolicy) -> Result<Self> {
        policy.validate()?;
        self.policy = policy;
        Ok(self)
    }

    pub fn cache(&self) -> &TraceCache {
        &self.cache
    }

    /// Attaches a persistent trace store under `dir` and loads its records.
    pub fn attach_store(&mut self, dir: &Path) -> Result<usize> {
        let store = TraceStore::open(dir, &self.fingerprint)?;
        let n = store.load_into(&self.cache, self.is_modular())?;
        self.store = Some(store);
        Ok(n)
    }

    /// Writes the in-memory cache to the attached store, if any.
    pub fn persist(&self) -> Result<()> {
        if let Some(store) = &self.store {
            store.save_from(&self.cache)?;
        }
        Ok(())
    }

    fn exact_base(&self) -> [Integer; 3] {
        [Integer::from(3), Integer::from(3), Integer::from(3)]
    }

    /// Enclosures of the basis traces at `bits`.
    pub fn base_intervals(&self, bits: u32) -> [Interval; 3] {
        self.basis.clone().map(|s| self.field.enclose(&s, bits))
    }

    /// Exact trace on the modular torus; `None` on other surfaces.
    pub fn exact_trace(&self, w: Vector) -> Option<Integer> {
        if !self.is_modular() {
            return None;
        }
        let c = class_of(w);
        if let Some(t) = self.cache.get_exact(&c) {
            return Some(t);
        }
        let t = eval_path(
            &c,
            self.exact_base(),
            |k| self.cache.get_exact(k),
            |k, v| self.cache.put_exact(*k, v.clone()),
        );
        Some(t)
    }

    /// Certified enclosure of the trace of `w` at `bits`.
    pub fn trace_interval(&self, w: Vector, bits: u32) -> Interval {
        if let Some(t) = self.exact_trace(w) {
            return Interval::from_integer(&t, bits);
        }
        let c = class_of(w);
        if let Some(t) = self.cache.get_approx(bits, &c) {
            return t;
        }
        eval_path(
            &c,
            self.base_intervals(bits),
            |k| self.cache.get_approx(bits, k),
            |k, v| self.cache.put_approx(bits, *k, v.clone()),
        )
    }

    /// Trace of `w` at the base precision; on non-modular surfaces the
    /// precision is doubled until the enclosure is tight enough.
    pub fn trace(&self, w: &PrimitiveClass) -> Result<TraceValue> {
        let bits = self.policy.base_bits;
        if let Some(t) = self.exact_trace(w.vector()) {
            return Ok(TraceValue::from_exact(t, bits));
        }
        let mut bits = bits;
        loop {
            let iv = self.trace_interval(w.vector(), bits);
            if iv.rel_width() <= self.policy.agreement_tolerance {
                return Ok(TraceValue::from_interval(&iv));
            }
            bits = bits.saturating_mul(2);
            if bits > self.policy.max_bits {
                return Err(Error::PrecisionExhausted {
                    what: format!("trace of {w}"),
                    max_bits: self.policy.max_bits,
                });
            }
        }
    }
}

/// Evaluates a trace by replaying the Stern-Brocot path, reusing and
/// filling a cache of intermediate labels.
fn eval_path<T: Label>(
    w: &PrimitiveClass,
    base: [T; 3],
    get: impl Fn(&PrimitiveClass) -> Option<T>,
    put: impl Fn(&PrimitiveClass, &T),
) -> T {
    let path = stern_brocot_path(w);
    let mut tri = BASE_TRIANGLE;
    let mut traces = base;
    for &i in &path.steps {
        let i = i as usize;
        let new = flip_label(&tri, i);
        let c = class_of(new);
        let t = match get(&c) {
            Some(t) => t,
            None => {
                let t = T::flip(&traces[(i + 1) % 3], &traces[(i + 2) % 3], &traces[i]);
                put(&c, &t);
                t
            }
        };
        tri[i] = new;
        traces[i] = t;
    }
    let k = tri
        .iter()
        .position(|&l| w.represents(l))
        .expect("path ends at a triangle containing the target");
    traces[k].clone()
}

/// Trace of `w`.
pub fn trace(ctx: &SurfaceContext, w: &PrimitiveClass) -> Result<TraceValue> {
    ctx.trace(w)
}

/// The Vieta partner `xy - z` of `z` across the edge labelled `x, y`.
pub fn vieta_flip(x: &TraceValue, y: &TraceValue, z: &TraceValue) -> TraceValue {
    let bits = x.precision_bits.max(y.precision_bits).max(z.precision_bits);
    match (&x.exact, &y.exact, &z.exact) {
        (Some(a), Some(b), Some(c)) => TraceValue::from_exact(Integer::flip(a, b, c), bits),
        _ => TraceValue::from_interval(&Interval::flip(&x.interval(), &y.interval(), &z.interval())),
    }
}

/// Checks the product relation `z z' = x^2 + y^2` of one edge of the tree:
/// exactly for integer labels, up to certified overlap otherwise.
pub fn fricke_product_check(x: &TraceValue, y: &TraceValue, z: &TraceValue, zp: &TraceValue) -> bool {
    match (&x.exact, &y.exact, &z.exact, &zp.exact) {
        (Some(a), Some(b), Some(c), Some(d)) => Integer::from(c * d) == Integer::from(a * a) + Integer::from(b * b),
        _ => {
            let lhs = z.interval().mul(&zp.interval());
            let rhs = x.interval().square().add(&y.interval().square());
            lhs.overlaps(&rhs)
        }
    }
}

/// Comparison of the two Fricke roots across every height-H gap.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargeRootScan {
    pub h: u64,
    pub gaps: usize,
    /// Gaps where `trace(u - v) > trace(u + v)` is certified.
    pub violations: Vec<(Vector, Vector)>,
    /// Gaps whose enclosures overlap at the base precision.
    pub undecided: usize,
}

/// Checks `trace(u + v) >= trace(u - v)` on each gap `(u, v)` of height `h`:
/// exactly on the modular torus, by certified intervals otherwise.
pub fn large_root_scan(ctx: &SurfaceContext, h: u64) -> Result<LargeRootScan> {
    let table = enumerate_classes(h)?;
    let bits = ctx.policy().base_bits;
    let mut scan = LargeRootScan {
        h,
        gaps: table.gaps.len(),
        ..Default::default()
    };
    for g in &table.gaps {
        let (u, v) = gap_endpoints(g)?;
        let (plus, minus) = ((u.0 + v.0, u.1 + v.1), (u.0 - v.0, u.1 - v.1));
        let order = match (ctx.exact_trace(plus), ctx.exact_trace(minus)) {
            (Some(a), Some(b)) => Some(a.cmp(&b)),
            _ => ctx
                .trace_interval(plus, bits)
                .cmp_certified(&ctx.trace_interval(minus, bits)),
        };
        match order {
            Some(std::cmp::Ordering::Less) => scan.violations.push((u, v)),
            Some(_) => {}
            None => scan.undecided += 1,
        }
    }
    Ok(scan)
}
