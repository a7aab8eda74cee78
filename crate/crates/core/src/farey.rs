//! Primitive classes of `Z^2`, Farey gaps and Stern-Brocot paths.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An oriented integer vector.
pub type Vector = (i64, i64);

/// Default cap on the number of classes `enumerate_classes` may produce.
pub const DEFAULT_CLASS_BUDGET: u64 = 10_000_000;

/// Determinant `a.0 * b.1 - a.1 * b.0`, computed without overflow.
pub fn det(a: Vector, b: Vector) -> i128 {
    a.0 as i128 * b.1 as i128 - a.1 as i128 * b.0 as i128
}

pub fn add(a: Vector, b: Vector) -> Vector {
    (a.0 + b.0, a.1 + b.1)
}

pub fn sub(a: Vector, b: Vector) -> Vector {
    (a.0 - b.0, a.1 - b.1)
}

pub fn neg(a: Vector) -> Vector {
    (-a.0, -a.1)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// A primitive homology class modulo sign.
///
/// The stored representative has `p > 0`, or `p == 0` and `q == 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimitiveClass {
    p: i64,
    q: i64,
}

impl fmt::Debug for PrimitiveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

impl fmt::Display for PrimitiveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

impl PrimitiveClass {
    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn vector(&self) -> Vector {
        (self.p, self.q)
    }

    pub fn height(&self) -> u64 {
        self.p.unsigned_abs().max(self.q.unsigned_abs())
    }

    /// The representative whose direction lies in `[0, pi)`.
    pub fn upper_lift(&self) -> Vector {
        if self.q < 0 {
            (-self.p, -self.q)
        } else {
            (self.p, self.q)
        }
    }

    /// Line angle in `[0, pi)`.
    pub fn angle(&self) -> f64 {
        let (x, y) = self.upper_lift();
        (y as f64).atan2(x as f64)
    }

    /// True when `v` is `self` or its negative.
    pub fn represents(&self, v: Vector) -> bool {
        v == (self.p, self.q) || v == (-self.p, -self.q)
    }
}

/// Canonical representative of the projective class of `(p, q)`.
pub fn primitive_of(p: i64, q: i64) -> Result<PrimitiveClass> {
    if p == 0 && q == 0 {
        return Err(Error::ZeroVector);
    }
    let g = gcd(p, q);
    let (mut p, mut q) = (p / g, q / g);
    if p < 0 || (p == 0 && q < 0) {
        p = -p;
        q = -q;
    }
    Ok(PrimitiveClass { p, q })
}

/// Canonical class of a nonzero vector already known to be primitive up to sign.
pub fn class_of(v: Vector) -> PrimitiveClass {
    primitive_of(v.0, v.1).expect("nonzero vector")
}

/// Orders vectors of the closed upper half-plane window `[0, pi)` by angle.
pub fn angular_cmp(a: Vector, b: Vector) -> Ordering {
    0.cmp(&det(a, b))
}

/// Orders classes by line angle in `[0, pi)`.
pub fn class_angle_cmp(a: &PrimitiveClass, b: &PrimitiveClass) -> Ordering {
    angular_cmp(a.upper_lift(), b.upper_lift())
}

/// Orders classes by height, then by line angle.
pub fn height_angle_cmp(a: &PrimitiveClass, b: &PrimitiveClass) -> Ordering {
    a.height().cmp(&b.height()).then_with(|| class_angle_cmp(a, b))
}

/// A Farey gap at height `H`: the open projective arc between two
/// angularly consecutive classes of height at most `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapStub {
    pub index: usize,
    pub start: PrimitiveClass,
    pub end: PrimitiveClass,
    /// The gap closes the projective circle, from the last class back to `(1,0)`.
    pub wraps: bool,
}

/// All classes of height at most `H`, in angular order, with their gaps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapTable {
    pub height_bound: u64,
    pub classes: Vec<PrimitiveClass>,
    pub gaps: Vec<GapStub>,
}

/// One row of the gap-table CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapTableRow {
    pub index: usize,
    pub p: i64,
    pub q: i64,
    pub height: u64,
    pub angle_radians: f64,
}

impl GapTable {
    pub fn rows(&self) -> Vec<GapTableRow> {
        self.classes
            .iter()
            .enumerate()
            .map(|(index, c)| GapTableRow {
                index,
                p: c.p,
                q: c.q,
                height: c.height(),
                angle_radians: c.angle(),
            })
            .collect()
    }

    /// Index of the gap whose open arc contains the class `w`, or `None`
    /// when `w` is one of the enumerated classes.
    pub fn locate(&self, w: &PrimitiveClass) -> Option<usize> {
        match self.classes.binary_search_by(|c| class_angle_cmp(c, w)) {
            Ok(_) => None,
            Err(0) => unreachable!("(1,0) is enumerated and has the smallest angle"),
            Err(i) => Some(i - 1),
        }
    }
}

/// Number of primitive classes of height at most `h` (mod sign).
pub fn class_count(h: u64) -> u64 {
    if h == 0 {
        return 0;
    }
    // Classes of height exactly n number 4 * phi(n).
    let mut phi: Vec<u64> = (0..=h).collect();
    for i in 2..=h as usize {
        if phi[i] == i as u64 {
            let mut j = i;
            while j <= h as usize {
                phi[j] -= phi[j] / i as u64;
                j += i;
            }
        }
    }
    (1..=h as usize).map(|n| 4 * phi[n]).sum::<u64>()
}

/// Enumerates all classes of height at most `h` under the default budget.
pub fn enumerate_classes(h: u64) -> Result<GapTable> {
    enumerate_classes_with_budget(h, DEFAULT_CLASS_BUDGET)
}

/// Number of classes of height at most `h`, or an error when it exceeds
/// `budget`.
pub fn check_class_budget(h: u64, budget: u64) -> Result<u64> {
    // Cheap estimate before the exact count, which itself allocates O(h).
    let rough = 12 * (h as u128) * (h as u128) / 10;
    if rough > 4 * budget as u128 {
        return Err(Error::BoundTooLarge {
            height: h,
            estimate: rough.min(u64::MAX as u128) as u64,
            budget,
        });
    }
    let count = class_count(h);
    if count > budget {
        return Err(Error::BoundTooLarge {
            height: h,
            estimate: count,
            budget,
        });
    }
    Ok(count)
}

/// Enumerates all classes of height at most `h`, refusing when the count
/// would exceed `budget`.
pub fn enumerate_classes_with_budget(h: u64, budget: u64) -> Result<GapTable> {
    if h == 0 {
        return Err(Error::InvalidInput("height bound must be at least 1".into()));
    }
    let count = check_class_budget(h, budget)?;
    let hi = h as i64;
    let mut classes = Vec::with_capacity(count as usize);
    for p in 0..=hi {
        for q in -hi..=hi {
            if (p > 0 || q == 1) && gcd(p, q) == 1 {
                classes.push(PrimitiveClass { p, q });
            }
        }
    }
    classes.sort_by(class_angle_cmp);
    let n = classes.len();
    let gaps = (0..n)
        .map(|i| GapStub {
            index: i,
            start: classes[i],
            end: classes[(i + 1) % n],
            wraps: i + 1 == n,
        })
        .collect();
    Ok(GapTable {
        height_bound: h,
        classes,
        gaps,
    })
}

/// Oriented lifts `(u, v)` of a gap's endpoints with `det(u, v) = 1`; the
/// gap is the open positive cone spanned by `u` and `v`.
pub fn gap_endpoints(gap: &GapStub) -> Result<(Vector, Vector)> {
    let u = gap.start.upper_lift();
    let v = if gap.wraps {
        neg(gap.end.upper_lift())
    } else {
        gap.end.upper_lift()
    };
    let d = det(u, v);
    if d != 1 {
        return Err(Error::DeterminantViolation { u, v, det: d });
    }
    Ok((u, v))
}

/// A neighbour `u` of `w` with `det(w, u) = 1`.
///
/// Among all such `u` (mod sign) the one of least height is chosen, then
/// least Euclidean norm, then least `u . w`.
pub fn farey_neighbor(w: &PrimitiveClass) -> PrimitiveClass {
    let (p, q) = w.vector();
    // Extended Euclid: a*p + b*q = 1, so u0 = (-b, a) has det(w, u0) = 1.
    let (mut r0, mut r1) = (p as i128, q as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    if r0 < 0 {
        s0 = -s0;
        t0 = -t0;
    }
    let u0 = (-t0, s0);
    let (p, q) = (p as i128, q as i128);
    // All solutions are u0 + k w; the best k sits near the projection.
    let ww = p * p + q * q;
    let k0 = -(u0.0 * p + u0.1 * q).div_euclid(ww);
    let key = |k: i128| {
        let u = (u0.0 + k * p, u0.1 + k * q);
        let h = u.0.abs().max(u.1.abs());
        let n = u.0 * u.0 + u.1 * u.1;
        let dot = u.0 * p + u.1 * q;
        ((h, n, dot), u)
    };
    let best = (k0 - 2..=k0 + 2)
        .map(key)
        .min_by(|a, b| a.0.cmp(&b.0))
        .expect("nonempty range")
        .1;
    class_of((best.0 as i64, best.1 as i64))
}

/// The oriented neighbour vector `u` of `w` with `det(w, u) = +1`.
pub fn farey_neighbor_vector(w: Vector) -> Vector {
    let c = farey_neighbor(&class_of(w));
    let u = c.vector();
    if det(w, u) == 1 {
        u
    } else {
        neg(u)
    }
}

/// The base triangle of the Farey tessellation.
pub const BASE_TRIANGLE: [Vector; 3] = [(1, 0), (0, 1), (1, 1)];

/// A route through the Farey tree from the base triangle to a triangle
/// having the target class as a label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SternBrocotPath {
    pub base: [PrimitiveClass; 3],
    /// Each entry is the index (0..3) of the label that gets replaced.
    pub steps: Vec<u8>,
    pub target: PrimitiveClass,
}

/// Replaces label `i` of a Farey triangle by the other root across the
/// opposite edge. Returns the new label.
pub fn flip_label(tri: &[Vector; 3], i: usize) -> Vector {
    let (a, b, c) = (tri[(i + 1) % 3], tri[(i + 2) % 3], tri[i]);
    let s = add(a, b);
    if s == c || s == neg(c) {
        sub(a, b)
    } else {
        s
    }
}

/// Computes the Stern-Brocot path to `w`.
pub fn stern_brocot_path(w: &PrimitiveClass) -> SternBrocotPath {
    let target = w.vector();
    let mut tri = BASE_TRIANGLE;
    let mut steps = Vec::new();
    while !tri.iter().any(|&l| w.represents(l)) {
        let i = (0..3)
            .find(|&i| {
                let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let n = flip_label(&tri, i);
                // The arc across edge {a, b} away from c is the double cone
                // spanned by a and the lift of b on n's side.
                let b = if n == add(a, b) { b } else { neg(b) };
                let s = det(target, b).signum();
                let t = det(a, target).signum();
                s != 0 && s == t
            })
            .expect("target lies in exactly one arc of the triangle");
        tri[i] = flip_label(&tri, i);
        steps.push(i as u8);
    }
    SternBrocotPath {
        base: BASE_TRIANGLE.map(class_of),
        steps,
        target: *w,
    }
}

impl SternBrocotPath {
    /// Successive triangles, starting with the base triangle.
    pub fn triangles(&self) -> Vec<[Vector; 3]> {
        let mut tri = BASE_TRIANGLE;
        let mut out = vec![tri];
        for &i in &self.steps {
            tri[i as usize] = flip_label(&tri, i as usize);
            out.push(tri);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A cone of the Farey tree: oriented neighbours with `det(u, v) = 1`.
/// Its children are `(u, u+v)` and `(u+v, v)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cone {
    pub u: Vector,
    pub v: Vector,
}

impl Cone {
    pub fn mediant(&self) -> Vector {
        add(self.u, self.v)
    }
}

/// The four height-1 gaps as cones. Every class of height at least 2 is the
/// mediant of exactly one cone in the subtree of exactly one of these, and
/// heights strictly increase down each subtree.
pub const BASE_CONES: [Cone; 4] = [
    Cone { u: (1, 0), v: (1, 1) },
    Cone { u: (1, 1), v: (0, 1) },
    Cone { u: (0, 1), v: (-1, 1) },
    Cone { u: (-1, 1), v: (-1, 0) },
];

/// Height of a vector.
pub fn vec_height(v: Vector) -> u64 {
    v.0.unsigned_abs().max(v.1.unsigned_abs())
}
