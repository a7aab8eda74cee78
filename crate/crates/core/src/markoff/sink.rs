//! Bowditch sink descent and the trace-preserving symmetries it exposes.

use std::cmp::Ordering;

use rug::Rational;

use super::surd::{Surd, SurdField};
use super::{SurfaceContext, TraceValue};
use crate::error::{Error, Result};
use crate::farey::{add, class_of, det, flip_label, neg, PrimitiveClass, Vector, BASE_TRIANGLE};

/// Integer 2x2 matrix acting on column vectors.
pub type Mat2 = [[i64; 2]; 2];

pub fn apply(g: &Mat2, v: Vector) -> Vector {
    (g[0][0] * v.0 + g[0][1] * v.1, g[1][0] * v.0 + g[1][1] * v.1)
}

/// The triangle where every edge orientation points inward.
#[derive(Clone, Debug)]
pub struct SinkTriangle {
    pub labels: [PrimitiveClass; 3],
    /// Oriented lifts forming a Farey triangle.
    pub label_vectors: [Vector; 3],
    pub traces: [TraceValue; 3],
    /// Largest height among the labels.
    pub h0: u64,
    /// Number of flips performed.
    pub steps: u64,
}

/// Greedy descent from a labelled triangle: repeatedly flip the largest
/// label with `2x > yz` until none remains. Returns the final labels,
/// traces and the number of flips.
pub fn descend(
    field: &SurdField,
    mut tri: [Vector; 3],
    mut traces: [Surd; 3],
    budget: u64,
) -> Result<([Vector; 3], [Surd; 3], u64)> {
    let two = Rational::from(2);
    let mut steps = 0u64;
    loop {
        let mut worst: Option<usize> = None;
        for i in 0..3 {
            let (y, z) = (&traces[(i + 1) % 3], &traces[(i + 2) % 3]);
            let lhs = field.scale(&traces[i], &two);
            if field.cmp(&lhs, &field.mul(y, z)) == Ordering::Greater {
                worst = match worst {
                    Some(j) if field.cmp(&traces[j], &traces[i]) != Ordering::Less => Some(j),
                    _ => Some(i),
                };
            }
        }
        let Some(i) = worst else {
            return Ok((tri, traces, steps));
        };
        if steps >= budget {
            return Err(Error::DescentBudgetExceeded { steps });
        }
        let new = field.sub(&field.mul(&traces[(i + 1) % 3], &traces[(i + 2) % 3]), &traces[i]);
        tri[i] = flip_label(&tri, i);
        traces[i] = new;
        steps += 1;
    }
}

/// Finds the sink of the surface by descent from the base triangle.
pub fn bowditch_sink(ctx: &SurfaceContext) -> Result<SinkTriangle> {
    let field = ctx.field();
    let (tri, traces, steps) = descend(field, BASE_TRIANGLE, ctx.basis().clone(), ctx.descent_budget())?;
    let bits = ctx.policy().base_bits;
    let values = traces.clone().map(|s| {
        if ctx.is_modular() {
            let n = s.a.numer().clone();
            TraceValue::from_exact(n, bits)
        } else {
            TraceValue::from_interval(&field.enclose(&s, bits))
        }
    });
    let labels = tri.map(class_of);
    Ok(SinkTriangle {
        h0: labels.iter().map(|c| c.height()).max().unwrap_or(1),
        labels,
        label_vectors: tri,
        traces: values,
        steps,
    })
}

/// Integer-matrix symmetries of the Farey tree that preserve every trace,
/// found by permuting sink labels of exactly equal trace. Includes the
/// identity; the modular torus yields a group of order 6.
pub fn surface_symmetries(ctx: &SurfaceContext) -> Result<Vec<Mat2>> {
    let field = ctx.field();
    let (s, t, _) = descend(field, BASE_TRIANGLE, ctx.basis().clone(), ctx.descent_budget())?;
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    // s[2] = a s[0] + b s[1] with a, b in {1, -1}.
    let coeffs = |v: Vector| -> (i64, i64) {
        for a in [1, -1] {
            for b in [1, -1] {
                if (a * s[0].0 + b * s[1].0, a * s[0].1 + b * s[1].1) == v {
                    return (a, b);
                }
            }
        }
        unreachable!("labels of a Farey triangle")
    };
    let (a, b) = coeffs(s[2]);
    let d0 = det(s[0], s[1]) as i64;
    let mut out = Vec::new();
    for p in perms {
        if !(0..3).all(|i| field.eq(&t[p[i]], &t[i])) {
            continue;
        }
        for eps in [1, -1] {
            let g0 = s[p[0]];
            let g1 = (eps * s[p[1]].0, eps * s[p[1]].1);
            let img = add((a * g0.0, a * g0.1), (b * g1.0, b * g1.1));
            if img != s[p[2]] && img != neg(s[p[2]]) {
                continue;
            }
            // g = [g0 g1] * inverse([s0 s1]); the inverse is integral.
            let inv = [[s[1].1 * d0, -s[1].0 * d0], [-s[0].1 * d0, s[0].0 * d0]];
            let cols = [[g0.0, g1.0], [g0.1, g1.1]];
            let mut g = [[0i64; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    g[r][c] = cols[r][0] * inv[0][c] + cols[r][1] * inv[1][c];
                }
            }
            if !out.contains(&g) && !out.contains(&neg_mat(&g)) {
                out.push(g);
            }
        }
    }
    Ok(out)
}

fn neg_mat(g: &Mat2) -> Mat2 {
    [[-g[0][0], -g[0][1]], [-g[1][0], -g[1][1]]]
}

/// Orbit of a class under a list of symmetries, sorted.
pub fn orbit(group: &[Mat2], w: &PrimitiveClass) -> Vec<PrimitiveClass> {
    let mut out: Vec<_> = group.iter().map(|g| class_of(apply(g, w.vector()))).collect();
    out.sort();
    out.dedup();
    out
}
