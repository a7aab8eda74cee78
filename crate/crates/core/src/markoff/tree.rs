//! Walks over the Farey tree carrying trace labels.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use super::{Label, SurfaceContext};
use crate::error::{Error, Result};
use crate::farey::{class_of, vec_height, Cone, PrimitiveClass, Vector, BASE_CONES};
use crate::precision::Interval;

/// A cone of the tree with the traces of its sides and of the opposite
/// label `u - v`.
#[derive(Clone, Debug)]
pub struct ConeNode<T> {
    pub cone: Cone,
    pub xu: T,
    pub xv: T,
    pub xopp: T,
    /// Zero for the four height-1 gaps.
    pub depth: u32,
}

impl<T: Label> ConeNode<T> {
    pub fn mediant_trace(&self) -> T {
        T::flip(&self.xu, &self.xv, &self.xopp)
    }
}

/// Traces of `(1,0), (0,1), (1,1), (1,-1)` from the basis traces.
fn base_four<T: Label>(base: &[T; 3]) -> [T; 4] {
    let [x, y, z] = base.clone();
    let w = T::flip(&x, &y, &z);
    [x, y, z, w]
}

/// Depth-first walk over every cone below the four height-1 gaps. `visit`
/// receives the node and the trace of its mediant and returns whether to
/// descend into the two child cones.
pub fn walk_cones<T: Label>(base: &[T; 3], mut visit: impl FnMut(&ConeNode<T>, &T) -> bool) {
    let [x, y, z, w] = base_four(base);
    let traces = [
        (x.clone(), z.clone(), y.clone()),
        (z, y.clone(), x.clone()),
        (y.clone(), w.clone(), x.clone()),
        (w, x, y),
    ];
    let mut stack: Vec<ConeNode<T>> = BASE_CONES
        .iter()
        .zip(traces)
        .rev()
        .map(|(c, (xu, xv, xopp))| ConeNode {
            cone: *c,
            xu,
            xv,
            xopp,
            depth: 0,
        })
        .collect();
    while let Some(node) = stack.pop() {
        let xm = node.mediant_trace();
        if !visit(&node, &xm) {
            continue;
        }
        let m = node.cone.mediant();
        stack.push(ConeNode {
            cone: Cone { u: m, v: node.cone.v },
            xu: xm.clone(),
            xv: node.xv.clone(),
            xopp: node.xu.clone(),
            depth: node.depth + 1,
        });
        stack.push(ConeNode {
            cone: Cone { u: node.cone.u, v: m },
            xu: node.xu,
            xv: xm,
            xopp: node.xv,
            depth: node.depth + 1,
        });
    }
}

fn base_classes() -> [Vector; 4] {
    [(1, 0), (0, 1), (1, 1), (1, -1)]
}

/// All classes of height at most `h` with exact traces (modular only).
pub fn classes_up_to_height_exact(ctx: &SurfaceContext, h: u64) -> Result<Vec<(PrimitiveClass, Integer)>> {
    if !ctx.is_modular() {
        return Err(Error::ModularOnly);
    }
    let base = [Integer::from(3), Integer::from(3), Integer::from(3)];
    let four = base_four(&base);
    let mut out: Vec<_> = base_classes().into_iter().map(class_of).zip(four).collect();
    walk_cones(&base, |node, xm| {
        let m = node.cone.mediant();
        if vec_height(m) > h {
            return false;
        }
        out.push((class_of(m), xm.clone()));
        true
    });
    Ok(out)
}

/// All classes of height at most `h` with trace enclosures at `bits`.
pub fn classes_up_to_height_interval(ctx: &SurfaceContext, h: u64, bits: u32) -> Vec<(PrimitiveClass, Interval)> {
    let base = ctx.base_intervals(bits);
    let four = base_four(&base);
    let mut out: Vec<_> = base_classes().into_iter().map(class_of).zip(four).collect();
    walk_cones(&base, |node, xm| {
        let m = node.cone.mediant();
        if vec_height(m) > h {
            return false;
        }
        out.push((class_of(m), xm.clone()));
        true
    });
    out
}

/// All classes with trace at most `bound` (modular only).
pub fn classes_up_to_trace_exact(ctx: &SurfaceContext, bound: &Integer) -> Result<Vec<(PrimitiveClass, Integer)>> {
    if !ctx.is_modular() {
        return Err(Error::ModularOnly);
    }
    let base = [Integer::from(3), Integer::from(3), Integer::from(3)];
    let four = base_four(&base);
    let mut out: Vec<_> = base_classes()
        .into_iter()
        .map(class_of)
        .zip(four)
        .filter(|(_, t)| t <= bound)
        .collect();
    // Below the base triangle modular traces grow strictly, so a subtree
    // can be dropped as soon as its root exceeds the bound.
    walk_cones(&base, |node, xm| {
        if xm > bound {
            return false;
        }
        out.push((class_of(node.cone.mediant()), xm.clone()));
        true
    });
    Ok(out)
}

/// All classes whose trace enclosure at `bits` reaches down to `bound` or
/// below.
///
/// A subtree is dropped only once its root is certified above the bound and
/// at least as large as both parents; from there on traces grow strictly
/// along every descending path, because `x_u x_m - x_v > 2 x_m - x_v >= x_m`.
pub fn classes_up_to_trace_interval(ctx: &SurfaceContext, bound: &Float, bits: u32) -> Vec<(PrimitiveClass, Interval)> {
    let base = ctx.base_intervals(bits);
    let four = base_four(&base);
    let mut out: Vec<_> = base_classes()
        .into_iter()
        .map(class_of)
        .zip(four)
        .filter(|(_, t)| &t.lo <= bound)
        .collect();
    walk_cones(&base, |node, xm| {
        let above = &xm.lo > bound;
        let growing = xm.lo >= node.xu.hi && xm.lo >= node.xv.hi;
        if above && growing {
            return false;
        }
        if !above {
            out.push((class_of(node.cone.mediant()), xm.clone()));
        }
        true
    });
    out
}

/// A Markoff triple with the classes carrying it in the tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkoffRecord {
    /// `a <= b <= c`.
    pub triple: [Integer; 3],
    /// Classes with traces `3a, 3b, 3c`, in the same order.
    pub classes: [PrimitiveClass; 3],
}

/// JSON form of a [`MarkoffRecord`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkoffRow {
    pub a: String,
    pub b: String,
    pub c: String,
    pub classes: [[i64; 2]; 3],
}

impl MarkoffRecord {
    pub fn satisfies_equation(&self) -> bool {
        let [a, b, c] = &self.triple;
        let lhs = Integer::from(a * a) + Integer::from(b * b) + Integer::from(c * c);
        lhs == Integer::from(a * b) * c * 3u32
    }

    pub fn row(&self) -> MarkoffRow {
        MarkoffRow {
            a: self.triple[0].to_string(),
            b: self.triple[1].to_string(),
            c: self.triple[2].to_string(),
            classes: self.classes.map(|c| [c.p(), c.q()]),
        }
    }

    pub fn from_row(row: &MarkoffRow) -> Result<Self> {
        let parse = |s: &str| {
            Integer::from_str_radix(s, 10).map_err(|_| Error::InvalidInput(format!("bad Markoff entry {s:?}")))
        };
        let classes = [
            crate::farey::primitive_of(row.classes[0][0], row.classes[0][1])?,
            crate::farey::primitive_of(row.classes[1][0], row.classes[1][1])?,
            crate::farey::primitive_of(row.classes[2][0], row.classes[2][1])?,
        ];
        let rec = Self {
            triple: [parse(&row.a)?, parse(&row.b)?, parse(&row.c)?],
            classes,
        };
        if !rec.satisfies_equation() {
            return Err(Error::InvalidInput(format!(
                "({}, {}, {}) is not a Markoff triple",
                row.a, row.b, row.c
            )));
        }
        Ok(rec)
    }
}

fn record(traces: [(Integer, PrimitiveClass); 3]) -> MarkoffRecord {
    let mut t = traces;
    t.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| crate::farey::height_angle_cmp(&a.1, &b.1)));
    MarkoffRecord {
        triple: t.clone().map(|(x, _)| x / 3u32),
        classes: t.map(|(_, c)| c),
    }
}

/// Every Markoff triple with largest entry at most `max_c`, each with the
/// class labels of its first tree position, sorted by `c` then `b`.
pub fn markoff_tree(ctx: &SurfaceContext, max_c: &Integer) -> Result<Vec<MarkoffRecord>> {
    if !ctx.is_modular() {
        return Err(Error::ModularOnly);
    }
    if *max_c < 1 {
        return Err(Error::InvalidInput("max_c must be at least 1".into()));
    }
    let bound = Integer::from(max_c * 3u32);
    let three = Integer::from(3);
    let six = Integer::from(6);
    let mut found: BTreeMap<(Integer, Integer, Integer), MarkoffRecord> = BTreeMap::new();
    let mut add = |r: MarkoffRecord| {
        let key = (r.triple[2].clone(), r.triple[1].clone(), r.triple[0].clone());
        found.entry(key).or_insert(r);
    };
    let c = |v: Vector| class_of(v);
    add(record([
        (three.clone(), c((1, 0))),
        (three.clone(), c((0, 1))),
        (three.clone(), c((1, 1))),
    ]));
    if six <= bound {
        add(record([
            (three.clone(), c((1, 0))),
            (three.clone(), c((0, 1))),
            (six, c((1, -1))),
        ]));
    }
    let base = [three.clone(), three.clone(), three];
    walk_cones(&base, |node, xm| {
        if xm > &bound {
            return false;
        }
        add(record([
            (node.xu.clone(), c(node.cone.u)),
            (node.xv.clone(), c(node.cone.v)),
            (xm.clone(), c(node.cone.mediant())),
        ]));
        true
    });
    Ok(found.into_values().collect())
}

/// Writes a Markoff enumeration as JSON Lines.
pub fn write_markoff_checkpoint(path: &Path, records: &[MarkoffRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, &r.row())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads and re-verifies a Markoff checkpoint.
pub fn read_markoff_checkpoint(path: &Path) -> Result<Vec<MarkoffRecord>> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: MarkoffRow = serde_json::from_str(&line)?;
        out.push(MarkoffRecord::from_row(&row)?);
    }
    Ok(out)
}

/// Outcome of checking both Fricke relations on every edge of the tree down
/// to a depth.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeScan {
    pub edges: u64,
    pub sum_failures: u64,
    pub product_failures: u64,
    /// Edges whose walked trace disagrees with path evaluation.
    pub path_mismatches: u64,
}

/// Checks `z + z' = xy` and `z z' = x^2 + y^2` on every edge within `depth`
/// levels of the base gaps, taking `z` from path evaluation so the walk and
/// the path route are compared too (modular only).
pub fn fricke_edge_scan(ctx: &SurfaceContext, depth: u32) -> Result<EdgeScan> {
    if !ctx.is_modular() {
        return Err(Error::ModularOnly);
    }
    let base = [Integer::from(3), Integer::from(3), Integer::from(3)];
    let mut scan = EdgeScan::default();
    walk_cones(&base, |node, xm| {
        let z = ctx.exact_trace(node.cone.mediant()).expect("modular");
        scan.edges += 1;
        if &z != xm {
            scan.path_mismatches += 1;
        }
        let xy = Integer::from(&node.xu * &node.xv);
        if Integer::from(&z + &node.xopp) != xy {
            scan.sum_failures += 1;
        }
        let sq = Integer::from(node.xu.square_ref()) + Integer::from(node.xv.square_ref());
        if Integer::from(&z * &node.xopp) != sq {
            scan.product_failures += 1;
        }
        node.depth < depth
    });
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markoff::{make_surface, SurfaceSpec};
    use crate::precision::PrecisionPolicy;

    fn modular() -> SurfaceContext {
        make_surface(&SurfaceSpec::Modular, PrecisionPolicy::default()).unwrap()
    }

    fn brute_markoff(max_c: u64) -> Vec<(u64, u64, u64)> {
        let mut out = Vec::new();
        for c in 1..=max_c {
            for b in 1..=c {
                for a in 1..=b {
                    if a * a + b * b + c * c == 3 * a * b * c {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn tree_matches_brute_force() {
        let ctx = modular();
        let recs = markoff_tree(&ctx, &Integer::from(100)).unwrap();
        let got: Vec<_> = recs
            .iter()
            .map(|r| {
                (
                    r.triple[0].to_u64().unwrap(),
                    r.triple[1].to_u64().unwrap(),
                    r.triple[2].to_u64().unwrap(),
                )
            })
            .collect();
        let mut want = brute_markoff(100);
        want.sort_by_key(|&(a, b, c)| (c, b, a));
        assert_eq!(got, want);
        let nums: std::collections::BTreeSet<u64> = got.iter().flat_map(|&(a, b, c)| [a, b, c]).collect();
        assert_eq!(nums.into_iter().collect::<Vec<_>>(), vec![1, 2, 5, 13, 29, 34, 89]);
        for r in &recs {
            assert!(r.satisfies_equation());
            for (t, c) in r.triple.iter().zip(&r.classes) {
                assert_eq!(ctx.exact_trace(c.vector()).unwrap(), Integer::from(t * 3u32));
            }
        }
    }

    #[test]
    fn small_tree() {
        let recs = markoff_tree(&modular(), &Integer::from(5)).unwrap();
        let got: Vec<_> = recs
            .iter()
            .map(|r| r.triple.clone().map(|x| x.to_u64().unwrap()))
            .collect();
        assert_eq!(got, vec![[1, 1, 1], [1, 1, 2], [1, 2, 5]]);
    }

    #[test]
    fn checkpoint_round_trip() {
        let recs = markoff_tree(&modular(), &Integer::from(1000)).unwrap();
        let path = std::env::temp_dir().join(format!("mrball-markoff-{}.jsonl", std::process::id()));
        write_markoff_checkpoint(&path, &recs).unwrap();
        assert_eq!(read_markoff_checkpoint(&path).unwrap(), recs);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn edges_satisfy_fricke_relations() {
        let scan = fricke_edge_scan(&modular(), 8).unwrap();
        assert_eq!(scan.edges, 4 * ((1 << 9) - 1));
        assert_eq!(scan.sum_failures, 0);
        assert_eq!(scan.product_failures, 0);
        assert_eq!(scan.path_mismatches, 0);
    }

    #[test]
    fn height_walk_is_complete() {
        let ctx = modular();
        let got = classes_up_to_height_exact(&ctx, 15).unwrap();
        assert_eq!(got.len() as u64, crate::farey::class_count(15));
        for (c, t) in &got {
            assert_eq!(&ctx.exact_trace(c.vector()).unwrap(), t);
        }
        let iv = classes_up_to_height_interval(&ctx, 15, 128);
        assert_eq!(iv.len(), got.len());
    }

    #[test]
    fn interval_trace_walk_is_complete_off_the_sink() {
        // (3, 3, 6) has its sink one flip away from the base triangle.
        let ctx = make_surface(
            &SurfaceSpec::Triple {
                x: "3".into(),
                y: "3".into(),
                z: "6".into(),
            },
            PrecisionPolicy::default(),
        )
        .unwrap();
        let bound = Float::with_val(64, 100);
        let got = classes_up_to_trace_interval(&ctx, &bound, 128);
        let by_height = classes_up_to_height_interval(&ctx, 40, 128);
        let want: Vec<_> = by_height
            .iter()
            .filter(|(_, t)| t.lo <= bound)
            .map(|(c, _)| *c)
            .collect();
        let mut g: Vec<_> = got.iter().map(|(c, _)| *c).collect();
        g.sort();
        let mut w = want;
        w.sort();
        assert_eq!(g, w);
    }
}
