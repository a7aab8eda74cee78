//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero
//! exit status if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Integer, Rational};

use mrball_core::counting::{boundary_lattice_scan, markoff_fiber, sector_direction_count, unicity_scan, SectorQuery};
use mrball_core::farey::{enumerate_classes, gap_endpoints, primitive_of, Vector};
use mrball_core::flatness::{
    construct_nonflat, flatness_profile, monte_carlo_omega, omega_hat, strictly_increasing, ContinuedFraction,
    DirectionTarget, Rate,
};
use mrball_core::markoff::{fricke_edge_scan, large_root_scan, make_surface, SurfaceContext, SurfaceSpec};
use mrball_core::normball::{boundary_point, corner_atom, corner_atoms, gap_records, length, tail_turn};
use mrball_core::precision::PrecisionPolicy;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn modular() -> SurfaceContext {
    make_surface(&SurfaceSpec::Modular, PrecisionPolicy::default()).expect("modular torus")
}

fn perturbed() -> SurfaceContext {
    let spec = SurfaceSpec::Triple {
        x: "3.1".into(),
        y: "3.0".into(),
        z: "2.914344504229022".into(),
    };
    make_surface(&spec, PrecisionPolicy::default()).expect("perturbed torus")
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

type M = [[Integer; 2]; 2];

fn mat(a: [[i64; 2]; 2]) -> M {
    a.map(|r| r.map(Integer::from))
}

fn mul(a: &M, b: &M) -> M {
    let e = |i: usize, j: usize| Integer::from(&a[i][0] * &b[0][j]) + Integer::from(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn tr(a: &M) -> Integer {
    Integer::from(&a[0][0] + &a[1][1])
}

/// Trace of the Christoffel word of `(p, q)` in the modular generators.
fn word_trace(p: i64, q: i64) -> Integer {
    let (p, q) = if p < 0 || (p == 0 && q < 0) { (-p, -q) } else { (p, q) };
    let a = mat([[1, 1], [1, 2]]);
    let b = if q >= 0 {
        mat([[1, -1], [-1, 2]])
    } else {
        mat([[2, 1], [1, 1]])
    };
    let q = q.abs();
    let mut m = mat([[1, 0], [0, 1]]);
    for k in 0..p + q {
        // Letter k is b exactly when floor((k+1) q / (p+q)) increases.
        let is_b = ((k + 1) * q) / (p + q) > (k * q) / (p + q);
        m = mul(&m, if is_b { &b } else { &a });
    }
    tr(&m)
}

/// Criterion 1: Fricke sum and product relations on every edge within
/// depth 12, and the walked traces against matrix products.
fn fricke_identities() -> Outcome {
    let ctx = modular();
    let scan = fricke_edge_scan(&ctx, 12).map_err(err)?;
    check(
        scan.sum_failures == 0 && scan.product_failures == 0 && scan.path_mismatches == 0,
        || format!("{scan:?}"),
    )?;
    // Independent walk: matrices multiply along the two cones below the base
    // triangle, W(u + v) = W(u) W(v).
    let a = mat([[1, 1], [1, 2]]);
    let b = mat([[1, -1], [-1, 2]]);
    let b_inv = mat([[2, 1], [1, 1]]);
    let mut stack: Vec<(Vector, Vector, M, M, u32)> =
        vec![((1, 0), (0, 1), a.clone(), b, 0), ((0, -1), (1, 0), b_inv, a, 0)];
    let mut edges = 0u64;
    while let Some((u, v, mu, mv, d)) = stack.pop() {
        let w = (u.0 + v.0, u.1 + v.1);
        let mw = mul(&mu, &mv);
        let (xu, xv) = (ctx.exact_trace(u).unwrap(), ctx.exact_trace(v).unwrap());
        let z = ctx.exact_trace(w).unwrap();
        let zp = ctx.exact_trace((u.0 - v.0, u.1 - v.1)).unwrap();
        check(z == tr(&mw), || format!("trace of {w:?}: {z} vs matrix {}", tr(&mw)))?;
        check(Integer::from(&z + &zp) == Integer::from(&xu * &xv), || {
            format!("sum relation at {u:?},{v:?}")
        })?;
        check(
            Integer::from(&z * &zp) == Integer::from(xu.square_ref()) + Integer::from(xv.square_ref()),
            || format!("product relation at {u:?},{v:?}"),
        )?;
        edges += 1;
        if d < 12 {
            stack.push((u, w, mu, mw.clone(), d + 1));
            stack.push((w, v, mw, mv, d + 1));
        }
    }
    Ok(format!("{} walked edges, {edges} matrix-checked edges", scan.edges))
}

/// Criterion 2: trace, length and boundary vertex anchors.
fn trace_length_anchors() -> Outcome {
    let ctx = modular();
    let c = primitive_of(3, 2).map_err(err)?;
    let t = ctx.trace(&c).map_err(err)?;
    check(t.exact == Some(Integer::from(15)), || format!("trace(3,2) = {t:?}"))?;
    check(word_trace(3, 2) == 15, || "matrix oracle disagrees".into())?;
    let l = length(&ctx, &c).map_err(err)?.to_f64();
    let oracle = 2.0 * 7.5f64.acosh();
    check((l - oracle).abs() < 1e-12 && (l - 5.40715).abs() < 1e-4, || {
        format!("length {l}")
    })?;
    let p = boundary_point(&ctx, (1, 0)).map_err(err)?;
    let (x, y) = (p[0].to_f64(), p[1].to_f64());
    check((x - 0.51952).abs() < 1e-4 && y == 0.0, || format!("vertex ({x}, {y})"))?;
    check((x - 1.0 / (2.0 * 1.5f64.acosh())).abs() < 1e-12, || {
        "vertex oracle".into()
    })?;
    Ok(format!("trace 15, length {l:.6}, vertex ({x:.6}, 0)"))
}

/// Plain floating-point corner atom at `w` with neighbour `u`, from matrix
/// traces.
fn atom_oracle(w: Vector, u: Vector) -> f64 {
    let t = |v: Vector| word_trace(v.0, v.1).to_f64();
    let lw = 2.0 * (t(w) / 2.0).acosh();
    let r = (lw / 2.0).exp();
    let a = |z: f64| (z - t(u) / r) / (r - 1.0 / r);
    let a_plus = a(t((w.0 + u.0, w.1 + u.1)));
    let a_minus = a(t((w.0 - u.0, w.1 - u.1)));
    // Solve c . w = lw, c . u = value at u.
    let solve = |at_u: f64| {
        let d = (w.0 * u.1 - w.1 * u.0) as f64;
        [
            (lw * u.1 as f64 - at_u * w.1 as f64) / d,
            (at_u * w.0 as f64 - lw * u.0 as f64) / d,
        ]
    };
    let lp = solve(2.0 * a_plus.ln());
    let lm = solve(-2.0 * a_minus.ln());
    (lp[0] * lm[1] - lp[1] * lm[0])
        .atan2(lp[0] * lm[0] + lp[1] * lm[1])
        .abs()
}

/// Criterion 3: corner atoms and the coth identity.
fn corner_atom_anchors() -> Outcome {
    let ctx = modular();
    let mut degrees = Vec::new();
    for ((p, q), expect, u) in [
        ((1, 0), 0.48579, (0, 1)),
        ((1, 1), 1.09656, (0, 1)),
        ((1, -1), 0.13305, (0, 1)),
    ] {
        let a = corner_atom(&ctx, &primitive_of(p, q).map_err(err)?)
            .map_err(err)?
            .atom
            .to_f64();
        let oracle = atom_oracle((p, q), u);
        check((a - expect).abs() <= 1e-3, || {
            format!("atom({p},{q}) = {a}, expected {expect}")
        })?;
        check((a - oracle).abs() <= 1e-9, || {
            format!("atom({p},{q}) = {a}, oracle {oracle}")
        })?;
        degrees.push(format!("{:.1}", a.to_degrees()));
    }
    let table = enumerate_classes(20).map_err(err)?;
    let atoms = corner_atoms(&ctx, &table.classes).map_err(err)?;
    let worst = atoms.iter().map(|a| a.coth_residual.to_f64()).fold(0.0, f64::max);
    check(worst <= 1e-12, || format!("coth residual {worst:e}"))?;
    Ok(format!(
        "turns {} degrees; coth residual {worst:.1e} over {} classes",
        degrees.join("/"),
        atoms.len()
    ))
}

/// Criterion 4: turn partition and the first tail value.
fn turn_partition() -> Outcome {
    let ctx = modular();
    let mut worst = 0.0f64;
    for h in 1..=8 {
        let t = tail_turn(&ctx, h).map_err(err)?;
        worst = worst.max(t.discrepancy.to_f64());
    }
    check(worst <= 1e-9, || format!("partition defect {worst:e}"))?;
    let t1 = tail_turn(&ctx, 1).map_err(err)?.from_atoms.to_f64();
    let oracle = TAU - 2.0 * (0.48579 + 0.48579 + 1.09656 + 0.13305);
    check((t1 - 1.8808).abs() <= 2e-3 && (t1 - oracle).abs() <= 2e-3, || {
        format!("tail(1) = {t1}")
    })?;
    Ok(format!("max defect {worst:.1e} for H <= 8; tail(1) = {t1:.5}"))
}

/// Least-squares slope and coefficient of determination.
fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, sxy * sxy / (sxx * syy))
}

/// Criterion 5: exponential decay of the tail turn.
fn exponential_tail() -> Outcome {
    let start = Instant::now();
    let ctx = make_surface(&SurfaceSpec::Modular, PrecisionPolicy::with_base_bits(512)).map_err(err)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for h in 4..=14 {
        let t = tail_turn(&ctx, h).map_err(err)?;
        xs.push(h as f64);
        ys.push(t.from_atoms.to_f64().ln());
    }
    let (slope, r2) = fit(&xs, &ys);
    let elapsed = start.elapsed();
    check(slope < 0.0 && r2 >= 0.9, || format!("slope {slope}, R^2 {r2}"))?;
    check(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("slope {slope:.4}, R^2 {r2:.4}"))
}

/// Criterion 6: the mediant carries the larger Fricke root.
fn large_root() -> Outcome {
    let ctx = modular();
    let mut gaps = 0;
    for h in 1..=12 {
        let s = large_root_scan(&ctx, h).map_err(err)?;
        check(s.violations.is_empty() && s.undecided == 0, || format!("H={h}: {s:?}"))?;
        // Direct exact comparison over the same gaps.
        for g in &enumerate_classes(h).map_err(err)?.gaps {
            let (u, v) = gap_endpoints(g).map_err(err)?;
            let plus = word_trace(u.0 + v.0, u.1 + v.1);
            let minus = word_trace(u.0 - v.0, u.1 - v.1);
            check(plus >= minus, || format!("H={h}: {u:?}, {v:?}"))?;
        }
        gaps += s.gaps;
    }
    Ok(format!("{gaps} gaps over H = 1..12"))
}

/// Criterion 7: endpoint defect against `100 e^{-|u| - |v|}`.
fn endpoint_estimate() -> Outcome {
    let ctx = modular();
    let mut max_ratio = 0.0f64;
    let mut count = 0;
    for h in 1..=12 {
        let table = enumerate_classes(h).map_err(err)?;
        for g in gap_records(&ctx, &table).map_err(err)? {
            let lu = 2.0 * (word_trace(g.u.0, g.u.1).to_f64() / 2.0).acosh();
            let lv = 2.0 * (word_trace(g.v.0, g.v.1).to_f64() / 2.0).acosh();
            let ratio = g.endpoint_defect.to_f64() / (-lu - lv).exp();
            max_ratio = max_ratio.max(ratio);
            count += 1;
        }
    }
    check(max_ratio <= 100.0, || format!("max ratio {max_ratio}"))?;
    Ok(format!("max defect ratio {max_ratio:.4} over {count} gaps"))
}

/// Markoff numbers up to `bound` by Vieta moves on ordered triples.
fn markoff_numbers(bound: u64) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    let mut stack = vec![(1u64, 1u64, 1u64)];
    let mut seen = BTreeSet::new();
    while let Some((a, b, c)) = stack.pop() {
        let mut t = [a, b, c];
        t.sort_unstable();
        if t[2] > bound || !seen.insert(t) {
            continue;
        }
        out.extend(t);
        let [x, y, z] = t;
        stack.push((y, z, 3 * y * z - x));
        stack.push((x, z, 3 * x * z - y));
        stack.push((x, y, 3 * x * y - z));
    }
    out
}

/// Criterion 8: fiber sizes up to 10^6 and the unicity exit code.
fn fibers_and_unicity() -> Outcome {
    let ctx = modular();
    let scan = unicity_scan(&ctx, &Integer::from(1_000_000)).map_err(err)?;
    let labels: BTreeSet<u64> = scan.fibers.iter().map(|f| f.m.to_u64().unwrap()).collect();
    check(labels == markoff_numbers(1_000_000), || {
        "labels differ from Vieta oracle".into()
    })?;
    for f in &scan.fibers {
        let expect = if f.m <= 2 { 3 } else { 6 };
        check(f.size == expect, || format!("fiber({}) has {} classes", f.m, f.size))?;
    }
    check(!scan.unicity_violation && scan.max_bound_ratio.is_finite(), || {
        "scan flags".into()
    })?;
    let f5 = markoff_fiber(&ctx, &Integer::from(5)).map_err(err)?;
    let points: BTreeSet<Vector> = f5.classes.iter().flat_map(|c| [c.vector(), (-c.p(), -c.q())]).collect();
    check(f5.size == 6 && points.len() == 12, || {
        format!("fiber(5): {:?}", f5.classes)
    })?;
    let mut out = Vec::new();
    let code = mrball_cli::run_with_output(["mrball", "fibers", "--max-markoff", "1000000"], &mut out);
    check(code == 0, || format!("fibers exited with {code}"))?;
    Ok(format!(
        "{} fibers, max bound ratio {:.4}, fiber(5) = 12 points",
        scan.fibers.len(),
        scan.max_bound_ratio
    ))
}

fn mobius(n: i64) -> i64 {
    let (mut n, mut sign, mut p) = (n, 1, 2);
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        -sign
    } else {
        sign
    }
}

/// Primitive vectors in the sector by Mobius inversion over all nonzero
/// lattice points, with a cross-product direction test.
fn sector_oracle(q: &SectorQuery) -> u64 {
    let w = q.theta_hi - q.theta_lo;
    let (el, eh) = (
        (q.theta_lo.cos(), q.theta_lo.sin()),
        (q.theta_hi.cos(), q.theta_hi.sin()),
    );
    let cross = |a: (f64, f64), b: (f64, f64)| a.0 * b.1 - a.1 * b.0;
    let inside = |x: i64, y: i64| {
        let v = (x as f64, y as f64);
        if w >= TAU {
            true
        } else if w < PI {
            cross(el, v) >= 0.0 && cross(v, eh) >= 0.0
        } else {
            !(cross(eh, v) > 0.0 && cross(v, el) > 0.0)
        }
    };
    let n = q.r.floor() as i64;
    let r2 = q.r * q.r;
    let mut total = 0i64;
    for d in 1..=n {
        let mu = mobius(d);
        if mu == 0 {
            continue;
        }
        let m = n / d;
        let mut count = 0;
        for x in -m..=m {
            for y in -m..=m {
                if (x, y) != (0, 0) && ((d * x).pow(2) + (d * y).pow(2)) as f64 <= r2 && inside(x, y) {
                    count += 1;
                }
            }
        }
        total += mu * count;
    }
    total as u64
}

/// Criterion 9: random sector queries against the bound and the oracle.
fn jarnik_sectors() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..1000 {
        let lo = rng.random::<f64>() * TAU;
        let width = rng.random::<f64>() * TAU;
        let r = 1.0 + rng.random::<f64>() * 49.0;
        let q = SectorQuery::new(lo, lo + width, r).map_err(err)?;
        let count = sector_direction_count(&q).map_err(err)?;
        check(count as f64 <= q.bound(), || {
            format!("query {i}: {count} > {}", q.bound())
        })?;
        let oracle = sector_oracle(&q);
        check(count == oracle, || {
            format!("query {i} {q:?}: {count} vs oracle {oracle}")
        })?;
        worst = worst.max(count as f64 - q.bound());
    }
    Ok(format!("1000 queries, max count - bound = {worst:.2}"))
}

/// Criterion 10: multiplicity scans.
fn multiplicity_scans() -> Outcome {
    let m = boundary_lattice_scan(&modular(), 200).map_err(err)?;
    check(m.max_multiplicity == 6 && !m.unicity_violation, || {
        format!("modular max {}", m.max_multiplicity)
    })?;
    let p = boundary_lattice_scan(&perturbed(), 100).map_err(err)?;
    check(p.max_multiplicity <= 2, || {
        format!("perturbed max {}", p.max_multiplicity)
    })?;
    Ok(format!(
        "modular H=200 max 6 over {} levels; perturbed H=100 max {} with {} overlap clusters",
        m.levels.len(),
        p.max_multiplicity,
        p.overlap_clusters.len()
    ))
}

/// Criterion 11: flatness diagnostics.
fn flatness() -> Outcome {
    let ctx = modular();
    let golden = flatness_profile(&ctx, &DirectionTarget::golden(), 8).map_err(err)?;
    let orders: Vec<f64> = golden.rows.iter().map(|r| r.order).collect();
    check(orders.len() == 9 && strictly_increasing(&orders), || {
        format!("golden orders {orders:?}")
    })?;

    let prefix = ContinuedFraction::from_u64(0, &[1]).map_err(err)?;
    let a1 = construct_nonflat(&Rate::Fixed(Rational::from(1)), 3, &prefix).map_err(err)?;
    let beta = DirectionTarget::constructed("rate 1", &a1);
    let mut least = f64::INFINITY;
    // Windows holding the denominators 3 and 22, whose successors were built.
    for h in [4, 6, 22, 44] {
        let o = omega_hat(&beta, h).map_err(err)?;
        least = least.min(o.value);
        check(o.value >= 0.9, || format!("rate 1 exponent at H={h}: {}", o.value))?;
    }

    let growing = construct_nonflat(&Rate::Growing, 2, &prefix).map_err(err)?;
    let beta = DirectionTarget::constructed("growing", &growing);
    let p = flatness_profile(&ctx, &beta, 8).map_err(err)?;
    let probes: Vec<f64> = p.rows.iter().filter(|r| r.constructed).map(|r| r.probe_order).collect();
    check(!probes.is_empty() && probes.iter().all(|&o| o <= 2.5), || {
        format!("growing probe orders {probes:?}")
    })?;
    Ok(format!(
        "golden orders {:.2}..{:.2}; rate-1 exponent >= {least:.3}; growing-rate orders {probes:.3?}",
        orders[0], orders[8]
    ))
}

/// Criterion 12: random directions become flat as H grows.
fn monte_carlo() -> Outcome {
    let a = monte_carlo_omega(1000, 30, 7).map_err(err)?;
    let b = monte_carlo_omega(1000, 60, 7).map_err(err)?;
    // Index 1 is the threshold 0.2.
    check(b.fractions[1] < a.fractions[1], || {
        format!("{:?} vs {:?}", a.fractions, b.fractions)
    })?;
    Ok(format!(
        "fraction above 0.2: {} at H=30, {} at H=60",
        a.fractions[1], b.fractions[1]
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("fricke identities", fricke_identities),
        ("trace and length anchors", trace_length_anchors),
        ("corner atoms", corner_atom_anchors),
        ("turn partition", turn_partition),
        ("exponential tail", exponential_tail),
        ("large root", large_root),
        ("endpoint estimate", endpoint_estimate),
        ("fibers and unicity", fibers_and_unicity),
        ("jarnik sectors", jarnik_sectors),
        ("multiplicity scans", multiplicity_scans),
        ("flatness", flatness),
        ("monte carlo", monte_carlo),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        // The first criterion carries its own time limit.
        let outcome = match outcome {
            Ok(d) if i == 0 && secs >= 5.0 => Err(format!("{d}; took {secs:.2}s")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
