//! Independent oracles shared by unit tests.

use std::collections::BTreeSet;

type M = [[i128; 2]; 2];

fn mul(a: M, b: M) -> M {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Traces of Christoffel words in a free basis of the modular torus group,
/// `A = [[1,1],[1,2]]`, `B = [[1,-1],[-1,2]]`.
pub fn matrix_trace(p: i64, q: i64) -> i128 {
    let a: M = [[1, 1], [1, 2]];
    let b: M = if q >= 0 { [[1, -1], [-1, 2]] } else { [[2, 1], [1, 1]] };
    let (p, q) = (p.abs(), q.abs());
    let mut m: M = [[1, 0], [0, 1]];
    // Christoffel word of slope q/p: letter k is b iff floor((k+1)q/p)
    // exceeds floor(kq/p).
    for k in 0..(p + q) {
        let x = |k: i64| (k * q).div_euclid(p + q);
        m = mul(m, if x(k + 1) > x(k) { b } else { a });
    }
    m[0][0] + m[1][1]
}

/// Markoff numbers up to `bound`, by Vieta moves on integer triples.
pub fn markoff_numbers(bound: u64) -> BTreeSet<u64> {
    let mut out = BTreeSet::new();
    let mut stack = vec![[1u64, 1, 1]];
    let mut seen = BTreeSet::new();
    while let Some(mut t) = stack.pop() {
        t.sort();
        if !seen.insert(t) {
            continue;
        }
        out.extend(t);
        for i in 0..3 {
            let (x, y) = (t[(i + 1) % 3] as u128, t[(i + 2) % 3] as u128);
            let z = 3 * x * y - t[i] as u128;
            if z <= bound as u128 && z > t[i] as u128 {
                let mut n = t;
                n[i] = z as u64;
                stack.push(n);
            }
        }
    }
    out
}

#[test]
fn oracle_matches_basis() {
    assert_eq!(matrix_trace(1, 0), 3);
    assert_eq!(matrix_trace(0, 1), 3);
    assert_eq!(matrix_trace(1, 1), 3);
    assert_eq!(matrix_trace(2, 1), 6);
    assert_eq!(matrix_trace(1, -1), 6);
    assert_eq!(matrix_trace(3, 2), 15);
}

#[test]
fn markoff_oracle_small() {
    let m: Vec<_> = markoff_numbers(100).into_iter().collect();
    assert_eq!(m, vec![1, 2, 5, 13, 29, 34, 89]);
}
