//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

/// Pieces of the closed geodesic through `o` with primitive direction `v`
/// on the flat torus `R²/Z²`, each translated into the unit square.
fn pieces(o: [f64; 2], v: [i64; 2]) -> Vec<([f64; 2], [f64; 2])> {
    let v = [v[0] as f64, v[1] as f64];
    let mut ts = vec![0.0, 1.0];
    for axis in 0..2 {
        if v[axis] == 0.0 {
            continue;
        }
        let (a, b) = (o[axis], o[axis] + v[axis]);
        let (lo, hi) = (a.min(b).ceil() as i64, a.max(b).floor() as i64);
        for k in lo..=hi {
            let t = (k as f64 - o[axis]) / v[axis];
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let at = |t: f64| [o[0] + t * v[0], o[1] + t * v[1]];
    ts.windows(2)
        .map(|w| {
            let m = at(0.5 * (w[0] + w[1]));
            let shift = [m[0].floor(), m[1].floor()];
            let (p, q) = (at(w[0]), at(w[1]));
            (
                [p[0] - shift[0], p[1] - shift[1]],
                [q[0] - shift[0], q[1] - shift[1]],
            )
        })
        .collect()
}

fn crosses(s: ([f64; 2], [f64; 2]), t: ([f64; 2], [f64; 2])) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let d1 = orient(t.0, t.1, s.0);
    let d2 = orient(t.0, t.1, s.1);
    let d3 = orient(s.0, s.1, t.0);
    let d4 = orient(s.0, s.1, t.1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Transverse crossings of the straight closed curves of slopes `p1/q1` and
/// `p2/q2` (direction `(q, p)`) through two generic base points.
pub fn crossing_count(p1: i64, q1: i64, p2: i64, q2: i64) -> u64 {
    let a = pieces([0.123_456_7, 0.345_678_9], [q1, p1]);
    let b = pieces([0.618_034_1, 0.271_901_3], [q2, p2]);
    let mut n = 0;
    for &s in &a {
        for &t in &b {
            if crosses(s, t) {
                n += 1;
            }
        }
    }
    n
}

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}
