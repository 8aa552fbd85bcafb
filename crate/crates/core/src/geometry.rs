//! Planar polyline utilities: transversal self-intersections by a sweep over
//! x-sorted segments, and winding numbers.

use crate::model::Position;

/// Crossing of segment `i` (at parameter `s`) with segment `j > i` (at `u`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub i: usize,
    pub j: usize,
    pub s: f64,
    pub u: f64,
    pub point: Position,
}

fn cross(a: Position, b: Position) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: Position, b: Position) -> Position {
    [a[0] - b[0], a[1] - b[1]]
}

/// Parameters `(s, u)` in `[0, 1)²` where `a0 + s (a1 − a0) = b0 + u (b1 − b0)`.
/// Parallel and collinear segments report no crossing.
pub fn segment_intersection(a0: Position, a1: Position, b0: Position, b1: Position) -> Option<(f64, f64)> {
    let da = sub(a1, a0);
    let db = sub(b1, b0);
    let den = cross(da, db);
    let scale = (da[0].abs() + da[1].abs()) * (db[0].abs() + db[1].abs());
    if den.abs() <= 1e-14 * scale || scale == 0.0 {
        return None;
    }
    let w = sub(b0, a0);
    let s = cross(w, db) / den;
    let u = cross(w, da) / den;
    ((0.0..1.0).contains(&s) && (0.0..1.0).contains(&u)).then_some((s, u))
}

/// All transversal self-intersections of an open (or closed) polyline.
/// Segments sharing a vertex are not tested against each other.
pub fn polyline_self_intersections(pts: &[Position], closed: bool) -> Vec<Crossing> {
    let n = pts.len();
    if n < 3 {
        return Vec::new();
    }
    let nseg = if closed { n } else { n - 1 };
    let seg = |k: usize| (pts[k], pts[(k + 1) % n]);
    let mut order: Vec<usize> = (0..nseg).collect();
    let xmin = |k: usize| {
        let (a, b) = seg(k);
        a[0].min(b[0])
    };
    let xmax = |k: usize| {
        let (a, b) = seg(k);
        a[0].max(b[0])
    };
    order.sort_by(|&a, &b| xmin(a).total_cmp(&xmin(b)).then(a.cmp(&b)));

    let adjacent = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d <= 1 || (closed && d == nseg - 1)
    };

    let mut active: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for &k in &order {
        let x0 = xmin(k);
        active.retain(|&a| xmax(a) >= x0);
        let (a0, a1) = seg(k);
        let (ylo, yhi) = (a0[1].min(a1[1]), a0[1].max(a1[1]));
        for &o in &active {
            if adjacent(k, o) {
                continue;
            }
            let (b0, b1) = seg(o);
            if b0[1].max(b1[1]) < ylo || b0[1].min(b1[1]) > yhi {
                continue;
            }
            let (i, j) = if k < o { (k, o) } else { (o, k) };
            let (p0, p1) = seg(i);
            let (q0, q1) = seg(j);
            if let Some((s, u)) = segment_intersection(p0, p1, q0, q1) {
                out.push(Crossing {
                    i,
                    j,
                    s,
                    u,
                    point: [p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])],
                });
            }
        }
        active.push(k);
    }
    out.sort_by_key(|c| (c.i, c.j));
    out
}

/// Winding number of the closed polygon `pts` around `q`.
pub fn winding_number(pts: &[Position], q: Position) -> i32 {
    let n = pts.len();
    let mut w = 0;
    for k in 0..n {
        let a = pts[k];
        let b = pts[(k + 1) % n];
        let side = cross(sub(b, a), sub(q, a));
        if a[1] <= q[1] {
            if b[1] > q[1] && side > 0.0 {
                w += 1;
            }
        } else if b[1] <= q[1] && side < 0.0 {
            w -= 1;
        }
    }
    w
}
