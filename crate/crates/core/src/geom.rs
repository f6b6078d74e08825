//! Small planar (xz) geometry helpers shared by bake, search and carving.

use glam::{DVec2, DVec3};

#[inline]
pub fn xz(p: DVec3) -> DVec2 {
    DVec2::new(p.x, p.z)
}

/// Twice the signed area of (o, a, b); positive when b is left of o→a.
#[inline]
pub fn cross(o: DVec2, a: DVec2, b: DVec2) -> f64 {
    (a - o).perp_dot(b - o)
}

/// Signed area of a polygon loop, positive for counter-clockwise loops.
pub fn signed_area(points: &[DVec2]) -> f64 {
    let n = points.len();
    let mut sum = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        sum += a.x * b.y - b.x * a.y;
    }
    0.5 * sum
}

pub fn is_convex_ccw(points: &[DVec2], eps: f64) -> bool {
    let n = points.len();
    if n < 3 || signed_area(points) <= 0.0 {
        return false;
    }
    (0..n).all(|i| cross(points[i], points[(i + 1) % n], points[(i + 2) % n]) > -eps)
}

/// Inclusive containment test for a counter-clockwise convex polygon, with
/// the boundary inflated by `eps`.
pub fn point_in_convex(points: &[DVec2], p: DVec2, eps: f64) -> bool {
    let n = points.len();
    (0..n).all(|i| {
        let a = points[i];
        let b = points[(i + 1) % n];
        let edge = b - a;
        let len = edge.length();
        if len == 0.0 {
            return true;
        }
        edge.perp_dot(p - a) / len >= -eps
    })
}

/// Even-odd containment test for an arbitrary simple loop.
pub fn point_in_loop(points: &[DVec2], p: DVec2) -> bool {
    let n = points.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = points[i];
        let b = points[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn closest_point_on_segment(a: DVec2, b: DVec2, p: DVec2) -> (DVec2, f64) {
    let ab = b - a;
    let len2 = ab.length_squared();
    let t = if len2 == 0.0 { 0.0 } else { ((p - a).dot(ab) / len2).clamp(0.0, 1.0) };
    (a + ab * t, t)
}

/// True when the open segments (a,b) and (c,d) properly cross or overlap.
pub fn segments_intersect(a: DVec2, b: DVec2, c: DVec2, d: DVec2) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: DVec2, q: DVec2, r: DVec2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    (d1 == 0.0 && on(c, d, a) && a != c && a != d)
        || (d2 == 0.0 && on(c, d, b) && b != c && b != d)
        || (d3 == 0.0 && on(a, b, c) && c != a && c != b)
        || (d4 == 0.0 && on(a, b, d) && d != a && d != b)
}

/// Surface height of a convex polygon at `p` (xz), interpolated over the
/// vertex fan. Returns `None` when `p` lies outside the polygon.
pub fn height_in_polygon(vertices: &[DVec3], p: DVec2, eps: f64) -> Option<f64> {
    let v0 = vertices[0];
    for i in 1..vertices.len() - 1 {
        let (a, b, c) = (xz(v0), xz(vertices[i]), xz(vertices[i + 1]));
        let area = cross(a, b, c);
        if area.abs() < 1e-18 {
            continue;
        }
        let w1 = cross(b, c, p) / area;
        let w2 = cross(c, a, p) / area;
        let w3 = cross(a, b, p) / area;
        if w1 >= -eps && w2 >= -eps && w3 >= -eps {
            return Some(w1 * v0.y + w2 * vertices[i].y + w3 * vertices[i + 1].y);
        }
    }
    None
}

/// Projects both shapes on each candidate axis and reports overlap of
/// positive length on all of them.
pub fn convex_overlap(a: &[DVec2], b: &[DVec2], eps: f64) -> bool {
    for shape in [a, b] {
        let n = shape.len();
        for i in 0..n {
            let edge = shape[(i + 1) % n] - shape[i];
            if edge.length_squared() == 0.0 {
                continue;
            }
            let axis = edge.perp().normalize();
            let (amin, amax) = project(a, axis);
            let (bmin, bmax) = project(b, axis);
            if amax.min(bmax) - amin.max(bmin) <= eps {
                return false;
            }
        }
    }
    true
}

fn project(points: &[DVec2], axis: DVec2) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.dot(axis);
        (lo.min(d), hi.max(d))
    })
}

/// Disc vs convex polygon overlap of positive area.
pub fn circle_overlaps_convex(points: &[DVec2], center: DVec2, radius: f64, eps: f64) -> bool {
    if point_in_convex(points, center, -eps) {
        return true;
    }
    let n = points.len();
    (0..n).any(|i| {
        let (q, _) = closest_point_on_segment(points[i], points[(i + 1) % n], center);
        q.distance(center) < radius - eps
    })
}
