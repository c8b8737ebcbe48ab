//! Small geometric helpers on the unit sphere.

use std::f64::consts::PI;

use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

pub const NORTH: Vec3 = Vec3::new(0.0, 0.0, 1.0);
pub const SOUTH: Vec3 = Vec3::new(0.0, 0.0, -1.0);

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Signed angle from `u` to `v`, counterclockwise about `axis`.
pub fn signed_angle(u: &Vec3, v: &Vec3, axis: &Vec3) -> f64 {
    axis.dot(&u.cross(v)).atan2(u.dot(v))
}

pub fn great_circle_distance(p: &Vec3, q: &Vec3) -> f64 {
    p.cross(q).norm().atan2(p.dot(q))
}

/// Unit tangent at `at` of the great circle heading towards `to`.
pub fn heading(at: &Vec3, to: &Vec3) -> Vec3 {
    (to - at * at.dot(to)).normalize()
}

/// Distance from `x` to the minor great-circle arc `a -> b`.
pub fn distance_to_arc(x: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let n = a.cross(b);
    let nn = n.norm();
    if nn > 1e-300 {
        let n = n / nn;
        let proj = x - n * n.dot(x);
        if a.cross(&proj).dot(&n) >= 0.0 && proj.cross(b).dot(&n) >= 0.0 && proj.norm() > 0.0 {
            return n.dot(x).abs().asin();
        }
    }
    great_circle_distance(x, a).min(great_circle_distance(x, b))
}

/// Crossing of the minor arcs `p -> q` and `a -> b`, if both straddle each other.
///
/// Returns the intersection point and the unsigned crossing angle. Arcs must
/// be shorter than `pi`.
pub fn arc_crossing(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3) -> Option<(Vec3, f64)> {
    let n = p.cross(q);
    let m = a.cross(b);
    let (sa, sb) = (n.dot(a), n.dot(b));
    if (sa > 0.0) == (sb > 0.0) {
        return None;
    }
    let (sp, sq) = (m.dot(p), m.dot(q));
    if (sp > 0.0) == (sq > 0.0) {
        return None;
    }
    let mut x = n.cross(&m);
    let xn = x.norm();
    if xn == 0.0 {
        return None;
    }
    x /= xn;
    if x.dot(&(p + q)) < 0.0 {
        x = -x;
    }
    if x.dot(&(a + b)) <= 0.0 {
        return None;
    }
    let angle = great_circle_distance(&n.normalize(), &m.normalize());
    Some((x, angle.min(PI - angle)))
}

/// Spherical interpolation between unit vectors.
pub fn slerp(p: &Vec3, q: &Vec3, s: f64) -> Vec3 {
    let w = great_circle_distance(p, q);
    if w < 1e-12 {
        return (p + (q - p) * s).normalize();
    }
    let sw = w.sin();
    (p * ((1.0 - s) * w).sin() / sw + q * (s * w).sin() / sw).normalize()
}
