#![allow(dead_code)]

use std::f64::consts::PI;

use geophase::frames::{regularize, DEFAULT_EPSILON};
use geophase::motion::{build_path, MotionPath, MotionSpec, Radii, SegmentSpec};
use geophase::region::{is_simple, DEFAULT_SIMPLE_TOL};
use rand::Rng;

const BETA_MIN: f64 = 0.25;

fn durations<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..count).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Closed chain through `vertices` (the first vertex repeated at the end is implied).
fn chain(vertices: &[(f64, f64)], end: (f64, f64), radii: Radii, durations: &[f64]) -> MotionSpec {
    let mut segments = Vec::with_capacity(vertices.len());
    let mut t0 = 0.0;
    for (k, &(theta, beta)) in vertices.iter().enumerate() {
        let next = vertices.get(k + 1).copied().unwrap_or(end);
        let t1 = if k + 1 == vertices.len() { 1.0 } else { t0 + durations[k] };
        let d = t1 - t0;
        segments.push(SegmentSpec::affine(t0, t1, theta, (next.0 - theta) / d, beta, (next.1 - beta) / d));
        t0 = t1;
    }
    MotionSpec { radii, segments }
}

/// A star-shaped polygon in the angle chart, making no laps.
pub fn random_polygon<R: Rng>(rng: &mut R, count: usize, radii: Radii) -> MotionSpec {
    let r_beta = rng.random_range(0.3..0.9);
    let center_beta = rng.random_range(BETA_MIN + r_beta..PI - BETA_MIN - r_beta);
    let r_theta = rng.random_range(0.4..1.3);
    let mut angles: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    angles.sort_by(f64::total_cmp);
    if rng.random_bool(0.5) {
        angles.reverse();
    }
    let mut vertices: Vec<(f64, f64)> = angles
        .iter()
        .map(|a| {
            let s = rng.random_range(0.35..1.0);
            (r_theta * s * a.cos(), center_beta + r_beta * s * a.sin())
        })
        .collect();
    let shift = vertices[0].0;
    for v in &mut vertices {
        v.0 -= shift;
    }
    let first = vertices[0];
    chain(&vertices, first, radii, &durations(rng, count))
}

/// A motion monotone in the lap angle, making one lap in direction `sign`.
pub fn random_lap<R: Rng>(rng: &mut R, count: usize, sign: f64, radii: Radii) -> MotionSpec {
    let mut stops: Vec<f64> = (1..count).map(|_| rng.random_range(0.05..0.95)).collect();
    stops.sort_by(f64::total_cmp);
    let beta0 = rng.random_range(BETA_MIN..PI - BETA_MIN);
    let mut vertices = vec![(0.0, beta0)];
    for s in stops {
        vertices.push((sign * 2.0 * PI * s, rng.random_range(BETA_MIN..PI - BETA_MIN)));
    }
    chain(&vertices, (sign * 2.0 * PI, beta0), radii, &durations(rng, count))
}

/// Random closed piecewise-affine motion with 3 to 8 segments whose curve of normals is simple.
pub fn random_closed_motion<R: Rng>(rng: &mut R) -> MotionPath {
    loop {
        let count = rng.random_range(3..=8);
        let radii = Radii::new(rng.random_range(0.5..3.0), rng.random_range(0.3..2.0)).unwrap();
        let spec = if rng.random_bool(0.5) {
            random_polygon(rng, count, radii)
        } else {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            random_lap(rng, count, sign, radii)
        };
        let Ok(path) = build_path(&spec) else { continue };
        let curve = regularize(&path, DEFAULT_EPSILON, 16).unwrap();
        if is_simple(&curve, DEFAULT_SIMPLE_TOL).unwrap_or(false) {
            return path;
        }
    }
}
