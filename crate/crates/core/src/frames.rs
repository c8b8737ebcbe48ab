//! Gauss map, moving frames and the pole-avoiding sampled curve of disc normals.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::motion::{MotionPath, Segment};
use crate::sphere::{great_circle_distance, heading, signed_angle, wrap_angle, Vec3};

/// Largest angular spacing between neighbouring samples.
pub const MAX_SPACING: f64 = 1e-3;
pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 16;
/// Junctions turning by more than this are cusps.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-9;
pub const DEFAULT_EPSILON: f64 = PI / 16.0;
const MIN_ARC_DURATION: f64 = 1e-14;

/// Extrapolate a quantity sampled at clamp levels `eps` and `eps / 2` to zero clamp.
///
/// The clamp enters through `cos(eps)`, so the extrapolation is linear in `1 - cos(eps)`.
pub fn extrapolate_epsilon(eps: f64, at_eps: f64, at_half: f64) -> f64 {
    let c = |x: f64| 1.0 - x.cos();
    at_eps - (at_eps - at_half) * c(eps) / (c(eps) - c(0.5 * eps))
}

/// Unit normal of the rolling disc for azimuth `theta` and tilt `beta`.
pub fn gauss_vector(theta: f64, beta: f64) -> Vec3 {
    let (sb, cb) = beta.sin_cos();
    let (st, ct) = theta.sin_cos();
    Vec3::new(sb * ct, sb * st, -cb)
}

/// Orthonormal frame with `e3` the disc normal, `e1` along increasing `theta`
/// and `e2` along increasing `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

pub fn gauss_frame(theta: f64, beta: f64) -> Frame {
    let (sb, cb) = beta.sin_cos();
    let (st, ct) = theta.sin_cos();
    Frame {
        e1: Vec3::new(-st, ct, 0.0),
        e2: Vec3::new(cb * ct, cb * st, sb),
        e3: Vec3::new(sb * ct, sb * st, -cb),
    }
}

/// Connection one-forms `w_ij = de_i . e_j` evaluated on a direction `(dtheta, dbeta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConnectionForms {
    pub w12: f64,
    pub w13: f64,
    pub w23: f64,
}

pub fn connection_forms(_theta: f64, beta: f64, dtheta: f64, dbeta: f64) -> ConnectionForms {
    ConnectionForms {
        w12: -beta.cos() * dtheta,
        w13: -beta.sin() * dtheta,
        w23: -dbeta,
    }
}

/// The same forms from central differences of the frame, step `1e-6`.
pub fn connection_forms_numeric(theta: f64, beta: f64, dtheta: f64, dbeta: f64) -> ConnectionForms {
    let h = 1e-6;
    let f = gauss_frame(theta, beta);
    let fp = gauss_frame(theta + h * dtheta, beta + h * dbeta);
    let fm = gauss_frame(theta - h * dtheta, beta - h * dbeta);
    let d1 = (fp.e1 - fm.e1) / (2.0 * h);
    let d2 = (fp.e2 - fm.e2) / (2.0 * h);
    ConnectionForms { w12: d1.dot(&f.e2), w13: d1.dot(&f.e3), w23: d2.dot(&f.e3) }
}

/// A smooth piece of the clamped curve on which both angles are affine in `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub t0: f64,
    pub t1: f64,
    pub theta0: f64,
    pub theta_rate: f64,
    pub beta0: f64,
    pub beta_rate: f64,
    /// Index of the first sample on this arc.
    pub first: usize,
    /// Index of the last sample on this arc.
    pub last: usize,
}

impl Arc {
    fn from_segment(s: &Segment) -> Arc {
        Arc {
            t0: s.t0,
            t1: s.t1,
            theta0: s.theta0,
            theta_rate: s.theta_rate,
            beta0: s.beta0,
            beta_rate: s.beta_rate,
            first: 0,
            last: 0,
        }
    }

    pub fn theta(&self, t: f64) -> f64 {
        self.theta0 + self.theta_rate * (t - self.t0)
    }

    pub fn beta(&self, t: f64) -> f64 {
        self.beta0 + self.beta_rate * (t - self.t0)
    }

    pub fn point(&self, t: f64) -> Vec3 {
        gauss_vector(self.theta(t), self.beta(t))
    }

    /// Time derivative of the normal.
    pub fn velocity(&self, t: f64) -> Vec3 {
        let f = gauss_frame(self.theta(t), self.beta(t));
        f.e1 * (self.beta(t).sin() * self.theta_rate) + f.e2 * self.beta_rate
    }

    pub fn tangent(&self, t: f64) -> Vec3 {
        self.velocity(t).normalize()
    }

    /// Angle of the tangent measured from `e1` towards `e2`.
    pub fn tangent_angle(&self, t: f64) -> f64 {
        self.beta_rate.atan2(self.beta(t).sin() * self.theta_rate)
    }

    /// Upper bound on the angular distance the normal travels along the arc.
    fn length_bound(&self) -> f64 {
        let (b0, b1) = (self.beta(self.t0), self.beta(self.t1));
        let max_sin = if (b0 - PI / 2.0) * (b1 - PI / 2.0) <= 0.0 {
            1.0
        } else {
            b0.sin().max(b1.sin())
        };
        (max_sin * self.theta_rate).hypot(self.beta_rate) * (self.t1 - self.t0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Arc length from the start of the curve.
    pub s: f64,
    pub theta: f64,
    /// Clamped tilt.
    pub beta: f64,
    pub g: Vec3,
    /// Unwrapped tangent angle; at a junction this is the incoming value.
    pub phi: f64,
    pub kappa_g: f64,
    /// Discrete turning booked on this sample's dual cell.
    pub turning: f64,
}

impl Sample {
    pub fn frame(&self) -> Frame {
        gauss_frame(self.theta, self.beta)
    }
}

/// Where two arcs meet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Junction {
    pub index: usize,
    pub t: f64,
    /// Signed turn from the incoming to the outgoing tangent, in `(-pi, pi]`.
    pub alpha: f64,
}

/// A cusp of the clamped curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cusp {
    pub t: f64,
    pub alpha: f64,
}

/// The sampled curve of disc normals with tilt clamped to `[epsilon, pi - epsilon]`.
#[derive(Debug, Clone)]
pub struct RegularizedCurve {
    epsilon: f64,
    samples: Vec<Sample>,
    arcs: Vec<Arc>,
    junctions: Vec<Junction>,
    angle_tol: f64,
    total_length: f64,
    closed: bool,
    phi_winding: f64,
}

/// Clamp levels must lie in `(0, pi/8)`.
pub fn validate_epsilon(epsilon: f64) -> Result<f64> {
    if epsilon > 0.0 && epsilon < PI / 8.0 {
        Ok(epsilon)
    } else {
        Err(GeoError::EpsilonOutOfRange(epsilon))
    }
}

/// Sample the clamped curve of normals.
pub fn regularize(path: &MotionPath, epsilon: f64, samples_per_segment: usize) -> Result<RegularizedCurve> {
    RegularizedCurve::build(path, epsilon, samples_per_segment, DEFAULT_ANGLE_TOL)
}

impl RegularizedCurve {
    pub fn build(path: &MotionPath, epsilon: f64, samples_per_segment: usize, angle_tol: f64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        let mut arcs: Vec<Arc> = path
            .clamped_segments(epsilon, PI - epsilon)
            .iter()
            .filter(|s| !s.is_stationary() && s.duration() >= MIN_ARC_DURATION)
            .map(Arc::from_segment)
            .collect();
        if arcs.is_empty() {
            return Err(GeoError::DegenerateCurve);
        }

        let mut samples: Vec<Sample> = Vec::new();
        let mut raw_steps: Vec<f64> = Vec::new();
        let mut total_length = 0.0;
        for (k, arc) in arcs.iter_mut().enumerate() {
            let mut m = ((arc.length_bound() / MAX_SPACING).ceil() as usize).max(samples_per_segment.max(2));
            m += m % 2;
            let dt = (arc.t1 - arc.t0) / m as f64;
            let start = if k == 0 { 0 } else { 1 };
            arc.first = if k == 0 { 0 } else { samples.len() - 1 };
            for j in start..=m {
                let t = if j == m { arc.t1 } else { arc.t0 + dt * j as f64 };
                let (theta, beta) = (arc.theta(t), arc.beta(t));
                samples.push(Sample {
                    t,
                    s: 0.0,
                    theta,
                    beta,
                    g: gauss_vector(theta, beta),
                    phi: 0.0,
                    kappa_g: 0.0,
                    turning: 0.0,
                });
            }
            arc.last = samples.len() - 1;

            // arc length: great-circle chords with one Richardson step
            let pts = &samples[arc.first..=arc.last];
            let steps: Vec<f64> = pts.windows(2).map(|w| great_circle_distance(&w[0].g, &w[1].g)).collect();
            let fine: f64 = steps.iter().sum();
            let coarse: f64 = pts
                .iter()
                .step_by(2)
                .collect::<Vec<_>>()
                .windows(2)
                .map(|w| great_circle_distance(&w[0].g, &w[1].g))
                .sum();
            let length = fine + (fine - coarse) / 3.0;
            let scale = if fine > 0.0 { length / fine } else { 1.0 };
            let mut s = total_length;
            for (i, h) in steps.iter().enumerate() {
                s += h * scale;
                samples[arc.first + i + 1].s = s;
            }
            total_length += length;
            raw_steps.extend_from_slice(&steps);
        }

        let n = samples.len();
        let closed = path.is_closed() && (samples[n - 1].g - samples[0].g).norm() < 1e-9;

        // turning on interior samples
        for arc in &arcs {
            for i in arc.first + 1..arc.last {
                let g = samples[i].g;
                let u = -heading(&g, &samples[i - 1].g);
                let v = heading(&g, &samples[i + 1].g);
                samples[i].turning = signed_angle(&u, &v, &g);
            }
        }
        // endpoint halves, with the analytic arc tangents
        let mut end_turn = vec![(0.0, 0.0); arcs.len()];
        for (k, arc) in arcs.iter().enumerate() {
            let g0 = samples[arc.first].g;
            let start = signed_angle(&arc.tangent(arc.t0), &heading(&g0, &samples[arc.first + 1].g), &g0);
            let g1 = samples[arc.last].g;
            let end = signed_angle(&-heading(&g1, &samples[arc.last - 1].g), &arc.tangent(arc.t1), &g1);
            end_turn[k] = (start, end);
        }

        let mut junctions = Vec::new();
        let mut junction_alpha = |index: usize, t: f64, before: &Arc, after: &Arc, g: &Vec3| {
            let alpha = wrap_angle(signed_angle(&before.tangent(before.t1), &after.tangent(after.t0), g));
            junctions.push(Junction { index, t, alpha });
            alpha
        };
        for k in 0..arcs.len() {
            let (start, _) = end_turn[k];
            samples[arcs[k].first].turning += start;
            if k + 1 < arcs.len() {
                let idx = arcs[k].last;
                samples[idx].turning += end_turn[k].1;
                let g = samples[idx].g;
                let alpha = junction_alpha(idx, samples[idx].t, &arcs[k], &arcs[k + 1], &g);
                if alpha.abs() <= angle_tol {
                    samples[idx].turning += alpha;
                }
            }
        }
        let last_arc = arcs[arcs.len() - 1];
        if closed {
            samples[0].turning += end_turn[arcs.len() - 1].1;
            let g = samples[0].g;
            let alpha = junction_alpha(0, samples[0].t, &last_arc, &arcs[0], &g);
            if alpha.abs() <= angle_tol {
                samples[0].turning += alpha;
            }
        } else {
            samples[n - 1].turning += end_turn[arcs.len() - 1].1;
        }

        // curvature from turning over dual cells
        for i in 0..n {
            let prev = if i > 0 {
                raw_steps[i - 1]
            } else if closed {
                raw_steps[n - 2]
            } else {
                0.0
            };
            let next = if i + 1 < n { raw_steps[i] } else { 0.0 };
            let cell = if closed && i == n - 1 { 0.0 } else { 0.5 * (prev + next) };
            samples[i].kappa_g = if cell > 0.0 { samples[i].turning / cell } else { 0.0 };
        }
        if closed {
            samples[n - 1].kappa_g = samples[0].kappa_g;
        }

        // tangent angle, unwrapped along each arc and jumping by alpha at junctions
        let mut phi = arcs[0].tangent_angle(arcs[0].t0);
        let mut winding = 0.0;
        let mut ji = 0;
        for (k, arc) in arcs.iter().enumerate() {
            if k > 0 {
                phi += junctions[ji].alpha;
                winding += junctions[ji].alpha;
                ji += 1;
            }
            let start_phi = phi;
            let mut raw_prev = arc.tangent_angle(arc.t0);
            for i in arc.first..=arc.last {
                let t = if i == arc.first { arc.t0 } else if i == arc.last { arc.t1 } else { samples[i].t };
                let raw = arc.tangent_angle(t);
                phi += wrap_angle(raw - raw_prev);
                raw_prev = raw;
                if i > arc.first || k == 0 {
                    samples[i].phi = phi;
                }
            }
            winding += phi - start_phi;
        }
        if closed {
            winding += junctions[junctions.len() - 1].alpha;
        }

        Ok(RegularizedCurve {
            epsilon,
            samples,
            arcs,
            junctions,
            angle_tol,
            total_length,
            closed,
            phi_winding: winding,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Cusps at the tolerance the curve was built with.
    pub fn cusps(&self) -> Vec<Cusp> {
        detect_cusps(self, self.angle_tol)
    }

    fn is_cusp_sample(&self, index: usize) -> bool {
        let last = self.samples.len() - 1;
        self.junctions.iter().any(|j| {
            j.alpha.abs() > self.angle_tol && (j.index == index || (self.closed && j.index == 0 && index == last))
        })
    }

    /// Integral of the geodesic curvature over the smooth parts.
    pub fn curvature_integral(&self) -> f64 {
        self.samples.iter().map(|s| s.turning).sum()
    }

    /// Sum of the external angles at the cusps.
    pub fn cusp_angle_sum(&self) -> f64 {
        self.cusps().iter().map(|c| c.alpha).sum()
    }

    /// Total change of the tangent angle around the curve, cusp jumps included.
    pub fn phi_winding(&self) -> f64 {
        self.phi_winding
    }

    /// Unit tangent at a sample; junction samples take the incoming arc's tangent.
    pub fn tangent_at(&self, index: usize) -> Vec3 {
        let arc = self.arcs.iter().find(|a| index >= a.first && index <= a.last).expect("index in range");
        arc.tangent(if index == arc.last { arc.t1 } else { self.samples[index].t })
    }

    /// Smoothly-varying curvature at a sample from second differences in arc length.
    pub fn geodesic_curvature_at(&self, index: usize) -> Result<f64> {
        geodesic_curvature_at(self, index)
    }

    /// Euclidean length of the curve pushed a distance `q` along its right normal.
    pub fn offset_length(&self, q: f64) -> Result<f64> {
        offset_length(self, q)
    }
}

/// Junctions whose external angle exceeds `angle_tol` in magnitude.
pub fn detect_cusps(curve: &RegularizedCurve, angle_tol: f64) -> Vec<Cusp> {
    curve
        .junctions
        .iter()
        .filter(|j| j.alpha.abs() > angle_tol)
        .map(|j| Cusp { t: j.t, alpha: j.alpha })
        .collect()
}

pub fn geodesic_curvature_at(curve: &RegularizedCurve, index: usize) -> Result<f64> {
    let n = curve.samples.len();
    if index >= n {
        return Err(GeoError::NotInterior(index));
    }
    if curve.is_cusp_sample(index) {
        return Err(GeoError::AtCusp(index));
    }
    let (prev, cur, next) = if index == 0 || index == n - 1 {
        if !curve.closed {
            return Err(GeoError::NotInterior(index));
        }
        (n - 2, 0, 1)
    } else {
        (index - 1, index, index + 1)
    };
    let (gp, gc, gn) = (curve.samples[prev].g, curve.samples[cur].g, curve.samples[next].g);
    let h1 = great_circle_distance(&gp, &gc);
    let h2 = great_circle_distance(&gc, &gn);
    let second = ((gn - gc) / h2 - (gc - gp) / h1) * (2.0 / (h1 + h2));
    let chord = gn - gp;
    let tangent = (chord - gc * gc.dot(&chord)).normalize();
    let normal = gc.cross(&tangent);
    Ok(second.dot(&normal))
}

/// Length in space of `g - q nu`, with `nu = g x T` the left normal.
pub fn offset_length(curve: &RegularizedCurve, q: f64) -> Result<f64> {
    let cusps = curve.cusps().len();
    if cusps > 0 {
        return Err(GeoError::CurveHasCusps(cusps));
    }
    let mut total = 0.0;
    for arc in &curve.arcs {
        let pts: Vec<Vec3> = (arc.first..=arc.last)
            .map(|i| {
                let t = if i == arc.first {
                    arc.t0
                } else if i == arc.last {
                    arc.t1
                } else {
                    curve.samples[i].t
                };
                let g = curve.samples[i].g;
                g - g.cross(&arc.tangent(t)) * q
            })
            .collect();
        let fine: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let coarse: f64 = pts
            .iter()
            .step_by(2)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .sum();
        total += fine + (fine - coarse) / 3.0;
    }
    Ok(total)
}

/// Derivative of [`offset_length`] at `q = 0`, by Richardson-extrapolated central differences.
pub fn offset_length_derivative(curve: &RegularizedCurve) -> Result<f64> {
    let h = 1e-3;
    let d = |h: f64| -> Result<f64> { Ok((offset_length(curve, h)? - offset_length(curve, -h)?) / (2.0 * h)) };
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
