//! Brute-force rigid-body simulation of the rolling disc.
//!
//! The disc's angular velocity is solved from the kinematic constraints alone
//! (its normal follows the motion, its contact point does not slip) and the
//! orientation is integrated step by step. The rotation angle is the spin
//! accumulated about the disc normal, `-∫ ω·g dt`.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Rotation3, SMatrix, SVector};
use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::frames::{gauss_frame, gauss_vector};
use crate::motion::{MotionPath, Radii, Segment, Side};
use crate::sphere::{signed_angle, wrap_angle, Vec3};

pub const DEFAULT_STEPS: usize = 100_000;
pub const MIN_STEPS_PER_SEGMENT: usize = 10;

/// Positions of the rolling disc at a given configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidConfiguration {
    pub center: Vec3,
    pub contact: Vec3,
    pub normal: Vec3,
}

pub fn rigid_configuration(theta: f64, beta: f64, radii: Radii) -> RigidConfiguration {
    let (st, ct) = theta.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let reach = radii.a + radii.b * cb;
    RigidConfiguration {
        center: Vec3::new(reach * ct, reach * st, radii.b * sb),
        contact: Vec3::new(radii.a * ct, radii.a * st, 0.0),
        normal: gauss_vector(theta, beta),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyRates {
    pub omega: Vec3,
    /// Spin about the disc normal, `ω·g`.
    pub spin_rate: f64,
    /// Norm of the unsatisfied constraint rows.
    pub residual: f64,
}

fn skew(v: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn rates_at(theta: f64, beta: f64, theta_rate: f64, beta_rate: f64, radii: Radii) -> BodyRates {
    let conf = rigid_configuration(theta, beta, radii);
    let f = gauss_frame(theta, beta);
    let (sb, cb) = beta.sin_cos();
    let (st, ct) = theta.sin_cos();
    let g = conf.normal;
    let g_dot = f.e1 * (sb * theta_rate) + f.e2 * beta_rate;
    let radial = Vec3::new(ct, st, 0.0);
    let center_dot = radial * (-radii.b * sb * beta_rate)
        + f.e1 * ((radii.a + radii.b * cb) * theta_rate)
        + Vec3::z() * (radii.b * cb * beta_rate);
    let arm = conf.contact - conf.center;

    // rows: ω × g = g', and c' + ω × (contact - center) = 0
    let mut a = SMatrix::<f64, 6, 3>::zeros();
    a.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-skew(&g)));
    a.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-skew(&arm)));
    let mut rhs = SVector::<f64, 6>::zeros();
    rhs.fixed_rows_mut::<3>(0).copy_from(&g_dot);
    rhs.fixed_rows_mut::<3>(3).copy_from(&(-center_dot));

    let normal = a.transpose() * a;
    let omega = normal
        .cholesky()
        .map(|c| c.solve(&(a.transpose() * rhs)))
        .unwrap_or_else(Vec3::zeros);
    let residual = (a * omega - rhs).norm();
    BodyRates { omega, spin_rate: omega.dot(&g), residual }
}

/// Body angular velocity at time `t` (right limit at breakpoints).
pub fn solve_body_rates(path: &MotionPath, t: f64, radii: Radii) -> Result<BodyRates> {
    let s = path.eval(t, Side::TwoSided)?;
    Ok(rates_at(s.theta, s.beta, s.theta_rate, s.beta_rate, radii))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOptions {
    pub steps: usize,
    pub reorthonormalize_every: usize,
    pub drift_limit: f64,
    /// Allowed mismatch of the final orientation against the accumulated spin.
    pub closure_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { steps: DEFAULT_STEPS, reorthonormalize_every: 1000, drift_limit: 1e-6, closure_tol: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct OracleTrace {
    pub steps: usize,
    /// Step boundaries, `steps + 1` entries.
    pub times: Vec<f64>,
    /// Orientation at each step boundary, starting from the identity.
    pub orientations: Vec<Matrix3<f64>>,
    /// Recovered spin rate `ω·g` at each step midpoint.
    pub spin_rates: Vec<f64>,
    pub noslip_residuals: Vec<f64>,
    /// Accumulated rotation angle at each step boundary.
    pub accumulated: Vec<f64>,
    pub delta_oracle: f64,
    pub max_drift: f64,
    /// Mismatch between the final orientation and the accumulated spin; `None` for open motions.
    pub closure_residual: Option<f64>,
}

impl OracleTrace {
    /// Columns `t, psi_rate, residual, delta`, one row per step midpoint.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,psi_rate,residual,delta\n");
        for k in 0..self.steps {
            let t = 0.5 * (self.times[k] + self.times[k + 1]);
            let _ = writeln!(
                out,
                "{t:?},{:?},{:?},{:?}",
                self.spin_rates[k], self.noslip_residuals[k], self.accumulated[k + 1]
            );
        }
        out
    }
}

fn drift(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).abs().max()
}

fn reorthonormalize(r: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = r.svd(true, true);
    let u = svd.u.expect("requested u");
    let v_t = svd.v_t.expect("requested v_t");
    u * v_t
}

fn allot_steps(segments: &[Segment], steps: usize) -> Result<Vec<usize>> {
    let needed = MIN_STEPS_PER_SEGMENT * segments.len();
    if steps < needed {
        return Err(GeoError::TooFewSteps { needed, got: steps });
    }
    Ok(segments
        .iter()
        .map(|s| ((steps as f64 * s.duration()).round() as usize).max(MIN_STEPS_PER_SEGMENT))
        .collect())
}

pub fn simulate_rolling(path: &MotionPath, radii: Radii, steps: usize) -> Result<OracleTrace> {
    simulate_rolling_with(path, radii, OracleOptions { steps, ..OracleOptions::default() })
}

/// Integrate the disc orientation with midpoint exponential steps.
///
/// Motion breakpoints are always step boundaries. Alongside the body, a frame
/// carried by the normal without spin is integrated; for closed motions the
/// body's final orientation relative to that frame must be a turn about the
/// initial normal by the accumulated angle.
pub fn simulate_rolling_with(path: &MotionPath, radii: Radii, options: OracleOptions) -> Result<OracleTrace> {
    let segments = path.segments();
    let counts = allot_steps(segments, options.steps)?;
    let total: usize = counts.iter().sum();

    let mut times = Vec::with_capacity(total + 1);
    let mut orientations = Vec::with_capacity(total + 1);
    let mut spin_rates = Vec::with_capacity(total);
    let mut residuals = Vec::with_capacity(total);
    let mut accumulated = Vec::with_capacity(total + 1);

    let mut r = Matrix3::identity();
    let mut transport = Matrix3::identity();
    let mut delta = 0.0;
    let mut max_drift: f64 = 0.0;
    times.push(0.0);
    orientations.push(r);
    accumulated.push(0.0);

    let mut step = 0usize;
    for (seg, &count) in segments.iter().zip(&counts) {
        let dt = seg.duration() / count as f64;
        for j in 0..count {
            let t0 = seg.t0 + dt * j as f64;
            let t1 = if j + 1 == count { seg.t1 } else { t0 + dt };
            let tm = 0.5 * (t0 + t1);
            let h = t1 - t0;
            let (theta, beta) = (seg.theta(tm), seg.beta(tm));
            let rates = rates_at(theta, beta, seg.theta_rate, seg.beta_rate, radii);
            let g = gauss_vector(theta, beta);

            let next = Rotation3::new(rates.omega * h).into_inner() * r;
            let across = rates.omega - g * rates.omega.dot(&g);
            transport = Rotation3::new(across * h).into_inner() * transport;

            // recover ω from the orientation increments alone
            let rdot = (next - r) / h;
            let mid = (next + r) * 0.5;
            let w = rdot * mid.transpose();
            let w = (w - w.transpose()) * 0.5;
            let recovered = Vec3::new(w[(2, 1)], w[(0, 2)], w[(1, 0)]);
            let spin = recovered.dot(&g);
            delta -= spin * h;

            r = next;
            step += 1;
            let d = drift(&r);
            max_drift = max_drift.max(d);
            if d > options.drift_limit {
                return Err(GeoError::DriftExceeded(d));
            }
            if options.reorthonormalize_every > 0 && step.is_multiple_of(options.reorthonormalize_every) {
                r = reorthonormalize(&r);
                transport = reorthonormalize(&transport);
            }
            times.push(t1);
            orientations.push(r);
            spin_rates.push(spin);
            residuals.push(rates.residual);
            accumulated.push(delta);
        }
    }

    let closure_residual = if path.is_closed() {
        let s0 = &segments[0];
        let f0 = gauss_frame(s0.theta(0.0), s0.beta(0.0));
        let relative = r * transport.transpose();
        let axis_error = (relative * f0.e3 - f0.e3).norm();
        let turned = relative * f0.e1;
        let angle = signed_angle(&f0.e1, &turned, &f0.e3);
        let residual = wrap_angle(angle + delta).abs().max(axis_error);
        if residual > options.closure_tol {
            return Err(GeoError::ClosureMismatch(residual));
        }
        Some(residual)
    } else {
        None
    };

    Ok(OracleTrace {
        steps: total,
        times,
        orientations,
        spin_rates,
        noslip_residuals: residuals,
        accumulated,
        delta_oracle: delta,
        max_drift,
        closure_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{build_path, example_gallery, Example, MotionSpec, SegmentSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn configuration_examples() {
        let c = rigid_configuration(0.0, 0.0, Radii { a: 2.0, b: 1.0 });
        assert_relative_eq!(c.center, Vec3::new(3.0, 0.0, 0.0));
        assert_relative_eq!(c.contact, Vec3::new(2.0, 0.0, 0.0));
        let c = rigid_configuration(0.0, PI / 2.0, Radii { a: 1.0, b: 1.0 });
        assert_relative_eq!(c.center, Vec3::new(1.0, 0.0, 1.0), epsilon = 1e-15);
        assert_relative_eq!(c.contact, Vec3::new(1.0, 0.0, 0.0));
        let c = rigid_configuration(PI, PI, Radii { a: 2.0, b: 1.0 });
        assert_relative_eq!(c.center, Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn arm_is_radius_and_lies_in_disc() {
        let radii = Radii { a: 1.7, b: 0.6 };
        for &(t, b) in &[(0.3, 0.2), (2.0, 1.9), (-1.0, 3.0)] {
            let c = rigid_configuration(t, b, radii);
            assert_relative_eq!((c.center - c.contact).norm(), radii.b, epsilon = 1e-12);
            assert!(c.normal.dot(&(c.center - c.contact)).abs() < 1e-12);
            assert_relative_eq!(c.center - c.contact, gauss_frame(t, b).e2 * radii.b, epsilon = 1e-12);
        }
    }

    #[test]
    fn spin_rates_of_coin_examples() {
        let unit = Radii::default();
        let up = example_gallery(Example::II, None).unwrap();
        let r = solve_body_rates(&up, 0.37, unit).unwrap();
        assert_relative_eq!(r.spin_rate, -2.0 * PI, epsilon = 1e-12);
        assert!(r.residual < 1e-10);
        let flat = example_gallery(Example::I, None).unwrap();
        let r = solve_body_rates(&flat, 0.81, unit).unwrap();
        assert_relative_eq!(r.spin_rate, -4.0 * PI, epsilon = 1e-12);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn rates_match_normal_transport_plus_spin() {
        // ω = g × g' + ψ' g with ψ' = -(a + b cos β) θ' / b
        let radii = Radii { a: 2.5, b: 0.7 };
        for &(t, b, td, bd) in &[(0.4, 1.0, 3.0, -2.0), (1.5, 2.7, -1.0, 0.5), (0.0, 0.3, 0.0, 1.0)] {
            let r = rates_at(t, b, td, bd, radii);
            let f = gauss_frame(t, b);
            let g_dot = f.e1 * (b.sin() * td) + f.e2 * bd;
            let spin = -(radii.a + radii.b * b.cos()) * td / radii.b;
            let expect = f.e3.cross(&g_dot) + f.e3 * spin;
            assert_relative_eq!(r.omega, expect, epsilon = 1e-11);
            assert!(r.residual < 1e-10);
        }
        let still = rates_at(0.2, 1.0, 0.0, 0.0, radii);
        assert_eq!(still.omega, Vec3::zeros());
    }

    #[test]
    fn oracle_coin_examples() {
        let unit = Radii::default();
        let t = simulate_rolling(&example_gallery(Example::I, None).unwrap(), unit, DEFAULT_STEPS).unwrap();
        assert_relative_eq!(t.delta_oracle, 4.0 * PI, epsilon = 1e-3);
        let t = simulate_rolling(&example_gallery(Example::III, None).unwrap(), unit, DEFAULT_STEPS).unwrap();
        assert!(t.delta_oracle.abs() < 1e-3);
        let t = simulate_rolling(&example_gallery(Example::V, None).unwrap(), Radii { a: 3.0, b: 2.0 }, DEFAULT_STEPS)
            .unwrap();
        assert_relative_eq!(t.delta_oracle, PI / 2.0, epsilon = 1e-3);
        assert!(t.max_drift <= 1e-6);
        assert!(t.closure_residual.unwrap() < 1e-6);
    }

    #[test]
    fn midpoint_scheme_is_second_order() {
        let tau = 2.0 * PI;
        let spec = MotionSpec {
            radii: Radii::default(),
            segments: vec![
                SegmentSpec::affine(0.0, 0.5, 0.0, tau, 0.4, 4.0),
                SegmentSpec::affine(0.5, 1.0, PI, tau, 2.4, -4.0),
            ],
        };
        let p = build_path(&spec).unwrap();
        let radii = Radii { a: 1.3, b: 0.8 };
        let exact = {
            // a θ/b plus the exact integral of cos β dθ on both affine pieces
            let piece = |b0: f64, k: f64| tau / k * ((b0 + 0.5 * k).sin() - b0.sin());
            radii.a * tau / radii.b + piece(0.4, 4.0) + piece(2.4, -4.0)
        };
        let loose = OracleOptions { closure_tol: 1.0, ..OracleOptions::default() };
        let err = |n: usize| {
            let t = simulate_rolling_with(&p, radii, OracleOptions { steps: n, ..loose }).unwrap();
            (t.delta_oracle - exact).abs()
        };
        let ratio = err(100) / err(200);
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn too_few_steps() {
        let p = example_gallery(Example::V, None).unwrap();
        assert!(matches!(simulate_rolling(&p, Radii::default(), 20), Err(GeoError::TooFewSteps { .. })));
    }

    #[test]
    fn trace_csv_has_one_row_per_step() {
        let p = example_gallery(Example::II, None).unwrap();
        let coarse = OracleOptions { steps: 50, closure_tol: 0.1, ..OracleOptions::default() };
        let t = simulate_rolling_with(&p, Radii::default(), coarse).unwrap();
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 51);
        assert!(csv.starts_with("t,psi_rate,residual,delta"));
    }
}
