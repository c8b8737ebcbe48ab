//! Monopole potentials and two-level Berry connections as holonomy routes to the geometric phase.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::frames::{extrapolate_epsilon, gauss_frame, regularize, Arc, RegularizedCurve};
#[cfg(test)]
use crate::frames::gauss_vector;
use crate::motion::{MotionPath, CLOSURE_TOL};
use crate::quad::gauss_legendre;
use crate::sphere::Vec3;

/// Minimum angular distance from the excluded half-axis.
pub const AXIS_CLEARANCE: f64 = 1e-9;
pub const DEFAULT_GAUGE_TOL: f64 = 1e-6;
const PANEL_LENGTH: f64 = 0.05;
const CURVE_SAMPLES: usize = 16;

/// Which of the two gauge patches. `Plus` is singular on the negative z half-axis,
/// `Minus` on the positive one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Patch {
    Plus,
    Minus,
}

impl Patch {
    fn sign(self) -> f64 {
        match self {
            Patch::Plus => 1.0,
            Patch::Minus => -1.0,
        }
    }

    /// Angle between `x` and the excluded half-axis.
    fn clearance(self, x: &Vec3) -> f64 {
        let rho = x.x.hypot(x.y);
        match self {
            Patch::Plus => rho.atan2(-x.z),
            Patch::Minus => rho.atan2(x.z),
        }
    }
}

/// Vector potential of a unit monopole at the origin.
pub fn monopole_potential(patch: Patch, x: &Vec3) -> Result<Vec3> {
    let r = x.norm();
    if r == 0.0 || patch.clearance(x) < AXIS_CLEARANCE {
        return Err(GeoError::OnSingularAxis);
    }
    let swirl = Vec3::new(-x.y, x.x, 0.0);
    Ok(match patch {
        Patch::Plus => swirl / (r * (r + x.z)),
        Patch::Minus => -swirl / (r * (r - x.z)),
    })
}

/// The same potential written in the disc's angles: `((+-1 + cos beta) / (r sin beta)) e1`.
pub fn monopole_potential_polar(patch: Patch, theta: f64, beta: f64, r: f64) -> Vec3 {
    gauss_frame(theta, beta).e1 * ((patch.sign() + beta.cos()) / (r * beta.sin()))
}

/// Curl of the potential by central differences with step `h`.
pub fn curl_check(patch: Patch, x: &Vec3, h: f64) -> Result<Vec3> {
    let mut jac = [[0.0; 3]; 3];
    for (k, row) in jac.iter_mut().enumerate() {
        let mut d = Vec3::zeros();
        d[k] = h;
        let fp = monopole_potential(patch, &(x + d))?;
        let fm = monopole_potential(patch, &(x - d))?;
        let diff = (fp - fm) / (2.0 * h);
        row.copy_from_slice(diff.as_slice());
    }
    // jac[k][i] = d A_i / d x_k
    Ok(Vec3::new(
        jac[1][2] - jac[2][1],
        jac[2][0] - jac[0][2],
        jac[0][1] - jac[1][0],
    ))
}

fn panels(arc: &Arc) -> usize {
    let speed = arc.theta_rate.hypot(arc.beta_rate);
    ((speed * (arc.t1 - arc.t0) / PANEL_LENGTH).ceil() as usize).max(2)
}

fn integrate_over_arcs<F>(curve: &RegularizedCurve, f: F) -> Result<f64>
where
    F: Fn(&Arc, f64) -> Result<f64>,
{
    let mut total = 0.0;
    for arc in curve.arcs() {
        let mut err = None;
        let v = gauss_legendre(
            |t| match f(arc, t) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            arc.t0,
            arc.t1,
            panels(arc),
        );
        if let Some(e) = err {
            return Err(e);
        }
        total += v;
    }
    Ok(total)
}

/// Loop integrals at a single clamp level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeLoop {
    /// Average of the two patches.
    pub symmetric: f64,
    /// Plus patch, corrected by `-2 pi n`.
    pub plus_form: f64,
    /// Minus patch, corrected by `+2 pi n`.
    pub minus_form: f64,
    pub plus_raw: f64,
    pub minus_raw: f64,
}

impl GaugeLoop {
    fn from_raw(plus_raw: f64, minus_raw: f64, n: i64) -> Self {
        let lap = 2.0 * PI * n as f64;
        GaugeLoop {
            symmetric: 0.5 * (plus_raw + minus_raw),
            plus_form: plus_raw - lap,
            minus_form: minus_raw + lap,
            plus_raw,
            minus_raw,
        }
    }

    pub fn spread(&self) -> f64 {
        let v = [self.symmetric, self.plus_form, self.minus_form];
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        hi - lo
    }

    fn extrapolate(eps: f64, a: &GaugeLoop, b: &GaugeLoop) -> GaugeLoop {
        let x = |f: fn(&GaugeLoop) -> f64| extrapolate_epsilon(eps, f(a), f(b));
        GaugeLoop {
            symmetric: x(|g| g.symmetric),
            plus_form: x(|g| g.plus_form),
            minus_form: x(|g| g.minus_form),
            plus_raw: x(|g| g.plus_raw),
            minus_raw: x(|g| g.minus_raw),
        }
    }
}

/// Holonomy estimate of the geometric phase with its per-clamp diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Holonomy {
    /// Extrapolated symmetric form.
    pub value: f64,
    pub n: i64,
    pub at_epsilon: GaugeLoop,
    pub at_half_epsilon: GaugeLoop,
    pub extrapolated: GaugeLoop,
}

fn check_spread(l: &GaugeLoop, tol: f64) -> Result<()> {
    let spread = l.spread();
    if !(spread <= tol) {
        return Err(GeoError::GaugeInconsistency { spread });
    }
    Ok(())
}

fn closed_topology(path: &MotionPath) -> Result<i64> {
    let topo = path.topology(CLOSURE_TOL);
    if !topo.closed {
        return Err(GeoError::CurveNotClosed { gap: (path.theta_end() - 2.0 * PI * topo.n as f64).abs() });
    }
    Ok(topo.n)
}

fn holonomy_with<F>(path: &MotionPath, eps: f64, tol: f64, at: F) -> Result<Holonomy>
where
    F: Fn(&RegularizedCurve, i64) -> Result<GaugeLoop>,
{
    let n = closed_topology(path)?;
    let c1 = regularize(path, eps, CURVE_SAMPLES)?;
    let c2 = regularize(path, 0.5 * eps, CURVE_SAMPLES)?;
    holonomy_on(&c1, &c2, n, tol, at)
}

fn holonomy_on<F>(c1: &RegularizedCurve, c2: &RegularizedCurve, n: i64, tol: f64, at: F) -> Result<Holonomy>
where
    F: Fn(&RegularizedCurve, i64) -> Result<GaugeLoop>,
{
    let eps = c1.epsilon();
    let (l1, l2) = (at(c1, n)?, at(c2, n)?);
    let ex = GaugeLoop::extrapolate(eps, &l1, &l2);
    for l in [&l1, &l2, &ex] {
        check_spread(l, tol)?;
    }
    Ok(Holonomy { value: ex.symmetric, n, at_epsilon: l1, at_half_epsilon: l2, extrapolated: ex })
}

/// Loop integrals of both monopole patches along one clamped curve (unit radius).
pub fn monopole_loop(curve: &RegularizedCurve, n: i64) -> Result<GaugeLoop> {
    let line = |patch: Patch| {
        integrate_over_arcs(curve, move |arc, t| {
            Ok(monopole_potential(patch, &arc.point(t))?.dot(&arc.velocity(t)))
        })
    };
    Ok(GaugeLoop::from_raw(line(Patch::Plus)?, line(Patch::Minus)?, n))
}

/// `∮ (A+ - A-) . dg` along one clamped curve.
pub fn monopole_patch_difference(curve: &RegularizedCurve) -> Result<f64> {
    let l = monopole_loop(curve, 0)?;
    Ok(l.plus_raw - l.minus_raw)
}

/// Geometric phase as monopole holonomy, checking all three patch expressions agree within `tol`.
pub fn monopole_holonomy(path: &MotionPath, eps: f64, tol: f64) -> Result<Holonomy> {
    holonomy_with(path, eps, tol, monopole_loop)
}

/// Monopole holonomy from curves already clamped at `eps` and `eps / 2`.
pub fn monopole_holonomy_from(coarse: &RegularizedCurve, fine: &RegularizedCurve, n: i64, tol: f64) -> Result<Holonomy> {
    holonomy_on(coarse, fine, n, tol, monopole_loop)
}

/// Normalized eigenstate of the two-level Hamiltonian in one gauge patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerryState {
    pub patch: Patch,
    pub components: [Complex64; 2],
}

pub fn berry_state(patch: Patch, theta: f64, beta: f64) -> Result<BerryState> {
    let (s, c) = (0.5 * beta).sin_cos();
    let components = match patch {
        Patch::Plus => {
            if beta < AXIS_CLEARANCE {
                return Err(GeoError::AtSingularPole);
            }
            [Complex64::new(s, 0.0), Complex64::from_polar(c, theta)]
        }
        Patch::Minus => {
            if beta > PI - AXIS_CLEARANCE {
                return Err(GeoError::AtSingularPole);
            }
            [Complex64::from_polar(s, -theta), Complex64::new(c, 0.0)]
        }
    };
    Ok(BerryState { patch, components })
}

/// The same states written in terms of the unit normal `x`.
pub fn berry_state_cartesian(patch: Patch, x: &Vec3) -> Result<[Complex64; 2]> {
    let r = x.norm();
    if r == 0.0 || patch.clearance(x) < AXIS_CLEARANCE {
        return Err(GeoError::AtSingularPole);
    }
    Ok(match patch {
        Patch::Plus => {
            let k = 1.0 / (2.0 * r * (r + x.z)).sqrt();
            [Complex64::new((r + x.z) * k, 0.0), Complex64::new(x.x * k, x.y * k)]
        }
        Patch::Minus => {
            let k = 1.0 / (2.0 * r * (r - x.z)).sqrt();
            [Complex64::new(x.x * k, -x.y * k), Complex64::new((r - x.z) * k, 0.0)]
        }
    })
}

pub fn hamiltonian(theta: f64, beta: f64) -> Matrix2<Complex64> {
    let (s, c) = beta.sin_cos();
    Matrix2::new(
        Complex64::new(-c, 0.0),
        Complex64::from_polar(s, -theta),
        Complex64::from_polar(s, theta),
        Complex64::new(c, 0.0),
    )
}

/// Hermitian product, conjugating the first argument.
pub fn inner(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// `<psi | d psi>` on the direction `dtheta`; it has no `dbeta` part.
pub fn berry_connection(patch: Patch, _theta: f64, beta: f64, dtheta: f64) -> Result<Complex64> {
    berry_state(patch, 0.0, beta)?;
    Ok(Complex64::new(0.0, 0.5 * (patch.sign() + beta.cos()) * dtheta))
}

/// `<psi | d psi>` by central differences of the state, step `1e-6`.
pub fn berry_connection_numeric(patch: Patch, theta: f64, beta: f64, dtheta: f64, dbeta: f64) -> Result<Complex64> {
    let h = 1e-6;
    let psi = berry_state(patch, theta, beta)?.components;
    let p = berry_state(patch, theta + h * dtheta, beta + h * dbeta)?.components;
    let m = berry_state(patch, theta - h * dtheta, beta - h * dbeta)?.components;
    let d = [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)];
    Ok(inner(&psi, &d))
}

/// `Im <psi|d psi>` loop integrals of both patches along one clamped curve, from finite-difference overlaps.
pub fn berry_loop(curve: &RegularizedCurve, n: i64) -> Result<GaugeLoop> {
    let line = |patch: Patch| {
        integrate_over_arcs(curve, move |arc, t| {
            let delta = 1e-5 * (arc.t1 - arc.t0);
            let psi = berry_state_cartesian(patch, &arc.point(t))?;
            let p = berry_state_cartesian(patch, &arc.point(t + delta))?;
            let m = berry_state_cartesian(patch, &arc.point(t - delta))?;
            let d = [(p[0] - m[0]) / (2.0 * delta), (p[1] - m[1]) / (2.0 * delta)];
            Ok(inner(&psi, &d).im)
        })
    };
    // each patch integral is half the corresponding monopole integral
    let plus = 2.0 * line(Patch::Plus)?;
    let minus = 2.0 * line(Patch::Minus)?;
    Ok(GaugeLoop::from_raw(plus, minus, n))
}

/// Geometric phase as Berry holonomy of the two-level eigenstates.
pub fn berry_holonomy(path: &MotionPath, eps: f64) -> Result<Holonomy> {
    holonomy_with(path, eps, DEFAULT_GAUGE_TOL, berry_loop)
}

pub fn berry_holonomy_from(coarse: &RegularizedCurve, fine: &RegularizedCurve, n: i64) -> Result<Holonomy> {
    holonomy_on(coarse, fine, n, DEFAULT_GAUGE_TOL, berry_loop)
}
