//! Dynamical and geometric phases, and their reconciliation into the total rotation angle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::frames::{extrapolate_epsilon, regularize, RegularizedCurve, DEFAULT_EPSILON, DEFAULT_SAMPLES_PER_SEGMENT};
use crate::gauge::{berry_holonomy_from, monopole_holonomy_from, DEFAULT_GAUGE_TOL};
use crate::motion::{MotionPath, Radii, CLOSURE_TOL};
use crate::oracle::{simulate_rolling, DEFAULT_STEPS};
use crate::quad::adaptive_simpson;
use crate::region::{
    classify_poles, default_seed, gauss_bonnet_area, monte_carlo_area, self_intersections, AreaMethod,
    PoleClassification, RegionReport, DEFAULT_MC_POINTS, DEFAULT_SIMPLE_TOL,
};

pub const DEFAULT_LINE_TOL: f64 = 1e-10;
pub const LINE_MAX_DEPTH: u32 = 40;
pub const DEFAULT_BAUMKUCHEN_N: usize = 1000;
const WINDING_TOL: f64 = 1e-6;
const MESH_MERGE: f64 = 1e-14;

/// `a (θ(1) - θ(0)) / b`, the rolled arc length over the rolling radius.
pub fn dynamical_phase(path: &MotionPath) -> f64 {
    let r = path.radii();
    r.a * path.theta_end() / r.b
}

/// `∫ cos β dθ` over the raw motion.
pub fn geometric_phase_line(path: &MotionPath, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for seg in path.segments() {
        let dur = seg.duration();
        total += if seg.theta_rate == 0.0 || dur == 0.0 {
            0.0
        } else if seg.beta_rate == 0.0 {
            seg.beta0.cos() * seg.theta_rate * dur
        } else {
            let rate = seg.theta_rate;
            adaptive_simpson(|t| seg.beta(t).cos() * rate, seg.t0, seg.t1, tol * dur, LINE_MAX_DEPTH)?
        };
    }
    Ok(total)
}

/// Riemann sum of the ring phases on a mesh, with bounds from the extreme tilt on each ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaumkuchenBounds {
    #[serde(rename = "N")]
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub mid: f64,
}

impl BaumkuchenBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Uniform mesh of `n` intervals, refined by the motion's breakpoints.
///
/// On every mesh interval both angles are affine, so `cos β` is monotone there and
/// the ring phase `cos β Δθ` is bracketed by its values at the two ends.
pub fn geometric_phase_baumkuchen(path: &MotionPath, n: usize) -> BaumkuchenBounds {
    let n = n.max(1);
    let segments = path.segments();
    let mut mesh: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    mesh.extend(segments.iter().flat_map(|s| [s.t0, s.t1]));
    mesh.sort_by(f64::total_cmp);
    mesh.dedup_by(|b, a| (*b - *a).abs() <= MESH_MERGE);

    let (mut lower, mut upper, mut mid, mut magnitude) = (0.0, 0.0, 0.0, 0.0);
    let mut k = 0;
    for w in mesh.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        while k + 1 < segments.len() && segments[k].t1 <= t0 + MESH_MERGE {
            k += 1;
        }
        let seg = &segments[k];
        let (th0, th1) = (seg.theta(t0), seg.theta(t1));
        let d_theta = th1 - th0;
        let (c0, c1) = (seg.beta(t0).cos(), seg.beta(t1).cos());
        let (left, right) = (c0 * d_theta, c1 * d_theta);
        mid += left;
        lower += left.min(right);
        upper += left.max(right);
        magnitude += c0.abs().max(c1.abs()) * (d_theta.abs() + th0.abs() + th1.abs());
    }
    // widen by the summation rounding so the bounds stay bounds in floating point
    let slack = 4.0 * f64::EPSILON * magnitude;
    BaumkuchenBounds { n, lower: lower - slack, upper: upper + slack, mid }
}

/// The clamped curve of normals at `eps` and `eps / 2`, for extrapolation to zero clamp.
#[derive(Debug, Clone)]
pub struct ClampedCurves {
    pub coarse: RegularizedCurve,
    pub fine: RegularizedCurve,
    /// Laps around the fixed disc.
    pub n: i64,
}

impl ClampedCurves {
    pub fn new(path: &MotionPath, eps: f64) -> Result<Self> {
        let topo = path.topology(CLOSURE_TOL);
        if !topo.closed {
            let gap = (path.theta_end() - 2.0 * std::f64::consts::PI * topo.n as f64).abs();
            return Err(GeoError::CurveNotClosed { gap });
        }
        let (coarse, fine) = rayon::join(
            || regularize(path, eps, DEFAULT_SAMPLES_PER_SEGMENT),
            || regularize(path, 0.5 * eps, DEFAULT_SAMPLES_PER_SEGMENT),
        );
        Ok(ClampedCurves { coarse: coarse?, fine: fine?, n: topo.n })
    }

    pub fn epsilon(&self) -> f64 {
        self.coarse.epsilon()
    }

    fn extrapolate(&self, at_eps: f64, at_half: f64) -> f64 {
        extrapolate_epsilon(self.epsilon(), at_eps, at_half)
    }
}

/// Pole classification and Gauss–Bonnet areas of both clamped curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionAnalysis {
    pub classes: PoleClassification,
    pub a_plus_at_epsilon: f64,
    pub a_plus_at_half_epsilon: f64,
    /// Region report with areas extrapolated to zero clamp.
    pub report: RegionReport,
}

pub fn analyze_regions(curves: &ClampedCurves) -> Result<RegionAnalysis> {
    let mut classes = Vec::with_capacity(2);
    for c in [&curves.coarse, &curves.fine] {
        let hits = self_intersections(c, DEFAULT_SIMPLE_TOL)?;
        if !hits.is_empty() {
            return Err(GeoError::CurveNotSimple { count: hits.len() });
        }
        classes.push(classify_poles(c)?);
    }
    let (a, b) = (classes[0], classes[1]);
    if (a.i_plus, a.north_in_plus, a.south_in_plus) != (b.i_plus, b.north_in_plus, b.south_in_plus) {
        return Err(GeoError::UnstableClassification);
    }
    let a1 = gauss_bonnet_area(&curves.coarse);
    let a2 = gauss_bonnet_area(&curves.fine);
    let a_plus = curves.extrapolate(a1, a2);
    let report = RegionReport {
        simple: true,
        i_plus: a.i_plus,
        i_minus: a.i_minus,
        a_plus,
        a_minus: 4.0 * std::f64::consts::PI - a_plus,
        area_method: AreaMethod::GaussBonnet,
        seed_point: [a.seed_point.x, a.seed_point.y, a.seed_point.z],
        north_in_plus: a.north_in_plus,
    };
    Ok(RegionAnalysis { classes: a, a_plus_at_epsilon: a1, a_plus_at_half_epsilon: a2, report })
}

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaPhase {
    /// `A+ - 2π I+`.
    pub value: f64,
    /// `-A- + 2π I-`.
    pub minus_form: f64,
    /// `(A+ - A-)/2 - π (I+ - I-)`.
    pub symmetric_form: f64,
    pub at_epsilon: f64,
    pub at_half_epsilon: f64,
    pub region: RegionReport,
}

fn area_phase(regions: &RegionAnalysis) -> AreaPhase {
    let r = &regions.report;
    let (ip, im) = (r.i_plus as f64, r.i_minus as f64);
    AreaPhase {
        value: r.a_plus - two_pi() * ip,
        minus_form: -r.a_minus + two_pi() * im,
        symmetric_form: 0.5 * (r.a_plus - r.a_minus) - 0.5 * two_pi() * (ip - im),
        at_epsilon: regions.a_plus_at_epsilon - two_pi() * ip,
        at_half_epsilon: regions.a_plus_at_half_epsilon - two_pi() * ip,
        region: *r,
    }
}

/// Geometric phase from the left area and the poles it contains.
pub fn geometric_phase_area(path: &MotionPath, eps: f64) -> Result<AreaPhase> {
    let curves = ClampedCurves::new(path, eps)?;
    Ok(area_phase(&analyze_regions(&curves)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvaturePhase {
    pub value: f64,
    /// `-π (I+ - I-)`, the total turn of the tangent angle.
    pub winding_term: f64,
    /// `∮ κ_g ds`, extrapolated.
    pub curvature_term: f64,
    /// Sum of cusp angles, extrapolated.
    pub cusp_term: f64,
    pub at_epsilon: f64,
    pub at_half_epsilon: f64,
}

fn curvature_phase(curves: &ClampedCurves, regions: &RegionAnalysis) -> Result<CurvaturePhase> {
    let c = &regions.classes;
    let winding_term = -std::f64::consts::PI * (c.i_plus as f64 - c.i_minus as f64);
    for curve in [&curves.coarse, &curves.fine] {
        let turned = curve.phi_winding();
        if (turned - winding_term).abs() > WINDING_TOL {
            return Err(GeoError::WindingInconsistent {
                winding: (turned / std::f64::consts::PI).round() as i64,
                i_plus: c.i_plus,
                i_minus: c.i_minus,
            });
        }
    }
    let at = |curve: &RegularizedCurve| (curve.curvature_integral(), curve.cusp_angle_sum());
    let (k1, a1) = at(&curves.coarse);
    let (k2, a2) = at(&curves.fine);
    let curvature_term = curves.extrapolate(k1, k2);
    let cusp_term = curves.extrapolate(a1, a2);
    Ok(CurvaturePhase {
        value: winding_term - curvature_term - cusp_term,
        winding_term,
        curvature_term,
        cusp_term,
        at_epsilon: winding_term - k1 - a1,
        at_half_epsilon: winding_term - k2 - a2,
    })
}

/// Geometric phase from the turning of the tangent, the geodesic curvature and the cusp angles.
pub fn geometric_phase_curvature(path: &MotionPath, eps: f64) -> Result<CurvaturePhase> {
    let curves = ClampedCurves::new(path, eps)?;
    let regions = analyze_regions(&curves)?;
    curvature_phase(&curves, &regions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Line,
    Baumkuchen,
    Area,
    Curvature,
    Monopole,
    Berry,
    Oracle,
    MonteCarlo,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Line,
        Method::Baumkuchen,
        Method::Area,
        Method::Curvature,
        Method::Monopole,
        Method::Berry,
        Method::Oracle,
        Method::MonteCarlo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Line => "line",
            Method::Baumkuchen => "baumkuchen",
            Method::Area => "area",
            Method::Curvature => "curvature",
            Method::Monopole => "monopole",
            Method::Berry => "berry",
            Method::Oracle => "oracle",
            Method::MonteCarlo => "monte_carlo",
        }
    }

    /// Methods that only make sense for a closed curve of normals.
    pub fn needs_closed(&self) -> bool {
        matches!(self, Method::Area | Method::Curvature | Method::Monopole | Method::Berry | Method::MonteCarlo)
    }

    /// The analytic methods applicable to a motion.
    pub fn defaults(closed: bool) -> BTreeSet<Method> {
        let all = [Method::Line, Method::Baumkuchen, Method::Area, Method::Curvature, Method::Monopole, Method::Berry];
        all.into_iter().filter(|m| closed || !m.needs_closed()).collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key || (key == "montecarlo" && *m == Method::MonteCarlo))
            .ok_or_else(|| GeoError::InvalidSpec(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub analytic: f64,
    pub monte_carlo: f64,
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { analytic: 1e-4, monte_carlo: 1e-2, oracle: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseOptions {
    pub epsilon: f64,
    pub line_tol: f64,
    pub baumkuchen_n: usize,
    pub oracle_steps: usize,
    pub mc_points: usize,
    pub mc_seed: u64,
    pub gauge_tol: f64,
    pub tolerances: Tolerances,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions {
            epsilon: DEFAULT_EPSILON,
            line_tol: DEFAULT_LINE_TOL,
            baumkuchen_n: DEFAULT_BAUMKUCHEN_N,
            oracle_steps: DEFAULT_STEPS,
            mc_points: DEFAULT_MC_POINTS,
            mc_seed: default_seed(),
            gauge_tol: DEFAULT_GAUGE_TOL,
            tolerances: Tolerances::default(),
        }
    }
}

/// Deviation of one method from the line integral, against its allowance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconciliation {
    pub deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSummary {
    pub steps: usize,
    pub delta_oracle: f64,
    pub max_drift: f64,
    pub closure_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseResult {
    pub radii: Radii,
    pub n: i64,
    pub closed: bool,
    pub epsilon: f64,
    pub delta_d: f64,
    pub delta_g_by_method: BTreeMap<String, f64>,
    pub delta_total: f64,
    pub max_discrepancy: f64,
    pub region: Option<RegionReport>,
    pub baumkuchen: Option<BaumkuchenBounds>,
    pub oracle: Option<OracleSummary>,
    /// Secondary expressions computed along the way, by name.
    pub checks: BTreeMap<String, f64>,
    pub reconciliation: BTreeMap<String, Reconciliation>,
    pub warnings: Vec<String>,
    /// Methods that could not be evaluated, with the reason.
    pub errors: BTreeMap<String, String>,
}

impl PhaseResult {
    /// Fails when some method strays from the line integral by more than ten times its allowance.
    pub fn verify(&self) -> Result<()> {
        for (method, r) in &self.reconciliation {
            let limit = 10.0 * r.tolerance;
            if !(r.deviation <= limit) {
                return Err(GeoError::MethodDisagreement { method: method.clone(), deviation: r.deviation, limit });
            }
        }
        Ok(())
    }
}

enum Outcome {
    Line(f64),
    Baumkuchen(BaumkuchenBounds),
    Area(AreaPhase),
    Curvature(CurvaturePhase),
    Gauge { value: f64, spread: f64 },
    Oracle(OracleSummary),
    MonteCarlo { value: f64, sigma: f64 },
}

struct Shared {
    curves: Option<Result<ClampedCurves>>,
    regions: Option<Result<RegionAnalysis>>,
}

impl Shared {
    fn curves(&self) -> Result<&ClampedCurves> {
        self.curves.as_ref().expect("curves built for closed-curve methods").as_ref().map_err(Clone::clone)
    }

    fn regions(&self) -> Result<&RegionAnalysis> {
        self.regions.as_ref().expect("regions analysed for area methods").as_ref().map_err(Clone::clone)
    }
}

fn run_method(method: Method, path: &MotionPath, shared: &Shared, opts: &PhaseOptions) -> Result<Outcome> {
    Ok(match method {
        Method::Line => Outcome::Line(geometric_phase_line(path, opts.line_tol)?),
        Method::Baumkuchen => Outcome::Baumkuchen(geometric_phase_baumkuchen(path, opts.baumkuchen_n)),
        Method::Area => Outcome::Area(area_phase(shared.regions()?)),
        Method::Curvature => Outcome::Curvature(curvature_phase(shared.curves()?, shared.regions()?)?),
        Method::Monopole | Method::Berry => {
            let c = shared.curves()?;
            let h = if method == Method::Monopole {
                monopole_holonomy_from(&c.coarse, &c.fine, c.n, opts.gauge_tol)?
            } else {
                berry_holonomy_from(&c.coarse, &c.fine, c.n)?
            };
            Outcome::Gauge { value: h.value, spread: h.extrapolated.spread() }
        }
        Method::Oracle => {
            let trace = simulate_rolling(path, path.radii(), opts.oracle_steps)?;
            Outcome::Oracle(OracleSummary {
                steps: trace.steps,
                delta_oracle: trace.delta_oracle,
                max_drift: trace.max_drift,
                closure_residual: trace.closure_residual,
            })
        }
        Method::MonteCarlo => {
            // common random numbers at both clamps keep the extrapolation from amplifying noise
            let c = shared.curves()?;
            let i_plus = shared.regions()?.report.i_plus as f64;
            let (m1, m2) = rayon::join(
                || monte_carlo_area(&c.coarse, opts.mc_points, opts.mc_seed),
                || monte_carlo_area(&c.fine, opts.mc_points, opts.mc_seed),
            );
            let (m1, m2) = (m1?, m2?);
            Outcome::MonteCarlo { value: c.extrapolate(m1.a_plus, m2.a_plus) - two_pi() * i_plus, sigma: m1.sigma }
        }
    })
}

/// Run the requested methods and reconcile them against the line integral.
///
/// The line integral always runs and is the reference for the total angle. Disagreements
/// beyond a method's tolerance are reported as warnings; [`PhaseResult::verify`] turns
/// gross ones into errors. The first failing method's error is returned.
pub fn total_rotation(path: &MotionPath, methods: &BTreeSet<Method>, opts: &PhaseOptions) -> Result<PhaseResult> {
    let (result, failures) = evaluate(path, methods, opts)?;
    match failures.into_iter().next() {
        Some((_, e)) => Err(e),
        None => Ok(result),
    }
}

/// Like [`total_rotation`], but a failing method other than the line integral is
/// recorded in [`PhaseResult::errors`] instead of aborting the others.
pub fn total_rotation_partial(path: &MotionPath, methods: &BTreeSet<Method>, opts: &PhaseOptions) -> Result<PhaseResult> {
    evaluate(path, methods, opts).map(|(r, _)| r)
}

fn evaluate(
    path: &MotionPath,
    methods: &BTreeSet<Method>,
    opts: &PhaseOptions,
) -> Result<(PhaseResult, Vec<(Method, GeoError)>)> {
    let mut methods = methods.clone();
    methods.insert(Method::Line);
    let topo = path.topology(CLOSURE_TOL);

    let wants_curves = methods.iter().any(|m| m.needs_closed());
    let wants_regions =
        methods.contains(&Method::Area) || methods.contains(&Method::Curvature) || methods.contains(&Method::MonteCarlo);
    let curves = wants_curves.then(|| ClampedCurves::new(path, opts.epsilon));
    let regions = match (&curves, wants_regions) {
        (Some(Ok(c)), true) => Some(analyze_regions(c)),
        (Some(Err(e)), true) => Some(Err(e.clone())),
        _ => None,
    };
    let shared = Shared { curves, regions };

    let results: Vec<(Method, Result<Outcome>)> =
        methods.par_iter().map(|&m| (m, run_method(m, path, &shared, opts))).collect();
    let mut outcomes = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut errors = BTreeMap::new();
    for (m, r) in results {
        match r {
            Ok(o) => outcomes.push((m, o)),
            Err(e) if m == Method::Line => return Err(e),
            Err(e) => {
                errors.insert(m.name().to_string(), e.to_string());
                failures.push((m, e));
            }
        }
    }

    let delta_d = dynamical_phase(path);
    let mut by_method = BTreeMap::new();
    let mut tolerance = BTreeMap::new();
    let mut checks = BTreeMap::new();
    let mut baumkuchen = None;
    let mut oracle = None;
    let tol = opts.tolerances;
    for (m, outcome) in &outcomes {
        let (value, allowed) = match *outcome {
            Outcome::Line(v) => (v, tol.analytic),
            Outcome::Baumkuchen(b) => {
                baumkuchen = Some(b);
                checks.insert("baumkuchen_lower".to_string(), b.lower);
                checks.insert("baumkuchen_upper".to_string(), b.upper);
                (b.mid, tol.analytic.max(b.width()))
            }
            Outcome::Area(a) => {
                checks.insert("area_minus_form".to_string(), a.minus_form);
                checks.insert("area_symmetric_form".to_string(), a.symmetric_form);
                (a.value, tol.analytic)
            }
            Outcome::Curvature(c) => {
                checks.insert("curvature_integral".to_string(), c.curvature_term);
                checks.insert("cusp_angle_sum".to_string(), c.cusp_term);
                (c.value, tol.analytic)
            }
            Outcome::Gauge { value, spread } => {
                checks.insert(format!("{m}_spread"), spread);
                (value, tol.analytic)
            }
            Outcome::Oracle(o) => {
                oracle = Some(o);
                (o.delta_oracle - delta_d, tol.oracle)
            }
            Outcome::MonteCarlo { value, sigma } => {
                checks.insert("monte_carlo_sigma".to_string(), sigma);
                (value, tol.monte_carlo.max(3.0 * sigma))
            }
        };
        by_method.insert(m.name().to_string(), value);
        tolerance.insert(m.name().to_string(), allowed);
    }

    let line = by_method["line"];
    let values: Vec<f64> = by_method.values().copied().collect();
    let mut max_discrepancy: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            max_discrepancy = max_discrepancy.max((a - b).abs());
        }
    }
    let mut reconciliation = BTreeMap::new();
    let mut warnings = Vec::new();
    for (name, &value) in &by_method {
        if name == "line" {
            continue;
        }
        let deviation = (value - line).abs();
        let allowed = tolerance[name];
        if !(deviation <= allowed) {
            warnings.push(format!("{name} differs from line integral by {deviation:.3e} (tolerance {allowed:.1e})"));
        }
        reconciliation.insert(name.clone(), Reconciliation { deviation, tolerance: allowed });
    }

    let result = PhaseResult {
        radii: path.radii(),
        n: topo.n,
        closed: topo.closed,
        epsilon: opts.epsilon,
        delta_d,
        delta_g_by_method: by_method,
        delta_total: delta_d + line,
        max_discrepancy,
        region: shared.regions.and_then(|r| r.ok()).map(|r| r.report),
        baumkuchen,
        oracle,
        checks,
        reconciliation,
        warnings,
        errors,
    };
    Ok((result, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{build_path, example_gallery, Example, MotionSpec, SegmentSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn ex(e: Example, a: f64, b: f64) -> MotionPath {
        example_gallery(e, None).unwrap().with_radii(Radii { a, b }).unwrap()
    }

    #[test]
    fn dynamical_phase_examples() {
        assert_relative_eq!(dynamical_phase(&ex(Example::I, 2.0, 1.0)), 4.0 * PI);
        assert_eq!(dynamical_phase(&ex(Example::V, 3.0, 0.5)), 0.0);
        assert_relative_eq!(dynamical_phase(&ex(Example::VI, 1.0, 1.0)), -2.0 * PI);
    }

    #[test]
    fn line_integral_examples() {
        let iv = example_gallery(Example::IV, Some(PI / 3.0)).unwrap();
        assert_relative_eq!(geometric_phase_line(&iv, 1e-10).unwrap(), PI, epsilon = 1e-12);
        let ii = example_gallery(Example::II, None).unwrap();
        assert!(geometric_phase_line(&ii, 1e-10).unwrap().abs() < 1e-12);
        let vi = example_gallery(Example::VI, None).unwrap();
        assert_relative_eq!(geometric_phase_line(&vi, 1e-10).unwrap(), -1.5 * PI, epsilon = 1e-12);
    }

    #[test]
    fn line_integral_matches_closed_form_on_tilting_segment() {
        let spec = MotionSpec {
            radii: Radii::default(),
            segments: vec![SegmentSpec::affine(0.0, 1.0, 0.0, 3.0, 0.2, 2.5)],
        };
        let p = build_path(&spec).unwrap();
        let exact = 3.0 / 2.5 * ((0.2f64 + 2.5).sin() - 0.2f64.sin());
        assert_relative_eq!(geometric_phase_line(&p, 1e-10).unwrap(), exact, epsilon = 1e-10);
    }

    #[test]
    fn baumkuchen_examples() {
        let b = geometric_phase_baumkuchen(&example_gallery(Example::I, None).unwrap(), 4);
        assert_relative_eq!(b.lower, 2.0 * PI, epsilon = 1e-13);
        assert_relative_eq!(b.upper, 2.0 * PI, epsilon = 1e-13);
        assert_relative_eq!(b.mid, 2.0 * PI, epsilon = 1e-14);
        let b = geometric_phase_baumkuchen(&example_gallery(Example::V, None).unwrap(), 4);
        assert_relative_eq!(b.mid, PI / 2.0, epsilon = 1e-15);
        let b = geometric_phase_baumkuchen(&example_gallery(Example::IV, Some(PI / 3.0)).unwrap(), 1000);
        assert!(b.contains(PI) && b.width() < 1e-2);
    }

    #[test]
    fn baumkuchen_brackets_line_integral_on_tilting_motion() {
        let spec = MotionSpec {
            radii: Radii::default(),
            segments: vec![
                SegmentSpec::affine(0.0, 0.5, 0.0, 2.0 * PI, 0.4, 4.0),
                SegmentSpec::affine(0.5, 1.0, PI, 2.0 * PI, 2.4, -4.0),
            ],
        };
        let p = build_path(&spec).unwrap();
        let line = geometric_phase_line(&p, 1e-12).unwrap();
        let mut last = f64::INFINITY;
        for n in [1, 7, 50, 400, 3000] {
            let b = geometric_phase_baumkuchen(&p, n);
            assert!(b.contains(line), "N = {n}");
            assert!(b.width() <= last);
            last = b.width();
        }
        let (w1, w2) = (geometric_phase_baumkuchen(&p, 1000).width(), geometric_phase_baumkuchen(&p, 2000).width());
        assert_relative_eq!(w1 / w2, 2.0, epsilon = 0.05);
    }

    #[test]
    fn area_examples() {
        let a = geometric_phase_area(&ex(Example::I, 2.0, 1.0), DEFAULT_EPSILON).unwrap();
        assert_relative_eq!(a.value, 2.0 * PI, epsilon = 1e-3);
        assert_relative_eq!(a.minus_form, a.value, epsilon = 1e-9);
        assert_relative_eq!(a.symmetric_form, a.value, epsilon = 1e-9);
        let a = geometric_phase_area(&ex(Example::V, 2.0, 1.0), DEFAULT_EPSILON).unwrap();
        assert_relative_eq!(a.value, PI / 2.0, epsilon = 1e-3);
        let a = geometric_phase_area(&ex(Example::VI, 2.0, 1.0), DEFAULT_EPSILON).unwrap();
        assert_relative_eq!(a.value, -1.5 * PI, epsilon = 1e-3);
    }

    #[test]
    fn curvature_examples() {
        let c = geometric_phase_curvature(&ex(Example::II, 1.0, 1.0), DEFAULT_EPSILON).unwrap();
        assert!(c.value.abs() < 1e-6 && c.winding_term == 0.0);
        let beta0 = 1.1;
        let iv = example_gallery(Example::IV, Some(beta0)).unwrap();
        let c = geometric_phase_curvature(&iv, DEFAULT_EPSILON).unwrap();
        assert_relative_eq!(c.value, 2.0 * PI * beta0.cos(), epsilon = 1e-6);
        let c = geometric_phase_curvature(&ex(Example::III, 1.0, 1.0), DEFAULT_EPSILON).unwrap();
        assert_relative_eq!(c.value, -2.0 * PI, epsilon = 1e-3);
    }

    #[test]
    fn open_motion_rejected_by_area_method() {
        let spec = MotionSpec {
            radii: Radii::default(),
            segments: vec![SegmentSpec::affine(0.0, 1.0, 0.0, 1.0, 1.0, 0.0)],
        };
        let p = build_path(&spec).unwrap();
        assert!(matches!(geometric_phase_area(&p, DEFAULT_EPSILON), Err(GeoError::CurveNotClosed { .. })));
        let r = total_rotation(&p, &Method::defaults(false), &PhaseOptions::default()).unwrap();
        assert!(!r.closed && r.region.is_none());
        assert_relative_eq!(r.delta_g_by_method["line"], 1.0f64.cos(), epsilon = 1e-14);
    }

    #[test]
    fn total_rotation_coin_examples() {
        let opts = PhaseOptions::default();
        for (e, want) in [(Example::I, 4.0 * PI), (Example::III, 0.0), (Example::V, PI / 2.0)] {
            let r = total_rotation(&ex(e, 1.0, 1.0), &Method::defaults(true), &opts).unwrap();
            assert_relative_eq!(r.delta_total, want, epsilon = 1e-9);
            assert!(r.max_discrepancy < 1e-3, "{e}: {}", r.max_discrepancy);
            r.verify().unwrap();
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("MonteCarlo".parse::<Method>().unwrap(), Method::MonteCarlo);
        assert!("simpson".parse::<Method>().is_err());
    }

    #[test]
    fn verify_flags_gross_disagreement() {
        let mut r = total_rotation(&ex(Example::II, 1.0, 1.0), &Method::defaults(true), &PhaseOptions::default())
            .unwrap();
        r.reconciliation.insert("area".into(), Reconciliation { deviation: 0.5, tolerance: 1e-4 });
        assert!(matches!(r.verify(), Err(GeoError::MethodDisagreement { .. })));
    }

    #[test]
    fn partial_evaluation_records_failures() {
        let spec = MotionSpec {
            radii: Radii::default(),
            segments: vec![SegmentSpec::affine(0.0, 1.0, 0.0, 1.0, 1.0, 0.0)],
        };
        let p = build_path(&spec).unwrap();
        let methods: BTreeSet<Method> = [Method::Line, Method::Area, Method::Monopole].into();
        assert!(matches!(
            total_rotation(&p, &methods, &PhaseOptions::default()),
            Err(GeoError::CurveNotClosed { .. })
        ));
        let r = total_rotation_partial(&p, &methods, &PhaseOptions::default()).unwrap();
        assert_eq!(r.delta_g_by_method.keys().collect::<Vec<_>>(), ["line"]);
        assert_eq!(r.errors.keys().collect::<Vec<_>>(), ["area", "monopole"]);
    }
}
