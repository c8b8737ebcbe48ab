//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use geophase::foucault::{foucault_from_motion, route_foucault, stationary_track, RouteTrack, TrackSample};
use geophase::frames::{offset_length_derivative, regularize, RegularizedCurve, DEFAULT_EPSILON};
use geophase::gauge::{curl_check, monopole_holonomy, monopole_patch_difference, Patch};
use geophase::motion::{example_gallery, Example, MotionPath, Radii, DEFAULT_BETA0};
use geophase::oracle::simulate_rolling;
use geophase::phase::{
    analyze_regions, geometric_phase_line, total_rotation, ClampedCurves, Method, PhaseOptions, DEFAULT_LINE_TOL,
};
use geophase::region::{classify_poles, gauss_bonnet_area, monte_carlo_area, DEFAULT_MC_POINTS, DEFAULT_MC_SEED};
use geophase::sphere::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU: f64 = 2.0 * PI;

struct Check {
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new() }
    }

    fn close(&mut self, what: impl AsRef<str>, got: f64, want: f64, tol: f64) {
        if !((got - want).abs() <= tol) {
            self.failures.push(format!("{}: got {got:.12}, want {want:.12} (tol {tol:e})", what.as_ref()));
        }
    }

    fn holds(&mut self, what: impl AsRef<str>, ok: bool) {
        if !ok {
            self.failures.push(what.as_ref().to_string());
        }
    }

    fn within(&mut self, what: &str, elapsed: Duration, limit: Duration) {
        self.holds(format!("{what} took {elapsed:.2?} (limit {limit:?})"), elapsed <= limit);
    }
}

fn gallery(e: Example, a: f64, b: f64) -> MotionPath {
    example_gallery(e, None).unwrap().with_radii(Radii { a, b }).unwrap()
}

/// Expected `(A+, 2π I+, Δ_g)` of each gallery motion, and its lap count.
fn table_row(e: Example) -> (f64, f64, f64, f64) {
    let c = DEFAULT_BETA0.cos();
    match e {
        Example::I => (2.0 * TAU, TAU, TAU, 1.0),
        Example::II => (TAU, TAU, 0.0, 1.0),
        Example::III => (0.0, TAU, -TAU, 1.0),
        Example::IV => (TAU * (1.0 + c), TAU, TAU * c, 1.0),
        Example::V => (FRAC_PI_2, 0.0, FRAC_PI_2, 0.0),
        Example::VI => (FRAC_PI_2, TAU, -1.5 * PI, -1.0),
    }
}

fn table_reproduction(c: &mut Check) {
    let start = Instant::now();
    let methods: BTreeSet<Method> = [Method::Line, Method::Baumkuchen, Method::Area, Method::Curvature].into();
    let opts = PhaseOptions::default();
    let (a, b) = (2.0, 1.0);
    for e in Example::ALL {
        let (a_plus, two_pi_i_plus, delta_g, n) = table_row(e);
        let delta_d = TAU * n * a / b;
        let r = match total_rotation(&gallery(e, a, b), &methods, &opts) {
            Ok(r) => r,
            Err(err) => {
                c.holds(format!("({e}) failed: {err}"), false);
                continue;
            }
        };
        let region = r.region.unwrap();
        let bk = r.baumkuchen.unwrap();
        c.close(format!("({e}) dynamical phase"), r.delta_d, delta_d, 1e-6);
        c.close(format!("({e}) A+"), region.a_plus, a_plus, 1e-3);
        c.close(format!("({e}) 2π I+"), TAU * region.i_plus as f64, two_pi_i_plus, 1e-12);
        c.close(format!("({e}) line"), r.delta_g_by_method["line"], delta_g, 1e-6);
        c.close(format!("({e}) ring sum"), bk.mid, delta_g, 1e-6);
        c.close(format!("({e}) ring lower bound"), bk.lower, delta_g, 1e-6);
        c.close(format!("({e}) ring upper bound"), bk.upper, delta_g, 1e-6);
        c.close(format!("({e}) area"), r.delta_g_by_method["area"], delta_g, 1e-3);
        c.close(format!("({e}) curvature"), r.delta_g_by_method["curvature"], delta_g, 1e-3);
        c.close(format!("({e}) total"), r.delta_total, delta_d + delta_g, 1e-6);
    }
    for (e, want) in [(Example::I, 2.0 * TAU), (Example::II, TAU), (Example::III, 0.0)] {
        let r = total_rotation(&gallery(e, 1.0, 1.0), &[Method::Line].into(), &opts).unwrap();
        c.close(format!("({e}) coin total"), r.delta_total, want, 1e-6);
    }
    c.within("table", start.elapsed(), Duration::from_secs(5));
}

fn coin_observations(c: &mut Check) {
    let unit = Radii::default();
    for (e, want) in [(Example::I, 2.0 * TAU), (Example::II, TAU), (Example::III, 0.0)] {
        let path = gallery(e, 1.0, 1.0);
        let r = total_rotation(&path, &[Method::Line].into(), &PhaseOptions::default()).unwrap();
        c.close(format!("({e}) line total"), r.delta_total, want, 1e-6);
        let start = Instant::now();
        match simulate_rolling(&path, unit, 100_000) {
            Ok(trace) => c.close(format!("({e}) oracle"), trace.delta_oracle, want, 1e-3),
            Err(err) => c.holds(format!("({e}) oracle failed: {err}"), false),
        }
        c.within(&format!("({e}) oracle"), start.elapsed(), Duration::from_secs(10));
    }
}

fn foucault_sine_law(c: &mut Check) {
    for k in 0..13 {
        let deg = -90.0 + 15.0 * k as f64;
        let r = route_foucault(&stationary_track(deg, 1.0).unwrap());
        c.close(format!("latitude {deg}"), r.delta_fou, TAU * f64::to_radians(deg).sin(), 1e-10);
        let sum: f64 = r.accumulation.iter().sum();
        c.close(format!("latitude {deg} accumulation"), sum, r.delta_fou, 1e-15);
    }
    let wander = [0.0, 0.7, -0.4, 2.9, 1.1, 0.0];
    let route = RouteTrack::new(
        wander.iter().enumerate().map(|(i, &lon)| TrackSample { t: i as f64 / 5.0, lon, lat: 0.0 }).collect(),
    )
    .unwrap();
    c.close("equatorial route", route_foucault(&route).delta_fou, 0.0, 1e-10);
    let equator = example_gallery(Example::II, None).unwrap();
    c.close("equatorial motion", foucault_from_motion(&equator).unwrap(), 0.0, 1e-10);
}

fn method_agreement(c: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE);
    let methods: BTreeSet<Method> = [
        Method::Line,
        Method::Baumkuchen,
        Method::Area,
        Method::Curvature,
        Method::Monopole,
        Method::Berry,
        Method::Oracle,
    ]
    .into();
    let opts = PhaseOptions { baumkuchen_n: 1_000_000, oracle_steps: 100_000, ..PhaseOptions::default() };
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let path = common::random_closed_motion(&mut rng);
        let r = match total_rotation(&path, &methods, &opts) {
            Ok(r) => r,
            Err(err) => {
                c.holds(format!("motion {k} failed: {err}"), false);
                continue;
            }
        };
        let analytic: Vec<f64> =
            r.delta_g_by_method.iter().filter(|(name, _)| name.as_str() != "oracle").map(|(_, v)| *v).collect();
        let spread = analytic.iter().cloned().fold(f64::MIN, f64::max) - analytic.iter().cloned().fold(f64::MAX, f64::min);
        worst = worst.max(spread);
        c.holds(format!("motion {k}: analytic methods spread {spread:.3e}"), spread <= 1e-3);
        c.close(format!("motion {k} oracle"), r.delta_g_by_method["oracle"], r.delta_g_by_method["line"], 1e-3);
    }
    println!("    worst analytic spread over 50 motions: {worst:.3e}");
}

fn gauge_quantization(c: &mut Check) {
    for e in Example::ALL {
        let path = example_gallery(e, None).unwrap();
        let n = path.topology(1e-9).n as f64;
        let curve = regularize(&path, DEFAULT_EPSILON, 16).unwrap();
        c.close(format!("({e}) patch difference"), monopole_patch_difference(&curve).unwrap(), 2.0 * TAU * n, 1e-8);
        match monopole_holonomy(&path, DEFAULT_EPSILON, 1e-6) {
            Ok(h) => {
                for (label, l) in [("ε", h.at_epsilon), ("ε/2", h.at_half_epsilon), ("limit", h.extrapolated)] {
                    c.holds(format!("({e}) spread at {label}: {:e}", l.spread()), l.spread() <= 1e-6);
                }
            }
            Err(err) => c.holds(format!("({e}) holonomy failed: {err}"), false),
        }
    }
}

fn curl_convergence(c: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE);
    let h = 1e-3;
    for k in 0..100 {
        let r: f64 = rng.random_range(0.5..2.0);
        let z: f64 = rng.random_range(-0.9..0.9);
        let az = rng.random_range(0.0..TAU);
        let rho = (1.0 - z * z).sqrt();
        let x = Vec3::new(rho * az.cos(), rho * az.sin(), z) * r;
        let exact = x / (r * r * r);
        for patch in [Patch::Plus, Patch::Minus] {
            let e1 = (curl_check(patch, &x, h).unwrap() - exact).norm();
            let e2 = (curl_check(patch, &x, 0.5 * h).unwrap() - exact).norm();
            let ratio = e1 / e2;
            c.holds(format!("point {k} {patch:?}: error ratio {ratio:.3}"), (ratio - 4.0).abs() <= 0.5);
            c.holds(format!("point {k} {patch:?}: relative error {:e}", e1 * r * r), e1 * r * r < 1e-3);
        }
    }
}

fn offset_curvature(c: &mut Check) {
    for e in Example::ALL {
        let curve = regularize(&example_gallery(e, None).unwrap(), DEFAULT_EPSILON, 16).unwrap();
        if !curve.cusps().is_empty() {
            continue;
        }
        let k = curve.curvature_integral();
        let d = offset_length_derivative(&curve).unwrap();
        c.close(format!("({e}) length derivative"), d, k, 1e-5 * k.abs().max(1.0));
    }
    for beta0 in [0.5, DEFAULT_BETA0, 2.0, 2.8] {
        let curve = regularize(&example_gallery(Example::IV, Some(beta0)).unwrap(), DEFAULT_EPSILON, 16).unwrap();
        let q = 1e-3;
        let quotient = (curve.offset_length(0.0).unwrap() - curve.offset_length(q).unwrap()) / q;
        c.close(format!("latitude {beta0} length quotient"), quotient, TAU * beta0.cos(), 1e-6);
    }
}

fn reversed_curve(path: &MotionPath) -> RegularizedCurve {
    regularize(&path.reversed().unwrap(), DEFAULT_EPSILON, 16).unwrap()
}

fn region_identities(c: &mut Check) {
    for e in Example::ALL {
        let path = example_gallery(e, None).unwrap();
        let curve = regularize(&path, DEFAULT_EPSILON, 16).unwrap();
        let back = reversed_curve(&path);
        let (fwd, rev) = (classify_poles(&curve).unwrap(), classify_poles(&back).unwrap());
        c.holds(format!("({e}) I+ + I- = {}", fwd.i_plus + fwd.i_minus), fwd.i_plus + fwd.i_minus == 2);
        c.holds(format!("({e}) reversal swaps indices"), rev.i_plus == fwd.i_minus);
        let gb = gauss_bonnet_area(&curve) + gauss_bonnet_area(&back);
        c.close(format!("({e}) Gauss-Bonnet A+ + A-"), gb, 2.0 * TAU, 1e-3);
        let mc = monte_carlo_area(&curve, DEFAULT_MC_POINTS, DEFAULT_MC_SEED).unwrap().a_plus
            + monte_carlo_area(&back, DEFAULT_MC_POINTS, DEFAULT_MC_SEED).unwrap().a_plus;
        c.close(format!("({e}) Monte-Carlo A+ + A-"), mc, 2.0 * TAU, 0.05);

        if fwd.i_plus == 1 && fwd.i_minus == 1 && fwd.north_in_plus {
            let regions = analyze_regions(&ClampedCurves::new(&path, DEFAULT_EPSILON).unwrap()).unwrap();
            let line = geometric_phase_line(&path, DEFAULT_LINE_TOL).unwrap();
            c.close(format!("({e}) line against A+ - 2π"), line, regions.report.a_plus - TAU, 1e-5);
        }
    }
}

type Criterion = (&'static str, fn(&mut Check));

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("table reproduction", table_reproduction),
        ("coin observations", coin_observations),
        ("Foucault sine law", foucault_sine_law),
        ("method agreement on random motions", method_agreement),
        ("gauge and topology quantization", gauge_quantization),
        ("monopole curl convergence", curl_convergence),
        ("offset length and geodesic curvature", offset_curvature),
        ("region identities", region_identities),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let mut check = Check::new();
        let start = Instant::now();
        run(&mut check);
        let verdict = if check.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {} ({name}): {verdict} [{:.2?}]", i + 1, start.elapsed());
        for f in &check.failures {
            println!("    {f}");
        }
        failed += !check.failures.is_empty() as usize;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
