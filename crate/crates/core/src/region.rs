//! Which side of the closed curve each pole lies on, and how large each side is.
//!
//! The left region `S+` is the side towards `g x T`, i.e. counterclockwise when
//! viewed from outside the sphere.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::frames::RegularizedCurve;
use crate::sphere::{arc_crossing, distance_to_arc, great_circle_distance, slerp, Vec3, NORTH, SOUTH};

pub const DEFAULT_MC_POINTS: usize = 200_000;
pub const DEFAULT_MC_SEED: u64 = 0x5EED;
/// Environment variable that overrides [`DEFAULT_MC_SEED`].
pub const SEED_ENV: &str = "GEOPHASE_SEED";
pub const DEFAULT_SIMPLE_TOL: f64 = 1e-9;

const MIN_CROSSING_ANGLE: f64 = 1e-6;
const VERTEX_CLEARANCE: f64 = 1e-10;
const MAX_PERTURBATIONS: usize = 8;
const MC_CHUNK: usize = 8192;
const MC_EDGE_SPACING: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaMethod {
    GaussBonnet,
    MonteCarlo,
    CapFormula,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionReport {
    pub simple: bool,
    pub i_plus: u8,
    pub i_minus: u8,
    pub a_plus: f64,
    pub a_minus: f64,
    pub area_method: AreaMethod,
    pub seed_point: [f64; 3],
    pub north_in_plus: bool,
}

/// A crossing between two non-adjacent edges of the sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub edge_a: usize,
    pub edge_b: usize,
    pub point: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleClassification {
    pub i_plus: u8,
    pub i_minus: u8,
    pub seed_point: Vec3,
    pub north_in_plus: bool,
    pub south_in_plus: bool,
    /// Turns of the curve around the z-axis.
    pub winding: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloArea {
    pub a_plus: f64,
    /// One standard deviation of the estimator.
    pub sigma: f64,
    pub points: usize,
    pub seed: u64,
}

/// The Monte-Carlo seed, honouring [`SEED_ENV`] (decimal or `0x` hex).
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| parse_seed(&s)).unwrap_or(DEFAULT_MC_SEED)
}

fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim();
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

fn require_closed(curve: &RegularizedCurve) -> Result<()> {
    if !curve.is_closed() {
        let s = curve.samples();
        return Err(GeoError::CurveNotClosed { gap: (s[s.len() - 1].g - s[0].g).norm() });
    }
    Ok(())
}

fn vertices(curve: &RegularizedCurve) -> Vec<Vec3> {
    curve.samples().iter().map(|s| s.g).collect()
}

fn cell_key(p: &Vec3, size: f64) -> (i32, i32, i32) {
    ((p.x / size).floor() as i32, (p.y / size).floor() as i32, (p.z / size).floor() as i32)
}

/// All crossings between non-adjacent edges, closer than `tol` counting as a crossing.
pub fn self_intersections(curve: &RegularizedCurve, tol: f64) -> Result<Vec<Intersection>> {
    require_closed(curve)?;
    let v = vertices(curve);
    let edges = v.len() - 1;
    let longest = v.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
    let size = (4.0 * longest).max(1e-3);
    let pad = tol + 1e-12;

    let mut grid: HashMap<(i32, i32, i32), Vec<usize>> = HashMap::new();
    for e in 0..edges {
        let (a, b) = (v[e], v[e + 1]);
        let lo = a.inf(&b).add_scalar(-pad);
        let hi = a.sup(&b).add_scalar(pad);
        let (k0, k1) = (cell_key(&lo, size), cell_key(&hi, size));
        for i in k0.0..=k1.0 {
            for j in k0.1..=k1.1 {
                for k in k0.2..=k1.2 {
                    grid.entry((i, j, k)).or_default().push(e);
                }
            }
        }
    }
    let adjacent = |i: usize, j: usize| j - i <= 1 || (i == 0 && j == edges - 1);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for list in grid.values() {
        for (x, &i) in list.iter().enumerate() {
            for &j in &list[x + 1..] {
                let (i, j) = if i < j { (i, j) } else { (j, i) };
                if !adjacent(i, j) {
                    pairs.push((i, j));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();

    let mut found = Vec::new();
    for (i, j) in pairs {
        let (p, q, a, b) = (v[i], v[i + 1], v[j], v[j + 1]);
        if let Some((x, _)) = arc_crossing(&p, &q, &a, &b) {
            found.push(Intersection { edge_a: i, edge_b: j, point: x });
            continue;
        }
        let near = [(p, &a, &b), (q, &a, &b), (a, &p, &q), (b, &p, &q)]
            .into_iter()
            .find(|(x, s, e)| distance_to_arc(x, s, e) < tol);
        if let Some((x, _, _)) = near {
            found.push(Intersection { edge_a: i, edge_b: j, point: x });
        }
    }
    Ok(found)
}

pub fn is_simple(curve: &RegularizedCurve, tol: f64) -> Result<bool> {
    Ok(self_intersections(curve, tol)?.is_empty())
}

fn azimuthal_winding(v: &[Vec3]) -> i64 {
    let mut total = 0.0;
    for w in v.windows(2) {
        let a0 = w[0].y.atan2(w[0].x);
        let a1 = w[1].y.atan2(w[1].x);
        total += crate::sphere::wrap_angle(a1 - a0);
    }
    (total / (2.0 * PI)).round() as i64
}

fn seed_point(curve: &RegularizedCurve, v: &[Vec3]) -> Result<Vec3> {
    let samples = curve.samples();
    let arc = curve
        .arcs()
        .iter()
        .max_by(|a, b| (samples[a.last].s - samples[a.first].s).total_cmp(&(samples[b.last].s - samples[b.first].s)))
        .expect("curve has arcs");
    let m = (arc.first + arc.last) / 2;
    let g = v[m];
    let left = g.cross(&curve.tangent_at(m));
    let mut delta = 1e-4;
    for _ in 0..6 {
        let seed = (g + left * delta).normalize();
        let nearest = (0..v.len() - 1)
            .min_by(|&i, &j| distance_to_arc(&seed, &v[i], &v[i + 1]).total_cmp(&distance_to_arc(&seed, &v[j], &v[j + 1])))
            .expect("curve has edges");
        let on_left = v[nearest].cross(&v[nearest + 1]).dot(&seed) > 0.0;
        if (nearest == m || nearest + 1 == m) && on_left {
            return Ok(seed);
        }
        delta *= 0.1;
    }
    Err(GeoError::DegenerateArc(0))
}

/// Crossings of the arc `from -> to` with the curve, or `None` if some crossing is not transversal.
fn crossing_count(v: &[Vec3], from: &Vec3, to: &Vec3) -> Option<usize> {
    let pieces = 4;
    let mut count = 0;
    for k in 0..pieces {
        let p = slerp(from, to, k as f64 / pieces as f64);
        let q = slerp(from, to, (k + 1) as f64 / pieces as f64);
        for e in 0..v.len() - 1 {
            if let Some((x, angle)) = arc_crossing(&p, &q, &v[e], &v[e + 1]) {
                let near_vertex = great_circle_distance(&x, &v[e]).min(great_circle_distance(&x, &v[e + 1]))
                    < VERTEX_CLEARANCE;
                let near_split = great_circle_distance(&x, &p).min(great_circle_distance(&x, &q)) < VERTEX_CLEARANCE;
                if angle < MIN_CROSSING_ANGLE || near_vertex || near_split {
                    return None;
                }
                count += 1;
            }
        }
    }
    Some(count)
}

/// Decide for each pole whether it lies in the left region by crossing parity from a seed point.
pub fn classify_poles(curve: &RegularizedCurve) -> Result<PoleClassification> {
    require_closed(curve)?;
    let v = vertices(curve);
    for pole in [NORTH, SOUTH] {
        if v.windows(2).any(|w| distance_to_arc(&pole, &w[0], &w[1]) < 1e-12) {
            return Err(GeoError::PoleOnCurve);
        }
    }
    let seed = seed_point(curve, &v)?;
    let step = (1e-3f64).min(curve.epsilon() / 16.0);
    let inside = |pole: Vec3| -> Result<bool> {
        for k in 0..=MAX_PERTURBATIONS {
            let target = if k == 0 {
                pole
            } else {
                let a = k as f64;
                (pole + Vec3::new(a.cos(), a.sin(), 0.0) * (step * a)).normalize()
            };
            if let Some(c) = crossing_count(&v, &seed, &target) {
                return Ok(c % 2 == 0);
            }
        }
        Err(GeoError::DegenerateArc(MAX_PERTURBATIONS))
    };
    let north_in_plus = inside(NORTH)?;
    let south_in_plus = inside(SOUTH)?;
    let i_plus = north_in_plus as u8 + south_in_plus as u8;
    let i_minus = 2 - i_plus;

    let winding = azimuthal_winding(&v);
    let expected = match (north_in_plus, south_in_plus) {
        (true, false) => 1,
        (false, true) => -1,
        _ => 0,
    };
    if winding != expected {
        return Err(GeoError::WindingInconsistent { winding, i_plus, i_minus });
    }
    Ok(PoleClassification { i_plus, i_minus, seed_point: seed, north_in_plus, south_in_plus, winding })
}

/// Left area by Gauss–Bonnet with unit Gauss curvature.
pub fn gauss_bonnet_area(curve: &RegularizedCurve) -> f64 {
    2.0 * PI - curve.curvature_integral() - curve.cusp_angle_sum()
}

/// Left area of a curve traced along a single latitude.
pub fn cap_area(curve: &RegularizedCurve) -> Result<f64> {
    require_closed(curve)?;
    let arcs = curve.arcs();
    let beta0 = arcs[0].beta0;
    let dir = arcs[0].theta_rate.signum();
    let latitude = arcs.iter().all(|a| a.beta_rate == 0.0 && a.beta0 == beta0 && a.theta_rate.signum() == dir);
    if !latitude || dir == 0.0 {
        return Err(GeoError::NotLatitudeCircle);
    }
    Ok(2.0 * PI * (1.0 + dir * beta0.cos()))
}

/// Left area as the fraction of uniformly random points on the left.
pub fn monte_carlo_area(curve: &RegularizedCurve, points: usize, seed: u64) -> Result<MonteCarloArea> {
    let classes = classify_poles(curve)?;
    let polygon = decimate(curve);
    let s = classes.seed_point;
    let grid = EdgeTable::new(&polygon, &s);

    // a fixed detour point for sample points almost opposite the seed
    let mut detour = None;
    for k in 0..16 {
        let a = 0.4 * k as f64;
        let axis = if s.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
        let base = s.cross(&axis).normalize();
        let other = s.cross(&base);
        let cand = base * a.cos() + other * a.sin();
        let clear = polygon.windows(2).all(|w| distance_to_arc(&cand, &w[0], &w[1]) > 1e-4);
        if clear {
            if let Some(c) = crossing_count(&polygon, &cand, &s) {
                detour = Some((EdgeTable::new(&polygon, &cand), c));
                break;
            }
        }
    }
    let (via_table, via_count) = detour.ok_or(GeoError::DegenerateArc(16))?;

    let chunks = points.div_ceil(MC_CHUNK);
    let inside: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = MC_CHUNK.min(points - c * MC_CHUNK);
            let mut hits = 0;
            for _ in 0..n {
                let z: f64 = rng.random_range(-1.0..1.0);
                let az: f64 = rng.random_range(0.0..2.0 * PI);
                let r = (1.0 - z * z).max(0.0).sqrt();
                let p = Vec3::new(r * az.cos(), r * az.sin(), z);
                let crossings = if great_circle_distance(&p, &s) > 2.5 {
                    via_table.count(&p) + via_count
                } else {
                    grid.count(&p)
                };
                if crossings % 2 == 0 {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let f = inside as f64 / points as f64;
    Ok(MonteCarloArea {
        a_plus: 4.0 * PI * f,
        sigma: 4.0 * PI * (f * (1.0 - f) / points as f64).sqrt(),
        points,
        seed,
    })
}

/// Polygon with spacing at most [`MC_EDGE_SPACING`], keeping every junction vertex.
fn decimate(curve: &RegularizedCurve) -> Vec<Vec3> {
    let s = curve.samples();
    let mut keep = vec![false; s.len()];
    for a in curve.arcs() {
        keep[a.first] = true;
        keep[a.last] = true;
    }
    let mut out = vec![s[0].g];
    let mut last = s[0].g;
    for i in 1..s.len() {
        let must = keep[i] || i + 1 == s.len() || great_circle_distance(&last, &s[i + 1].g) > MC_EDGE_SPACING;
        if must {
            out.push(s[i].g);
            last = s[i].g;
        }
    }
    out
}

/// Edge data precomputed against a fixed endpoint `s` of every test arc.
struct EdgeTable {
    s: Vec3,
    a: Vec<Vec3>,
    b: Vec<Vec3>,
    normal_pos_at_s: Vec<bool>,
    normal: Vec<Vec3>,
    a_dot_s: Vec<f64>,
}

impl EdgeTable {
    fn new(poly: &[Vec3], s: &Vec3) -> Self {
        let a: Vec<Vec3> = poly[..poly.len() - 1].to_vec();
        let b: Vec<Vec3> = poly[1..].to_vec();
        let normal: Vec<Vec3> = a.iter().zip(&b).map(|(a, b)| a.cross(b)).collect();
        EdgeTable {
            s: *s,
            normal_pos_at_s: normal.iter().map(|m| m.dot(s) > 0.0).collect(),
            a_dot_s: a.iter().map(|a| a.dot(s)).collect(),
            a,
            b,
            normal,
        }
    }

    /// Crossings of the minor arc `p -> s` with the polygon; edges must be short.
    fn count(&self, p: &Vec3) -> usize {
        let n = p.cross(&self.s);
        let mut c = 0;
        for j in 0..self.a.len() {
            if (n.dot(&self.a[j]) > 0.0) == (n.dot(&self.b[j]) > 0.0) {
                continue;
            }
            if (self.normal[j].dot(p) > 0.0) == self.normal_pos_at_s[j] {
                continue;
            }
            if self.a[j].dot(p) + self.a_dot_s[j] <= 0.0 {
                continue;
            }
            c += 1;
        }
        c
    }
}

pub fn region_areas(curve: &RegularizedCurve, method: AreaMethod) -> Result<(f64, f64)> {
    let hits = self_intersections(curve, DEFAULT_SIMPLE_TOL)?;
    if !hits.is_empty() {
        return Err(GeoError::CurveNotSimple { count: hits.len() });
    }
    let a_plus = match method {
        AreaMethod::GaussBonnet => gauss_bonnet_area(curve),
        AreaMethod::MonteCarlo => monte_carlo_area(curve, DEFAULT_MC_POINTS, default_seed())?.a_plus,
        AreaMethod::CapFormula => cap_area(curve)?,
    };
    Ok((a_plus, 4.0 * PI - a_plus))
}

/// Simplicity, pole indices and areas in one pass.
pub fn region_report(curve: &RegularizedCurve, method: AreaMethod) -> Result<RegionReport> {
    let (a_plus, a_minus) = region_areas(curve, method)?;
    let c = classify_poles(curve)?;
    Ok(RegionReport {
        simple: true,
        i_plus: c.i_plus,
        i_minus: c.i_minus,
        a_plus,
        a_minus,
        area_method: method,
        seed_point: [c.seed_point.x, c.seed_point.y, c.seed_point.z],
        north_in_plus: c.north_in_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{regularize, DEFAULT_EPSILON};
    use crate::motion::{build_path, example_gallery, Example, MotionSpec, Radii, SegmentSpec};
    use approx::assert_relative_eq;

    fn curve(e: Example) -> RegularizedCurve {
        regularize(&example_gallery(e, None).unwrap(), DEFAULT_EPSILON, 16).unwrap()
    }

    #[test]
    fn gallery_curves_are_simple() {
        for e in Example::ALL {
            assert!(is_simple(&curve(e), DEFAULT_SIMPLE_TOL).unwrap(), "{e}");
        }
    }

    #[test]
    fn figure_eight_is_not_simple() {
        // a bow-tie in the (theta, beta) chart: two diagonals that cross
        let spec = MotionSpec {
            radii: Radii::default(),
            segments: vec![
                SegmentSpec::affine(0.0, 0.25, 0.0, 4.0, 1.0, 2.4),
                SegmentSpec::affine(0.25, 0.5, 1.0, 0.0, 1.6, -2.4),
                SegmentSpec::affine(0.5, 0.75, 1.0, -4.0, 1.0, 2.4),
                SegmentSpec::affine(0.75, 1.0, 0.0, 0.0, 1.6, -2.4),
            ],
        };
        let p = build_path(&spec).unwrap();
        let c = regularize(&p, DEFAULT_EPSILON, 16).unwrap();
        assert!(!is_simple(&c, DEFAULT_SIMPLE_TOL).unwrap());
        assert!(matches!(region_areas(&c, AreaMethod::GaussBonnet), Err(GeoError::CurveNotSimple { .. })));
    }

    #[test]
    fn pole_indices() {
        let v = classify_poles(&curve(Example::V)).unwrap();
        assert_eq!((v.i_plus, v.i_minus), (0, 2));
        let vi = classify_poles(&curve(Example::VI)).unwrap();
        assert_eq!((vi.i_plus, vi.i_minus), (1, 1));
        assert!(!vi.north_in_plus);
        let i = classify_poles(&curve(Example::I)).unwrap();
        assert_eq!((i.i_plus, i.i_minus), (1, 1));
        assert!(i.north_in_plus);
        assert_eq!(i.winding, 1);
    }

    #[test]
    fn open_curve_is_rejected() {
        let spec = MotionSpec {
            radii: Radii::default(),
            segments: vec![SegmentSpec::affine(0.0, 1.0, 0.0, 3.0, 1.0, 0.0)],
        };
        let c = regularize(&build_path(&spec).unwrap(), DEFAULT_EPSILON, 16).unwrap();
        assert!(matches!(is_simple(&c, 1e-9), Err(GeoError::CurveNotClosed { .. })));
    }

    #[test]
    fn cap_areas() {
        let b0 = 1.2;
        let c = regularize(&example_gallery(Example::IV, Some(b0)).unwrap(), DEFAULT_EPSILON, 16).unwrap();
        let (cap, _) = region_areas(&c, AreaMethod::CapFormula).unwrap();
        assert_relative_eq!(cap, 2.0 * PI * (1.0 + b0.cos()), epsilon = 1e-14);
        let (gb, gm) = region_areas(&c, AreaMethod::GaussBonnet).unwrap();
        assert_relative_eq!(gb, cap, epsilon = 1e-6);
        assert_relative_eq!(gb + gm, 4.0 * PI);
        assert!(matches!(cap_area(&curve(Example::V)), Err(GeoError::NotLatitudeCircle)));
        let (eq, _) = region_areas(&curve(Example::II), AreaMethod::GaussBonnet).unwrap();
        assert_relative_eq!(eq, 2.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn triangle_area_at_epsilon() {
        let (a, _) = region_areas(&curve(Example::V), AreaMethod::GaussBonnet).unwrap();
        assert_relative_eq!(a, PI / 2.0 * DEFAULT_EPSILON.cos(), epsilon = 1e-6);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let c = curve(Example::V);
        let a = monte_carlo_area(&c, 50_000, 7).unwrap();
        let b = monte_carlo_area(&c, 50_000, 7).unwrap();
        assert_eq!(a, b);
        assert!((a.a_plus - gauss_bonnet_area(&c)).abs() < 4.0 * a.sigma + 1e-3);
    }

    #[test]
    fn seed_parsing() {
        assert_eq!(parse_seed("0x5EED"), Some(0x5EED));
        assert_eq!(parse_seed(" 42 "), Some(42));
        assert_eq!(parse_seed("zz"), None);
    }
}
