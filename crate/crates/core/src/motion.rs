//! Piecewise motions `theta(t)`, `beta(t)` of the rolling disc on `[0, 1]`.
//!
//! `theta` is the azimuth of the contact point on the fixed disc and `beta`
//! the tilt of the rolling disc, measured so that `beta = 0` lies flat outside
//! the fixed disc and `beta = pi` lies flat on top of it.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// Default tolerance for the closure conditions `theta(1) = 2 pi n`, `beta(1) = beta(0)`.
pub const CLOSURE_TOL: f64 = 1e-9;
const JUMP_TOL: f64 = 1e-9;
const MATCH_TOL: f64 = 1e-12;
const RANGE_SLACK: f64 = 1e-12;

/// Radii of the fixed disc (`a`) and the rolling disc (`b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Radii {
    pub a: f64,
    pub b: f64,
}

impl Radii {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let r = Radii { a, b };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(GeoError::InvalidRadii { a: self.a, b: self.b });
        }
        Ok(())
    }
}

impl Default for Radii {
    fn default() -> Self {
        Radii { a: 1.0, b: 1.0 }
    }
}

/// One scalar piece of a segment, as written in a motion file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Piece {
    Const { value: f64 },
    /// `value` is taken at the segment start.
    Affine { value: f64, slope: f64 },
    /// Linear interpolation through `(t[k], values[k])`; the grid spans the segment.
    Samples { t: Vec<f64>, values: Vec<f64> },
}

impl Piece {
    fn validate(&self, t0: f64, t1: f64) -> Result<()> {
        let finite = |x: f64| x.is_finite();
        match self {
            Piece::Const { value } => {
                if !finite(*value) {
                    return Err(GeoError::InvalidSpec(format!("non-finite value on [{t0}, {t1}]")));
                }
            }
            Piece::Affine { value, slope } => {
                if !finite(*value) || !finite(*slope) {
                    return Err(GeoError::InvalidSpec(format!("non-finite value on [{t0}, {t1}]")));
                }
            }
            Piece::Samples { t, values } => {
                if t.len() != values.len() || t.len() < 2 {
                    return Err(GeoError::InvalidSpec(format!(
                        "samples on [{t0}, {t1}] need matching t/values arrays of length >= 2"
                    )));
                }
                if t.iter().chain(values.iter()).any(|x| !x.is_finite()) {
                    return Err(GeoError::InvalidSpec(format!("non-finite sample on [{t0}, {t1}]")));
                }
                if t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(GeoError::InvalidSpec(format!(
                        "sample times on [{t0}, {t1}] must be strictly increasing"
                    )));
                }
                if (t[0] - t0).abs() > MATCH_TOL || (t[t.len() - 1] - t1).abs() > MATCH_TOL {
                    return Err(GeoError::InvalidSpec(format!(
                        "sample grid must start at {t0} and end at {t1}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn value(&self, t0: f64, t: f64) -> f64 {
        match self {
            Piece::Const { value } => *value,
            Piece::Affine { value, slope } => value + slope * (t - t0),
            Piece::Samples { t: ts, values } => {
                let k = cell(ts, t);
                let w = (t - ts[k]) / (ts[k + 1] - ts[k]);
                values[k] + w * (values[k + 1] - values[k])
            }
        }
    }

    /// Slope on the open cell that contains `t`.
    fn slope(&self, t: f64) -> f64 {
        match self {
            Piece::Const { .. } => 0.0,
            Piece::Affine { slope, .. } => *slope,
            Piece::Samples { t: ts, values } => {
                let k = cell(ts, t);
                (values[k + 1] - values[k]) / (ts[k + 1] - ts[k])
            }
        }
    }

    fn interior_knots(&self) -> &[f64] {
        match self {
            Piece::Samples { t, .. } => &t[1..t.len() - 1],
            _ => &[],
        }
    }

    fn knot_values(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            Piece::Const { value } => vec![*value],
            Piece::Affine { value, slope } => vec![*value, value + slope * (t1 - t0)],
            Piece::Samples { values, .. } => values.clone(),
        }
    }

    fn reversed(&self, t0: f64, t1: f64) -> Piece {
        match self {
            Piece::Const { value } => Piece::Const { value: *value },
            Piece::Affine { value, slope } => Piece::Affine {
                value: value + slope * (t1 - t0),
                slope: -slope,
            },
            Piece::Samples { t, values } => Piece::Samples {
                t: t.iter().rev().map(|x| 1.0 - x).collect(),
                values: values.iter().rev().copied().collect(),
            },
        }
    }

    fn shifted(&self, offset: f64) -> Piece {
        match self {
            Piece::Const { value } => Piece::Const { value: value + offset },
            Piece::Affine { value, slope } => Piece::Affine { value: value + offset, slope: *slope },
            Piece::Samples { t, values } => Piece::Samples {
                t: t.clone(),
                values: values.iter().map(|v| v + offset).collect(),
            },
        }
    }

    /// Reparameterize time by `t -> scale * t + start`.
    fn rescaled(&self, scale: f64, start: f64) -> Piece {
        match self {
            Piece::Const { value } => Piece::Const { value: *value },
            Piece::Affine { value, slope } => Piece::Affine { value: *value, slope: slope / scale },
            Piece::Samples { t, values } => Piece::Samples {
                t: t.iter().map(|x| scale * x + start).collect(),
                values: values.clone(),
            },
        }
    }
}

fn cell(ts: &[f64], t: f64) -> usize {
    let k = ts.partition_point(|&x| x <= t);
    k.saturating_sub(1).min(ts.len() - 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub t0: f64,
    pub t1: f64,
    pub theta: Piece,
    pub beta: Piece,
}

impl SegmentSpec {
    /// Segment on `[t0, t1]` with both angles affine, values given at `t0`.
    pub fn affine(t0: f64, t1: f64, theta0: f64, theta_slope: f64, beta0: f64, beta_slope: f64) -> Self {
        let piece = |value: f64, slope: f64| {
            if slope == 0.0 {
                Piece::Const { value }
            } else {
                Piece::Affine { value, slope }
            }
        };
        SegmentSpec { t0, t1, theta: piece(theta0, theta_slope), beta: piece(beta0, beta_slope) }
    }
}

/// Structured motion description, the in-memory form of a motion file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSpec {
    #[serde(default)]
    pub radii: Radii,
    pub segments: Vec<SegmentSpec>,
}

impl MotionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GeoError::InvalidSpec(e.to_string()))
    }
}

/// One scalar angle as a function of time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarPath {
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
    lipschitz_bound: f64,
}

impl ScalarPath {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }
}

/// A stretch of time on which both angles are affine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub theta0: f64,
    pub theta_rate: f64,
    pub beta0: f64,
    pub beta_rate: f64,
}

impl Segment {
    pub fn theta(&self, t: f64) -> f64 {
        self.theta0 + self.theta_rate * (t - self.t0)
    }

    /// Tilt at `t`, clamped into `[0, pi]` to absorb validation slack.
    pub fn beta(&self, t: f64) -> f64 {
        (self.beta0 + self.beta_rate * (t - self.t0)).clamp(0.0, PI)
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn is_stationary(&self) -> bool {
        self.theta_rate == 0.0 && self.beta_rate == 0.0
    }
}

/// Which one-sided limit to take at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    /// Same as [`Side::Right`] at breakpoints.
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathState {
    pub theta: f64,
    pub beta: f64,
    pub theta_rate: f64,
    pub beta_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TopologyReport {
    /// Number of laps around the fixed disc.
    pub n: i64,
    pub closed: bool,
}

/// A validated motion together with the radii of both discs.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPath {
    theta: ScalarPath,
    beta: ScalarPath,
    radii: Radii,
    segments: Vec<Segment>,
}

/// Validate a motion description.
pub fn build_path(spec: &MotionSpec) -> Result<MotionPath> {
    spec.radii.validate()?;
    let segs = &spec.segments;
    if segs.is_empty() {
        return Err(GeoError::GapOrOverlap { at: 0.0 });
    }
    if segs[0].t0.abs() > MATCH_TOL {
        return Err(GeoError::GapOrOverlap { at: segs[0].t0.min(0.0) });
    }
    if (segs[segs.len() - 1].t1 - 1.0).abs() > MATCH_TOL {
        return Err(GeoError::GapOrOverlap { at: segs[segs.len() - 1].t1 });
    }
    for (k, s) in segs.iter().enumerate() {
        if !(s.t0.is_finite() && s.t1.is_finite()) {
            return Err(GeoError::InvalidSpec(format!("segment {k} has non-finite bounds")));
        }
        if s.t1 <= s.t0 {
            return Err(GeoError::GapOrOverlap { at: s.t0 });
        }
        if k > 0 && (s.t0 - segs[k - 1].t1).abs() > MATCH_TOL {
            return Err(GeoError::GapOrOverlap { at: s.t0.min(segs[k - 1].t1) });
        }
    }

    let mut breakpoints = Vec::with_capacity(segs.len() + 1);
    breakpoints.push(0.0);
    for s in &segs[..segs.len() - 1] {
        breakpoints.push(s.t1);
    }
    breakpoints.push(1.0);

    for (k, s) in segs.iter().enumerate() {
        let (t0, t1) = (breakpoints[k], breakpoints[k + 1]);
        s.theta.validate(t0, t1)?;
        s.beta.validate(t0, t1)?;
        for v in s.beta.knot_values(t0, t1) {
            if !(-RANGE_SLACK..=PI + RANGE_SLACK).contains(&v) {
                return Err(GeoError::BetaOutOfRange { at: t0, value: v });
            }
        }
    }
    for k in 1..segs.len() {
        let t = breakpoints[k];
        let jump = |prev: &Piece, next: &Piece| {
            (prev.value(breakpoints[k - 1], t) - next.value(t, t)).abs()
        };
        let j = jump(&segs[k - 1].theta, &segs[k].theta).max(jump(&segs[k - 1].beta, &segs[k].beta));
        if j > JUMP_TOL {
            return Err(GeoError::DiscontinuousPath { at: t, jump: j });
        }
    }
    let theta_start = segs[0].theta.value(0.0, 0.0);
    if theta_start.abs() > MATCH_TOL {
        return Err(GeoError::ThetaNonzeroAtStart { value: theta_start });
    }

    let mut segments = Vec::new();
    for (k, s) in segs.iter().enumerate() {
        let (t0, t1) = (breakpoints[k], breakpoints[k + 1]);
        let mut knots: Vec<f64> = vec![t0, t1];
        knots.extend_from_slice(s.theta.interior_knots());
        knots.extend_from_slice(s.beta.interior_knots());
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        for w in knots.windows(2) {
            let (u, v) = (w[0], w[1]);
            let mid = 0.5 * (u + v);
            segments.push(Segment {
                t0: u,
                t1: v,
                theta0: s.theta.value(t0, u),
                theta_rate: s.theta.slope(mid),
                beta0: s.beta.value(t0, u),
                beta_rate: s.beta.slope(mid),
            });
        }
    }
    let lip = |f: fn(&Segment) -> f64| segments.iter().map(|s| f(s).abs()).fold(0.0, f64::max);
    let theta_lip = lip(|s| s.theta_rate);
    let beta_lip = lip(|s| s.beta_rate);

    Ok(MotionPath {
        theta: ScalarPath {
            breakpoints: breakpoints.clone(),
            pieces: segs.iter().map(|s| s.theta.clone()).collect(),
            lipschitz_bound: theta_lip,
        },
        beta: ScalarPath {
            breakpoints,
            pieces: segs.iter().map(|s| s.beta.clone()).collect(),
            lipschitz_bound: beta_lip,
        },
        radii: spec.radii,
        segments,
    })
}

/// Evaluate angles and rates at `t`; see [`Side`] for the breakpoint convention.
pub fn eval_path(path: &MotionPath, t: f64, side: Side) -> Result<PathState> {
    path.eval(t, side)
}

pub fn topology_report(path: &MotionPath, tol: f64) -> TopologyReport {
    path.topology(tol)
}

impl MotionPath {
    /// Build directly from affine segments covering `[0, 1]`.
    pub fn from_segments(segments: &[Segment], radii: Radii) -> Result<Self> {
        let spec = MotionSpec {
            radii,
            segments: segments
                .iter()
                .map(|s| SegmentSpec::affine(s.t0, s.t1, s.theta0, s.theta_rate, s.beta0, s.beta_rate))
                .collect(),
        };
        build_path(&spec)
    }

    pub fn theta_path(&self) -> &ScalarPath {
        &self.theta
    }

    pub fn beta_path(&self) -> &ScalarPath {
        &self.beta
    }

    pub fn radii(&self) -> Radii {
        self.radii
    }

    pub fn with_radii(mut self, radii: Radii) -> Result<Self> {
        radii.validate()?;
        self.radii = radii;
        Ok(self)
    }

    /// The common refinement of all breakpoints and sample knots.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.theta.lipschitz_bound.max(self.beta.lipschitz_bound)
    }

    fn locate(&self, t: f64, side: Side) -> usize {
        let last = self.segments.len() - 1;
        let k = match side {
            Side::Left => self.segments.partition_point(|s| s.t1 < t),
            Side::Right | Side::TwoSided => self.segments.partition_point(|s| s.t1 <= t),
        };
        k.min(last)
    }

    pub fn eval(&self, t: f64, side: Side) -> Result<PathState> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GeoError::OutOfDomain { t });
        }
        let s = &self.segments[self.locate(t, side)];
        Ok(PathState {
            theta: s.theta(t),
            beta: s.beta(t),
            theta_rate: s.theta_rate,
            beta_rate: s.beta_rate,
        })
    }

    pub fn theta_end(&self) -> f64 {
        let s = self.segments.last().expect("validated path has segments");
        s.theta(s.t1)
    }

    pub fn beta_start(&self) -> f64 {
        self.segments[0].beta(0.0)
    }

    pub fn beta_end(&self) -> f64 {
        let s = self.segments.last().expect("validated path has segments");
        s.beta(s.t1)
    }

    pub fn topology(&self, tol: f64) -> TopologyReport {
        let theta_end = self.theta_end();
        let n = (theta_end / (2.0 * PI)).round() as i64;
        let closed = (theta_end - 2.0 * PI * n as f64).abs() <= tol
            && (self.beta_end() - self.beta_start()).abs() <= tol;
        TopologyReport { n, closed }
    }

    pub fn is_closed(&self) -> bool {
        self.topology(CLOSURE_TOL).closed
    }

    /// Segments with `beta` replaced by `clamp(beta, lo, hi)`.
    ///
    /// Segments are split at the exact times `beta` crosses a clamp level, so
    /// every returned segment is still affine in both angles.
    pub fn clamped_segments(&self, lo: f64, hi: f64) -> Vec<Segment> {
        let mut out = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            let mut cuts = vec![s.t0, s.t1];
            if s.beta_rate != 0.0 {
                for level in [lo, hi] {
                    let tc = s.t0 + (level - s.beta0) / s.beta_rate;
                    if tc > s.t0 && tc < s.t1 {
                        cuts.push(tc);
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            for w in cuts.windows(2) {
                let (u, v) = (w[0], w[1]);
                let mid = s.beta0 + s.beta_rate * (0.5 * (u + v) - s.t0);
                let (beta0, beta_rate) = if mid < lo {
                    (lo, 0.0)
                } else if mid > hi {
                    (hi, 0.0)
                } else {
                    ((s.beta0 + s.beta_rate * (u - s.t0)).clamp(lo, hi), s.beta_rate)
                };
                out.push(Segment {
                    t0: u,
                    t1: v,
                    theta0: s.theta(u),
                    theta_rate: s.theta_rate,
                    beta0,
                    beta_rate,
                });
            }
        }
        out
    }

    /// The motion description this path was built from.
    pub fn to_spec(&self) -> MotionSpec {
        let bp = &self.theta.breakpoints;
        MotionSpec {
            radii: self.radii,
            segments: (0..self.theta.pieces.len())
                .map(|k| SegmentSpec {
                    t0: bp[k],
                    t1: bp[k + 1],
                    theta: self.theta.pieces[k].clone(),
                    beta: self.beta.pieces[k].clone(),
                })
                .collect(),
        }
    }

    /// The same motion run backwards, with `theta` shifted to start at zero.
    pub fn reversed(&self) -> Result<MotionPath> {
        let spec = self.to_spec();
        let offset = -self.theta_end();
        let segments = spec
            .segments
            .iter()
            .rev()
            .map(|s| SegmentSpec {
                t0: 1.0 - s.t1,
                t1: 1.0 - s.t0,
                theta: s.theta.reversed(s.t0, s.t1).shifted(offset),
                beta: s.beta.reversed(s.t0, s.t1),
            })
            .collect();
        build_path(&MotionSpec { radii: self.radii, segments })
    }

    /// Run `self` on `[0, 1/2]` and then `other` on `[1/2, 1]`.
    pub fn concatenate(&self, other: &MotionPath) -> Result<MotionPath> {
        let offset = self.theta_end();
        let mut segments: Vec<SegmentSpec> = self
            .to_spec()
            .segments
            .into_iter()
            .map(|s| SegmentSpec {
                t0: 0.5 * s.t0,
                t1: 0.5 * s.t1,
                theta: s.theta.rescaled(0.5, 0.0),
                beta: s.beta.rescaled(0.5, 0.0),
            })
            .collect();
        segments.extend(other.to_spec().segments.into_iter().map(|s| SegmentSpec {
            t0: 0.5 + 0.5 * s.t0,
            t1: 0.5 + 0.5 * s.t1,
            theta: s.theta.rescaled(0.5, 0.5).shifted(offset),
            beta: s.beta.rescaled(0.5, 0.5),
        }));
        build_path(&MotionSpec { radii: self.radii, segments })
    }
}

/// The six worked motions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Example {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

/// Default tilt used by [`Example::IV`].
pub const DEFAULT_BETA0: f64 = PI / 3.0;

impl Example {
    pub const ALL: [Example; 6] = [Example::I, Example::II, Example::III, Example::IV, Example::V, Example::VI];

    pub fn id(&self) -> &'static str {
        match self {
            Example::I => "i",
            Example::II => "ii",
            Example::III => "iii",
            Example::IV => "iv",
            Example::V => "v",
            Example::VI => "vi",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Example::I => "disc lies flat outside the fixed disc and rolls once around (theta = 2 pi t, beta = 0)",
            Example::II => "disc stands upright and rolls once around (theta = 2 pi t, beta = pi/2)",
            Example::III => "disc lies flat on top of the fixed disc and rolls once around (theta = 2 pi t, beta = pi)",
            Example::IV => "disc at constant tilt beta0 rolls once around (theta = 2 pi t, beta = beta0)",
            Example::V => "quarter lap flat, stand up, quarter lap back upright, lie down (n = 0)",
            Example::VI => "three quarter laps backwards flat, stand up, quarter lap back upright, lie down (n = -1)",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Example {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Example::I),
            "ii" | "2" => Ok(Example::II),
            "iii" | "3" => Ok(Example::III),
            "iv" | "4" => Ok(Example::IV),
            "v" | "5" => Ok(Example::V),
            "vi" | "6" => Ok(Example::VI),
            _ => Err(GeoError::UnknownExample(s.to_string())),
        }
    }
}

/// One of the six worked motions with unit radii. `beta0` only affects [`Example::IV`].
pub fn example_gallery(example: Example, beta0: Option<f64>) -> Result<MotionPath> {
    build_path(&gallery_spec(example, beta0))
}

pub fn gallery_spec(example: Example, beta0: Option<f64>) -> MotionSpec {
    let tau = 2.0 * PI;
    let seg = SegmentSpec::affine;
    let segments = match example {
        Example::I => vec![seg(0.0, 1.0, 0.0, tau, 0.0, 0.0)],
        Example::II => vec![seg(0.0, 1.0, 0.0, tau, PI / 2.0, 0.0)],
        Example::III => vec![seg(0.0, 1.0, 0.0, tau, PI, 0.0)],
        Example::IV => vec![seg(0.0, 1.0, 0.0, tau, beta0.unwrap_or(DEFAULT_BETA0), 0.0)],
        Example::V => vec![
            seg(0.0, 0.25, 0.0, tau, 0.0, 0.0),
            seg(0.25, 0.5, PI / 2.0, 0.0, 0.0, tau),
            seg(0.5, 0.75, PI / 2.0, -tau, PI / 2.0, 0.0),
            seg(0.75, 1.0, 0.0, 0.0, PI / 2.0, -tau),
        ],
        Example::VI => vec![
            seg(0.0, 0.25, 0.0, -3.0 * tau, 0.0, 0.0),
            seg(0.25, 0.5, -1.5 * PI, 0.0, 0.0, tau),
            seg(0.5, 0.75, -1.5 * PI, -tau, PI / 2.0, 0.0),
            seg(0.75, 1.0, -tau, 0.0, PI / 2.0, -tau),
        ],
    };
    MotionSpec { radii: Radii::default(), segments }
}
