//! Foucault pendulum precession, for fixed sites and for ships following a route.
//!
//! The rolling disc's normal maps to a point on the Earth: longitude is the lap
//! angle minus one turn per day, latitude is the tilt minus a right angle. The
//! pendulum's plane turns clockwise by minus the geometric phase.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::motion::{MotionPath, Side, CLOSURE_TOL};
use crate::phase::{geometric_phase_line, DEFAULT_LINE_TOL};
use crate::sphere::wrap_angle;

pub const TRACK_HEADER: [&str; 3] = ["t_days", "lon_deg", "lat_deg"];
const LAT_SLACK: f64 = 1e-12;

/// `(longitude, latitude)` of the disc normal at time `t_days`.
pub fn to_earth_coords(theta: f64, beta: f64, t_days: f64) -> (f64, f64) {
    (theta - 2.0 * PI * t_days, beta - FRAC_PI_2)
}

/// Precession of the pendulum plane over one closed motion, clockwise positive.
pub fn foucault_from_motion(path: &MotionPath) -> Result<f64> {
    let topo = path.topology(CLOSURE_TOL);
    if !topo.closed {
        return Err(GeoError::CurveNotClosed { gap: (path.theta_end() - 2.0 * PI * topo.n as f64).abs() });
    }
    Ok(-geometric_phase_line(path, DEFAULT_LINE_TOL)?)
}

/// One fix of a route, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackSample {
    pub t: f64,
    pub lon: f64,
    pub lat: f64,
}

/// A validated route: strictly increasing times, latitudes within the poles, continuous longitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteTrack {
    samples: Vec<TrackSample>,
}

impl RouteTrack {
    /// Validate the fixes and unwrap longitude so adjacent fixes never differ by more than half a turn.
    pub fn new(mut samples: Vec<TrackSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(GeoError::EmptyTrack);
        }
        for (i, s) in samples.iter_mut().enumerate() {
            if !s.t.is_finite() || !s.lon.is_finite() {
                return Err(GeoError::NonMonotoneTime(i));
            }
            if !(s.lat.abs() <= FRAC_PI_2 + LAT_SLACK) {
                return Err(GeoError::LatitudeOutOfRange(s.lat.to_degrees()));
            }
            s.lat = s.lat.clamp(-FRAC_PI_2, FRAC_PI_2);
        }
        for i in 1..samples.len() {
            if !(samples[i].t > samples[i - 1].t) {
                return Err(GeoError::NonMonotoneTime(i));
            }
            let prev = samples[i - 1].lon;
            samples[i].lon = prev + wrap_angle(samples[i].lon - prev);
        }
        Ok(RouteTrack { samples })
    }

    pub fn samples(&self) -> &[TrackSample] {
        &self.samples
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].t - self.samples[0].t
    }

    /// The same route reflected across the equator.
    pub fn mirrored(&self) -> RouteTrack {
        let samples = self.samples.iter().map(|s| TrackSample { lat: -s.lat, ..*s }).collect();
        RouteTrack { samples }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoucaultResult {
    /// Total precession, clockwise positive seen from above.
    pub delta_fou: f64,
    /// Contribution of each interval between consecutive fixes.
    pub accumulation: Vec<f64>,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `∫ sin(lat) (lon' + 2π) dt` along the piecewise-linear route, integrated exactly per interval.
pub fn route_foucault(track: &RouteTrack) -> FoucaultResult {
    let accumulation: Vec<f64> = track
        .samples
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let dt = b.t - a.t;
            let turn = (b.lon - a.lon) + 2.0 * PI * dt;
            turn * (0.5 * (a.lat + b.lat)).sin() * sinc(0.5 * (b.lat - a.lat))
        })
        .collect();
    FoucaultResult { delta_fou: accumulation.iter().sum(), accumulation }
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> GeoError {
    GeoError::ParseError { line, column, message: message.into() }
}

/// Parse a route CSV with header `t_days,lon_deg,lat_deg`.
///
/// Blank lines and lines starting with `#` are ignored. Line and column numbers in
/// errors are 1-based; the column counts fields.
pub fn ingest_track(text: &str) -> Result<RouteTrack> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = rows.next().ok_or(GeoError::EmptyTrack)?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if let Some(col) = (0..names.len().max(3)).find(|&i| names.get(i) != TRACK_HEADER.get(i)) {
        return Err(parse_error(line, col + 1, format!("expected header `{}`", TRACK_HEADER.join(","))));
    }

    let mut samples = Vec::new();
    for (line, row) in rows {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_error(line, fields.len().min(3) + 1, format!("expected 3 fields, found {}", fields.len())));
        }
        let mut values = [0.0; 3];
        for (col, (field, v)) in fields.iter().zip(values.iter_mut()).enumerate() {
            *v = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_error(line, col + 1, format!("`{field}` is not a number")))?;
        }
        let [t, lon, lat] = values;
        if lat.abs() > 90.0 {
            return Err(GeoError::LatitudeOutOfRange(lat));
        }
        samples.push(TrackSample { t, lon: lon.to_radians(), lat: lat.to_radians() });
    }
    RouteTrack::new(samples)
}

/// Sample a motion at `samples + 1` evenly spaced times as a one-day route.
pub fn track_from_motion(path: &MotionPath, samples: usize) -> Result<RouteTrack> {
    let samples = samples.max(1);
    let fixes = (0..=samples)
        .map(|k| {
            let t = k as f64 / samples as f64;
            let s = path.eval(t, Side::TwoSided)?;
            let (lon, lat) = to_earth_coords(s.theta, s.beta, t);
            Ok(TrackSample { t, lon, lat })
        })
        .collect::<Result<Vec<_>>>()?;
    RouteTrack::new(fixes)
}

/// A pendulum fixed at latitude `lat_deg` for `days` days.
pub fn stationary_track(lat_deg: f64, days: f64) -> Result<RouteTrack> {
    if !(lat_deg.abs() <= 90.0) {
        return Err(GeoError::LatitudeOutOfRange(lat_deg));
    }
    if !(days > 0.0) || !days.is_finite() {
        return Err(GeoError::NonMonotoneTime(1));
    }
    let lat = lat_deg.to_radians();
    RouteTrack::new(vec![TrackSample { t: 0.0, lon: 0.0, lat }, TrackSample { t: days, lon: 0.0, lat }])
}
