use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped loosely by the module that raises them. The CLI maps
/// [`GeoError::is_validation`] errors to exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    // motion paths
    #[error("segments leave a gap or overlap near t = {at}")]
    GapOrOverlap { at: f64 },
    #[error("path jumps by {jump:e} at breakpoint t = {at}")]
    DiscontinuousPath { at: f64, jump: f64 },
    #[error("beta = {value} at t = {at} is outside [0, pi]")]
    BetaOutOfRange { at: f64, value: f64 },
    #[error("theta(0) = {value} but must be 0")]
    ThetaNonzeroAtStart { value: f64 },
    #[error("t = {t} is outside [0, 1]")]
    OutOfDomain { t: f64 },
    #[error("unknown example '{0}' (expected one of i, ii, iii, iv, v, vi)")]
    UnknownExample(String),
    #[error("invalid motion description: {0}")]
    InvalidSpec(String),
    #[error("radii must be positive (a = {a}, b = {b})")]
    InvalidRadii { a: f64, b: f64 },

    // sphere frames
    #[error("epsilon = {0} is outside (0, pi/8)")]
    EpsilonOutOfRange(f64),
    #[error("sample {0} sits on a cusp; geodesic curvature is undefined there")]
    AtCusp(usize),
    #[error("operation needs a smooth curve but {0} cusp(s) were found")]
    CurveHasCusps(usize),
    #[error("curve is degenerate (no moving arcs)")]
    DegenerateCurve,
    #[error("sample {0} is not interior to the curve")]
    NotInterior(usize),

    // region analysis
    #[error("curve is not closed (endpoint gap {gap:e})")]
    CurveNotClosed { gap: f64 },
    #[error("curve is not simple ({count} self-intersection(s))")]
    CurveNotSimple { count: usize },
    #[error("a pole lies on the curve")]
    PoleOnCurve,
    #[error("could not find a transversal test arc after {0} perturbations")]
    DegenerateArc(usize),
    #[error("azimuthal winding {winding} is inconsistent with pole indices ({i_plus}, {i_minus})")]
    WindingInconsistent { winding: i64, i_plus: u8, i_minus: u8 },
    #[error("pole classification changed between epsilon and epsilon/2")]
    UnstableClassification,
    #[error("curve is not a latitude circle; the cap formula does not apply")]
    NotLatitudeCircle,

    // phase engine
    #[error("adaptive quadrature did not reach tolerance {tol:e} within depth {depth}")]
    QuadratureFailure { tol: f64, depth: u32 },
    #[error("method '{method}' deviates from the line integral by {deviation:e} (limit {limit:e})")]
    MethodDisagreement { method: String, deviation: f64, limit: f64 },

    // gauge connections
    #[error("point lies on the singular string of the gauge patch")]
    OnSingularAxis,
    #[error("state is singular at this pole for the chosen patch")]
    AtSingularPole,
    #[error("gauge expressions disagree by {spread:e}")]
    GaugeInconsistency { spread: f64 },

    // rolling oracle
    #[error("orientation drift {0:e} exceeds limit")]
    DriftExceeded(f64),
    #[error("closure check failed: residual {0:e}")]
    ClosureMismatch(f64),
    #[error("rolling simulation needs at least {needed} steps, got {got}")]
    TooFewSteps { needed: usize, got: usize },

    // foucault
    #[error("track has no samples")]
    EmptyTrack,
    #[error("time is not strictly increasing at sample {0}")]
    NonMonotoneTime(usize),
    #[error("latitude {0} degrees is outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError { line: usize, column: usize, message: String },
}

impl GeoError {
    /// Errors caused by bad input rather than by a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            GeoError::GapOrOverlap { .. }
                | GeoError::DiscontinuousPath { .. }
                | GeoError::BetaOutOfRange { .. }
                | GeoError::ThetaNonzeroAtStart { .. }
                | GeoError::OutOfDomain { .. }
                | GeoError::UnknownExample(_)
                | GeoError::InvalidSpec(_)
                | GeoError::InvalidRadii { .. }
                | GeoError::EpsilonOutOfRange(_)
                | GeoError::EmptyTrack
                | GeoError::NonMonotoneTime(_)
                | GeoError::LatitudeOutOfRange(_)
                | GeoError::ParseError { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, GeoError>;
