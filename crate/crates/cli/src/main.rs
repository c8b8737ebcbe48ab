use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geophase::foucault::{ingest_track, route_foucault, stationary_track};
use geophase::frames::{regularize, validate_epsilon, DEFAULT_EPSILON, DEFAULT_SAMPLES_PER_SEGMENT};
use geophase::motion::{build_path, example_gallery, Example, MotionPath, MotionSpec, Radii};
use geophase::oracle::{simulate_rolling, DEFAULT_STEPS};
use geophase::phase::{total_rotation_partial, Method, PhaseOptions, DEFAULT_LINE_TOL};
use geophase::GeoError;

mod report;

use report::{FoucaultReport, Input, Report};

#[derive(Parser)]
#[command(name = "geophase", version, about = "Rotation angle of a disc rolling on the rim of a fixed disc")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the dynamical and geometric phases of a motion
    Compute(ComputeArgs),
    /// Emit the sampled curve of disc normals, or the rolling simulation, as CSV
    Trace(TraceArgs),
    /// Foucault pendulum precession for a fixed site or a route
    Foucault(FoucaultArgs),
    /// List the built-in example motions
    Examples,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in example: i, ii, iii, iv, v or vi
    #[arg(long)]
    example: Option<String>,
    /// Motion description in JSON
    #[arg(long, value_name = "FILE")]
    motion: Option<PathBuf>,
}

#[derive(Args)]
struct MotionArgs {
    #[command(flatten)]
    source: Source,
    /// Fixed tilt of example iv, in radians
    #[arg(long, requires = "example")]
    beta0: Option<f64>,
    /// Radii of the fixed and rolling discs, as `a,b`
    #[arg(long, value_name = "A,B")]
    radii: Option<String>,
    /// Distance kept from the poles when sampling the curve of normals
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    motion: MotionArgs,
    /// Absolute tolerance of the line integral
    #[arg(long, default_value_t = DEFAULT_LINE_TOL)]
    tol: f64,
    /// Steps of the rolling simulation
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Comma-separated methods: line, baumkuchen, area, curvature, monopole, berry, oracle, monte_carlo
    #[arg(long, default_value = "line,area")]
    methods: String,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    motion: MotionArgs,
    /// Keep this many rows, evenly spaced in arc length
    #[arg(long)]
    samples: Option<usize>,
    /// Trace the rolling simulation instead of the curve of normals
    #[arg(long)]
    oracle: bool,
    /// Steps of the rolling simulation
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
}

#[derive(Args)]
struct FoucaultArgs {
    /// Route CSV with header `t_days,lon_deg,lat_deg`
    #[arg(long, value_name = "FILE", conflicts_with_all = ["lat", "days"], required_unless_present = "lat")]
    track: Option<PathBuf>,
    /// Latitude of a fixed site, in degrees
    #[arg(long, requires = "days", allow_negative_numbers = true)]
    lat: Option<f64>,
    /// Duration at the fixed site, in days
    #[arg(long, requires = "lat")]
    days: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

enum Failure {
    Geo(GeoError),
    Disagreement(GeoError),
    Io(String, io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Geo(e) if e.is_validation() => 2,
            Failure::Geo(_) => 1,
            Failure::Disagreement(_) => 3,
            Failure::Io(..) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Geo(e) | Failure::Disagreement(e) => e.to_string(),
            Failure::Io(what, e) => format!("{what}: {e}"),
        }
    }
}

impl From<GeoError> for Failure {
    fn from(e: GeoError) -> Self {
        Failure::Geo(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.display().to_string(), e))
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Io("stdout".into(), e))
}

fn parse_radii(text: &str) -> Result<Radii, GeoError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || GeoError::InvalidSpec(format!("radii must be `a,b`, got `{text}`"));
    let [a, b] = parts.as_slice() else { return Err(bad()) };
    let a = a.parse::<f64>().map_err(|_| bad())?;
    let b = b.parse::<f64>().map_err(|_| bad())?;
    Radii::new(a, b)
}

fn load_motion(args: &MotionArgs) -> Result<(MotionPath, String), Failure> {
    validate_epsilon(args.epsilon)?;
    let (path, source) = match (&args.source.example, &args.source.motion) {
        (Some(id), _) => {
            let e: Example = id.parse()?;
            (example_gallery(e, args.beta0)?, format!("example {}", e.id()))
        }
        (None, Some(file)) => {
            let spec = MotionSpec::from_json(&read(file)?)?;
            (build_path(&spec)?, format!("motion {}", file.display()))
        }
        (None, None) => unreachable!("clap requires a motion source"),
    };
    let path = match &args.radii {
        Some(text) => path.with_radii(parse_radii(text)?)?,
        None => path,
    };
    Ok((path, source))
}

fn parse_methods(text: &str) -> Result<BTreeSet<Method>, GeoError> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

fn compute(args: &ComputeArgs) -> Result<(), Failure> {
    let (path, source) = load_motion(&args.motion)?;
    let methods = parse_methods(&args.methods)?;
    if methods.is_empty() {
        return Err(GeoError::InvalidSpec("no methods requested".into()).into());
    }
    if methods.contains(&Method::Oracle) && args.steps == 0 {
        return Err(GeoError::InvalidSpec("--steps must be positive".into()).into());
    }
    let opts = PhaseOptions {
        epsilon: args.motion.epsilon,
        line_tol: args.tol,
        oracle_steps: args.steps,
        ..PhaseOptions::default()
    };
    let result = total_rotation_partial(&path, &methods, &opts)?;
    let input = Input::new(source, args.motion.beta0, &path, &opts, &methods);
    let report = Report::new(input, &methods, &result);
    emit(&match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    })?;
    if !matches!(args.format, Format::Text) {
        for w in &result.warnings {
            eprintln!("warning: {w}");
        }
    }
    result.verify().map_err(Failure::Disagreement)
}

fn trace(args: &TraceArgs) -> Result<(), Failure> {
    let (path, _) = load_motion(&args.motion)?;
    if args.oracle {
        let trace = simulate_rolling(&path, path.radii(), args.steps)?;
        return emit(&trace.to_csv());
    }
    let curve = regularize(&path, args.motion.epsilon, DEFAULT_SAMPLES_PER_SEGMENT)?;
    let samples = curve.samples();
    let picked: Vec<usize> = match args.samples {
        None => (0..samples.len()).collect(),
        Some(0) => Vec::new(),
        Some(1) => vec![0],
        Some(n) => {
            let total = curve.total_length();
            let mut j = 0;
            (0..n)
                .map(|k| {
                    let target = total * k as f64 / (n - 1) as f64;
                    while j + 1 < samples.len() && (samples[j + 1].s - target).abs() <= (samples[j].s - target).abs() {
                        j += 1;
                    }
                    j
                })
                .collect()
        }
    };
    let mut out = String::from("t,s,gx,gy,gz,phi,kappa_g\n");
    for i in picked {
        let s = &samples[i];
        out.push_str(&format!("{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n", s.t, s.s, s.g.x, s.g.y, s.g.z, s.phi, s.kappa_g));
    }
    emit(&out)
}

fn foucault(args: &FoucaultArgs) -> Result<(), Failure> {
    let (track, source) = match (&args.track, args.lat, args.days) {
        (Some(file), _, _) => (ingest_track(&read(file)?)?, format!("track {}", file.display())),
        (None, Some(lat), Some(days)) => (stationary_track(lat, days)?, format!("site at {lat} degrees for {days} days")),
        _ => unreachable!("clap requires a track or a site"),
    };
    let report = FoucaultReport::new(source, &track, &route_foucault(&track));
    emit(&match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    })
}

fn examples() -> Result<(), Failure> {
    let mut out = String::new();
    for e in Example::ALL {
        out.push_str(&format!("{:<4}{}\n", e.id(), e.description()));
    }
    emit(&out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compute(args) => compute(args),
        Command::Trace(args) => trace(args),
        Command::Foucault(args) => foucault(args),
        Command::Examples => examples(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
