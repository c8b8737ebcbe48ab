use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use geophase::foucault::{FoucaultResult, RouteTrack};
use geophase::motion::{MotionPath, Radii};
use geophase::phase::{BaumkuchenBounds, Method, OracleSummary, PhaseOptions, PhaseResult, Tolerances};
use geophase::region::RegionReport;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Input {
    pub source: String,
    pub beta0: Option<f64>,
    pub segments: usize,
    pub radii: Radii,
    pub epsilon: f64,
    pub line_tol: f64,
    pub steps: usize,
    pub monte_carlo_seed: u64,
    pub tolerances: Tolerances,
    pub methods: Vec<String>,
}

impl Input {
    pub fn new(source: String, beta0: Option<f64>, path: &MotionPath, opts: &PhaseOptions, methods: &BTreeSet<Method>) -> Self {
        Input {
            source,
            beta0,
            segments: path.segments().len(),
            radii: path.radii(),
            epsilon: opts.epsilon,
            line_tol: opts.line_tol,
            steps: opts.oracle_steps,
            monte_carlo_seed: opts.mc_seed,
            tolerances: opts.tolerances,
            methods: methods.iter().map(|m| m.name().to_string()).collect(),
        }
    }
}

/// One requested method: either a value with its reconciliation, or the reason it failed.
#[derive(Debug, Serialize)]
pub struct MethodRow {
    pub method: String,
    pub delta_g: Option<f64>,
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub input: Input,
    pub n: i64,
    pub closed: bool,
    pub delta_d: f64,
    pub delta_g: BTreeMap<String, f64>,
    pub delta_total: f64,
    pub max_discrepancy: f64,
    pub methods: Vec<MethodRow>,
    pub region: Option<RegionReport>,
    pub baumkuchen: Option<BaumkuchenBounds>,
    pub oracle: Option<OracleSummary>,
    pub checks: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(input: Input, requested: &BTreeSet<Method>, result: &PhaseResult) -> Self {
        let mut listed = requested.clone();
        listed.insert(Method::Line);
        let methods = listed
            .iter()
            .map(|m| {
                let name = m.name();
                let rec = result.reconciliation.get(name);
                MethodRow {
                    method: name.to_string(),
                    delta_g: result.delta_g_by_method.get(name).copied(),
                    deviation: rec.map(|r| r.deviation),
                    tolerance: rec.map(|r| r.tolerance),
                    error: result.errors.get(name).cloned(),
                }
            })
            .collect();
        Report {
            input,
            n: result.n,
            closed: result.closed,
            delta_d: result.delta_d,
            delta_g: result.delta_g_by_method.clone(),
            delta_total: result.delta_total,
            max_discrepancy: result.max_discrepancy,
            methods,
            region: result.region,
            baumkuchen: result.baumkuchen,
            oracle: result.oracle,
            checks: result.checks.clone(),
            warnings: result.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,delta_g,deviation,tolerance,delta_d,delta_total,error\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for row in &self.methods {
            let error = row.error.as_deref().unwrap_or("").replace('"', "'");
            let _ = writeln!(
                out,
                "{},{},{},{},{:?},{:?},\"{}\"",
                row.method,
                opt(row.delta_g),
                opt(row.deviation),
                opt(row.tolerance),
                self.delta_d,
                self.delta_total,
                error
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let i = &self.input;
        let _ = writeln!(out, "{:<18}{}", "motion", i.source);
        if let Some(b) = i.beta0 {
            let _ = writeln!(out, "{:<18}{b}", "beta0");
        }
        let _ = writeln!(out, "{:<18}a = {}, b = {}", "radii", i.radii.a, i.radii.b);
        let closure = if self.closed { "closed" } else { "open" };
        let _ = writeln!(out, "{:<18}{} ({closure})", "laps", self.n);
        let _ = writeln!(out, "{:<18}{}", "epsilon", i.epsilon);
        out.push('\n');
        let _ = writeln!(out, "{:<14}{:>20}{:>12}{:>12}", "method", "delta_g", "deviation", "tolerance");
        for row in &self.methods {
            match (&row.error, row.delta_g) {
                (Some(e), _) => {
                    let _ = writeln!(out, "{:<14}error: {e}", row.method);
                }
                (None, Some(v)) => {
                    let dev = row.deviation.map(|d| format!("{d:.2e}")).unwrap_or_else(|| "reference".into());
                    let tol = row.tolerance.map(|t| format!("{t:.1e}")).unwrap_or_default();
                    let _ = writeln!(out, "{:<14}{v:>20.12}{dev:>12}{tol:>12}", row.method);
                }
                (None, None) => {}
            }
        }
        out.push('\n');
        let _ = writeln!(out, "{:<18}{:.12}", "dynamical phase", self.delta_d);
        let _ = writeln!(out, "{:<18}{:.12}", "total rotation", self.delta_total);
        let _ = writeln!(out, "{:<18}{:.3e}", "max discrepancy", self.max_discrepancy);
        if let Some(r) = &self.region {
            let _ = writeln!(
                out,
                "{:<18}I+ = {}, I- = {}, A+ = {:.9}, A- = {:.9}",
                "regions", r.i_plus, r.i_minus, r.a_plus, r.a_minus
            );
        }
        if let Some(b) = &self.baumkuchen {
            let _ = writeln!(out, "{:<18}[{:.12}, {:.12}] with N = {}", "ring bounds", b.lower, b.upper, b.n);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct FoucaultReport {
    pub source: String,
    pub samples: usize,
    pub days: f64,
    pub delta_fou: f64,
    pub delta_fou_deg: f64,
    pub accumulation: Vec<f64>,
    #[serde(skip)]
    times: Vec<f64>,
}

impl FoucaultReport {
    pub fn new(source: String, track: &RouteTrack, result: &FoucaultResult) -> Self {
        FoucaultReport {
            source,
            samples: track.samples().len(),
            days: track.duration(),
            delta_fou: result.delta_fou,
            delta_fou_deg: result.delta_fou.to_degrees(),
            accumulation: result.accumulation.clone(),
            times: track.samples().iter().map(|s| s.t).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t0_days,t1_days,contribution,accumulated\n");
        let mut total = 0.0;
        for (w, c) in self.times.windows(2).zip(&self.accumulation) {
            total += c;
            let _ = writeln!(out, "{:?},{:?},{c:?},{total:?}", w[0], w[1]);
        }
        out
    }

    pub fn to_text(&self) -> String {
        format!(
            "{:<18}{}\n{:<18}{}\n{:<18}{}\n{:<18}{:.12} rad ({:.6} degrees, clockwise)\n",
            "route",
            self.source,
            "fixes",
            self.samples,
            "days",
            self.days,
            "precession",
            self.delta_fou,
            self.delta_fou_deg
        )
    }
}
