use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use steerlab::assemblage::{build_assemblage, Direction};
use steerlab::criteria::{
    canonical_settings, classify_infinite, classify_three_settings, classify_two_settings,
    steerable_a_to_b_infinite, unsteerable_b_to_a_infinite,
};
use steerlab::lhs::direct_radius;
use steerlab::qubit::TwoQubitState;
use steerlab::scan::{scan_linear, scan_region, Range, Scenario, ScanSpec};
use steerlab::search::{steering_radius, SearchConfig};
use steerlab::states::{load_state, make_family_state, state_to_json, FamilyParams, StateMeta};
use steerlab::stats::{bootstrap_radius, simulate_counts};
use steerlab::Error;

use crate::args::{
    ClassifyArgs, Command, DirectionArg, Format, RadiusArgs, ScanLinearArgs, ScanRegionArgs,
    ScenarioArg, SimulateArgs, StateArgs, StateFileArgs,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "input",
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::SolverStall(_) => (3, "solver_stall"),
            Error::Normalization { .. } => (2, "normalization"),
            Error::Trace { .. } => (2, "trace"),
            Error::Param(_) => (2, "param"),
            Error::Parse { .. } => (2, "parse"),
            Error::Validation(_) => (2, "validation"),
            Error::DuplicateSetting { .. } => (2, "duplicate_setting"),
            Error::Cap { .. } => (2, "cap"),
            Error::InsufficientData(_) => (2, "insufficient_data"),
            Error::Io(_) => (2, "io"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// `%.9g`-style formatting.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..9).contains(&exp) {
        trim(format!("{x:.*}", (8 - exp) as usize))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn direction(d: DirectionArg) -> Direction {
    match d {
        DirectionArg::Ab => Direction::AtoB,
        DirectionArg::Ba => Direction::BtoA,
    }
}

fn angle(value: f64, degrees: bool) -> f64 {
    if degrees {
        value.to_radians()
    } else {
        value
    }
}

fn load(state: &StateArgs) -> CliResult<TwoQubitState> {
    match (&state.state_file, state.p, state.theta) {
        (Some(path), None, None) => Ok(load_state(path)?.0),
        (None, Some(p), Some(theta)) => {
            Ok(make_family_state(FamilyParams::new(p, angle(theta, state.degrees))?))
        }
        _ => Err(CliError::input(
            "give either --state-file or both --p and --theta",
        )),
    }
}

/// Writes to `out` through a temporary file in the same directory, or to
/// stdout.
fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::from(Error::from(e));
    match out {
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(text.as_bytes()).map_err(io)?;
            tmp.persist(path).map_err(|e| io(e.error))?;
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(io)?;
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn csv_text(invocation: &str, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::from(Error::Io(e.to_string()));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    let body = w.into_inner().map_err(|e| CliError::from(Error::Io(e.to_string())))?;
    let mut text = format!("# steerlab {VERSION}: {invocation}\n");
    text.push_str(std::str::from_utf8(&body).expect("csv output is UTF-8"));
    Ok(text)
}

fn require(format: Format, allowed: &[Format]) -> CliResult<()> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(CliError::input(format!(
            "format {format:?} is not available for this command"
        )))
    }
}

pub fn run(command: Command, invocation: &str) -> CliResult<()> {
    match command {
        Command::Classify(a) => classify(a),
        Command::Radius(a) => radius(a),
        Command::ScanRegion(a) => scan_region_cmd(a, invocation),
        Command::ScanLinear(a) => scan_linear_cmd(a, invocation),
        Command::Simulate(a) => simulate(a),
        Command::State(a) => state(a),
    }
}

fn classify(a: ClassifyArgs) -> CliResult<()> {
    require(a.format, &[Format::Text, Format::Json])?;
    let theta = angle(a.theta, a.degrees);
    let two = classify_two_settings(a.p, theta)?;
    let three = classify_three_settings(a.p, theta)?;
    let inf = classify_infinite(a.p, theta)?;
    let bowles = unsteerable_b_to_a_infinite(a.p, theta)?;
    let ab_inf = steerable_a_to_b_infinite(a.p);
    let text = match a.format {
        Format::Json => json_text(&json!({
            "p": a.p,
            "theta": theta,
            "two_setting": two,
            "three_setting": three,
            "infinite": inf,
            "bowles_unsteerable_b_to_a": bowles,
            "steerable_a_to_b_infinite": ab_inf,
        })),
        _ => format!(
            "p: {}\ntheta: {}\n2-setting: {two}\n3-setting: {three}\ninfinite: {inf}\n\
             bowles_unsteerable_b_to_a: {bowles}\nsteerable_a_to_b_infinite: {ab_inf}\n",
            sig9(a.p),
            sig9(theta)
        ),
    };
    emit(a.out.as_deref(), &text)
}

fn radius(a: RadiusArgs) -> CliResult<()> {
    require(a.format, &[Format::Json])?;
    let rho = load(&a.state)?;
    let dir = direction(a.direction);
    let cfg = SearchConfig {
        restarts: a.restarts,
        seed: a.seed,
        include_canonical: !a.no_canonical,
        certify_tol: a.tol,
        ..SearchConfig::default()
    };
    let report = steering_radius(&rho, a.k, dir, &cfg)?;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["version"] = json!(VERSION);
    v["steerable"] = json!(report.certificate.r > 1.0 + a.tol);
    if a.dump_assemblage {
        let asm = build_assemblage(&rho, &report.best_settings, dir.measuring())?;
        v["assemblage"] = asm.to_json();
    }
    emit(a.out.as_deref(), &json_text(&v))
}

fn scan_region_cmd(a: ScanRegionArgs, invocation: &str) -> CliResult<()> {
    require(a.format, &[Format::Csv, Format::Json])?;
    let theta_max = a.theta_max.unwrap_or(if a.degrees { 45.0 } else { FRAC_PI_4 });
    let spec = ScanSpec {
        p: Range {
            min: a.p_min,
            max: a.p_max,
            steps: a.p_steps,
        },
        theta: Range {
            min: angle(a.theta_min, a.degrees),
            max: angle(theta_max, a.degrees).min(FRAC_PI_4),
            steps: a.theta_steps,
        },
        scenario: match a.scenario {
            ScenarioArg::Two => Scenario::Two,
            ScenarioArg::Three => Scenario::Three,
            ScenarioArg::Infinite => Scenario::Infinite,
        },
        with_solver: a.with_solver,
    };
    let rows = scan_region(&spec)?;
    let text = match a.format {
        Format::Json => json_text(&json!({
            "version": VERSION,
            "invocation": invocation,
            "spec": spec,
            "rows": rows,
        })),
        _ => {
            let mut header = vec![
                "p",
                "theta",
                "label",
                "label_2",
                "label_3",
                "label_inf",
                "bowles_unsteerable",
            ];
            if spec.with_solver {
                header.extend(["r_ab", "r_ba"]);
            }
            let body = rows
                .iter()
                .map(|r| {
                    let mut row = vec![
                        sig9(r.p),
                        sig9(r.theta),
                        r.label(spec.scenario).to_string(),
                        r.label_2.to_string(),
                        r.label_3.to_string(),
                        r.label_inf.to_string(),
                        r.bowles_unsteerable.to_string(),
                    ];
                    if let (Some(ab), Some(ba)) = (r.r_ab, r.r_ba) {
                        row.push(sig9(ab));
                        row.push(sig9(ba));
                    }
                    row
                })
                .collect();
            csv_text(invocation, &header, body)?
        }
    };
    emit(a.out.as_deref(), &text)
}

fn scan_linear_cmd(a: ScanLinearArgs, invocation: &str) -> CliResult<()> {
    require(a.format, &[Format::Csv, Format::Json])?;
    let rho = load(&a.state)?;
    let rows = scan_linear(&rho, &a.n, direction(a.direction))?;
    let text = match a.format {
        Format::Json => json_text(&json!({
            "version": VERSION,
            "invocation": invocation,
            "direction": direction(a.direction),
            "rows": rows,
        })),
        _ => csv_text(
            invocation,
            &["n", "s_n", "c_n", "s_minus_c"],
            rows.iter()
                .map(|r| vec![r.n.to_string(), sig9(r.s), sig9(r.c), sig9(r.violation)])
                .collect(),
        )?,
    };
    emit(a.out.as_deref(), &text)
}

fn simulate(a: SimulateArgs) -> CliResult<()> {
    require(a.format, &[Format::Json])?;
    if !(2..=3).contains(&a.k) {
        return Err(CliError::input(format!("--k must be 2 or 3, got {}", a.k)));
    }
    let rho = load(&a.state)?;
    let dir = direction(a.direction);
    let settings = canonical_settings(a.k)?;
    let noiseless = direct_radius(&build_assemblage(&rho, &settings, dir.measuring())?)?.r;
    let counts = simulate_counts(&rho, &settings, dir, a.counts, a.seed)?;
    if let Some(path) = &a.counts_out {
        emit(Some(path), &counts.to_csv()?)?;
    }
    let summary = bootstrap_radius(&counts, a.k, a.resamples, a.seed)?;
    let v = json!({
        "version": VERSION,
        "k": a.k,
        "direction": dir,
        "mean_counts": a.counts,
        "total_counts": counts.total(),
        "noiseless_r": noiseless,
        "bootstrap": summary,
    });
    emit(a.out.as_deref(), &json_text(&v))
}

fn state(a: StateFileArgs) -> CliResult<()> {
    let theta = angle(a.theta, a.degrees);
    let rho = make_family_state(FamilyParams::new(a.p, theta)?);
    let mut text = state_to_json(&rho, Some(StateMeta { p: a.p, theta }));
    text.push('\n');
    emit(a.out.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(0.5), "0.5");
        assert_eq!(sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(sig9(1.0 / 3f64.sqrt()), "0.577350269");
        assert_eq!(sig9(-0.1230000004), "-0.123");
        assert_eq!(sig9(1.5e-7), "1.5e-7");
        assert_eq!(sig9(123456789012.0), "1.23456789e11");
        assert_eq!(sig9(1e-5), "0.00001");
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::SolverStall("x".into())).code, 3);
        assert_eq!(CliError::from(Error::Param("x".into())).code, 2);
    }
}
