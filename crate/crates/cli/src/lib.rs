//! Command-line front end for `unsteer-core`.

pub mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;
use unsteer_core::boxes::{box_from_state, estimate_params_from_box, steering_functional, white_noise_bb84};
use unsteer_core::boxes::{CorrelationBox, MeasurementSet};
use unsteer_core::decomposition::{
    canonical_split_2set, canonical_split_3set, certify_quantumness_with_margin, schrodinger_strength_bb84,
    schrodinger_strength_bd, steering_cost_bb84,
};
use unsteer_core::quantum::{bd_eigenvalues, bell_diagonal, canonical_form, geometric_discord, is_separable_bd};
use unsteer_core::quantum::{BellDiagonalParams, EIGENVALUE_LABELS};
use unsteer_core::rac::{
    optimize_rac, rac_classical_bound, rac_efficiency_bd, simulate_rac, sweep_separable_max, RacSpec,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "unsteer", version, about = "Steering and superunsteerability analysis of Bell-diagonal states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    /// Eigenvalues, separability, discord, strengths and splits of a state
    State,
    /// Correlation table and steering functional of a box
    #[command(name = "box")]
    CorrelationBox,
    /// Certificate for a box at hidden-variable dimension --dim
    Certify,
    /// Random access code efficiencies with simulation cross-checks
    Rac,
    /// Grid sweep over canonical triples, CSV by default
    Sweep,
    /// Cost, strength and verdict along the white-noise BB84 family
    Bb84,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::State => "state",
            CommandKind::CorrelationBox => "box",
            CommandKind::Certify => "certify",
            CommandKind::Rac => "rac",
            CommandKind::Sweep => "sweep",
            CommandKind::Bb84 => "bb84",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Inline correlation triple
    #[arg(long, global = true, value_name = "C1,C2,C3", allow_hyphen_values = true)]
    pub c: Option<String>,
    /// State file, `{"c": [c1, c2, c3]}` or an inline triple
    #[arg(long, global = true, value_name = "FILE")]
    pub state: Option<PathBuf>,
    /// Box file, `{"n": n, "p": [x][y][a][b]}`
    #[arg(long = "box", global = true, value_name = "FILE")]
    pub box_file: Option<PathBuf>,
    /// Number of measurement settings (2 or 3)
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Hidden-variable dimension d_A
    #[arg(long, global = true, default_value_t = 2)]
    pub dim: usize,
    /// Margin on the steering functional
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Grid step for sweep and bb84
    #[arg(long, global = true, default_value_t = 0.01)]
    pub step: f64,
    /// Single BB84 visibility
    #[arg(long, global = true)]
    pub v: Option<f64>,
    /// Random restarts of the encoding optimizer
    #[arg(long, global = true, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Record wall-clock time in the report (makes output run-dependent)
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<unsteer_core::Error> for CliError {
    fn from(e: unsteer_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    None,
    Inline(String),
    StateFile(PathBuf),
    BoxFile(PathBuf),
}

/// A validated invocation.
#[derive(Debug, Clone)]
pub struct CommandSpec {
    pub command: CommandKind,
    pub input: Input,
    pub options: Options,
    pub format: Format,
}

impl CommandSpec {
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let o = &cli.options;
        let sources = [o.c.is_some(), o.state.is_some(), o.box_file.is_some()];
        if sources.iter().filter(|&&s| s).count() > 1 {
            return Err(invalid("give at most one of --c, --state, --box"));
        }
        let input = if let Some(c) = &o.c {
            Input::Inline(c.clone())
        } else if let Some(p) = &o.state {
            Input::StateFile(p.clone())
        } else if let Some(p) = &o.box_file {
            Input::BoxFile(p.clone())
        } else {
            Input::None
        };
        let command = cli.command;
        match (command, &input) {
            (CommandKind::State | CommandKind::Rac, Input::None) => {
                return Err(invalid(format!("{} needs --c or --state", command.name())))
            }
            (CommandKind::State | CommandKind::Rac, Input::BoxFile(_)) => {
                return Err(invalid(format!("{} takes a state, not --box", command.name())))
            }
            (CommandKind::CorrelationBox | CommandKind::Certify, Input::None) => {
                return Err(invalid(format!("{} needs --box, --c or --state", command.name())))
            }
            (CommandKind::Sweep | CommandKind::Bb84, i) if *i != Input::None => {
                return Err(invalid(format!("{} takes no state or box input", command.name())))
            }
            _ => {}
        }
        if let Some(n) = o.n {
            if n != 2 && n != 3 {
                return Err(invalid(format!("--n must be 2 or 3, got {n}")));
            }
        }
        if o.dim == 0 {
            return Err(invalid("--dim must be at least 1"));
        }
        if !(o.tol.is_finite() && o.tol > 0.0 && o.tol <= 1e-3) {
            return Err(invalid(format!("--tol must lie in (0, 1e-3], got {}", o.tol)));
        }
        if !(o.step.is_finite() && o.step > 0.0) {
            return Err(invalid(format!("--step must be positive, got {}", o.step)));
        }
        if o.restarts == 0 {
            return Err(invalid("--restarts must be at least 1"));
        }
        let default_format = if command == CommandKind::Sweep { Format::Csv } else { Format::Json };
        let format = o.format.unwrap_or(default_format);
        if format == Format::Csv && !matches!(command, CommandKind::Sweep | CommandKind::Bb84) {
            return Err(invalid(format!("--format csv is only available for sweep and bb84, not {}", command.name())));
        }
        Ok(Self {
            command,
            input,
            options: cli.options,
            format,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    c: [f64; 3],
}

/// Parses `{"c": [c1, c2, c3]}` or an inline `c1,c2,c3` and checks the
/// state is physical.
pub fn parse_state_spec(text: &str) -> unsteer_core::Result<BellDiagonalParams> {
    let text = text.trim();
    let c = if text.starts_with('{') {
        serde_json::from_str::<StateJson>(text)
            .map_err(|e| unsteer_core::Error::Parse(format!("state JSON: {e}")))?
            .c
    } else {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(unsteer_core::Error::Parse(format!(
                "correlation triple: expected three comma-separated numbers, got {text:?}"
            )));
        }
        let mut c = [0.0; 3];
        for (slot, part) in c.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| unsteer_core::Error::Parse(format!("correlation triple: {part:?} is not a number")))?;
        }
        c
    };
    if let Some(bad) = c.iter().find(|v| !v.is_finite()) {
        return Err(unsteer_core::Error::Parse(format!("correlation triple: {bad} is not finite")));
    }
    BellDiagonalParams::new(c[0], c[1], c[2])
}

fn read_file(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_params(input: &Input) -> CliResult<BellDiagonalParams> {
    let text = match input {
        Input::Inline(s) => s.clone(),
        Input::StateFile(p) => read_file(p)?,
        _ => return Err(invalid("a state input is required")),
    };
    Ok(parse_state_spec(&text)?)
}

/// Box from `--box`, or from a state measured along the first `n` Pauli axes.
fn load_box(spec: &CommandSpec) -> CliResult<CorrelationBox> {
    match &spec.input {
        Input::BoxFile(p) => {
            let b: CorrelationBox = serde_json::from_str(&read_file(p)?)
                .map_err(|e| invalid(format!("box JSON in {}: {e}", p.display())))?;
            if let Some(n) = spec.options.n {
                if n != b.n() {
                    return Err(invalid(format!("--n {n} does not match the box (n = {})", b.n())));
                }
            }
            Ok(b)
        }
        input => {
            let params = load_params(input)?;
            let n = spec.options.n.unwrap_or(2);
            let m = MeasurementSet::pauli(n)?;
            Ok(box_from_state(&bell_diagonal(&params)?, &m, &m)?)
        }
    }
}

/// Everything a command produced, before rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: CommandKind,
    pub inputs: Value,
    pub results: Value,
    pub timing: Option<f64>,
    /// Plain table for `--format csv`.
    pub csv: Option<String>,
}

impl Report {
    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command.name(),
            "inputs": self.inputs,
            "results": self.results,
            "version": VERSION,
            "timing": self.timing.map(|s| json!({ "seconds": s })),
        })
    }
}

fn input_echo(spec: &CommandSpec) -> Value {
    let o = &spec.options;
    let mut m = Map::new();
    match &spec.input {
        Input::Inline(s) => {
            m.insert("c".into(), json!(s));
        }
        Input::StateFile(p) => {
            m.insert("state".into(), json!(p.display().to_string()));
        }
        Input::BoxFile(p) => {
            m.insert("box".into(), json!(p.display().to_string()));
        }
        Input::None => {}
    }
    if let Some(n) = o.n {
        m.insert("n".into(), json!(n));
    }
    match spec.command {
        CommandKind::Certify | CommandKind::State | CommandKind::Bb84 => {
            m.insert("dim".into(), json!(o.dim));
            m.insert("tol".into(), json!(o.tol));
        }
        CommandKind::CorrelationBox => {
            m.insert("tol".into(), json!(o.tol));
        }
        CommandKind::Rac => {
            m.insert("restarts".into(), json!(o.restarts));
        }
        CommandKind::Sweep => {}
    }
    if matches!(spec.command, CommandKind::Sweep | CommandKind::Bb84) && o.v.is_none() {
        m.insert("step".into(), json!(o.step));
    }
    if let (CommandKind::Bb84, Some(v)) = (spec.command, o.v) {
        m.insert("v".into(), json!(v));
    }
    Value::Object(m)
}

/// Runs the command and returns its report.
pub fn run(spec: &CommandSpec) -> CliResult<Report> {
    let start = Instant::now();
    let (results, csv) = match spec.command {
        CommandKind::State => (state_results(spec)?, None),
        CommandKind::CorrelationBox => (box_results(spec)?, None),
        CommandKind::Certify => {
            let b = load_box(spec)?;
            let cert = certify_quantumness_with_margin(&b, b.n(), spec.options.dim, spec.options.tol)?;
            (serde_json::to_value(&cert).map_err(|e| CliError::Internal(e.to_string()))?, None)
        }
        CommandKind::Rac => (rac_results(spec)?, None),
        CommandKind::Sweep => sweep_results(spec)?,
        CommandKind::Bb84 => bb84_results(spec)?,
    };
    Ok(Report {
        command: spec.command,
        inputs: input_echo(spec),
        results,
        timing: spec.options.timing.then(|| start.elapsed().as_secs_f64()),
        csv,
    })
}

/// Renders a report in the requested format.
pub fn render(report: &Report, format: Format) -> CliResult<String> {
    match format {
        Format::Json => Ok(output::to_json(&report.to_value())),
        Format::Text => Ok(output::to_text(&report.to_value())),
        Format::Csv => report
            .csv
            .clone()
            .ok_or_else(|| invalid(format!("no CSV output for {}", report.command.name()))),
    }
}

/// Parses, runs and writes the output; the error carries the exit code.
pub fn execute(cli: Cli) -> CliResult<()> {
    let spec = CommandSpec::from_cli(cli)?;
    let text = render(&run(&spec)?, spec.format)?;
    match &spec.options.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Internal(format!("cannot write output: {e}")))
        }
    }
}

fn verdict_for(params: &BellDiagonalParams, n: usize, spec: &CommandSpec) -> CliResult<Value> {
    let m = MeasurementSet::pauli(n)?;
    let b = box_from_state(&bell_diagonal(params)?, &m, &m)?;
    let cert = certify_quantumness_with_margin(&b, n, spec.options.dim, spec.options.tol)?;
    Ok(json!(cert.verdict.as_str()))
}

fn split_value(split: unsteer_core::Result<unsteer_core::decomposition::StateSplit>) -> Value {
    match split {
        Ok(s) => json!({ "weight": s.weight, "separable_c": s.separable_params.c() }),
        Err(e) => json!({ "unavailable": e.to_string() }),
    }
}

fn state_results(spec: &CommandSpec) -> CliResult<Value> {
    let params = load_params(&spec.input)?;
    let canonical = canonical_form(&params).canonical;
    let eigen: Map<String, Value> = EIGENVALUE_LABELS
        .iter()
        .zip(bd_eigenvalues(&params))
        .map(|(label, v)| (label.replace('λ', "lambda"), json!(v)))
        .collect();
    Ok(json!({
        "c": params.c(),
        "canonical_c": canonical.c(),
        "eigenvalues": eigen,
        "separable": is_separable_bd(&params)?,
        "discord": geometric_discord(&params),
        "strength_2": schrodinger_strength_bd(&params, 2)?,
        "strength_3": schrodinger_strength_bd(&params, 3)?,
        "efficiency_2": rac_efficiency_bd(&params, 2)?,
        "efficiency_3": rac_efficiency_bd(&params, 3)?,
        "split_2": split_value(canonical_split_2set(&canonical)),
        "split_3": split_value(canonical_split_3set(&canonical)),
        "verdict_2": verdict_for(&params, 2, spec)?,
        "verdict_3": verdict_for(&params, 3, spec)?,
    }))
}

fn box_results(spec: &CommandSpec) -> CliResult<Value> {
    let b = load_box(spec)?;
    let functional = steering_functional(&b);
    Ok(json!({
        "n": b.n(),
        "p": b.to_nested(),
        "functional": functional,
        "witnessed": functional > 1.0 + spec.options.tol,
        "uniform_alice_marginals": b.has_uniform_alice_marginals(1e-12),
        "estimated_c": estimate_params_from_box(&b).c(),
    }))
}

fn rac_results(spec: &CommandSpec) -> CliResult<Value> {
    let params = load_params(&spec.input)?;
    let ns = match spec.options.n {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let mut out = Map::new();
    for n in ns {
        let efficiency = rac_efficiency_bd(&params, n)?;
        let bound = rac_classical_bound(n)?;
        let simulated = match RacSpec::standard(params, n) {
            Ok(rs) => {
                let sim = simulate_rac(&rs)?;
                json!({
                    "p_min": sim.p_min,
                    "deviation": (sim.p_min - efficiency).abs(),
                    "encodings": rs.encodings,
                    "decode_axes": rs.decode_axes,
                    "decode_flips": rs.decode_flips,
                })
            }
            Err(e) => json!({ "unavailable": e.to_string() }),
        };
        let optimized = optimize_rac(&params, n, spec.options.restarts)?;
        out.insert(
            n.to_string(),
            json!({
                "efficiency": efficiency,
                "classical_bound": bound,
                "exceeds_classical": efficiency > bound,
                "simulated": simulated,
                "optimized_p_min": optimized.p_min,
            }),
        );
    }
    Ok(Value::Object(out))
}

fn sweep_results(spec: &CommandSpec) -> CliResult<(Value, Option<String>)> {
    let n = spec.options.n.unwrap_or(2);
    let report = sweep_separable_max(n, spec.options.step)?;
    let mut csv = Vec::new();
    report
        .write_csv(&mut csv)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let summary = json!({
        "n": n,
        "rows": report.rows.len(),
        "separable_rows": report.rows.iter().filter(|r| r.separable).count(),
        "strength_max": report.strength_max,
        "efficiency_max": report.efficiency_max,
        "witness": report.witness,
    });
    Ok((summary, Some(String::from_utf8(csv).expect("ASCII CSV"))))
}

fn bb84_results(spec: &CommandSpec) -> CliResult<(Value, Option<String>)> {
    let vs: Vec<f64> = match spec.options.v {
        Some(v) => vec![v],
        None => {
            let step = spec.options.step;
            if step > 1.0 {
                return Err(invalid(format!("--step must lie in (0, 1] for bb84, got {step}")));
            }
            let inverse = (1.0 / step).round();
            if (inverse * step - 1.0).abs() < 1e-9 {
                (0..=inverse as usize).map(|i| i as f64 / inverse).collect()
            } else {
                (0..=(1.0 / step + 1e-9).floor() as usize).map(|i| i as f64 * step).collect()
            }
        }
    };
    let mut rows = Vec::new();
    let mut csv = String::from("v,functional,cost,strength,verdict\n");
    for v in vs {
        let b = white_noise_bb84(v)?;
        let functional = steering_functional(&b);
        let cost = steering_cost_bb84(v)?;
        let (strength, _) = schrodinger_strength_bb84(v)?;
        let verdict = certify_quantumness_with_margin(&b, 2, spec.options.dim, spec.options.tol)?.verdict;
        csv.push_str(&format!("{v:.16e},{functional:.16e},{cost:.16e},{strength:.16e},{verdict}\n"));
        rows.push(json!({
            "v": v,
            "functional": functional,
            "cost": cost,
            "strength": strength,
            "verdict": verdict.as_str(),
        }));
    }
    let results = if rows.len() == 1 { rows.pop().expect("one row") } else { Value::Array(rows) };
    Ok((results, Some(csv)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_spec_forms() {
        assert_eq!(parse_state_spec(r#"{"c":[0.5,0.5,0]}"#).unwrap().c(), [0.5, 0.5, 0.0]);
        assert_eq!(parse_state_spec("1,1,-1").unwrap().c(), [1.0, 1.0, -1.0]);
        let err = parse_state_spec("0.9,0.9,0.9").unwrap_err();
        assert!(matches!(err, unsteer_core::Error::UnphysicalParams { .. }));
        assert!(err.to_string().contains("λ11"));
        assert!(matches!(parse_state_spec("0.1,0.2"), Err(unsteer_core::Error::Parse(_))));
        assert!(matches!(parse_state_spec(r#"{"c":[0,0,0],"x":1}"#), Err(unsteer_core::Error::Parse(_))));
    }

    fn spec(args: &[&str]) -> CliResult<CommandSpec> {
        let cli = Cli::try_parse_from(std::iter::once("unsteer").chain(args.iter().copied())).unwrap();
        CommandSpec::from_cli(cli)
    }

    #[test]
    fn input_sources_are_exclusive() {
        assert!(spec(&["state", "--c", "0,0,0", "--state", "x.json"]).is_err());
        assert!(spec(&["state"]).is_err());
        assert!(spec(&["sweep", "--c", "0,0,0"]).is_err());
        assert!(spec(&["state", "--format", "csv", "--c", "0,0,0"]).is_err());
        assert_eq!(spec(&["sweep"]).unwrap().format, Format::Csv);
        assert_eq!(spec(&["state", "--c", "-0.2,0.1,0"]).unwrap().input, Input::Inline("-0.2,0.1,0".into()));
    }

    #[test]
    fn state_report_numbers() {
        let report = run(&spec(&["state", "--c", "0.5,0.5,0"]).unwrap()).unwrap();
        let r = &report.results;
        assert_eq!(r["strength_2"].as_f64().unwrap(), 0.5);
        assert!((r["efficiency_2"].as_f64().unwrap() - 0.6768).abs() < 1e-4);
        assert_eq!(report.to_value()["timing"], Value::Null);
    }

    #[test]
    fn maximally_mixed_state_is_classical() {
        let report = run(&spec(&["state", "--c", "0,0,0"]).unwrap()).unwrap();
        let r = &report.results;
        assert_eq!(r["strength_2"].as_f64().unwrap(), 0.0);
        assert_eq!(r["discord"].as_f64().unwrap(), 0.0);
        assert_eq!(r["efficiency_2"].as_f64().unwrap(), 0.5);
        assert_eq!(r["verdict_2"], "CLASSICAL_AT_DIMENSION");
    }

    #[test]
    fn bb84_single_visibility() {
        let report = run(&spec(&["bb84", "--v", "0.5"]).unwrap()).unwrap();
        assert_eq!(report.results["verdict"], "SUPERUNSTEERABLE");
    }
}
