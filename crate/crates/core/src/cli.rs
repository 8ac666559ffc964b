//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 a verification or
//! table check failed.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::extremal::{extremal_crossing, ExtremalConfig};
use crate::analysis::pipeline::{Model, Quantity};
use crate::analysis::ppt::{pattern_transitions, ppt_pattern};
use crate::analysis::sweep::{parse_grid, sweep, Noise, SweepConfig};
use crate::analysis::table1::{self, table1_report, DEFAULT_TOL_BISECT, DEFAULT_TOL_EXTREMAL};
use crate::analysis::threshold::quantity_threshold;
use crate::analysis::verify::{self, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::noise::{DephasingProfile, Schedule};
use crate::register::Representation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cluster-esd", version, about = "Dephasing, entanglement sudden death and gate fidelity of four-qubit cluster states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate metrics over a grid of p and angles.
    Sweep(SweepArgs),
    /// First crossing in p of one quantity.
    Threshold(ThresholdArgs),
    /// Recompute the ESD table and compare it with the quoted values.
    Table1(Table1Args),
    /// Closed forms against the numeric pipeline, plus the golden table.
    Verify(VerifyArgs),
    /// Regenerate the golden table from the numeric pipeline.
    Golden(GoldenArgs),
    /// NPT/PPT pattern of the four standard cuts.
    Ppt(PptArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_parser = parse_rep)]
    rep: Representation,
    /// Metric name; repeat or separate with commas.
    #[arg(long = "metric", required = true, value_delimiter = ',')]
    metrics: Vec<String>,
    /// Uniform dephasing axis, lo:hi:n.
    #[arg(long, group = "noise")]
    p_grid: Option<String>,
    /// Angle axis, thetaK=lo:hi:n (K = 1..4). Repeatable.
    #[arg(long)]
    theta_grid: Vec<String>,
    /// Fixed angle, thetaK=value. Repeatable.
    #[arg(long)]
    theta: Vec<String>,
    /// Per-qubit strengths p1,p2,p3,p4.
    #[arg(long, group = "noise")]
    profile: Option<String>,
    /// Same strength on every qubit.
    #[arg(long, group = "noise")]
    p: Option<f64>,
    #[arg(long, group = "noise", requires = "tau")]
    kappa: Option<f64>,
    #[arg(long, requires = "kappa")]
    tau: Option<f64>,
    /// base:dp:k1,k2,k3,k4
    #[arg(long, group = "noise")]
    schedule: Option<String>,
    /// Weight of the cluster state in the mixture with the identity.
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long)]
    quantity: String,
    #[arg(long, value_parser = parse_rep)]
    rep: Representation,
    /// theta1,theta2,theta3,theta4
    #[arg(long, default_value = "0,0,0,0")]
    angles: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Minimum and maximum crossing over all angles instead of one point.
    #[arg(long)]
    extremal: bool,
    #[arg(long, default_value_t = 64)]
    angle_points: usize,
    #[arg(long, default_value_t = 3)]
    refine_levels: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

#[derive(Debug, Args)]
struct Table1Args {
    /// Also write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL_BISECT)]
    tol_bisect: f64,
    #[arg(long, default_value_t = DEFAULT_TOL_EXTREMAL)]
    tol_extremal: f64,
    #[arg(long, default_value_t = 64)]
    angle_points: usize,
    #[arg(long, default_value_t = 3)]
    refine_levels: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Golden table to check instead of the embedded one.
    #[arg(long)]
    golden: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GoldenArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PptArgs {
    #[arg(long, value_parser = parse_rep)]
    rep: Representation,
    /// Uniform dephasing strength; omit to list the pattern transitions.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
}

fn parse_rep(s: &str) -> std::result::Result<Representation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{x}' in {what}"))))
        .collect()
}

/// `thetaK=rest` or `K=rest` to (0-based K, rest).
fn parse_theta_key(s: &str) -> Result<(usize, &str)> {
    let (key, rest) = s.split_once('=').ok_or_else(|| Error::Parse(format!("expected thetaK=..., got '{s}'")))?;
    let k: usize = key
        .trim()
        .trim_start_matches("theta")
        .parse()
        .map_err(|_| Error::Parse(format!("bad angle name '{key}'")))?;
    if !(1..=4).contains(&k) {
        return Err(Error::QubitOutOfRange { index: k, n_qubits: 4 });
    }
    Ok((k - 1, rest))
}

fn parse_schedule(s: &str) -> Result<Schedule> {
    let mut parts = s.splitn(3, ':');
    let (Some(base), Some(dp), Some(steps)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::Parse(format!("schedule must be base:dp:k1,k2,k3,k4, got '{s}'")));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{x}' in schedule")));
    let steps = steps
        .split(',')
        .map(|k| k.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad step '{k}' in schedule"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Schedule { base: num(base)?, delta_p: num(dp)?, steps })
}

fn sweep_noise(a: &SweepArgs) -> Result<Noise> {
    let fixed = |profile: DephasingProfile| -> Result<Noise> {
        if profile.n_qubits() != 4 {
            return Err(Error::DimensionMismatch(format!("need 4 strengths, got {}", profile.n_qubits())));
        }
        Ok(Noise::Fixed(profile))
    };
    if let Some(g) = &a.p_grid {
        Ok(Noise::UniformGrid(parse_grid(g)?))
    } else if let Some(s) = &a.profile {
        fixed(DephasingProfile::per_qubit(parse_floats(s, "--profile")?)?)
    } else if let Some(p) = a.p {
        fixed(DephasingProfile::uniform(p, 4)?)
    } else if let (Some(k), Some(t)) = (a.kappa, a.tau) {
        fixed(DephasingProfile::from_time(k, t, 4)?)
    } else if let Some(s) = &a.schedule {
        fixed(DephasingProfile::from_schedule(parse_schedule(s)?)?)
    } else {
        Err(Error::Parse("one of --p-grid, --profile, --p, --kappa/--tau, --schedule is required".into()))
    }
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_sweep(a: SweepArgs, stdout: &mut dyn Write) -> Result<i32> {
    let metrics = a.metrics.iter().map(|m| m.parse()).collect::<Result<Vec<Quantity>>>()?;
    let mut config = SweepConfig::new(a.rep, metrics, sweep_noise(&a)?);
    config.mix_q = a.q;
    for g in &a.theta_grid {
        let (k, spec) = parse_theta_key(g)?;
        config.theta_axes.push((k, parse_grid(spec)?));
    }
    for t in &a.theta {
        let (k, v) = parse_theta_key(t)?;
        config.fixed_theta[k] = v.trim().parse().map_err(|_| Error::Parse(format!("bad angle '{v}'")))?;
    }
    let result = sweep(&config)?;
    let text = match a.format {
        Format::Csv => result.to_csv_string()?,
        Format::Json => result.to_json_string()? + "\n",
    };
    write_output(a.out.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

fn run_threshold(a: ThresholdArgs, stdout: &mut dyn Write) -> Result<i32> {
    let quantity: Quantity = a.quantity.parse()?;
    let model = Model::new(a.rep, a.q)?;
    let json = matches!(a.format, TextFormat::Json);
    if a.extremal {
        let config = ExtremalConfig { angle_points: a.angle_points, refine_levels: a.refine_levels, tol: a.tol, ..Default::default() };
        let r = extremal_crossing(&model, &quantity, config)?;
        let text = match (&r, json) {
            (_, true) => serde_json::to_string_pretty(&r)?,
            (None, false) => format!("{} {}: none", a.rep, quantity),
            (Some(r), false) => format!(
                "{} {}: min {:.10} at {:?}, max {:.10} at {:?} ({}/{} grid points cross)",
                a.rep, quantity, r.min.root, r.min.theta, r.max.root, r.max.theta, r.crossing_points, r.grid_points
            ),
        };
        writeln!(stdout, "{text}")?;
        return Ok(EXIT_OK);
    }
    let angles = parse_floats(&a.angles, "--angles")?;
    let theta: [f64; 4] = angles
        .try_into()
        .map_err(|v: Vec<f64>| Error::Parse(format!("--angles needs 4 values, got {}", v.len())))?;
    let r = quantity_threshold(&model, &quantity, theta, a.tol)?;
    let text = match (&r, json) {
        (_, true) => serde_json::to_string_pretty(&r)?,
        (None, false) => format!("{} {}: none", a.rep, quantity),
        (Some(r), false) => format!(
            "{} {}: p* = {:.12} (bracket [{:.6}, {:.6}], tol {:.1e}, residual {:.1e})",
            a.rep, quantity, r.root, r.bracket.0, r.bracket.1, r.achieved_tol, r.residual
        ),
    };
    writeln!(stdout, "{text}")?;
    Ok(EXIT_OK)
}

fn run_table1(a: Table1Args, stdout: &mut dyn Write) -> Result<i32> {
    let config = ExtremalConfig { angle_points: a.angle_points, refine_levels: a.refine_levels, ..Default::default() };
    let report = table1_report(a.tol_bisect, a.tol_extremal, config)?;
    stdout.write_all(table1::render(&report).as_bytes())?;
    writeln!(stdout, "{}", if report.all_pass { "all cells pass" } else { "some cells fail" })?;
    if let Some(path) = &a.out {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(if report.all_pass { EXIT_OK } else { EXIT_FAILED })
}

fn run_verify(a: VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let report = verify::verify(a.samples, a.seed, a.golden.as_deref())?;
    stdout.write_all(verify::render(&report).as_bytes())?;
    if let Some(path) = &a.out {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
}

fn run_golden(a: GoldenArgs, stdout: &mut dyn Write) -> Result<i32> {
    let rows = verify::generate_golden()?;
    write_output(a.out.as_deref(), &verify::golden_csv(&rows), stdout)?;
    Ok(EXIT_OK)
}

fn run_ppt(a: PptArgs, stdout: &mut dyn Write) -> Result<i32> {
    let model = Model::new(a.rep, a.q)?;
    match a.p {
        Some(p) => {
            let pattern = ppt_pattern(&model.dephased_uniform(p)?)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&pattern)?)?;
        }
        None => {
            for t in pattern_transitions(&model, a.grid_points, 1e-12)? {
                writeln!(stdout, "{} p = {:.10}: {} -> {}", t.cut, t.p, t.before, t.after)?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", i + 1)))?;
        out.push((k.trim().trim_start_matches("--").to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Splices config entries in after the subcommand, skipping keys also given
/// on the command line.
fn apply_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| Error::Parse("--config needs a file".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let entries = parse_config(&std::fs::read_to_string(&path)?)?;
    let Some(sub) = rest.iter().skip(1).position(|a| !a.starts_with('-')).map(|i| i + 1) else {
        return Ok(rest);
    };
    let given: Vec<&str> = rest[sub + 1..]
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();
    let mut extra = Vec::new();
    for (k, v) in entries {
        if given.contains(&k.as_str()) {
            continue;
        }
        match v.as_str() {
            "true" => extra.push(format!("--{k}")),
            "false" => {}
            _ => extra.push(format!("--{k}={v}")),
        }
    }
    let mut out = rest[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[sub + 1..]);
    Ok(out)
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let args = match apply_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => run_sweep(a, stdout),
        Command::Threshold(a) => run_threshold(a, stdout),
        Command::Table1(a) => run_table1(a, stdout),
        Command::Verify(a) => run_verify(a, stdout),
        Command::Golden(a) => run_golden(a, stdout),
        Command::Ppt(a) => run_ppt(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["cluster-esd".to_string()];
        argv.extend(args.iter().map(|s| s.to_string()));
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn witness_sweep_rows() {
        let (code, out, _) = call(&["sweep", "--rep", "c4", "--metric", "witness", "--p-grid", "0:1:101"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "p,witness");
        assert_eq!(lines.len(), 102);
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(call(&[]).0, 1);
        assert_eq!(call(&["sweep", "--rep", "c5", "--metric", "witness", "--p", "0.1"]).0, 1);
        assert_eq!(call(&["sweep", "--rep", "c4", "--metric", "bogus", "--p", "0.1"]).0, 1);
        assert_eq!(call(&["sweep", "--rep", "c4", "--metric", "witness"]).0, 1);
        assert_eq!(call(&["sweep", "--rep", "c4", "--metric", "witness", "--p", "0.1", "--p-grid", "0:1:3"]).0, 1);
        assert_eq!(call(&["threshold", "--rep", "c4", "--quantity", "witness", "--angles", "1,2"]).0, 1);
        let (code, _, err) = call(&["frobnicate"]);
        assert_eq!(code, 1);
        assert!(!err.is_empty());
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn noise_flags() {
        let (code, out, _) = call(&["sweep", "--rep", "c4h", "--metric", "purity", "--schedule", "0.1:0.05:0,1,2,30"]);
        assert_eq!(code, 0, "{out}");
        assert_eq!(out.lines().count(), 2);
        let (code, out, _) = call(&["sweep", "--rep", "c4", "--metric", "N12", "--kappa", "1", "--tau", "0.5", "--format", "json"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"kappa_tau\""), "{out}");
        let (code, _, _) = call(&["sweep", "--rep", "c4", "--metric", "N12", "--profile", "0.1,0.2,0.3"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn theta_flags() {
        let (code, out, _) = call(&[
            "sweep", "--rep", "c4", "--metric", "F_rotation,C_pair(34)", "--p", "0.3", "--theta-grid", "theta1=0:1:3",
            "--theta", "theta2=0.4",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next(), Some("theta1,F_rotation,C_pair(34)"));
        assert_eq!(out.lines().count(), 4);
        assert_eq!(call(&["sweep", "--rep", "c4", "--metric", "witness", "--p", "0", "--theta", "theta5=1"]).0, 1);
    }

    #[test]
    fn threshold_output() {
        let (code, out, _) = call(&["threshold", "--rep", "c4", "--quantity", "witness"]);
        assert_eq!(code, 0);
        assert!(out.contains("p* = 0.5857864"), "{out}");
        let (code, out, _) = call(&["threshold", "--rep", "c4", "--quantity", "N1"]);
        assert_eq!(code, 0);
        assert!(out.ends_with("none\n"));
        let (code, out, _) = call(&["threshold", "--rep", "c4", "--quantity", "F24", "--extremal", "--angle-points", "4", "--refine-levels", "0", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["max"]["root"].as_f64().unwrap() - 0.5857864376).abs() < 1e-8);
    }

    #[test]
    fn config_file_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "# sweep\nrep = c4\nmetric=witness\np-grid=0:1:5\n").unwrap();
        let path = cfg.to_str().unwrap();
        let (code, out, err) = call(&["sweep", "--config", path]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(out.lines().count(), 6);
        let (code, out, _) = call(&["--config", path, "sweep", "--p-grid", "0:1:3"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 4);
        std::fs::write(&cfg, "not a pair\n").unwrap();
        assert_eq!(call(&["sweep", "--config", path]).0, 1);
    }

    #[test]
    fn ppt_subcommand() {
        let (code, out, _) = call(&["ppt", "--rep", "c4", "--p", "0.7"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"N12\": \"PPT\""), "{out}");
        let (code, out, _) = call(&["ppt", "--rep", "c4", "--grid-points", "11"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("N12 p = 0.585786437"), "{out}");
    }
}
