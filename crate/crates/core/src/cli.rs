//! Command-line front end for the `unitary-fisher` binary.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on usage,
//! domain or input errors.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::channel_model::ProbeFamily;
use crate::error::{Error, Result};
use crate::estimate::{counterexample_search, covariance_study, write_report};
use crate::fisher::{self, MeritReport};
use crate::linalg::RMat;
use crate::povm::{self, MatsumotoConfig, Povm};
use crate::serialize;
use crate::su_algebra::{check_su2_domain, ChartKind};
use crate::tolerances::Tolerances;
use crate::verify::{self, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "unitary-fisher",
    version,
    about = "Fisher information for estimating an unknown unitary with entangled probes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the closed-form check suite.
    Verify(VerifyArgs),
    /// Quantum Fisher information of the output state.
    Qfi(Common),
    /// Classical Fisher information of a measurement.
    Fi(Common),
    /// QFI, classical FI, merit tr H^-1 I, achievability gap and QCRB margin.
    Merit(Common),
    /// Merit over a rectangular grid of polar-chart points, as CSV.
    Sweep(SweepArgs),
    /// Repeated sampling and maximum-likelihood estimation.
    Simulate(Common),
    /// Search for probes whose QFI is not dominated by the maximally entangled one.
    Search(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    Exp,
    Su2,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Local dimension d.
    #[arg(long = "d", default_value_t = 2)]
    pub d: usize,
    /// Chart on the unknown unitary (default: su2 for d = 2, exp otherwise).
    #[arg(long, value_enum)]
    pub chart: Option<ChartArg>,
    /// Polar-chart rotation angle α (radians).
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Polar-chart axis polar angle θ (radians).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Polar-chart axis azimuth φ (radians).
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Comma-separated parameter vector (exp chart: d²-1 entries; su2: α,θ,φ).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta_vec: Option<Vec<f64>>,
    /// Named measurement: bell, reduced-bell:k, lo-bell:k,l, local-spin,
    /// product:n,seed, matsumoto.
    #[arg(long)]
    pub povm: Option<String>,
    /// Measurement loaded from a JSON file.
    #[arg(long, conflicts_with = "povm")]
    pub povm_file: Option<PathBuf>,
    /// Shots per repetition.
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
    /// JSON file overriding numerical tolerances (missing fields keep defaults).
    #[arg(long)]
    pub tolerances: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Replace every check tolerance with this value.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = VerifyConfig::default().seed)]
    pub seed: u64,
    /// Run only these checks (1-based ids, comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<usize>>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// α grid as lo:hi:count.
    #[arg(long, default_value = "0.2:2.6:5")]
    pub alpha_grid: String,
    /// θ grid as lo:hi:count.
    #[arg(long, default_value = "0.2:2.6:5")]
    pub theta_grid: String,
    /// φ grid as lo:hi:count.
    #[arg(long, default_value = "0.3:5.1:5")]
    pub phi_grid: String,
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    match dispatch(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Verify(a) => cmd_verify(a, out),
        Command::Qfi(c) => cmd_qfi(c, out),
        Command::Fi(c) => cmd_fi(c, out),
        Command::Merit(c) => cmd_merit(c, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Simulate(c) => cmd_simulate(c, out),
        Command::Search(c) => cmd_search(c, out),
    }
}

/// Write to `--out` if given, otherwise to standard output.
fn emit(text: &str, path: &Option<PathBuf>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let config = VerifyConfig {
        seed: a.seed,
        tolerance_override: a.tol,
    };
    let ids: Vec<usize> = match &a.only {
        Some(ids) => {
            if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > verify::NUM_CHECKS) {
                return Err(Error::InvalidArgument(format!(
                    "check id {bad} is not in 1..={}",
                    verify::NUM_CHECKS
                )));
            }
            ids.clone()
        }
        None => (1..=verify::NUM_CHECKS).collect(),
    };
    let checks: Vec<_> = ids
        .iter()
        .map(|&id| verify::run_check(id, &config))
        .collect();
    let all_pass = checks.iter().all(|c| c.pass);
    let report = verify::VerifyReport {
        seed: config.seed,
        checks,
        all_pass,
    };
    let text = if a.json {
        serialize::to_string(&report)?
    } else {
        let mut s = String::new();
        for c in &report.checks {
            s.push_str(&c.summary_line());
            s.push('\n');
            if !c.pass || c.error.is_some() {
                s.push_str(&format!("       {}\n", c.statement));
            }
        }
        let passed = report.checks.iter().filter(|c| c.pass).count();
        s.push_str(&format!(
            "{passed}/{} checks passed (seed {})\n",
            report.checks.len(),
            report.seed
        ));
        s
    };
    emit(&text, &a.out, out)?;
    Ok(if report.all_pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn load_tolerances(c: &Common) -> Result<Tolerances> {
    match &c.tolerances {
        Some(p) => serialize::from_str(&std::fs::read_to_string(p)?),
        None => Ok(Tolerances::default()),
    }
}

fn chart_kind(c: &Common) -> Result<ChartKind> {
    match c.chart {
        Some(ChartArg::Su2) if c.d != 2 => Err(Error::InvalidArgument(format!(
            "the su2 chart needs d = 2, got d = {}",
            c.d
        ))),
        Some(ChartArg::Su2) => Ok(ChartKind::Su2Polar),
        Some(ChartArg::Exp) => Ok(ChartKind::Exp),
        None if c.d == 2 => Ok(ChartKind::Su2Polar),
        None => Ok(ChartKind::Exp),
    }
}

/// Singlet probe for the polar chart, maximally entangled probe for the
/// exponential chart.
fn family(c: &Common) -> Result<ProbeFamily> {
    let tol = load_tolerances(c)?;
    let fam = match chart_kind(c)? {
        ChartKind::Su2Polar => ProbeFamily::su2_singlet(),
        ChartKind::Exp => ProbeFamily::exp_max_entangled(c.d)?,
    };
    Ok(fam.with_tolerances(tol))
}

fn point(c: &Common, fam: &ProbeFamily) -> Result<Vec<f64>> {
    let theta = match (&c.theta_vec, c.alpha, c.theta, c.phi) {
        (Some(v), None, None, None) => v.clone(),
        (Some(_), ..) => {
            return Err(Error::InvalidArgument(
                "give either --theta-vec or --alpha/--theta/--phi".into(),
            ))
        }
        (None, Some(a), Some(t), Some(p)) => {
            if fam.chart().kind() != ChartKind::Su2Polar {
                return Err(Error::InvalidArgument(
                    "--alpha/--theta/--phi need the su2 chart".into(),
                ));
            }
            vec![a, t, p]
        }
        (None, None, None, None) if fam.chart().kind() == ChartKind::Exp => {
            vec![0.0; fam.num_params()]
        }
        _ => {
            return Err(Error::InvalidArgument(
                "the su2 chart needs all of --alpha, --theta and --phi".into(),
            ))
        }
    };
    fam.chart().check(&theta, fam.tolerances())?;
    Ok(theta)
}

fn parse_indices(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad index '{x}'")))
        })
        .collect()
}

/// Resolve `--povm` or `--povm-file`.
fn measurement(c: &Common, fam: &ProbeFamily, theta: &[f64]) -> Result<Povm> {
    if let Some(path) = &c.povm_file {
        let m = povm::read_povm(path, fam.tolerances())?;
        return check_povm_dim(m, fam);
    }
    let spec = c
        .povm
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("this command needs --povm or --povm-file".into()))?;
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let m = match (name, arg) {
        ("bell", "") => povm::bell_basis(),
        ("local-spin", "") => povm::local_spin_povm(),
        ("reduced-bell", k) => match parse_indices(k)?.as_slice() {
            [k] => povm::reduced_bell(*k)?,
            _ => return Err(Error::InvalidArgument("reduced-bell takes one index".into())),
        },
        ("lo-bell", kl) => match parse_indices(kl)?.as_slice() {
            [k, l] => povm::linear_optics_bell(*k, *l)?,
            _ => return Err(Error::InvalidArgument("lo-bell takes two indices k,l".into())),
        },
        ("product", args) => {
            let parts: Vec<&str> = args.split(',').collect();
            let [n, seed] = parts.as_slice() else {
                return Err(Error::InvalidArgument("product takes n,seed".into()));
            };
            let n = n
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad basis count '{n}'")))?;
            let seed = seed
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad seed '{seed}'")))?;
            povm::random_product_povm(fam.dim(), n, seed)?
        }
        ("matsumoto", "") => {
            let model = fam.output_model(theta)?;
            let h = fisher::qfi_pure(&model);
            let config = MatsumotoConfig::householder(model.num_params());
            povm::matsumoto_povm(&model, &h, &config, fam.tolerances())?
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown measurement '{spec}' (expected bell, reduced-bell:k, lo-bell:k,l, local-spin, product:n,seed or matsumoto)"
            )))
        }
    };
    check_povm_dim(m, fam)
}

fn check_povm_dim(m: Povm, fam: &ProbeFamily) -> Result<Povm> {
    let want = fam.dim() * fam.dim();
    if m.dim() != want {
        return Err(Error::DimensionMismatch(format!(
            "measurement acts on dimension {}, the output state has dimension {want}",
            m.dim()
        )));
    }
    Ok(m)
}

fn rows(m: &RMat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn format_matrix(label: &str, m: &RMat) -> String {
    let mut s = format!("{label} =\n");
    for r in m.row_iter() {
        let cells: Vec<String> = r.iter().map(|x| format!("{x:>16.10}")).collect();
        s.push_str(&format!("  [{}]\n", cells.join(" ")));
    }
    s
}

#[derive(Serialize)]
struct PointReport<'a> {
    d: usize,
    chart: ChartKind,
    theta: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    qfi: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fi: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    merit: Option<MeritReport>,
}

fn cmd_qfi(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let fam = family(c)?;
    let theta = point(c, &fam)?;
    let model = fam.output_model(&theta)?;
    let h = fisher::qfi_pure(&model);
    let text = if c.json {
        serialize::to_string(&PointReport {
            d: fam.dim(),
            chart: fam.chart().kind(),
            theta: &theta,
            qfi: Some(rows(h.entries())),
            fi: None,
            merit: None,
        })?
    } else {
        format_matrix("H", h.entries())
    };
    emit(&text, &c.out, out)?;
    Ok(EXIT_OK)
}

fn cmd_fi(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let fam = family(c)?;
    let theta = point(c, &fam)?;
    let m = measurement(c, &fam, &theta)?;
    let model = fam.output_model(&theta)?;
    let i = fisher::classical_fi_pure(&model, &m, fam.tolerances())?;
    let text = if c.json {
        serialize::to_string(&PointReport {
            d: fam.dim(),
            chart: fam.chart().kind(),
            theta: &theta,
            qfi: None,
            fi: Some(rows(i.entries())),
            merit: None,
        })?
    } else {
        format_matrix("I", i.entries())
    };
    emit(&text, &c.out, out)?;
    Ok(EXIT_OK)
}

fn cmd_merit(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let fam = family(c)?;
    let theta = point(c, &fam)?;
    let m = measurement(c, &fam, &theta)?;
    let model = fam.output_model(&theta)?;
    let (h, i, report) = fisher::evaluate(&model, &m, fam.tolerances())?;
    let text = if c.json {
        serialize::to_string(&PointReport {
            d: fam.dim(),
            chart: fam.chart().kind(),
            theta: &theta,
            qfi: Some(rows(h.entries())),
            fi: Some(rows(i.entries())),
            merit: Some(report),
        })?
    } else {
        let mut s = format_matrix("H", h.entries());
        s.push_str(&format_matrix("I", i.entries()));
        s.push_str(&format!("merit tr H^-1 I = {:.12}\n", report.merit));
        s.push_str(&format!(
            "achievability gap max|Im<l_i|l_j>| = {:.3e}\n",
            report.achievability_gap.unwrap_or(f64::NAN)
        ));
        s.push_str(&format!("min eig(H - I) = {:.3e}\n", report.qcrb_min_eig));
        s
    };
    emit(&text, &c.out, out)?;
    Ok(EXIT_OK)
}

/// `lo:hi:count` into `count` evenly spaced values.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidArgument(format!("grid '{spec}' is not lo:hi:count"));
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    match n {
        0 => Err(bad()),
        1 => Ok(vec![lo]),
        _ => Ok((0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()),
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let c = &a.common;
    if chart_kind(c)? != ChartKind::Su2Polar {
        return Err(Error::InvalidArgument(
            "sweep runs on the su2 chart (d = 2)".into(),
        ));
    }
    let fam = family(c)?;
    let alphas = parse_grid(&a.alpha_grid)?;
    let thetas = parse_grid(&a.theta_grid)?;
    let phis = parse_grid(&a.phi_grid)?;
    let margin = fam.tolerances().chart_margin;
    for &al in &alphas {
        for &th in &thetas {
            check_su2_domain(al, th, phis[0], margin)?;
        }
    }
    let mut points = Vec::with_capacity(alphas.len() * thetas.len() * phis.len());
    for &al in &alphas {
        for &th in &thetas {
            for &ph in &phis {
                points.push([al, th, ph]);
            }
        }
    }
    // A point-dependent measurement is rebuilt at every grid point.
    let rows = points
        .par_iter()
        .map(|t| {
            let m = measurement(c, &fam, t)?;
            let model = fam.output_model(t)?;
            let (_, _, report) = fisher::evaluate(&model, &m, fam.tolerances())?;
            let (p, _) = fisher::pure_distribution(&model, &m)?;
            let min_p = p.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                t[0], t[1], t[2], report.merit, min_p, report.qcrb_min_eig
            ))
        })
        .collect::<Result<Vec<String>>>()?;
    let mut text = String::from("alpha,theta,phi,merit,min_p,qcrb_min_eig\n");
    text.extend(rows);
    emit(&text, &c.out, out)?;
    Ok(EXIT_OK)
}

fn cmd_simulate(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let fam = family(c)?;
    let theta = point(c, &fam)?;
    let m = measurement(c, &fam, &theta)?;
    let report = covariance_study(&fam, &theta, &m, c.n, c.reps, c.seed)?;
    match &c.out {
        Some(path) => {
            write_report(&report, path)?;
            if !c.json {
                writeln!(
                    out,
                    "trace ratio tr(V) N / tr(I^-1) = {:.6} over {} repetitions of N = {} (seed {})",
                    report.trace_ratio, report.reps, report.n, report.seed
                )?;
            }
        }
        None => out.write_all(serialize::to_string(&report)?.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn cmd_search(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let report = counterexample_search(c.d, c.trials, c.seed)?;
    match &c.out {
        Some(path) => {
            write_report(&report, path)?;
            if !c.json {
                let verdict = if report.found {
                    "witness found"
                } else {
                    "none found"
                };
                writeln!(
                    out,
                    "d = {}: max QFI eigenvalue {:.12} vs 4/d = {:.12}, excess {:.3e}: {verdict} (seed {})",
                    report.d, report.max_eigenvalue, report.reference, report.excess, report.seed
                )?;
            }
        }
        None => out.write_all(serialize::to_string(&report)?.as_bytes())?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["unitary-fisher"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.4:9:1").unwrap(), vec![0.4]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_str(&["qfi", "--alpha", "0.5"]).0, EXIT_USAGE);
        assert_eq!(
            run_str(&["merit", "--alpha", "0.5", "--theta", "1", "--phi", "0"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        let (code, _, err) = run_str(&["qfi", "--alpha", "0", "--theta", "1", "--phi", "0"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("alpha"));
    }

    #[test]
    fn unknown_povm_is_named() {
        let (code, _, err) = run_str(&[
            "merit", "--povm", "nonsense", "--alpha", "0.5", "--theta", "1", "--phi", "0.2",
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("nonsense"));
    }

    #[test]
    fn exp_chart_defaults_to_identity() {
        let (code, out, _) = run_str(&["qfi", "--d", "3", "--json"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("\"chart\":\"exp\""));
    }
}
