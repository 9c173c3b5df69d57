//! The `berezin-kit` command line.
//!
//! Exit codes: 0 pass, 1 fail, 2 inconclusive or runtime error, 64 usage error,
//! 74 I/O error.

pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer};
use serde_json::{json, Value};

use crate::berezin::{figure_summary, sample_berezin_range, BerezinSource, BlaschkeParam, PolarGrid, WitnessSearch};
use crate::error::Error;
use crate::jets::LftSymbol;
use crate::kernels::{MultiIndex, SpaceSpec};
use crate::report::{
    cs_cell, decay_cell, default_sweep, linear_terms, nonconvexity_cell, numrange_cell, run_cell, sa_cell, MatrixCheck,
    Report, ReportRecord, SweepOptions, Thresholds, Timing, BEREZIN_IN_NUMRANGE, BLASCHKE_NONCONVEXITY, CS_ROTATION,
    CS_STANDARD, HERMITIAN_SUM, SELF_ADJOINT, ZERO_IN_CLOSURE,
};
use crate::symbols::{
    canonical_cs_symbols_j, canonical_cs_symbols_rotation, canonical_hermitian_symbols, canonical_sa_symbols,
    operator_matrix, ConjugationSpec, OperatorMatrix, OperatorSpec, SampleSpec, SelfMap, FAIL_THRESHOLD,
};

use format::{
    cloud_csv, cloud_svg, parse_complex, parse_complex_list, parse_grid, parse_real, parse_real_list, parse_u32_list,
};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "berezin-kit",
    version,
    about = "Kernels, symmetric operators and Berezin ranges on H_gamma spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Complex symmetry of a canonical weighted composition-differentiation operator.
    CsCheck(RunArgs),
    /// Self-adjointness of a canonical operator.
    SaCheck(RunArgs),
    /// Sample a Berezin range on a polar grid and write CSV (and SVG).
    Berezin(RunArgs),
    /// Berezin values against the numerical range, or decay towards the boundary.
    Numrange(RunArgs),
    /// Nonconvexity witness for the Blaschke composition operator.
    CertifyNonconvex(RunArgs),
    /// Run every check over the default parameter sweep.
    Report(RunArgs),
}

/// Every flag; each command reads the ones it needs. Values from `--config` fill
/// whatever the command line leaves unset.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunArgs {
    /// Kernel exponent gamma (1 Hardy, 2 Bergman, ...).
    #[arg(long)]
    pub gamma: Option<u32>,
    /// Number of polydisk coordinates.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Blaschke parameter alpha.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "loose")]
    pub alpha: Option<String>,
    /// Multiplier beta of the elliptic map z -> beta z.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "loose")]
    pub beta: Option<String>,
    /// phi(0), one value per coordinate.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "loose")]
    pub phi0: Option<String>,
    /// phi'(0), one value per coordinate.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "loose")]
    pub phi1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "loose")]
    pub xi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "loose")]
    pub mu: Option<String>,
    /// Coefficients c_j of a generalized sum, or multipliers beta_j for the decay probe.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "loose")]
    pub coeffs: Option<String>,
    /// Amplitude of the weight.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(deserialize_with = "loose")]
    pub a: Option<String>,
    /// Derivative orders, one per coordinate.
    #[arg(long)]
    #[serde(deserialize_with = "loose")]
    pub n: Option<String>,
    /// Finite-section size.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub matrix_n: Option<usize>,
    /// Polar grid `R,T`.
    #[arg(long)]
    #[serde(deserialize_with = "loose")]
    pub grid: Option<String>,
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Pass threshold on the defect.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample pairs of the defect sweeps.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sampling radius of the defect sweeps.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Directions of the support-function sweep, or angles of the witness search.
    #[arg(long)]
    pub angles: Option<usize>,
    /// Radii of the decay probe.
    #[arg(long)]
    #[serde(deserialize_with = "loose")]
    pub radii: Option<String>,
    /// Symbol family: `j` or `rotation` (cs-check), `factor` or `hermitian` (sa-check).
    #[arg(long)]
    pub family: Option<String>,
    /// Value source: `blaschke`, `elliptic` or `matrix` (berezin); `matrix` or `decay` (numrange).
    #[arg(long)]
    pub source: Option<String>,
    /// Multiply the weights by `1 + eps z`.
    #[arg(long, num_args = 0..=1, default_missing_value = "0.1")]
    pub perturb: Option<f64>,
    /// Main output file (JSON record, or CSV for `berezin`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG scatter output.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Summary JSON output of `berezin`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Print JSON on standard output.
    #[arg(long)]
    #[serde(skip)]
    pub json: bool,
    /// Record `runtime_ms` as 0 so repeated runs are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    /// JSON file of flag values; command-line flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Strings, numbers, and arrays of either (joined by commas) are all accepted.
fn loose<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    fn flat(v: &Value) -> Option<String> {
        match v {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            Value::Array(items) => items.iter().map(flat).collect::<Option<Vec<_>>>().map(|v| v.join(",")),
            _ => None,
        }
    }
    let v = Value::deserialize(d)?;
    match v {
        Value::Null => Ok(None),
        other => flat(&other)
            .map(Some)
            .ok_or_else(|| serde::de::Error::custom("expected a string, number or array")),
    }
}

macro_rules! merge {
    ($cli:ident, $cfg:ident, $($f:ident),*) => {
        RunArgs { $($f: $cli.$f.or($cfg.$f),)* json: $cli.json, no_timing: $cli.no_timing || $cfg.no_timing, config: None }
    };
}

impl RunArgs {
    fn merged(self, file: RunArgs) -> RunArgs {
        let cli = self;
        let cfg = file;
        merge!(
            cli, cfg, gamma, dim, alpha, beta, phi0, phi1, xi, mu, coeffs, a, n, matrix_n, grid, rmax, tol, seed,
            samples, radius, angles, radii, family, source, perturb, out, svg, summary
        )
    }
}

/// Failure of a command before any check ran.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Precision { .. } | Error::NotFound(_) | Error::Numerical(_) => {
                Failure::Runtime(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage<T>(r: std::result::Result<T, String>) -> Outcome<T> {
    r.map_err(Failure::Usage)
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{text}");
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_USAGE
                    } else {
                        0
                    }
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(f) => {
            let (code, kind, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, "usage error", m),
                Failure::Io(m) => (EXIT_IO, "i/o error", m),
                Failure::Runtime(m) => (2, "error", m),
            };
            let _ = writeln!(stderr, "berezin-kit: {kind}: {msg}");
            code
        }
    }
}

fn load_config(args: RunArgs) -> Outcome<RunArgs> {
    let Some(path) = args.config.clone() else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let file: RunArgs = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(args.merged(file))
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Outcome<i32> {
    match command {
        Command::CsCheck(a) => cmd_cs_check(&load_config(a)?, stdout),
        Command::SaCheck(a) => cmd_sa_check(&load_config(a)?, stdout),
        Command::Berezin(a) => cmd_berezin(&load_config(a)?, stdout),
        Command::Numrange(a) => cmd_numrange(&load_config(a)?, stdout),
        Command::CertifyNonconvex(a) => cmd_certify_nonconvex(&load_config(a)?, stdout),
        Command::Report(a) => cmd_report(&load_config(a)?, stdout),
    }
}

fn complex_or(text: &Option<String>, default: Complex64) -> Outcome<Complex64> {
    text.as_deref().map_or(Ok(default), |t| usage(parse_complex(t)))
}

fn real_or(text: &Option<String>, default: f64) -> Outcome<f64> {
    text.as_deref().map_or(Ok(default), |t| usage(parse_real(t)))
}

fn timing(a: &RunArgs) -> Timing {
    if a.no_timing {
        Timing::Omitted
    } else {
        Timing::Measured
    }
}

fn thresholds(a: &RunArgs) -> Outcome<Thresholds> {
    match a.tol {
        None => Ok(Thresholds::default()),
        Some(t) => Ok(Thresholds::new(t, t.max(FAIL_THRESHOLD))?),
    }
}

fn sample_spec(a: &RunArgs) -> SampleSpec {
    let d = SampleSpec::default();
    SampleSpec {
        samples: a.samples.unwrap_or(d.samples),
        radius: a.radius.unwrap_or(d.radius),
        seed: a.seed.unwrap_or(0),
    }
}

fn matrix_check(a: &RunArgs) -> MatrixCheck {
    match a.matrix_n {
        Some(n) => MatrixCheck { n, margin: n * 3 / 8 },
        None => MatrixCheck::default(),
    }
}

fn perturbed(op: OperatorSpec, a: &RunArgs) -> Outcome<OperatorSpec> {
    Ok(match a.perturb {
        Some(eps) => op.perturbed(eps)?,
        None => op,
    })
}

/// `phi0`, `phi1` and `n` lists padded to the dimension.
fn coordinate_lists(a: &RunArgs) -> Outcome<(usize, Vec<Complex64>, Option<String>, MultiIndex)> {
    let phi0 = match &a.phi0 {
        Some(t) => Some(usage(parse_complex_list(t))?),
        None => None,
    };
    let n = match &a.n {
        Some(t) => Some(usage(parse_u32_list(t))?),
        None => None,
    };
    let dim = a
        .dim
        .or(phi0.as_ref().map(Vec::len))
        .or(n.as_ref().map(Vec::len))
        .unwrap_or(1);
    let phi0 = phi0.unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); dim]);
    let n = MultiIndex::new(n.unwrap_or_else(|| vec![0; dim]))?;
    Ok((dim, phi0, a.phi1.clone(), n))
}

fn emit_record(record: &ReportRecord, a: &RunArgs, stdout: &mut dyn Write) -> Outcome<i32> {
    let text = serde_json::to_string_pretty(record).map_err(|e| Failure::Runtime(e.to_string()))? + "\n";
    if let Some(path) = &a.out {
        write_file(path, &text)?;
    }
    if a.json {
        write_stdout(stdout, &text)?;
    } else {
        let defect = record.defect.map_or("n/a".to_string(), |d| format!("{d:.3e}"));
        let mut line = format!("{}: {:?} (defect {defect})", record.theorem, record.verdict).to_lowercase();
        if let Some(e) = &record.error {
            line.push_str(&format!(" error: {e}"));
        }
        write_stdout(stdout, &(line + "\n"))?;
    }
    Ok(record.exit_code())
}

fn write_file(path: &Path, text: &str) -> Outcome<()> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_stdout(stdout: &mut dyn Write, text: &str) -> Outcome<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn cmd_cs_check(a: &RunArgs, stdout: &mut dyn Write) -> Outcome<i32> {
    let gamma = a.gamma.unwrap_or(1);
    let samples = sample_spec(a);
    let matrix = Some(matrix_check(a));
    let family = a.family.as_deref().unwrap_or("j");
    let (theorem, params, op, conj) = match family {
        "j" => {
            let (dim, phi0, phi1, n) = coordinate_lists(a)?;
            let phi1 = match phi1 {
                Some(t) => usage(parse_complex_list(&t))?,
                None => vec![Complex64::new(0.5, 0.0); dim],
            };
            let amp = complex_or(&a.a, Complex64::new(1.0, 0.0))?;
            let space = SpaceSpec::new(dim, gamma)?;
            let op = canonical_cs_symbols_j(&space, &n, &phi0, &phi1, amp)?.into_operator(space, n.clone())?;
            let params = json!({ "gamma": gamma, "dim": dim, "n": n.orders(), "phi0": phi0, "phi1": phi1, "a": amp, "perturb": a.perturb });
            (CS_STANDARD, params, op, ConjugationSpec::StandardJ)
        }
        "rotation" => {
            let xi = complex_or(&a.xi, Complex64::new(1.0, 0.0))?;
            let mu = complex_or(&a.mu, Complex64::new(1.0, 0.0))?;
            let phi0 = complex_or(&a.phi0, Complex64::new(0.0, 0.0))?;
            let phi1 = complex_or(&a.phi1, Complex64::new(0.5, 0.0))?;
            let coeffs = match &a.coeffs {
                Some(t) => usage(parse_complex_list(t))?,
                None => vec![Complex64::new(1.0, 0.0)],
            };
            let amps: Vec<Complex64> =
                a.a.as_deref()
                    .map(parse_complex)
                    .transpose()
                    .map_err(Failure::Usage)?
                    .into_iter()
                    .collect();
            let conj = ConjugationSpec::rotation(mu, xi)?;
            let op = canonical_cs_symbols_rotation(gamma, xi, phi0, phi1, &coeffs)?.into_operator(&amps)?;
            let params = json!({ "gamma": gamma, "mu": mu, "xi": xi, "phi0": phi0, "phi1": phi1, "coeffs": coeffs, "amplitudes": amps, "perturb": a.perturb });
            (CS_ROTATION, params, op, conj)
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown family {other:?} for cs-check; use j or rotation"
            )))
        }
    };
    let op = perturbed(op, a)?;
    let record = run_cell(theorem, params, samples.seed, thresholds(a)?, timing(a), || {
        cs_cell(&op, &conj, &samples, matrix)
    });
    emit_record(&record, a, stdout)
}

fn cmd_sa_check(a: &RunArgs, stdout: &mut dyn Write) -> Outcome<i32> {
    let gamma = a.gamma.unwrap_or(1);
    let samples = sample_spec(a);
    let matrix = Some(matrix_check(a));
    let family = a.family.as_deref().unwrap_or("factor");
    let (theorem, params, op) = match family {
        "factor" => {
            let (dim, phi0, phi1, n) = coordinate_lists(a)?;
            let phi1 = match phi1 {
                Some(t) => usage(parse_real_list(&t))?,
                None => vec![0.5; dim],
            };
            let amp = real_or(&a.a, 1.0)?;
            let space = SpaceSpec::new(dim, gamma)?;
            let op = canonical_sa_symbols(&space, &n, &phi0, &phi1, amp)?.into_operator(space, n.clone())?;
            (
                SELF_ADJOINT,
                json!({ "gamma": gamma, "dim": dim, "n": n.orders(), "phi0": phi0, "phi1": phi1, "a": amp, "perturb": a.perturb }),
                op,
            )
        }
        "hermitian" => {
            let phi0 = complex_or(&a.phi0, Complex64::new(0.0, 0.0))?;
            let phi1 = real_or(&a.phi1, 0.5)?;
            let coeffs = match &a.coeffs {
                Some(t) => usage(parse_real_list(t))?,
                None => vec![1.0],
            };
            let amps: Vec<Complex64> = match &a.a {
                Some(t) => vec![Complex64::new(usage(parse_real(t))?, 0.0)],
                None => vec![],
            };
            let op = canonical_hermitian_symbols(gamma, phi0, phi1, &coeffs)?.into_operator(&amps)?;
            (
                HERMITIAN_SUM,
                json!({ "gamma": gamma, "phi0": phi0, "phi1": phi1, "coeffs": coeffs, "amplitudes": amps, "perturb": a.perturb }),
                op,
            )
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown family {other:?} for sa-check; use factor or hermitian"
            )))
        }
    };
    let op = perturbed(op, a)?;
    let record = run_cell(theorem, params, samples.seed, thresholds(a)?, timing(a), || {
        sa_cell(&op, &samples, matrix)
    });
    emit_record(&record, a, stdout)
}

fn polar_grid(a: &RunArgs, default: (usize, usize), r_max: f64) -> Outcome<PolarGrid> {
    let (r, t) = match &a.grid {
        Some(g) => usage(parse_grid(g))?,
        None => default,
    };
    Ok(PolarGrid::new(r, t, a.rmax.unwrap_or(r_max))?)
}

/// The composition matrix of `phi_alpha` when `--alpha` is given, else of `z -> beta z`.
fn composition_section(a: &RunArgs, gamma: u32, default_n: usize) -> Outcome<(OperatorMatrix, Value)> {
    let n = a.matrix_n.unwrap_or(default_n);
    let (phi, desc) = match &a.alpha {
        Some(t) => {
            let alpha = usage(parse_complex(t))?;
            (LftSymbol::blaschke(alpha)?, json!({ "alpha": alpha }))
        }
        None => {
            let beta = complex_or(&a.beta, Complex64::new(0.5, 0.0))?;
            (LftSymbol::linear(beta), json!({ "beta": beta }))
        }
    };
    let op = OperatorSpec::composition(SpaceSpec::disk(gamma)?, vec![SelfMap::Lft(phi)])?;
    Ok((operator_matrix(&op, n)?, json!({ "symbol": desc, "N": n })))
}

fn cmd_berezin(a: &RunArgs, stdout: &mut dyn Write) -> Outcome<i32> {
    let gamma = a.gamma.unwrap_or(1);
    let grid = polar_grid(a, (200, 512), 0.995)?;
    let source = a.source.as_deref().unwrap_or("blaschke");
    if a.json && a.out.is_none() {
        return Err(Failure::Usage("--json needs --out for the CSV".into()));
    }
    let alpha = BlaschkeParam::new(complex_or(&a.alpha, Complex64::new(0.0, 0.0))?)?;
    let section;
    let (src, params, x_max) = match source {
        "blaschke" => (
            BerezinSource::Blaschke(alpha),
            json!({ "alpha": alpha.alpha() }),
            (1.0 + alpha.alpha().norm()).powi(gamma as i32),
        ),
        "elliptic" => {
            let beta = complex_or(&a.beta, Complex64::new(0.5, 0.0))?;
            if !(beta.norm() <= 1.0) {
                return Err(Failure::Usage(format!(
                    "elliptic symbol needs |beta| <= 1, got {}",
                    beta.norm()
                )));
            }
            (BerezinSource::Elliptic(beta), json!({ "beta": beta }), 1.0)
        }
        "matrix" => {
            let (t, desc) = composition_section(a, gamma, 128)?;
            section = t;
            (BerezinSource::Matrix(&section), desc, 1.0)
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown source {other:?}; use blaschke, elliptic or matrix"
            )))
        }
    };
    let cloud = sample_berezin_range(gamma, &src, &grid)?;
    let summary_alpha = if source == "blaschke" {
        alpha
    } else {
        BlaschkeParam::new(Complex64::new(0.0, 0.0))?
    };
    let csv = cloud_csv(&cloud);
    let svg = a.svg.as_ref().map(|_| cloud_svg(&cloud, x_max));
    match &a.out {
        Some(path) => write_file(path, &csv)?,
        None => write_stdout(stdout, &csv)?,
    }
    if let (Some(path), Some(svg)) = (&a.svg, svg) {
        write_file(path, &svg)?;
    }
    if a.summary.is_none() && !a.json {
        return Ok(0);
    }
    let stats = figure_summary(&cloud, &summary_alpha);
    let summary = json!({
        "source": source,
        "gamma": gamma,
        "params": params,
        "grid": [grid.r_count(), grid.theta_count()],
        "r_max": grid.r_max(),
        "summary": stats,
    });
    let summary_text = serde_json::to_string_pretty(&summary).map_err(|e| Failure::Runtime(e.to_string()))? + "\n";
    if let Some(path) = &a.summary {
        write_file(path, &summary_text)?;
    }
    if a.json {
        write_stdout(stdout, &summary_text)?;
    }
    Ok(0)
}

fn cmd_numrange(a: &RunArgs, stdout: &mut dyn Write) -> Outcome<i32> {
    let seed = a.seed.unwrap_or(0);
    let record = match a.source.as_deref().unwrap_or("matrix") {
        "matrix" => {
            let gamma = a.gamma.unwrap_or(1);
            let (t, desc) = composition_section(a, gamma, 32)?;
            let grid = polar_grid(a, (20, 32), 0.6)?;
            let angles = a.angles.unwrap_or(360);
            let params = json!({ "gamma": gamma, "operator": desc, "grid": [grid.r_count(), grid.theta_count()], "r_max": grid.r_max(), "angles": angles });
            let th = thresholds(a)?;
            run_cell(BEREZIN_IN_NUMRANGE, params, seed, th, timing(a), || {
                numrange_cell(&t, &grid, angles)
            })
        }
        "decay" => {
            if a.gamma.is_some_and(|g| g != 1) {
                return Err(Failure::Usage(
                    "the decay probe works on the Hardy space, gamma = 1".into(),
                ));
            }
            let betas = match &a.coeffs {
                Some(t) => usage(parse_complex_list(t))?,
                None => vec![Complex64::new(0.5, 0.0), Complex64::new(1.0 / 3.0, 0.0)],
            };
            if betas.iter().any(|b| !(b.norm() <= 1.0)) {
                return Err(Failure::Usage("multipliers beta_j need |beta_j| <= 1".into()));
            }
            let xi = complex_or(&a.xi, Complex64::new(1.0, 0.0))?;
            let radii = match &a.radii {
                Some(t) => usage(parse_real_list(t))?,
                None => vec![0.9, 0.99, 0.999, 0.9999],
            };
            let terms = linear_terms(&betas);
            let th = Thresholds::strict(a.tol.unwrap_or(0.01));
            // validate before timing so bad input is a usage error
            crate::numrange::boundary_decay_probe(&terms, xi, &radii)?;
            let params = json!({ "betas": betas, "xi": xi, "radii": radii });
            run_cell(ZERO_IN_CLOSURE, params, seed, th, timing(a), || {
                decay_cell(&terms, xi, &radii)
            })
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown source {other:?} for numrange; use matrix or decay"
            )))
        }
    };
    emit_record(&record, a, stdout)
}

fn cmd_certify_nonconvex(a: &RunArgs, stdout: &mut dyn Write) -> Outcome<i32> {
    let Some(text) = &a.alpha else {
        return Err(Failure::Usage("--alpha is required".into()));
    };
    let alpha = BlaschkeParam::new(usage(parse_complex(text))?)?;
    let gamma = a.gamma.unwrap_or(1);
    let mut search = WitnessSearch::default();
    if let Some(n) = a.angles {
        search.theta_count = n;
    }
    let grid = polar_grid(a, (20, 32), 0.99)?;
    let params = json!({ "gamma": gamma, "alpha": alpha.alpha(), "angles": search.theta_count, "radii": search.radii });
    let th = if alpha.is_zero() {
        Thresholds::strict(1e-14)
    } else {
        thresholds(a)?
    };
    let mut record = run_cell(
        BLASCHKE_NONCONVEXITY,
        params,
        a.seed.unwrap_or(0),
        th,
        timing(a),
        || nonconvexity_cell(gamma, &alpha, &search, &grid),
    );
    if alpha.is_zero() {
        if let Value::Object(map) = &mut record.details {
            map.insert("message".into(), json!("convex: range = {1}"));
        }
    }
    emit_record(&record, a, stdout)
}

fn cmd_report(a: &RunArgs, stdout: &mut dyn Write) -> Outcome<i32> {
    let opts = SweepOptions {
        seed: a.seed.unwrap_or(0),
        perturb: a.perturb,
        timing: timing(a),
        thresholds: thresholds(a)?,
    };
    let report = Report::new(default_sweep(&opts));
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))? + "\n";
    if let Some(path) = &a.out {
        write_file(path, &text)?;
    }
    if a.json {
        write_stdout(stdout, &text)?;
    } else {
        let mut lines = String::new();
        for r in &report.records {
            let defect = r.defect.map_or("n/a".to_string(), |d| format!("{d:.3e}"));
            lines.push_str(&format!(
                "{:<13} {:<32} defect {defect}\n",
                format!("{:?}", r.verdict).to_uppercase(),
                r.theorem
            ));
        }
        lines.push_str(&format!(
            "{} passed, {} failed, {} inconclusive\n",
            report.passed, report.failed, report.inconclusive
        ));
        write_stdout(stdout, &lines)?;
    }
    Ok(report.exit_code())
}
