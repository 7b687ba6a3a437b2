// `!(x <= tol)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qre_core::binary::{bounds_grid, write_bounds_csv};
use qre_core::hermitian::{HermitianMatrix, PsdhMatrix};
use qre_core::json::read_matrix;
use qre_core::qre::{default_fd_step, derivative_from_integral, ray_window, MAX_ORDER};
use qre_core::{
    entropy_derivative_fd, entropy_derivative_integral, relative_entropy_integral, relative_entropy_spectral,
    support_contained, Error, IntegralForm, QuadConfig,
};

mod verify;

use verify::{FailureRecord, Suite};

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_PROPERTY: u8 = 3;

/// Relative gap above which `derivative --check-fd` reports a mismatch.
const FD_GAP_TOL: f64 = 1e-4;

/// Quantum relative entropy and entropy derivatives through pencil integrals.
///
/// Exit codes: 0 success, 1 invalid input or IO error, 2 numerical
/// non-convergence or finite-difference mismatch, 3 property-suite failure.
#[derive(Parser)]
#[command(name = "qre", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Relative entropy D(ρ‖σ) of two psd matrices given as matrix JSON files.
    Dre {
        rho: PathBuf,
        sigma: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        form: FormChoice,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// m-th directional derivative of von Neumann entropy at ρ along σ.
    Derivative {
        rho: PathBuf,
        sigma: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Also compute central finite differences and compare (relative gap 1e-4).
        #[arg(long)]
        check_fd: bool,
        /// Finite-difference step; defaults to min(1e-3, radius/10) for m ≤ 3 and ε^(1/(m+4)) above,
        /// kept inside the positivity window.
        #[arg(long)]
        fd_step: Option<f64>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Seeded randomized property suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Override the least accepted slack of every suite.
        #[arg(long, allow_negative_numbers = true)]
        min_slack: Option<f64>,
    },
    /// Re-evaluate one failure record from a `verify` report.
    Replay { record: PathBuf },
    /// Lower bounds on the Holevo quantity over a (T, q1) grid, as CSV.
    Bounds {
        #[arg(long = "grid-T", default_value_t = 21)]
        grid_t: usize,
        #[arg(long = "grid-q", default_value_t = 21)]
        grid_q: usize,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormChoice {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Spectral,
    Integral,
    Both,
}

#[derive(Args)]
struct QuadArgs {
    #[arg(long, default_value_t = QuadConfig::default().rel_tol)]
    rel_tol: f64,
    #[arg(long, default_value_t = QuadConfig::default().abs_tol)]
    abs_tol: f64,
    #[arg(long, default_value_t = QuadConfig::default().max_subdivisions)]
    max_subdivisions: usize,
}

impl QuadArgs {
    fn config(&self) -> Result<QuadConfig, Failure> {
        let c = QuadConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_subdivisions: self.max_subdivisions,
        };
        c.validate()?;
        Ok(c)
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::QuadNotConverged(_)
            | Error::ConvergenceFailure
            | Error::NonFiniteIntegrand(_)
            | Error::StencilOutOfWindow { .. } => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Command output: a JSON document and the exit code to finish with.
struct Report {
    json: String,
    code: u8,
}

impl Report {
    fn new<T: Serialize>(value: &T, code: u8) -> Result<Self, Failure> {
        let json = serde_json::to_string_pretty(value).map_err(|e| Failure::input(e.to_string()))?;
        Ok(Self { json, code })
    }
}

#[derive(Serialize)]
struct IntegralEntry {
    value: Option<f64>,
    error_estimate: f64,
    evaluations: usize,
}

#[derive(Serialize)]
struct SpectralEntry {
    value: Option<f64>,
}

#[derive(Serialize)]
struct DreReport {
    support_ok: bool,
    infinite: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectral: Option<SpectralEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    form_one: Option<IntegralEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    form_two: Option<IntegralEntry>,
    /// Largest pairwise difference between the computed finite values.
    agreement_gap: Option<f64>,
}

fn cmd_dre(rho: &Path, sigma: &Path, form: FormChoice, method: Method, quad: &QuadArgs) -> Result<Report, Failure> {
    let qcfg = quad.config()?;
    let rho: PsdhMatrix = read_matrix(rho)?;
    let sigma: PsdhMatrix = read_matrix(sigma)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()).into());
    }
    let support_ok = support_contained(&rho, &sigma)?;

    let spectral = match method {
        Method::Integral => None,
        _ => Some(SpectralEntry {
            value: relative_entropy_spectral(&rho, &sigma)?.as_option(),
        }),
    };
    let integral = |f: IntegralForm| -> Result<IntegralEntry, Failure> {
        let (d, r) = relative_entropy_integral(&rho, &sigma, f, &qcfg)?;
        Ok(IntegralEntry {
            value: d.as_option(),
            error_estimate: r.abs_error,
            evaluations: r.evaluations,
        })
    };
    let wants_integral = method != Method::Spectral;
    let form_one = match (wants_integral, form) {
        (true, FormChoice::One | FormChoice::Both) => Some(integral(IntegralForm::FormOne)?),
        _ => None,
    };
    let form_two = match (wants_integral, form) {
        (true, FormChoice::Two | FormChoice::Both) => Some(integral(IntegralForm::FormTwo)?),
        _ => None,
    };

    let values: Vec<f64> = spectral
        .iter()
        .map(|s| s.value)
        .chain(form_one.iter().map(|e| e.value))
        .chain(form_two.iter().map(|e| e.value))
        .flatten()
        .collect();
    let agreement_gap = (values.len() >= 2).then(|| {
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    });
    Report::new(
        &DreReport {
            support_ok,
            infinite: !support_ok,
            spectral,
            form_one,
            form_two,
            agreement_gap,
        },
        0,
    )
}

#[derive(Serialize)]
struct DerivativeReport {
    m: u32,
    /// `∫ tr⁻(ρ + tσ)/(|t| tᵐ) dt`, equal to `−S^{(m)}(0)/m!`.
    integral_value: f64,
    error_estimate: f64,
    /// `S^{(m)}(0)` recovered from the integral.
    derivative: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_step: Option<f64>,
    /// `|derivative − fd_value| / max(1, |fd_value|)`
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
}

fn cmd_derivative(
    rho: &Path,
    sigma: &Path,
    m: u32,
    check_fd: bool,
    fd_step: Option<f64>,
    quad: &QuadArgs,
) -> Result<Report, Failure> {
    if m > MAX_ORDER {
        return Err(Error::OrderTooLarge(m).into());
    }
    let qcfg = quad.config()?;
    let rho: PsdhMatrix = read_matrix(rho)?;
    let sigma: HermitianMatrix = read_matrix(sigma)?;
    let (integral_value, r) = entropy_derivative_integral(&rho, &sigma, m, &qcfg)?;
    let derivative = derivative_from_integral(integral_value, m)?;
    let mut report = DerivativeReport {
        m,
        integral_value,
        error_estimate: r.abs_error,
        derivative,
        fd_value: None,
        fd_step: None,
        gap: None,
    };
    let mut code = 0;
    if check_fd {
        let step = match fd_step {
            Some(h) => h,
            None => {
                let w = ray_window(&rho, &sigma)?;
                if m <= 3 {
                    default_fd_step(&w)
                } else {
                    // rounding grows like ε/hᵐ and the extrapolated truncation like h⁴;
                    // the widest stencil reaches ⌈m/2⌉ steps from 0
                    let reach = m.div_ceil(2) as f64;
                    f64::EPSILON.powf(1.0 / (m + 4) as f64).min(0.9 * w.radius() / reach)
                }
            }
        };
        let fd = entropy_derivative_fd(&rho, &sigma, m, step)?;
        let gap = (derivative - fd).abs() / fd.abs().max(1.0);
        if !(gap <= FD_GAP_TOL) {
            code = EXIT_NUMERICAL;
        }
        report.fd_value = Some(fd);
        report.fd_step = Some(step);
        report.gap = Some(gap);
    }
    Report::new(&report, code)
}

fn cmd_verify(suite: Suite, trials: usize, seed: u64, n: usize, min_slack: Option<f64>) -> Result<Report, Failure> {
    if trials == 0 {
        return Err(Failure::input("--trials must be at least 1"));
    }
    if !(2..=64).contains(&n) {
        return Err(Failure::input(format!("--n must lie in 2..=64 (got {n})")));
    }
    if min_slack.is_some_and(f64::is_nan) {
        return Err(Failure::input("--min-slack must be a number"));
    }
    let exit = |failures: usize| if failures == 0 { 0 } else { EXIT_PROPERTY };
    if suite == Suite::All {
        let r = verify::run_all(trials, seed, n, min_slack);
        Report::new(&r, exit(r.failures))
    } else {
        let r = verify::run_suite(suite, trials, seed, n, min_slack);
        Report::new(&r, exit(r.failures))
    }
}

fn cmd_replay(path: &Path) -> Result<Report, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let record: FailureRecord = serde_json::from_str(&text).map_err(|e| Failure::input(e.to_string()))?;
    let r = verify::replay(&record).map_err(Failure::input)?;
    let code = if r.reproduced { EXIT_PROPERTY } else { 0 };
    Report::new(&r, code)
}

#[derive(Serialize)]
struct BoundsSummary {
    rows: usize,
    out: String,
}

fn cmd_bounds(k: usize, l: usize, out: Option<&Path>) -> Result<Option<Report>, Failure> {
    let rows = bounds_grid(k, l)?;
    let io = |e: std::io::Error| Failure::input(e.to_string());
    match out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| Failure::input(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            write_bounds_csv(&rows, &mut w).map_err(io)?;
            w.flush().map_err(io)?;
            let summary = BoundsSummary {
                rows: rows.len(),
                out: path.display().to_string(),
            };
            Report::new(&summary, 0).map(Some)
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write_bounds_csv(&rows, &mut w).map_err(io)?;
            w.flush().map_err(io)?;
            Ok(None)
        }
    }
}

fn run(cli: Cli) -> Result<Option<Report>, Failure> {
    match cli.command {
        Command::Dre {
            rho,
            sigma,
            form,
            method,
            quad,
        } => cmd_dre(&rho, &sigma, form, method, &quad).map(Some),
        Command::Derivative {
            rho,
            sigma,
            m,
            check_fd,
            fd_step,
            quad,
        } => cmd_derivative(&rho, &sigma, m, check_fd, fd_step, &quad).map(Some),
        Command::Verify {
            suite,
            trials,
            seed,
            n,
            min_slack,
        } => cmd_verify(suite, trials, seed, n, min_slack).map(Some),
        Command::Replay { record } => cmd_replay(&record).map(Some),
        Command::Bounds { grid_t, grid_q, out } => cmd_bounds(grid_t, grid_q, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors share the invalid-input code
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(Some(r)) => {
            println!("{}", r.json);
            ExitCode::from(r.code)
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
