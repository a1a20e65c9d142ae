//! `tfock`: vacuum measures, spectra, Cesàro norm curves, fixed-point
//! expectations, invariant states and self-checks for truncated t-free
//! Fock spaces.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage error, 3 numerical
//! tolerance failure.

mod checks;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;
use tfock_core::ergodic::{
    cesaro_sum, decay_slope, operator_norm, BoundForm, CesaroSpec, DecayPoint, BOUND_SLACK,
    DEFAULT_NORM_TOL,
};
use tfock_core::fock::DEFAULT_DIM_CAP;
use tfock_core::spectral::measure::truncated_measure_report;
use tfock_core::spectral::spectrum::{spectrum_full, spectrum_truncated, verify_spectrum};
use tfock_core::spectral::SpectrumSet;
use tfock_core::wick::full::normal_order_full;
use tfock_core::wick::{fixed_point_expectation, invariant_state_eval, normal_order};
use tfock_core::{Complex64, Error, ModelParams, Monomial};

use checks::{CheckOptions, Mutation, Status, Suite};
use output::{fmt_float, num, nums, obj, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "tfock",
    version,
    about = "Truncated t-free Fock space computations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Relative tolerance for power-iteration norm estimates.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Basis-dimension cap.
    #[arg(long, global = true, env = "TFOCK_DIM_CAP", hide = true)]
    dim_cap: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Vacuum spectral measure of the position operator.
    Measure {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: f64,
    },
    /// Spectrum of the position operator.
    Spectrum {
        #[arg(long, required_unless_present = "full")]
        m: Option<usize>,
        #[arg(long)]
        t: f64,
        /// Untruncated space: a band plus possible outliers.
        #[arg(long)]
        full: bool,
        /// Also diagonalize x_1 on the window [-L, L] and compare.
        #[arg(long = "L", conflicts_with = "full")]
        window: Option<i64>,
    },
    /// Norms of Cesàro shift averages of a word.
    Cesaro {
        #[arg(long)]
        word: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: f64,
        /// Comma-separated numbers of shift terms.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Window half-width; defaults to max|i| + max n.
        #[arg(long = "L")]
        window: Option<i64>,
    },
    /// Shift-fixed-point expectation of a word.
    Expectation {
        #[arg(long)]
        word: String,
        #[arg(long, required_unless_present = "full")]
        m: Option<usize>,
        #[arg(long)]
        t: f64,
        /// Untruncated space: coefficients of P_Omega and I - P_Omega.
        #[arg(long)]
        full: bool,
        #[arg(long = "L")]
        window: Option<i64>,
    },
    /// Value of a shift-invariant state on a word.
    State {
        #[arg(long)]
        word: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: f64,
        /// Comma-separated barycentric weights on the m+1 extreme states.
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<f64>,
        #[arg(long = "L")]
        window: Option<i64>,
    },
    /// Run a self-check suite.
    Check {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, value_enum, hide = true)]
        mutation: Option<Mutation>,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::CapacityExceeded { .. }
            | Error::ModeOutOfWindow { .. }
            | Error::LevelOutOfRange { .. }
            | Error::WindowOverflow { .. }
            | Error::ParamsMismatch
            | Error::NotInUpperHalfPlane(_)
            | Error::InvalidProbability(_)
            | Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

struct Rendered {
    json: Value,
    table: Table,
    failed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rendered = match run(&cli) {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            return ExitCode::from(3);
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let text = match cli.format {
        Format::Json => output::to_json(&rendered.json),
        Format::Csv => rendered.table.to_csv(),
    };
    if let Err(e) = output::emit(&text, cli.out.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    if rendered.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn params(cli: &Cli, t: f64, m: usize, window: i64) -> Result<ModelParams, Failure> {
    Ok(ModelParams::new(t, m, window)?.with_dim_cap(cli.dim_cap.unwrap_or(DEFAULT_DIM_CAP)))
}

fn parse_word(s: &str) -> Result<Monomial, Failure> {
    Ok(s.parse::<Monomial>()?)
}

fn complex(z: Complex64) -> Value {
    obj([("re", num(z.re)), ("im", num(z.im))])
}

fn run(cli: &Cli) -> Result<Rendered, Failure> {
    let norm_tol = cli.tol.unwrap_or(DEFAULT_NORM_TOL);
    if !(norm_tol.is_finite() && norm_tol > 0.0) {
        return Err(Failure::Usage(format!(
            "--tol must be positive, got {norm_tol}"
        )));
    }
    if let Some(path) = &cli.out {
        if path.is_dir() {
            return Err(Failure::Io(format!("{} is a directory", path.display())));
        }
    }
    match &cli.command {
        Command::Measure { m, t } => measure(*m, *t),
        Command::Spectrum { m, t, full, window } => spectrum(cli, *m, *t, *full, *window),
        Command::Cesaro {
            word,
            m,
            t,
            n,
            window,
        } => cesaro(cli, word, *m, *t, n, *window, norm_tol),
        Command::Expectation {
            word,
            m,
            t,
            full,
            window,
        } => expectation(cli, word, *m, *t, *full, *window),
        Command::State {
            word,
            m,
            t,
            weights,
            window,
        } => state(cli, word, *m, *t, weights, *window),
        Command::Check { suite, mutation } => check(
            *suite,
            &CheckOptions {
                seed: cli.seed,
                norm_tol,
                mutation: *mutation,
            },
        ),
    }
}

fn measure(m: usize, t: f64) -> Result<Rendered, Failure> {
    let report = truncated_measure_report(m, t)?;
    let atoms = &report.measure.atoms;
    let mut table = Table::new(vec!["z", "b"]);
    for a in atoms {
        table.push(vec![fmt_float(a.z), fmt_float(a.b)]);
    }
    let json = obj([
        ("m", Value::from(m)),
        ("t", num(t)),
        (
            "atoms",
            Value::Array(
                atoms
                    .iter()
                    .map(|a| obj([("z", num(a.z)), ("b", num(a.b))]))
                    .collect(),
            ),
        ),
    ]);
    Ok(Rendered {
        json,
        table,
        failed: false,
    })
}

fn spectrum(
    cli: &Cli,
    m: Option<usize>,
    t: f64,
    full: bool,
    window: Option<i64>,
) -> Result<Rendered, Failure> {
    let mut table = Table::new(vec!["kind", "value"]);
    if full {
        let SpectrumSet::Band {
            half_width,
            outliers,
        } = spectrum_full(t)?
        else {
            unreachable!("full spectrum is a band")
        };
        table.push(vec!["band_lower".into(), fmt_float(-half_width)]);
        table.push(vec!["band_upper".into(), fmt_float(half_width)]);
        for o in &outliers {
            table.push(vec!["outlier".into(), fmt_float(*o)]);
        }
        let json = obj([
            ("t", num(t)),
            ("full", Value::Bool(true)),
            ("band", nums(&[-half_width, half_width])),
            ("outliers", nums(&outliers)),
        ]);
        return Ok(Rendered {
            json,
            table,
            failed: false,
        });
    }
    let m = m.expect("clap requires --m without --full");
    let points = match spectrum_truncated(m, t)? {
        SpectrumSet::Finite(p) => p,
        SpectrumSet::Band { .. } => unreachable!("truncated spectrum is finite"),
    };
    if let Some(l) = window {
        // Dimension guard before building the window basis.
        tfock_core::fock::Basis::new(&params(cli, t, m, l)?)?;
        verify_spectrum(m, t, l).map_err(|e| match e {
            Error::SetMismatch(_) => Failure::Numerical(e.to_string()),
            e => e.into(),
        })?;
    }
    for p in &points {
        table.push(vec!["point".into(), fmt_float(*p)]);
    }
    let json = obj([
        ("m", Value::from(m)),
        ("t", num(t)),
        ("full", Value::Bool(false)),
        ("points", nums(&points)),
        ("verified_window", window.map_or(Value::Null, Value::from)),
    ]);
    Ok(Rendered {
        json,
        table,
        failed: false,
    })
}

fn cesaro(
    cli: &Cli,
    word: &str,
    m: usize,
    t: f64,
    ns: &[usize],
    window: Option<i64>,
    tol: f64,
) -> Result<Rendered, Failure> {
    let word = parse_word(word)?;
    let n_max = *ns.iter().max().expect("clap requires --n");
    let window = window.unwrap_or(word.max_abs_mode() + n_max as i64).max(1);
    let p = params(cli, t, m, window)?;
    let mut curve = Vec::new();
    let mut points = Vec::new();
    let mut reports = Vec::new();
    let mut table = Table::new(vec![
        "n",
        "norm",
        "form",
        "measured_norm",
        "bound",
        "ratio",
        "holds",
    ]);
    let mut fixed_point = false;
    for &n in ns {
        let spec = CesaroSpec::new(word.clone(), n, p)?;
        let est = operator_norm(&cesaro_sum(&spec)?, tol, cli.seed)?;
        let measured = est.value * word.coeff.norm();
        let avg = measured / n as f64;
        curve.push(obj([("n", Value::from(n)), ("norm", num(avg))]));
        points.push(DecayPoint { n, norm: avg });
        let mut forms = Vec::new();
        if spec.has_bound_shape() {
            forms.extend([BoundForm::SqrtNt, BoundForm::Corrected]);
        }
        if spec.is_wick_ordered() {
            forms.push(BoundForm::WickOrdered);
        }
        if forms.is_empty() {
            table.push(vec![
                n.to_string(),
                fmt_float(avg),
                String::new(),
                fmt_float(measured),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
        for form in forms {
            let bound = form.value(n, t, word.len(), m) * word.coeff.norm();
            let ratio = if bound > 0.0 { measured / bound } else { 0.0 };
            let holds = measured <= bound + BOUND_SLACK;
            table.push(vec![
                n.to_string(),
                fmt_float(avg),
                form.as_str().into(),
                fmt_float(measured),
                fmt_float(bound),
                fmt_float(ratio),
                holds.to_string(),
            ]);
            reports.push(obj([
                ("n", Value::from(n)),
                ("form", Value::from(form.as_str())),
                ("measured_norm", num(measured)),
                ("bound", num(bound)),
                ("ratio", num(ratio)),
                ("method", Value::from(est.method.as_str())),
                ("iterations", Value::from(est.iterations)),
                ("holds", Value::Bool(holds)),
            ]));
        }
        fixed_point = spec.word.factors.iter().all(|g| g.mode().is_none());
    }
    let slope = decay_slope(&points).map(num).unwrap_or(Value::Null);
    let json = obj([
        ("word", Value::from(word.to_string())),
        ("m", Value::from(m)),
        ("t", num(t)),
        ("L", Value::from(window)),
        ("fixed_point", Value::Bool(fixed_point)),
        ("slope", slope),
        ("curve", Value::Array(curve)),
        ("reports", Value::Array(reports)),
    ]);
    Ok(Rendered {
        json,
        table,
        failed: false,
    })
}

fn expectation(
    cli: &Cli,
    word: &str,
    m: Option<usize>,
    t: f64,
    full: bool,
    window: Option<i64>,
) -> Result<Rendered, Failure> {
    let word = parse_word(word)?;
    if full {
        let e = normal_order_full(&word, t)?.expectation();
        let mut table = Table::new(vec!["component", "re", "im"]);
        table.push(vec![
            "P_Omega".into(),
            fmt_float(e.vacuum.re),
            fmt_float(e.vacuum.im),
        ]);
        table.push(vec![
            "I-P_Omega".into(),
            fmt_float(e.rest.re),
            fmt_float(e.rest.im),
        ]);
        let json = obj([
            ("word", Value::from(word.to_string())),
            ("t", num(t)),
            ("full", Value::Bool(true)),
            ("vacuum", complex(e.vacuum)),
            ("rest", complex(e.rest)),
            ("scalar", Value::Bool(e.is_scalar(1e-12))),
        ]);
        return Ok(Rendered {
            json,
            table,
            failed: false,
        });
    }
    let m = m.expect("clap requires --m without --full");
    let p = params(cli, t, m, window.unwrap_or(word.max_abs_mode()).max(1))?;
    let nf = normal_order(&word, &p)?;
    let e = fixed_point_expectation(&nf);
    let coeffs = e
        .projection_coefficients()
        .expect("expectation is a combination of projections");
    let mut table = Table::new(vec!["h", "re", "im"]);
    for (h, c) in coeffs.iter().enumerate() {
        table.push(vec![h.to_string(), fmt_float(c.re), fmt_float(c.im)]);
    }
    let json = obj([
        ("word", Value::from(word.to_string())),
        ("m", Value::from(m)),
        ("t", num(t)),
        ("full", Value::Bool(false)),
        ("normal_form", Value::from(nf.to_string())),
        ("expectation", Value::from(e.to_string())),
        (
            "coefficients",
            Value::Array(
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(h, c)| {
                        obj([("h", Value::from(h)), ("re", num(c.re)), ("im", num(c.im))])
                    })
                    .collect(),
            ),
        ),
    ]);
    Ok(Rendered {
        json,
        table,
        failed: false,
    })
}

fn state(
    cli: &Cli,
    word: &str,
    m: usize,
    t: f64,
    weights: &[f64],
    window: Option<i64>,
) -> Result<Rendered, Failure> {
    let word = parse_word(word)?;
    let p = params(cli, t, m, window.unwrap_or(word.max_abs_mode()).max(1))?;
    let v = invariant_state_eval(weights, &word, &p)?;
    let mut table = Table::new(vec!["re", "im"]);
    table.push(vec![fmt_float(v.re), fmt_float(v.im)]);
    let json = obj([
        ("word", Value::from(word.to_string())),
        ("m", Value::from(m)),
        ("t", num(t)),
        ("weights", nums(weights)),
        ("value", complex(v)),
    ]);
    Ok(Rendered {
        json,
        table,
        failed: false,
    })
}

fn check(suite: Suite, opts: &CheckOptions) -> Result<Rendered, Failure> {
    let results = checks::run(suite, opts);
    let failed = results.iter().any(|r| r.status == Status::Fail);
    let mut table = Table::new(vec!["suite", "name", "status", "detail"]);
    for r in &results {
        eprintln!(
            "{} {}/{}: {}",
            r.status.as_str().to_uppercase(),
            r.suite,
            r.name,
            r.detail
        );
        table.push(vec![
            r.suite.into(),
            r.name.into(),
            r.status.as_str().into(),
            r.detail.clone(),
        ]);
    }
    let json = obj([
        ("suite", Value::from(checks::suite_label(suite))),
        ("seed", Value::from(opts.seed)),
        ("passed", Value::Bool(!failed)),
        (
            "checks",
            Value::Array(
                results
                    .iter()
                    .map(|r| {
                        obj([
                            ("suite", Value::from(r.suite)),
                            ("name", Value::from(r.name)),
                            ("status", Value::from(r.status.as_str())),
                            ("detail", Value::from(r.detail.clone())),
                        ])
                    })
                    .collect(),
            ),
        ),
    ]);
    Ok(Rendered {
        json,
        table,
        failed,
    })
}
