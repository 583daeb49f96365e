//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use opexp_core::chrono::{check_identity, Identity, MatrixPoly};
use opexp_core::expr::{Expr, Rational, Symbol};
use opexp_core::problem::{Problem, ProblemError, Substitution, SubstitutionKind};
use opexp_core::series::{
    expand_generalized, fourier_form, mismatches, resummed_series, solve, GeneralizedSeries,
};
use opexp_core::validate::{compare_series_numeric, Bindings, NumericError, SeriesEval};

use crate::dump::{AnySeries, Dump};
use crate::matrix::{format_matrix, load_matrix, MatrixSource};
use crate::problem_file::{load_problem, load_substitution, parse_rational};
use crate::render::{self, Style};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;
pub const EXIT_IDENTITY_FAIL: i32 = 4;
pub const EXIT_TOLERANCE: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "opexp",
    version,
    about = "Formal series solutions by the proper operator exponential"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Taylor series of a Cauchy problem.
    Solve(SolveArgs),
    /// Generalized series after a change of the time variable.
    Resum(ResumArgs),
    /// Harmonics of the exponential resummation with p = i*omega.
    Fourier(FourierArgs),
    /// Checks chronological-exponential identities on random matrices.
    Verify(VerifyArgs),
    /// Compares a truncated series with an RK4 reference.
    Compare(CompareArgs),
    /// Re-prints a structured dump.
    Show(ShowArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Latex,
    Csv,
    Structured,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SubArgs {
    /// identity, exp, mobius or file:<path>.
    #[arg(long, default_value = "exp")]
    pub sub: String,
    /// Substitution parameter: a rational or `symbolic`.
    #[arg(long, default_value = "symbolic")]
    pub p: String,
    /// Name of the new time variable.
    #[arg(long, default_value = "tau")]
    pub var: String,
}

#[derive(Debug, Args)]
pub struct ResumArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[command(flatten)]
    pub sub: SubArgs,
    /// Re-expand in powers of t - a and compare with the Taylor series.
    #[arg(long)]
    pub check: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[command(flatten)]
    pub sub: SubArgs,
    /// Frequency: a rational or `symbolic`.
    #[arg(long, default_value = "symbolic")]
    pub omega: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_identity(s: &str) -> Result<Identity, String> {
    match s {
        "bch" => Ok(Identity::BchProduct),
        "zassenhaus" => Ok(Identity::ZassenhausSplit),
        "anti" => Ok(Identity::AntiSplit),
        _ => s
            .parse()
            .map_err(|e: opexp_core::chrono::UnknownIdentity| e.to_string()),
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random (B, A) pairs.
    #[arg(long, default_value_t = 20)]
    pub pairs: usize,
    /// Restrict to these identities (repeatable).
    #[arg(long, value_parser = parse_identity)]
    pub identity: Vec<Identity>,
    /// Use B from a matrix file instead of random pairs.
    #[arg(long)]
    pub matrix_b: Option<PathBuf>,
    /// Use A (or C) from a matrix file instead of random pairs.
    #[arg(long)]
    pub matrix_a: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", v.trim()))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 12)]
    pub order: usize,
    #[command(flatten)]
    pub sub: CompareSub,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// End of the sample interval (default a + 1/2).
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Number of evenly spaced samples on [a, t_end].
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    /// Explicit sample times, overriding --samples.
    #[arg(long, value_delimiter = ',')]
    pub points: Vec<f64>,
    /// Numeric value of a free symbol (repeatable).
    #[arg(long, value_parser = parse_binding)]
    pub bind: Vec<(String, f64)>,
    /// Component to compare (default: the first unknown).
    #[arg(long)]
    pub unknown: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareSub {
    #[arg(long, default_value = "identity")]
    pub sub: String,
    #[arg(long, default_value = "1")]
    pub p: String,
    #[arg(long, default_value = "tau")]
    pub var: String,
}

#[derive(Debug, Args)]
pub struct ShowArgs {
    pub dump: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// A failed command: exit code and diagnostic.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn other(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_ERROR,
            message: message.into(),
        }
    }
}

impl From<ProblemError> for Failure {
    fn from(e: ProblemError) -> Failure {
        Failure::invalid(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::other(e.to_string())
    }
}

impl From<NumericError> for Failure {
    fn from(e: NumericError) -> Failure {
        match e {
            NumericError::NonFinite { .. } => Failure::other(e.to_string()),
            _ => Failure::invalid(e.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn problem(path: &Path) -> Result<Problem, Failure> {
    load_problem(&read(path)?).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn parameter(text: &str, name: &str) -> Result<Expr, Failure> {
    if text == "symbolic" {
        return Ok(Expr::symbol(name));
    }
    parse_rational(text).map(Expr::rational).ok_or_else(|| {
        Failure::invalid(format!(
            "--{name} must be a rational or `symbolic`, not `{text}`"
        ))
    })
}

fn substitution(p: &Problem, sub: &str, param: &str, var: &str) -> Result<Substitution, Failure> {
    let time = p.time();
    let var = Symbol::new(var);
    let s = match sub {
        "identity" => Substitution::identity(time),
        "exp" => Substitution::exponential(time, &var, &parameter(param, "p")?, p.point())?,
        "mobius" => Substitution::mobius(time, &var, &parameter(param, "p")?, p.point())?,
        _ => match sub.strip_prefix("file:") {
            Some(path) => {
                let path = Path::new(path);
                load_substitution(&read(path)?, time)
                    .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?
            }
            None => {
                return Err(Failure::invalid(format!(
                    "unknown substitution `{sub}` (expected identity, exp, mobius or file:<path>)"
                )))
            }
        },
    };
    Ok(s)
}

fn print_series(series: &AnySeries, format: Format, out: &mut dyn Write) -> Result<(), Failure> {
    match (series, format) {
        (_, Format::Structured) => write!(out, "{}", Dump::new(series).to_toml())?,
        (AnySeries::Taylor(s), Format::Csv) => {
            let rows: Vec<_> = (0..s.components.len())
                .map(|i| (s.components[i].unknown.clone(), render::divided(s, i)))
                .collect();
            render::coefficients_csv(&rows, out)?
        }
        (AnySeries::Generalized(g), Format::Csv) => {
            let rows: Vec<_> = g
                .components
                .iter()
                .map(|c| (c.unknown.clone(), c.coefficients.clone()))
                .collect();
            render::coefficients_csv(&rows, out)?
        }
        (AnySeries::Fourier(f), Format::Csv) => render::fourier_csv(f, out)?,
        (s, Format::Text | Format::Latex) => {
            let style = if format == Format::Text {
                Style::Text
            } else {
                Style::Latex
            };
            let text = match s {
                AnySeries::Taylor(s) => render::taylor(s, style),
                AnySeries::Generalized(g) => render::generalized(g, style),
                AnySeries::Fourier(f) => render::fourier(f, style),
            };
            write!(out, "{text}")?
        }
    }
    Ok(())
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Outcome {
    let p = problem(&a.problem)?;
    let sol = solve(&p, a.order)?;
    print_series(&AnySeries::Taylor(sol), a.format, out)?;
    Ok(EXIT_OK)
}

fn resum(
    path: &Path,
    order: usize,
    sub: &SubArgs,
) -> Result<(Problem, GeneralizedSeries), Failure> {
    let p = problem(path)?;
    let s = substitution(&p, &sub.sub, &sub.p, &sub.var)?;
    let gs = resummed_series(&p, &s, order)?;
    Ok((p, gs))
}

fn cmd_resum(a: &ResumArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let (p, gs) = resum(&a.problem, a.order, &a.sub)?;
    print_series(&AnySeries::Generalized(gs.clone()), a.format, out)?;
    if !a.check {
        return Ok(EXIT_OK);
    }
    let expanded = expand_generalized(&gs, a.order)?;
    let taylor = solve(&p, a.order)?;
    let bad = mismatches(&expanded, &taylor);
    if bad.is_empty() {
        writeln!(out, "CONSISTENT")?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "INCONSISTENT")?;
        for (u, n) in bad {
            writeln!(
                err,
                "coefficient {n} of `{u}` differs from the Taylor series"
            )?;
        }
        Ok(EXIT_INCONSISTENT)
    }
}

fn cmd_fourier(a: &FourierArgs, out: &mut dyn Write) -> Outcome {
    let (_, gs) = resum(&a.problem, a.order, &a.sub)?;
    if gs.substitution.kind() != SubstitutionKind::Exponential {
        return Err(ProblemError::NotExponential.into());
    }
    let omega = parameter(&a.omega, "omega")?;
    let fs = fourier_form(&gs, &omega)?;
    print_series(&AnySeries::Fourier(fs), a.format, out)?;
    Ok(EXIT_OK)
}

fn matrix_arg(path: &Option<PathBuf>) -> Result<Option<MatrixPoly>, Failure> {
    path.as_ref()
        .map(|p| {
            load_matrix(&read(p)?).map_err(|e| Failure::invalid(format!("{}: {e}", p.display())))
        })
        .transpose()
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    if !matches!(a.format, Format::Text | Format::Csv) {
        return Err(Failure::invalid("verify supports --format text or csv"));
    }
    let identities: Vec<Identity> = if a.identity.is_empty() {
        Identity::ALL.to_vec()
    } else {
        a.identity.clone()
    };
    let fixed_b = matrix_arg(&a.matrix_b)?;
    let fixed_a = matrix_arg(&a.matrix_a)?;
    let pairs: Vec<(MatrixPoly, MatrixPoly)> = if fixed_b.is_some() || fixed_a.is_some() {
        let dim = fixed_b
            .as_ref()
            .or(fixed_a.as_ref())
            .map(MatrixPoly::dim)
            .unwrap_or(a.dim);
        let b = fixed_b.unwrap_or_else(|| MatrixPoly::zero(dim));
        let other = fixed_a.unwrap_or_else(|| MatrixPoly::zero(dim));
        if b.dim() != other.dim() {
            return Err(Failure::invalid("matrices have different dimensions"));
        }
        vec![(b, other)]
    } else {
        if a.dim == 0 {
            return Err(Failure::invalid("--dim must be positive"));
        }
        let mut src = MatrixSource::new(a.seed);
        (0..a.pairs)
            .map(|_| (src.matrix(a.dim, a.degree), src.matrix(a.dim, a.degree)))
            .collect()
    };
    let zero = Rational::from_integer(0.into());
    let mut csv = (a.format == Format::Csv).then(|| csv::Writer::from_writer(Vec::new()));
    if let Some(w) = csv.as_mut() {
        w.write_record(["pair", "identity", "result", "lowest_order"])
            .map_err(|e| Failure::other(e.to_string()))?;
    } else {
        writeln!(
            out,
            "# dim {} degree {} depth {} seed {} pairs {}",
            a.dim,
            a.degree,
            a.depth,
            a.seed,
            pairs.len()
        )?;
    }
    let mut passed = vec![0usize; identities.len()];
    let mut failures = Vec::new();
    for (k, (b, other)) in pairs.iter().enumerate() {
        for (i, id) in identities.iter().enumerate() {
            let r = check_identity(*id, b, other, &zero, a.depth);
            let order = r
                .lowest_order
                .map_or("exact".to_string(), |o| o.to_string());
            let result = if r.pass { "PASS" } else { "FAIL" };
            match csv.as_mut() {
                Some(w) => w
                    .write_record([(k + 1).to_string(), id.name().into(), result.into(), order])
                    .map_err(|e| Failure::other(e.to_string()))?,
                None => writeln!(
                    out,
                    "pair {:>2}  {:<17} {result}  lowest order {order}",
                    k + 1,
                    id.name()
                )?,
            }
            if r.pass {
                passed[i] += 1;
            } else {
                failures.push((k, *id, r.lowest_order));
            }
        }
    }
    if let Some(w) = csv {
        out.write_all(&w.into_inner().map_err(|e| Failure::other(e.to_string()))?)?;
    } else {
        for (id, n) in identities.iter().zip(&passed) {
            let result = if *n == pairs.len() { "PASS" } else { "FAIL" };
            writeln!(out, "{}: {result} ({n}/{})", id.name(), pairs.len())?;
        }
    }
    if failures.is_empty() {
        return Ok(EXIT_OK);
    }
    for (k, id, order) in failures {
        let (b, other) = &pairs[k];
        writeln!(
            out,
            "FAIL {} on pair {}: first failing order {}\nB =\n{}A =\n{}",
            id.name(),
            k + 1,
            order.map_or("none".to_string(), |o| o.to_string()),
            format_matrix(b, &zero),
            format_matrix(other, &zero)
        )?;
    }
    Ok(EXIT_IDENTITY_FAIL)
}

fn cmd_compare(a: &CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let p = problem(&a.problem)?;
    let bindings: Bindings = a.bind.iter().map(|(k, v)| (Symbol::new(k), *v)).collect();
    let start = p.point().to_f64().unwrap_or(f64::NAN);
    let samples: Vec<f64> = if a.points.is_empty() {
        let end = a.t_end.unwrap_or(start + 0.5);
        match a.samples {
            0 => return Err(Failure::invalid("--samples must be positive")),
            1 => vec![end],
            n => (0..n)
                .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        a.points.clone()
    };
    let unknown = match &a.unknown {
        Some(u) => Symbol::new(u),
        None => p.equations()[0].unknown.clone(),
    };
    let s = substitution(&p, &a.sub.sub, &a.sub.p, &a.sub.var)?;
    let series: Box<dyn SeriesEval> = if s.kind() == SubstitutionKind::Identity {
        Box::new(solve(&p, a.order)?)
    } else {
        Box::new(resummed_series(&p, &s, a.order)?)
    };
    let report = compare_series_numeric(
        series.as_ref(),
        &p,
        &unknown,
        &bindings,
        &samples,
        a.tol,
        a.steps,
    )?;
    render::comparison_csv(&report, out)?;
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    writeln!(
        err,
        "{verdict}: max rel err {:e} (max abs err {:e}), tolerance {:e}; order {}, rk4 {} steps",
        report.max_rel_err, report.max_abs_err, report.tolerance, report.order, report.steps
    )?;
    Ok(if report.pass { EXIT_OK } else { EXIT_TOLERANCE })
}

fn cmd_show(a: &ShowArgs, out: &mut dyn Write) -> Outcome {
    let text = read(&a.dump)?;
    let series = Dump::from_toml(&text)
        .and_then(|d| d.series())
        .map_err(|e| Failure::invalid(format!("{}: {e}", a.dump.display())))?;
    print_series(&series, a.format, out)?;
    Ok(EXIT_OK)
}

/// Runs one command; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Resum(a) => cmd_resum(a, out, err),
        Command::Fourier(a) => cmd_fourier(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Compare(a) => cmd_compare(a, out, err),
        Command::Show(a) => cmd_show(a, out),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
