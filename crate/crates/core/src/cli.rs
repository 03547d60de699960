//! Command-line front end. Exit codes: 0 success, 1 a check or verdict
//! failed, 2 invalid input.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use faer::c64;
use serde_json::json;

use crate::approxsing::{gram_lower_bound, sequence_residuals};
use crate::dhcheck::{default_probes, dh_classify, DhTolerances};
use crate::error::{invalid, Error, Result};
use crate::fixtures::{self, get_fixture, Fixture, FixtureParams, REGISTRY};
use crate::odae::{mild_residual, polynomial_solution, series_solution, Trajectory};
use crate::opmodel::Pencil;
use crate::report::{caveat_lines, csv_line, fmt_num};
use crate::sections::{distance_sweep, section, SectionedPencil};
use crate::singpoly::{extract_left_chain, extract_right_chain};
use crate::spectra::{classify_point, spectra_grid, Lambda, Rect, Tolerances};

#[derive(Parser, Debug)]
#[command(
    name = "pencilkit",
    version,
    about = "Singularity diagnostics for operator pencils lambda E - A"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pointwise verdicts, distance bound, chains and dH report for one section.
    Analyze(AnalyzeArgs),
    /// sigma_min and verdicts on a rectangular grid.
    Spectra(SpectraArgs),
    /// Right and left singular chains of a section.
    Chains(ChainArgs),
    /// Residual table of an approximate singular polynomial sequence.
    Approx(ApproxArgs),
    /// Stacked sigma_min on growing sections.
    Distance(DistanceArgs),
    /// dH structure diagnostics and half-plane classification.
    DhCheck(SourceArgs),
    /// Trajectory of E x' = A x as CSV.
    Simulate(SimulateArgs),
    /// Built-in fixtures.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Subcommand, Debug)]
enum ExamplesAction {
    List,
    Run {
        name: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// Pencil JSON file.
    input: Option<PathBuf>,
    #[arg(long, conflicts_with = "input")]
    fixture: Option<String>,
    /// Section size (defaults to the fixture's window, or 8).
    #[arg(long)]
    n: Option<usize>,
    /// Kronecker index for `kronecker_L`.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    singular_pressure: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    src: SourceArgs,
    #[arg(long)]
    tol_point: Option<f64>,
    #[arg(long)]
    tol_ap: Option<f64>,
    /// Comma-separated complex probes such as `0,1,-1+2i`.
    #[arg(long, default_value = "0,1,i")]
    probes: String,
}

#[derive(Args, Debug)]
struct SpectraArgs {
    #[command(flatten)]
    src: SourceArgs,
    #[arg(long, default_value = "-2,2,-2,2")]
    rect: String,
    /// `re_steps,im_steps`.
    #[arg(long, default_value = "21,21")]
    steps: String,
    #[arg(long)]
    tol_point: Option<f64>,
    #[arg(long)]
    tol_ap: Option<f64>,
}

#[derive(Args, Debug)]
struct ChainArgs {
    #[command(flatten)]
    src: SourceArgs,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[command(flatten)]
    src: SourceArgs,
    #[arg(long, default_value = "0,1,-1,1+i")]
    probes: String,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    #[command(flatten)]
    src: SourceArgs,
    #[arg(long, default_value = "2,4,8,16,32")]
    sections: String,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    src: SourceArgs,
    /// Comma-separated sample times.
    #[arg(long, default_value = "0,0.25,0.5,0.75,1")]
    times: String,
    /// Series truncation order.
    #[arg(long, default_value_t = 15)]
    order: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Result<c64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || invalid(format!("cannot parse complex number `{s}`"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t
            .parse::<f64>()
            .map(|x| c64::new(x, 0.0))
            .map_err(|_| bad());
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let coef = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => Ok(c64::new(
            body[..i].parse::<f64>().map_err(|_| bad())?,
            coef(&body[i..])?,
        )),
        None => Ok(c64::new(0.0, coef(body)?)),
    }
}

pub fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let v: Vec<T> = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| f(x.trim()))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(invalid(format!("empty list `{s}`")));
    }
    Ok(v)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| invalid(format!("cannot parse number `{s}`")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| invalid(format!("cannot parse size `{s}`")))
}

fn fmt_c(z: c64) -> String {
    format!(
        "{}{}{}i",
        fmt_num(z.re),
        if z.im < 0.0 { "" } else { "+" },
        fmt_num(z.im)
    )
}

struct Source {
    pencil: Pencil,
    fixture: Option<Fixture>,
    window: usize,
}

impl SourceArgs {
    fn params(&self) -> FixtureParams {
        let mut p = FixtureParams {
            k: self.k,
            seed: self.seed,
            singular_pressure: self.singular_pressure,
            ..FixtureParams::default()
        };
        if let Some(n) = self.n {
            p.n = n;
        }
        p
    }

    fn fixture(&self) -> Result<Fixture> {
        let name = self
            .fixture
            .as_deref()
            .ok_or_else(|| invalid("this command needs --fixture"))?;
        get_fixture(name, &self.params())
    }

    fn load(&self) -> Result<Source> {
        if let Some(path) = &self.input {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            let pencil = Pencil::from_json_str(&text)?;
            return Ok(Source {
                pencil,
                fixture: None,
                window: self.n.unwrap_or(8),
            });
        }
        let f = self.fixture()?;
        let pencil = f.pencil()?.clone();
        let window = self.n.unwrap_or(f.default_window);
        Ok(Source {
            pencil,
            window,
            fixture: Some(f),
        })
    }

    fn section(&self) -> Result<(Source, SectionedPencil)> {
        let src = self.load()?;
        let s = section(&src.pencil, src.window)?;
        Ok((src, s))
    }
}

fn tolerances(s: &SectionedPencil, point: Option<f64>, ap: Option<f64>) -> Result<Tolerances> {
    let mut t = Tolerances::defaults(s)?;
    if let Some(p) = point {
        t.tol_point = p;
    }
    if let Some(a) = ap {
        t.tol_ap = a;
    }
    Ok(t)
}

fn json_out(out: &mut dyn Write, v: &serde_json::Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?).map_err(io_err)
}

fn io_err(source: std::io::Error) -> Error {
    Error::Io {
        path: "<output>".into(),
        source,
    }
}

macro_rules! w {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(io_err)?
    };
}

type Outcome = Result<i32>;

fn analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Outcome {
    let (_, s) = a.src.section()?;
    let tols = tolerances(&s, a.tol_point, a.tol_ap)?;
    let probes = parse_list(&a.probes, parse_complex)?;
    let mut points: Vec<_> = probes
        .iter()
        .map(|z| classify_point(&s, Lambda::finite(*z), tols))
        .collect::<Result<_>>()?;
    points.push(classify_point(&s, Lambda::Infinity, tols)?);
    let dist = crate::sections::distance_to_singularity_bound(&s)?;
    let right = extract_right_chain(&s, 1e-10)?;
    let left = extract_left_chain(&s, 1e-10)?;
    let dh = if s.dh.is_some() {
        Some(dh_classify(
            &s,
            &default_probes(),
            DhTolerances::defaults(&s)?,
        )?)
    } else {
        None
    };
    if a.src.format == Format::Json {
        return json_out(
            out,
            &json!({
                "window": {"rows": s.rows(), "cols": s.cols()},
                "scale": s.scale()?,
                "tolerances": tols,
                "points": points,
                "stacked_sigma_min": dist.value,
                "right_minimal_index": right.as_ref().map(|c| c.minimal_index),
                "left_minimal_index": left.as_ref().map(|c| c.minimal_index),
                "dh": dh,
                "caveats": s.caveats,
            }),
        )
        .map(|_| 0);
    }
    write!(out, "{}", caveat_lines(&s.caveats)).map_err(io_err)?;
    w!(
        out,
        "section {}x{}, scale {}",
        s.rows(),
        s.cols(),
        fmt_num(s.scale()?)
    );
    w!(
        out,
        "tol_point {}, tol_ap {}",
        fmt_num(tols.tol_point),
        fmt_num(tols.tol_ap)
    );
    for p in &points {
        let at = match p.lambda {
            Lambda::Finite { re, im } => fmt_c(c64::new(re, im)),
            Lambda::Infinity => "inf".into(),
        };
        w!(
            out,
            "lambda {at}: {} (sigma_min {})",
            p.verdict.as_str(),
            fmt_num(p.sigma_min)
        );
    }
    w!(out, "stacked sigma_min {}", fmt_num(dist.value));
    let idx = |c: &Option<crate::singpoly::ChainReport>| {
        c.as_ref()
            .map_or("none".to_string(), |c| c.minimal_index.to_string())
    };
    w!(out, "right minimal index {}", idx(&right));
    w!(out, "left minimal index {}", idx(&left));
    if let Some(r) = &dh {
        w!(
            out,
            "dH: {} (structure ok: {}, common kernel dim {})",
            r.classification.as_str(),
            r.structure_ok,
            r.common_kernel_dim
        );
    }
    Ok(0)
}

fn spectra(a: &SpectraArgs, out: &mut dyn Write) -> Outcome {
    let (_, s) = a.src.section()?;
    let rect: Rect = a.rect.parse()?;
    let steps = parse_list(&a.steps, parse_usize)?;
    if steps.len() != 2 {
        return Err(invalid("--steps needs two numbers"));
    }
    let tols = tolerances(&s, a.tol_point, a.tol_ap)?;
    let g = spectra_grid(&s, rect, (steps[0], steps[1]), tols)?;
    match a.src.format {
        Format::Json => json_out(out, &json!({"grid": g, "caveats": s.caveats}))?,
        Format::Csv => {
            write!(out, "{}", caveat_lines(&s.caveats)).map_err(io_err)?;
            write!(
                out,
                "{}",
                csv_line(&["re", "im", "sigma_min", "sigma_min_adjoint", "verdict"])
            )
            .map_err(io_err)?;
            for v in &g.values {
                let Lambda::Finite { re, im } = v.lambda else {
                    continue;
                };
                let row = [
                    fmt_num(re),
                    fmt_num(im),
                    fmt_num(v.sigma_min),
                    fmt_num(v.sigma_min_adjoint),
                    v.verdict.as_str().into(),
                ];
                write!(out, "{}", csv_line(&row)).map_err(io_err)?;
            }
        }
        Format::Text => {
            write!(out, "{}", caveat_lines(&s.caveats)).map_err(io_err)?;
            let min = g
                .values
                .iter()
                .min_by(|x, y| x.sigma_min.total_cmp(&y.sigma_min))
                .unwrap();
            let count =
                |v: crate::spectra::Verdict| g.values.iter().filter(|p| p.verdict == v).count();
            w!(out, "{} grid points", g.values.len());
            for v in [
                crate::spectra::Verdict::PointSingular,
                crate::spectra::Verdict::ApproxSingularOnly,
                crate::spectra::Verdict::SingularOnly,
                crate::spectra::Verdict::Regular,
            ] {
                w!(out, "{}: {}", v.as_str(), count(v));
            }
            if let Lambda::Finite { re, im } = min.lambda {
                w!(
                    out,
                    "min sigma_min {} at {}",
                    fmt_num(min.sigma_min),
                    fmt_c(c64::new(re, im))
                );
            }
        }
    }
    Ok(0)
}

fn chains(a: &ChainArgs, out: &mut dyn Write) -> Outcome {
    let (_, s) = a.src.section()?;
    let right = extract_right_chain(&s, a.tol)?;
    let left = extract_left_chain(&s, a.tol)?;
    if a.src.format == Format::Json {
        return json_out(
            out,
            &json!({
                "right": right.as_ref().map(|c| c.to_json()),
                "left": left.as_ref().map(|c| c.to_json()),
                "caveats": s.caveats,
            }),
        )
        .map(|_| 0);
    }
    write!(out, "{}", caveat_lines(&s.caveats)).map_err(io_err)?;
    for (side, c) in [("right", &right), ("left", &left)] {
        match c {
            Some(c) => w!(
                out,
                "{side}: minimal index {}, max residual {}, independence margin {}",
                c.minimal_index,
                fmt_num(c.max_residual()),
                fmt_num(c.independence_margin)
            ),
            None => w!(out, "{side}: none"),
        }
    }
    Ok(0)
}

fn approx(a: &ApproxArgs, out: &mut dyn Write) -> Outcome {
    let f = a.src.fixture()?;
    let seq = f
        .witnesses
        .sequence
        .clone()
        .or_else(|| {
            let w = f.witnesses.joint_kernel.clone()?;
            crate::approxsing::approx_kernel_sequence(f.pencil.as_ref()?.space_in(), w).ok()
        })
        .ok_or_else(|| invalid(format!("`{}` carries no approximate sequence", f.name)))?;
    let probes = parse_list(&a.probes, parse_complex)?;
    let gram = gram_lower_bound(&seq, seq.range())?;
    let rows = match &f.pencil {
        Some(p) => sequence_residuals(p, &seq, &probes, seq.range())?,
        None => Vec::new(),
    };
    match a.src.format {
        Format::Json => json_out(
            out,
            &json!({"sequence": seq.name, "xi": gram.xi, "gram": gram.rows, "residuals": rows}),
        )?,
        _ => {
            w!(out, "# sequence {}, xi = {}", seq.name, fmt_num(gram.xi));
            let head = [
                "n",
                "probe_re",
                "probe_im",
                "fwd_residual",
                "rev_residual",
                "p_norm",
                "revp_norm",
            ];
            write!(out, "{}", csv_line(&head)).map_err(io_err)?;
            for r in &rows {
                let row = [
                    r.n.to_string(),
                    fmt_num(r.probe_re),
                    fmt_num(r.probe_im),
                    fmt_num(r.fwd_residual),
                    fmt_num(r.rev_residual),
                    fmt_num(r.p_norm),
                    fmt_num(r.revp_norm),
                ];
                write!(out, "{}", csv_line(&row)).map_err(io_err)?;
            }
        }
    }
    Ok(0)
}

fn distance(a: &DistanceArgs, out: &mut dyn Write) -> Outcome {
    let src = a.src.load()?;
    let sizes = parse_list(&a.sections, parse_usize)?;
    let rows = distance_sweep(&src.pencil, &sizes)?;
    let caveats = section(&src.pencil, sizes[0])?.caveats;
    match a.src.format {
        Format::Json => json_out(out, &json!({"rows": rows, "caveats": caveats}))?,
        _ => {
            write!(out, "{}", caveat_lines(&caveats)).map_err(io_err)?;
            write!(
                out,
                "{}",
                csv_line(&["n", "stacked_sigma_min", "witness_support_center"])
            )
            .map_err(io_err)?;
            for r in &rows {
                let row = [
                    r.n.to_string(),
                    fmt_num(r.stacked_sigma_min),
                    fmt_num(r.witness_support_center),
                ];
                write!(out, "{}", csv_line(&row)).map_err(io_err)?;
            }
        }
    }
    Ok(0)
}

fn dh_check(a: &SourceArgs, out: &mut dyn Write) -> Outcome {
    let src = a.load()?;
    let pencil = match (
        &src.pencil.dh,
        src.fixture.as_ref().and_then(|f| f.dh_variant.clone()),
    ) {
        (None, Some(v)) => v,
        _ => src.pencil.clone(),
    };
    let s = section(&pencil, src.window)?;
    if s.dh.is_none() {
        return Err(Error::MissingDh);
    }
    let r = dh_classify(&s, &default_probes(), DhTolerances::defaults(&s)?)?;
    if a.format == Format::Json {
        json_out(out, &json!({"report": r, "caveats": s.caveats}))?;
    } else {
        write!(out, "{}", caveat_lines(&s.caveats)).map_err(io_err)?;
        let d = &r.diagnostics;
        w!(out, "structure ok: {}", r.structure_ok);
        w!(out, "selfadjoint defect {}", fmt_num(d.selfadjoint_defect));
        w!(out, "lambda_min(Q*E) {}", fmt_num(d.qe_lambda_min));
        w!(
            out,
            "dissipativity margin {}",
            fmt_num(d.dissipativity_margin)
        );
        w!(out, "common kernel dim {}", r.common_kernel_dim);
        w!(out, "stacked sigma_min {}", fmt_num(r.stacked_sigma_min));
        for p in &r.probes {
            w!(
                out,
                "probe {}: sigma_min {}",
                fmt_c(c64::new(p.re, p.im)),
                fmt_num(p.sigma_min)
            );
        }
        w!(out, "classification {}", r.classification.as_str());
        w!(out, "{}", r.note);
    }
    Ok(if r.structure_ok { 0 } else { 1 })
}

fn simulate_trajectory(a: &SimulateArgs) -> Result<Trajectory> {
    let times = parse_list(&a.times, parse_f64)?;
    let f = a.src.fixture()?;
    if f.name == "poroelasticity_template" && !a.src.singular_pressure {
        let s = section(f.pencil()?, f.default_window)?;
        return fixtures::poro_trajectory(&s, a.src.seed);
    }
    let p = f.pencil()?;
    let mut tr = if let Some(g) = &f.witnesses.generator {
        series_solution(p, g, &times, a.order)?
    } else if let Some(q) = &f.witnesses.polynomial {
        polynomial_solution(p, q, &times, 1e-10)?
    } else {
        return Err(invalid(format!("`{}` has no trajectory witness", f.name)));
    };
    if times.iter().all(|t| *t >= 0.0) && times.first() == Some(&0.0) {
        tr.residual_mild = mild_residual(p, &tr, 1e-10)?;
    }
    Ok(tr)
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Outcome {
    let tr = simulate_trajectory(a)?;
    let csv = tr.to_csv();
    match &a.output {
        Some(path) => std::fs::write(path, csv).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => write!(out, "{csv}").map_err(io_err)?,
    }
    Ok(0)
}

/// Writes the check report of one fixture; returns `(passed, total)`.
pub fn write_fixture_report(
    name: &str,
    params: &FixtureParams,
    out: &mut dyn Write,
) -> Result<(usize, usize)> {
    let f = get_fixture(name, params)?;
    let checks = fixtures::run_checks(name, params)?;
    w!(out, "== {name}: {}", f.summary);
    for e in &f.expected {
        w!(out, "expected {}: {}", e.concept, e.value);
    }
    write!(out, "{}", caveat_lines(&f.notes)).map_err(io_err)?;
    let mut passed = 0;
    for c in &checks {
        passed += c.passed as usize;
        w!(
            out,
            "[{}] {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.label,
            c.detail
        );
    }
    w!(out, "{passed}/{} checks passed", checks.len());
    Ok((passed, checks.len()))
}

fn examples(action: &ExamplesAction, out: &mut dyn Write) -> Outcome {
    match action {
        ExamplesAction::List => {
            for (name, summary) in REGISTRY {
                w!(out, "{name:<26}{summary}");
            }
            Ok(0)
        }
        ExamplesAction::Run { name, all, seed } => {
            let params = FixtureParams {
                seed: *seed,
                ..FixtureParams::default()
            };
            let names: Vec<&str> = match (name, all) {
                (None, true) => fixtures::fixture_names(),
                (Some(n), false) => vec![n.as_str()],
                _ => return Err(invalid("give a fixture name or --all")),
            };
            let (mut passed, mut total) = (0, 0);
            for n in &names {
                let (p, t) = write_fixture_report(n, &params, out)?;
                passed += p;
                total += t;
            }
            if names.len() > 1 {
                w!(out, "total: {passed}/{total} checks passed");
            }
            Ok(if passed == total { 0 } else { 1 })
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("PENCILKIT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    configure_threads();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a, out),
        Command::Spectra(a) => spectra(a, out),
        Command::Chains(a) => chains(a, out),
        Command::Approx(a) => approx(a, out),
        Command::Distance(a) => distance(a, out),
        Command::DhCheck(a) => dh_check(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Examples { action } => examples(action, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::VerificationFailed(_) => 1,
                _ => 2,
            }
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1+1i").unwrap(), c64::new(1.0, 1.0));
        assert_eq!(parse_complex("-2").unwrap(), c64::new(-2.0, 0.0));
        assert_eq!(parse_complex("i").unwrap(), c64::new(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c64::new(0.0, -1.0));
        assert_eq!(parse_complex("0.5-0.25i").unwrap(), c64::new(0.5, -0.25));
        assert_eq!(parse_complex("1e-3+2e+1i").unwrap(), c64::new(1e-3, 20.0));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn unknown_subcommand_is_input_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["pencilkit", "frobnicate"], &mut o, &mut e), 2);
    }

    #[test]
    fn unknown_fixture_is_input_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(
            run(["pencilkit", "examples", "run", "nope"], &mut o, &mut e),
            2
        );
        assert!(String::from_utf8(e).unwrap().contains("nope"));
    }
}
