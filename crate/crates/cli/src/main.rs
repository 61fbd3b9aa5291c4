use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levelpass::bisection::{bisect, bisect_field, BisectOptions, BisectionState};
use levelpass::linalg::{ComplexMatrix, SigmaMinField};
use levelpass::local::{run_local, LocalIterate, LocalOptions};
use levelpass::wilkinson::{
    builtin_matrix, pseudospectrum_grid, read_matrix, sorted_spectrum, spectrum_box, voronoi_heuristic,
    wilkinson_distance, wilkinson_local, WilkinsonOptions, BUILTIN_MATRICES,
};
use levelpass::{builtin_problems, find_problem, Complex64, Error, Region, ScalarField};
use serde::Serialize;

const OK: u8 = 0;
const INPUT: u8 = 1;
const NOT_CONVERGED: u8 = 2;
const NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "levelpass",
    version,
    about = "Mountain-pass saddle points and the distance to the nearest defective matrix"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fast local level-set iteration; one row per iteration
    SolveLocal(LocalArgs),
    /// Global level bisection on a planar field
    SolveBisect(BisectArgs),
    /// Distance from a matrix to the nearest matrix with a repeated eigenvalue
    Wilkinson(WilkinsonArgs),
    /// sigma_min(A - zI) on a lattice, for plotting pseudospectra
    Psgrid(GridArgs),
    /// Catalog problems and built-in matrices
    ListProblems(ListArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Catalog problem name
    #[arg(long)]
    problem: Option<String>,
    /// Matrix file (text or JSON) or a built-in matrix name
    #[arg(long)]
    matrix: Option<String>,
}

#[derive(Args)]
struct MatrixSource {
    /// Matrix file (text or JSON) or a built-in matrix name
    #[arg(long)]
    matrix: String,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LocalArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1e-10)]
    tol_point: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol_gap: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Replace each pair by a locally closest pair before the bisector step
    #[arg(long)]
    step1a: bool,
    /// Matrices only: start this fraction of the gap inside each eigenvalue
    #[arg(long, default_value_t = 0.02)]
    pull_in: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BisectArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1e-10)]
    tol_point: f64,
    /// Stop once upper - lower falls below this
    #[arg(long, default_value_t = 1e-6)]
    tol_gap: f64,
    #[arg(long, default_value_t = 60)]
    max_iter: usize,
    #[arg(long, allow_negative_numbers = true)]
    lower: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    upper: Option<f64>,
    /// Grid cells across the search window
    #[arg(long, default_value_t = 512)]
    cells: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct WilkinsonArgs {
    #[command(flatten)]
    source: MatrixSource,
    #[arg(long, default_value_t = 1e-10)]
    tol_point: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol_gap: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long)]
    step1a: bool,
    #[arg(long, default_value_t = 0.02)]
    pull_in: f64,
    /// Also run every other eigenvalue pair and keep the smallest result
    #[arg(long)]
    exhaustive: bool,
    /// Write the rank-one perturbation E (JSON) to this file
    #[arg(long, value_name = "PATH")]
    perturbation: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    source: MatrixSource,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"], default_values_t = [100, 100])]
    grid: Vec<usize>,
    /// Defaults to the box around the spectrum used by the solvers
    #[arg(long = "box", num_args = 4, value_names = ["X0", "Y0", "X1", "Y1"], allow_negative_numbers = true)]
    bbox: Option<Vec<f64>>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ListArgs {
    #[command(flatten)]
    output: Output,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_)
            | Error::PreconditionViolation(_)
            | Error::UnsupportedDimension { .. }
            | Error::Parse(_)
            | Error::Io(_) => INPUT,
            Error::ResolutionLimit { .. } | Error::BoundaryHit { .. } => NOT_CONVERGED,
            Error::DegenerateSpectrum { .. } | Error::Numerical(_) => NUMERICAL,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Display) -> Failure {
    Failure { code: INPUT, message: message.to_string() }
}

/// What a command produced: text for the output, an exit code, and an
/// optional note for standard error.
struct Report {
    text: String,
    code: u8,
    note: Option<String>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure { code: NUMERICAL, message: e.to_string() };
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure { code: NUMERICAL, message: e.to_string() })?;
    String::from_utf8(bytes).map_err(|e| Failure { code: NUMERICAL, message: e.to_string() })
}

fn json_text(v: &impl Serialize) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure { code: NUMERICAL, message: e.to_string() })?;
    s.push('\n');
    Ok(s)
}

fn load_matrix(spec: &str) -> Result<ComplexMatrix, Failure> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(m) = builtin_matrix(spec) {
            return Ok(m);
        }
    }
    read_matrix(path).map_err(|e| input_error(format!("{spec}: {e}")))
}

fn load_problem(name: &str) -> Result<levelpass::TestProblem, Failure> {
    find_problem(name).ok_or_else(|| input_error(format!("unknown problem {name:?}; see list-problems")))
}

fn check_tolerances(pairs: &[(&str, f64)]) -> Result<(), Failure> {
    for (name, v) in pairs {
        if !(v.is_finite() && *v > 0.0) {
            return Err(input_error(format!("--{name} must be positive")));
        }
    }
    Ok(())
}

fn local_options(tol_point: f64, tol_gap: f64, max_iter: usize, step1a: bool) -> Result<LocalOptions, Failure> {
    check_tolerances(&[("tol-point", tol_point), ("tol-gap", tol_gap)])?;
    Ok(LocalOptions { point_tol: tol_point, gap_tol: tol_gap, max_iter, do_step_1a: step1a, ..Default::default() })
}

// Row 0 is the equalized start pair; the table proper begins at i = 1.
fn local_table(records: &[LocalIterate]) -> Result<String, Failure> {
    csv_text(
        &["i", "f_x", "M", "gap_ratio", "dist"],
        records
            .iter()
            .filter(|r| r.i >= 1)
            .map(|r| vec![r.i.to_string(), num(r.f_x), num(r.m), num(r.gap_ratio), num(r.dist)]),
    )
}

fn status(converged: bool) -> (u8, Option<String>) {
    if converged {
        (OK, None)
    } else {
        (NOT_CONVERGED, Some("iteration did not converge".into()))
    }
}

fn solve_local(args: &LocalArgs) -> Result<Report, Failure> {
    let opts = local_options(args.tol_point, args.tol_gap, args.max_iter, args.step1a)?;
    let format = args.output.format.unwrap_or(Format::Csv);
    if let Some(name) = &args.source.problem {
        let p = load_problem(name)?;
        let run = run_local(&p.field, &p.region, &p.endpoints.0, &p.endpoints.1, &opts)?;
        let (code, note) = status(run.converged);
        let text = match format {
            Format::Csv => local_table(&run.records)?,
            Format::Json => json_text(&run)?,
        };
        return Ok(Report { text, code, note });
    }
    let a = load_matrix(args.source.matrix.as_deref().unwrap_or_default())?;
    let choice = voronoi_heuristic(&a)?;
    let wopts = WilkinsonOptions { local: opts, pull_in: args.pull_in, ..Default::default() };
    let res = wilkinson_local(&a, choice.pair.0, choice.pair.1, &wopts)?;
    let (code, note) = status(res.converged);
    let text = match format {
        Format::Csv => local_table(&res.records)?,
        Format::Json => json_text(&res)?,
    };
    Ok(Report { text, code, note })
}

fn bisect_table(state: &BisectionState) -> Result<String, Failure> {
    csv_text(
        &["i", "lower", "upper", "dist"],
        state.history.iter().map(|s| vec![s.iteration.to_string(), num(s.lower), num(s.upper), num(s.dist)]),
    )
}

/// `sigma_min(A - zI)` as a planar field over the spectrum box, with the
/// heuristic pair of eigenvalues as endpoints.
fn sigma_problem(a: &ComplexMatrix) -> Result<(ScalarField, Region, Vec<f64>, Vec<f64>), Failure> {
    let spectrum = sorted_spectrum(a)?;
    let bbox = spectrum_box(&spectrum, a.norm2()?);
    let region = Region::cube(bbox.lower, bbox.upper)?;
    let (l1, l2) = voronoi_heuristic(a)?.pair;
    let sigma = SigmaMinField::new(a.clone());
    let field = ScalarField::nonsmooth(2, move |p| sigma.at(Complex64::new(p[0], p[1])));
    Ok((field, region, vec![l1.re, l1.im], vec![l2.re, l2.im]))
}

fn solve_bisect(args: &BisectArgs) -> Result<Report, Failure> {
    check_tolerances(&[("tol-point", args.tol_point), ("tol-gap", args.tol_gap)])?;
    let opts = BisectOptions {
        value_tol: args.tol_gap,
        point_tol: args.tol_point,
        max_iter: args.max_iter,
        cells: args.cells,
        ..Default::default()
    };
    let result = match (&args.source.problem, &args.source.matrix) {
        (Some(name), _) => bisect(&load_problem(name)?, args.lower, args.upper, &opts),
        (None, Some(spec)) => {
            let (field, region, a, b) = sigma_problem(&load_matrix(spec)?)?;
            bisect_field(&field, &region, &a, &b, args.lower, args.upper, &opts)
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let (state, code, note) = match result {
        Ok(state) => {
            let closed = state.upper - state.lower <= opts.value_tol;
            let note = (!closed).then(|| "bracket still wider than --tol-gap".to_string());
            (state, if closed { OK } else { NOT_CONVERGED }, note)
        }
        Err(Error::ResolutionLimit { message, state: Some(state) }) => {
            (*state, NOT_CONVERGED, Some(format!("resolution limit: {message}")))
        }
        Err(e) => return Err(e.into()),
    };
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => bisect_table(&state)?,
        Format::Json => json_text(&state)?,
    };
    Ok(Report { text, code, note })
}

fn wilkinson(args: &WilkinsonArgs) -> Result<Report, Failure> {
    let a = load_matrix(&args.source.matrix)?;
    let opts = WilkinsonOptions {
        local: local_options(args.tol_point, args.tol_gap, args.max_iter, args.step1a)?,
        pull_in: args.pull_in,
        exhaustive: args.exhaustive,
        perturbation: args.perturbation.is_some(),
    };
    let report = wilkinson_distance(&a, &opts)?;
    if let Some(path) = &args.perturbation {
        let pert = match &report.best.perturbation {
            Some(p) => p.clone(),
            // a repeated eigenvalue is already defective: E = 0
            None => levelpass::wilkinson::nearest_defective_perturbation(&a, report.best.coalescence_point)?,
        };
        std::fs::write(path, json_text(&pert)?).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    }
    let (code, note) = status(report.best.converged);
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Csv => local_table(&report.best.records)?,
        Format::Json => json_text(&report)?,
    };
    Ok(Report { text, code, note })
}

fn psgrid(args: &GridArgs) -> Result<Report, Failure> {
    let a = load_matrix(&args.source.matrix)?;
    let bbox = match &args.bbox {
        Some(b) => [b[0], b[1], b[2], b[3]],
        None => {
            let bb = spectrum_box(&sorted_spectrum(&a)?, a.norm2()?);
            [bb.lower[0], bb.lower[1], bb.upper[0], bb.upper[1]]
        }
    };
    let grid = pseudospectrum_grid(&a, bbox, args.grid[0], args.grid[1])?;
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_text(
            &["x", "y", "sigma"],
            (0..grid.ny).flat_map(|j| (0..grid.nx).map(move |i| (i, j))).map(|(i, j)| {
                let (x, y) = grid.node(i, j);
                vec![num(x), num(y), num(grid.value(i, j))]
            }),
        )?,
        Format::Json => json_text(&grid)?,
    };
    Ok(Report { text, code: OK, note: None })
}

#[derive(Serialize)]
struct Listing {
    name: String,
    kind: &'static str,
    dim: usize,
    description: String,
}

fn list_problems(args: &ListArgs) -> Result<Report, Failure> {
    let mut items: Vec<Listing> = builtin_problems()
        .into_iter()
        .map(|p| Listing {
            name: p.name.into(),
            kind: "problem",
            dim: p.field.dim(),
            description: p.description.into(),
        })
        .collect();
    for (name, description) in BUILTIN_MATRICES {
        let n = builtin_matrix(name).map(|m| m.n()).unwrap_or(0);
        items.push(Listing { name: name.into(), kind: "matrix", dim: n, description: description.into() });
    }
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_text(
            &["name", "kind", "dim", "description"],
            items.iter().map(|l| vec![l.name.clone(), l.kind.into(), l.dim.to_string(), l.description.clone()]),
        )?,
        Format::Json => json_text(&items)?,
    };
    Ok(Report { text, code: OK, note: None })
}

fn emit(report: &Report, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, &report.text).map_err(|e| input_error(format!("{}: {e}", path.display()))),
        None => {
            print!("{}", report.text);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // usage errors are input errors here; clap's own code 2 means something else
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT } else { OK });
        }
    };
    let (result, out) = match &cli.command {
        Command::SolveLocal(a) => (solve_local(a), a.output.out.as_deref()),
        Command::SolveBisect(a) => (solve_bisect(a), a.output.out.as_deref()),
        Command::Wilkinson(a) => (wilkinson(a), a.output.out.as_deref()),
        Command::Psgrid(a) => (psgrid(a), a.output.out.as_deref()),
        Command::ListProblems(a) => (list_problems(a), a.output.out.as_deref()),
    };
    let outcome = result.and_then(|r| emit(&r, out).map(|_| r));
    match outcome {
        Ok(r) => {
            if let Some(note) = &r.note {
                eprintln!("levelpass: {note}");
            }
            ExitCode::from(r.code)
        }
        Err(f) => {
            eprintln!("levelpass: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
