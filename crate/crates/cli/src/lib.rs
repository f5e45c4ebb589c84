//! `lpvol` command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage and range errors, 1 when a
//! computation fails or `verify` finds a violated bound.

mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use lpvol::analysis::{
    critical_exponents, crossover_scan, verify_lemma_bounds, GridSpec, LemmaId, RootConfig, MARGIN_TOLERANCE,
};
use lpvol::kernels::{delta_kernel_result, gamma_kernel_result, kernel_config, KernelKind};
use lpvol::montecarlo::{mc_projection, mc_section, McConfig};
use lpvol::volumes::{diagonal_scan, projection_volume, section_volume, Direction, Method, VolumeConfig};
use lpvol::Error;

pub use output::{Cell, Format, Report, Table};

#[derive(Debug, Parser)]
#[command(name = "lpvol", version, about = "Section and projection volumes of l_p balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value = "table", global = true)]
    format: Format,

    /// Write results to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized central section volume A_{n,p}(a).
    Section(SectionArgs),
    /// Normalized projection volume P_{n,q}(a).
    Projection(ProjectionArgs),
    /// Fourier kernel gamma_p(s) (with --p) or delta_q(s) (with --q).
    Kernel(KernelArgs),
    /// Critical exponents p0, p1 and q1.
    Roots,
    /// Check every tabulated constant on its grid; exits 1 on a violation.
    Verify,
    /// Dimensions where a^(n) overtakes a^(2).
    Crossover(CrossoverArgs),
    /// Monte Carlo estimate next to the quadrature value.
    Oracle(OracleArgs),
    /// Volumes of every diagonal a^(k) in a fixed dimension.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
struct DirArgs {
    /// Dimension; implied by a `vec:` direction.
    #[arg(long)]
    n: Option<usize>,

    /// `diag:k` or `vec:v1,v2,...`
    #[arg(long)]
    dir: String,

    /// Outer quadrature tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Args)]
struct SectionArgs {
    #[arg(long)]
    p: f64,
    #[command(flatten)]
    dir: DirArgs,
}

#[derive(Debug, Args)]
struct ProjectionArgs {
    #[arg(long)]
    q: f64,
    #[command(flatten)]
    dir: DirArgs,
}

#[derive(Debug, Args)]
#[group(id = "index", required = true, multiple = false, args = ["p", "q"])]
struct IndexArgs {
    /// Section exponent.
    #[arg(long)]
    p: Option<f64>,
    /// Projection index.
    #[arg(long)]
    q: Option<f64>,
}

impl IndexArgs {
    fn kind(&self) -> (KernelKind, f64) {
        match (self.p, self.q) {
            (Some(p), _) => (KernelKind::Section, p),
            (None, Some(q)) => (KernelKind::Projection, q),
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[command(flatten)]
    index: IndexArgs,
    /// Frequency.
    #[arg(long, allow_negative_numbers = true)]
    s: f64,
}

#[derive(Debug, Args)]
struct CrossoverArgs {
    #[command(flatten)]
    index: IndexArgs,
    #[arg(long, default_value_t = 400)]
    n_max: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    index: IndexArgs,
    #[command(flatten)]
    dir: DirArgs,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = McConfig::default().seed)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    index: IndexArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

/// Failure classes that map onto exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Parses `diag:k` or `vec:v1,...`. Explicit vectors within 1e-6 of unit
/// norm are rescaled; anything further off is rejected.
pub fn parse_direction(spec: &str, n: Option<usize>) -> Result<Direction, String> {
    let (tag, body) = spec.split_once(':').ok_or_else(|| format!("direction `{spec}`: expected diag:k or vec:v1,..."))?;
    match tag {
        "diag" => {
            let k: usize = body.trim().parse().map_err(|_| format!("direction `{spec}`: bad index"))?;
            let n = n.ok_or("--n is required with a diag: direction")?;
            Direction::diag(n, k).map_err(|e| e.to_string())
        }
        "vec" => {
            let coords = body
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|_| format!("direction `{spec}`: bad coordinate"))?;
            if let Some(n) = n {
                if n != coords.len() {
                    return Err(format!("--n {n} disagrees with {} coordinates", coords.len()));
                }
            }
            let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
            if !((norm - 1.0).abs() <= 1e-6) {
                return Err(format!("direction `{spec}` has norm {norm}, not 1"));
            }
            Direction::normalized(coords).map_err(|e| e.to_string())
        }
        _ => Err(format!("direction `{spec}`: unknown form `{tag}`")),
    }
}

fn direction(args: &DirArgs) -> Result<Direction, Failure> {
    parse_direction(&args.dir, args.n).map_err(Failure::Usage)
}

fn volume_config(tol: f64) -> Result<VolumeConfig, Failure> {
    if !(tol.is_finite() && tol > 0.0 && tol < 1.0) {
        return Err(usage(format!("--tol {tol} must lie in (0, 1)")));
    }
    let cfg = VolumeConfig::with_tolerance(tol);
    cfg.validate()?;
    Ok(cfg)
}

fn check_p(p: f64) -> Result<(), Failure> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--p {p} must be a finite value >= 1")))
    }
}

fn check_q(q: f64) -> Result<(), Failure> {
    if q > 1.0 && q <= 2.0 {
        Ok(())
    } else {
        Err(usage(format!("--q {q} must lie in (1, 2]")))
    }
}

fn check_index(kind: KernelKind, x: f64) -> Result<(), Failure> {
    match kind {
        KernelKind::Section => check_p(x),
        KernelKind::Projection => check_q(x),
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Quadrature => "quadrature",
        Method::ClosedForm => "closed_form",
        Method::MonteCarlo => "monte_carlo",
    }
}

fn kind_name(kind: KernelKind) -> &'static str {
    match kind {
        KernelKind::Section => "section",
        KernelKind::Projection => "projection",
    }
}

fn index_key(kind: KernelKind) -> &'static str {
    match kind {
        KernelKind::Section => "p",
        KernelKind::Projection => "q",
    }
}

fn volume(kind: KernelKind, x: f64, args: &DirArgs) -> Result<Report, Failure> {
    check_index(kind, x)?;
    let a = direction(args)?;
    let cfg = volume_config(args.tol)?;
    let v = match kind {
        KernelKind::Section => section_volume(x, &a, &cfg)?,
        KernelKind::Projection => projection_volume(x, &a, &cfg)?,
    };
    Ok(Report::new(kind_name(kind), v.value, v.err_estimate, method_name(v.method))
        .param("n", a.n())
        .param(index_key(kind), x)
        .param("dir", args.dir.as_str())
        .param("tol", args.tol))
}

fn kernel(args: &KernelArgs) -> Result<Report, Failure> {
    let (kind, x) = args.index.kind();
    check_index(kind, x)?;
    if !args.s.is_finite() {
        return Err(usage("--s must be finite"));
    }
    let cfg = kernel_config();
    let (name, r) = match kind {
        KernelKind::Section => ("gamma", gamma_kernel_result(x, args.s, &cfg)?),
        KernelKind::Projection => ("delta", delta_kernel_result(x, args.s, &cfg)?),
    };
    Ok(Report::new("kernel", r.value, r.err_estimate, "quadrature")
        .param("kernel", name)
        .param(index_key(kind), x)
        .param("s", args.s)
        .extra("evals", r.evals))
}

fn roots() -> Result<Report, Failure> {
    let c = critical_exponents(&RootConfig::default())?;
    let width = RootConfig::default().width;
    let table = Table {
        columns: vec!["name", "value", "residual", "bracket_lo", "bracket_hi"],
        rows: [
            ("p0", c.p0),
            ("p1_section", c.p1_section),
            ("q1_projection", c.q1_projection),
            ("f_min_location", c.f_min_location),
        ]
        .into_iter()
        .map(|(name, r)| vec![name.into(), r.value.into(), r.residual.into(), r.bracket[0].into(), r.bracket[1].into()])
        .collect(),
    };
    Ok(Report::new("roots", c.p0.value, width, "bisection")
        .param("width", width)
        .extra("p0", c.p0.value)
        .extra("p1_section", c.p1_section.value)
        .extra("q1_projection", c.q1_projection.value)
        .extra("f_min_location", c.f_min_location.value)
        .table(table))
}

fn verify() -> Result<(Report, bool), Failure> {
    let spec = GridSpec::default();
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    let mut all = true;
    for id in LemmaId::ALL {
        let r = verify_lemma_bounds(id, &spec)?;
        worst = worst.min(r.worst_margin);
        all &= r.pass;
        rows.push(vec![
            id.name().into(),
            r.grid.len().into(),
            r.worst_margin.into(),
            r.worst_point.index.into(),
            r.worst_point.s.into(),
            r.pass.into(),
        ]);
    }
    let table = Table {
        columns: vec!["lemma", "points", "worst_margin", "worst_index", "worst_s", "pass"],
        rows,
    };
    let report = Report::new("verify", worst, Cell::Null, "grid")
        .param("density", spec.density)
        .param("margin_tolerance", MARGIN_TOLERANCE)
        .extra("pass", all)
        .table(table);
    Ok((report, all))
}

fn crossover(args: &CrossoverArgs) -> Result<Report, Failure> {
    let (kind, x) = args.index.kind();
    check_index(kind, x)?;
    let cfg = volume_config(args.tol)?;
    let r = crossover_scan(kind, x, args.n_max, &cfg)?;
    let worst_err = r.rows.iter().map(|row| row.err).fold(0.0, f64::max);
    let table = Table {
        columns: vec!["n", "diagonal", "a2", "margin", "err", "holds"],
        rows: r
            .rows
            .iter()
            .map(|row| vec![row.n.into(), row.diagonal.into(), row.a2.into(), row.margin.into(), row.err.into(), row.holds.into()])
            .collect(),
    };
    Ok(Report::new("crossover", r.n_empirical, worst_err, "quadrature")
        .param("kind", kind_name(kind))
        .param(index_key(kind), x)
        .param("n_max", args.n_max)
        .extra("n_empirical", r.n_empirical)
        .extra("n_theorem", r.n_theorem)
        .extra("verified_beyond_threshold", r.verified_beyond_threshold)
        .table(table))
}

fn oracle(args: &OracleArgs) -> Result<Report, Failure> {
    let (kind, x) = args.index.kind();
    check_index(kind, x)?;
    let a = direction(&args.dir)?;
    let cfg = volume_config(args.dir.tol)?;
    let mc = McConfig {
        samples: args.samples,
        seed: args.seed,
        ..McConfig::default()
    };
    mc.validate()?;
    let (quad, est) = match kind {
        KernelKind::Section => (section_volume(x, &a, &cfg)?, mc_section(x, &a, &mc)?),
        KernelKind::Projection => (projection_volume(x, &a, &cfg)?, mc_projection(x, &a, &mc)?),
    };
    let combined = (quad.err_estimate.powi(2) + est.std_error.powi(2)).sqrt();
    let z = (est.mean - quad.value).abs() / combined;
    Ok(Report::new("oracle", est.mean, est.std_error, "monte_carlo")
        .param("kind", kind_name(kind))
        .param("n", a.n())
        .param(index_key(kind), x)
        .param("dir", args.dir.dir.as_str())
        .param("samples", args.samples)
        .param("seed", Cell::Text(args.seed.to_string()))
        .extra("quadrature", quad.value)
        .extra("quadrature_err", quad.err_estimate)
        .extra("z", z)
        .extra("agree", z <= 3.0))
}

fn scan(args: &ScanArgs) -> Result<Report, Failure> {
    let (kind, x) = args.index.kind();
    check_index(kind, x)?;
    if args.n < 2 {
        return Err(usage(format!("--n {} must be >= 2", args.n)));
    }
    let cfg = volume_config(args.tol)?;
    let s = diagonal_scan(kind, args.n, x, &cfg)?;
    let best = s.rows.iter().find(|(k, _)| *k == s.best_k).map(|(_, v)| *v);
    let table = Table {
        columns: vec!["k", "value", "err_estimate", "method"],
        rows: s
            .rows
            .iter()
            .map(|(k, v)| vec![(*k).into(), v.value.into(), v.err_estimate.into(), method_name(v.method).into()])
            .collect(),
    };
    Ok(Report::new("scan", best.map(|v| v.value), best.map(|v| v.err_estimate), "quadrature")
        .param("kind", kind_name(kind))
        .param("n", args.n)
        .param(index_key(kind), x)
        .extra("best_k", s.best_k)
        .extra("ambiguous", s.ambiguous)
        .table(table))
}

/// Rejects an `--out` whose parent directory does not exist before any
/// work is done.
fn check_out(path: &Path) -> Result<(), Failure> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(usage(format!("output directory {} does not exist", parent.display())));
    }
    if path.is_dir() {
        return Err(usage(format!("output path {} is a directory", path.display())));
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(Report, bool), Failure> {
    let report = match &cli.command {
        Command::Section(a) => volume(KernelKind::Section, a.p, &a.dir)?,
        Command::Projection(a) => volume(KernelKind::Projection, a.q, &a.dir)?,
        Command::Kernel(a) => kernel(a)?,
        Command::Roots => roots()?,
        Command::Verify => return verify(),
        Command::Crossover(a) => crossover(a)?,
        Command::Oracle(a) => oracle(a)?,
        Command::Scan(a) => scan(a)?,
    };
    Ok((report, true))
}

fn emit(cli: &Cli, report: &Report, out: &mut dyn Write) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Compute(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            report.write(cli.format, &mut w)?;
            w.flush()?;
        }
        None => report.write(cli.format, out)?,
    }
    Ok(())
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                2
            } else {
                let _ = write!(out, "{e}");
                0
            };
            return code;
        }
    };
    let result = cli
        .out
        .as_deref()
        .map_or(Ok(()), check_out)
        .and_then(|()| dispatch(&cli))
        .and_then(|(report, ok)| emit(&cli, &report, out).map(|()| ok));
    match result {
        Ok(true) => 0,
        Ok(false) => {
            let _ = writeln!(err, "error: a tabulated bound is violated");
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Compute(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}
