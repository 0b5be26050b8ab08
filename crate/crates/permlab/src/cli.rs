//! Argument parsing and verb dispatch.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use permlab_core::bounds::{
    asymptotic_trend, check_permanent_bounds_with, coefficient_bound_check, m2_ratio, BoundsOptions,
};
use permlab_core::coefficients::{coefficient_triple, pascal_table, verify_recursion_with, CoefficientKind};
use permlab_core::degree_m::{
    degree_m_bethe, degree_m_sinkhorn, BetheRoute, SinkhornRoute, COEFFICIENT_POINT_LIMIT,
};
use permlab_core::flow::enumerate_flow_matrices_capped;
use permlab_core::free_energy::{
    entropy_values, minimize_bethe_with, minimize_scaled_sinkhorn, FrankWolfeOptions, FwVariant,
    DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use permlab_core::permanent::perm_exact;
use permlab_core::rational::{fraction_string, int};
use permlab_core::{FlowMatrix, RationalMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::format::{gamma_to_flow, parse_rational, read_matrix, to_csv, MatrixJson};
use crate::memo::SharedMemo;
use crate::report::*;

#[derive(Debug, Parser)]
#[command(
    name = "permlab",
    version,
    about = "Permanents, Bethe and Sinkhorn approximations, and their degree-M counterparts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact permanent.
    Perm(Io),
    /// Bethe permanent by Frank-Wolfe minimization of the Bethe free energy.
    Bethe(BetheArgs),
    /// Scaled Sinkhorn permanent by matrix scaling.
    Sinkhorn(SolverArgs),
    /// Degree-M Bethe and scaled Sinkhorn permanents.
    #[command(name = "degree-m")]
    DegreeM(DegreeMArgs),
    /// C_M, C_B,M and C_scS,M at every point of the lattice.
    Coeffs(CoeffsArgs),
    /// Exact check of the coefficient recursions in M.
    #[command(name = "recursion-check")]
    RecursionCheck(RecursionArgs),
    /// Exact check of the permanent or coefficient inequalities.
    Bounds(BoundsArgs),
    /// perm_B,2 ratio via the coefficient expansion and via cycle counts.
    M2(Io),
    /// The n = 2 coefficient triangle.
    Pascal(PascalArgs),
    /// Entropies at a lattice point, or the binomial entropy trend.
    Entropy(EntropyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Io {
    /// Matrix JSON file; stdin when omitted or `-`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: u64,
    /// Include the per-iteration objective or residual trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Pairwise,
    AwayStep,
    LineSearch,
    Vanilla,
}

#[derive(Debug, Clone, Args)]
pub struct BetheArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = VariantArg::Pairwise)]
    pub variant: VariantArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DegreeKindArg {
    Bethe,
    Sinkhorn,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Coefficients,
    Enumerate,
    Sample,
    Kronecker,
}

#[derive(Debug, Clone, Args)]
pub struct DegreeMArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long = "M")]
    pub m: u32,
    #[arg(long, value_enum, default_value_t = DegreeKindArg::Both)]
    pub kind: DegreeKindArg,
    /// Bethe: coefficients (default), enumerate or sample.
    /// Sinkhorn: kronecker (default) or coefficients.
    #[arg(long, value_enum)]
    pub route: Option<RouteArg>,
    /// Random liftings drawn by the sample route.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Seed for the sample route.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "M")]
    pub m: u32,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Gibbs,
    Bethe,
    Sinkhorn,
    All,
}

impl KindArg {
    fn kinds(self) -> Vec<CoefficientKind> {
        match self {
            Self::Gibbs => vec![CoefficientKind::Gibbs],
            Self::Bethe => vec![CoefficientKind::Bethe],
            Self::Sinkhorn => vec![CoefficientKind::Sinkhorn],
            Self::All => CoefficientKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RecursionArgs {
    /// Sweep all of the lattice for this n instead of reading a point.
    #[arg(long)]
    pub n: Option<usize>,
    /// Required with --n; with a matrix input it defaults to the least
    /// common denominator of its entries.
    #[arg(long = "M")]
    pub m: Option<u32>,
    #[arg(long, value_enum, default_value_t = KindArg::All)]
    pub kind: KindArg,
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long = "M")]
    pub m: u32,
    /// Check the coefficient inequalities over the lattice for --n.
    #[arg(long, requires = "n", conflicts_with = "random")]
    pub coefficients: bool,
    /// Check this many random positive matrices of side --n.
    #[arg(long, requires = "n", requires = "seed")]
    pub random: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for --random.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also minimize the Bethe and scaled Sinkhorn free energies.
    #[arg(long)]
    pub analytic: bool,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PascalKindArg {
    Gibbs,
    Bethe,
    Sinkhorn,
}

impl From<PascalKindArg> for CoefficientKind {
    fn from(k: PascalKindArg) -> Self {
        match k {
            PascalKindArg::Gibbs => Self::Gibbs,
            PascalKindArg::Bethe => Self::Bethe,
            PascalKindArg::Sinkhorn => Self::Sinkhorn,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PascalArgs {
    #[arg(long, value_enum)]
    pub kind: PascalKindArg,
    #[arg(long = "max-m")]
    pub max_m: u32,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub io: Io,
    /// Lattice scale of the input point; defaults to the least common
    /// denominator of its entries.
    #[arg(long = "M", conflicts_with = "fraction")]
    pub m: Option<u32>,
    /// Tabulate h(k/M) against (1/M)·log C(M, k) for k = fraction·M.
    #[arg(long, requires = "m_list")]
    pub fraction: Option<String>,
    #[arg(long = "m-list", value_delimiter = ',', requires = "fraction")]
    pub m_list: Vec<u32>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    pub format: FormatArg,
}

/// Runs one invocation and returns the process exit status. Results go to
/// `stdout` (or `--output`); errors are always reported on `stdout` as an
/// `{"error": …}` envelope.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::command()
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            return report_error(&CliError::Usage(e.render().to_string()), stdout);
        }
    };
    if let Err(msg) = crate::threads::init_from_env() {
        return report_error(&CliError::Usage(msg), stdout);
    }
    match execute(&cli.command, stdin) {
        Ok((bytes, None)) => match stdout.write_all(&bytes) {
            Ok(()) => 0,
            Err(source) => report_error(
                &CliError::Io {
                    path: "<stdout>".into(),
                    source,
                },
                stdout,
            ),
        },
        Ok((bytes, Some(path))) => match std::fs::write(&path, &bytes) {
            Ok(()) => 0,
            Err(source) => report_error(&CliError::Io { path, source }, stdout),
        },
        Err(e) => report_error(&e, stdout),
    }
}

fn report_error(e: &CliError, stdout: &mut dyn Write) -> u8 {
    let _ = stdout.write_all(&json_line(&e.envelope()));
    e.exit_code()
}

fn json_line<S: Serialize + ?Sized>(value: &S) -> Vec<u8> {
    let mut bytes = serde_json::to_vec(value).expect("report types always serialize");
    bytes.push(b'\n');
    bytes
}

fn encode<J: Serialize, C: Serialize>(format: FormatArg, json: &J, rows: &[C]) -> Result<Vec<u8>> {
    match format {
        FormatArg::Json => Ok(json_line(json)),
        FormatArg::Csv => to_csv(rows),
    }
}

type Output = (Vec<u8>, Option<PathBuf>);

fn execute(command: &Command, stdin: &mut dyn Read) -> Result<Output> {
    match command {
        Command::Perm(io) => {
            let theta = read(io, stdin)?;
            let out = PermOutput {
                perm: fraction_string(&perm_exact(&theta)),
            };
            Ok((json_line(&out), io.output.clone()))
        }
        Command::Bethe(args) => bethe(args, stdin),
        Command::Sinkhorn(args) => sinkhorn(args, stdin),
        Command::DegreeM(args) => degree_m(args, stdin),
        Command::Coeffs(args) => coeffs(args),
        Command::RecursionCheck(args) => recursion_check(args, stdin),
        Command::Bounds(args) => bounds(args, stdin),
        Command::M2(io) => {
            let theta = read(io, stdin)?;
            let out = M2Output::from(&m2_ratio(&theta)?);
            Ok((json_line(&out), io.output.clone()))
        }
        Command::Pascal(args) => {
            let rows: Vec<PascalRow> = pascal_table(args.kind.into(), args.max_m)
                .iter()
                .map(PascalRow::from)
                .collect();
            let json = PascalOutput {
                kind: CoefficientKind::from(args.kind).name(),
                rows,
            };
            Ok((encode(args.format, &json, &json.rows)?, args.output.clone()))
        }
        Command::Entropy(args) => entropy(args, stdin),
    }
}

fn read(io: &Io, stdin: &mut dyn Read) -> Result<RationalMatrix> {
    read_matrix(io.input.as_deref(), stdin)
}

fn bethe(args: &BetheArgs, stdin: &mut dyn Read) -> Result<Output> {
    let s = &args.solver;
    let theta = read(&s.io, stdin)?;
    let options = FrankWolfeOptions {
        tol: s.tol,
        max_iter: s.max_iter,
        variant: match args.variant {
            VariantArg::Pairwise => FwVariant::Pairwise,
            VariantArg::AwayStep => FwVariant::AwayStep,
            VariantArg::LineSearch => FwVariant::LineSearch,
            VariantArg::Vanilla => FwVariant::Vanilla,
        },
        ..FrankWolfeOptions::default()
    };
    let report = minimize_bethe_with(&theta, &options)?;
    let out = BetheOutput::new(&report, s.trace);
    if !report.converged {
        return Err(no_convergence(
            "Frank-Wolfe",
            report.iterations,
            "duality gap",
            report.gap_or_residual,
            &out,
        ));
    }
    Ok((json_line(&out), s.io.output.clone()))
}

fn sinkhorn(args: &SolverArgs, stdin: &mut dyn Read) -> Result<Output> {
    let theta = read(&args.io, stdin)?;
    let report = minimize_scaled_sinkhorn(&theta, args.tol, args.max_iter)?;
    let out = SinkhornOutput::new(&report, args.trace);
    if !report.converged {
        return Err(no_convergence(
            "Sinkhorn scaling",
            report.iterations,
            "residual",
            report.gap_or_residual,
            &out,
        ));
    }
    Ok((json_line(&out), args.io.output.clone()))
}

fn no_convergence<S: Serialize>(what: &str, iterations: u64, measure: &str, value: f64, out: &S) -> CliError {
    CliError::NoConvergence {
        message: format!("{what} stopped after {iterations} iterations with {measure} {value:e}"),
        report: serde_json::to_value(out).expect("report types always serialize"),
    }
}

fn degree_m(args: &DegreeMArgs, stdin: &mut dyn Read) -> Result<Output> {
    let want_bethe = args.kind != DegreeKindArg::Sinkhorn;
    let want_sinkhorn = args.kind != DegreeKindArg::Bethe;
    let bethe_route = match args.route {
        None | Some(RouteArg::Coefficients) | Some(RouteArg::Kronecker) => BetheRoute::Coefficients,
        Some(RouteArg::Enumerate) => BetheRoute::Enumerate,
        Some(RouteArg::Sample) => BetheRoute::Sample {
            samples: args.samples,
            seed: args
                .seed
                .ok_or_else(|| CliError::Usage("the sample route needs an explicit --seed".into()))?,
        },
    };
    let sinkhorn_route = match args.route {
        Some(RouteArg::Coefficients) => SinkhornRoute::Coefficients,
        _ => SinkhornRoute::Kronecker,
    };
    let mismatch =
        |route: &str, kind: &str| CliError::Usage(format!("route {route} does not apply to --kind {kind}"));
    match (args.kind, args.route) {
        (DegreeKindArg::Bethe, Some(RouteArg::Kronecker)) => return Err(mismatch("kronecker", "bethe")),
        (DegreeKindArg::Sinkhorn, Some(RouteArg::Enumerate)) => {
            return Err(mismatch("enumerate", "sinkhorn"))
        }
        (DegreeKindArg::Sinkhorn, Some(RouteArg::Sample)) => return Err(mismatch("sample", "sinkhorn")),
        _ => {}
    }

    let theta = read(&args.io, stdin)?;
    let bethe = if want_bethe {
        let name = match bethe_route {
            BetheRoute::Coefficients => "coefficients",
            BetheRoute::Enumerate => "enumerate",
            BetheRoute::Sample { .. } => "sample",
        };
        Some(RouteValue::new(
            name,
            &degree_m_bethe(&theta, args.m, bethe_route)?,
        ))
    } else {
        None
    };
    let sinkhorn = if want_sinkhorn {
        let name = match sinkhorn_route {
            SinkhornRoute::Coefficients => "coefficients",
            SinkhornRoute::Kronecker => "kronecker",
        };
        Some(RouteValue::new(
            name,
            &degree_m_sinkhorn(&theta, args.m, sinkhorn_route)?,
        ))
    } else {
        None
    };
    let out = DegreeMOutput {
        m: args.m,
        bethe,
        sinkhorn,
    };
    Ok((json_line(&out), args.io.output.clone()))
}

fn lattice(n: usize, m: u32) -> Result<Vec<FlowMatrix>> {
    if n == 0 || m == 0 {
        return Err(CliError::Usage("--n and --M must be positive".into()));
    }
    Ok(enumerate_flow_matrices_capped(
        n,
        m,
        None,
        COEFFICIENT_POINT_LIMIT,
    )?)
}

fn coeffs(args: &CoeffsArgs) -> Result<Output> {
    let points = lattice(args.n, args.m)?;
    let memo = SharedMemo::new();
    let triples: Vec<_> = points.par_iter().map(|t| coefficient_triple(t, &memo)).collect();
    let bytes = match args.format {
        FormatArg::Json => json_line(&CoefficientsOutput {
            n: args.n,
            m: args.m,
            points: triples.iter().map(CoefficientRow::from).collect(),
        }),
        FormatArg::Csv => {
            let rows: Vec<_> = triples
                .iter()
                .enumerate()
                .map(|(i, c)| CoefficientCsvRow::new(i, c))
                .collect();
            to_csv(&rows)?
        }
    };
    Ok((bytes, args.output.clone()))
}

fn recursion_check(args: &RecursionArgs, stdin: &mut dyn Read) -> Result<Output> {
    let (n, m, points) = match args.n {
        Some(n) => {
            if args.io.input.is_some() {
                return Err(CliError::Usage(
                    "--n sweeps the lattice and cannot be combined with --input".into(),
                ));
            }
            let m = args.m.ok_or_else(|| CliError::Usage("--n needs --M".into()))?;
            (n, m, lattice(n, m)?)
        }
        None => {
            let t = gamma_to_flow(&read(&args.io, stdin)?, args.m)?;
            (t.n(), t.m(), vec![t])
        }
    };
    if m < 2 {
        return Err(CliError::Usage("recursions need M >= 2".into()));
    }
    let kinds = args.kind.kinds();
    let memo = SharedMemo::new();
    let tasks: Vec<_> = points
        .iter()
        .flat_map(|t| kinds.iter().map(move |&k| (k, t)))
        .collect();
    let checks = tasks
        .par_iter()
        .map(|&(kind, t)| {
            verify_recursion_with(kind, t, &memo)
                .map(|c| RecursionRow::new(kind.name(), t, &c.lhs, &c.rhs, c.holds))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let out = RecursionOutput {
        n,
        m,
        checked: checks.len(),
        all_hold: checks.iter().all(|c| c.holds),
        checks,
    };
    Ok((json_line(&out), args.io.output.clone()))
}

fn bounds(args: &BoundsArgs, stdin: &mut dyn Read) -> Result<Output> {
    let options = BoundsOptions {
        analytic: args.analytic,
        tol: args.tol,
        max_iter: args.max_iter,
    };
    let output = args.io.output.clone();
    if args.coefficients {
        let n = args.n.expect("clap enforces --n");
        let points = lattice(n, args.m)?;
        let memo = SharedMemo::new();
        let results: Vec<_> = points
            .par_iter()
            .map(|t| coefficient_bound_check(t, &memo))
            .collect();
        return Ok((
            json_line(&CoefficientSweepOutput::new(n, args.m, &results)),
            output,
        ));
    }
    if let Some(count) = args.random {
        let n = args.n.expect("clap enforces --n");
        let seed = args.seed.expect("clap enforces --seed");
        return random_bounds(n, args.m, count, seed, &options).map(|b| (b, output));
    }
    if args.n.is_some() {
        return Err(CliError::Usage(
            "--n only applies with --coefficients or --random".into(),
        ));
    }
    let theta = read(&args.io, stdin)?;
    let report = check_permanent_bounds_with(&theta, args.m, &options)?;
    Ok((json_line(&BoundsOutput::from(&report)), output))
}

/// Entries are drawn uniformly from `1..=9`; the bounds are scale-free, so
/// integers lose nothing.
fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> RationalMatrix {
    let entries = (0..n * n).map(|_| int(rng.gen_range(1..=9))).collect();
    RationalMatrix::new(n, entries).expect("positive entries form a valid matrix")
}

fn random_bounds(n: usize, m: u32, count: usize, seed: u64, options: &BoundsOptions) -> Result<Vec<u8>> {
    if n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrices: Vec<_> = (0..count).map(|_| random_matrix(n, &mut rng)).collect();
    let reports = matrices
        .par_iter()
        .map(|theta| check_permanent_bounds_with(theta, m, options))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&permlab_core::bounds::BoundsReport) -> f64| {
        reports.iter().map(pick).fold(init, f)
    };
    let out = RandomSweepOutput {
        n,
        m,
        seed,
        matrices: count,
        all_hold: reports.iter().all(|r| r.all_hold()),
        max_ratio_bethe: fold(f64::max, f64::NEG_INFINITY, |r| r.ratio_bethe),
        max_ratio_sinkhorn: fold(f64::max, f64::NEG_INFINITY, |r| r.ratio_sinkhorn),
        min_ratio_sinkhorn: fold(f64::min, f64::INFINITY, |r| r.ratio_sinkhorn),
        entries: reports
            .iter()
            .map(|r| SweepEntry {
                theta: MatrixJson::from(&r.theta),
                ratio_bethe: r.ratio_bethe,
                ratio_sinkhorn: r.ratio_sinkhorn,
                all_hold: r.all_hold(),
            })
            .collect(),
    };
    Ok(json_line(&out))
}

fn entropy(args: &EntropyArgs, stdin: &mut dyn Read) -> Result<Output> {
    let output = args.io.output.clone();
    if let Some(fraction) = &args.fraction {
        let q = parse_rational(fraction)?;
        let rows: Vec<TrendRowJson> = asymptotic_trend(&q, &args.m_list)?
            .iter()
            .map(TrendRowJson::from)
            .collect();
        let json = TrendOutput {
            fraction: fraction_string(&q),
            rows,
        };
        return Ok((encode(args.format, &json, &json.rows)?, output));
    }
    if args.format == FormatArg::Csv {
        return Err(CliError::Usage(
            "CSV output is only available with --fraction".into(),
        ));
    }
    let t = gamma_to_flow(&read(&args.io, stdin)?, args.m)?;
    let out = EntropyOutput::new(&t, &entropy_values(&t)?);
    Ok((json_line(&out), output))
}

/// Convenience wrapper used by tests: runs with an in-memory stdin and
/// returns the exit status with everything written to stdout.
pub fn run_captured<I, T>(args: I, stdin: &str) -> (u8, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = Vec::new();
    let code = run(args, &mut stdin.as_bytes(), &mut out);
    (code, String::from_utf8(out).expect("output is UTF-8"))
}
