mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rmtk::ensembles_mc::default_eta;
use rmtk::superint::{self, b_closed, b_quadrature, c_goe, c_goe_by_recursion, c_goe_from_omega, kernel_superint};
use rmtk::verify::{self, default_closure_n, Report};
use rmtk::{
    eigen_histogram, kernel, kernel_mc_many, level_density, pair_density_mc, r_k_goe, r_k_gse, r_k_gue, Beta,
    EnergyTuple, EnsembleSpec, Error, Grid, MCConfig, QuadratureSpec,
};

use table::{Cell, Format, Table};

const EXIT_FAILED_CHECKS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "rmtk", version, about = "Gaussian ensemble kernels, correlation functions and their verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kernel K_N(x_p, x_q) by one of three routes.
    Kernel(KernelArgs),
    /// k-point correlation functions R_k.
    Corr(CorrArgs),
    /// Analytic level density on a grid.
    Density(DensityArgs),
    /// Eigenvalue histogram of sampled matrices next to the analytic density.
    Histogram(DensityArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Integration constants c_N, b_N and omega_1(0), closed form vs numeric.
    Constants(ConstantsArgs),
}

#[derive(Args, Debug, Clone)]
struct EnsembleArgs {
    /// Dyson index: 1 (GOE), 2 (GUE) or 4 (GSE).
    #[arg(long, default_value_t = 2)]
    beta: u32,
    /// Level number (Kramers doublets for beta = 4).
    #[arg(long, default_value_t = 4)]
    n: usize,
}

impl EnsembleArgs {
    fn spec(&self) -> rmtk::Result<EnsembleSpec> {
        EnsembleSpec::from_index(self.beta, self.n)
    }
}

#[derive(Args, Debug, Clone)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Imaginary increment; default is 0.05 local level spacings.
    #[arg(long)]
    eta: Option<f64>,
    /// Worker threads; RMTK_THREADS takes precedence.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Use the single-η estimator instead of the η, η/2 combination.
    #[arg(long)]
    no_eta_extrapolation: bool,
}

impl McArgs {
    fn config(&self, ens: EnsembleSpec) -> rmtk::Result<MCConfig> {
        let workers = match std::env::var("RMTK_THREADS") {
            Ok(v) => v.trim().parse().map_err(|_| Error::invalid(format!("RMTK_THREADS='{v}' is not a count")))?,
            Err(_) => self.workers,
        };
        let cfg = MCConfig {
            ensemble: ens,
            samples: self.samples,
            seed: self.seed,
            eta: self.eta,
            workers,
            eta_extrapolation: !self.no_eta_extrapolation,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone)]
struct QuadArgs {
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    rel_tol: f64,
}

impl QuadArgs {
    fn spec(&self) -> rmtk::Result<QuadratureSpec> {
        let s = QuadratureSpec::with_tolerance(self.abs_tol, self.rel_tol);
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to FILE instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Analytic,
    Mc,
    Superint,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// First arguments, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    xp: Vec<f64>,
    /// Second arguments, paired with --xp.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    xq: Vec<f64>,
    /// All off-diagonal pairs of grid points, lo:hi:step.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<Grid>,
    #[arg(long, value_enum, default_value_t = Method::Analytic)]
    method: Method,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CorrArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// One energy tuple per occurrence, comma separated.
    #[arg(long = "points", allow_hyphen_values = true, required = true)]
    points: Vec<String>,
    /// analytic, or mc for k = 2 pair-count estimates.
    #[arg(long, value_enum, default_value_t = Method::Analytic)]
    method: Method,
    /// Half-width of the counting cells for --method mc.
    #[arg(long, default_value_t = 0.05)]
    half_width: f64,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    /// Grid lo:hi:step.
    #[arg(long, allow_hyphen_values = true, default_value = "-4:4:0.1")]
    grid: Grid,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Mc,
    Superint,
    Constants,
    Recursions,
    Identities,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Restrict to one ensemble (all three by default).
    #[arg(long)]
    beta: Option<u32>,
    /// Restrict to one level number.
    #[arg(long)]
    n: Option<usize>,
    /// Largest N for the recursion suite.
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    quad: QuadArgs,
    /// Report format; json unless csv is asked for.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    /// Largest N listed.
    #[arg(long, default_value_t = 7)]
    n_max: usize,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DegenerateArguments { .. } => EXIT_DEGENERATE,
        Error::InvalidInput(_) | Error::InsufficientSamples { .. } => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(table: &Table, output: &OutputArgs) -> io::Result<()> {
    let mut w = open_output(&output.out)?;
    table.write(output.format, &mut w)?;
    w.flush()
}

fn kernel_points(args: &KernelArgs) -> rmtk::Result<Vec<(f64, f64)>> {
    if let Some(grid) = &args.grid {
        if !args.xp.is_empty() || !args.xq.is_empty() {
            return Err(Error::invalid("use either --grid or --xp/--xq"));
        }
        let g = grid.points();
        return Ok(g.iter().flat_map(|&x| g.iter().filter(move |&&y| y != x).map(move |&y| (x, y))).collect());
    }
    if args.xp.is_empty() || args.xp.len() != args.xq.len() {
        return Err(Error::invalid("--xp and --xq need the same, nonzero number of values"));
    }
    Ok(args.xp.iter().copied().zip(args.xq.iter().copied()).collect())
}

fn cmd_kernel(args: &KernelArgs) -> rmtk::Result<Table> {
    let ens = args.ensemble.spec()?;
    let points = kernel_points(args)?;
    let mut t = Table::new("kernel", &["beta", "N", "x_p", "x_q", "method", "value", "uncertainty"]);
    let values: Vec<(f64, f64)> = match args.method {
        Method::Analytic => points.iter().map(|&(x, y)| (kernel(ens, x, y), 0.0)).collect(),
        Method::Superint => {
            let spec = args.quad.spec()?;
            points.iter().map(|&(x, y)| Ok((kernel_superint(ens, x, y, &spec)?, 0.0))).collect::<rmtk::Result<_>>()?
        }
        Method::Mc => {
            let cfg = args.mc.config(ens)?;
            for &(x, y) in &points {
                let eta = cfg.eta.unwrap_or_else(|| default_eta(ens, x, y));
                if (x - y).abs() < 10.0 * eta {
                    eprintln!("warning: |x_p - x_q| = {:.3e} is below 10 eta = {:.3e}", (x - y).abs(), 10.0 * eta);
                }
            }
            kernel_mc_many(&cfg, &points)?.iter().map(|v| (v.value, v.uncertainty)).collect()
        }
    };
    let name = match args.method {
        Method::Analytic => "analytic",
        Method::Mc => "mc",
        Method::Superint => "superint",
    };
    for (&(x, y), &(v, u)) in points.iter().zip(&values) {
        t.push(vec![ens.beta.index().into(), ens.n.into(), x.into(), y.into(), name.into(), v.into(), u.into()]);
    }
    Ok(t)
}

fn parse_tuple(s: &str) -> rmtk::Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad energy '{p}' in '{s}'"))))
        .collect()
}

fn cmd_corr(args: &CorrArgs) -> rmtk::Result<Table> {
    let ens = args.ensemble.spec()?;
    let tuples = args.points.iter().map(|s| parse_tuple(s)).collect::<rmtk::Result<Vec<_>>>()?;
    let k = tuples[0].len();
    if tuples.iter().any(|t| t.len() != k) {
        return Err(Error::invalid("all --points tuples need the same length"));
    }
    let tuples = tuples.into_iter().map(EnergyTuple::new).collect::<rmtk::Result<Vec<_>>>()?;
    let mut cols: Vec<String> = vec!["beta".into(), "N".into(), "k".into()];
    cols.extend((1..=k).map(|i| format!("x_{i}")));
    cols.extend(["R_k".to_string(), "uncertainty".to_string()]);
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new("corr", &col_refs);
    let cfg = match args.method {
        Method::Mc => {
            if k != 2 {
                return Err(Error::invalid("--method mc supports k = 2 only"));
            }
            Some(args.mc.config(ens)?)
        }
        Method::Analytic => None,
        Method::Superint => return Err(Error::invalid("corr supports --method analytic or mc")),
    };
    for xs in &tuples {
        let (r, u) = match &cfg {
            None => {
                let r = match ens.beta {
                    Beta::Unitary => r_k_gue(ens.n, xs),
                    Beta::Orthogonal => r_k_goe(ens.n, xs)?,
                    Beta::Symplectic => r_k_gse(ens.n, xs)?,
                };
                (r, 0.0)
            }
            Some(cfg) => {
                let v = xs.values();
                let e = pair_density_mc(cfg, v[0], v[1], args.half_width)?;
                (e.value, e.stderr)
            }
        };
        let mut row: Vec<Cell> = vec![ens.beta.index().into(), ens.n.into(), k.into()];
        row.extend(xs.values().iter().map(|&x| Cell::from(x)));
        row.extend([r.into(), u.into()]);
        t.push(row);
    }
    Ok(t)
}

fn cmd_density(args: &DensityArgs) -> rmtk::Result<Table> {
    let ens = args.ensemble.spec()?;
    let mut t = Table::new("density", &["x", "analytic_density", "mass"]);
    for x in args.grid.points() {
        let rho = level_density(ens, x);
        t.push(vec![x.into(), rho.into(), (rho * args.grid.step).into()]);
    }
    Ok(t)
}

fn cmd_histogram(args: &DensityArgs) -> rmtk::Result<Table> {
    let ens = args.ensemble.spec()?;
    let cfg = args.mc.config(ens)?;
    let h = eigen_histogram(&cfg, &args.grid)?;
    let mut t = Table::new("histogram", &["x", "analytic_density", "mc_density", "mc_err", "mass"]);
    for (i, &x) in h.centers.iter().enumerate() {
        t.push(vec![
            x.into(),
            level_density(ens, x).into(),
            h.density[i].into(),
            h.stderr[i].into(),
            (h.density[i] * h.width).into(),
        ]);
    }
    t.push(vec![Cell::Text("outside".into()), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), h.outside.into()]);
    Ok(t)
}

fn ensembles_for(args: &VerifyArgs, default_n: impl Fn(Beta) -> Vec<usize>) -> rmtk::Result<Vec<EnsembleSpec>> {
    let betas = match args.beta {
        Some(b) => vec![Beta::from_index(b)?],
        None => vec![Beta::Orthogonal, Beta::Unitary, Beta::Symplectic],
    };
    let mut out = Vec::new();
    for beta in betas {
        let ns = match args.n {
            Some(n) => vec![n],
            None => default_n(beta),
        };
        for n in ns {
            out.push(EnsembleSpec::new(beta, n)?);
        }
    }
    Ok(out)
}

fn run_suite(args: &VerifyArgs, suite: Suite) -> rmtk::Result<Report> {
    let spec = args.quad.spec()?;
    Ok(match suite {
        Suite::Constants => verify::constants_suite(&spec),
        Suite::Recursions => verify::recursion_suite(args.n_max, &spec),
        Suite::Identities => verify::identity_suite(&spec),
        Suite::Superint => {
            if args.beta.is_none() && args.n.is_none() {
                verify::superint_suite(None, &spec)
            } else {
                let list = ensembles_for(args, |b| (1..=default_closure_n(b)).collect())?;
                verify::superint_suite(Some(&list), &spec)
            }
        }
        Suite::Mc => {
            let mut reports = Vec::new();
            for ens in ensembles_for(args, |_| vec![4])? {
                reports.push(verify::mc_suite(&args.mc.config(ens)?)?);
            }
            Report::combine("mc", reports)
        }
        Suite::All => {
            let parts = [Suite::Constants, Suite::Recursions, Suite::Identities, Suite::Superint, Suite::Mc];
            let reports = parts.iter().map(|&s| run_suite(args, s)).collect::<rmtk::Result<Vec<_>>>()?;
            Report::combine("all", reports)
        }
    })
}

fn cmd_verify(args: &VerifyArgs) -> rmtk::Result<(Report, Table)> {
    let report = run_suite(args, args.suite)?;
    let mut t = Table::new("verify", &["name", "expected", "got", "tol", "pass"]);
    for c in &report.checks {
        t.push(vec![c.name.clone().into(), c.expected.into(), c.got.into(), c.tol.into(), c.pass.into()]);
    }
    Ok((report, t))
}

fn cmd_constants(args: &ConstantsArgs) -> rmtk::Result<Table> {
    let spec = args.quad.spec()?;
    let plane = QuadratureSpec { abs_tol: spec.abs_tol.max(1e-10), rel_tol: spec.rel_tol.max(1e-10), ..spec.clone() };
    let mut t = Table::new("constants", &["quantity", "N", "closed_form", "numeric", "abs_diff"]);
    let mut row = |q: &str, n: usize, closed: f64, numeric: f64| {
        t.push(vec![q.into(), n.into(), closed.into(), numeric.into(), (numeric - closed).abs().into()]);
    };

    let c0 = c_goe_from_omega(0, 0.0, superint::omega_goe_finite_eta(0, 0.0, spec.eta_ladder[0], &plane)?);
    let omega1 = superint::omega_goe_extrapolated(1, 0.0, &plane)?.value;
    let c1 = c_goe_from_omega(1, 0.0, omega1);
    let mut cs = c_goe_by_recursion(0, c0, args.n_max, &spec)?;
    if args.n_max >= 1 {
        cs.extend(c_goe_by_recursion(1, c1, args.n_max, &spec)?);
    }
    cs.sort_by_key(|p| p.0);
    for (n, c) in cs {
        row("c", n, c_goe(n), c);
    }
    row("omega_1(0)", 1, superint::omega_goe(1, 0.0), omega1);
    for n in 0..=args.n_max {
        row("b", n, b_closed(n), b_quadrature(n, &spec)?);
    }
    Ok(t)
}

fn report_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let (table, output, report) = match &cli.command {
        Command::Kernel(a) => (cmd_kernel(a), a.output.clone(), None),
        Command::Corr(a) => (cmd_corr(a), a.output.clone(), None),
        Command::Density(a) => (cmd_density(a), a.output.clone(), None),
        Command::Histogram(a) => (cmd_histogram(a), a.output.clone(), None),
        Command::Constants(a) => (cmd_constants(a), a.output.clone(), None),
        Command::Verify(a) => {
            let output = OutputArgs { format: a.format, out: a.out.clone() };
            match cmd_verify(a) {
                Ok((r, t)) => (Ok(t), output, Some(r)),
                Err(e) => (Err(e), output, None),
            }
        }
    };
    let table = match table {
        Ok(t) => t,
        Err(e) => return report_error(&e),
    };

    let written = match (&report, output.format) {
        (Some(r), Format::Json) => open_output(&output.out).and_then(|mut w| {
            serde_json::to_writer_pretty(&mut w, r)?;
            writeln!(w)?;
            w.flush()
        }),
        _ => emit(&table, &output),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_USAGE);
    }

    match report {
        Some(r) if !r.passed() => {
            for c in r.failures() {
                eprintln!("FAILED {}: expected {} got {} tol {}", c.name, c.expected, c.got, c.tol);
            }
            ExitCode::from(EXIT_FAILED_CHECKS)
        }
        _ => ExitCode::SUCCESS,
    }
}
