//! `pemkit` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pemkit::benchmarks::external::ExternalModel;
use pemkit::benchmarks::references::POLYNOMIAL_SAMPLE_SIZES;
use pemkit::benchmarks::{self, BenchmarkCase, ResponseModel, TABLE_KEYS};
use pemkit::io::{read_distribution, write_points};
use pemkit::propagate::{mc_reference, propagate, Method, Propagation, DEFAULT_SEED};
use pemkit::qpem;
use pemkit::report::{compare, write_long, write_table, ComparisonRow};
use pemkit::sampling::DEFAULT_SOBOL_SKIP;
use pemkit::transform::FactorMethod;
use pemkit::types::{GaussianSpec, MomentSummary};
use pemkit::{Error, Result};

#[derive(Parser)]
#[command(name = "pemkit", version, about = "Moment propagation with point estimate methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a standard normal point set and its weights as CSV.
    Points {
        #[command(flatten)]
        method: MethodArgs,
        /// Number of inputs.
        #[arg(long)]
        dim: usize,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Propagate an input distribution through a model and report the moments as JSON.
    Propagate {
        #[command(flatten)]
        method: MethodArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Covariance factorization; defaults to the case's own choice or cholesky.
        #[arg(long, value_enum)]
        factor: Option<Factor>,
        /// Only evaluate the model at the input mean and print the value.
        #[arg(long)]
        check: bool,
        /// Report file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the comparison-table methods on a case and write error tables.
    Benchmark {
        /// Case name; `polynomial-sweep` runs the polynomial at every tabulated dimension.
        #[arg(long)]
        case: String,
        /// Comma-separated method keys; all table methods when omitted.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// Wide table CSV; stdout when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Long-format CSV, one row per method and moment.
        #[arg(long)]
        long: Option<PathBuf>,
    },
    /// Seeded Monte Carlo reference for a case, with standard errors.
    Reference {
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the built-in cases.
    Cases,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodName {
    Qpem,
    QpemUnscaled,
    Hpem,
    Sgh3,
    Mc,
    Lhs,
    Sobol,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Factor {
    Cholesky,
    Eigen,
}

impl From<Factor> for FactorMethod {
    fn from(f: Factor) -> Self {
        match f {
            Factor::Cholesky => FactorMethod::Cholesky,
            Factor::Eigen => FactorMethod::Eigen,
        }
    }
}

#[derive(Args, Debug)]
struct MethodArgs {
    #[arg(long, value_enum)]
    method: MethodName,
    /// QPEM radius.
    #[arg(long)]
    r: Option<f64>,
    /// Third-moment scaling factor of scaled QPEM.
    #[arg(long, allow_negative_numbers = true)]
    zeta: Option<f64>,
    /// Fourth-moment scaling factor of scaled QPEM.
    #[arg(long, allow_negative_numbers = true)]
    xi: Option<f64>,
    /// Sample count for mc, lhs and sobol; defaults to 2n^2 + 1.
    #[arg(long)]
    count: Option<usize>,
    /// Seed for mc and lhs.
    #[arg(long)]
    seed: Option<u64>,
    /// Leading Sobol points to drop.
    #[arg(long)]
    skip: Option<u64>,
}

impl MethodArgs {
    /// Resolves the flags into a method, rejecting flags the method ignores.
    fn resolve(&self, n: usize) -> Result<Method> {
        use MethodName::*;
        let reject = |set: bool, flag: &str, allowed: &str| -> Result<()> {
            if set {
                Err(Error::Parameter(format!("--{flag} applies only to {allowed}")))
            } else {
                Ok(())
            }
        };
        let is_qpem = matches!(self.method, Qpem | QpemUnscaled);
        let sampled = matches!(self.method, Mc | Lhs | Sobol);
        reject(!is_qpem && self.r.is_some(), "r", "qpem and qpem-unscaled")?;
        let scaled = matches!(self.method, Qpem);
        reject(!scaled && self.zeta.is_some(), "zeta", "qpem")?;
        reject(!scaled && self.xi.is_some(), "xi", "qpem")?;
        reject(!sampled && self.count.is_some(), "count", "mc, lhs and sobol")?;
        reject(!matches!(self.method, Mc | Lhs) && self.seed.is_some(), "seed", "mc and lhs")?;
        reject(!matches!(self.method, Sobol) && self.skip.is_some(), "skip", "sobol")?;

        let r = self.r.unwrap_or(qpem::DEFAULT_R);
        let count = self.count.unwrap_or_else(|| qpem::point_count(n));
        let seed = self.seed.unwrap_or(DEFAULT_SEED);
        Ok(match self.method {
            Qpem => Method::Qpem {
                r,
                zeta: self.zeta.unwrap_or(qpem::DEFAULT_ZETA),
                xi: self.xi.unwrap_or(qpem::DEFAULT_XI),
            },
            QpemUnscaled => Method::QpemUnscaled { r },
            Hpem => Method::Hpem,
            Sgh3 => Method::Sgh3,
            Mc => Method::Mc { count, seed },
            Lhs => Method::Lhs { count, seed },
            Sobol => Method::Sobol {
                count,
                skip: self.skip.unwrap_or(DEFAULT_SOBOL_SKIP),
            },
        })
    }
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Built-in case name (see `pemkit cases`).
    #[arg(long, conflicts_with = "dist")]
    case: Option<String>,
    /// Input distribution JSON for an external model.
    #[arg(long, requires = "command")]
    dist: Option<PathBuf>,
    /// Parallel external model processes.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Per-process timeout in seconds for external models.
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
    /// External model command line, after `--`.
    #[arg(last = true)]
    command: Vec<String>,
}

/// Everything needed to rerun a propagation.
#[derive(Serialize)]
struct RunConfig {
    method: Method,
    factor: FactorMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    case: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    workers: Option<usize>,
}

#[derive(Serialize)]
struct Report {
    config: RunConfig,
    units: String,
    summary: MomentSummary,
    /// Moments that are undefined because the output variance is zero.
    undefined: Vec<&'static str>,
    point_count: usize,
    stability_factor: f64,
    elapsed_seconds: f64,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

struct Target {
    model: Arc<dyn ResponseModel>,
    spec: GaussianSpec,
    factor: FactorMethod,
    units: String,
}

fn resolve_model(args: &ModelArgs, factor: Option<Factor>) -> Result<Target> {
    match (&args.case, &args.dist) {
        (Some(name), None) => {
            if !args.command.is_empty() {
                return Err(Error::Parameter("an external command needs --dist, not --case".into()));
            }
            let case: BenchmarkCase = benchmarks::case(name)?;
            Ok(Target {
                model: case.model.clone(),
                factor: factor.map(Into::into).unwrap_or(case.factor),
                spec: case.input,
                units: case.units,
            })
        }
        (None, Some(path)) => {
            let spec = read_distribution(File::open(path)?)?;
            let (program, rest) = args
                .command
                .split_first()
                .ok_or_else(|| Error::Parameter("missing external command after `--`".into()))?;
            if args.timeout.is_nan() || args.timeout <= 0.0 {
                return Err(Error::Parameter("--timeout must be positive".into()));
            }
            let model = ExternalModel::new(program.clone(), rest.to_vec(), spec.dim())
                .with_workers(args.workers)
                .with_timeout(Duration::from_secs_f64(args.timeout));
            Ok(Target {
                model: Arc::new(model),
                factor: factor.map(Into::into).unwrap_or_default(),
                spec,
                units: String::new(),
            })
        }
        _ => Err(Error::Parameter(
            "give either --case or --dist with an external command".into(),
        )),
    }
}

fn cmd_propagate(
    method: &MethodArgs,
    model: &ModelArgs,
    factor: Option<Factor>,
    check: bool,
    output: Option<&Path>,
) -> Result<()> {
    let target = resolve_model(model, factor)?;
    if check {
        let value = target
            .model
            .evaluate(target.spec.mean.as_slice())
            .map_err(|message| Error::Model { index: 0, message })?;
        let mut out = open_output(output)?;
        writeln!(out, "{value:.6} {}", target.units)?;
        out.flush()?;
        return Ok(());
    }
    let m = method.resolve(target.spec.dim())?;
    let run: Propagation = propagate(target.model.as_ref(), &target.spec, target.factor, &m)?;
    let mut undefined = Vec::new();
    if run.summary.skew.is_none() {
        undefined.extend(["skew", "kurt"]);
        eprintln!("warning: output variance is zero; skewness and kurtosis are undefined");
    }
    let report = Report {
        config: RunConfig {
            method: m,
            factor: target.factor,
            case: model.case.clone(),
            distribution: model.dist.as_ref().map(|p| p.display().to_string()),
            command: model.command.clone(),
            workers: model.dist.as_ref().map(|_| model.workers),
        },
        units: target.units,
        summary: run.summary,
        undefined,
        point_count: run.point_count,
        stability_factor: run.stability_factor,
        elapsed_seconds: run.elapsed_seconds,
    };
    write_json(output, &report)
}

fn cmd_benchmark(
    case: &str,
    methods: &[String],
    table: Option<&Path>,
    long: Option<&Path>,
) -> Result<()> {
    let keys: Vec<&str> = if methods.is_empty() {
        TABLE_KEYS.to_vec()
    } else {
        methods.iter().map(String::as_str).collect()
    };
    let mut rows: Vec<ComparisonRow> = Vec::new();
    if case == "polynomial-sweep" {
        for (n, ..) in POLYNOMIAL_SAMPLE_SIZES {
            let c = benchmarks::polynomial::case(n)?;
            rows.extend(compare(&c, &keys)?);
            eprintln!("polynomial n = {n} done");
        }
    } else {
        rows = compare(&benchmarks::case(case)?, &keys)?;
    }
    write_table(open_output(table)?, &rows)?;
    if let Some(p) = long {
        write_long(open_output(Some(p))?, &rows)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Points { method, dim, output } => {
            let m = method.resolve(dim)?;
            let (set, weights) = m.point_set(dim)?;
            write_points(open_output(output.as_deref())?, &set, &weights)
        }
        Command::Propagate {
            method,
            model,
            factor,
            check,
            output,
        } => cmd_propagate(&method, &model, factor, check, output.as_deref()),
        Command::Benchmark {
            case,
            methods,
            table,
            long,
        } => cmd_benchmark(&case, &methods, table.as_deref(), long.as_deref()),
        Command::Reference {
            case,
            count,
            seed,
            output,
        } => {
            let c = benchmarks::case(&case)?;
            let r = mc_reference(c.model.as_ref(), &c.input, c.factor, count, seed)?;
            write_json(output.as_deref(), &r)
        }
        Command::Cases => {
            let mut out = open_output(None)?;
            for (name, description) in benchmarks::available_cases() {
                writeln!(out, "{name:<22}{description}")?;
            }
            out.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
