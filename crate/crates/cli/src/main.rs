//! `cholspace`: geodesic stability, interpolation determinants and ad-hoc
//! operator evaluation on the Cholesky manifold.

mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cholspace::spd::{baseline_geodesic, chol_diff, interpolation_table};
use cholspace::{
    stability_experiment, BaselineKind, CholeskyMetric, CholeskyPoint, Matrix, PositiveDiag, SpdMetric, SpdPoint,
    StabilityConfig, StabilityMetric,
};
use serde_json::{json, Value};

use input::{read_json, EvalInput, PairInput};

const SEED_ENV: &str = "CHOLSPACE_SEED";

#[derive(Debug)]
pub enum CliError {
    /// Malformed input or arguments (exit code 2).
    Parse(String),
    /// Valid input outside a metric's domain (exit code 3).
    Domain(cholspace::Error),
}

impl From<cholspace::Error> for CliError {
    fn from(e: cholspace::Error) -> Self {
        match e {
            cholspace::Error::Config(msg) => CliError::Parse(msg),
            other => CliError::Domain(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Parse(format!("writing CSV: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Parse(format!("I/O: {e}"))
    }
}

#[derive(Parser)]
#[command(name = "cholspace", version, about = "Geometry experiments on the Cholesky manifold")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Failure rates (%) of raw geodesics started next to the boundary.
    Stability {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3,1e-4,1e-5,1e-10,1e-15")]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.5")]
        theta: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "CM,DEM,DGBWM", value_parser = parse_stability_metric)]
        metrics: Vec<StabilityMetric>,
        /// Overridden by the CHOLSPACE_SEED environment variable when set.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Geodesic parameter at which outputs are inspected.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Determinants along geodesics between two SPD matrices.
    Interpolate {
        /// JSON file `{"n": .., "P": [[..]], "Q": [[..]]}`.
        #[arg(long)]
        input: PathBuf,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1.0-EM,0.5-EM,0.1-EM,LEM,AIM,BWM,LCM,0.1-CDEM,0.5-CDEM,1.0-CDEM",
            value_parser = parse_kind
        )]
        kinds: Vec<BaselineKind>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Add a column with each interpolant in row-major JSON.
        #[arg(long)]
        emit_matrices: bool,
    },
    /// Evaluate one operator of one metric on JSON operands and print JSON.
    Eval {
        /// CM, θ-DEM, θ-DGBWM (Cholesky side) or LCM, θ-CDEM, θ-CDGBWM (SPD side).
        #[arg(long)]
        metric: String,
        /// inner, geodesic, exp, log, transport, dist, wfm, interpolate,
        /// gyro-add, gyro-scale, gyro-inverse, or chol-diff (SPD side).
        #[arg(long)]
        op: String,
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_stability_metric(s: &str) -> Result<StabilityMetric, String> {
    s.parse().map_err(|e: cholspace::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<BaselineKind, String> {
    s.parse().map_err(|e: cholspace::Error| e.to_string())
}

fn seed_override(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("{SEED_ENV} must be an unsigned 64-bit integer, got `{v}`"))),
        Err(_) => Ok(flag),
    }
}

fn csv_writer(path: Option<&PathBuf>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[allow(clippy::too_many_arguments)]
fn run_stability(
    n: usize,
    trials: usize,
    eps: Vec<f64>,
    thetas: Vec<f64>,
    metrics: Vec<StabilityMetric>,
    seed: u64,
    t: f64,
    csv: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = StabilityConfig {
        n,
        trials,
        eps,
        thetas,
        metrics,
        seed: seed_override(seed)?,
        t,
    };
    let report = stability_experiment(&config)?;
    let mut out = csv_writer(csv.as_ref())?;
    out.write_record(["metric", "theta", "eps", "t", "value"])?;
    for cell in &report.cells {
        out.write_record([
            cell.metric.to_string(),
            fmt_opt(cell.theta),
            format!("{:e}", cell.eps),
            cell.t.to_string(),
            format!("{:.2}", cell.rate()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn kind_theta(kind: BaselineKind) -> Option<f64> {
    match kind {
        BaselineKind::Pe(t) | BaselineKind::Cdem(t) | BaselineKind::Cdgbwm(t) => Some(t),
        BaselineKind::Em => Some(1.0),
        _ => None,
    }
}

fn run_interpolate(path: PathBuf, kinds: Vec<BaselineKind>, steps: usize, emit: bool) -> Result<(), CliError> {
    let pair: PairInput = read_json(&path)?;
    let (p, q) = pair.points()?;
    let rows = interpolation_table(&p, &q, &kinds, steps)?;
    let mut out = csv_writer(None)?;
    let mut header = vec!["metric", "theta", "eps", "t", "value"];
    if emit {
        header.push("matrix");
    }
    out.write_record(&header)?;
    for row in &rows {
        for (i, (&t, &det)) in row.t.iter().zip(&row.determinants).enumerate() {
            let mut record = vec![row.kind.to_string(), fmt_opt(kind_theta(row.kind)), String::new(), t.to_string(), det.to_string()];
            if emit {
                let m = if i == 0 {
                    p.clone()
                } else if i + 1 == steps {
                    q.clone()
                } else {
                    baseline_geodesic(row.kind, &p, &q, t)?
                };
                record.push(serde_json::to_string(&m.as_matrix().to_rows()).expect("finite matrix serialises"));
            }
            out.write_record(&record)?;
        }
    }
    out.flush()?;
    Ok(())
}

enum EvalMetric {
    Chol(CholeskyMetric),
    Spd(SpdMetric),
}

fn parse_eval_metric(input: &str, weights: Option<PositiveDiag>) -> Result<EvalMetric, CliError> {
    let upper = input.trim().to_ascii_uppercase();
    let (theta, name) = match upper.rsplit_once('-') {
        Some((num, name)) => {
            let theta: f64 = num
                .parse()
                .map_err(|_| CliError::Parse(format!("bad deformation exponent in `{input}`")))?;
            (theta, name.to_string())
        }
        None => (1.0, upper.clone()),
    };
    let needs_plain = |m: EvalMetric| {
        if upper.contains('-') {
            Err(CliError::Parse(format!("`{name}` takes no exponent")))
        } else {
            Ok(m)
        }
    };
    let bw_only = |w: &Option<PositiveDiag>| {
        if w.is_some() {
            Err(CliError::Parse(format!("M is only meaningful for the Bures-Wasserstein family, not `{input}`")))
        } else {
            Ok(())
        }
    };
    match name.as_str() {
        "CM" => {
            bw_only(&weights)?;
            needs_plain(EvalMetric::Chol(CholeskyMetric::cm()))
        }
        "EM" => {
            bw_only(&weights)?;
            needs_plain(EvalMetric::Chol(CholeskyMetric::euclidean()))
        }
        "LCM" => {
            bw_only(&weights)?;
            needs_plain(EvalMetric::Spd(SpdMetric::lcm()))
        }
        "DEM" => {
            bw_only(&weights)?;
            Ok(EvalMetric::Chol(CholeskyMetric::dem(theta)?))
        }
        "CDEM" => {
            bw_only(&weights)?;
            Ok(EvalMetric::Spd(SpdMetric::cdem(theta)?))
        }
        "DGBWM" | "DBWM" => Ok(EvalMetric::Chol(CholeskyMetric::dgbwm(theta, weights)?)),
        "CDGBWM" | "CDBWM" => Ok(EvalMetric::Spd(SpdMetric::cdgbwm(theta, weights)?)),
        _ => Err(CliError::Parse(format!("unknown metric `{input}`"))),
    }
}

fn scalar(v: f64) -> Value {
    json!(v)
}

fn mat(m: &Matrix) -> Value {
    json!(m.to_rows())
}

fn eval_cholesky(g: &CholeskyMetric, op: &str, x: &EvalInput) -> Result<Value, CliError> {
    let p = || x.chol("P", &x.p);
    let q = || x.chol("Q", &x.q);
    Ok(match op {
        "inner" => scalar(g.inner(&p()?, &x.tangent("V", &x.v)?, &x.tangent("W", &x.w)?)?),
        "geodesic" => mat(g.geodesic(&p()?, &x.tangent("V", &x.v)?, x.t()?)?.as_matrix()),
        "exp" => mat(g.exp(&p()?, &x.tangent("V", &x.v)?)?.as_matrix()),
        "log" => mat(g.log(&p()?, &q()?)?.as_matrix()),
        "transport" => mat(g.transport(&p()?, &q()?, &x.tangent("V", &x.v)?)?.as_matrix()),
        "dist" => scalar(g.dist(&p()?, &q()?)?),
        "interpolate" => mat(g.interpolate(&p()?, &q()?, x.t()?)?.as_matrix()),
        "wfm" => {
            let points = x
                .point_list()?
                .into_iter()
                .map(|m| Ok(CholeskyPoint::new(cholspace::LowerTri::try_from_matrix(m)?)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            mat(g.wfm(&x.weight_list(points.len())?, &points)?.as_matrix())
        }
        "gyro-add" => mat(g.gyro_add(&p()?, &q()?)?.as_matrix()),
        "gyro-scale" => mat(g.gyro_scale(x.t()?, &p()?)?.as_matrix()),
        "gyro-inverse" => mat(g.gyro_inverse(&p()?)?.as_matrix()),
        _ => return Err(CliError::Parse(format!("unknown operation `{op}` for a Cholesky metric"))),
    })
}

fn eval_spd(g: &SpdMetric, op: &str, x: &EvalInput) -> Result<Value, CliError> {
    let p = || x.spd("P", &x.p);
    let q = || x.spd("Q", &x.q);
    let v = || x.mat("V", &x.v);
    Ok(match op {
        "inner" => scalar(g.inner(&p()?, &v()?, &x.mat("W", &x.w)?)?),
        "geodesic" => mat(g.geodesic(&p()?, &v()?, x.t()?)?.as_matrix()),
        "exp" => mat(g.exp(&p()?, &v()?)?.as_matrix()),
        "log" => mat(&g.log(&p()?, &q()?)?),
        "transport" => mat(&g.transport(&p()?, &q()?, &v()?)?),
        "dist" => scalar(g.dist(&p()?, &q()?)?),
        "interpolate" => mat(g.interpolate(&p()?, &q()?, x.t()?)?.as_matrix()),
        "wfm" => {
            let points = x
                .point_list()?
                .into_iter()
                .map(SpdPoint::new)
                .collect::<Result<Vec<_>, _>>()?;
            mat(g.wfm(&x.weight_list(points.len())?, &points)?.as_matrix())
        }
        "gyro-add" => mat(g.gyro_add(&p()?, &q()?)?.as_matrix()),
        "gyro-scale" => mat(g.gyro_scale(x.t()?, &p()?)?.as_matrix()),
        "gyro-inverse" => mat(g.gyro_inverse(&p()?)?.as_matrix()),
        "chol-diff" => mat(chol_diff(&p()?, &v()?)?.as_matrix()),
        _ => return Err(CliError::Parse(format!("unknown operation `{op}` for an SPD metric"))),
    })
}

fn run_eval(metric: String, op: String, path: PathBuf) -> Result<(), CliError> {
    let x: EvalInput = read_json(&path)?;
    let result = match parse_eval_metric(&metric, x.diag_weights()?)? {
        EvalMetric::Chol(g) => eval_cholesky(&g, &op, &x)?,
        EvalMetric::Spd(g) => eval_spd(&g, &op, &x)?,
    };
    let doc = json!({ "metric": metric, "op": op, "result": result });
    println!("{doc}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Stability {
            n,
            trials,
            eps,
            theta,
            metrics,
            seed,
            t,
            csv,
        } => run_stability(n, trials, eps, theta, metrics, seed, t, csv),
        Command::Interpolate {
            input,
            kinds,
            steps,
            emit_matrices,
        } => run_interpolate(input, kinds, steps, emit_matrices),
        Command::Eval { metric, op, input } => run_eval(metric, op, input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
