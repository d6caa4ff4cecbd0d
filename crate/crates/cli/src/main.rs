//! Command-line front end for `jacobi-match`.
//!
//! Results go to stdout as JSON (default) or CSV; diagnostics go to stderr.
//! Exit codes: 0 success, 1 numerical failure, 2 usage error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use jacobi_match::distributions::{sample, ProductJacobiParams};
use jacobi_match::experiments::{run_experiment, write_csv, ExperimentConfig};
use jacobi_match::selftest::run_selftest;
use jacobi_match::spectral::{spectral_constant, HeatKernelModel};
use jacobi_match::transport::{
    w2sq_between, w2sq_empirical_vs_measure_1d, w2sq_vs_reference, QuadratureSpec,
};
use jacobi_match::{Error, JacobiParams, Model, RngState};
use serde_json::{json, Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "jacobi-match", version, about = "Wasserstein matching costs for Jacobi measures")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density, distribution function, quantile or draws of a Jacobi measure.
    Dist {
        #[command(flatten)]
        model: FactorArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long)]
        u: Option<f64>,
        /// Number of draws.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Heat kernel `p_t(x, y)`; products take comma-separated coordinates.
    Kernel {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<f64>,
        /// Also report the dispersion integral at `t`.
        #[arg(long)]
        dispersion: bool,
    },
    /// Heat trace `Σ e^{−s λ_k}`.
    Trace {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        s: f64,
        /// Report `s^{k/2}·trace(s) − (√π/2)^k`.
        #[arg(long)]
        check_asymptotic: bool,
    },
    /// Spectral constant `S(d) = Σ_k 1/(k(k+d−1))`.
    Constant {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
    },
    /// `W₂²` for one seeded draw.
    W2 {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to one-sample for one-dimensional models, bipartite otherwise.
        #[arg(long, value_enum)]
        mode: Option<W2Mode>,
        #[arg(long, default_value_t = 100)]
        reference_factor: usize,
    },
    /// Monte Carlo run described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; defaults to the machine's parallelism.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Bundled oracle checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum W2Mode {
    OneSample,
    Bipartite,
    ReferenceProxy,
}

#[derive(Args, Debug)]
struct FactorArgs {
    /// Symmetric dimension, `α = β = d/2`.
    #[arg(long, conflicts_with_all = ["alpha", "beta"])]
    d: Option<f64>,
    #[arg(long, requires = "beta")]
    alpha: Option<f64>,
    #[arg(long, requires = "alpha")]
    beta: Option<f64>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[command(flatten)]
    first: FactorArgs,
    /// Second factor of a product model.
    #[arg(long, conflicts_with_all = ["alpha2", "beta2"])]
    d2: Option<f64>,
    #[arg(long, requires = "beta2")]
    alpha2: Option<f64>,
    #[arg(long, requires = "alpha2")]
    beta2: Option<f64>,
}

/// Failure category, mapped onto the exit code.
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::Config(_) | Error::Json(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn factor(d: Option<f64>, alpha: Option<f64>, beta: Option<f64>) -> CliResult<Option<JacobiParams>> {
    Ok(match (d, alpha, beta) {
        (Some(d), None, None) => Some(JacobiParams::symmetric(d)?),
        (None, Some(a), Some(b)) => Some(JacobiParams::new(a, b)?),
        _ => None,
    })
}

impl FactorArgs {
    fn params(&self) -> CliResult<JacobiParams> {
        factor(self.d, self.alpha, self.beta)?.ok_or_else(|| Failure::Usage("give --d or --alpha and --beta".into()))
    }
}

impl ModelArgs {
    fn model(&self) -> CliResult<Model> {
        let first = self.first.params()?;
        Ok(match factor(self.d2, self.alpha2, self.beta2)? {
            None => first.into(),
            Some(second) => ProductJacobiParams::new(vec![first, second])?.into(),
        })
    }
}

fn params_json(p: &JacobiParams) -> Value {
    json!({"alpha": p.alpha(), "beta": p.beta()})
}

fn dist(model: &FactorArgs, x: Option<f64>, u: Option<f64>, n: Option<usize>, seed: u64) -> CliResult<Value> {
    let p = model.params()?;
    let mut out = params_json(&p);
    let obj = out.as_object_mut().expect("object");
    if x.is_none() && u.is_none() && n.is_none() {
        return Err(Failure::Usage("dist needs --x, --u or --n".into()));
    }
    if let Some(x) = x {
        obj.insert("x".into(), json!(x));
        obj.insert("pdf".into(), json!(p.pdf(x)?));
        obj.insert("cdf".into(), json!(p.cdf(x)));
        obj.insert("sf".into(), json!(p.sf(x)));
    }
    if let Some(u) = u {
        if !(0.0..=1.0).contains(&u) {
            return Err(Failure::Usage(format!("--u must lie in [0, 1], got {u}")));
        }
        obj.insert("u".into(), json!(u));
        obj.insert("quantile".into(), json!(p.quantile(u)));
    }
    if let Some(n) = n {
        let s = sample(&p.into(), &mut RngState::new(seed), n);
        obj.insert("seed".into(), json!(seed));
        obj.insert("points".into(), json!(s.points()));
    }
    Ok(out)
}

fn kernel(model: &ModelArgs, t: f64, x: &[f64], y: &[f64], dispersion: bool) -> CliResult<Value> {
    let m = HeatKernelModel::new(model.model()?);
    if x.len() != m.coords() || y.len() != m.coords() {
        return Err(Failure::Usage(format!("--x and --y need {} coordinates", m.coords())));
    }
    let mut out = json!({"t": t, "x": x, "y": y, "p": m.heat_kernel(t, x, y)?});
    if dispersion {
        out["dispersion"] = json!(m.dispersion_integral(t)?);
    }
    Ok(out)
}

fn trace(model: &ModelArgs, s: f64, check: bool) -> CliResult<Value> {
    let m = HeatKernelModel::new(model.model()?);
    let mut out = json!({"s": s, "trace": m.trace(s)?});
    if check {
        out["deviation"] = json!(m.trace_asymptotic_deviation(s)?);
    }
    Ok(out)
}

fn w2(model: &ModelArgs, n: usize, seed: u64, mode: Option<W2Mode>, reference_factor: usize) -> CliResult<Value> {
    let model = model.model()?;
    if n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let mode = mode.unwrap_or(if model.coords() == 1 { W2Mode::OneSample } else { W2Mode::Bipartite });
    let mut rng = RngState::new(seed);
    let a = sample(&model, &mut rng, n);
    let mut out = json!({"n": n, "seed": seed});
    let w = match (mode, &model) {
        (W2Mode::OneSample, Model::Jacobi(p)) => w2sq_empirical_vs_measure_1d(&a, p, &QuadratureSpec::default())?,
        (W2Mode::OneSample, Model::Product(_)) => {
            return Err(Failure::Usage("one-sample mode needs a one-dimensional model".into()))
        }
        (W2Mode::Bipartite, _) => w2sq_between(&a, &sample(&model, &mut rng, n))?,
        (W2Mode::ReferenceProxy, _) => {
            if reference_factor == 0 {
                return Err(Failure::Usage("--reference-factor must be at least 1".into()));
            }
            let r = w2sq_vs_reference(&a, &sample(&model, &mut rng, n * reference_factor))?;
            out["reference_size"] = json!(r.reference_size);
            r.w2sq
        }
    };
    out["w2sq"] = json!(w);
    out["n_w2sq"] = json!(n as f64 * w);
    Ok(out)
}

/// Either a ready-made payload or raw CSV text.
enum Output {
    Value(Value),
    Csv(String),
}

fn experiment(config: &PathBuf, threads: Option<usize>, format: Format) -> CliResult<Output> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", config.display())))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    if threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let out = run_experiment(&cfg, threads)?;
    if out.aggregate.failures > 0 {
        eprintln!("warning: {} replicas failed; see the status column", out.aggregate.failures);
    }
    Ok(match format {
        Format::Json => Output::Value(serde_json::to_value(&out.aggregate).map_err(Error::from)?),
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&cfg, &out.records, &mut buf)?;
            Output::Csv(String::from_utf8(buf).expect("csv output is UTF-8"))
        }
    })
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Objects become one row; arrays of objects one row each, keyed by the
/// first element.
fn to_csv(v: &Value) -> String {
    let rows: Vec<&Map<String, Value>> = match v {
        Value::Object(m) => vec![m],
        Value::Array(items) => items.iter().filter_map(Value::as_object).collect(),
        _ => vec![],
    };
    let Some(first) = rows.first() else {
        return format!("{}\n", csv_field(&cell(v)));
    };
    let keys: Vec<&String> = first.keys().collect();
    let mut out = keys.iter().map(|k| csv_field(k)).collect::<Vec<_>>().join(",") + "\n";
    for r in &rows {
        let line: Vec<String> = keys.iter().map(|k| csv_field(&cell(r.get(*k).unwrap_or(&Value::Null)))).collect();
        out += &(line.join(",") + "\n");
    }
    out
}

fn dispatch(cli: Cli) -> CliResult<(Output, bool)> {
    let value = match &cli.command {
        Command::Dist { model, x, u, n, seed } => dist(model, *x, *u, *n, *seed)?,
        Command::Kernel { model, t, x, y, dispersion } => kernel(model, *t, x, y, *dispersion)?,
        Command::Trace { model, s, check_asymptotic } => trace(model, *s, *check_asymptotic)?,
        Command::Constant { d, tol } => json!({"S": spectral_constant(*d, *tol)?}),
        Command::W2 { model, n, seed, mode, reference_factor } => w2(model, *n, *seed, *mode, *reference_factor)?,
        Command::Experiment { config, threads } => return Ok((experiment(config, *threads, cli.format)?, true)),
        Command::Selftest => {
            let checks = run_selftest();
            let ok = checks.iter().all(|c| c.passed);
            for c in checks.iter().filter(|c| !c.passed) {
                eprintln!("selftest failed: {} (error {:e} > {:e})", c.name, c.max_error, c.tolerance);
            }
            return Ok((Output::Value(serde_json::to_value(&checks).map_err(Error::from)?), ok));
        }
    };
    Ok((Output::Value(value), true))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let format = cli.format;
    match dispatch(cli) {
        Ok((out, ok)) => {
            match out {
                Output::Csv(text) => print!("{text}"),
                Output::Value(v) if format == Format::Csv => print!("{}", to_csv(&v)),
                Output::Value(v) => println!("{v}"),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
