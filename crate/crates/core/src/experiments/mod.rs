//! Seeded Monte Carlo harness for `E[W₂²]` over grids of sample sizes.
//!
//! Every `(n, replica)` pair owns an independent generator seeded by
//! [`derive_seed`], so record streams do not depend on thread count or
//! scheduling. Aggregation is an ordered reduction by `(n, replica)`.

use crate::distributions::{sample_with, BetaSampler, Model};
use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::transport::{w2sq_between, w2sq_vs_reference, QuadratureSpec, QuantileGridLadder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

pub use crate::rng::derive_seed;

/// Exact header of the per-replica CSV output.
pub const CSV_HEADER: [&str; 12] =
    ["model", "mode", "alpha", "beta", "alpha2", "beta2", "n", "replica", "seed", "w2sq", "wall_ms", "status"];

/// Which Wasserstein quantity a replica computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `W₂²(μ^n, μ)`; one-dimensional models only.
    OneSample,
    /// `W₂²(μ^n, ν^n)` for two independent samples.
    Bipartite,
    /// `W₂²(μ^n, μ^N)` against an independent reference sample of size `N`.
    ReferenceProxy,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::OneSample => "one-sample",
            Mode::Bipartite => "bipartite",
            Mode::ReferenceProxy => "reference-proxy",
        })
    }
}

/// Normalization applied to `W₂²` before averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `n · W₂²`
    #[default]
    N,
    /// `(n / ln n) · W₂²`
    NOverLogN,
}

impl Scaling {
    pub fn factor(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Scaling::N => n,
            Scaling::NOverLogN => n / n.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    pub mode: Mode,
    pub n_grid: Vec<usize>,
    pub replicas: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub scaling: Scaling,
    #[serde(default)]
    pub quad: QuadratureSpec,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Reference size as a multiple of `n` in reference-proxy mode.
    #[serde(default = "default_reference_factor")]
    pub reference_factor: usize,
    /// Cap on the reference size; the factor shrinks to respect it.
    #[serde(default = "default_max_reference_size")]
    pub max_reference_size: usize,
    #[serde(default)]
    pub sampler: BetaSampler,
    /// Fill `wall_ms`; off by default so outputs are byte-reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_reference_factor() -> usize {
    100
}

fn default_max_reference_size() -> usize {
    4096
}

impl ExperimentConfig {
    /// A config with defaults for every optional field.
    pub fn new(model: impl Into<Model>, mode: Mode, n_grid: Vec<usize>, replicas: usize, base_seed: u64) -> Self {
        Self {
            model: model.into(),
            mode,
            n_grid,
            replicas,
            base_seed,
            scaling: Scaling::default(),
            quad: QuadratureSpec::default(),
            output_path: None,
            reference_factor: default_reference_factor(),
            max_reference_size: default_max_reference_size(),
            sampler: BetaSampler::default(),
            record_timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must be nonempty".into()));
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("n_grid must be strictly ascending positive counts, got {:?}", self.n_grid)));
        }
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.mode == Mode::OneSample && self.model.coords() != 1 {
            return Err(Error::Config("one-sample mode needs a one-dimensional model".into()));
        }
        if self.scaling == Scaling::NOverLogN && self.n_grid[0] < 2 {
            return Err(Error::Config("n_over_log_n scaling needs n >= 2".into()));
        }
        if self.reference_factor == 0 {
            return Err(Error::Config("reference_factor must be at least 1".into()));
        }
        self.quad.validate()
    }

    /// Reference size used at sample size `n` in reference-proxy mode: a
    /// multiple of `n`, at most `max_reference_size` unless that is below `n`.
    pub fn reference_size(&self, n: usize) -> usize {
        n * self.reference_factor.min(self.max_reference_size / n).max(1)
    }
}

/// Outcome of one replica.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub replica: usize,
    pub seed: u64,
    /// `None` when the replica failed.
    pub w2sq: Option<f64>,
    pub wall_ms: Option<f64>,
    /// `"ok"` or `"error: …"`.
    pub status: String,
}

impl ExperimentRecord {
    pub fn is_ok(&self) -> bool {
        self.w2sq.is_some()
    }
}

enum Prepared {
    Ladders(Vec<QuantileGridLadder>),
    Nothing,
}

fn run_one(cfg: &ExperimentConfig, prepared: &Prepared, grid_index: usize, seed: u64) -> Result<f64> {
    let n = cfg.n_grid[grid_index];
    let mut rng = RngState::new(seed);
    let a = sample_with(&cfg.model, &mut rng, n, cfg.sampler);
    let w = match (cfg.mode, prepared) {
        (Mode::OneSample, Prepared::Ladders(ladders)) => ladders[grid_index].w2sq(a.angles())?,
        (Mode::Bipartite, _) => {
            let b = sample_with(&cfg.model, &mut rng, n, cfg.sampler);
            w2sq_between(&a, &b)?
        }
        (Mode::ReferenceProxy, _) => {
            let r = sample_with(&cfg.model, &mut rng, cfg.reference_size(n), cfg.sampler);
            w2sq_vs_reference(&a, &r)?.w2sq
        }
        (Mode::OneSample, Prepared::Nothing) => unreachable!("one-sample grids are prepared up front"),
    };
    if !(w.is_finite() && w >= 0.0) {
        return Err(Error::Domain(format!("solver returned W2^2 = {w}")));
    }
    Ok(w)
}

/// Runs `replicas × |n_grid|` replicas on the current rayon pool. Records are
/// ordered by `(n, replica)`; failed replicas carry their error in `status`.
pub fn run_replicas(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let prepared = match (cfg.mode, &cfg.model) {
        (Mode::OneSample, Model::Jacobi(p)) => {
            Prepared::Ladders(cfg.n_grid.iter().map(|&n| QuantileGridLadder::new(*p, n, cfg.quad)).collect::<Result<_>>()?)
        }
        _ => Prepared::Nothing,
    };
    let jobs: Vec<(usize, usize)> =
        (0..cfg.n_grid.len()).flat_map(|g| (0..cfg.replicas).map(move |r| (g, r))).collect();
    Ok(jobs
        .into_par_iter()
        .map(|(g, replica)| {
            let n = cfg.n_grid[g];
            let seed = derive_seed(cfg.base_seed, n as u64, replica as u64);
            let start = Instant::now();
            let outcome = run_one(cfg, &prepared, g, seed);
            let wall_ms = cfg.record_timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            let (w2sq, status) = match outcome {
                Ok(w) => (Some(w), "ok".to_string()),
                Err(e) => (None, format!("error: {e}")),
            };
            ExperimentRecord { n, replica, seed, w2sq, wall_ms, status }
        })
        .collect())
}

/// [`run_replicas`] on a dedicated pool of `threads` workers, or on the
/// global pool when `threads` is `None`.
pub fn run_replicas_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<ExperimentRecord>> {
    match threads {
        None => run_replicas(cfg),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(|| run_replicas(cfg)),
    }
}

/// Mean and standard error of `W₂²` and of its scaled value at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub n: usize,
    pub mean: f64,
    /// NaN (serialized as `null`) with fewer than two successful replicas.
    pub stderr: f64,
    pub scaled_mean: f64,
    pub scaled_stderr: f64,
    pub replicas: usize,
    pub failures: usize,
}

fn summarize(records: &[ExperimentRecord], scaling: Scaling) -> Vec<ConstantEstimate> {
    let mut out: Vec<ConstantEstimate> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let n = records[start].n;
        let end = start + records[start..].iter().take_while(|r| r.n == n).count();
        let values: Vec<f64> = records[start..end].iter().filter_map(|r| r.w2sq).collect();
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
        let stderr = if values.len() >= 2 { (var / m).sqrt() } else { f64::NAN };
        let k = scaling.factor(n);
        out.push(ConstantEstimate {
            n,
            mean,
            stderr,
            scaled_mean: k * mean,
            scaled_stderr: k * stderr,
            replicas: values.len(),
            failures: end - start - values.len(),
        });
        start = end;
    }
    out
}

/// Per-`n` mean and standard error of the scaled `W₂²`. Records must be
/// grouped by `n` (as [`run_replicas`] returns them); failed replicas are
/// excluded and counted.
pub fn estimate_constant(records: &[ExperimentRecord], scaling: Scaling) -> Result<Vec<ConstantEstimate>> {
    let est = summarize(records, scaling);
    if let Some(bad) = est.iter().find(|e| e.replicas < 2) {
        return Err(Error::InsufficientReplicas { n: bad.n, needed: 2, got: bad.replicas });
    }
    Ok(est)
}

/// Least-squares fit of `E_n ≈ a·ln n / n + b / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub a: f64,
    pub b: f64,
    pub stderr_a: f64,
    /// Root-mean-square residual of `n·E_n`.
    pub residual: f64,
}

/// Fits `n·E_n = a·ln n + b` by ordinary least squares over `(n, E_n)`
/// pairs. Working with `n·E_n` makes the design well conditioned and the
/// residuals comparable across the grid.
pub fn fit_log_rate(points: &[(usize, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InvalidParams(format!("rate fit needs at least 3 grid points, got {}", points.len())));
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(n, e)| n as f64 * e).collect();
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if !(sxx > 1e-12 * (1.0 + xbar * xbar)) {
        return Err(Error::DegenerateDesign("grid needs at least 2 distinct n".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let a = sxy / sxx;
    let b = ybar - a * xbar;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - a * x - b).powi(2)).sum();
    Ok(RateFit { a, b, stderr_a: (rss / (m - 2.0) / sxx).sqrt(), residual: (rss / m).sqrt() })
}

/// Per-`n` summary row of the aggregate output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    #[serde(flatten)]
    pub estimate: ConstantEstimate,
    /// Reference size `N` in reference-proxy mode; the estimator is biased
    /// upward by roughly `W₂²(μ^N, μ)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub model: Model,
    pub mode: Mode,
    pub scaling: Scaling,
    pub per_n: Vec<AggregateRow>,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
}

pub fn aggregate(cfg: &ExperimentConfig, records: &[ExperimentRecord]) -> Aggregate {
    let est = summarize(records, cfg.scaling);
    let fit = match cfg.scaling {
        Scaling::NOverLogN if est.len() >= 3 => {
            fit_log_rate(&est.iter().map(|e| (e.n, e.mean)).collect::<Vec<_>>()).ok()
        }
        _ => None,
    };
    Aggregate {
        model: cfg.model.clone(),
        mode: cfg.mode,
        scaling: cfg.scaling,
        failures: est.iter().map(|e| e.failures).sum(),
        per_n: est
            .into_iter()
            .map(|e| AggregateRow {
                reference_size: (cfg.mode == Mode::ReferenceProxy).then(|| cfg.reference_size(e.n)),
                estimate: e,
            })
            .collect(),
        fit,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes records as CSV with the [`CSV_HEADER`] columns.
pub fn write_csv<W: Write>(cfg: &ExperimentConfig, records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let f = cfg.model.factors();
    let param = |i: usize, beta: bool| fmt_opt(f.get(i).map(|p| if beta { p.beta() } else { p.alpha() }));
    let fixed = [
        cfg.model.label().to_string(),
        cfg.mode.to_string(),
        param(0, false),
        param(0, true),
        param(1, false),
        param(1, true),
    ];
    for r in records {
        let mut row: Vec<String> = fixed.to_vec();
        row.extend([
            r.n.to_string(),
            r.replica.to_string(),
            r.seed.to_string(),
            fmt_opt(r.w2sq),
            fmt_opt(r.wall_ms),
            r.status.clone(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Records plus their aggregate.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<ExperimentRecord>,
    pub aggregate: Aggregate,
}

/// Runs the experiment and writes the CSV to `output_path` when set.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    let records = run_replicas_with_threads(cfg, threads)?;
    if let Some(path) = &cfg.output_path {
        write_csv(cfg, &records, std::io::BufWriter::new(std::fs::File::create(path)?))?;
    }
    let aggregate = aggregate(cfg, &records);
    Ok(ExperimentOutput { records, aggregate })
}
