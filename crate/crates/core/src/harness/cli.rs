//! The `knn-entropy` command line.
//!
//! Every option can also be given in a `--config` file as `key = value`
//! (same names, without the dashes); flags take precedence over the file.
//! Exit codes: 0 on success, 1 for usage and domain errors, 2 for I/O
//! errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use super::config::{
    parse_config, parse_f64_list, parse_usize_list, DivergenceKind, EstimatorKind,
};
use super::io::{read_sample, write_sample, SampleFormat};
use super::mixture::{mixture_csv, run_mixture, MixtureConfig};
use super::run::{kl_against_densities, run_divergence, run_estimate, EstimateRequest};
use super::sweep::{run_sweep, SweepConfig};
use super::with_workers;
use crate::error::{Error, Result};
use crate::knn::MetricKind;
use crate::reference::ReferenceDistribution;

const DEFAULT_K: usize = 5;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_REPS: usize = 100;

#[derive(Debug, Parser)]
#[command(
    name = "knn-entropy",
    version,
    about = "Nearest-neighbor estimates of Rényi, Tsallis and Shannon entropies and divergences"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate an entropy (iq, tsallis, renyi, shannon, spectrum, sharma-mittal, mi) from a sample file.
    Estimate(Options),
    /// Estimate a divergence (kl, bregman, jensen, cross-entropy, cross-iq) between two samples,
    /// or KL against named densities given with --dist (separated by ';').
    Divergence(Options),
    /// Monte Carlo sweep over q, k and N grids for a reference distribution.
    Sweep(Options),
    /// Rényi and Shannon estimates along the Student/normal mixture family.
    Mixture(Options),
    /// Write a sample from a reference distribution.
    Gen(Options),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Flat key = value file with defaults for any option below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sample file (CSV or binary).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Second sample file for divergences.
    #[arg(long)]
    pub input2: Option<PathBuf>,
    /// Distribution spec, e.g. normal:m=3,sigma2=1 or student:nu=5.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub estimator: Option<String>,
    /// Order q (comma-separated list for sweeps).
    #[arg(long)]
    pub q: Option<String>,
    /// Neighbor rank k; sweeps accept lists and ranges such as 1..20.
    #[arg(long)]
    pub k: Option<String>,
    /// Sample size(s).
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub reps: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// euclidean or mahalanobis.
    #[arg(long)]
    pub metric: Option<String>,
    /// csv, json or bin, depending on the command.
    #[arg(long)]
    pub format: Option<String>,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub workers: Option<String>,
    /// Second order of the Sharma–Mittal entropy.
    #[arg(long)]
    pub s: Option<String>,
    /// Number of leading coordinates forming the first block for mi.
    #[arg(long)]
    pub split: Option<String>,
    /// Mixture weights for the mixture experiment.
    #[arg(long)]
    pub beta: Option<String>,
}

const KEYS: &[&str] = &[
    "input",
    "input2",
    "dist",
    "estimator",
    "q",
    "k",
    "n",
    "reps",
    "seed",
    "metric",
    "format",
    "out",
    "workers",
    "s",
    "split",
    "beta",
];

/// Options merged from flags and the config file.
struct Settings {
    values: BTreeMap<&'static str, String>,
}

impl Settings {
    fn new(opts: &Options) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = &opts.config {
            let file = parse_config(&fs::read_to_string(path)?)?;
            for (key, value) in file {
                let known = KEYS
                    .iter()
                    .find(|k| **k == key)
                    .ok_or_else(|| Error::Parse(format!("unknown config key '{key}'")))?;
                values.insert(*known, value);
            }
        }
        let flags: [(&'static str, Option<String>); 16] = [
            (
                "input",
                opts.input.as_ref().map(|p| p.display().to_string()),
            ),
            (
                "input2",
                opts.input2.as_ref().map(|p| p.display().to_string()),
            ),
            ("dist", opts.dist.clone()),
            ("estimator", opts.estimator.clone()),
            ("q", opts.q.clone()),
            ("k", opts.k.clone()),
            ("n", opts.n.clone()),
            ("reps", opts.reps.clone()),
            ("seed", opts.seed.clone()),
            ("metric", opts.metric.clone()),
            ("format", opts.format.clone()),
            ("out", opts.out.as_ref().map(|p| p.display().to_string())),
            ("workers", opts.workers.clone()),
            ("s", opts.s.clone()),
            ("split", opts.split.clone()),
            ("beta", opts.beta.clone()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                values.insert(key, v);
            }
        }
        Ok(Self { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.raw(key)
            .ok_or_else(|| Error::Parse(format!("missing required option --{key}")))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| Error::Parse(format!("invalid value '{v}' for --{key}")))
            })
            .transpose()
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.raw(key).map(PathBuf::from)
    }

    fn metric(&self) -> Result<MetricKind> {
        self.raw("metric")
            .map_or(Ok(MetricKind::Euclidean), MetricKind::from_str)
    }

    fn single_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => match parse_f64_list(v)?.as_slice() {
                [x] => Ok(Some(*x)),
                _ => Err(Error::Parse(format!("--{key} takes a single value here"))),
            },
        }
    }

    fn single_k(&self) -> Result<usize> {
        match self.raw("k") {
            None => Ok(DEFAULT_K),
            Some(v) => match parse_usize_list(v)?.as_slice() {
                [k] => Ok(*k),
                _ => Err(Error::Parse("--k takes a single value here".into())),
            },
        }
    }

    fn workers(&self) -> Result<Option<usize>> {
        self.parsed("workers")
    }
}

fn emit(settings: &Settings, bytes: &[u8]) -> Result<()> {
    match settings.path("out") {
        Some(path) => fs::write(path, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn emit_json(settings: &Settings, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    emit(settings, text.as_bytes())
}

fn read_input(settings: &Settings, key: &str) -> Result<crate::sample::SampleMatrix> {
    read_sample(Path::new(settings.require(key)?))
}

fn with_fields(result: impl serde::Serialize, extra: &[(&str, Value)]) -> Result<Value> {
    let mut value = serde_json::to_value(result).map_err(|e| Error::Parse(e.to_string()))?;
    if let Value::Object(map) = &mut value {
        for (k, v) in extra {
            map.insert((*k).to_string(), v.clone());
        }
    }
    Ok(value)
}

fn estimate(settings: &Settings) -> Result<()> {
    let x = read_input(settings, "input")?;
    let estimator: EstimatorKind = settings.require("estimator")?.parse()?;
    let req = EstimateRequest {
        estimator,
        q: settings.single_f64("q")?,
        k: settings.single_k()?,
        metric: settings.metric()?,
        s: settings.single_f64("s")?,
        split: settings.parsed("split")?,
    };
    let start = Instant::now();
    let result = run_estimate(&x, &req)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    emit_json(
        settings,
        &with_fields(
            &result,
            &[
                ("estimator", json!(estimator.as_str())),
                ("timing_ms", json!(ms)),
            ],
        )?,
    )
}

fn divergence(settings: &Settings) -> Result<()> {
    let f = read_input(settings, "input")?;
    let kind: DivergenceKind = settings.raw("estimator").unwrap_or("kl").parse()?;
    let k = settings.single_k()?;
    let metric = settings.metric()?;
    let start = Instant::now();
    let value = match (settings.raw("input2"), settings.raw("dist")) {
        (Some(_), Some(_)) => {
            return Err(Error::Parse(
                "give either --input2 or --dist, not both".into(),
            ))
        }
        (Some(_), None) => {
            let g = read_input(settings, "input2")?;
            let result = run_divergence(&f, &g, kind, settings.single_f64("q")?, k, metric)?;
            with_fields(&result, &[("estimator", json!(kind.as_str()))])?
        }
        (None, Some(specs)) => {
            if kind != DivergenceKind::Kl {
                return Err(Error::Parse(
                    "--dist is only supported with the kl estimator".into(),
                ));
            }
            let densities = specs
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| Ok((s.to_string(), s.parse::<ReferenceDistribution>()?)))
                .collect::<Result<Vec<_>>>()?;
            with_fields(kl_against_densities(&f, &densities, k, metric)?, &[])?
        }
        (None, None) => return Err(Error::Parse("divergence needs --input2 or --dist".into())),
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    emit_json(settings, &with_fields(value, &[("timing_ms", json!(ms))])?)
}

fn sweep(settings: &Settings) -> Result<()> {
    let estimator: EstimatorKind = settings.require("estimator")?.parse()?;
    let cfg = SweepConfig {
        dist: settings.require("dist")?.parse()?,
        estimator,
        qs: match settings.raw("q") {
            Some(v) => parse_f64_list(v)?,
            None if estimator.uses_q() => {
                return Err(Error::Parse("missing required option --q".into()))
            }
            None => Vec::new(),
        },
        ks: parse_usize_list(settings.raw("k").unwrap_or("5"))?,
        ns: parse_usize_list(settings.require("n")?)?,
        reps: settings.parsed("reps")?.unwrap_or(DEFAULT_REPS),
        seed: settings.parsed("seed")?.unwrap_or(DEFAULT_SEED),
        metric: settings.metric()?,
        s: settings.single_f64("s")?,
    };
    cfg.validate()?;
    let report = with_workers(settings.workers()?, || run_sweep(&cfg))??;
    match settings.raw("format").unwrap_or("csv") {
        "csv" => emit(settings, report.table.to_csv().as_bytes()),
        "json" => emit_json(
            settings,
            &json!({ "rows": report.table.rows, "skipped": report.skipped }),
        ),
        other => Err(Error::Parse(format!(
            "sweep output format must be csv or json, got '{other}'"
        ))),
    }
}

fn mixture(settings: &Settings) -> Result<()> {
    let defaults = MixtureConfig::default();
    let cfg = MixtureConfig {
        betas: settings
            .raw("beta")
            .map(parse_f64_list)
            .transpose()?
            .unwrap_or(defaults.betas),
        n: settings.parsed("n")?.unwrap_or(defaults.n),
        k: settings
            .raw("k")
            .map(|_| settings.single_k())
            .transpose()?
            .unwrap_or(defaults.k),
        q: settings.single_f64("q")?.unwrap_or(defaults.q),
        reps: settings.parsed("reps")?.unwrap_or(defaults.reps),
        seed: settings.parsed("seed")?.unwrap_or(defaults.seed),
        metric: settings.metric()?,
    };
    let rows = with_workers(settings.workers()?, || run_mixture(&cfg))??;
    match settings.raw("format").unwrap_or("csv") {
        "csv" => emit(settings, mixture_csv(&rows).as_bytes()),
        "json" => emit_json(settings, &json!(rows)),
        other => Err(Error::Parse(format!(
            "mixture output format must be csv or json, got '{other}'"
        ))),
    }
}

fn gen(settings: &Settings) -> Result<()> {
    let dist: ReferenceDistribution = settings.require("dist")?.parse()?;
    let n: usize = settings
        .parsed("n")?
        .ok_or_else(|| Error::Parse("missing required option --n".into()))?;
    let seed = settings.parsed("seed")?.unwrap_or(DEFAULT_SEED);
    let format: SampleFormat = settings.raw("format").unwrap_or("csv").parse()?;
    let x = dist.sample(n, seed)?;
    let mut bytes = Vec::new();
    write_sample(&x, format, &mut bytes)?;
    emit(settings, &bytes)
}

fn dispatch(command: &Command) -> Result<()> {
    let (opts, f): (&Options, fn(&Settings) -> Result<()>) = match command {
        Command::Estimate(o) => (o, estimate),
        Command::Divergence(o) => (o, divergence),
        Command::Sweep(o) => (o, sweep),
        Command::Mixture(o) => (o, mixture),
        Command::Gen(o) => (o, gen),
    };
    f(&Settings::new(opts)?)
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => 2,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
