use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use upcross_core::diag::{default_block_sizes, default_quantiles};
use upcross_core::io::{
    ingest_returns, read_series_csv, write_series_csv, ColumnSelector, ReturnsIngestConfig,
};
use upcross_core::mc::{path_grid, sample_path_with_workers, SamplePath};
use upcross_core::{
    blocks_estimator_with_ci, diag_grid, run_study_with_workers, simulate, BlockScheme, Error,
    EstimatorConfig, McConfig, OrderStatistics, ProcessKind, ProcessSpec, ThresholdSpec,
    TimeSeries, RNG_ALGORITHM, VERSION,
};

#[derive(Parser)]
#[command(
    name = "upcross",
    version,
    about = "Upcrossings index estimation and Monte Carlo studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Blocks,
    Dj,
    Sl,
    Runs,
    Ei,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Transform {
    None,
    Abs,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the upcrossings index of a series
    Estimate {
        #[arg(long)]
        input: PathBuf,
        /// Column name or 0-based index; defaults to `value`, else the last column
        #[arg(long)]
        column: Option<String>,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Block length(s) for blocks, dj and sl
        #[arg(long, value_delimiter = ',')]
        r: Vec<usize>,
        /// Run length(s) for runs
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// abs:U, q:P or top:S; repeatable
        #[arg(long = "threshold")]
        thresholds: Vec<ThresholdSpec>,
        /// Adds thresholds top:1, top:1+S, ... up to top:n-1
        #[arg(long)]
        sweep_stride: Option<usize>,
        /// Confidence level of the blocks interval
        #[arg(long)]
        ci: Option<f64>,
        #[arg(long, value_enum, default_value = "none")]
        transform: Transform,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a benchmark process
    Simulate {
        /// iid, mm, ar1, mar1, ar2 or garch
        #[arg(long)]
        process: String,
        /// Comma separated key=value pairs, e.g. alpha=0.9
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Proportions checking the runs condition over a quantile x block grid
    Diagnose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: Option<String>,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        quantiles: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        blocks: Vec<usize>,
        #[arg(long, value_enum, default_value = "none")]
        transform: Transform,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo study from a JSON config
    Mc {
        #[arg(long)]
        config: PathBuf,
        /// Report file; JSON when it ends in .json, CSV otherwise
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean and RMSE along top order statistic thresholds
    Path {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        stride: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Turn a price column into scaled log-returns
    IngestReturns {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100.0)]
        scale: f64,
        /// Keep zero returns
        #[arg(long)]
        keep_nulls: bool,
    },
}

fn echo_header(command: &str) {
    eprintln!("# upcross {VERSION} {command}");
    eprintln!("# rng: {RNG_ALGORITHM}");
}

fn workers() -> Result<usize> {
    match std::env::var("UPCROSS_THREADS") {
        Ok(v) => {
            let w: usize = v
                .trim()
                .parse()
                .with_context(|| format!("UPCROSS_THREADS={v:?} is not a positive integer"))?;
            if w == 0 {
                bail!("UPCROSS_THREADS must be at least 1");
            }
            Ok(w)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_series(path: &Path, column: Option<&str>, transform: Transform) -> Result<TimeSeries> {
    let column = column.map(|c| c.parse::<ColumnSelector>().expect("infallible"));
    let series = read_series_csv(path, column.as_ref())
        .with_context(|| format!("reading {}", path.display()))?;
    eprintln!("# input: {} (n = {})", path.display(), series.len());
    match transform {
        Transform::None => Ok(series),
        Transform::Abs => {
            eprintln!("# transform: abs");
            Ok(series.map(f64::abs)?)
        }
    }
}

fn estimator_configs(method: MethodArg, r: &[usize], k: &[usize]) -> Result<Vec<EstimatorConfig>> {
    let need = |v: &[usize], flag: &str| {
        if v.is_empty() {
            bail!("--method needs --{flag}")
        }
        Ok(v.to_vec())
    };
    let configs: Vec<EstimatorConfig> = match method {
        MethodArg::Blocks => need(r, "r")?
            .into_iter()
            .map(|r| EstimatorConfig::Blocks { r })
            .collect(),
        MethodArg::Dj => need(r, "r")?
            .into_iter()
            .map(|r| EstimatorConfig::Disjoint { r })
            .collect(),
        MethodArg::Sl => need(r, "r")?
            .into_iter()
            .map(|r| EstimatorConfig::Sliding { r })
            .collect(),
        MethodArg::Runs => need(k, "k")?
            .into_iter()
            .map(|k| EstimatorConfig::Runs { k })
            .collect(),
        MethodArg::Ei => vec![EstimatorConfig::ExtremalIndex],
    };
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

fn undefined_note(e: &Error) -> &'static str {
    match e {
        Error::NoUpcrossings => "no_upcrossings",
        Error::AllBlocksExceed => "all_blocks_exceed",
        Error::InsufficientExceedances(_) => "insufficient_exceedances",
        _ => "insufficient_variability",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    input: &Path,
    column: Option<&str>,
    method: MethodArg,
    r: &[usize],
    k: &[usize],
    mut thresholds: Vec<ThresholdSpec>,
    sweep_stride: Option<usize>,
    ci: Option<f64>,
    transform: Transform,
    out: Option<&Path>,
) -> Result<()> {
    echo_header("estimate");
    let series = load_series(input, column, transform)?;
    let configs = estimator_configs(method, r, k)?;
    if ci.is_some() && method != MethodArg::Blocks {
        bail!("--ci is only available for --method blocks");
    }
    if let Some(stride) = sweep_stride {
        if stride == 0 {
            bail!("--sweep-stride must be at least 1");
        }
        thresholds.extend(
            path_grid(series.len(), stride)
                .into_iter()
                .map(ThresholdSpec::TopOrder),
        );
    }
    if thresholds.is_empty() {
        bail!("give at least one --threshold or --sweep-stride");
    }
    let order = OrderStatistics::new(&series);
    let resolved = thresholds
        .iter()
        .map(|t| order.resolve(t).with_context(|| format!("threshold {t}")))
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<String> = configs.iter().map(ToString::to_string).collect();
    eprintln!("# estimators: {}", names.join(" "));
    if let Some(level) = ci {
        eprintln!("# ci level: {level}");
    }
    if sweep_stride.is_none() {
        for (t, u) in thresholds.iter().zip(&resolved) {
            eprintln!("# threshold {t} -> u = {u}");
        }
    } else {
        eprintln!("# thresholds: {} resolved", thresholds.len());
    }

    let mut csv = String::from(
        "method,param,threshold,u,estimate,n_upcrossings,std_error,ci_lo,ci_hi,note\n",
    );
    for cfg in &configs {
        for (t, &u) in thresholds.iter().zip(&resolved) {
            let result = match (*cfg, ci) {
                (EstimatorConfig::Blocks { r }, Some(level)) => BlockScheme::for_series(r, &series)
                    .and_then(|b| blocks_estimator_with_ci(&series, u, &b, level)),
                _ => cfg.evaluate(&series, u),
            };
            let param = cfg.param().map_or_else(String::new, |p| p.to_string());
            let prefix = format!("{},{param},{t},{u}", cfg.method_name());
            match result {
                Ok(est) => {
                    let note = if est.exceeds_unit() {
                        "exceeds_one"
                    } else {
                        ""
                    };
                    let (lo, hi) = est.ci.map_or((None, None), |(lo, hi)| (Some(lo), Some(hi)));
                    let note = if ci.is_some() && est.ci.is_none() {
                        "ci_unavailable"
                    } else {
                        note
                    };
                    writeln!(
                        csv,
                        "{prefix},{},{},{},{},{},{note}",
                        est.value,
                        est.n_upcrossings,
                        opt(est.std_error),
                        opt(lo),
                        opt(hi)
                    )?;
                }
                Err(e) if e.is_undefined_estimate() => {
                    writeln!(csv, "{prefix},NA,NA,NA,NA,NA,{}", undefined_note(&e))?;
                }
                Err(e) => return Err(e).with_context(|| format!("{cfg} at {t}")),
            }
        }
    }
    emit(out, &csv)
}

fn parse_params(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut params = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .with_context(|| format!("parameter {item:?} is not key=value"))?;
        let value: f64 = value
            .trim()
            .parse()
            .with_context(|| format!("parameter {key}: {value:?} is not a number"))?;
        params.insert(key.trim().to_string(), value);
    }
    Ok(params)
}

fn cmd_simulate(
    process: &str,
    params: &str,
    n: usize,
    seed: u64,
    burn_in: Option<usize>,
    out: &Path,
) -> Result<()> {
    echo_header("simulate");
    let kind = ProcessKind::from_name(process, &parse_params(params)?)?;
    let mut spec = ProcessSpec::new(kind, n, seed);
    if let Some(b) = burn_in {
        spec = spec.with_burn_in(b);
    }
    eprintln!("# process: {}", serde_json::to_string(&spec)?);
    let series = simulate(&spec)?;
    write_series_csv(out, series.values())?;
    eprintln!("# wrote {} values to {}", series.len(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_diagnose(
    input: &Path,
    column: Option<&str>,
    k: usize,
    quantiles: Vec<f64>,
    blocks: Vec<usize>,
    transform: Transform,
    out: Option<&Path>,
) -> Result<()> {
    echo_header("diagnose");
    let series = load_series(input, column, transform)?;
    let quantiles = if quantiles.is_empty() {
        default_quantiles()
    } else {
        quantiles
    };
    let blocks = if blocks.is_empty() {
        default_block_sizes()
    } else {
        blocks
    };
    let grid = diag_grid(&series, &quantiles, &blocks, k)?;
    eprintln!("# k = {k}, block sizes {blocks:?}");
    for (p, u) in grid.quantiles.iter().zip(&grid.thresholds) {
        eprintln!("# threshold q:{p} -> u = {u}");
    }
    match grid.mean_defined() {
        Some(m) => eprintln!("# mean over defined cells: {m}"),
        None => eprintln!("# no cell is defined"),
    }
    emit(out, &grid.to_csv())
}

fn load_config(path: &Path) -> Result<McConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = McConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    cfg.validate()?;
    eprintln!("# config: {}", serde_json::to_string(&cfg)?);
    eprintln!("# true eta: {}", cfg.true_eta()?);
    Ok(cfg)
}

fn cmd_mc(config: &Path, out: &Path) -> Result<()> {
    echo_header("mc");
    let cfg = load_config(config)?;
    let workers = workers()?;
    eprintln!("# workers: {workers}");
    let report = run_study_with_workers(&cfg, workers)?;
    let text = if out.extension().is_some_and(|e| e == "json") {
        report.to_json()
    } else {
        report.to_csv()
    };
    emit(Some(out), &text)?;
    eprintln!("# wrote {} cells to {}", report.cells.len(), out.display());
    Ok(())
}

fn cmd_path(config: &Path, stride: usize, out: &Path) -> Result<()> {
    echo_header("path");
    let cfg = load_config(config)?;
    let workers = workers()?;
    eprintln!("# workers: {workers}, stride: {stride}");
    let mut csv = format!("{}\n", SamplePath::CSV_HEADER);
    for est in &cfg.estimators {
        sample_path_with_workers(&cfg, est, stride, workers)?.csv_rows(&mut csv);
    }
    emit(Some(out), &csv)
}

fn cmd_ingest(input: &Path, column: &str, out: &Path, scale: f64, keep_nulls: bool) -> Result<()> {
    echo_header("ingest-returns");
    let cfg = ReturnsIngestConfig {
        scale,
        drop_nulls: !keep_nulls,
        ..ReturnsIngestConfig::new(input, column.parse().expect("infallible"))
    };
    eprintln!(
        "# input: {}, column {}, scale {}, drop nulls {}",
        input.display(),
        cfg.column,
        cfg.scale,
        cfg.drop_nulls
    );
    let outcome = ingest_returns(&cfg)?;
    for row in &outcome.rejected {
        eprintln!(
            "# rejected line {}: {:?} ({})",
            row.line, row.field, row.reason
        );
    }
    write_series_csv(out, &outcome.returns)?;
    eprintln!(
        "# {} prices, {} null returns dropped, {} returns written to {}",
        outcome.prices_used,
        outcome.nulls_dropped,
        outcome.returns.len(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Estimate {
            input,
            column,
            method,
            r,
            k,
            thresholds,
            sweep_stride,
            ci,
            transform,
            out,
        } => cmd_estimate(
            &input,
            column.as_deref(),
            method,
            &r,
            &k,
            thresholds,
            sweep_stride,
            ci,
            transform,
            out.as_deref(),
        ),
        Command::Simulate {
            process,
            params,
            n,
            seed,
            burn_in,
            out,
        } => cmd_simulate(&process, &params, n, seed, burn_in, &out),
        Command::Diagnose {
            input,
            column,
            k,
            quantiles,
            blocks,
            transform,
            out,
        } => cmd_diagnose(
            &input,
            column.as_deref(),
            k,
            quantiles,
            blocks,
            transform,
            out.as_deref(),
        ),
        Command::Mc { config, out } => cmd_mc(&config, &out),
        Command::Path {
            config,
            stride,
            out,
        } => cmd_path(&config, stride, &out),
        Command::IngestReturns {
            input,
            column,
            out,
            scale,
            keep_nulls,
        } => cmd_ingest(&input, &column, &out, scale, keep_nulls),
    }
}
