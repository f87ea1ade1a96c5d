//! Command-line front end for the feature subset selection toolkit.
//!
//! Subcommands: `precompute` (distance tensor cache), `select` (MSTS and/or
//! wrapper selection with test evaluation), `trace` (merit-versus-accuracy
//! rows for every candidate subset), `compare-tabular` (original versus
//! prediction-based merit on a categorical dataset), and `benchmark` (one
//! summary row per dataset from a manifest).
//!
//! Exit codes: 0 success, 2 input or parse error, 3 runtime error.

mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use msts_core::classify::{cv_accuracy, test_accuracy, EvalMode};
use msts_core::dataset::{load_split, parse_ts, stratified_subsample, TimeSeriesDataset};
use msts_core::dtw::WarpingParams;
use msts_core::folds::{effective_fold_count, make_folds, FoldAssignment};
use msts_core::pipeline::{run_msts, run_wrapper};
use msts_core::selection::SelectionResult;
use msts_core::tabular::parse_tabular;
use msts_core::tensor::{compute_distance_tensor, dataset_fingerprint, load_tensor, save_tensor, DistanceTensor};
use msts_core::cfs::compare_random_subsets;

use report::{join_subset, method_name, trace_csv, ConfigEcho, MethodReports, RunReport};

#[derive(Parser)]
#[command(name = "msts", version, about = "Feature subset selection for multivariate time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute and cache the per-feature pairwise DTW distance tensor
    Precompute(PrecomputeArgs),
    /// Run feature selection and evaluate on a test split
    Select(SelectArgs),
    /// Export merit and CV accuracy for every candidate subset
    Trace(TraceArgs),
    /// Correlate original and prediction-based merit on tabular data
    CompareTabular(CompareTabularArgs),
    /// Run selection over every dataset in a manifest
    Benchmark(BenchmarkArgs),
}

#[derive(clap::Args)]
struct PrecomputeArgs {
    /// training split in .ts format
    #[arg(long)]
    train: PathBuf,
    /// cache file to write
    #[arg(long)]
    cache: PathBuf,
    /// Sakoe-Chiba band half-width in samples (unconstrained if absent)
    #[arg(long)]
    window: Option<usize>,
    /// z-normalize each channel before computing distances
    #[arg(long)]
    normalize: bool,
}

#[derive(clap::Args)]
struct SelectArgs {
    /// training split in .ts format
    #[arg(long)]
    train: PathBuf,
    /// test split in .ts format
    #[arg(long)]
    test: PathBuf,
    /// which selection strategy to run
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    /// distance tensor cache (loaded if valid, rebuilt otherwise)
    #[arg(long)]
    cache: PathBuf,
    /// cross-validation folds (capped at the smallest class size)
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// seed for the stratified fold shuffle
    #[arg(long, default_value_t = 0)]
    fold_seed: u64,
    /// stratified fraction of the training set to keep
    #[arg(long, default_value_t = 1.0)]
    train_fraction: f64,
    /// seed for the training subsample
    #[arg(long, default_value_t = 0)]
    subsample_seed: u64,
    /// how subset distances are evaluated on the test split
    #[arg(long, value_enum, default_value_t = ModeArg::LookupSum)]
    mode: ModeArg,
    /// Sakoe-Chiba band half-width in samples (unconstrained if absent)
    #[arg(long)]
    window: Option<usize>,
    /// z-normalize each channel first
    #[arg(long)]
    normalize: bool,
    /// report file to write
    #[arg(long)]
    out: PathBuf,
    /// report format
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(clap::Args)]
struct TraceArgs {
    /// training split in .ts format
    #[arg(long)]
    train: PathBuf,
    /// distance tensor cache (loaded if valid, rebuilt otherwise)
    #[arg(long)]
    cache: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    fold_seed: u64,
    #[arg(long, default_value_t = 1.0)]
    train_fraction: f64,
    #[arg(long, default_value_t = 0)]
    subsample_seed: u64,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    normalize: bool,
    /// CSV file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct CompareTabularArgs {
    /// categorical dataset, one comma-separated row per instance
    #[arg(long)]
    data: PathBuf,
    /// zero-based index of the class column
    #[arg(long)]
    label_col: usize,
    /// size of every sampled subset
    #[arg(long, default_value_t = 5)]
    subset_size: usize,
    /// how many distinct subsets to sample
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// subset sampling seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    fold_seed: u64,
    /// optional JSON file for the paired scores
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchmarkArgs {
    /// CSV manifest with header `name,train,test`, paths relative to it
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    fold_seed: u64,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    normalize: bool,
    /// optional file for the summary CSV (always printed to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Msts,
    Wrapper,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    LookupSum,
    Dependent,
}

impl ModeArg {
    fn eval_mode(self) -> EvalMode {
        match self {
            ModeArg::LookupSum => EvalMode::LookupSum,
            ModeArg::Dependent => EvalMode::Dependent,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeArg::LookupSum => "lookup-sum",
            ModeArg::Dependent => "dependent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

/// Errors split by phase so the exit code reflects where things failed.
#[derive(Debug)]
enum CliError {
    Input(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

fn input<E: fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn runtime<E: fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Precompute(args) => cmd_precompute(&args),
        Command::Select(args) => cmd_select(&args),
        Command::Trace(args) => cmd_trace(&args),
        Command::CompareTabular(args) => cmd_compare_tabular(&args),
        Command::Benchmark(args) => cmd_benchmark(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

/// Load the training split and apply normalization and subsampling in the
/// order the distances will see them.
fn load_train(
    path: &Path,
    normalize: bool,
    fraction: f64,
    subsample_seed: u64,
) -> Result<TimeSeriesDataset, CliError> {
    let mut ds = parse_ts(&read_file(path)?).map_err(input)?;
    if normalize {
        ds = ds.z_normalized();
    }
    if fraction < 1.0 {
        ds = stratified_subsample(&ds, fraction, subsample_seed).map_err(input)?;
    } else if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(input(format!("train fraction {fraction} outside (0, 1]")));
    }
    Ok(ds)
}

/// Fetch the tensor from cache when its fingerprint matches, otherwise
/// compute it and refresh the cache. Returns whether the cache was hit.
fn load_or_compute_tensor(
    train: &TimeSeriesDataset,
    params: WarpingParams,
    cache: &Path,
) -> Result<(DistanceTensor, bool), CliError> {
    let fingerprint = dataset_fingerprint(train, params);
    if cache.exists() {
        match load_tensor(cache, fingerprint) {
            Ok(t) => return Ok((t, true)),
            Err(e) => eprintln!(
                "warning: cache {} is unusable ({e}); recomputing",
                cache.display()
            ),
        }
    }
    let t = compute_distance_tensor(train, params).map_err(runtime)?;
    save_tensor(&t, cache).map_err(runtime)?;
    Ok((t, false))
}

/// Build folds at the effective count, warning when stratification forces
/// a reduction.
fn build_folds(labels: &[usize], requested_k: usize, seed: u64) -> Result<FoldAssignment, CliError> {
    let k = effective_fold_count(labels, requested_k);
    if k < requested_k {
        eprintln!("warning: smallest class supports only {k} folds (requested {requested_k})");
    }
    make_folds(labels, k, seed).map_err(input)
}

fn cmd_precompute(args: &PrecomputeArgs) -> Result<(), CliError> {
    let train = load_train(&args.train, args.normalize, 1.0, 0)?;
    let params = WarpingParams { window: args.window };
    let fingerprint = dataset_fingerprint(&train, params);
    if args.cache.exists() {
        match load_tensor(&args.cache, fingerprint) {
            Ok(_) => {
                println!("cache hit: {} (fingerprint {fingerprint:016x})", args.cache.display());
                return Ok(());
            }
            Err(e) => eprintln!(
                "warning: cache {} is unusable ({e}); recomputing",
                args.cache.display()
            ),
        }
    }
    let t = compute_distance_tensor(&train, params).map_err(runtime)?;
    save_tensor(&t, &args.cache).map_err(runtime)?;
    println!(
        "wrote cache: {} ({} features x {} instances, fingerprint {fingerprint:016x})",
        args.cache.display(),
        t.n_features,
        t.n_instances
    );
    Ok(())
}

/// Everything `select` and `benchmark` share once the data is in memory.
struct SelectionRun {
    msts: Option<SelectionResult>,
    wrapper: Option<SelectionResult>,
    benchmark_accuracy: f64,
    n_features: usize,
    effective_k: usize,
}

#[allow(clippy::too_many_arguments)]
fn run_selection(
    train: &TimeSeriesDataset,
    test: &TimeSeriesDataset,
    tensor: &DistanceTensor,
    method: MethodArg,
    mode: EvalMode,
    params: WarpingParams,
    k: usize,
    fold_seed: u64,
) -> Result<SelectionRun, CliError> {
    let folds = build_folds(train.labels(), k, fold_seed)?;
    let evaluate = |subset: &[usize]| -> Result<f64, CliError> {
        test_accuracy(train, test, subset, params, mode).map_err(runtime)
    };

    let msts = if matches!(method, MethodArg::Msts | MethodArg::Both) {
        let (mut result, _) = run_msts(tensor, train.labels(), &folds).map_err(runtime)?;
        result.test_accuracy = Some(evaluate(&result.subset)?);
        Some(result)
    } else {
        None
    };
    let wrapper = if matches!(method, MethodArg::Wrapper | MethodArg::Both) {
        let mut result = run_wrapper(tensor, train.labels(), &folds).map_err(runtime)?;
        result.test_accuracy = Some(evaluate(&result.subset)?);
        Some(result)
    } else {
        None
    };

    let all: Vec<usize> = (0..train.n_features()).collect();
    Ok(SelectionRun {
        msts,
        wrapper,
        benchmark_accuracy: evaluate(&all)?,
        n_features: train.n_features(),
        effective_k: folds.k,
    })
}

fn cmd_select(args: &SelectArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let train_text = read_file(&args.train)?;
    let test_text = read_file(&args.test)?;
    let (mut train, mut test) = load_split(&train_text, &test_text).map_err(input)?;
    if args.normalize {
        train = train.z_normalized();
        test = test.z_normalized();
    }
    if args.train_fraction < 1.0 {
        train = stratified_subsample(&train, args.train_fraction, args.subsample_seed)
            .map_err(input)?;
    } else if !(args.train_fraction > 0.0 && args.train_fraction <= 1.0) {
        return Err(input(format!(
            "train fraction {} outside (0, 1]",
            args.train_fraction
        )));
    }
    let params = WarpingParams { window: args.window };
    let (tensor, _) = load_or_compute_tensor(&train, params, &args.cache)?;

    let run = run_selection(
        &train,
        &test,
        &tensor,
        args.method,
        args.mode.eval_mode(),
        params,
        args.k,
        args.fold_seed,
    )?;

    for result in [&run.msts, &run.wrapper].into_iter().flatten() {
        println!(
            "{}: subset [{}] ({} of {} features), test accuracy {:.4}, cpu {:.3}s",
            method_name(result.method),
            join_subset(&result.subset),
            result.subset.len(),
            run.n_features,
            result.test_accuracy.unwrap_or(f64::NAN),
            result.cpu_time_seconds
        );
    }
    println!(
        "benchmark (all {} features): test accuracy {:.4}",
        run.n_features, run.benchmark_accuracy
    );

    let report = RunReport {
        config: ConfigEcho {
            train: args.train.display().to_string(),
            test: Some(args.test.display().to_string()),
            method: format!("{:?}", args.method).to_lowercase(),
            mode: args.mode.name().to_string(),
            k: args.k,
            effective_k: run.effective_k,
            fold_seed: args.fold_seed,
            window: args.window,
            train_fraction: args.train_fraction,
            subsample_seed: args.subsample_seed,
            normalize: args.normalize,
            cache: args.cache.display().to_string(),
            out: args.out.display().to_string(),
            format: match args.format {
                FormatArg::Json => "json".into(),
                FormatArg::Csv => "csv".into(),
            },
        },
        methods: MethodReports {
            msts: run.msts,
            wrapper: run.wrapper,
        },
        benchmark_accuracy: run.benchmark_accuracy,
        n_features: run.n_features,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let rendered = match args.format {
        FormatArg::Json => report.to_json(),
        FormatArg::Csv => report.to_csv(),
    };
    write_file(&args.out, &rendered)?;
    println!("report written to {}", args.out.display());
    Ok(())
}

fn cmd_trace(args: &TraceArgs) -> Result<(), CliError> {
    let train = load_train(&args.train, args.normalize, args.train_fraction, args.subsample_seed)?;
    let params = WarpingParams { window: args.window };
    let (tensor, _) = load_or_compute_tensor(&train, params, &args.cache)?;
    let folds = build_folds(train.labels(), args.k, args.fold_seed)?;

    let (result, candidates) = run_msts(&tensor, train.labels(), &folds).map_err(runtime)?;
    let mut accuracies = Vec::with_capacity(candidates.len());
    for c in &candidates {
        accuracies.push(cv_accuracy(&tensor, train.labels(), &c.subset, &folds).map_err(runtime)?);
    }
    let csv = trace_csv(&candidates, &result.trace, &accuracies);
    write_file(&args.out, &csv)?;
    let rows = csv.lines().count() - 1;
    println!(
        "trace written to {} ({rows} candidate rows, selected subset [{}])",
        args.out.display(),
        join_subset(&result.subset)
    );
    Ok(())
}

fn cmd_compare_tabular(args: &CompareTabularArgs) -> Result<(), CliError> {
    let tds = parse_tabular(&read_file(&args.data)?, args.label_col).map_err(input)?;
    let folds = build_folds(tds.labels(), args.k, args.fold_seed)?;
    let comparison = compare_random_subsets(&tds, args.subset_size, args.count, args.seed, &folds)
        .map_err(input)?;
    println!(
        "pearson r = {:.4} over {} subsets of size {}",
        comparison.pearson_r, args.count, args.subset_size
    );
    if let Some(out) = &args.out {
        let mut rendered =
            serde_json::to_string_pretty(&comparison).expect("comparison serializes");
        rendered.push('\n');
        write_file(out, &rendered)?;
        println!("scores written to {}", out.display());
    }
    Ok(())
}

const BENCHMARK_HEADER: &str = "dataset,msts_accuracy,wrapper_accuracy,msts_cpu_seconds,wrapper_cpu_seconds,benchmark_accuracy,msts_features,wrapper_features";

fn benchmark_row(
    name: &str,
    train_path: &Path,
    test_path: &Path,
    args: &BenchmarkArgs,
) -> Result<String, CliError> {
    let train_text = read_file(train_path)?;
    let test_text = read_file(test_path)?;
    let (mut train, mut test) = load_split(&train_text, &test_text).map_err(input)?;
    if args.normalize {
        train = train.z_normalized();
        test = test.z_normalized();
    }
    let params = WarpingParams { window: args.window };
    let tensor = compute_distance_tensor(&train, params).map_err(runtime)?;
    let run = run_selection(
        &train,
        &test,
        &tensor,
        MethodArg::Both,
        EvalMode::LookupSum,
        params,
        args.k,
        args.fold_seed,
    )?;
    let msts = run.msts.expect("both methods requested");
    let wrapper = run.wrapper.expect("both methods requested");
    Ok(format!(
        "{name},{},{},{},{},{},{}/{n},{}/{n}",
        msts.test_accuracy.unwrap_or(f64::NAN),
        wrapper.test_accuracy.unwrap_or(f64::NAN),
        msts.cpu_time_seconds,
        wrapper.cpu_time_seconds,
        run.benchmark_accuracy,
        msts.subset.len(),
        wrapper.subset.len(),
        n = run.n_features
    ))
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<(), CliError> {
    let manifest_text = read_file(&args.manifest)?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let mut lines = manifest_text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some("name,train,test") => {}
        other => {
            return Err(input(format!(
                "manifest must start with header 'name,train,test', found {:?}",
                other.unwrap_or("")
            )))
        }
    }

    let mut out = String::from(BENCHMARK_HEADER);
    out.push('\n');
    for (idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(input(format!(
                "manifest row {} has {} fields, expected 3",
                idx + 2,
                fields.len()
            )));
        }
        let (name, train, test) = (fields[0], base.join(fields[1]), base.join(fields[2]));
        let row = match benchmark_row(name, &train, &test, args) {
            Ok(row) => row,
            // a broken dataset gets an in-row marker; the run continues
            Err(e) => format!("{name},error:{},,,,,,", e.to_string().replace(',', ";")),
        };
        out.push_str(&row);
        out.push('\n');
    }
    print!("{out}");
    if let Some(path) = &args.out {
        write_file(path, &out)?;
        eprintln!("summary written to {}", path.display());
    }
    Ok(())
}
