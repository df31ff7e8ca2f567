#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use afcec::acagmm::normalization_table;
use afcec::data::{export_plot_data, generate, load_csv, save_model, write_csv, GeneratorSpec, Shape};
use afcec::{
    builtin_family, fit_restarts, score, AfcecModel, Dataset, EngineConfig, Error, FamilyKind,
    Init, LlMode, ParamConvention,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "afcec", version, about = "Cross-entropy clustering with curved Gaussian clusters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a CSV point set and print the fit summary as JSON.
    Fit(FitArgs),
    /// Write a synthetic point set as CSV.
    Generate(GenerateArgs),
    /// Fit k = 1..K and print log-likelihood, BIC and AIC per k as CSV.
    Sweep(SweepArgs),
    /// Integrate the parabola density over a parameter grid and print the table as CSV.
    AcagmmCheck(AcagmmArgs),
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "quadratic")]
    family: FamilyKind,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    deletion_fraction: f64,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "random")]
    init: Init,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value = "mixture")]
    ll_mode: LlMode,
    /// Parameter counting for BIC/AIC: general or paper2d.
    #[arg(long, default_value = "general")]
    convention: ParamConvention,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Initial number of clusters.
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long)]
    output_model: Option<PathBuf>,
    #[arg(long)]
    output_plot: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// circle, spiral, strokes or parametric3d.
    #[arg(long, default_value = "circle")]
    kind: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Largest k to fit.
    #[arg(long = "k-max", default_value_t = 10)]
    k_max: usize,
}

#[derive(Args)]
struct AcagmmArgs {
    /// Comma-separated parabola coefficients.
    #[arg(long, default_value = "0.25,0.5,1")]
    a_grid: String,
    /// `sigma1 list/sigma2 list`, each comma-separated.
    #[arg(long, default_value = "0.5,1/0.25,0.5")]
    sigma_grid: String,
    /// Half-width of the integration square.
    #[arg(long = "box", default_value_t = 8.0)]
    half_width: f64,
    /// Simpson segments per axis (even).
    #[arg(long, default_value_t = 500)]
    n: usize,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidConvention(_) | Error::InvalidSpec(_) => 1,
        Error::Parse { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Schema(_)
        | Error::SchemaVersionMismatch { .. }
        | Error::DimensionMismatch { .. } => 2,
        Error::NotPositiveDefinite { .. }
        | Error::RankDeficient
        | Error::DegenerateCluster(_)
        | Error::ZeroResidual(_)
        | Error::AllClustersDegenerate
        | Error::BeyondCurvatureCenter { .. } => 3,
    }
}

fn engine_config(args: &EngineArgs, k: usize, x: &Dataset) -> afcec::Result<EngineConfig> {
    if x.dim() < 2 {
        return Err(Error::InvalidConfig("input must have at least 2 columns".into()));
    }
    let mut cfg = EngineConfig::new(k, Arc::new(builtin_family(args.family, x.dim() - 1)));
    cfg.epsilon = args.epsilon;
    cfg.deletion_fraction = args.deletion_fraction;
    cfg.max_iters = args.max_iters;
    cfg.seed = args.seed;
    cfg.init = args.init;
    Ok(cfg)
}

fn check_engine_flags(args: &EngineArgs) -> afcec::Result<()> {
    if args.restarts == 0 {
        return Err(Error::InvalidConfig("--restarts must be >= 1".into()));
    }
    if !(args.epsilon > 0.0) {
        return Err(Error::InvalidConfig("--epsilon must be positive".into()));
    }
    if !(0.0..1.0).contains(&args.deletion_fraction) {
        return Err(Error::InvalidConfig("--deletion-fraction must lie in [0, 1)".into()));
    }
    if args.max_iters == 0 {
        return Err(Error::InvalidConfig("--max-iters must be >= 1".into()));
    }
    Ok(())
}

fn run_fit(args: &FitArgs) -> afcec::Result<()> {
    check_engine_flags(&args.engine)?;
    if args.k == 0 {
        return Err(Error::InvalidConfig("--k must be >= 1".into()));
    }
    let x = load_csv(&args.engine.input)?;
    let cfg = engine_config(&args.engine, args.k, &x)?;
    let (model, costs) = fit_restarts(&x, &cfg, args.engine.restarts)?;
    log::info!("restart costs: {costs:?}");
    let s = score(&x, &model, args.engine.ll_mode, args.engine.convention)?;
    if let Some(path) = &args.output_model {
        save_model(&model, path)?;
    }
    if let Some(path) = &args.output_plot {
        export_plot_data(&x, &model, path)?;
    }
    println!("{}", summary(&model, &s, args.engine.ll_mode));
    Ok(())
}

fn summary(model: &AfcecModel, s: &afcec::ModelScore, mode: LlMode) -> serde_json::Value {
    json!({
        "cost": model.cost(),
        "loglik": s.loglik,
        "ll_mode": mode,
        "n_params": s.n_params,
        "n_points": s.n_points,
        "bic": s.bic,
        "aic": s.aic,
        "k_final": model.k(),
        "deleted": model.deleted_count,
        "iterations": model.iterations,
        "converged": model.converged,
        "seed": model.seed,
    })
}

fn run_generate(args: &GenerateArgs) -> afcec::Result<()> {
    let shape = Shape::by_name(&args.kind)?;
    let x = generate(&GeneratorSpec::new(shape, args.n, args.noise, args.seed))?;
    match &args.out {
        Some(path) => write_csv(&x, BufWriter::new(File::create(path)?)),
        None => write_csv(&x, io::stdout().lock()),
    }
}

fn run_sweep(args: &SweepArgs) -> afcec::Result<()> {
    check_engine_flags(&args.engine)?;
    if args.k_max == 0 {
        return Err(Error::InvalidConfig("--k-max must be >= 1".into()));
    }
    let x = load_csv(&args.engine.input)?;
    let mut rows = Vec::with_capacity(args.k_max);
    for k in 1..=args.k_max {
        let cfg = engine_config(&args.engine, k, &x)?;
        let (model, _) = fit_restarts(&x, &cfg, args.engine.restarts)?;
        let s = score(&x, &model, args.engine.ll_mode, args.engine.convention)?;
        log::info!("k={k}: final k {}, bic {}", model.k(), s.bic);
        rows.push(format!(
            "{k},{},{},{},{},{},{}",
            model.k(),
            model.cost(),
            s.loglik,
            s.n_params,
            s.bic,
            s.aic
        ));
    }
    let mut out = io::stdout().lock();
    writeln!(out, "k,k_final,cost,loglik,n_params,bic,aic")?;
    for r in rows {
        writeln!(out, "{r}")?;
    }
    Ok(())
}

fn parse_list(s: &str, what: &str) -> afcec::Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad number `{v}` in {what}")))
        })
        .collect()
}

fn run_acagmm(args: &AcagmmArgs) -> afcec::Result<()> {
    if args.n < 2 || args.n % 2 == 1 {
        return Err(Error::InvalidConfig("--n must be an even number >= 2".into()));
    }
    let a_grid = parse_list(&args.a_grid, "--a-grid")?;
    let (s1, s2) = args.sigma_grid.split_once('/').ok_or_else(|| {
        Error::InvalidConfig("--sigma-grid must look like `s1,s1,.../s2,s2,...`".into())
    })?;
    let s1 = parse_list(s1, "--sigma-grid")?;
    let s2 = parse_list(s2, "--sigma-grid")?;
    let rows = normalization_table(&a_grid, &s1, &s2, args.half_width, args.n)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "a,sigma1,sigma2,half_width,segments,raw,corrected,excluded_mass,fold_nodes,valid"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.a,
            r.sigma1,
            r.sigma2,
            r.half_width,
            r.segments,
            r.raw,
            r.corrected,
            r.excluded_mass,
            r.fold_nodes,
            r.is_valid()
        )?;
    }
    Ok(())
}

fn configure_threads() -> afcec::Result<()> {
    let Ok(value) = std::env::var("AFCEC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("AFCEC_THREADS=`{value}` is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Generate(a) => run_generate(a),
        Command::Sweep(a) => run_sweep(a),
        Command::AcagmmCheck(a) => run_acagmm(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
