//! `ensfts`: embedding + non-stationary fuzzy time series forecasting.
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ensfts::data_io::{
    generate_synthetic_frame, load_csv, save_model, train_size, write_csv, DriftKind, SavedModel,
    SyntheticSpec, TimeSeriesFrame,
};
use ensfts::embedding::Embedder;
use ensfts::evaluation::{
    embed_window, grid_search, single_split_run, skill_score, sliding_window_eval_with,
    EvaluationReport, GridOutcome, MetricSet,
};

mod config;

use config::{GridArgs, Method, RunArgs, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "ensfts",
    version,
    about = "Forecast multivariate series with PCA/KPCA embedding and adaptive fuzzy time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sliding-window backtest; writes report.json and windows.csv
    Evaluate(RunArgs),
    /// Search kappa x w_e (x gamma); writes grid.csv and best_config.toml
    Gridsearch {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Embed the whole input to one dimension; writes embedded.csv
    Embed {
        #[command(flatten)]
        run: RunArgs,
        /// Save the fitted embedding model as JSON
        #[arg(long)]
        save_model: Option<PathBuf>,
    },
    /// Single train/test split over the whole input; writes forecast.csv
    Forecast {
        #[command(flatten)]
        run: RunArgs,
        /// Save the trained fuzzy model (state after forecasting) as JSON
        #[arg(long)]
        save_model: Option<PathBuf>,
        /// Save the fitted embedding model as JSON
        #[arg(long)]
        save_embedder: Option<PathBuf>,
    },
    /// Write a synthetic drift fixture as CSV
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// mean_shift, variance_ramp or sine_drift
    #[arg(long, default_value = "mean_shift")]
    kind: DriftKind,
    #[arg(long, default_value_t = 2000)]
    length: usize,
    /// Index where the drift starts (default: half the length)
    #[arg(long)]
    shift_at: Option<usize>,
    #[arg(long, default_value_t = 3.0)]
    magnitude: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of sensor columns; the first is the target
    #[arg(long, default_value_t = 1)]
    features: usize,
    #[arg(long, short)]
    output: PathBuf,
}

/// A failed command: the stage that failed and whether it was a usage error.
struct Failure {
    stage: &'static str,
    usage: bool,
    error: anyhow::Error,
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
    fn usage(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Stage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            stage,
            usage: false,
            error: e.into(),
        })
    }

    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            stage: "config",
            usage: true,
            error: e.into(),
        })
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Evaluate(run) => evaluate(&run),
        Command::Gridsearch { run, grid } => gridsearch(&run, &grid),
        Command::Embed { run, save_model } => embed(&run, save_model.as_deref()),
        Command::Forecast {
            run,
            save_model,
            save_embedder,
        } => forecast(&run, save_model.as_deref(), save_embedder.as_deref()),
        Command::Synth(args) => synth(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ensfts: {} failed: {:#}", f.stage, f.error);
            ExitCode::from(if f.usage { 1 } else { 2 })
        }
    }
}

fn resolve(run: &RunArgs) -> Result<RunConfig, Failure> {
    let cfg = run.resolve().usage()?;
    cfg.validate().usage()?;
    cfg.input().usage()?;
    Ok(cfg)
}

fn load(cfg: &RunConfig) -> Result<TimeSeriesFrame, Failure> {
    let path = cfg.input().usage()?;
    let frame = load_csv(path, &cfg.csv_options()).stage("load")?;
    log::info!(
        "loaded {} rows x {} columns from {}",
        frame.len(),
        frame.n_columns(),
        path.display()
    );
    Ok(frame)
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create {}", cfg.out_dir.display()))
        .stage("write")?;
    Ok(cfg.out_dir.join(name))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .stage("write")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"))
}

fn metrics_line(label: &str, m: &MetricSet) -> String {
    format!(
        "{label:<12} rmse {:>10.4}  mae {:>10.4}  mape {:>9.3}%  r2 {}",
        m.rmse,
        m.mae,
        m.mape,
        fmt_opt(m.r2)
    )
}

/// Report document: the resolved run configuration echoed next to the results.
#[derive(Serialize)]
struct RunReport<'a> {
    run_config: &'a RunConfig,
    report: &'a EvaluationReport,
}

fn evaluate(run: &RunArgs) -> CmdResult {
    let cfg = resolve(run)?;
    let frame = load(&cfg)?;
    let report = sliding_window_eval_with(
        &frame,
        &cfg.window_spec(),
        &cfg.method_config(),
        cfg.execution.into(),
    )
    .stage("evaluate")?;

    let doc = serde_json::to_string_pretty(&RunReport {
        run_config: &cfg,
        report: &report,
    })
    .stage("write")?;
    let report_path = out_path(&cfg, "report.json")?;
    write_file(&report_path, &doc)?;
    let windows_path = out_path(&cfg, "windows.csv")?;
    write_file(&windows_path, &report.windows_csv())?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} windows of {} ({} trailing rows dropped)",
        report.per_window.len(),
        cfg.window_length,
        report.rows_dropped
    );
    let _ = writeln!(out, "{}", metrics_line("model", &report.aggregate));
    let _ = writeln!(
        out,
        "{}",
        metrics_line("persistence", &report.persistence_aggregate)
    );
    for s in &report.skill {
        let _ = writeln!(
            out,
            "skill vs {} ({}): {:.4}{}",
            s.reference,
            s.metric,
            s.from_aggregate,
            s.mean_of_windows
                .map(|m| format!(" (window mean {m:.4})"))
                .unwrap_or_default()
        );
    }
    let _ = writeln!(
        out,
        "wrote {} and {}",
        report_path.display(),
        windows_path.display()
    );
    print!("{out}");
    Ok(())
}

fn gridsearch(run: &RunArgs, grid: &GridArgs) -> CmdResult {
    let mut cfg = run.resolve().usage()?;
    grid.apply(&mut cfg);
    cfg.validate_grid().usage()?;
    // Searched parameters are checked per combination; everything else up front.
    let mut probe = cfg.clone();
    probe.kappa = 5;
    probe.w_e = 1;
    probe.gamma = 1.0;
    probe.validate().usage()?;
    cfg.input().usage()?;

    let frame = load(&cfg)?;
    let source = match cfg.method {
        Method::Pca => ensfts::embedding::EmbeddingSource::Pca,
        Method::Kpca => ensfts::embedding::EmbeddingSource::Kpca,
    };
    let result = grid_search(
        &frame,
        &cfg.grid_spec(),
        &cfg.window_spec(),
        &cfg.method_config(),
        source,
        cfg.execution.into(),
    )
    .stage("gridsearch")?;

    let table_path = out_path(&cfg, "grid.csv")?;
    write_file(&table_path, &result.table_csv())?;

    for row in &result.rows {
        let gamma = row.gamma.map_or_else(|| "-".to_string(), |g| g.to_string());
        match &row.outcome {
            GridOutcome::Ok {
                aggregate,
                skill_vs_persistence,
                ..
            } => println!(
                "{:>3}  kappa {:>3}  w_e {:>2}  gamma {:>5}  rmse {:>10.4}  mae {:>10.4}  skill {}",
                row.rank,
                row.kappa,
                row.w_e,
                gamma,
                aggregate.rmse,
                aggregate.mae,
                fmt_opt(*skill_vs_persistence)
            ),
            GridOutcome::Failed { error } => println!(
                "{:>3}  kappa {:>3}  w_e {:>2}  gamma {:>5}  failed: {error}",
                row.rank, row.kappa, row.w_e, gamma
            ),
        }
    }
    let Some(best) = &result.best else {
        return Err(Failure {
            stage: "gridsearch",
            usage: false,
            error: anyhow::anyhow!("every combination failed; see {}", table_path.display()),
        });
    };
    let best_cfg = cfg.with_best(best);
    let best_path = out_path(&cfg, "best_config.toml")?;
    write_file(&best_path, &best_cfg.to_toml().stage("write")?)?;
    println!("wrote {} and {}", table_path.display(), best_path.display());
    Ok(())
}

fn timestamp_cell(frame: &TimeSeriesFrame, i: usize) -> String {
    frame
        .timestamps()
        .get(i)
        .map(|t| t.format(ensfts::data_io::TIMESTAMP_FORMAT).to_string())
        .unwrap_or_default()
}

fn save_embedder(path: &Path, embedder: &Embedder) -> CmdResult {
    let model = match embedder {
        Embedder::Pca(m) => SavedModel::Pca(m.clone()),
        Embedder::Kpca(m) => SavedModel::Kpca(m.clone()),
    };
    save_model(path, &model).stage("write")
}

fn embed(run: &RunArgs, save: Option<&Path>) -> CmdResult {
    let cfg = resolve(run)?;
    let frame = load(&cfg)?;
    let train_len = train_size(frame.len(), cfg.train_fraction).stage("embed")?;
    let we = embed_window(
        &frame,
        0,
        0,
        frame.len(),
        train_len,
        cfg.embedding_method(),
        &cfg.method_config().embedding,
    )
    .stage("embed")?;
    let normalized = we.series.normalized();

    let mut csv = String::from("index,date,split,value,normalized\n");
    for (i, v) in we.series.values.iter().enumerate() {
        let split = if i < train_len { "train" } else { "test" };
        let norm = normalized
            .as_ref()
            .map(|n| n[i].to_string())
            .unwrap_or_default();
        let _ = writeln!(csv, "{i},{},{split},{v},{norm}", timestamp_cell(&frame, i));
    }
    let path = out_path(&cfg, "embedded.csv")?;
    write_file(&path, &csv)?;
    if let Some(p) = save {
        save_embedder(p, &we.embedder)?;
    }
    println!(
        "embedded {} rows ({} train) to {}",
        frame.len(),
        train_len,
        path.display()
    );
    Ok(())
}

fn forecast(run: &RunArgs, save: Option<&Path>, save_emb: Option<&Path>) -> CmdResult {
    let cfg = resolve(run)?;
    let frame = load(&cfg)?;
    let (we, result) =
        single_split_run(&frame, cfg.train_fraction, &cfg.method_config()).stage("forecast")?;

    let mut csv = String::from("index,date,actual,forecast,persistence\n");
    for (k, ((a, f), p)) in result
        .scored_actual
        .iter()
        .zip(&result.scored_forecast)
        .zip(&result.scored_persistence)
        .enumerate()
    {
        let i = we.train_len + k;
        let _ = writeln!(csv, "{i},{},{a},{f},{p}", timestamp_cell(&frame, i));
    }
    let path = out_path(&cfg, "forecast.csv")?;
    write_file(&path, &csv)?;
    if let Some(p) = save {
        save_model(p, &SavedModel::Nsfts(result.model.clone())).stage("write")?;
    }
    if let Some(p) = save_emb {
        save_embedder(p, &we.embedder)?;
    }

    println!(
        "train {} rows, test {} rows",
        we.train_len, result.result.test_len
    );
    println!("{}", metrics_line("model", &result.result.model));
    println!(
        "{}",
        metrics_line("persistence", &result.result.persistence)
    );
    if let Ok(s) = skill_score(result.result.model.rmse, result.result.persistence.rmse) {
        println!("skill vs persistence (rmse): {s:.4}");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn synth(args: &SynthArgs) -> CmdResult {
    let spec = SyntheticSpec {
        length: args.length,
        kind: args.kind,
        shift_at: args.shift_at.unwrap_or(args.length / 2),
        magnitude: args.magnitude,
        seed: args.seed,
    };
    let frame = generate_synthetic_frame(&spec, args.features).usage()?;
    if let Some(dir) = args.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .stage("write")?;
    }
    write_csv(&frame, &args.output).stage("write")?;
    println!(
        "wrote {} rows x {} columns to {}",
        frame.len(),
        frame.n_columns(),
        args.output.display()
    );
    Ok(())
}
