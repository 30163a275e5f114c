use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sscc_bench::cmd::{cmd_report, cmd_run, cmd_trace_gen, cmd_train, read_traces, ReportInput};
use sscc_bench::{parse_config, CliError};
use sscc_core::predictor::TrainConfig;
use sscc_core::sim::{synthetic_family, Injection, TraceParams};

#[derive(Parser)]
#[command(name = "sscc", version, about = "Coded computing experiments on a simulated cluster")]
struct Cli {
    /// Overrides the seed of the config or generator.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Log filter such as `info` or `sscc_core=debug`; SSCC_LOG wins when set.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run {
        config: PathBuf,
        /// Also dump the simulated event log.
        #[arg(long)]
        events: bool,
    },
    /// Generate a speed trace CSV.
    TraceGen(TraceGenArgs),
    /// Train speed predictors on trace files and report their MAPE.
    Train {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// JSON training settings; missing keys take their defaults.
        #[arg(long)]
        train_config: Option<PathBuf>,
    },
    /// Turn metrics and waste CSVs into tidy tables.
    Report {
        /// Metrics files as `GROUP=PATH` or `PATH`.
        metrics: Vec<ReportInput>,
        /// Per-worker waste files as `GROUP=PATH` or `PATH`.
        #[arg(long)]
        waste: Vec<ReportInput>,
        /// Strategy the latency is normalized to within each group.
        #[arg(long, default_value = "uncoded")]
        baseline: String,
    },
}

#[derive(Args)]
struct TraceGenArgs {
    /// JSON trace parameters; the flags below are ignored when given.
    #[arg(long, conflicts_with = "family")]
    params: Option<PathBuf>,
    /// The bundled predictor-comparison family.
    #[arg(long)]
    family: bool,
    #[arg(long, default_value_t = 10)]
    workers: usize,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 1.0)]
    base: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    change_prob: f64,
    #[arg(long, default_value_t = 0.2)]
    min_level: f64,
    /// Slowdown as `WORKER:FACTOR:START:END`; repeatable.
    #[arg(long, value_parser = parse_injection)]
    inject: Vec<Injection>,
    /// File name inside the output directory.
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
}

fn parse_injection(s: &str) -> Result<Injection, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [w, f, a, b] = parts[..] else {
        return Err("expected WORKER:FACTOR:START:END".into());
    };
    let bad = |what: &str| format!("bad {what} in `{s}`");
    Ok(Injection {
        worker: w.parse().map_err(|_| bad("worker"))?,
        factor: f.parse().map_err(|_| bad("factor"))?,
        start: a.parse().map_err(|_| bad("start"))?,
        end: b.parse().map_err(|_| bad("end"))?,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn trace_params(a: &TraceGenArgs) -> Result<TraceParams, CliError> {
    if let Some(p) = &a.params {
        return read_json(p);
    }
    let mut params = if a.family {
        synthetic_family(a.iterations)
    } else {
        TraceParams {
            base: vec![a.base; a.workers],
            iterations: a.iterations,
            noise: a.noise,
            change_prob: a.change_prob,
            min_level: a.min_level,
            injections: Vec::new(),
        }
    };
    params.injections = a.inject.clone();
    Ok(params)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, events } => {
            let mut cfg = parse_config(&config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let files = cmd_run(&cfg, &cli.out_dir, events)?;
            println!("{}", files.metrics.display());
        }
        Command::TraceGen(args) => {
            let params = trace_params(&args)?;
            let out = cli.out_dir.join(&args.out);
            cmd_trace_gen(&params, cli.seed.unwrap_or(0), &out)?;
            println!("{}", out.display());
        }
        Command::Train { traces, train_config } => {
            let mut cfg: TrainConfig = match &train_config {
                Some(p) => read_json(p)?,
                None => TrainConfig::default(),
            };
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let files = cmd_train(&read_traces(&traces)?, &cfg, &cli.out_dir)?;
            for r in &files.rows {
                println!("{:<10} train {:>8.3}%  test {:>8.3}%", r.predictor, r.train_mape, r.test_mape);
            }
        }
        Command::Report {
            metrics,
            waste,
            baseline,
        } => {
            let files = cmd_report(&metrics, &waste, &baseline, &cli.out_dir)?;
            println!("{}\n{}", files.latency.display(), files.waste.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = std::env::var("SSCC_LOG").unwrap_or_else(|_| cli.log_level.clone());
    env_logger::Builder::new().parse_filters(&filter).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
