//! Command-line front end.
//!
//! Every run option can also be set through an environment variable named
//! `PROBEX_` followed by the upper-case flag name with dashes replaced by
//! underscores, e.g. `PROBEX_TOTAL_BUDGET=60`. Flags win over variables.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use probex::counting::{approx_count, exact_count, CounterConfig, DEFAULT_CEILING};
use probex::encoding::{encode_target, parse_dimacs, write_dimacs, write_opb, Assumptions};
use probex::explain::{Engine, SeedSet};
use probex::io::{
    bench_table, load_instances, load_model, run_benchmark, run_explain, BenchModel, BenchOptions,
    Command, EstimatorKind, OrderKind, RunConfig, Selection,
};
use probex::model::Model;
use probex::Error;

mod exit {
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const VALIDATION: u8 = 4;
    pub const BUDGET: u8 = 5;
    pub const OTHER: u8 = 1;
}

#[derive(Parser)]
#[command(name = "probex", version, about = "Abductive and probabilistic explanations for tree ensembles and binarized networks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Explain every instance of a data file.
    Explain(ExplainArgs),
    /// Write the CNF (or OPB) encoding of a target class.
    ExportCnf(ExportArgs),
    /// Benchmark table over one or more model/data pairs.
    Bench(BenchArgs),
    /// Count the projected models of a DIMACS file.
    Count(CountArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum CommandArg {
    Axp,
    Lmpaxp,
    Ffa,
    Ffaxp,
    Lmpffaxp,
    MinpaxpOracle,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Axp => Command::Axp,
            CommandArg::Lmpaxp => Command::Lmpaxp,
            CommandArg::Ffa => Command::Ffa,
            CommandArg::Ffaxp => Command::Ffaxp,
            CommandArg::Lmpffaxp => Command::Lmpffaxp,
            CommandArg::MinpaxpOracle => Command::MinpaxpOracle,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum EstimatorArg {
    Exact,
    Amc,
    Mc,
}

#[derive(Copy, Clone, ValueEnum)]
enum OrderArg {
    Heuristic,
    Ffa,
    Lex,
}

#[derive(Copy, Clone, ValueEnum)]
enum SeedSetArg {
    All,
    Axp,
}

#[derive(Copy, Clone, ValueEnum)]
enum EngineArg {
    Sat,
    BruteForce,
}

#[derive(Copy, Clone, PartialEq, ValueEnum)]
enum ReportFormat {
    Jsonl,
    Table,
}

#[derive(Args)]
struct RunArgs {
    /// Precision threshold; defaults to 0.95, or 0.99 for networks.
    #[arg(long, env = "PROBEX_TAU")]
    tau: Option<f64>,
    #[arg(long, value_enum, default_value = "mc", env = "PROBEX_ESTIMATOR")]
    estimator: EstimatorArg,
    #[arg(long, default_value_t = 0.05, env = "PROBEX_EPSILON")]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05, env = "PROBEX_DELTA")]
    delta: f64,
    #[arg(long, default_value_t = 0, env = "PROBEX_SEED")]
    seed: u64,
    /// Seconds per oracle call.
    #[arg(long, default_value_t = 120.0, env = "PROBEX_CALL_BUDGET")]
    call_budget: f64,
    /// Seconds per instance.
    #[arg(long, default_value_t = 600.0, env = "PROBEX_TOTAL_BUDGET")]
    total_budget: f64,
    /// Largest free space counted exactly.
    #[arg(long, default_value_t = DEFAULT_CEILING, env = "PROBEX_CEILING")]
    ceiling: u64,
    #[arg(long, value_enum, default_value = "heuristic", env = "PROBEX_ORDER")]
    order: OrderArg,
    #[arg(long, value_enum, default_value = "axp", env = "PROBEX_SEED_SET")]
    seed_set: SeedSetArg,
    #[arg(long, value_enum, default_value = "sat", env = "PROBEX_ENGINE")]
    engine: EngineArg,
    /// Samples per feature for heuristic scores.
    #[arg(long, default_value_t = probex::sampling::DEFAULT_PROBE_BUDGET, env = "PROBEX_PROBE_BUDGET")]
    probe_budget: usize,
    /// Recompute heuristic scores after each deletion.
    #[arg(long, env = "PROBEX_RESCORE")]
    rescore: bool,
    /// Single deletion pass without revisiting kept features.
    #[arg(long, env = "PROBEX_NO_REVISIT")]
    no_revisit: bool,
    /// Maximum number of AXps enumerated for feature attribution.
    #[arg(long, default_value_t = 1000, env = "PROBEX_AXP_LIMIT")]
    axp_limit: usize,
    /// Omit deletion traces from the report.
    #[arg(long, env = "PROBEX_NO_TRACE")]
    no_trace: bool,
    /// Record wall-clock times (reports are then not reproducible).
    #[arg(long, env = "PROBEX_TIMINGS")]
    timings: bool,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            tau: self.tau,
            estimator: match self.estimator {
                EstimatorArg::Exact => EstimatorKind::Exact,
                EstimatorArg::Amc => EstimatorKind::Amc,
                EstimatorArg::Mc => EstimatorKind::Mc,
            },
            epsilon: self.epsilon,
            delta: self.delta,
            seed: self.seed,
            call_budget: self.call_budget,
            total_budget: self.total_budget,
            ceiling: self.ceiling,
            order: match self.order {
                OrderArg::Heuristic => OrderKind::Heuristic,
                OrderArg::Ffa => OrderKind::Ffa,
                OrderArg::Lex => OrderKind::Lex,
            },
            seed_set: match self.seed_set {
                SeedSetArg::All => SeedSet::All,
                SeedSetArg::Axp => SeedSet::Axp,
            },
            probe_budget: self.probe_budget,
            rescore: self.rescore,
            revisit: !self.no_revisit,
            engine: match self.engine {
                EngineArg::Sat => Engine::Sat,
                EngineArg::BruteForce => Engine::BruteForce,
            },
            axp_limit: self.axp_limit,
            trace: !self.no_trace,
            timings: self.timings,
        }
    }
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(value_enum)]
    command: CommandArg,
    #[arg(long, env = "PROBEX_MODEL")]
    model: PathBuf,
    #[arg(long, env = "PROBEX_DATA")]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl", env = "PROBEX_FORMAT")]
    format: ReportFormat,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Copy, Clone, ValueEnum)]
enum CnfFormat {
    Dimacs,
    Opb,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long, env = "PROBEX_MODEL")]
    model: PathBuf,
    /// Class name or index.
    #[arg(long)]
    target_class: String,
    #[arg(long, value_enum, default_value = "dimacs")]
    format: CnfFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Model file; repeat for several models.
    #[arg(long, required = true)]
    model: Vec<PathBuf>,
    /// Data file for each model, in the same order.
    #[arg(long, required = true)]
    data: Vec<PathBuf>,
    /// Number of instances drawn per model.
    #[arg(long, conflicts_with = "fraction", env = "PROBEX_COUNT")]
    count: Option<usize>,
    /// Fraction of instances drawn per model.
    #[arg(long, env = "PROBEX_FRACTION")]
    fraction: Option<f64>,
    /// Skip the attribution-based columns.
    #[arg(long)]
    no_ffa: bool,
    #[arg(long, value_enum, default_value = "table", env = "PROBEX_FORMAT")]
    format: ReportFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Copy, Clone, ValueEnum)]
enum CountMode {
    Exact,
    Amc,
}

#[derive(Args)]
struct CountArgs {
    cnf: PathBuf,
    #[arg(long, value_enum, default_value = "amc")]
    estimator: CountMode,
    #[arg(long, default_value_t = 0.8)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    #[arg(long, default_value_t = 0, env = "PROBEX_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 120.0, env = "PROBEX_CALL_BUDGET")]
    call_budget: f64,
    #[arg(long, default_value_t = 600.0, env = "PROBEX_TOTAL_BUDGET")]
    total_budget: f64,
    #[arg(long, default_value_t = DEFAULT_CEILING, env = "PROBEX_CEILING")]
    ceiling: u64,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Json(_) | Error::Csv(_) | Error::Dimacs(_) => exit::PARSE,
        e if e.is_timeout() => exit::BUDGET,
        Error::Io(_) => exit::OTHER,
        _ => exit::VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Cmd::Explain(a) => explain(a),
        Cmd::ExportCnf(a) => export(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Count(a) => count(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> probex::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn explain(a: ExplainArgs) -> probex::Result<u8> {
    let config = a.run.config();
    config.validate()?;
    let model: Arc<Model> = Arc::new(load_model(&a.model)?);
    let instances = load_instances(&a.data, &model)?;
    let report = run_explain(a.command.into(), &model, &instances, &config)?;
    let text = match a.format {
        ReportFormat::Jsonl => report.to_jsonl(),
        ReportFormat::Table => report.to_table(),
    };
    emit(a.output.as_deref(), &text)?;
    Ok(if report.aggregate.timeouts > 0 { exit::BUDGET } else { 0 })
}

fn export(a: ExportArgs) -> probex::Result<u8> {
    let model: Model = load_model(&a.model)?;
    let target = model.class_index(&a.target_class).or_else(|e| {
        a.target_class
            .parse::<usize>()
            .ok()
            .filter(|&k| k < model.num_classes())
            .ok_or(e)
    })?;
    let f = encode_target(&model, target)?;
    let text = match a.format {
        CnfFormat::Dimacs => write_dimacs(&f),
        CnfFormat::Opb => write_opb(&f),
    };
    emit(a.output.as_deref(), &text)?;
    Ok(0)
}

fn bench(a: BenchArgs) -> probex::Result<u8> {
    if a.model.len() != a.data.len() {
        return Err(Error::Parameter(format!(
            "{} models but {} data files",
            a.model.len(),
            a.data.len()
        )));
    }
    let config = a.run.config();
    config.validate()?;
    let mut models = Vec::new();
    for (m, d) in a.model.iter().zip(&a.data) {
        let model: Arc<Model> = Arc::new(load_model(m)?);
        let instances = load_instances(d, &model)?;
        let name = m.file_stem().map_or_else(|| m.display().to_string(), |s| s.to_string_lossy().into_owned());
        models.push(BenchModel { name, model, instances });
    }
    let selection = match (a.count, a.fraction) {
        (Some(k), _) => Selection::Count(k),
        (None, Some(f)) => Selection::Fraction(f),
        (None, None) => Selection::All,
    };
    let rows = run_benchmark(
        &models,
        BenchOptions {
            selection,
            ffa: !a.no_ffa,
        },
        &config,
    )?;
    let text = match a.format {
        ReportFormat::Table => bench_table(&rows),
        ReportFormat::Jsonl => rows
            .iter()
            .map(|r| serde_json::to_string(r).map(|s| s + "\n"))
            .collect::<Result<String, _>>()?,
    };
    emit(a.output.as_deref(), &text)?;
    let timeouts: usize = rows
        .iter()
        .map(|r| r.timeouts + r.ffa.as_ref().map_or(0, |f| f.timeouts))
        .sum();
    Ok(if timeouts > 0 { exit::BUDGET } else { 0 })
}

fn count(a: CountArgs) -> probex::Result<u8> {
    let f = parse_dimacs(&std::fs::read_to_string(&a.cnf)?)?;
    let positive = |name: &str, x: f64| {
        if x > 0.0 && x.is_finite() {
            Ok(std::time::Duration::from_secs_f64(x))
        } else {
            Err(Error::Parameter(format!("{name} must be positive, got {x}")))
        }
    };
    let config = CounterConfig {
        ceiling: a.ceiling,
        call_budget: Some(positive("call budget", a.call_budget)?),
        total_budget: Some(positive("total budget", a.total_budget)?),
        ..CounterConfig::default()
    };
    let none = Assumptions::default();
    let r = match a.estimator {
        CountMode::Exact => exact_count(&f, &none, &config)?,
        CountMode::Amc => approx_count(&f, &none, a.epsilon, a.delta, a.seed, &config)?,
    };
    emit(None, &(serde_json::to_string(&r.record())? + "\n"))?;
    Ok(0)
}
