//! Orchestration of explanation runs and the benchmark harness.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::report::{Aggregate, Command, EvidenceRecord, Record, Report, Status, StepRecord};
use crate::error::{Error, Result};
use crate::explain::{min_paxp_bruteforce, Explainer, Explanation, FfaReport, SeedSet};
use crate::model::{ExplanationProblem, Model};
use crate::scalar::Scalar;
use crate::seed;
use crate::space::Instance;

/// Runs `command` on every instance; ids are 1-based input positions.
pub fn run_explain<T: Scalar>(
    command: Command,
    model: &Arc<Model<T>>,
    instances: &[Instance],
    config: &RunConfig,
) -> Result<Report> {
    let indexed: Vec<(usize, &Instance)> = instances.iter().enumerate().map(|(i, x)| (i + 1, x)).collect();
    run_indexed(command, model, &indexed, config)
}

fn run_indexed<T: Scalar>(
    command: Command,
    model: &Arc<Model<T>>,
    instances: &[(usize, &Instance)],
    config: &RunConfig,
) -> Result<Report> {
    config.validate()?;
    let records = instances
        .iter()
        .map(|&(id, inst)| explain_instance(command, model, id, inst, config))
        .collect();
    Ok(Report::new(command, records))
}

/// Per-instance master seed.
pub fn instance_seed(master: u64, id: usize) -> u64 {
    seed::derive_seed(master, &[seed::tag("instance"), id as u64])
}

struct Outcome {
    explanation: Explanation,
    reference: Option<usize>,
    ffa: Option<FfaReport>,
}

fn explain_instance<T: Scalar>(
    command: Command,
    model: &Arc<Model<T>>,
    id: usize,
    inst: &Instance,
    config: &RunConfig,
) -> Record {
    let start = Instant::now();
    let mut rec = Record {
        id,
        values: inst.values.clone(),
        label: model.classes.get(inst.label).cloned().unwrap_or_else(|| inst.label.to_string()),
        command,
        status: Status::Ok,
        kind: None,
        features: Vec::new(),
        names: Vec::new(),
        length: 0,
        reference_length: None,
        ratio: None,
        precision: None,
        evidence: None,
        complete: false,
        trace: Vec::new(),
        ffa: None,
        error: None,
        elapsed_ms: None,
    };
    let outcome = ExplanationProblem::new(Arc::clone(model), inst.clone()).and_then(|problem| {
        let mut ex = Explainer::with_config(problem, config.counter());
        ex.deadline = Some(start + config.total());
        run_command(&mut ex, command, config, instance_seed(config.seed, id))
    });
    match outcome {
        Ok(o) => fill(&mut rec, model, o, config),
        Err(e) if e.is_timeout() => rec.status = Status::Timeout,
        Err(e) => {
            rec.status = Status::Error;
            rec.error = Some(e.to_string());
        }
    }
    let elapsed = start.elapsed();
    if rec.status == Status::Ok && (!rec.complete || elapsed > config.total()) {
        rec.status = Status::Timeout;
    }
    if config.timings {
        rec.elapsed_ms = Some(millis(elapsed));
    }
    rec
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn run_command<T: Scalar>(
    ex: &mut Explainer<T>,
    command: Command,
    config: &RunConfig,
    seed: u64,
) -> Result<Outcome> {
    let m = ex.problem().space().num_features();
    let lex: Vec<usize> = (0..m).collect();
    let model = Arc::clone(&ex.problem().model);
    let opts = config.lmpaxp_options(&model.classifier, seed);
    let plain = |explanation| Outcome {
        explanation,
        reference: None,
        ffa: None,
    };
    Ok(match command {
        Command::Axp => plain(ex.extract_axp(&lex, config.engine)?),
        Command::Lmpaxp => {
            let axp = ex.extract_axp(&lex, config.engine)?;
            let start = match config.seed_set {
                SeedSet::Axp => axp.features.clone(),
                SeedSet::All => ex.problem().space().all_features(),
            };
            Outcome {
                explanation: ex.extract_lmpaxp_from(&start, &opts)?,
                reference: Some(axp.len()),
                ffa: None,
            }
        }
        Command::Ffa | Command::Ffaxp => {
            let report = ex.ffa_report(config.axp_limit, config.engine)?;
            Outcome {
                explanation: ex.ffaxp(&report),
                reference: None,
                ffa: Some(report),
            }
        }
        Command::Lmpffaxp => {
            let report = ex.ffa_report(config.axp_limit, config.engine)?;
            let ffaxp = ex.ffaxp(&report);
            Outcome {
                explanation: ex.extract_lmpffaxp(&opts, &report)?,
                reference: Some(ffaxp.len()),
                ffa: Some(report),
            }
        }
        Command::MinpaxpOracle => plain(min_paxp_bruteforce(ex.problem(), opts.tau, config.ceiling)?),
    })
}

fn fill<T: Scalar>(rec: &mut Record, model: &Model<T>, o: Outcome, config: &RunConfig) {
    let e = o.explanation;
    let space = &model.space;
    rec.kind = (rec.command != Command::Ffa).then_some(e.kind);
    rec.features = e.features.iter().copied().collect();
    rec.names = rec.features.iter().map(|&f| space.name(f).to_string()).collect();
    rec.length = e.len();
    rec.complete = e.complete;
    rec.reference_length = o.reference;
    rec.ratio = o.reference.map(|r| {
        if r == 0 {
            100.0
        } else {
            100.0 * e.len() as f64 / r as f64
        }
    });
    match &e.precision {
        Some(ev) => {
            rec.precision = Some(ev.value::<f64>());
            rec.evidence = Some(EvidenceRecord::from(ev));
        }
        // Weak AXps entail the prediction.
        None if e.tau.is_none() && e.complete => rec.precision = Some(1.0),
        None => {}
    }
    if config.trace {
        rec.trace = e.trace.iter().map(StepRecord::from).collect();
    }
    rec.ffa = o.ffa.map(|r| r.values());
}

/// Which instances of each model a benchmark uses.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    All,
    Count(usize),
    Fraction(f64),
}

impl Selection {
    /// Selected 1-based ids out of `n`, ascending; drawn with `seed` when
    /// only part of the data is used.
    pub fn pick(self, n: usize, seed: u64) -> Result<Vec<usize>> {
        let k = match self {
            Selection::All => n,
            Selection::Count(k) => k.min(n),
            Selection::Fraction(f) if f > 0.0 && f <= 1.0 => ((n as f64 * f).ceil() as usize).min(n),
            Selection::Fraction(f) => {
                return Err(Error::Parameter(format!("instance fraction must lie in (0, 1], got {f}")))
            }
        };
        let mut ids: Vec<usize> = (1..=n).collect();
        if k < n {
            ids.shuffle(&mut seed::rng(seed::derive_seed(seed, &[seed::tag("selection")])));
            ids.truncate(k);
            ids.sort_unstable();
        }
        Ok(ids)
    }
}

pub struct BenchModel<T: Scalar = f64> {
    pub name: String,
    pub model: Arc<Model<T>>,
    pub instances: Vec<Instance>,
}

/// One benchmark row. Times are in milliseconds and present only when
/// timings are enabled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: String,
    pub instances: usize,
    pub len_axp: Option<f64>,
    pub time_axp: Option<f64>,
    pub len_lmpaxp: Option<f64>,
    pub ratio: Option<f64>,
    pub precision: Option<f64>,
    pub time: Option<f64>,
    pub timeouts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ffa: Option<FfaColumns>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfaColumns {
    pub len_ffaxp: Option<f64>,
    pub time_ffaxp: Option<f64>,
    pub len_lmpffaxp: Option<f64>,
    pub ratio: Option<f64>,
    pub precision: Option<f64>,
    pub time: Option<f64>,
    pub timeouts: usize,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BenchOptions {
    pub selection: Selection,
    /// Also run the FFA pipeline.
    pub ffa: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            selection: Selection::All,
            ffa: true,
        }
    }
}

pub fn run_benchmark<T: Scalar>(
    models: &[BenchModel<T>],
    options: BenchOptions,
    config: &RunConfig,
) -> Result<Vec<BenchRow>> {
    if models.is_empty() {
        return Err(Error::Parameter("benchmark needs at least one model".into()));
    }
    config.validate()?;
    models
        .iter()
        .map(|bm| {
            let ids = options
                .selection
                .pick(bm.instances.len(), seed::derive_seed(config.seed, &[seed::tag(&bm.name)]))?;
            let chosen: Vec<(usize, &Instance)> = ids.iter().map(|&i| (i, &bm.instances[i - 1])).collect();
            let run = |c| run_indexed(c, &bm.model, &chosen, config).map(|r| r.aggregate);
            let axp = run(Command::Axp)?;
            let lmp = run(Command::Lmpaxp)?;
            let ffa = if options.ffa {
                let ffaxp = run(Command::Ffaxp)?;
                let lmpffa = run(Command::Lmpffaxp)?;
                Some(FfaColumns {
                    len_ffaxp: ffaxp.mean_length,
                    time_ffaxp: ffaxp.mean_time_ms,
                    len_lmpffaxp: lmpffa.mean_length,
                    ratio: lmpffa.mean_ratio,
                    precision: lmpffa.mean_precision,
                    time: lmpffa.mean_time_ms,
                    timeouts: lmpffa.timeouts,
                })
            } else {
                None
            };
            Ok(row(&bm.name, chosen.len(), &axp, &lmp, ffa))
        })
        .collect()
}

fn row(name: &str, n: usize, axp: &Aggregate, lmp: &Aggregate, ffa: Option<FfaColumns>) -> BenchRow {
    BenchRow {
        model: name.to_string(),
        instances: n,
        len_axp: axp.mean_length,
        time_axp: axp.mean_time_ms,
        len_lmpaxp: lmp.mean_length,
        ratio: lmp.mean_ratio,
        precision: lmp.mean_precision,
        time: lmp.mean_time_ms,
        timeouts: lmp.timeouts,
        ffa,
    }
}

/// Benchmark rows as a fixed-width table.
pub fn bench_table(rows: &[BenchRow]) -> String {
    let f = |x: Option<f64>, d: usize| x.map_or_else(|| "-".to_string(), |v| format!("{v:.d$}"));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>5} | {:>7} {:>9} | {:>7} {:>6} {:>6} {:>9} {:>4} | {:>7} {:>7} {:>6} {:>6} {:>9} {:>4}",
        "model", "n", "Len", "Time", "Len", "%", "Prec", "Time", "#TO", "LenFFA", "Len", "%", "Prec", "Time", "#TO"
    );
    for r in rows {
        let _ = write!(
            out,
            "{:<16} {:>5} | {:>7} {:>9} | {:>7} {:>6} {:>6} {:>9} {:>4} |",
            r.model,
            r.instances,
            f(r.len_axp, 2),
            f(r.time_axp, 1),
            f(r.len_lmpaxp, 2),
            f(r.ratio, 1),
            f(r.precision, 3),
            f(r.time, 1),
            r.timeouts
        );
        match &r.ffa {
            Some(c) => {
                let _ = writeln!(
                    out,
                    " {:>7} {:>7} {:>6} {:>6} {:>9} {:>4}",
                    f(c.len_ffaxp, 2),
                    f(c.len_lmpffaxp, 2),
                    f(c.ratio, 1),
                    f(c.precision, 3),
                    f(c.time, 1),
                    c.timeouts
                );
            }
            None => out.push_str(" -\n"),
        }
    }
    out
}
