//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use dmt_core::dataset::znormalize;
use dmt_core::{Method, Model, NormalizationStats, Value, VotingScheme};

use crate::config::{Command, RunConfig, Settings};
use crate::error::{DmtError, Result};
use crate::format::{load_model, save_model};
use crate::harness::{ExperimentReport, Harness, NormalizationMode};
use crate::io::{self, load_named, write_atomic, NamedDataset, RawTable};
use crate::report::{load_accuracy_columns, render_report, render_wilcoxon, Provenance};

#[derive(Debug, Parser)]
#[command(name = "dmt", version, about = "Diversified multiple-tree classifiers and robustness benchmarks")]
pub struct Cli {
    /// TOML file with default settings; flags and DMT_* variables override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Train one model and write it with its normalization sidecar.
    Train(Settings),
    /// Classify the rows of a file with a saved model.
    Predict(Settings),
    #[command(subcommand)]
    Benchmark(Bench),
    #[command(subcommand)]
    Stats(Stats),
}

#[derive(Debug, Subcommand)]
pub enum Bench {
    /// Train on each --train file, test on each other --test file.
    CrossLab(Settings),
    /// Accuracy of every method at every --noise-frac, on paired noised copies.
    Sweep(Settings),
    /// Stratified cross-validation on each --train file.
    Cv(Settings),
}

#[derive(Debug, Subcommand)]
pub enum Stats {
    /// One-sided signed-rank tests between accuracy columns of --input.
    Wilcoxon(Settings),
}

/// Resolve settings from the parsed command line, the environment and the
/// optional config file.
pub fn resolve(cli: Cli, env: impl Fn(&str) -> Option<String>) -> Result<RunConfig> {
    let (command, flags) = match cli.command {
        Cmd::Train(s) => (Command::Train, s),
        Cmd::Predict(s) => (Command::Predict, s),
        Cmd::Benchmark(Bench::CrossLab(s)) => (Command::CrossLab, s),
        Cmd::Benchmark(Bench::Sweep(s)) => (Command::Sweep, s),
        Cmd::Benchmark(Bench::Cv(s)) => (Command::Cv, s),
        Cmd::Stats(Stats::Wilcoxon(s)) => (Command::Wilcoxon, s),
    };
    let file = match &cli.config {
        Some(p) => Settings::from_toml_file(p)?,
        None => Settings::default(),
    };
    let (env_settings, notes) = Settings::from_env(env)?;
    RunConfig::resolve(command, flags, env_settings, file, notes)
}

/// Run a resolved command. Diagnostics go to `err`; results go to the
/// configured output file, or to `out` when there is none.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    for n in &cfg.notes {
        writeln!(err, "note: {n}").map_err(|e| DmtError::io("<stderr>", e))?;
    }
    match cfg.command {
        Command::Train => train(cfg, err),
        Command::Predict => predict(cfg, out, err),
        Command::CrossLab | Command::Sweep | Command::Cv => benchmark(cfg, out, err),
        Command::Wilcoxon => wilcoxon(cfg, out, err),
    }
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn normalization_path(model: &Path) -> PathBuf {
    sidecar(model, ".norm.csv")
}

pub fn config_echo_path(out: &Path) -> PathBuf {
    sidecar(out, ".config.toml")
}

fn echo(cfg: &RunConfig, err: &mut dyn Write) -> Result<()> {
    match &cfg.settings.out {
        Some(out) => write_atomic(&config_echo_path(out), cfg.echo().as_bytes()),
        None => err
            .write_all(cfg.echo().as_bytes())
            .map_err(|e| DmtError::io("<stderr>", e)),
    }
}

fn emit(cfg: &RunConfig, text: &str, out: &mut dyn Write) -> Result<()> {
    match &cfg.settings.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(|e| DmtError::io("<stdout>", e)),
    }
}

fn class_col(cfg: &RunConfig) -> &str {
    cfg.settings.class_col.as_deref().unwrap_or("class")
}

fn train(cfg: &RunConfig, err: &mut dyn Write) -> Result<()> {
    let data = load_named(&cfg.settings.train[0], class_col(cfg))?;
    let method = cfg.methods()?.remove(0);
    let opts = cfg.harness_options()?;
    let (d, stats) = match opts.normalization {
        NormalizationMode::None => (data.data, None),
        _ => {
            let (d, s) = znormalize(&data.data)?;
            (d, Some(s))
        }
    };
    let model = Harness::new(opts)?.fit(&method, &d, cfg.seed())?;
    let path = cfg.settings.out.as_ref().expect("validated");
    save_model(path, &model, &method.descriptor())?;
    let norm = normalization_path(path);
    if let Some(s) = &stats {
        write_atomic(&norm, &io::normalization_to_csv(s))?;
    } else if norm.exists() {
        std::fs::remove_file(&norm).map_err(|e| DmtError::io(&norm, e))?;
    }
    echo(cfg, err)?;
    writeln!(
        err,
        "trained {} on `{}` ({} rows); tree sizes {:?}",
        method.label(),
        data.name,
        d.n_rows(),
        model.tree_sizes()
    )
    .map_err(|e| DmtError::io("<stderr>", e))
}

fn normalize_row(row: &mut [Value], model: &Model, stats: &NormalizationStats) {
    for (v, attr) in row.iter_mut().zip(model.schema().attributes()) {
        if let (Value::Num(x), Some(s)) = (*v, stats.get(&attr.name)) {
            *v = Value::Num(if s.stddev > 0.0 { (x - s.mean) / s.stddev } else { 0.0 });
        }
    }
}

fn predict(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let model_path = cfg.settings.model.as_ref().expect("validated");
    let (model, _) = load_model(model_path)?;
    let norm = normalization_path(model_path);
    let stats = if norm.exists() {
        Some(io::load_normalization(&norm)?)
    } else {
        None
    };
    let table = RawTable::read(&cfg.settings.test[0])?;
    let io::SchemaRows { mut rows, labels } = io::table_rows_for_schema(&table, model.schema(), class_col(cfg))?;
    let classes = model.schema().classes().to_vec();
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| DmtError::Render(e.to_string());
    let mut header = vec!["row".to_string(), "predicted".to_string()];
    header.extend(classes.iter().map(|c| format!("weight:{c}")));
    if labels.is_some() {
        header.push("actual".into());
    }
    w.write_record(&header).map_err(csv_err)?;
    let mut hits = 0;
    for (i, row) in rows.iter_mut().enumerate() {
        if let Some(s) = &stats {
            normalize_row(row, &model, s);
        }
        let vote = model.classify(row)?;
        let predicted = &classes[vote.winner as usize];
        let mut record = vec![i.to_string(), predicted.clone()];
        record.extend(vote.weights.iter().map(|&x| io::format_number(x)));
        if let Some(l) = &labels {
            hits += usize::from(l[i] == *predicted);
            record.push(l[i].clone());
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| DmtError::Render(e.to_string()))?;
    emit(cfg, std::str::from_utf8(&bytes).expect("utf-8"), out)?;
    echo(cfg, err)?;
    if labels.is_some() && !rows.is_empty() {
        writeln!(err, "accuracy {:.4} ({hits}/{})", hits as f64 / rows.len() as f64, rows.len())
            .map_err(|e| DmtError::io("<stderr>", e))?;
    }
    Ok(())
}

fn provenance(cfg: &RunConfig, methods: &[Method]) -> Provenance {
    let mut p = vec![("command".to_string(), format!("dmt {}", cfg.command.as_str()))];
    if cfg.seed_generated {
        p.push(("seed source".into(), "generated".into()));
    }
    if methods
        .iter()
        .any(|m| matches!(m, Method::Dmt { scheme: VotingScheme::Support, .. }))
    {
        p.push((
            "note".into(),
            "support votes weight each leaf by its training coverage / n; support-fp weights by false positives / n".into(),
        ));
    }
    p
}

fn benchmark(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let s = &cfg.settings;
    let methods = cfg.methods()?;
    let harness = Harness::new(cfg.harness_options()?)?;
    let class_col = class_col(cfg);
    let trains: Vec<NamedDataset> = s.train.iter().map(|p| load_named(p, class_col)).collect::<Result<_>>()?;
    let tests: Vec<NamedDataset> = s.test.iter().map(|p| load_named(p, class_col)).collect::<Result<_>>()?;
    let trials = s.trials.expect("resolved");
    let seed = cfg.seed();
    let mut reports: Vec<ExperimentReport> = Vec::new();
    if cfg.command == Command::Cv {
        for d in &trains {
            reports.extend(harness.run_cv(d, &methods, s.folds.expect("resolved"), seed)?);
        }
    } else {
        for (tp, train) in s.train.iter().zip(&trains) {
            for (sp, test) in s.test.iter().zip(&tests) {
                if same_file(tp, sp) {
                    continue;
                }
                reports.extend(match cfg.command {
                    Command::Sweep => harness.run_noise_sweep(train, test, &methods, &s.noise_frac, trials, seed)?,
                    _ => {
                        let noise = s.noise_frac.first().map(|&f| (f, trials));
                        harness.run_cross_lab(train, test, &methods, noise, seed)?
                    }
                });
            }
        }
    }
    for w in reports.iter().flat_map(|r| &r.warnings).collect::<std::collections::BTreeSet<_>>() {
        writeln!(err, "warning: {w}").map_err(|e| DmtError::io("<stderr>", e))?;
    }
    let text = render_report(&reports, cfg.format()?, &provenance(cfg, &methods))?;
    emit(cfg, &text, out)?;
    echo(cfg, err)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn wilcoxon(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let input = cfg.settings.input.as_ref().expect("validated");
    let cols = load_accuracy_columns(input)?;
    let extra = vec![("input".to_string(), input.display().to_string())];
    let text = render_wilcoxon(&cols, cfg.format()?, &extra)?;
    emit(cfg, &text, out)?;
    echo(cfg, err)
}
