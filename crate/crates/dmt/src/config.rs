//! Run configuration: command-line flags, `DMT_*` environment variables and
//! an optional TOML file, merged in that order of precedence over built-in
//! defaults.
//!
//! Only `DMT_JOBS`, `DMT_FORMAT` and `DMT_CLASS_COL` are read from the
//! environment. A seed is never taken from the environment; `DMT_SEED` is
//! reported as ignored.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dmt_core::{Method, VotingScheme};

use crate::error::{DmtError, Result};
use crate::harness::{parse_sigma_source, HarnessOptions, NormalizationMode};
use crate::report::OutputFormat;

pub const ENV_PREFIX: &str = "DMT_";

/// Every configurable key. The same keys are accepted on the command line
/// (as `--kebab-case` flags) and in config files (as `snake_case` keys), and
/// the resolved echo uses them too, so an echo can be fed back as a file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    /// Training data file (repeat for several).
    #[arg(long)]
    pub train: Vec<PathBuf>,
    /// Test data file (repeat for several).
    #[arg(long)]
    pub test: Vec<PathBuf>,
    /// Model file to read (predict).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Accuracy table to test (stats).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Name of the class column.
    #[arg(long)]
    pub class_col: Option<String>,
    /// c45, dmt, bagging, adaboost, random_forest, random_tree or majority (repeatable).
    #[arg(long)]
    pub method: Vec<String>,
    /// Trees per DMT model (repeat to run several sizes).
    #[arg(long)]
    pub k: Vec<usize>,
    /// DMT voting scheme: simple, laplace, support or support-fp.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Members of bagging, random forest and random tree ensembles.
    #[arg(long)]
    pub members: Option<usize>,
    /// AdaBoost rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Fraction of continuous attributes to noise (repeat for a sweep).
    #[arg(long)]
    pub noise_frac: Vec<f64>,
    /// Noised copies per fraction.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Seed for every random choice; generated and echoed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// table, delimited or json.
    #[arg(long)]
    pub format: Option<String>,
    /// train-stats, per-dataset or none.
    #[arg(long)]
    pub normalization: Option<String>,
    /// Noise scale source: clean-test or training.
    #[arg(long)]
    pub sigma_source: Option<String>,
}

impl Settings {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| DmtError::io(path, e))?;
        toml::from_str(&text).map_err(|e| DmtError::Config(format!("{}: {e}", path.display())))
    }

    /// Fill every unset field of `self` from `lower`.
    pub fn or(mut self, lower: Settings) -> Settings {
        fn list<T>(a: &mut Vec<T>, b: Vec<T>) {
            if a.is_empty() {
                *a = b;
            }
        }
        list(&mut self.train, lower.train);
        list(&mut self.test, lower.test);
        list(&mut self.method, lower.method);
        list(&mut self.k, lower.k);
        list(&mut self.noise_frac, lower.noise_frac);
        macro_rules! one {
            ($($f:ident),*) => { $( if self.$f.is_none() { self.$f = lower.$f; } )* };
        }
        one!(model, input, class_col, scheme, members, rounds, trials, folds, seed, jobs, out, format, normalization, sigma_source);
        self
    }

    /// Settings taken from `DMT_*` variables, plus notes about ignored ones.
    pub fn from_env(get: impl Fn(&str) -> Option<String>) -> Result<(Settings, Vec<String>)> {
        let mut s = Settings::default();
        let mut notes = Vec::new();
        let var = |name: &str| get(&format!("{ENV_PREFIX}{name}"));
        if let Some(v) = var("JOBS") {
            s.jobs = Some(
                v.parse()
                    .map_err(|_| DmtError::Config(format!("{ENV_PREFIX}JOBS=`{v}` is not a count")))?,
            );
        }
        s.format = var("FORMAT");
        s.class_col = var("CLASS_COL");
        if var("SEED").is_some() {
            notes.push(format!("{ENV_PREFIX}SEED is ignored; pass --seed or set `seed` in a config file"));
        }
        Ok((s, notes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Train,
    Predict,
    CrossLab,
    Sweep,
    Cv,
    Wilcoxon,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Train => "train",
            Command::Predict => "predict",
            Command::CrossLab => "benchmark cross-lab",
            Command::Sweep => "benchmark sweep",
            Command::Cv => "benchmark cv",
            Command::Wilcoxon => "stats wilcoxon",
        }
    }
}

pub const DEFAULT_SWEEP: [f64; 11] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Seed for runs that did not specify one.
pub fn generated_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64);
    // keep seeds short enough to retype
    (nanos ^ (std::process::id() as u64).rotate_left(32)) % 1_000_000_007
}

/// A fully materialized configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub settings: Settings,
    pub seed_generated: bool,
    pub notes: Vec<String>,
}

impl RunConfig {
    /// Merge the layers, apply defaults and validate.
    pub fn resolve(command: Command, flags: Settings, env: Settings, file: Settings, notes: Vec<String>) -> Result<Self> {
        let mut s = flags.or(env).or(file);
        let seed_generated = s.seed.is_none();
        let d = &mut s;
        d.class_col.get_or_insert_with(|| "class".into());
        if d.method.is_empty() {
            d.method = match command {
                Command::Train => vec!["dmt".into()],
                _ => vec!["c45".into(), "dmt".into()],
            };
        }
        if d.k.is_empty() {
            d.k = vec![7];
        }
        d.scheme.get_or_insert_with(|| "simple".into());
        d.members.get_or_insert(dmt_core::model::DEFAULT_MEMBERS);
        d.rounds.get_or_insert(dmt_core::model::DEFAULT_MEMBERS);
        if d.noise_frac.is_empty() && command == Command::Sweep {
            d.noise_frac = DEFAULT_SWEEP.to_vec();
        }
        d.trials.get_or_insert(100);
        d.folds.get_or_insert(10);
        d.seed.get_or_insert_with(generated_seed);
        d.jobs.get_or_insert_with(default_jobs);
        d.format.get_or_insert_with(|| "table".into());
        d.normalization.get_or_insert_with(|| "train-stats".into());
        d.sigma_source.get_or_insert_with(|| "clean-test".into());
        let cfg = RunConfig {
            command,
            settings: s,
            seed_generated,
            notes,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let s = &self.settings;
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(DmtError::Config(what.into())) };
        match self.command {
            Command::Train => {
                need(s.train.len() == 1, "train needs exactly one --train file")?;
                need(s.method.len() == 1, "train takes exactly one --method")?;
                need(s.k.len() == 1, "train takes exactly one --k")?;
                need(s.out.is_some(), "train needs --out for the model file")?;
            }
            Command::Predict => {
                need(s.test.len() == 1, "predict needs exactly one --test file")?;
                need(s.model.is_some(), "predict needs --model")?;
            }
            Command::CrossLab | Command::Sweep => {
                need(!s.train.is_empty(), "benchmark needs --train")?;
                need(!s.test.is_empty(), "benchmark needs --test")?;
                if self.command == Command::CrossLab {
                    need(s.noise_frac.len() <= 1, "cross-lab takes at most one --noise-frac; use sweep")?;
                }
            }
            Command::Cv => need(!s.train.is_empty(), "cv needs --train")?,
            Command::Wilcoxon => need(s.input.is_some(), "wilcoxon needs --input")?,
        }
        for p in s.train.iter().chain(&s.test).chain(&s.model).chain(&s.input) {
            need(p.is_file(), &format!("no such file: {}", p.display()))?;
        }
        if let Some(out) = &s.out {
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                need(parent.is_dir(), &format!("output directory does not exist: {}", parent.display()))?;
            }
        }
        need(s.jobs.unwrap() >= 1, "jobs must be >= 1")?;
        need(s.trials.unwrap() >= 1, "trials must be >= 1")?;
        need(s.folds.unwrap() >= 2, "folds must be >= 2")?;
        for f in &s.noise_frac {
            need((0.0..=1.0).contains(f), &format!("noise fraction {f} outside [0, 1]"))?;
        }
        self.format()?;
        self.harness_options()?;
        if self.command != Command::Predict {
            self.methods()?;
        }
        Ok(())
    }

    pub fn format(&self) -> Result<OutputFormat> {
        let f = self.settings.format.as_deref().unwrap_or("table");
        OutputFormat::parse(f).ok_or_else(|| DmtError::Config(format!("unknown format `{f}`")))
    }

    pub fn scheme(&self) -> Result<VotingScheme> {
        let s = self.settings.scheme.as_deref().unwrap_or("simple");
        VotingScheme::parse(s).ok_or_else(|| DmtError::Config(format!("unknown voting scheme `{s}`")))
    }

    pub fn harness_options(&self) -> Result<HarnessOptions> {
        let n = self.settings.normalization.as_deref().unwrap_or("train-stats");
        let g = self.settings.sigma_source.as_deref().unwrap_or("clean-test");
        Ok(HarnessOptions {
            normalization: NormalizationMode::parse(n)
                .ok_or_else(|| DmtError::Config(format!("unknown normalization `{n}`")))?,
            sigma_source: parse_sigma_source(g)
                .ok_or_else(|| DmtError::Config(format!("unknown sigma source `{g}`")))?,
            jobs: self.settings.jobs.unwrap_or(1),
        })
    }

    pub fn seed(&self) -> u64 {
        self.settings.seed.expect("resolved")
    }

    /// Method list; `dmt` expands into one entry per `k`.
    pub fn methods(&self) -> Result<Vec<Method>> {
        let s = &self.settings;
        let scheme = self.scheme()?;
        let mut out = Vec::new();
        for name in &s.method {
            let build = |k| {
                let members = if name == "adaboost" { s.rounds } else { s.members };
                Method::from_name(name, k, Some(scheme), members).map_err(|e| DmtError::Config(e.to_string()))
            };
            if name == "dmt" {
                for &k in &s.k {
                    out.push(build(Some(k))?);
                }
            } else {
                out.push(build(None)?);
            }
        }
        Ok(out)
    }

    /// TOML echo of the resolved settings; valid as a config file.
    pub fn echo(&self) -> String {
        let mut out = format!("# resolved configuration for `dmt {}`\n", self.command.as_str());
        if self.seed_generated {
            out.push_str("# seed was generated for this run\n");
        }
        for n in &self.notes {
            out.push_str(&format!("# note: {n}\n"));
        }
        out.push_str(&toml::to_string(&self.settings).expect("settings serialize"));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn existing() -> Vec<PathBuf> {
        vec![PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("Cargo.toml")]
    }

    fn env<'a>(vars: &'a [(&'a str, &'a str)]) -> impl Fn(&str) -> Option<String> + 'a {
        move |k| vars.iter().find(|(n, _)| *n == k).map(|(_, v)| v.to_string())
    }

    #[test]
    fn precedence_flags_env_file() {
        let file = Settings {
            jobs: Some(2),
            format: Some("json".into()),
            trials: Some(7),
            seed: Some(5),
            ..Settings::default()
        };
        let (env_s, notes) = Settings::from_env(env(&[("DMT_JOBS", "3"), ("DMT_SEED", "99")])).unwrap();
        assert_eq!(notes.len(), 1);
        let flags = Settings {
            format: Some("delimited".into()),
            ..Settings::default()
        };
        let cfg = RunConfig::resolve(Command::Cv, Settings { train: existing(), ..flags }, env_s, file, notes).unwrap();
        assert_eq!(cfg.settings.jobs, Some(3));
        assert_eq!(cfg.settings.format.as_deref(), Some("delimited"));
        assert_eq!(cfg.settings.trials, Some(7));
        assert_eq!(cfg.seed(), 5);
        assert!(!cfg.seed_generated);
    }

    #[test]
    fn echo_reloads_to_same_settings() {
        let cfg = RunConfig::resolve(Command::Cv, Settings { train: existing(), ..Settings::default() }, Settings::default(), Settings::default(), vec![])
            .unwrap();
        assert!(cfg.seed_generated);
        assert!(cfg.echo().contains("seed = "));
        let back: Settings = toml::from_str(&cfg.echo()).unwrap();
        assert_eq!(back, cfg.settings);
    }

    #[test]
    fn methods_expand_k() {
        let flags = Settings {
            method: vec!["c45".into(), "dmt".into(), "adaboost".into()],
            k: vec![3, 21],
            rounds: Some(9),
            scheme: Some("laplace".into()),
            seed: Some(1),
            ..Settings::default()
        };
        let cfg = RunConfig::resolve(Command::Cv, Settings { train: existing(), ..flags }, Settings::default(), Settings::default(), vec![]).unwrap();
        let labels: Vec<String> = cfg.methods().unwrap().iter().map(Method::label).collect();
        assert_eq!(labels, ["C4.5", "3-DMT/laplace", "21-DMT/laplace", "AdaBoost"]);
        assert!(matches!(cfg.methods().unwrap()[3], Method::AdaBoost { rounds: 9, .. }));
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = |s: Settings| {
            RunConfig::resolve(Command::Cv, Settings { train: if s.train.is_empty() { existing() } else { s.train.clone() }, ..s }, Settings::default(), Settings::default(), vec![]).is_err()
        };
        assert!(bad(Settings { k: vec![0], ..Settings::default() }));
        assert!(bad(Settings { format: Some("xml".into()), ..Settings::default() }));
        assert!(bad(Settings { noise_frac: vec![1.5], ..Settings::default() }));
        assert!(bad(Settings { train: vec!["/nonexistent.csv".into()], ..Settings::default() }));
        assert!(Settings::from_env(env(&[("DMT_JOBS", "many")])).is_err());
        assert!(toml::from_str::<Settings>("colour = 1").is_err());
    }
}
