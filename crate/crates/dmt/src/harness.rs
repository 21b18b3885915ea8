//! Experiment protocols: cross-laboratory evaluation with optional noise,
//! noise sweeps with paired noised copies, and stratified cross-validation.
//!
//! Work is spread over a bounded thread pool, but every result is computed
//! from its own seeded stream and collected in a fixed order, so reports do
//! not depend on the number of threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dmt_core::cv::stratified_folds;
use dmt_core::dataset::{align_datasets, apply_normalization, znormalize};
use dmt_core::ensemble::{bagging_member, forest_member, random_tree_member, EnsembleKind, EnsembleModel};
use dmt_core::noise::inject_noise_with_sigmas;
use dmt_core::{Dataset, Method, Model, NoiseSpec, SigmaSource};

use crate::error::{DmtError, Result};
use crate::io::NamedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    /// z-score both sets with statistics fitted on the training set.
    #[default]
    TrainStats,
    /// z-score each set with its own statistics.
    PerDataset,
    None,
}

impl NormalizationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NormalizationMode::TrainStats => "train-stats",
            NormalizationMode::PerDataset => "per-dataset",
            NormalizationMode::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train-stats" => Some(NormalizationMode::TrainStats),
            "per-dataset" => Some(NormalizationMode::PerDataset),
            "none" => Some(NormalizationMode::None),
            _ => None,
        }
    }
}

pub fn parse_sigma_source(s: &str) -> Option<SigmaSource> {
    match s {
        "clean-test" => Some(SigmaSource::CleanTest),
        "training" => Some(SigmaSource::Training),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    CrossLab,
    NoiseSweep,
    Cv,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::CrossLab => "cross-lab",
            Protocol::NoiseSweep => "noise-sweep",
            Protocol::Cv => "cv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub fraction: f64,
    pub trials: usize,
    pub sigma_source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// Trial number, or fold number under cross-validation.
    pub index: usize,
    pub accuracy: f64,
    /// Attributes that received noise.
    pub noised: Vec<String>,
    /// Fingerprint of the evaluated data; equal digests mean identical data.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub protocol: Protocol,
    pub train: String,
    pub test: String,
    pub method: String,
    pub descriptor: String,
    pub seed: u64,
    pub normalization: String,
    pub noise: Option<NoiseSummary>,
    pub folds: Option<usize>,
    /// Accuracy on the unmodified test set (mean fold accuracy under cv).
    pub clean_accuracy: f64,
    pub trials: Vec<TrialResult>,
    pub mean_accuracy: f64,
    /// Standard error of the trial accuracies.
    pub stderr: f64,
    /// Node counts of every tree, per fitted model.
    pub tree_sizes: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// FNV-1a over labels and cell bit patterns.
pub fn digest(d: &Dataset) -> String {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
    };
    for r in 0..d.n_rows() {
        eat(d.label(r) as u64);
        for a in 0..d.n_attributes() {
            eat(match d.value(r, a) {
                dmt_core::Value::Num(x) => x.to_bits(),
                dmt_core::Value::Cat(k) => k as u64 | 1 << 40,
                dmt_core::Value::Missing => u64::MAX,
            });
        }
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessOptions {
    pub normalization: NormalizationMode,
    pub sigma_source: SigmaSource,
    pub jobs: usize,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            normalization: NormalizationMode::TrainStats,
            sigma_source: SigmaSource::CleanTest,
            jobs: 1,
        }
    }
}

/// Clean accuracy per model, then trial results per fraction and model.
type Evaluation = (Vec<f64>, Vec<Vec<Vec<TrialResult>>>);

/// Aligned and normalized data for one train/test pairing.
struct Prepared {
    train: Dataset,
    test: Dataset,
    provenance: String,
    sigmas: Vec<f64>,
}

pub struct Harness {
    opts: HarnessOptions,
    pool: rayon::ThreadPool,
}

impl Harness {
    pub fn new(opts: HarnessOptions) -> Result<Self> {
        if opts.jobs < 1 {
            return Err(DmtError::Config("jobs must be >= 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            // unpruned trees on large sets recurse deeply
            .stack_size(64 << 20)
            .build()
            .map_err(|e| DmtError::Config(format!("cannot start thread pool: {e}")))?;
        Ok(Harness { opts, pool })
    }

    pub fn options(&self) -> HarnessOptions {
        self.opts
    }

    /// Fit on the pool; ensemble members are built concurrently.
    pub fn fit(&self, method: &Method, d: &Dataset, seed: u64) -> Result<Model> {
        self.pool.install(|| fit_parallel(method, d, seed))
    }

    fn prepare(&self, train: &NamedDataset, test: &NamedDataset) -> Result<Prepared> {
        let (tr, te) = align_datasets(&train.data, &test.data)?;
        let te = te.conform_to(tr.shared_schema())?;
        let shared = tr.n_attributes();
        let (tr, te, provenance) = match self.opts.normalization {
            NormalizationMode::TrainStats => {
                let (tr, stats) = znormalize(&tr)?;
                let te = apply_normalization(&te, &stats)?;
                let p = format!(
                    "z-score with statistics of `{}` applied to both sets ({shared} shared attributes)",
                    train.name
                );
                (tr, te, p)
            }
            NormalizationMode::PerDataset => {
                let (tr, _) = znormalize(&tr)?;
                let (te, _) = znormalize(&te)?;
                let p = format!("z-score of each set with its own statistics ({shared} shared attributes)");
                (tr, te, p)
            }
            NormalizationMode::None => (tr, te, format!("none ({shared} shared attributes)")),
        };
        let sigma_from = match self.opts.sigma_source {
            SigmaSource::CleanTest => &te,
            SigmaSource::Training => &tr,
        };
        let sigmas = sigma_from
            .continuous_stddevs()
            .into_iter()
            .map(|s| s.unwrap_or(0.0))
            .collect();
        Ok(Prepared {
            train: tr,
            test: te,
            provenance,
            sigmas,
        })
    }

    fn fit_all(&self, methods: &[Method], d: &Dataset, seed: u64) -> Result<Vec<Model>> {
        self.pool
            .install(|| methods.par_iter().map(|m| fit_parallel(m, d, seed)).collect())
    }

    /// Accuracy of every model on the clean set and on each noised trial, at
    /// every fraction. Noised copies are generated once per (fraction, trial)
    /// and shared by all models.
    fn evaluate(
        &self,
        p: &Prepared,
        models: &[Model],
        fractions: &[Option<f64>],
        trials: usize,
        seed: u64,
    ) -> Result<Evaluation> {
        let clean: Vec<f64> = self.pool.install(|| {
            models
                .par_iter()
                .map(|m| m.accuracy(&p.test).map_err(DmtError::from))
                .collect::<Result<_>>()
        })?;
        let clean_digest = digest(&p.test);
        let mut per_fraction = Vec::with_capacity(fractions.len());
        for &fraction in fractions {
            let Some(fraction) = fraction else {
                let trials = clean
                    .iter()
                    .map(|&accuracy| {
                        vec![TrialResult {
                            index: 0,
                            accuracy,
                            noised: Vec::new(),
                            digest: clean_digest.clone(),
                        }]
                    })
                    .collect();
                per_fraction.push(trials);
                continue;
            };
            let mut spec = NoiseSpec::new(fraction, trials, seed);
            spec.sigma_source = self.opts.sigma_source;
            spec.validate()?;
            let by_trial: Vec<Vec<TrialResult>> = self.pool.install(|| {
                (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let (noised, names) = inject_noise_with_sigmas(&p.test, &spec, t, &p.sigmas)?;
                        let dg = digest(&noised);
                        models
                            .iter()
                            .map(|m| {
                                Ok(TrialResult {
                                    index: t,
                                    accuracy: m.accuracy(&noised)?,
                                    noised: names.clone(),
                                    digest: dg.clone(),
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()
            })?;
            // transpose to per-model
            let per_model = (0..models.len())
                .map(|m| by_trial.iter().map(|row| row[m].clone()).collect())
                .collect();
            per_fraction.push(per_model);
        }
        Ok((clean, per_fraction))
    }

    #[allow(clippy::too_many_arguments)]
    fn reports(
        &self,
        protocol: Protocol,
        train: &NamedDataset,
        test: &NamedDataset,
        methods: &[Method],
        models: &[Model],
        p: &Prepared,
        fractions: &[Option<f64>],
        trials: usize,
        seed: u64,
    ) -> Result<Vec<ExperimentReport>> {
        let (clean, per_fraction) = self.evaluate(p, models, fractions, trials, seed)?;
        let mut out = Vec::new();
        for (fraction, per_model) in fractions.iter().zip(per_fraction) {
            for (((method, model), clean), results) in methods.iter().zip(models).zip(&clean).zip(per_model) {
                let accs: Vec<f64> = results.iter().map(|r| r.accuracy).collect();
                let (mean, stderr) = mean_and_stderr(&accs);
                out.push(ExperimentReport {
                    protocol,
                    train: train.name.clone(),
                    test: test.name.clone(),
                    method: method.label(),
                    descriptor: method.descriptor(),
                    seed,
                    normalization: p.provenance.clone(),
                    noise: fraction.map(|f| NoiseSummary {
                        fraction: f,
                        trials,
                        sigma_source: self.opts.sigma_source.as_str().into(),
                    }),
                    folds: None,
                    clean_accuracy: *clean,
                    trials: results,
                    mean_accuracy: mean,
                    stderr,
                    tree_sizes: vec![model.tree_sizes()],
                    warnings: Vec::new(),
                });
            }
        }
        Ok(out)
    }

    /// Train once on `train`, test on `test`, clean or under noise. All
    /// methods see the same noised copies.
    pub fn run_cross_lab(
        &self,
        train: &NamedDataset,
        test: &NamedDataset,
        methods: &[Method],
        noise: Option<(f64, usize)>,
        seed: u64,
    ) -> Result<Vec<ExperimentReport>> {
        let p = self.prepare(train, test)?;
        let models = self.fit_all(methods, &p.train, seed)?;
        let (fractions, trials) = match noise {
            Some((f, t)) => (vec![Some(f)], t),
            None => (vec![None], 1),
        };
        self.reports(Protocol::CrossLab, train, test, methods, &models, &p, &fractions, trials, seed)
    }

    /// Every method at every noise fraction, fraction-major. Models are fitted
    /// once; trial `t` uses the same noised copy for every method.
    pub fn run_noise_sweep(
        &self,
        train: &NamedDataset,
        test: &NamedDataset,
        methods: &[Method],
        fractions: &[f64],
        trials: usize,
        seed: u64,
    ) -> Result<Vec<ExperimentReport>> {
        if fractions.is_empty() {
            return Err(DmtError::Config("a sweep needs at least one noise fraction".into()));
        }
        let p = self.prepare(train, test)?;
        let models = self.fit_all(methods, &p.train, seed)?;
        let fractions: Vec<Option<f64>> = fractions.iter().map(|&f| Some(f)).collect();
        self.reports(Protocol::NoiseSweep, train, test, methods, &models, &p, &fractions, trials, seed)
    }

    /// Stratified k-fold cross-validation; normalization is fitted on each
    /// training portion.
    pub fn run_cv(&self, data: &NamedDataset, methods: &[Method], folds: usize, seed: u64) -> Result<Vec<ExperimentReport>> {
        let assignment = stratified_folds(&data.data, folds, seed)?;
        let warnings: Vec<String> = assignment.warning.iter().cloned().collect();
        let per_fold: Vec<(Vec<f64>, Vec<Vec<usize>>, String)> = self.pool.install(|| {
            (0..assignment.folds)
                .into_par_iter()
                .map(|f| {
                    let (tr_rows, te_rows) = assignment.split(f);
                    let train = NamedDataset::new(&data.name, data.data.subset(&tr_rows));
                    let test = NamedDataset::new(&data.name, data.data.subset(&te_rows));
                    let p = self.prepare_cv(&train, &test)?;
                    let models: Vec<Model> = methods
                        .par_iter()
                        .map(|m| fit_parallel(m, &p.train, seed))
                        .collect::<Result<_>>()?;
                    let accs = models.iter().map(|m| Ok(m.accuracy(&p.test)?)).collect::<Result<_>>()?;
                    let sizes = models.iter().map(Model::tree_sizes).collect();
                    Ok((accs, sizes, digest(&p.test)))
                })
                .collect::<Result<_>>()
        })?;
        let provenance = match self.opts.normalization {
            NormalizationMode::None => "none".to_string(),
            _ => "z-score with statistics of each training portion".to_string(),
        };
        Ok(methods
            .iter()
            .enumerate()
            .map(|(m, method)| {
                let trials: Vec<TrialResult> = per_fold
                    .iter()
                    .enumerate()
                    .map(|(f, (accs, _, dg))| TrialResult {
                        index: f,
                        accuracy: accs[m],
                        noised: Vec::new(),
                        digest: dg.clone(),
                    })
                    .collect();
                let accs: Vec<f64> = trials.iter().map(|t| t.accuracy).collect();
                let (mean, stderr) = mean_and_stderr(&accs);
                ExperimentReport {
                    protocol: Protocol::Cv,
                    train: data.name.clone(),
                    test: data.name.clone(),
                    method: method.label(),
                    descriptor: method.descriptor(),
                    seed,
                    normalization: provenance.clone(),
                    noise: None,
                    folds: Some(assignment.folds),
                    clean_accuracy: mean,
                    trials,
                    mean_accuracy: mean,
                    stderr,
                    tree_sizes: per_fold.iter().map(|(_, s, _)| s[m].clone()).collect(),
                    warnings: warnings.clone(),
                }
            })
            .collect())
    }

    fn prepare_cv(&self, train: &NamedDataset, test: &NamedDataset) -> Result<Prepared> {
        let (tr, te) = match self.opts.normalization {
            NormalizationMode::None => (train.data.clone(), test.data.clone()),
            _ => {
                let (tr, stats) = znormalize(&train.data)?;
                (tr, apply_normalization(&test.data, &stats)?)
            }
        };
        Ok(Prepared {
            train: tr,
            test: te,
            provenance: String::new(),
            sigmas: Vec::new(),
        })
    }
}

/// [`Method::fit`] with ensemble members built in parallel. Members come from
/// independent streams, so the model equals the sequential one.
pub fn fit_parallel(method: &Method, d: &Dataset, seed: u64) -> Result<Model> {
    let (members, kind) = match method {
        Method::Bagging { members, .. } => (*members, EnsembleKind::Bagging),
        Method::RandomForest { members, split, .. } => {
            split.subset_size(d.n_attributes())?;
            (*members, EnsembleKind::RandomForest)
        }
        Method::RandomTree { members, .. } => (*members, EnsembleKind::RandomTree),
        other => return Ok(other.fit(d, seed)?),
    };
    method.validate()?;
    if d.is_empty() {
        return Err(dmt_core::Error::EmptyDataset.into());
    }
    let nonempty = d.class_counts().iter().filter(|&&c| c > 0).count();
    if nonempty < 2 {
        return Err(dmt_core::Error::TooFewClasses(nonempty).into());
    }
    let trees = (0..members)
        .into_par_iter()
        .map(|i| match method {
            Method::Bagging { params, .. } => bagging_member(d, params, seed, i),
            Method::RandomForest { split, params, .. } => forest_member(d, split, params, seed, i),
            Method::RandomTree { split, params, .. } => random_tree_member(d, split, params, seed, i),
            _ => unreachable!("only uniform ensembles reach here"),
        })
        .collect::<dmt_core::Result<Vec<_>>>()?;
    Ok(Model::Ensemble(EnsembleModel::from_members(
        kind,
        trees,
        vec![1.0; members],
        seed,
        d.class_priors(),
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dmt_core::{synth, VotingScheme};

    fn harness(jobs: usize) -> Harness {
        Harness::new(HarnessOptions {
            jobs,
            ..HarnessOptions::default()
        })
        .unwrap()
    }

    #[test]
    fn parallel_fit_equals_sequential() {
        let d = synth::separable(30, 2, 4, 3);
        for m in [Method::bagging(6), Method::random_forest(6), Method::random_tree(6), Method::adaboost(4)] {
            assert_eq!(harness(4).fit(&m, &d, 5).unwrap(), m.fit(&d, 5).unwrap());
        }
        assert!(fit_parallel(&Method::bagging(0), &d, 1).is_err());
    }

    #[test]
    fn sweep_pairs_noised_copies() {
        let (train, test) = synth::marker_groups(&synth::MarkerSpec::default(), 60, 40, 2);
        let (train, test) = (NamedDataset::new("a", train), NamedDataset::new("b", test));
        let methods = [Method::c45(), Method::dmt(3, VotingScheme::Simple)];
        let reports = harness(3).run_noise_sweep(&train, &test, &methods, &[0.0, 0.5], 5, 11).unwrap();
        assert_eq!(reports.len(), 4);
        for pair in reports.chunks(2) {
            let digests = |r: &ExperimentReport| r.trials.iter().map(|t| t.digest.clone()).collect::<Vec<_>>();
            assert_eq!(digests(&pair[0]), digests(&pair[1]));
            assert_eq!(pair[0].trials.len(), 5);
        }
        // fraction zero leaves the data untouched
        assert!(reports[0].trials.iter().all(|t| t.noised.is_empty()));
        assert!(reports[2].trials.iter().all(|t| t.noised.len() == 10));
        assert_eq!(reports, harness(1).run_noise_sweep(&train, &test, &methods, &[0.0, 0.5], 5, 11).unwrap());
    }

    #[test]
    fn mean_is_mean_of_trials() {
        let (train, test) = synth::marker_groups(&synth::MarkerSpec::default(), 50, 50, 4);
        let (train, test) = (NamedDataset::new("a", train), NamedDataset::new("b", test));
        let r = harness(2)
            .run_cross_lab(&train, &test, &[Method::c45()], Some((0.3, 7)), 1)
            .unwrap()
            .remove(0);
        let m = r.trials.iter().map(|t| t.accuracy).sum::<f64>() / 7.0;
        assert!((r.mean_accuracy - m).abs() < 1e-12);
        assert!(r.normalization.contains("`a`"));
    }

    #[test]
    fn cv_reports_folds_and_warnings() {
        let d = NamedDataset::new("s", synth::separable(8, 1, 1, 0));
        let r = harness(2).run_cv(&d, &[Method::c45()], 10, 3).unwrap().remove(0);
        assert_eq!(r.folds, Some(4));
        assert_eq!(r.trials.len(), 4);
        assert_eq!(r.warnings.len(), 1);
    }
}
