//! Cross-validation and the experiment suite.
//!
//! Each fold re-embeds its curves: the training folds form the reference
//! sample, the validation fold is embedded against that reference only, and
//! the classifier is fitted on the training-fold coordinates. The suite
//! repeats this per experiment and seed on the training part of a
//! stratified split, then refits on the whole training part and scores the
//! held-out part.
//!
//! Seeds: a suite seed `s` generates the experiment data from `s` directly;
//! the split, the folds and the per-fold classifiers use seeds derived from
//! `s` with [`rng::derive_seed`].

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::classify::{self, Hyper, Method};
use crate::embed::{self, Embedded2D, EmbeddingKind};
use crate::fdata::{format_float, split_indices, FunctionalDataset, Group, SplitSpec};
use crate::rng;
use crate::stats::Summary;
use crate::synth;
use crate::{Error, Result};

pub const DEFAULT_FOLDS: usize = 10;

/// Cross-validated accuracy of one method on one embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub method: Method,
    pub kind: EmbeddingKind,
    pub fold_accuracies: Vec<f64>,
    pub summary: Summary,
    pub seed: u64,
    /// Effective fold count after clamping.
    pub folds: usize,
}

impl CvReport {
    fn new(method: Method, kind: EmbeddingKind, fold_accuracies: Vec<f64>, seed: u64) -> Self {
        CvReport {
            method,
            kind,
            summary: Summary::of(&fold_accuracies),
            folds: fold_accuracies.len(),
            fold_accuracies,
            seed,
        }
    }

    /// One-line human summary.
    pub fn summary_line(&self) -> String {
        let s = &self.summary;
        format!(
            "method={} kind={} folds={} mean={:.4} sd={:.4} min={:.4} q1={:.4} median={:.4} q3={:.4} max={:.4}",
            self.method, self.kind, self.folds, s.mean, s.sd, s.min, s.q1, s.median, s.q3, s.max
        )
    }
}

/// Panics if a reference row is also an evaluation row.
pub fn assert_no_leakage(reference_rows: &[usize], eval_rows: &[usize]) {
    let mut seen = reference_rows.to_vec();
    seen.sort_unstable();
    for r in eval_rows {
        assert!(
            seen.binary_search(r).is_err(),
            "leakage: row {r} is both in the reference and evaluated against it"
        );
    }
}

/// Assign every row to one of `k` stratified folds. Returns the fold of
/// each row and the effective fold count, `min(k, smaller class size)`.
pub fn stratified_folds(
    dataset: &FunctionalDataset,
    k: usize,
    seed: u64,
) -> Result<(Vec<usize>, usize)> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {k}")));
    }
    let smallest = Group::BOTH.iter().map(|&g| dataset.count(g)).min().unwrap_or(0);
    if smallest < 2 {
        return Err(Error::InvalidInput(format!(
            "degenerate dataset: a class has {smallest} member(s), need at least 2"
        )));
    }
    let effective = k.min(smallest);
    if effective < k {
        log::warn!("requested {k} folds but the smaller class has {smallest} curves; using {effective}");
    }
    let mut rng = rng::seeded(seed, rng::stream::FOLDS);
    let mut fold = vec![0; dataset.n_curves()];
    for g in Group::BOTH {
        let mut rows = dataset.indices_of(g);
        if let Some(ids) = dataset.ids() {
            rows.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        }
        rows.shuffle(&mut rng);
        for (pos, r) in rows.into_iter().enumerate() {
            fold[r] = pos % effective;
        }
    }
    Ok((fold, effective))
}

/// Embed `train` against itself and `eval` against `train`, checking that
/// the two row sets of `source` are disjoint.
fn embed_pair(
    source: &FunctionalDataset,
    train_rows: &[usize],
    eval_rows: &[usize],
    kind: EmbeddingKind,
) -> Result<(Embedded2D, Embedded2D)> {
    assert_no_leakage(train_rows, eval_rows);
    let reference = source.subset(train_rows)?;
    let eval = source.subset(eval_rows)?;
    Ok((
        embed::embed(&reference, &reference, kind)?,
        embed::embed(&eval, &reference, kind)?,
    ))
}

fn fit_and_score(
    train: &Embedded2D,
    eval: &Embedded2D,
    method: Method,
    hyper: &Hyper,
    seed: u64,
) -> Result<f64> {
    let model = classify::train_embedded(train, method, hyper, seed)?;
    classify::accuracy(&model.predict(&eval.points), &eval.labels)
}

/// Stratified k-fold cross-validation of several methods sharing the same
/// folds and per-fold embeddings.
pub fn kfold_cv_methods(
    dataset: &FunctionalDataset,
    kind: EmbeddingKind,
    methods: &[Method],
    hyper: &Hyper,
    k: usize,
    seed: u64,
) -> Result<Vec<CvReport>> {
    let (fold_of, folds) = stratified_folds(dataset, k, seed)?;
    let per_fold: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let (train_rows, eval_rows): (Vec<usize>, Vec<usize>) =
                (0..dataset.n_curves()).partition(|&r| fold_of[r] != f);
            let (train, eval) = embed_pair(dataset, &train_rows, &eval_rows, kind)?;
            let fold_seed = rng::derive_seed(seed, &[f as u64]);
            methods
                .iter()
                .map(|&m| fit_and_score(&train, &eval, m, hyper, fold_seed))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(methods
        .iter()
        .enumerate()
        .map(|(mi, &m)| {
            let acc = per_fold.iter().map(|fold| fold[mi]).collect();
            CvReport::new(m, kind, acc, seed)
        })
        .collect())
}

pub fn kfold_cv(
    dataset: &FunctionalDataset,
    kind: EmbeddingKind,
    method: Method,
    hyper: &Hyper,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    Ok(kfold_cv_methods(dataset, kind, &[method], hyper, k, seed)?.remove(0))
}

/// Where a suite row's curves come from.
#[derive(Debug, Clone)]
pub enum Source {
    /// Synthetic preset `1..=6`, regenerated for every seed.
    Experiment(u32),
    /// A fixed dataset; seeds only change the split, folds and forests.
    Dataset { name: String, data: FunctionalDataset },
}

impl Source {
    pub fn name(&self) -> String {
        match self {
            Source::Experiment(id) => id.to_string(),
            Source::Dataset { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub kinds: Vec<EmbeddingKind>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub train_fraction: f64,
    pub folds: usize,
    pub hyper: Hyper,
    pub n_per_group: usize,
    pub grid_points: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            kinds: vec![EmbeddingKind::EeMei, EmbeddingKind::EeMhi, EmbeddingKind::DdFm],
            methods: Method::ALL.to_vec(),
            seeds: vec![1, 2, 3, 4, 5],
            train_fraction: 0.8,
            folds: DEFAULT_FOLDS,
            hyper: Hyper::default(),
            n_per_group: synth::DEFAULT_N_PER_GROUP,
            grid_points: synth::DEFAULT_GRID_POINTS,
        }
    }
}

/// Result for one (source, embedding, method, seed).
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCell {
    pub source: String,
    pub kind: EmbeddingKind,
    pub method: Method,
    pub seed: u64,
    pub cv: CvReport,
    pub test_accuracy: f64,
}

/// Training-sample embedding of the first seed, for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct SuitePlot {
    pub source: String,
    pub embedded: Embedded2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub cells: Vec<SuiteCell>,
    pub plots: Vec<SuitePlot>,
}

/// Aggregate over seeds of one (source, embedding, method).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub source: String,
    pub kind: EmbeddingKind,
    pub method: Method,
    pub seeds: usize,
    pub folds: usize,
    /// Over all fold accuracies of all seeds.
    pub cv: Summary,
    /// Mean over seeds of the per-seed mean CV accuracy.
    pub cv_mean_of_means: f64,
    pub test_accuracy: f64,
}

impl SuiteReport {
    pub fn cells_for<'a>(
        &'a self,
        source: &str,
        kind: EmbeddingKind,
        method: Method,
    ) -> impl Iterator<Item = &'a SuiteCell> + 'a {
        let source = source.to_string();
        self.cells
            .iter()
            .filter(move |c| c.source == source && c.kind == kind && c.method == method)
    }

    /// Mean over seeds of the per-seed mean CV accuracy.
    pub fn mean_cv_accuracy(&self, source: &str, kind: EmbeddingKind, method: Method) -> Option<f64> {
        let means: Vec<f64> = self
            .cells_for(source, kind, method)
            .map(|c| c.cv.summary.mean)
            .collect();
        (!means.is_empty()).then(|| crate::stats::mean(&means))
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut keys: Vec<(String, EmbeddingKind, Method)> = Vec::new();
        for c in &self.cells {
            let key = (c.source.clone(), c.kind, c.method);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .map(|(source, kind, method)| {
                let cells: Vec<&SuiteCell> = self.cells_for(&source, kind, method).collect();
                let all: Vec<f64> = cells
                    .iter()
                    .flat_map(|c| c.cv.fold_accuracies.iter().copied())
                    .collect();
                let means: Vec<f64> = cells.iter().map(|c| c.cv.summary.mean).collect();
                let tests: Vec<f64> = cells.iter().map(|c| c.test_accuracy).collect();
                SummaryRow {
                    source,
                    kind,
                    method,
                    seeds: cells.len(),
                    folds: all.len(),
                    cv: Summary::of(&all),
                    cv_mean_of_means: crate::stats::mean(&means),
                    test_accuracy: crate::stats::mean(&tests),
                }
            })
            .collect()
    }
}

struct SeedResult {
    cells: Vec<SuiteCell>,
    plots: Vec<SuitePlot>,
}

fn load_source(source: &Source, config: &SuiteConfig, seed: u64) -> Result<FunctionalDataset> {
    match source {
        Source::Experiment(id) => {
            let spec = synth::experiment_preset(*id)?.with_size(config.n_per_group, config.grid_points);
            synth::generate_experiment(&spec, seed)
        }
        Source::Dataset { data, .. } => Ok(data.clone()),
    }
}

fn run_one(source: &Source, config: &SuiteConfig, seed: u64, keep_plots: bool) -> Result<SeedResult> {
    let data = load_source(source, config, seed)?;
    data.require_both_groups()?;
    let split_spec = SplitSpec::new(
        config.train_fraction,
        rng::derive_seed(seed, &[rng::stream::SPLIT]),
        true,
    )?;
    let split = split_indices(&data, &split_spec)?;
    let train = data.subset(&split.train)?;
    let cv_seed = rng::derive_seed(seed, &[rng::stream::FOLDS]);
    let fit_seed = rng::derive_seed(seed, &[u64::MAX]);
    let name = source.name();

    let mut cells = Vec::new();
    let mut plots = Vec::new();
    for &kind in &config.kinds {
        let reports = kfold_cv_methods(&train, kind, &config.methods, &config.hyper, config.folds, cv_seed)?;
        let (train_emb, test_emb) = embed_pair(&data, &split.train, &split.test, kind)?;
        for (report, &method) in reports.into_iter().zip(&config.methods) {
            let test_accuracy = fit_and_score(&train_emb, &test_emb, method, &config.hyper, fit_seed)?;
            cells.push(SuiteCell {
                source: name.clone(),
                kind,
                method,
                seed,
                cv: report,
                test_accuracy,
            });
        }
        if keep_plots {
            plots.push(SuitePlot {
                source: name.clone(),
                embedded: train_emb,
            });
        }
    }
    Ok(SeedResult { cells, plots })
}

/// Run every (source, seed) combination. Output order is sources, then
/// seeds, then embeddings, then methods, regardless of scheduling.
pub fn run_sources(sources: &[Source], config: &SuiteConfig) -> Result<SuiteReport> {
    if config.seeds.is_empty() || config.kinds.is_empty() || config.methods.is_empty() {
        return Err(Error::InvalidInput("suite needs seeds, embeddings and methods".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..sources.len())
        .flat_map(|s| (0..config.seeds.len()).map(move |k| (s, k)))
        .collect();
    let results: Vec<SeedResult> = jobs
        .par_iter()
        .map(|&(s, k)| run_one(&sources[s], config, config.seeds[k], k == 0))
        .collect::<Result<_>>()?;

    let mut report = SuiteReport {
        cells: Vec::new(),
        plots: Vec::new(),
    };
    // cells grouped by source, then seed; the plot list follows sources
    for r in results {
        report.cells.extend(r.cells);
        report.plots.extend(r.plots);
    }
    Ok(report)
}

/// Suite over synthetic presets.
pub fn run_suite(experiments: &[u32], config: &SuiteConfig) -> Result<SuiteReport> {
    let sources: Vec<Source> = experiments.iter().map(|&id| Source::Experiment(id)).collect();
    for &id in experiments {
        synth::experiment_preset(id)?;
    }
    run_sources(&sources, config)
}

/// Long format: one row per fold.
pub fn folds_csv(report: &SuiteReport) -> String {
    let mut s = String::from("experiment,embedding,method,seed,fold,accuracy\n");
    for c in &report.cells {
        for (f, a) in c.cv.fold_accuracies.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                c.source,
                c.kind,
                c.method,
                c.seed,
                f,
                format_float(*a)
            );
        }
    }
    s
}

/// One row per (experiment, embedding, method), pooled over seeds.
pub fn summary_csv(report: &SuiteReport) -> String {
    let mut s = String::from(
        "experiment,embedding,method,seeds,folds,mean,sd,min,q1,median,q3,max,test_accuracy\n",
    );
    for r in report.summary() {
        let v = &r.cv;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.source,
            r.kind,
            r.method,
            r.seeds,
            r.folds,
            format_float(v.mean),
            format_float(v.sd),
            format_float(v.min),
            format_float(v.q1),
            format_float(v.median),
            format_float(v.q3),
            format_float(v.max),
            format_float(r.test_accuracy)
        );
    }
    s
}

pub const PLOT_SIZE: (u32, u32) = (480, 480);

/// Write `folds.csv`, `summary.csv` and one SVG per (experiment,
/// embedding) into `dir`, creating it if needed.
pub fn write_report(report: &SuiteReport, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("folds.csv".into(), &folds_csv(report))?;
    put("summary.csv".into(), &summary_csv(report))?;
    for p in &report.plots {
        let svg = embed::emit_svg(&p.embedded, PLOT_SIZE.0, PLOT_SIZE.1)?;
        put(format!("{}_{}.svg", sanitize(&p.source), p.embedded.kind), &svg)?;
    }
    Ok(written)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
