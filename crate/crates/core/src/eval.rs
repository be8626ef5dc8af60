//! Repeated stratified k-fold evaluation and the study harnesses built on it.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{normalize_minmax, Dataset, RawTable};
use crate::ensemble::{bound_from_table, train_keyed, BoundReport, MaxFeatures, PairSampling, RhConfig, VoteTable};
use crate::error::{Error, Result};
use crate::metrics::{error_rate, mean_std, sample_variance, weighted_f1};
use crate::rng::{fold_stream, shuffle, SeedKey};
use crate::scalar::Scalar;
use crate::ClassId;

/// Where min-max parameters come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum NormMode {
    /// Fitted on the training folds; test values are clipped.
    #[default]
    PerFold,
    /// Fitted once on the whole table before splitting.
    Whole,
}

impl NormMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMode::PerFold => "per-fold",
            NormMode::Whole => "whole",
        }
    }
}

/// Assignment of every sample to one of `k` folds for one repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub repeat_index: usize,
    pub seed: u64,
    /// Some class had fewer than `k` samples, so it is missing from some folds.
    pub undersized_classes: bool,
}

impl FoldPlan {
    /// Validates externally produced assignments.
    pub fn from_assignments(assignments: Vec<usize>, k: usize, repeat_index: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Folds(format!("k must be at least 2, got {k}")));
        }
        if let Some((i, &f)) = assignments.iter().enumerate().find(|(_, &f)| f >= k) {
            return Err(Error::Folds(format!("sample {i} assigned to fold {f} but k = {k}")));
        }
        let plan = Self {
            k,
            assignments,
            repeat_index,
            seed: 0,
            undersized_classes: false,
        };
        if let Some(f) = (0..k).find(|&f| plan.test_indices(f).is_empty()) {
            return Err(Error::Folds(format!("fold {f} is empty")));
        }
        Ok(plan)
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }
}

/// Shuffles each class with a seeded stream, then deals samples to folds
/// round-robin, continuing the deal across classes.
pub fn stratified_kfold(labels: &[ClassId], k: usize, seed: u64, repeat: usize) -> Result<FoldPlan> {
    let n = labels.len();
    if k < 2 {
        return Err(Error::Folds(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::Folds(format!("k = {k} exceeds the number of samples ({n})")));
    }
    let n_classes = labels.iter().max().map_or(0, |&c| c + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in labels.iter().enumerate() {
        by_class[c].push(i);
    }
    let mut rng = fold_stream(seed, repeat);
    let mut assignments = vec![0; n];
    let mut next = 0;
    let mut undersized = false;
    for members in by_class.iter_mut().filter(|m| !m.is_empty()) {
        undersized |= members.len() < k;
        shuffle(&mut rng, members);
        for &i in members.iter() {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        repeat_index: repeat,
        seed,
        undersized_classes: undersized,
    })
}

/// Reads fold assignments: one line per repeat, one comma-separated fold id per sample.
pub fn parse_fold_assignments(text: &str, n_samples: usize) -> Result<Vec<FoldPlan>> {
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim().parse::<usize>().map_err(|_| {
                    Error::Folds(format!("line {}: `{}` is not a fold index", line_no + 1, s.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n_samples {
            return Err(Error::Folds(format!(
                "line {}: {} assignments for {n_samples} samples",
                line_no + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Folds("fold file has no assignments".into()));
    }
    let k = rows.iter().flatten().max().map_or(0, |&f| f + 1);
    rows.into_iter()
        .enumerate()
        .map(|(r, a)| FoldPlan::from_assignments(a, k, r))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub repeats: usize,
    pub k: usize,
    pub norm_mode: NormMode,
    pub with_bound: bool,
    pub pair_sampling: PairSampling,
    /// External plans, one per repeat; replaces the stratified split.
    pub plans: Option<Vec<FoldPlan>>,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            repeats: 10,
            k: 4,
            norm_mode: NormMode::PerFold,
            with_bound: false,
            pair_sampling: PairSampling::Exhaustive,
            plans: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult<T> {
    pub repeat: usize,
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub weighted_f1: T,
    pub test_error: T,
    pub clipped: usize,
    pub mean_boxes: f64,
    pub bound: Option<BoundReport<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport<T> {
    pub folds: Vec<FoldResult<T>>,
    pub mean: T,
    pub std: T,
    pub mean_test_error: T,
    pub norm_mode: NormMode,
    pub undersized_classes: bool,
}

impl<T: Scalar> CvReport<T> {
    fn from_folds(folds: Vec<FoldResult<T>>, norm_mode: NormMode, undersized_classes: bool) -> Self {
        let scores: Vec<T> = folds.iter().map(|f| f.weighted_f1).collect();
        let errors: Vec<T> = folds.iter().map(|f| f.test_error).collect();
        let (mean, std) = mean_std(&scores);
        Self {
            mean,
            std,
            mean_test_error: mean_std(&errors).0,
            folds,
            norm_mode,
            undersized_classes,
        }
    }

    pub fn scores(&self) -> Vec<T> {
        self.folds.iter().map(|f| f.weighted_f1).collect()
    }
}

struct FoldData<T> {
    repeat: usize,
    fold: usize,
    train: Dataset<T>,
    test: Dataset<T>,
    clipped: usize,
}

fn plans_for<T: Scalar>(table: &RawTable<T>, seed: u64, options: &CvOptions) -> Result<Vec<FoldPlan>> {
    match &options.plans {
        Some(plans) => {
            if let Some(p) = plans.iter().find(|p| p.assignments.len() != table.n_rows()) {
                return Err(Error::Folds(format!(
                    "plan for repeat {} covers {} samples, table has {}",
                    p.repeat_index,
                    p.assignments.len(),
                    table.n_rows()
                )));
            }
            Ok(plans.clone())
        }
        None => {
            if options.repeats == 0 {
                return Err(Error::Folds("repeats must be at least 1".into()));
            }
            (0..options.repeats)
                .map(|r| stratified_kfold(&table.labels, options.k, seed, r))
                .collect()
        }
    }
}

fn fold_jobs<T: Scalar>(
    table: &RawTable<T>,
    plans: &[FoldPlan],
    norm_mode: NormMode,
) -> Result<Vec<FoldData<T>>> {
    if table.labels.len() != table.n_rows() {
        return Err(Error::Unlabeled(table.labels.len()));
    }
    let whole = match norm_mode {
        NormMode::Whole => Some(normalize_minmax(table, None)?.0),
        NormMode::PerFold => None,
    };
    let mut jobs = Vec::new();
    for plan in plans {
        for fold in 0..plan.k {
            let train_idx = plan.train_indices(fold);
            let test_idx = plan.test_indices(fold);
            let wrap = |e| Error::InFold {
                repeat: plan.repeat_index,
                fold,
                source: Box::new(e),
            };
            if train_idx.is_empty() {
                return Err(wrap(Error::EmptyTrainingSet));
            }
            let (train, test, clipped) = match &whole {
                Some(ds) => (ds.subset(&train_idx), ds.subset(&test_idx), 0),
                None => {
                    let (train, _) = normalize_minmax(&table.subset(&train_idx), None).map_err(wrap)?;
                    let (test, clipped) =
                        normalize_minmax(&table.subset(&test_idx), train.normalization.as_ref())
                            .map_err(wrap)?;
                    (train, test, clipped)
                }
            };
            jobs.push(FoldData {
                repeat: plan.repeat_index,
                fold,
                train,
                test,
                clipped,
            });
        }
    }
    Ok(jobs)
}

fn in_fold<T>(job: &FoldData<T>, e: Error) -> Error {
    Error::InFold {
        repeat: job.repeat,
        fold: job.fold,
        source: Box::new(e),
    }
}

/// Trains on `k - 1` folds and scores the held-out fold, for every fold of every repeat.
pub fn repeated_cv<T: Scalar>(
    table: &RawTable<T>,
    config: &RhConfig<T>,
    options: &CvOptions,
) -> Result<CvReport<T>> {
    let plans = plans_for(table, config.seed, options)?;
    let jobs = fold_jobs(table, &plans, options.norm_mode)?;
    let folds = jobs
        .par_iter()
        .map(|job| {
            let key = SeedKey::fold(config.seed, job.repeat, job.fold);
            let run = || -> Result<FoldResult<T>> {
                let model = train_keyed(&job.train, config, key)?;
                let votes = VoteTable::build(&model, &job.test)?;
                let predicted = votes.ensemble_predictions(votes.n_learners);
                let truth = job.test.labels();
                let bound = if options.with_bound {
                    let train_votes = VoteTable::build(&model, &job.train)?;
                    Some(bound_from_table(&train_votes, options.pair_sampling)?)
                } else {
                    None
                };
                Ok(FoldResult {
                    repeat: job.repeat,
                    fold: job.fold,
                    n_train: job.train.len(),
                    n_test: job.test.len(),
                    weighted_f1: weighted_f1(&truth, &predicted)?,
                    test_error: error_rate(&truth, &predicted)?,
                    clipped: job.clipped,
                    mean_boxes: model.mean_boxes(),
                    bound,
                })
            };
            run().map_err(|e| in_fold(job, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let undersized = plans.iter().any(|p| p.undersized_classes);
    Ok(CvReport::from_folds(folds, options.norm_mode, undersized))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceStudy<T> {
    /// Every base learner's weighted F1 on every test fold.
    pub base_scores: Vec<T>,
    pub ensemble_scores: Vec<T>,
    pub variance_base: T,
    pub variance_ensemble: T,
}

/// Scores each base learner alongside its ensemble on every fold.
pub fn variance_study<T: Scalar>(
    table: &RawTable<T>,
    config: &RhConfig<T>,
    options: &CvOptions,
) -> Result<VarianceStudy<T>> {
    let plans = plans_for(table, config.seed, options)?;
    let jobs = fold_jobs(table, &plans, options.norm_mode)?;
    let per_fold = jobs
        .par_iter()
        .map(|job| {
            let run = || -> Result<(Vec<T>, T)> {
                let model = train_keyed(&job.train, config, SeedKey::fold(config.seed, job.repeat, job.fold))?;
                let votes = VoteTable::build(&model, &job.test)?;
                let truth = job.test.labels();
                let base = (0..votes.n_learners)
                    .map(|k| {
                        let pred: Vec<ClassId> =
                            (0..votes.n_rows()).map(|i| votes.row(i)[k].class_label).collect();
                        weighted_f1(&truth, &pred)
                    })
                    .collect::<Result<Vec<T>>>()?;
                let ens = weighted_f1(&truth, &votes.ensemble_predictions(votes.n_learners))?;
                Ok((base, ens))
            };
            run().map_err(|e| in_fold(job, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let base_scores: Vec<T> = per_fold.iter().flat_map(|(b, _)| b.iter().copied()).collect();
    let ensemble_scores: Vec<T> = per_fold.iter().map(|(_, e)| *e).collect();
    Ok(VarianceStudy {
        variance_base: sample_variance(&base_scores),
        variance_ensemble: sample_variance(&ensemble_scores),
        base_scores,
        ensemble_scores,
    })
}

/// Mean score at each swept parameter value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve<T> {
    pub values: Vec<usize>,
    /// `scores[v]` holds one weighted F1 per fold for `values[v]`.
    pub scores: Vec<Vec<T>>,
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Scalar> SweepCurve<T> {
    fn from_scores(values: Vec<usize>, scores: Vec<Vec<T>>) -> Self {
        let (mean, std) = scores.iter().map(|s| mean_std(s)).unzip();
        Self {
            values,
            scores,
            mean,
            std,
        }
    }
}

/// Cross-validated score for each ensemble size in `m_values`.
///
/// Seeds are nested: one ensemble of `max(m_values)` learners is trained per
/// fold and each size is scored on its first `m` learners, which is identical
/// to training that size from scratch.
pub fn learner_count_sweep<T: Scalar>(
    table: &RawTable<T>,
    config: &RhConfig<T>,
    m_values: &[usize],
    options: &CvOptions,
) -> Result<SweepCurve<T>> {
    let m_max = *m_values
        .iter()
        .max()
        .ok_or_else(|| crate::error::invalid("m_values", "must not be empty"))?;
    if m_values.contains(&0) {
        return Err(crate::error::invalid("m_values", "ensemble sizes must be positive"));
    }
    let mut big = config.clone();
    big.n_estimators = m_max;
    let plans = plans_for(table, config.seed, options)?;
    let jobs = fold_jobs(table, &plans, options.norm_mode)?;
    let per_fold = jobs
        .par_iter()
        .map(|job| {
            let run = || -> Result<Vec<T>> {
                let model = train_keyed(&job.train, &big, SeedKey::fold(config.seed, job.repeat, job.fold))?;
                let votes = VoteTable::build(&model, &job.test)?;
                let truth = job.test.labels();
                m_values
                    .iter()
                    .map(|&m| weighted_f1(&truth, &votes.ensemble_predictions(m)))
                    .collect()
            };
            run().map_err(|e| in_fold(job, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let scores = (0..m_values.len())
        .map(|v| per_fold.iter().map(|f| f[v]).collect())
        .collect();
    Ok(SweepCurve::from_scores(m_values.to_vec(), scores))
}

/// Cross-validated score for each feature cap in `mf_values`.
pub fn feature_cap_sweep<T: Scalar>(
    table: &RawTable<T>,
    config: &RhConfig<T>,
    mf_values: &[usize],
    options: &CvOptions,
) -> Result<SweepCurve<T>> {
    if mf_values.is_empty() {
        return Err(crate::error::invalid("mf_values", "must not be empty"));
    }
    let mut opts = options.clone();
    opts.with_bound = false;
    let scores = mf_values
        .iter()
        .map(|&mf| {
            let mut c = config.clone();
            c.max_features = MaxFeatures::Count(mf);
            Ok(repeated_cv(table, &c, &opts)?.scores())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepCurve::from_scores(mf_values.to_vec(), scores))
}
