//! Randomized ensemble of online hyperbox learners.
//!
//! Learner `i` is trained on a row subsample drawn without replacement and on
//! `d ~ U{1..max_features}` randomly chosen columns; prediction is a unit
//! majority vote. The margin, strength, correlation and error-bound estimators
//! summarize how confident and how diverse the learners are.

use std::collections::BTreeSet;

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Dataset, NormalizationParams};
use crate::error::{invalid, Error, Result};
use crate::geometry::{check_theta, IntervalSample, Sensitivity};
use crate::gfmm::{GfmmModel, OnlineTrainer, Prediction};
use crate::rng::{below, sample_without_replacement, SeedKey};
use crate::scalar::Scalar;
use crate::ClassId;

/// Upper limit on the number of features a learner may draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaxFeatures {
    /// `ceil(2 * sqrt(p))`, capped at `p`.
    TwoSqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> Result<usize> {
        if p == 0 {
            return Err(invalid("max_features", "dataset has no features"));
        }
        match self {
            MaxFeatures::TwoSqrt => Ok(((2.0 * (p as f64).sqrt()).ceil() as usize).clamp(1, p)),
            MaxFeatures::All => Ok(p),
            MaxFeatures::Count(0) => Err(invalid("max_features", "must be at least 1")),
            MaxFeatures::Count(k) if k > p => Err(invalid(
                "max_features",
                format!("{k} exceeds the number of features ({p})"),
            )),
            MaxFeatures::Count(k) => Ok(k),
        }
    }

    /// Accepts `2sqrt`, `all` or a positive integer.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "2sqrt" => Ok(MaxFeatures::TwoSqrt),
            "all" => Ok(MaxFeatures::All),
            other => match other.parse::<usize>() {
                Ok(0) | Err(_) => Err(invalid(
                    "max_features",
                    format!("`{s}` is not `2sqrt`, `all` or a positive integer"),
                )),
                Ok(k) => Ok(MaxFeatures::Count(k)),
            },
        }
    }
}

impl std::fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaxFeatures::TwoSqrt => f.write_str("2sqrt"),
            MaxFeatures::All => f.write_str("all"),
            MaxFeatures::Count(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhConfig<T> {
    pub n_estimators: usize,
    pub sample_rate: T,
    pub max_features: MaxFeatures,
    pub theta: T,
    pub gamma: Sensitivity<T>,
    pub seed: u64,
}

impl<T: Scalar> Default for RhConfig<T> {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            sample_rate: T::lit(0.5),
            max_features: MaxFeatures::TwoSqrt,
            theta: T::lit(0.1),
            gamma: Sensitivity::default(),
            seed: 42,
        }
    }
}

impl<T: Scalar> RhConfig<T> {
    pub fn validate(&self, n_features: usize) -> Result<usize> {
        if self.n_estimators == 0 {
            return Err(invalid("n_estimators", "must be at least 1"));
        }
        if !(self.sample_rate > T::zero() && self.sample_rate <= T::one()) {
            return Err(invalid(
                "sample_rate",
                format!("{} is not in (0, 1]", self.sample_rate),
            ));
        }
        check_theta(self.theta)?;
        self.gamma.validate()?;
        self.gamma.check_dims(n_features)?;
        self.max_features.resolve(n_features)
    }

    /// Number of rows each learner sees: `ceil(sample_rate * n)`, at least 1.
    pub fn subsample_size(&self, n: usize) -> usize {
        // tolerate rounding in products like 0.3 * 10
        let raw = self.sample_rate.as_f64() * n as f64;
        ((raw - 1e-9).ceil() as usize).clamp(1, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhModel<T> {
    pub learners: Vec<GfmmModel<T>>,
    /// Configuration with `max_features` resolved to a count.
    pub config: RhConfig<T>,
    pub n_features: usize,
    pub n_classes: usize,
    pub class_set: BTreeSet<ClassId>,
    pub class_names: Vec<String>,
    pub feature_names: Option<Vec<String>>,
    pub normalization: Option<NormalizationParams<T>>,
}

impl<T: Scalar> RhModel<T> {
    pub fn max_features(&self) -> usize {
        match self.config.max_features {
            MaxFeatures::Count(k) => k,
            other => other.resolve(self.n_features).unwrap_or(self.n_features),
        }
    }

    pub fn mean_boxes(&self) -> f64 {
        let total: usize = self.learners.iter().map(|l| l.boxes.len()).sum();
        total as f64 / self.learners.len().max(1) as f64
    }

    fn check_sample(&self, sample: &IntervalSample<T>) -> Result<()> {
        if self.learners.is_empty() {
            return Err(Error::Untrained);
        }
        if sample.dims() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                found: sample.dims(),
            });
        }
        Ok(())
    }

    /// Per-learner outputs for one full-width sample.
    pub fn learner_predictions(&self, sample: &IntervalSample<T>) -> Result<Vec<Prediction<T>>> {
        self.check_sample(sample)?;
        let mut lo = Vec::new();
        let mut up = Vec::new();
        self.learners
            .iter()
            .map(|l| {
                if l.boxes.is_empty() {
                    return Err(Error::Untrained);
                }
                lo.clear();
                up.clear();
                lo.extend(l.feature_indices.iter().map(|&f| sample.lower[f]));
                up.extend(l.feature_indices.iter().map(|&f| sample.upper[f]));
                Ok(l.predict_slices(&lo, &up))
            })
            .collect()
    }
}

fn train_learner<T: Scalar>(
    dataset: &Dataset<T>,
    config: &RhConfig<T>,
    key: SeedKey,
    index: usize,
    subsample: usize,
    max_features: usize,
) -> Result<GfmmModel<T>> {
    let mut rng = key.learner(index);
    let rows = sample_without_replacement(&mut rng, dataset.len(), subsample);
    let d = 1 + below(&mut rng, max_features);
    let mut features = sample_without_replacement(&mut rng, dataset.n_features, d);
    features.sort_unstable();

    let gamma = config.gamma.project(&features)?;
    let mut trainer = OnlineTrainer::new(config.theta, gamma)?;
    let mut lo = vec![T::zero(); d];
    let mut up = vec![T::zero(); d];
    for &r in &rows {
        let s = &dataset.samples[r];
        for (k, &f) in features.iter().enumerate() {
            lo[k] = s.lower[f];
            up[k] = s.upper[f];
        }
        let projected = IntervalSample {
            lower: lo.clone(),
            upper: up.clone(),
            class_label: s.class_label,
        };
        trainer.absorb(&projected)?;
    }
    trainer.finish(features)
}

/// Trains with the stream rooted at `config.seed`.
pub fn train<T: Scalar>(dataset: &Dataset<T>, config: &RhConfig<T>) -> Result<RhModel<T>> {
    train_keyed(dataset, config, SeedKey::root(config.seed))
}

/// Trains with an explicit seed key; cross-validation uses one key per fold.
///
/// Learner `i` depends only on `(dataset, config, key, i)`, so the first `k`
/// learners of a larger ensemble equal an ensemble trained with `k` learners.
pub fn train_keyed<T: Scalar>(
    dataset: &Dataset<T>,
    config: &RhConfig<T>,
    key: SeedKey,
) -> Result<RhModel<T>> {
    if dataset.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let max_features = config.validate(dataset.n_features)?;
    let subsample = config.subsample_size(dataset.len());
    let learners = (0..config.n_estimators)
        .into_par_iter()
        .map(|i| train_learner(dataset, config, key, i, subsample, max_features))
        .collect::<Result<Vec<_>>>()?;
    let class_set = learners.iter().flat_map(|l| l.class_set.iter().copied()).collect();
    let mut config = config.clone();
    config.max_features = MaxFeatures::Count(max_features);
    Ok(RhModel {
        learners,
        config,
        n_features: dataset.n_features,
        n_classes: dataset.n_classes,
        class_set,
        class_names: dataset.class_names.clone(),
        feature_names: dataset.feature_names.clone(),
        normalization: dataset.normalization.clone(),
    })
}

/// Vote counts per class; fractions are `count / m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoteDistribution<T> {
    pub counts: Vec<usize>,
    /// Summed winning membership of each class's voters, used to break ties.
    pub membership_mass: Vec<T>,
    pub n_voters: usize,
}

impl<T: Scalar> VoteDistribution<T> {
    pub fn from_predictions(preds: &[Prediction<T>], n_classes: usize) -> Self {
        let width = preds
            .iter()
            .map(|p| p.class_label + 1)
            .max()
            .unwrap_or(0)
            .max(n_classes);
        let mut counts = vec![0; width];
        let mut membership_mass = vec![T::zero(); width];
        for p in preds {
            counts[p.class_label] += 1;
            membership_mass[p.class_label] += p.membership;
        }
        Self {
            counts,
            membership_mass,
            n_voters: preds.len(),
        }
    }

    pub fn fraction(&self, class: ClassId) -> T {
        let c = self.counts.get(class).copied().unwrap_or(0);
        T::from_count(c) / T::from_count(self.n_voters)
    }

    /// `(class, fraction)` for every class that received a vote.
    pub fn fractions(&self) -> Vec<(ClassId, T)> {
        (0..self.counts.len())
            .filter(|&c| self.counts[c] > 0)
            .map(|c| (c, self.fraction(c)))
            .collect()
    }

    /// Most votes, then larger membership mass, then lower class id.
    pub fn winner(&self) -> ClassId {
        let mut best = 0;
        for c in 1..self.counts.len() {
            let better = self.counts[c] > self.counts[best]
                || (self.counts[c] == self.counts[best]
                    && self.membership_mass[c] > self.membership_mass[best]);
            if better {
                best = c;
            }
        }
        best
    }

    /// Class other than `true_class` with the most votes; lower id on ties.
    pub fn most_voted_wrong(&self, true_class: ClassId) -> Option<ClassId> {
        let mut best: Option<ClassId> = None;
        for c in 0..self.counts.len() {
            if c == true_class || self.counts[c] == 0 {
                continue;
            }
            if best.is_none_or(|b| self.counts[c] > self.counts[b]) {
                best = Some(c);
            }
        }
        best
    }

    pub fn margin(&self, true_class: ClassId) -> T {
        let rival = self
            .most_voted_wrong(true_class)
            .map_or(T::zero(), |j| self.fraction(j));
        self.fraction(true_class) - rival
    }
}

pub fn vote_distribution<T: Scalar>(
    model: &RhModel<T>,
    sample: &IntervalSample<T>,
) -> Result<VoteDistribution<T>> {
    let preds = model.learner_predictions(sample)?;
    Ok(VoteDistribution::from_predictions(&preds, model.n_classes))
}

pub fn predict<T: Scalar>(model: &RhModel<T>, sample: &IntervalSample<T>) -> Result<ClassId> {
    Ok(vote_distribution(model, sample)?.winner())
}

pub fn margin<T: Scalar>(
    model: &RhModel<T>,
    sample: &IntervalSample<T>,
    true_class: ClassId,
) -> Result<T> {
    Ok(vote_distribution(model, sample)?.margin(true_class))
}

pub fn most_voted_wrong_class<T: Scalar>(
    model: &RhModel<T>,
    sample: &IntervalSample<T>,
    true_class: ClassId,
) -> Result<Option<ClassId>> {
    Ok(vote_distribution(model, sample)?.most_voted_wrong(true_class))
}

/// `1` if the learner predicts the true class, `-1` if it predicts `j_class`, else `0`.
pub fn raw_margin_value(predicted: ClassId, true_class: ClassId, j_class: Option<ClassId>) -> i8 {
    if predicted == true_class {
        1
    } else if Some(predicted) == j_class {
        -1
    } else {
        0
    }
}

pub fn raw_margin<T: Scalar>(
    model: &RhModel<T>,
    learner_index: usize,
    sample: &IntervalSample<T>,
    true_class: ClassId,
    j_class: Option<ClassId>,
) -> Result<i8> {
    let learner = model.learners.get(learner_index).ok_or_else(|| {
        invalid(
            "learner_index",
            format!("{learner_index} but the model has {} learners", model.learners.len()),
        )
    })?;
    model.check_sample(sample)?;
    let projected = crate::gfmm::project_features(sample, &learner.feature_indices)?;
    let p = learner.predict_one(&projected)?;
    Ok(raw_margin_value(p.class_label, true_class, j_class))
}

/// Every learner's prediction on every row of a labeled dataset.
#[derive(Debug, Clone)]
pub struct VoteTable<T> {
    /// Row-major `n x m`.
    pub predictions: Vec<Prediction<T>>,
    pub labels: Vec<ClassId>,
    pub n_learners: usize,
    pub n_classes: usize,
}

impl<T: Scalar> VoteTable<T> {
    pub fn build(model: &RhModel<T>, dataset: &Dataset<T>) -> Result<Self> {
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let rows = dataset
            .samples
            .par_iter()
            .map(|s| model.learner_predictions(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            predictions: rows.into_iter().flatten().collect(),
            labels: dataset.labels(),
            n_learners: model.learners.len(),
            n_classes: model.n_classes.max(dataset.n_classes),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[Prediction<T>] {
        &self.predictions[i * self.n_learners..(i + 1) * self.n_learners]
    }

    /// Votes of the first `m` learners on row `i`.
    pub fn distribution(&self, i: usize, m: usize) -> VoteDistribution<T> {
        VoteDistribution::from_predictions(&self.row(i)[..m], self.n_classes)
    }

    pub fn ensemble_predictions(&self, m: usize) -> Vec<ClassId> {
        (0..self.n_rows()).map(|i| self.distribution(i, m).winner()).collect()
    }

    pub fn strength(&self) -> T {
        let total: T = (0..self.n_rows())
            .map(|i| self.distribution(i, self.n_learners).margin(self.labels[i]))
            .sum();
        total / T::from_count(self.n_rows())
    }

    /// Raw-margin vector of each learner over all rows.
    pub fn raw_margins(&self) -> Vec<Vec<i8>> {
        let j: Vec<Option<ClassId>> = (0..self.n_rows())
            .map(|i| self.distribution(i, self.n_learners).most_voted_wrong(self.labels[i]))
            .collect();
        (0..self.n_learners)
            .map(|k| {
                (0..self.n_rows())
                    .map(|i| {
                        raw_margin_value(self.row(i)[k].class_label, self.labels[i], j[i])
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn strength_estimate<T: Scalar>(model: &RhModel<T>, dataset: &Dataset<T>) -> Result<T> {
    Ok(VoteTable::build(model, dataset)?.strength())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEstimate<T> {
    pub mean: T,
    pub n_pairs_used: usize,
    pub n_pairs_considered: usize,
}

/// Pair selection for the correlation estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairSampling {
    /// All `m (m - 1) / 2` pairs.
    #[default]
    Exhaustive,
    /// At most this many pairs, drawn without replacement from a seeded stream.
    Subsample { max_pairs: usize, seed: u64 },
}

fn pearson<T: Scalar>(a: &[i8], b: &[i8]) -> Option<T> {
    let n = T::from_count(a.len());
    let mean = |v: &[i8]| v.iter().map(|&x| T::lit(x as f64)).sum::<T>() / n;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        let dx = T::lit(x as f64) - ma;
        let dy = T::lit(y as f64) - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= T::zero() || sbb <= T::zero() {
        return None;
    }
    let r = sab / (saa * sbb).sqrt();
    Some(r.max(-T::one()).min(T::one()))
}

/// Mean pairwise Pearson correlation of the learners' raw-margin vectors.
pub fn correlation_from_margins<T: Scalar>(
    margins: &[Vec<i8>],
    sampling: PairSampling,
) -> Result<CorrelationEstimate<T>> {
    let m = margins.len();
    if m < 2 {
        return Err(invalid("n_estimators", "correlation needs at least 2 learners"));
    }
    if margins[0].len() < 2 {
        return Err(invalid("dataset", "correlation needs at least 2 samples"));
    }
    let total = m * (m - 1) / 2;
    let pairs: Vec<(usize, usize)> = match sampling {
        PairSampling::Subsample { max_pairs, seed } if max_pairs < total => {
            let mut rng = SeedKey::root(seed).pairs();
            let mut picked = index::sample(&mut rng, total, max_pairs).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|t| unrank_pair(t, m)).collect()
        }
        _ => (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect(),
    };
    let values: Vec<Option<T>> = pairs
        .par_iter()
        .map(|&(a, b)| pearson(&margins[a], &margins[b]))
        .collect();
    let used: Vec<T> = values.into_iter().flatten().collect();
    if used.is_empty() {
        return Err(Error::UndefinedCorrelation);
    }
    let mean = used.iter().copied().sum::<T>() / T::from_count(used.len());
    Ok(CorrelationEstimate {
        mean,
        n_pairs_used: used.len(),
        n_pairs_considered: pairs.len(),
    })
}

/// Maps `t` in `0..m(m-1)/2` to the `t`-th pair `(a, b)`, `a < b`, in row order.
fn unrank_pair(mut t: usize, m: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = m - 1 - a;
        if t < row {
            return (a, a + 1 + t);
        }
        t -= row;
        a += 1;
    }
}

pub fn correlation_estimate<T: Scalar>(
    model: &RhModel<T>,
    dataset: &Dataset<T>,
) -> Result<CorrelationEstimate<T>> {
    let table = VoteTable::build(model, dataset)?;
    correlation_from_margins(&table.raw_margins(), PairSampling::Exhaustive)
}

/// `correlation * (1 / strength^2 - 1)` before clamping; `None` when `strength <= 0`.
pub fn raw_error_bound<T: Scalar>(strength: T, correlation: T) -> Option<T> {
    if !(strength > T::zero()) {
        return None;
    }
    if strength >= T::one() {
        return Some(T::zero());
    }
    Some(correlation * (T::one() / (strength * strength) - T::one()))
}

/// Raw bound clamped below at zero.
pub fn error_bound<T: Scalar>(strength: T, correlation: T) -> Option<T> {
    raw_error_bound(strength, correlation).map(|b| b.max(T::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport<T> {
    pub strength: T,
    /// `None` when every learner pair has a constant raw-margin vector.
    pub correlation: Option<T>,
    pub raw_bound: Option<T>,
    pub upper_bound: Option<T>,
    pub n_pairs_used: usize,
}

pub fn bound_report<T: Scalar>(model: &RhModel<T>, training_set: &Dataset<T>) -> Result<BoundReport<T>> {
    bound_report_with(model, training_set, PairSampling::Exhaustive)
}

pub fn bound_report_with<T: Scalar>(
    model: &RhModel<T>,
    training_set: &Dataset<T>,
    sampling: PairSampling,
) -> Result<BoundReport<T>> {
    let table = VoteTable::build(model, training_set)?;
    bound_from_table(&table, sampling)
}

pub(crate) fn bound_from_table<T: Scalar>(
    table: &VoteTable<T>,
    sampling: PairSampling,
) -> Result<BoundReport<T>> {
    let strength = table.strength();
    let (correlation, n_pairs_used) = match correlation_from_margins::<T>(&table.raw_margins(), sampling) {
        Ok(c) => (Some(c.mean), c.n_pairs_used),
        Err(Error::UndefinedCorrelation) => (None, 0),
        Err(e) => return Err(e),
    };
    // A unanimous, always-correct ensemble has no margin variance but a zero bound.
    let raw_bound = match correlation {
        Some(rho) => raw_error_bound(strength, rho),
        None if strength >= T::one() => Some(T::zero()),
        None => None,
    };
    Ok(BoundReport {
        strength,
        correlation,
        raw_bound,
        upper_bound: raw_bound.map(|b| b.max(T::zero())),
        n_pairs_used,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureUsage<T> {
    /// Fraction of learners using each feature.
    pub probabilities: Vec<T>,
    /// `d_histogram[d - 1]` learners drew `d` features.
    pub d_histogram: Vec<usize>,
}

pub fn feature_usage<T: Scalar>(model: &RhModel<T>) -> FeatureUsage<T> {
    let mut counts = vec![0usize; model.n_features];
    let max_d = model
        .learners
        .iter()
        .map(|l| l.dims())
        .max()
        .unwrap_or(0)
        .max(model.max_features());
    let mut d_histogram = vec![0usize; max_d];
    for l in &model.learners {
        for &f in &l.feature_indices {
            counts[f] += 1;
        }
        d_histogram[l.dims() - 1] += 1;
    }
    let m = T::from_count(model.learners.len().max(1));
    FeatureUsage {
        probabilities: counts.into_iter().map(|c| T::from_count(c) / m).collect(),
        d_histogram,
    }
}

/// Variance of the mean of `m` equicorrelated variables with variance `sigma_sq`.
pub fn lemma1_variance<T: Scalar>(rho: T, sigma_sq: T, m: usize) -> Result<T> {
    if !(rho >= T::zero() && rho <= T::one()) {
        return Err(invalid("rho", format!("{rho} is not in [0, 1]")));
    }
    if !(sigma_sq > T::zero()) || !sigma_sq.is_finite() {
        return Err(invalid("sigma_sq", format!("{sigma_sq} is not positive")));
    }
    if m == 0 {
        return Err(invalid("m", "must be at least 1"));
    }
    Ok(rho * sigma_sq + (T::one() - rho) / T::from_count(m) * sigma_sq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(c: ClassId, mem: f64) -> Prediction<f64> {
        Prediction {
            class_label: c,
            membership: mem,
            winning_box_index: Some(0),
        }
    }

    #[test]
    fn vote_counting_examples() {
        let v = VoteDistribution::from_predictions(&[pred(0, 1.0), pred(0, 1.0), pred(1, 1.0)], 2);
        assert_eq!(v.fractions(), vec![(0, 2.0 / 3.0), (1, 1.0 / 3.0)]);
        assert_eq!(v.winner(), 0);
        let u = VoteDistribution::from_predictions(&[pred(1, 0.5); 4], 2);
        assert_eq!(u.fractions(), vec![(1, 1.0)]);
        assert_eq!(u.margin(1), 1.0);
        assert_eq!(u.margin(0), -1.0);
        assert_eq!(u.most_voted_wrong(1), None);
    }

    #[test]
    fn vote_ties_use_membership_then_class_id() {
        let v = VoteDistribution::from_predictions(&[pred(0, 0.5), pred(1, 0.75)], 2);
        assert_eq!(v.winner(), 1);
        let w = VoteDistribution::from_predictions(&[pred(1, 0.75), pred(0, 0.75)], 2);
        assert_eq!(w.winner(), 0);
    }

    #[test]
    fn margin_and_wrong_class_examples() {
        let preds: Vec<_> = [0, 0, 0, 1, 1].iter().map(|&c| pred(c, 1.0)).collect();
        let v = VoteDistribution::from_predictions(&preds, 2);
        assert!((v.margin(0) - 0.2).abs() < 1e-15);

        let preds: Vec<_> = [2, 2, 2, 2, 2, 0, 0, 0, 1, 1].iter().map(|&c| pred(c, 1.0)).collect();
        let v = VoteDistribution::from_predictions(&preds, 3);
        assert_eq!(v.most_voted_wrong(2), Some(0));
        let tie: Vec<_> = [2, 2, 1, 0].iter().map(|&c| pred(c, 1.0)).collect();
        assert_eq!(VoteDistribution::from_predictions(&tie, 3).most_voted_wrong(2), Some(0));
    }

    #[test]
    fn raw_margin_values() {
        assert_eq!(raw_margin_value(3, 3, Some(1)), 1);
        assert_eq!(raw_margin_value(1, 3, Some(1)), -1);
        assert_eq!(raw_margin_value(2, 3, Some(1)), 0);
        assert_eq!(raw_margin_value(2, 3, None), 0);
    }

    #[test]
    fn pearson_extremes() {
        let a = [1i8, -1, 1, -1];
        let b = [-1i8, 1, -1, 1];
        assert_eq!(pearson::<f64>(&a, &a), Some(1.0));
        assert_eq!(pearson::<f64>(&a, &b), Some(-1.0));
        assert_eq!(pearson::<f64>(&a, &[1, 1, 1, 1]), None);
        let est = correlation_from_margins::<f64>(&[a.to_vec(), b.to_vec()], PairSampling::Exhaustive)
            .unwrap();
        assert_eq!((est.mean, est.n_pairs_used), (-1.0, 1));
        assert!(matches!(
            correlation_from_margins::<f64>(&[vec![1, 1], vec![0, 0]], PairSampling::Exhaustive),
            Err(Error::UndefinedCorrelation)
        ));
    }

    #[test]
    fn pair_unranking_covers_all_pairs() {
        let m = 7;
        let all: Vec<_> = (0..m * (m - 1) / 2).map(|t| unrank_pair(t, m)).collect();
        let expected: Vec<_> = (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
        assert_eq!(all, expected);
    }

    #[test]
    fn error_bound_examples() {
        assert_eq!(error_bound(1.0, 0.7), Some(0.0));
        assert!((error_bound(0.5f64, 0.2).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(error_bound(-0.1, 0.2), None);
        assert_eq!(error_bound(0.0, 0.2), None);
        assert_eq!(error_bound(0.5, -0.2), Some(0.0));
        assert!((raw_error_bound(0.5f64, -0.2).unwrap() + 0.6).abs() < 1e-15);
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_variance(1.0, 2.5, 7).unwrap(), 2.5);
        assert_eq!(lemma1_variance(0.0, 1.0, 4).unwrap(), 0.25);
        assert_eq!(lemma1_variance(0.5, 1.0, 2).unwrap(), 0.75);
        assert!(lemma1_variance(1.5, 1.0, 2).is_err());
        assert!(lemma1_variance(0.5, 0.0, 2).is_err());
        assert!(lemma1_variance(0.5, 1.0, 0).is_err());
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::TwoSqrt.resolve(4).unwrap(), 4);
        assert_eq!(MaxFeatures::TwoSqrt.resolve(64).unwrap(), 16);
        assert_eq!(MaxFeatures::TwoSqrt.resolve(2).unwrap(), 2);
        assert_eq!(MaxFeatures::TwoSqrt.resolve(10).unwrap(), 7);
        assert!(MaxFeatures::Count(5).resolve(4).is_err());
        assert_eq!(MaxFeatures::parse("all").unwrap(), MaxFeatures::All);
        assert_eq!(MaxFeatures::parse("3").unwrap(), MaxFeatures::Count(3));
        assert!(MaxFeatures::parse("0").is_err());
        assert!(MaxFeatures::parse("lots").is_err());
    }

    #[test]
    fn subsample_size_rounds_up() {
        let mut c = RhConfig::<f64>::default();
        c.sample_rate = 0.5;
        assert_eq!(c.subsample_size(7), 4);
        c.sample_rate = 0.3;
        assert_eq!(c.subsample_size(10), 3);
        c.sample_rate = 1.0;
        assert_eq!(c.subsample_size(10), 10);
        c.sample_rate = 0.01;
        assert_eq!(c.subsample_size(3), 1);
    }
}
