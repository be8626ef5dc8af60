//! Independent reference implementations used to cross-check the library.

use std::collections::BTreeMap;

use statrs::statistics::Statistics;

use rhbox::gfmm::project_features;
use rhbox::{Dataset, IntervalSample, RhModel};

/// Ramp written out case by case.
pub fn ramp(xi: f64, gamma: f64) -> f64 {
    let s = xi * gamma;
    if s > 1.0 {
        1.0
    } else if s < 0.0 {
        0.0
    } else {
        s
    }
}

/// Membership transcribed term by term: min over j of min(1 - f(x^u - w), 1 - f(v - x^l)).
pub fn membership(lower: &[f64], upper: &[f64], v: &[f64], w: &[f64], gamma: &[f64]) -> f64 {
    let mut b = 1.0f64;
    for j in 0..lower.len() {
        let above = 1.0 - ramp(upper[j] - w[j], gamma[j]);
        let below = 1.0 - ramp(v[j] - lower[j], gamma[j]);
        b = b.min(above.min(below));
    }
    b
}

/// Per-learner predictions by projecting and calling the public single-learner API.
pub fn learner_votes(model: &RhModel, sample: &IntervalSample) -> Vec<usize> {
    model
        .learners
        .iter()
        .map(|l| {
            let s = project_features(sample, &l.feature_indices).unwrap();
            l.predict_one(&s).unwrap().class_label
        })
        .collect()
}

pub fn tally(model: &RhModel, sample: &IntervalSample) -> BTreeMap<usize, f64> {
    let votes = learner_votes(model, sample);
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for v in &votes {
        *counts.entry(*v).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(c, k)| (c, k as f64 / votes.len() as f64))
        .collect()
}

/// Weighted F1 from an explicit confusion matrix.
pub fn weighted_f1(truth: &[usize], pred: &[usize]) -> f64 {
    let c = truth.iter().chain(pred).max().unwrap() + 1;
    let mut cm = vec![vec![0usize; c]; c];
    for (&t, &p) in truth.iter().zip(pred) {
        cm[t][p] += 1;
    }
    let n = truth.len() as f64;
    let mut total = 0.0;
    for k in 0..c {
        let tp = cm[k][k] as f64;
        let support: usize = cm[k].iter().sum();
        let predicted: usize = (0..c).map(|r| cm[r][k]).sum();
        let precision = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        let recall = if support == 0 { 0.0 } else { tp / support as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        total += support as f64 / n * f1;
    }
    total
}

/// Raw-margin vectors built from scratch: vote tally, most-voted wrong class, indicator.
pub fn raw_margins(model: &RhModel, data: &Dataset) -> Vec<Vec<f64>> {
    let m = model.learners.len();
    let mut out = vec![Vec::with_capacity(data.len()); m];
    for s in &data.samples {
        let c = s.class_label.unwrap();
        let votes = learner_votes(model, s);
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &v in &votes {
            *counts.entry(v).or_default() += 1;
        }
        let mut j: Option<(usize, usize)> = None;
        for (&class, &k) in &counts {
            if class != c && j.is_none_or(|(_, best)| k > best) {
                j = Some((class, k));
            }
        }
        let j = j.map(|(class, _)| class);
        for (i, &v) in votes.iter().enumerate() {
            let r = if v == c {
                1.0
            } else if Some(v) == j {
                -1.0
            } else {
                0.0
            };
            out[i].push(r);
        }
    }
    out
}

/// Mean Pearson correlation over pairs with non-constant vectors, via statrs.
pub fn mean_correlation(margins: &[Vec<f64>]) -> Option<(f64, usize)> {
    let mut sum = 0.0;
    let mut used = 0;
    for a in 0..margins.len() {
        for b in a + 1..margins.len() {
            let sa = margins[a].iter().std_dev();
            let sb = margins[b].iter().std_dev();
            if sa == 0.0 || sb == 0.0 {
                continue;
            }
            sum += margins[a].iter().covariance(margins[b].iter()) / (sa * sb);
            used += 1;
        }
    }
    (used > 0).then(|| (sum / used as f64, used))
}

/// Mean margin from the tally.
pub fn strength(model: &RhModel, data: &Dataset) -> f64 {
    let mut total = 0.0;
    for s in &data.samples {
        let c = s.class_label.unwrap();
        let t = tally(model, s);
        let own = t.get(&c).copied().unwrap_or(0.0);
        let rival = t
            .iter()
            .filter(|(&k, _)| k != c)
            .map(|(_, &f)| f)
            .fold(0.0, f64::max);
        total += own - rival;
    }
    total / data.len() as f64
}
