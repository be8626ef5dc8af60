//! Single-pass online hyperbox learner.
//!
//! Each training sample either enlarges an existing box of its own class or
//! seeds a new zero-width box. A box may only grow while every side stays
//! within `theta` and while it does not touch any box of another class, so
//! boxes never need to be contracted afterwards.
//!
//! A sample that arrives inside (or on the face of) a box of another class
//! still gets its own seed box. Such a seed overlaps the rival box and can never
//! be expanded, so every cross-class overlap in a trained learner is between a
//! single-sample seed and the box it landed in.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    bounds_overlap, check_same_dims, check_theta, hull_fits, membership_raw, Hyperbox,
    IntervalSample, Sensitivity,
};
use crate::scalar::Scalar;
use crate::ClassId;

/// One trained base learner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GfmmModel<T> {
    pub boxes: Vec<Hyperbox<T>>,
    /// Columns of the parent dataset this learner sees, ascending.
    pub feature_indices: Vec<usize>,
    pub theta: T,
    pub gamma: Sensitivity<T>,
    pub class_set: BTreeSet<ClassId>,
}

/// Winner-takes-all output of a single learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction<T> {
    pub class_label: ClassId,
    pub membership: T,
    pub winning_box_index: Option<usize>,
}

/// Work counters collected while training; diagnostic only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TrainingCounters {
    pub samples_seen: usize,
    /// Same-class boxes whose hull with the sample fit within `theta`.
    pub candidates_examined: usize,
    /// Rival-class boxes tested for overlap against a candidate hull.
    pub rival_checks: usize,
    pub expansions: usize,
    pub boxes_created: usize,
}

/// Incremental trainer; `fit_online` drives it over a whole sequence.
#[derive(Debug, Clone)]
pub struct OnlineTrainer<T> {
    boxes: Vec<Hyperbox<T>>,
    dims: Option<usize>,
    theta: T,
    gamma: Sensitivity<T>,
    counters: TrainingCounters,
    scratch: Vec<(T, usize)>,
    hull_lo: Vec<T>,
    hull_hi: Vec<T>,
}

impl<T: Scalar> OnlineTrainer<T> {
    pub fn new(theta: T, gamma: Sensitivity<T>) -> Result<Self> {
        check_theta(theta)?;
        gamma.validate()?;
        Ok(Self {
            boxes: Vec::new(),
            dims: None,
            theta,
            gamma,
            counters: TrainingCounters::default(),
            scratch: Vec::new(),
            hull_lo: Vec::new(),
            hull_hi: Vec::new(),
        })
    }

    pub fn counters(&self) -> TrainingCounters {
        self.counters
    }

    pub fn boxes(&self) -> &[Hyperbox<T>] {
        &self.boxes
    }

    /// Absorbs one labeled sample.
    pub fn absorb(&mut self, sample: &IntervalSample<T>) -> Result<()> {
        let label = sample
            .class_label
            .ok_or(Error::Unlabeled(self.counters.samples_seen))?;
        let dims = *self.dims.get_or_insert(sample.dims());
        check_same_dims(dims, sample.dims())?;
        if self.counters.samples_seen == 0 {
            self.gamma.check_dims(dims)?;
        }
        self.counters.samples_seen += 1;

        let (lower, upper) = (&sample.lower, &sample.upper);
        self.scratch.clear();
        for (k, b) in self.boxes.iter().enumerate() {
            if b.class_label == label
                && hull_fits(&b.min_point, &b.max_point, lower, upper, self.theta)
            {
                let m = membership_raw(lower, upper, &b.min_point, &b.max_point, &self.gamma);
                self.scratch.push((m, k));
            }
        }
        // descending membership, then creation order
        self.scratch
            .sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

        for idx in 0..self.scratch.len() {
            let k = self.scratch[idx].1;
            self.counters.candidates_examined += 1;
            let cand = &self.boxes[k];
            self.hull_lo.clear();
            self.hull_hi.clear();
            self.hull_lo
                .extend(cand.min_point.iter().zip(lower).map(|(&v, &x)| v.min(x)));
            self.hull_hi
                .extend(cand.max_point.iter().zip(upper).map(|(&w, &x)| w.max(x)));

            let mut clash = false;
            for rival in self.boxes.iter().filter(|r| r.class_label != label) {
                self.counters.rival_checks += 1;
                if bounds_overlap(&self.hull_lo, &self.hull_hi, &rival.min_point, &rival.max_point)
                {
                    clash = true;
                    break;
                }
            }
            if !clash {
                let cand = &mut self.boxes[k];
                cand.min_point.copy_from_slice(&self.hull_lo);
                cand.max_point.copy_from_slice(&self.hull_hi);
                cand.sample_count += 1;
                self.counters.expansions += 1;
                return Ok(());
            }
        }

        self.boxes.push(Hyperbox::degenerate(sample, label));
        self.counters.boxes_created += 1;
        Ok(())
    }

    /// Finalizes the learner; `feature_indices` records which parent columns it saw.
    pub fn finish(self, feature_indices: Vec<usize>) -> Result<GfmmModel<T>> {
        let dims = self.dims.ok_or(Error::EmptyTrainingSet)?;
        check_same_dims(dims, feature_indices.len())?;
        let class_set = self.boxes.iter().map(|b| b.class_label).collect();
        Ok(GfmmModel {
            boxes: self.boxes,
            feature_indices,
            theta: self.theta,
            gamma: self.gamma,
            class_set,
        })
    }
}

/// Trains a learner in one pass over `samples`, in order.
pub fn fit_online<'a, T, I>(samples: I, theta: T, gamma: Sensitivity<T>) -> Result<GfmmModel<T>>
where
    T: Scalar,
    I: IntoIterator<Item = &'a IntervalSample<T>>,
{
    fit_online_with_counters(samples, theta, gamma).map(|(m, _)| m)
}

pub fn fit_online_with_counters<'a, T, I>(
    samples: I,
    theta: T,
    gamma: Sensitivity<T>,
) -> Result<(GfmmModel<T>, TrainingCounters)>
where
    T: Scalar,
    I: IntoIterator<Item = &'a IntervalSample<T>>,
{
    let mut trainer = OnlineTrainer::new(theta, gamma)?;
    for s in samples {
        trainer.absorb(s)?;
    }
    let dims = trainer.dims.ok_or(Error::EmptyTrainingSet)?;
    let counters = trainer.counters();
    Ok((trainer.finish((0..dims).collect())?, counters))
}

fn manhattan_to_center<T: Scalar>(b: &Hyperbox<T>, center: &[T]) -> T {
    let half = T::lit(0.5);
    b.min_point
        .iter()
        .zip(&b.max_point)
        .zip(center)
        .map(|((&v, &w), &c)| ((v + w) * half - c).abs())
        .fold(T::zero(), |a, x| a + x)
}

impl<T: Scalar> GfmmModel<T> {
    /// Assembles a learner from stored parts, checking every structural invariant.
    ///
    /// Cross-class overlap is rejected unless one of the two boxes is a single-sample seed.
    pub fn from_parts(
        boxes: Vec<Hyperbox<T>>,
        feature_indices: Vec<usize>,
        theta: T,
        gamma: Sensitivity<T>,
    ) -> Result<Self> {
        check_theta(theta)?;
        gamma.validate()?;
        if feature_indices.is_empty() {
            return Err(invalid("feature_indices", "must not be empty"));
        }
        if feature_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(
                "feature_indices",
                "must be distinct and sorted ascending",
            ));
        }
        let d = feature_indices.len();
        gamma.check_dims(d)?;
        for b in &boxes {
            check_same_dims(d, b.dims())?;
            Hyperbox::new(b.min_point.clone(), b.max_point.clone(), 0, 0)?;
        }
        for (i, a) in boxes.iter().enumerate() {
            for b in &boxes[i + 1..] {
                if a.class_label != b.class_label
                    && a.sample_count > 1
                    && b.sample_count > 1
                    && bounds_overlap(&a.min_point, &a.max_point, &b.min_point, &b.max_point)
                {
                    return Err(invalid(
                        "boxes",
                        format!(
                            "boxes of classes {} and {} overlap",
                            a.class_label, b.class_label
                        ),
                    ));
                }
            }
        }
        let class_set = boxes.iter().map(|b| b.class_label).collect();
        Ok(Self {
            boxes,
            feature_indices,
            theta,
            gamma,
            class_set,
        })
    }

    pub fn dims(&self) -> usize {
        self.feature_indices.len()
    }

    pub fn n_samples(&self) -> usize {
        self.boxes.iter().map(|b| b.sample_count).sum()
    }

    /// Predicts from an input already restricted to this learner's features.
    pub fn predict_one(&self, sample: &IntervalSample<T>) -> Result<Prediction<T>> {
        if self.boxes.is_empty() {
            return Err(Error::Untrained);
        }
        check_same_dims(self.dims(), sample.dims())?;
        Ok(self.predict_slices(&sample.lower, &sample.upper))
    }

    /// Hot path: assumes non-empty model and matching lengths.
    pub(crate) fn predict_slices(&self, lower: &[T], upper: &[T]) -> Prediction<T> {
        let mut best = T::neg_infinity();
        let mut best_idx = 0;
        let mut contested = false;
        for (k, b) in self.boxes.iter().enumerate() {
            let m = membership_raw(lower, upper, &b.min_point, &b.max_point, &self.gamma);
            if m > best {
                best = m;
                best_idx = k;
                contested = false;
            } else if m == best && b.class_label != self.boxes[best_idx].class_label {
                contested = true;
            }
        }
        if best > T::zero() && !contested {
            return Prediction {
                class_label: self.boxes[best_idx].class_label,
                membership: best,
                winning_box_index: Some(best_idx),
            };
        }
        self.resolve_tie(lower, upper, best)
    }

    fn resolve_tie(&self, lower: &[T], upper: &[T], best: T) -> Prediction<T> {
        let center: Vec<T> = lower
            .iter()
            .zip(upper)
            .map(|(&l, &u)| (l + u) * T::lit(0.5))
            .collect();
        let winners: Vec<usize> = (0..self.boxes.len())
            .filter(|&k| {
                let b = &self.boxes[k];
                membership_raw(lower, upper, &b.min_point, &b.max_point, &self.gamma) == best
            })
            .collect();

        // Zero membership everywhere carries no containment evidence: nearest center wins.
        let counts_matter = best > T::zero();

        // (class, total count, nearest distance, nearest box)
        let mut per_class: Vec<(ClassId, usize, T, usize)> = Vec::new();
        for &k in &winners {
            let b = &self.boxes[k];
            let dist = manhattan_to_center(b, &center);
            match per_class.iter_mut().find(|e| e.0 == b.class_label) {
                Some(e) => {
                    e.1 += b.sample_count;
                    if dist < e.2 {
                        e.2 = dist;
                        e.3 = k;
                    }
                }
                None => per_class.push((b.class_label, b.sample_count, dist, k)),
            }
        }
        let chosen = per_class
            .iter()
            .min_by(|a, b| {
                let by_count = if counts_matter {
                    b.1.cmp(&a.1)
                } else {
                    std::cmp::Ordering::Equal
                };
                by_count
                    .then(a.2.partial_cmp(&b.2).unwrap())
                    .then(a.0.cmp(&b.0))
            })
            .expect("at least one winning box");
        Prediction {
            class_label: chosen.0,
            membership: best,
            winning_box_index: Some(chosen.3),
        }
    }
}

/// Restricts a sample over `p` features to the given columns, keeping their order.
pub fn project_features<T: Scalar>(
    sample: &IntervalSample<T>,
    feature_indices: &[usize],
) -> Result<IntervalSample<T>> {
    if feature_indices.is_empty() {
        return Err(invalid("feature_indices", "must select at least one feature"));
    }
    let p = sample.dims();
    if let Some(&bad) = feature_indices.iter().find(|&&f| f >= p) {
        return Err(Error::Index {
            index: bad,
            n_features: p,
        });
    }
    Ok(IntervalSample {
        lower: feature_indices.iter().map(|&f| sample.lower[f]).collect(),
        upper: feature_indices.iter().map(|&f| sample.upper[f]).collect(),
        class_label: sample.class_label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::cell::Cell;

    fn pt(x: &[f64], c: ClassId) -> IntervalSample<f64> {
        IntervalSample::crisp(x.to_vec(), Some(c)).unwrap()
    }

    fn g1() -> Sensitivity<f64> {
        Sensitivity::Uniform(1.0)
    }

    #[test]
    fn first_sample_creates_box() {
        let m = fit_online(&[pt(&[0.3, 0.3], 0)], 0.1, g1()).unwrap();
        assert_eq!(m.boxes.len(), 1);
        let b = &m.boxes[0];
        assert_eq!((b.min_point.clone(), b.max_point.clone()), (vec![0.3, 0.3], vec![0.3, 0.3]));
        assert_eq!((b.class_label, b.sample_count), (0, 1));
        assert_eq!(m.feature_indices, vec![0, 1]);
    }

    #[test]
    fn same_class_expansion() {
        let m = fit_online(&[pt(&[0.30], 0), pt(&[0.35], 0)], 0.1, g1()).unwrap();
        assert_eq!(m.boxes.len(), 1);
        assert_eq!(m.boxes[0].min_point, vec![0.30]);
        assert_eq!(m.boxes[0].max_point, vec![0.35]);
        assert_eq!(m.boxes[0].sample_count, 2);
    }

    #[test]
    fn expansion_blocked_by_rival() {
        let data = [pt(&[0.30], 0), pt(&[0.32], 1), pt(&[0.35], 0)];
        let m = fit_online(&data, 0.1, g1()).unwrap();
        assert_eq!(m.boxes.len(), 3);
        assert_eq!(m.boxes[0].max_point, vec![0.30]);
        assert_eq!(m.boxes[2].min_point, vec![0.35]);
        assert!(m.boxes.iter().all(|b| b.sample_count == 1));
    }

    #[test]
    fn candidates_tried_in_membership_order() {
        // two class-0 boxes; the nearer one is blocked by a rival, so the farther one grows
        let data = [
            pt(&[0.10, 0.5], 0),
            pt(&[0.30, 0.5], 0),
            pt(&[0.25, 0.5], 1),
            pt(&[0.21, 0.5], 0),
        ];
        let m = fit_online(&data, 0.15, g1()).unwrap();
        let grown: Vec<_> = m.boxes.iter().filter(|b| b.sample_count == 2).collect();
        assert_eq!(grown.len(), 1);
        assert_eq!(grown[0].min_point, vec![0.10, 0.5]);
        assert_eq!(grown[0].max_point, vec![0.21, 0.5]);
    }

    #[test]
    fn fit_errors() {
        let empty: Vec<IntervalSample<f64>> = vec![];
        assert!(matches!(fit_online(&empty, 0.1, g1()), Err(Error::EmptyTrainingSet)));
        let ragged = [pt(&[0.1, 0.2], 0), pt(&[0.1], 0)];
        assert!(matches!(fit_online(&ragged, 0.1, g1()), Err(Error::Shape { .. })));
        assert!(fit_online(&[pt(&[0.1], 0)], 0.0, g1()).is_err());
        let unlabeled = [IntervalSample::crisp(vec![0.1], None).unwrap()];
        assert!(matches!(fit_online(&unlabeled, 0.1, g1()), Err(Error::Unlabeled(0))));
    }

    #[test]
    fn single_pass_over_input() {
        let data: Vec<_> = (0..50).map(|i| pt(&[i as f64 / 50.0], i % 3)).collect();
        let touched = Cell::new(0usize);
        let it = data.iter().inspect(|_| touched.set(touched.get() + 1));
        let (m, counters) = fit_online_with_counters(it, 0.1, g1()).unwrap();
        assert_eq!(touched.get(), 50);
        assert_eq!(counters.samples_seen, 50);
        assert_eq!(m.n_samples(), 50);
        assert_eq!(counters.boxes_created + counters.expansions, 50);
    }

    fn fixture(boxes: Vec<Hyperbox<f64>>, gamma: Sensitivity<f64>) -> GfmmModel<f64> {
        GfmmModel::from_parts(boxes, vec![0], 0.5, gamma).unwrap()
    }

    #[test]
    fn predict_containment() {
        let m = fixture(vec![Hyperbox::new(vec![0.4], vec![0.6], 2, 3).unwrap()], g1());
        let p = m.predict_one(&pt(&[0.5], 9)).unwrap();
        assert_eq!((p.class_label, p.membership, p.winning_box_index), (2, 1.0, Some(0)));
    }

    #[test]
    fn predict_tie_prefers_larger_count() {
        // sample at 0.5 is exactly 0.25 away from both boxes
        let boxes = vec![
            Hyperbox::new(vec![0.75], vec![0.875], 1, 2).unwrap(),
            Hyperbox::new(vec![0.125], vec![0.25], 0, 5).unwrap(),
        ];
        let m = fixture(boxes, g1());
        let p = m.predict_one(&pt(&[0.5], 0)).unwrap();
        assert_eq!(p.class_label, 0);
        assert_eq!(p.winning_box_index, Some(1));
        assert_eq!(p.membership, 0.75);
    }

    #[test]
    fn predict_tie_then_manhattan_then_class_id() {
        // equal counts, equal membership: box widths differ so centers differ
        let boxes = vec![
            Hyperbox::new(vec![0.625], vec![0.875], 1, 1).unwrap(),
            Hyperbox::new(vec![0.25], vec![0.375], 0, 1).unwrap(),
        ];
        let p = fixture(boxes, g1()).predict_one(&pt(&[0.5], 0)).unwrap();
        // both 0.125 away; center distances 0.25 vs 0.1875
        assert_eq!(p.membership, 0.875);
        assert_eq!(p.class_label, 0);

        let sym = vec![
            Hyperbox::new(vec![0.75], vec![0.875], 3, 1).unwrap(),
            Hyperbox::new(vec![0.125], vec![0.25], 1, 1).unwrap(),
        ];
        let p = fixture(sym, g1()).predict_one(&pt(&[0.5], 0)).unwrap();
        assert_eq!(p.class_label, 1);
    }

    #[test]
    fn predict_zero_membership_uses_nearest_center() {
        let boxes = vec![
            Hyperbox::new(vec![0.0], vec![0.1], 0, 9).unwrap(),
            Hyperbox::new(vec![0.6], vec![0.7], 1, 1).unwrap(),
        ];
        let m = fixture(boxes, Sensitivity::Uniform(1e6));
        let p = m.predict_one(&pt(&[0.9], 0)).unwrap();
        assert_eq!(p.membership, 0.0);
        assert_eq!(p.class_label, 1);
        assert_eq!(p.winning_box_index, Some(1));
    }

    #[test]
    fn predict_errors() {
        let empty = GfmmModel::<f64>::from_parts(vec![], vec![0], 0.1, g1()).unwrap();
        assert!(matches!(empty.predict_one(&pt(&[0.1], 0)), Err(Error::Untrained)));
        let m = fit_online(&[pt(&[0.1, 0.2], 0)], 0.1, g1()).unwrap();
        assert!(matches!(m.predict_one(&pt(&[0.1], 0)), Err(Error::Shape { .. })));
    }

    #[test]
    fn from_parts_rejects_bad_structure() {
        let a = Hyperbox::new(vec![0.1], vec![0.3], 0, 2).unwrap();
        let b = Hyperbox::new(vec![0.2], vec![0.4], 1, 3).unwrap();
        assert!(GfmmModel::from_parts(vec![a.clone(), b], vec![0], 0.5, g1()).is_err());
        // a single-sample seed inside a rival box is legitimate
        let seed = Hyperbox::new(vec![0.2], vec![0.2], 1, 1).unwrap();
        assert!(GfmmModel::from_parts(vec![a.clone(), seed], vec![0], 0.5, g1()).is_ok());
        assert!(GfmmModel::from_parts(vec![a.clone()], vec![], 0.5, g1()).is_err());
        assert!(GfmmModel::from_parts(vec![a.clone()], vec![1, 1], 0.5, g1()).is_err());
        assert!(GfmmModel::from_parts(vec![a], vec![0, 1], 0.5, g1()).is_err());
    }

    #[test]
    fn projection() {
        let s = IntervalSample::crisp(vec![0.1, 0.2, 0.3, 0.4], Some(1)).unwrap();
        let p = project_features(&s, &[1, 3]).unwrap();
        assert_eq!(p.lower, vec![0.2, 0.4]);
        assert_eq!(p.class_label, Some(1));
        assert_eq!(project_features(&s, &[0, 1, 2, 3]).unwrap(), s);
        assert!(project_features(&s, &[]).is_err());
        assert!(matches!(
            project_features(&s, &[4]),
            Err(Error::Index { index: 4, n_features: 4 })
        ));
    }

    fn labeled_points(d: usize) -> impl Strategy<Value = Vec<(Vec<f64>, usize)>> {
        proptest::collection::vec(
            (proptest::collection::vec(0.0..=1.0f64, d), 0usize..3),
            1..60,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn learner_invariants(points in labeled_points(2), theta in 0.01..=1.0f64) {
            let data: Vec<_> = points.iter().map(|(x, c)| pt(x, *c)).collect();
            let m = fit_online(&data, theta, g1()).unwrap();
            prop_assert_eq!(m.n_samples(), data.len());
            for (i, a) in m.boxes.iter().enumerate() {
                prop_assert!(a.max_width() <= theta);
                for b in &m.boxes[i + 1..] {
                    if a.class_label != b.class_label && crate::geometry::overlaps(a, b).unwrap() {
                        let seed = if a.sample_count == 1 { a } else { b };
                        prop_assert_eq!(seed.sample_count, 1);
                        prop_assert_eq!(seed.max_width(), 0.0);
                    }
                }
            }
            // a sample covered only by boxes of its own class predicts its own class
            for s in &data {
                let inside: Vec<_> = m.boxes.iter()
                    .filter(|b| b.contains(&s.lower, &s.upper)).collect();
                if !inside.is_empty() && inside.iter().all(|b| Some(b.class_label) == s.class_label) {
                    prop_assert_eq!(Some(m.predict_one(s).unwrap().class_label), s.class_label);
                }
            }
            let again = fit_online(&data, theta, g1()).unwrap();
            prop_assert_eq!(again, m);
        }
    }
}
