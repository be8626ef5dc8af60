mod common;

use common::oracles;
use common::{config, random_dataset, structured_dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhbox::ensemble::{
    correlation_estimate, feature_usage, predict, strength_estimate, train, vote_distribution,
};
use rhbox::gfmm::project_features;
use rhbox::{membership, weighted_f1, GfmmModel, Hyperbox, IntervalSample, RhModel, Sensitivity,
    VoteDistribution};

#[test]
fn membership_matches_transcription() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let d = rng.random_range(1..=3);
        let pair = |rng: &mut ChaCha8Rng| {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            (a.min(b), a.max(b))
        };
        let (v, w): (Vec<f64>, Vec<f64>) = (0..d).map(|_| pair(&mut rng)).unzip();
        let (l, u): (Vec<f64>, Vec<f64>) = (0..d).map(|_| pair(&mut rng)).unzip();
        let g: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..8.0)).collect();
        let b = Hyperbox::new(v.clone(), w.clone(), 0, 1).unwrap();
        let s = IntervalSample::new(l.clone(), u.clone(), None).unwrap();
        let got = membership(&s, &b, &Sensitivity::PerDimension(g.clone())).unwrap();
        let want = oracles::membership(&l, &u, &v, &w, &g);
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

#[test]
fn vote_distribution_matches_tally() {
    for seed in 0..10 {
        let data = random_dataset(seed, 60, 4, 3);
        let model = train(&data, &config(9, 3, 0.2, seed)).unwrap();
        for s in &data.samples {
            let v = vote_distribution(&model, s).unwrap();
            let want = oracles::tally(&model, s);
            let got: Vec<(usize, f64)> = v.fractions();
            assert_eq!(got.len(), want.len());
            for ((c, f), (wc, wf)) in got.iter().zip(&want) {
                assert_eq!(c, wc);
                assert!((f - wf).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn weighted_f1_matches_confusion_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.random_range(1..80);
        let c = rng.random_range(1..6);
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..c + 1)).collect();
        let got: f64 = weighted_f1(&truth, &pred).unwrap();
        assert!((got - oracles::weighted_f1(&truth, &pred)).abs() <= 1e-12);
    }
}

#[test]
fn correlation_matches_statrs_pearson() {
    // three learners on ten samples
    let data = structured_dataset(3, 10, 3, 2);
    let model = train(&data, &config(3, 3, 0.3, 1)).unwrap();
    let margins = oracles::raw_margins(&model, &data);
    match (correlation_estimate(&model, &data), oracles::mean_correlation(&margins)) {
        (Ok(est), Some((want, used))) => {
            assert!((est.mean - want).abs() <= 1e-10);
            assert_eq!(est.n_pairs_used, used);
        }
        (Err(rhbox::Error::UndefinedCorrelation), None) => {}
        (a, b) => panic!("disagreement: {a:?} vs {b:?}"),
    }
    for seed in 0..10 {
        let data = structured_dataset(seed, 80, 4, 3);
        let model = train(&data, &config(12, 3, 0.15, seed)).unwrap();
        let est = correlation_estimate(&model, &data).unwrap();
        let (want, used) = oracles::mean_correlation(&oracles::raw_margins(&model, &data)).unwrap();
        assert!((est.mean - want).abs() <= 1e-10, "{} vs {want}", est.mean);
        assert_eq!(est.n_pairs_used, used);
    }
}

#[test]
fn strength_matches_tally() {
    let data = structured_dataset(8, 20, 3, 3);
    let model = train(&data, &config(15, 3, 0.2, 4)).unwrap();
    let got = strength_estimate(&model, &data).unwrap();
    assert!((got - oracles::strength(&model, &data)).abs() <= 1e-12);
}

#[test]
fn single_learner_ensemble_matches_learner() {
    let data = structured_dataset(2, 50, 3, 3);
    let model = train(&data, &config(1, 3, 0.2, 9)).unwrap();
    let l = &model.learners[0];
    for s in &data.samples {
        let own = l.predict_one(&project_features(s, &l.feature_indices).unwrap()).unwrap();
        assert_eq!(predict(&model, s).unwrap(), own.class_label);
    }
}

fn one_box_learner(lo: f64, hi: f64, class: usize) -> GfmmModel {
    GfmmModel::from_parts(
        vec![Hyperbox::new(vec![lo], vec![hi], class, 1).unwrap()],
        vec![0],
        0.5,
        Sensitivity::Uniform(1.0),
    )
    .unwrap()
}

fn hand_model(learners: Vec<GfmmModel>) -> RhModel {
    let mut c = config(learners.len(), 1, 0.5, 0);
    c.sample_rate = 1.0;
    RhModel {
        class_set: learners.iter().flat_map(|l| l.class_set.iter().copied()).collect(),
        learners,
        config: c,
        n_features: 1,
        n_classes: 2,
        class_names: vec!["0".into(), "1".into()],
        feature_names: None,
        normalization: None,
    }
}

#[test]
fn ensemble_vote_tie_breaks() {
    let x = IntervalSample::crisp(vec![0.5], None).unwrap();
    // one vote each; class 1's voter is closer (0.875 vs 0.75 membership)
    let model = hand_model(vec![one_box_learner(0.0, 0.25, 0), one_box_learner(0.625, 0.75, 1)]);
    assert_eq!(predict(&model, &x).unwrap(), 1);
    // symmetric memberships fall back to the lower class id
    let model = hand_model(vec![one_box_learner(0.75, 1.0, 1), one_box_learner(0.0, 0.25, 0)]);
    assert_eq!(predict(&model, &x).unwrap(), 0);
}

#[test]
fn feature_usage_counts() {
    let mut model = hand_model(vec![one_box_learner(0.0, 0.25, 0), one_box_learner(0.5, 0.75, 1)]);
    model.n_features = 3;
    model.learners[1] = GfmmModel::from_parts(
        vec![Hyperbox::new(vec![0.1, 0.2], vec![0.1, 0.2], 1, 1).unwrap()],
        vec![0, 2],
        0.5,
        Sensitivity::Uniform(1.0),
    )
    .unwrap();
    model.config.max_features = rhbox::MaxFeatures::Count(2);
    let u = feature_usage(&model);
    assert_eq!(u.probabilities, vec![1.0, 0.0, 0.5]);
    assert_eq!(u.d_histogram, vec![1, 1]);
}

#[test]
fn feature_usage_monte_carlo() {
    // E[usage of f] = E[d] / p with d ~ U{1..mf}
    let data = random_dataset(1, 40, 10, 2);
    let (m, mf, p) = (3000usize, 6usize, 10usize);
    let model = train(&data, &config(m, mf, 0.3, 77)).unwrap();
    let u = feature_usage(&model);
    let mean_d = (1 + mf) as f64 / 2.0;
    let expected = mean_d / p as f64;
    // Var of inclusion indicator is q(1-q) at most; standard error over m learners
    let se = (expected * (1.0 - expected) / m as f64).sqrt();
    for (f, &prob) in u.probabilities.iter().enumerate() {
        assert!((prob - expected).abs() <= 3.5 * se, "feature {f}: {prob} vs {expected}");
    }
    let slots: usize = model.learners.iter().map(|l| l.dims()).sum();
    let from_usage: f64 = u.probabilities.iter().sum::<f64>() * m as f64;
    assert!((from_usage - slots as f64).abs() < 1e-6);
    assert_eq!(u.d_histogram.iter().sum::<usize>(), m);
}

#[test]
fn vote_distribution_of_fixed_votes() {
    use rhbox::gfmm::Prediction;
    let p = |c| Prediction { class_label: c, membership: 1.0, winning_box_index: Some(0) };
    let v = VoteDistribution::from_predictions(&[p(0), p(0), p(1)], 2);
    assert_eq!(v.fraction(0), 2.0 / 3.0);
    assert_eq!(v.fraction(1), 1.0 / 3.0);
}
