//! Random hyperboxes: an ensemble of online general fuzzy min-max (GFMM)
//! classifiers, each trained on a random subsample of rows and a random
//! subset of features, combined by majority vote.
//!
//! The core types are generic over the scalar type ([`Scalar`], implemented
//! for `f32` and `f64`). The aliases at the crate root fix the scalar to `f64`;
//! the `F32*` aliases use single precision.

pub mod data;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod gfmm;
pub mod metrics;
pub mod model_io;
pub mod rng;
pub mod scalar;
pub mod synthetic;

/// Class labels are dense indices `0..n_classes`.
pub type ClassId = usize;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use geometry::{is_expandable, membership, overlaps, ramp};
pub use gfmm::{fit_online, TrainingCounters};
pub use ensemble::{
    bound_report, correlation_estimate, error_bound, feature_usage, lemma1_variance, margin,
    most_voted_wrong_class, predict, raw_margin, strength_estimate, train, vote_distribution,
    MaxFeatures,
};
pub use eval::{stratified_kfold, FoldPlan, NormMode};
pub use metrics::{accuracy, weighted_f1};
pub use model_io::{load_model, save_model};

pub type Hyperbox = geometry::Hyperbox<f64>;
pub type IntervalSample = geometry::IntervalSample<f64>;
pub type Sensitivity = geometry::Sensitivity<f64>;
pub type GfmmModel = gfmm::GfmmModel<f64>;
pub type Prediction = gfmm::Prediction<f64>;
pub type RhConfig = ensemble::RhConfig<f64>;
pub type RhModel = ensemble::RhModel<f64>;
pub type VoteDistribution = ensemble::VoteDistribution<f64>;
pub type BoundReport = ensemble::BoundReport<f64>;
pub type Dataset = data::Dataset<f64>;
pub type RawTable = data::RawTable<f64>;
pub type NormalizationParams = data::NormalizationParams<f64>;
pub type CvReport = eval::CvReport<f64>;

pub type F32Hyperbox = geometry::Hyperbox<f32>;
pub type F32IntervalSample = geometry::IntervalSample<f32>;
pub type F32GfmmModel = gfmm::GfmmModel<f32>;
pub type F32RhConfig = ensemble::RhConfig<f32>;
pub type F32RhModel = ensemble::RhModel<f32>;
pub type F32Dataset = data::Dataset<f32>;
