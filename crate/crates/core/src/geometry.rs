//! Hyperboxes in the unit cube and the fuzzy membership of interval inputs.
//!
//! A hyperbox `[V, W]` is an axis-aligned box with a class label. The degree
//! to which an interval input `[x^l, x^u]` fits a box decays linearly (with
//! slope `gamma`) with the distance by which the input sticks out of the box
//! along the worst dimension.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::ClassId;

fn check_unit<T: Scalar>(values: &[T], what: &str) -> Result<()> {
    for (j, &x) in values.iter().enumerate() {
        if !(x >= T::zero() && x <= T::one()) {
            return Err(Error::OutOfRange(format!(
                "{what}[{j}] = {x} is outside [0, 1]"
            )));
        }
    }
    Ok(())
}

fn check_ordered<T: Scalar>(lower: &[T], upper: &[T], what: &str) -> Result<()> {
    if lower.len() != upper.len() {
        return Err(Error::Shape {
            expected: lower.len(),
            found: upper.len(),
        });
    }
    if lower.is_empty() {
        return Err(invalid("dimensions", format!("{what} must have at least one dimension")));
    }
    check_unit(lower, what)?;
    check_unit(upper, what)?;
    for (j, (l, u)) in lower.iter().zip(upper).enumerate() {
        if l > u {
            return Err(Error::OutOfRange(format!(
                "{what}: lower bound {l} exceeds upper bound {u} on dimension {j}"
            )));
        }
    }
    Ok(())
}

/// An axis-aligned box `[min_point, max_point]` representing one class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperbox<T> {
    pub min_point: Vec<T>,
    pub max_point: Vec<T>,
    pub class_label: ClassId,
    pub sample_count: usize,
}

impl<T: Scalar> Hyperbox<T> {
    pub fn new(
        min_point: Vec<T>,
        max_point: Vec<T>,
        class_label: ClassId,
        sample_count: usize,
    ) -> Result<Self> {
        check_ordered(&min_point, &max_point, "hyperbox")?;
        Ok(Self {
            min_point,
            max_point,
            class_label,
            sample_count,
        })
    }

    /// Zero-width box sitting exactly on a sample.
    pub fn degenerate(sample: &IntervalSample<T>, class_label: ClassId) -> Self {
        Self {
            min_point: sample.lower.clone(),
            max_point: sample.upper.clone(),
            class_label,
            sample_count: 1,
        }
    }

    pub fn dims(&self) -> usize {
        self.min_point.len()
    }

    pub fn max_width(&self) -> T {
        self.min_point
            .iter()
            .zip(&self.max_point)
            .map(|(&v, &w)| w - v)
            .fold(T::zero(), T::max)
    }

    pub fn center(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.min_point
            .iter()
            .zip(&self.max_point)
            .map(|(&v, &w)| (v + w) * half)
            .collect()
    }

    /// True when the interval `[lower, upper]` lies inside the box on every dimension.
    pub fn contains(&self, lower: &[T], upper: &[T]) -> bool {
        self.min_point
            .iter()
            .zip(&self.max_point)
            .zip(lower.iter().zip(upper))
            .all(|((&v, &w), (&l, &u))| v <= l && u <= w)
    }
}

/// An input pattern given as a per-dimension interval. Crisp points have `lower == upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSample<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub class_label: Option<ClassId>,
}

impl<T: Scalar> IntervalSample<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>, class_label: Option<ClassId>) -> Result<Self> {
        check_ordered(&lower, &upper, "sample")?;
        Ok(Self {
            lower,
            upper,
            class_label,
        })
    }

    pub fn crisp(values: Vec<T>, class_label: Option<ClassId>) -> Result<Self> {
        Self::new(values.clone(), values, class_label)
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn is_crisp(&self) -> bool {
        self.lower == self.upper
    }

    pub fn center(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| (l + u) * half)
            .collect()
    }

    pub fn with_label(mut self, class_label: Option<ClassId>) -> Self {
        self.class_label = class_label;
        self
    }
}

/// Per-dimension slope of the membership decay outside a box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Sensitivity<T> {
    /// One value broadcast to every dimension.
    Uniform(T),
    PerDimension(Vec<T>),
}

impl<T: Scalar> Default for Sensitivity<T> {
    fn default() -> Self {
        Sensitivity::Uniform(T::one())
    }
}

impl<T: Scalar> Sensitivity<T> {
    pub fn uniform(gamma: T) -> Result<Self> {
        let s = Sensitivity::Uniform(gamma);
        s.validate()?;
        Ok(s)
    }

    pub fn per_dimension(gammas: Vec<T>) -> Result<Self> {
        let s = Sensitivity::PerDimension(gammas);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = match self {
            Sensitivity::Uniform(g) => !(*g > T::zero() && g.is_finite()),
            Sensitivity::PerDimension(gs) => {
                gs.is_empty() || gs.iter().any(|g| !(*g > T::zero() && g.is_finite()))
            }
        };
        if bad {
            return Err(invalid("gamma", "every sensitivity value must be positive and finite"));
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, j: usize) -> T {
        match self {
            Sensitivity::Uniform(g) => *g,
            Sensitivity::PerDimension(gs) => gs[j],
        }
    }

    /// Fails unless the sensitivity can be applied to `dims` dimensions.
    pub fn check_dims(&self, dims: usize) -> Result<()> {
        match self {
            Sensitivity::Uniform(_) => Ok(()),
            Sensitivity::PerDimension(gs) if gs.len() == dims => Ok(()),
            Sensitivity::PerDimension(gs) => Err(Error::Shape {
                expected: dims,
                found: gs.len(),
            }),
        }
    }

    /// Restriction to a feature subset.
    pub fn project(&self, feature_indices: &[usize]) -> Result<Self> {
        match self {
            Sensitivity::Uniform(g) => Ok(Sensitivity::Uniform(*g)),
            Sensitivity::PerDimension(gs) => feature_indices
                .iter()
                .map(|&f| {
                    gs.get(f).copied().ok_or(Error::Index {
                        index: f,
                        n_features: gs.len(),
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(Sensitivity::PerDimension),
        }
    }
}

#[inline]
pub(crate) fn ramp_unchecked<T: Scalar>(xi: T, gamma: T) -> T {
    let s = xi * gamma;
    if s > T::one() {
        T::one()
    } else if s >= T::zero() {
        s
    } else {
        T::zero()
    }
}

/// Two-parameter ramp: `0` below zero, `xi * gamma` in between, saturating at `1`.
pub fn ramp<T: Scalar>(xi: T, gamma: T) -> Result<T> {
    if !(gamma > T::zero()) {
        return Err(invalid("gamma", format!("must be positive, got {gamma}")));
    }
    Ok(ramp_unchecked(xi, gamma))
}

#[inline]
pub(crate) fn membership_raw<T: Scalar>(
    lower: &[T],
    upper: &[T],
    min_point: &[T],
    max_point: &[T],
    gamma: &Sensitivity<T>,
) -> T {
    let mut worst = T::zero();
    for j in 0..min_point.len() {
        let g = gamma.get(j);
        let above = ramp_unchecked(upper[j] - max_point[j], g);
        let below = ramp_unchecked(min_point[j] - lower[j], g);
        worst = worst.max(above.max(below));
        if worst >= T::one() {
            break;
        }
    }
    T::one() - worst
}

/// Degree of fit of `sample` to `hyperbox`, in `[0, 1]`.
pub fn membership<T: Scalar>(
    sample: &IntervalSample<T>,
    hyperbox: &Hyperbox<T>,
    gamma: &Sensitivity<T>,
) -> Result<T> {
    check_same_dims(hyperbox.dims(), sample.dims())?;
    gamma.check_dims(hyperbox.dims())?;
    Ok(membership_raw(
        &sample.lower,
        &sample.upper,
        &hyperbox.min_point,
        &hyperbox.max_point,
        gamma,
    ))
}

#[inline]
pub(crate) fn check_same_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Shape { expected, found });
    }
    Ok(())
}

/// Coordinatewise hull of a box and a sample; the box itself is left untouched.
pub fn expansion_bounds<T: Scalar>(
    hyperbox: &Hyperbox<T>,
    sample: &IntervalSample<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    check_same_dims(hyperbox.dims(), sample.dims())?;
    let lo = hyperbox
        .min_point
        .iter()
        .zip(&sample.lower)
        .map(|(&v, &x)| v.min(x))
        .collect();
    let hi = hyperbox
        .max_point
        .iter()
        .zip(&sample.upper)
        .map(|(&w, &x)| w.max(x))
        .collect();
    Ok((lo, hi))
}

pub(crate) fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if !(theta > T::zero() && theta <= T::one()) {
        return Err(invalid("theta", format!("must lie in (0, 1], got {theta}")));
    }
    Ok(())
}

#[inline]
pub(crate) fn hull_fits<T: Scalar>(
    min_point: &[T],
    max_point: &[T],
    lower: &[T],
    upper: &[T],
    theta: T,
) -> bool {
    (0..min_point.len())
        .all(|j| max_point[j].max(upper[j]) - min_point[j].min(lower[j]) <= theta)
}

/// Whether absorbing `sample` would keep every side of the box within `theta`.
pub fn is_expandable<T: Scalar>(
    hyperbox: &Hyperbox<T>,
    sample: &IntervalSample<T>,
    theta: T,
) -> Result<bool> {
    check_theta(theta)?;
    check_same_dims(hyperbox.dims(), sample.dims())?;
    Ok(hull_fits(
        &hyperbox.min_point,
        &hyperbox.max_point,
        &sample.lower,
        &sample.upper,
        theta,
    ))
}

#[inline]
pub(crate) fn bounds_overlap<T: Scalar>(
    min_a: &[T],
    max_a: &[T],
    min_b: &[T],
    max_b: &[T],
) -> bool {
    (0..min_a.len()).all(|j| min_a[j].max(min_b[j]) <= max_a[j].min(max_b[j]))
}

/// Closed-interval intersection test on every dimension; shared faces count.
pub fn overlaps<T: Scalar>(a: &Hyperbox<T>, b: &Hyperbox<T>) -> Result<bool> {
    check_same_dims(a.dims(), b.dims())?;
    Ok(bounds_overlap(
        &a.min_point,
        &a.max_point,
        &b.min_point,
        &b.max_point,
    ))
}
