//! Descriptive statistics over resolution records.
//!
//! All numeric routines are generic over the floating-point scalar; the crate
//! root exposes `f64` aliases for the common case.

mod tables;

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use tables::{
    correlation_table, distance_bin, distance_bin_label, distributions, heatmap, size_bin,
    size_bin_label, top_types, ClassShare, CorrelationRow, CorrelationSubject, Distributions,
    HeatmapGrid, TypeShare, DISTANCE_BINS, DISTANCE_BIN_WIDTH, SIZE_BINS,
};

/// Floating-point scalar the statistics are computed in.
pub trait Scalar: Float + FromPrimitive + Sum + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + Sum + Debug + Send + Sync + 'static {}

fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("scalar can represent small literals")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("statistic of an empty sample")]
    Empty,
    #[error("sample contains NaN")]
    NotANumber,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("correlation needs at least two pairs, got {0}")]
    TooShort(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiveNumberSummary<T> {
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
}

impl<T: Scalar> FiveNumberSummary<T> {
    pub fn as_array(&self) -> [T; 5] {
        [self.min, self.q1, self.median, self.q3, self.max]
    }

    pub fn map<U>(self, f: impl Fn(T) -> U) -> FiveNumberSummary<U> {
        FiveNumberSummary {
            min: f(self.min),
            q1: f(self.q1),
            median: f(self.median),
            q3: f(self.q3),
            max: f(self.max),
        }
    }
}

/// Five-number summary with quartile boundaries at `p = k·n/4`, k = 1..3.
///
/// When `p` is integral the boundary is the mean of the 1-based elements
/// `p` and `p + 1` (the largest of the lower part and the smallest of the
/// upper part); otherwise it is element `⌈p⌉`.
pub fn quartiles<T: Scalar>(values: &[T]) -> Result<FiveNumberSummary<T>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN rejected above"));
    let n = sorted.len();
    let two = lit::<T>(2.0);
    let boundary = |k: usize| -> T {
        let scaled = k * n;
        if scaled.is_multiple_of(4) {
            let p = scaled / 4;
            (sorted[p - 1] + sorted[p]) / two
        } else {
            sorted[scaled.div_ceil(4) - 1]
        }
    };
    Ok(FiveNumberSummary {
        min: sorted[0],
        q1: boundary(1),
        median: boundary(2),
        q3: boundary(3),
        max: sorted[n - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Undefined {
    /// One of the two series is constant.
    ZeroVariance,
    /// Fewer than two usable pairs.
    TooFewSamples,
}

/// A correlation coefficient that may be undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation<T> {
    Defined(T),
    Undefined(Undefined),
}

impl<T: Copy> Correlation<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Correlation::Defined(v) => Some(*v),
            Correlation::Undefined(_) => None,
        }
    }

    pub fn is_defined(&self) -> bool {
        matches!(self, Correlation::Defined(_))
    }
}

impl<T: Serialize> Serialize for Correlation<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Correlation::Defined(v) => v.serialize(s),
            Correlation::Undefined(_) => s.serialize_none(),
        }
    }
}

/// Pearson product-moment correlation (two-pass).
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<Correlation<T>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort(x.len()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let constant = |v: &[T]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Ok(Correlation::Undefined(Undefined::ZeroVariance));
    }
    let n = T::from_usize(x.len()).expect("length fits the scalar");
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Ok(Correlation::Undefined(Undefined::ZeroVariance));
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(Correlation::Defined(r.max(-T::one()).min(T::one())))
}

/// Min-max scaling to `[0, 1]`; an all-equal sample maps to zeros.
pub fn min_max_normalize<T: Scalar>(values: &[T]) -> Vec<T> {
    let Some(&first) = values.first() else {
        return Vec::new();
    };
    let (lo, hi) = values
        .iter()
        .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if span == T::zero() {
        return vec![T::zero(); values.len()];
    }
    values.iter().map(|&v| (v - lo) / span).collect()
}

/// Resolution times of `records`, min-max normalized over the whole set.
pub fn normalize_times<T: Scalar>(records: &[crate::metrics::ResolutionRecord]) -> Vec<T> {
    let raw: Vec<T> = records
        .iter()
        .map(|r| T::from_i64(r.resolution_time).expect("time fits the scalar"))
        .collect();
    min_max_normalize(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quartile_rule_examples() {
        let s = quartiles(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.as_array(), [1.0, 1.5, 2.5, 3.5, 4.0]);
        let s = quartiles(&[5.0, 1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.as_array(), [1.0, 2.0, 3.0, 4.0, 5.0]);
        let s = quartiles(&[7.0f32]).unwrap();
        assert_eq!(s.as_array(), [7.0; 5]);
    }

    #[test]
    fn quartiles_of_two_and_six() {
        // n = 2: p = 0.5, 1, 1.5
        assert_eq!(
            quartiles(&[1.0, 3.0]).unwrap().as_array(),
            [1.0, 1.0, 2.0, 3.0, 3.0]
        );
        // n = 6: p = 1.5, 3, 4.5
        let s = quartiles(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(s.as_array(), [1.0, 2.0, 3.5, 5.0, 6.0]);
    }

    #[test]
    fn quartiles_reject_empty_and_nan() {
        assert_eq!(quartiles::<f64>(&[]), Err(StatsError::Empty));
        assert_eq!(quartiles(&[1.0, f64::NAN]), Err(StatsError::NotANumber));
    }

    /// Pairwise form: r = Σ_{i<j} dx_ij dy_ij / sqrt(Σ dx_ij² Σ dy_ij²).
    fn pairwise_oracle(x: &[f64], y: &[f64]) -> f64 {
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
                sxy += dx * dy;
                sxx += dx * dx;
                syy += dy * dy;
            }
        }
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn pearson_examples() {
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(),
            Correlation::Defined(1.0)
        );
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[3.0, 3.0, 3.0]).unwrap(),
            Correlation::Undefined(Undefined::ZeroVariance)
        );
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        let oracle = pairwise_oracle(&x, &y);
        assert!((oracle - 0.8).abs() < 1e-15);
        let r = pearson(&x, &y).unwrap().value().unwrap();
        assert!((r - oracle).abs() < 1e-12);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(pearson(&[1.0], &[1.0]), Err(StatsError::TooShort(1)));
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch(2, 1))
        );
    }

    #[test]
    fn pearson_in_f32() {
        let r = pearson(&[1.0f32, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r.value().unwrap() - 0.8).abs() < 1e-6);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(min_max_normalize(&[5.0, 10.0, 15.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(min_max_normalize(&[7.0, 7.0]), vec![0.0, 0.0]);
        assert!(min_max_normalize::<f64>(&[]).is_empty());
    }

    fn non_constant() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1e3f64..1e3, 2..60)
            .prop_filter("non-constant", |v| v.iter().any(|&a| a != v[0]))
    }

    proptest! {
        #[test]
        fn pearson_matches_pairwise_oracle(x in non_constant(), seed in any::<u64>()) {
            let y: Vec<f64> = x.iter().enumerate()
                .map(|(i, v)| ((i as u64).wrapping_mul(seed | 1) % 97) as f64 - v * 0.3)
                .collect();
            prop_assume!(y.iter().any(|&a| a != y[0]));
            let r = pearson(&x, &y).unwrap().value().unwrap();
            prop_assert!((r - pairwise_oracle(&x, &y)).abs() < 1e-9);
        }

        #[test]
        fn pearson_self_and_negation(x in non_constant()) {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert!((pearson(&x, &x).unwrap().value().unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((pearson(&x, &neg).unwrap().value().unwrap() + 1.0).abs() < 1e-12);
        }

        #[test]
        fn pearson_positive_affine_invariance(x in non_constant(), y in non_constant(), a in 0.01f64..100.0, b in -100.0f64..100.0) {
            let n = x.len().min(y.len());
            let (x, y) = (&x[..n], &y[..n]);
            prop_assume!(x.iter().any(|&v| v != x[0]) && y.iter().any(|&v| v != y[0]));
            let base = pearson(x, y).unwrap().value().unwrap();
            let moved: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let r = pearson(&moved, y).unwrap().value().unwrap();
            prop_assert!((base - r).abs() < 1e-12);
        }

        #[test]
        fn quartiles_ordered_and_permutation_invariant(mut v in proptest::collection::vec(-1e6f64..1e6, 1..50), extra in 0f64..1e6) {
            let s = quartiles(&v).unwrap();
            let a = s.as_array();
            prop_assert!(a.windows(2).all(|w| w[0] <= w[1]));
            v.reverse();
            prop_assert_eq!(quartiles(&v).unwrap(), s);
            // adding a value >= max never decreases a summary number
            let mut grown = v.clone();
            grown.push(s.max + extra);
            let g = quartiles(&grown).unwrap().as_array();
            prop_assert!(g.iter().zip(a.iter()).all(|(g, a)| g >= a));
        }

        #[test]
        fn normalized_span_is_unit(v in proptest::collection::vec(0f64..1e6, 2..50)) {
            let n = min_max_normalize(&v);
            prop_assert!(n.iter().all(|x| (0.0..=1.0).contains(x)));
            if v.iter().any(|&a| a != v[0]) {
                prop_assert_eq!(n.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
                prop_assert_eq!(n.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
            }
        }
    }
}
