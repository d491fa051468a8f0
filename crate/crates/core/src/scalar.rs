//! Scalar abstraction for times and edge weights.
//!
//! Every algorithm in this crate only needs ring arithmetic and a
//! comparison on times, so it is written against [`Scalar`] and runs on
//! `f32`, `f64` and exact rationals alike.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion used for reporting and cross-algorithm tolerances.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// A value paired with an id, ordered lexicographically.
///
/// This is the total order used wherever a minimum or maximum of times is
/// taken: equal values are broken by the smaller id.
#[derive(Debug, Clone, Copy)]
pub struct Keyed<T> {
    pub value: T,
    pub id: usize,
}

impl<T: Scalar> Keyed<T> {
    pub fn new(value: T, id: usize) -> Self {
        Keyed { value, id }
    }
}

impl<T: Scalar> PartialEq for Keyed<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Keyed<T> {}

impl<T: Scalar> PartialOrd for Keyed<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Keyed<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.id.cmp(&other.id))
    }
}

/// `|a - b| <= tol`, computed in `f64`.
pub fn approx_eq<T: Scalar>(a: T, b: T, tol: f64) -> bool {
    (a.as_f64() - b.as_f64()).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn keyed_breaks_ties_by_id() {
        let a = Keyed::new(1.0_f64, 3);
        let b = Keyed::new(1.0_f64, 1);
        let c = Keyed::new(0.5_f64, 9);
        let mut v = [a, b, c];
        v.sort();
        assert_eq!(v.iter().map(|k| k.id).collect::<Vec<_>>(), vec![9, 1, 3]);
    }

    #[test]
    fn rationals_are_scalars() {
        let a = Ratio::new(1_i64, 3);
        let b = Ratio::new(2_i64, 3);
        assert_eq!(a + a, b);
        assert!((a.as_f64() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.max_of(b), b);
    }
}
