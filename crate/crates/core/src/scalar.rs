//! Arithmetic abstraction shared by plain `f64` evaluation and jet evaluation.
//!
//! Everything that has to run both on plain numbers and on truncated Taylor
//! values (expression evaluation, orthonormalization of frames) is written
//! against [`Scalar`]. Decisions such as pivot selection are always taken on
//! [`Scalar::value`], so the jet version differentiates the branch that the
//! plain version takes.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// The order-0 part.
    fn value(&self) -> f64;

    /// A constant living in the same space as `self` (same jet layout).
    fn lift(&self, c: f64) -> Self;

    /// Whether derivative information is carried along.
    fn has_derivatives(&self) -> bool;

    fn scale(&self, c: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }

    fn lift(&self, c: f64) -> Self {
        c
    }

    fn has_derivatives(&self) -> bool {
        false
    }

    fn scale(&self, c: f64) -> Self {
        self * c
    }

    fn sin(&self) -> Self {
        f64::sin(*self)
    }

    fn cos(&self) -> Self {
        f64::cos(*self)
    }

    fn tan(&self) -> Self {
        f64::tan(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

/// Euclidean dot product of two equally long slices.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut iter = a.iter().zip(b);
    let (x0, y0) = iter.next().expect("dot of empty vectors");
    iter.fold(x0.clone() * y0.clone(), |acc, (x, y)| acc + x.clone() * y.clone())
}
