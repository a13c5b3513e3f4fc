use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{self, Rational};

/// Ordered field the oracle arithmetic is generic over.
pub trait Scalar:
    Clone
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(value: &Rational) -> Self;
    fn from_usize(value: usize) -> Self;

    fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        <Rational as One>::one()
    }
    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }
    fn from_usize(value: usize) -> Self {
        rational::from_int(value as i64)
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(value: &Rational) -> Self {
        rational::to_f64(value)
    }
    fn from_usize(value: usize) -> Self {
        value as f64
    }
}

/// Sign tests with a zero band of half-width `eps` (zero for exact arithmetic).
#[derive(Debug, Clone)]
pub struct Tol<F> {
    pub eps: F,
}

impl<F: Scalar> Tol<F> {
    pub fn exact() -> Self {
        Tol { eps: F::zero() }
    }

    pub fn is_pos(&self, x: &F) -> bool {
        *x > self.eps
    }

    pub fn is_neg(&self, x: &F) -> bool {
        *x < -self.eps.clone()
    }

    pub fn is_zero(&self, x: &F) -> bool {
        !self.is_pos(x) && !self.is_neg(x)
    }

    pub fn le(&self, a: &F, b: &F) -> bool {
        !self.is_pos(&(a.clone() - b.clone()))
    }
}
