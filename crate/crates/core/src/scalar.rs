use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst};
use rustfft::FftNum;

/// Floating-point scalar accepted by every norm in the crate.
pub trait Real: Float + FloatConst + FftNum + Sum + Display + Debug + Default {
    /// Converts an `f64` constant; every `Real` can represent (a rounding of) any finite `f64`.
    fn lit(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: Float + FloatConst + FftNum + Sum + Display + Debug + Default {}

/// `x^e` that returns `x` untouched for `e == 1`, so identities such as
/// jn(alpha = q) == tent(p = inf) hold bit-for-bit.
#[inline]
pub(crate) fn powr<T: Real>(x: T, e: T) -> T {
    if e == T::one() {
        x
    } else if x == T::zero() {
        T::zero()
    } else {
        x.powf(e)
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Accumulator<T> {
    pub fn new() -> Self {
        Accumulator { sum: T::zero(), comp: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(items: I) -> T {
    let mut acc = Accumulator::new();
    for x in items {
        acc.add(x);
    }
    acc.value()
}
