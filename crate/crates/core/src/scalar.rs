//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Bids always live on an integer lattice, so the only place the scalar type
//! matters is probability mass and utility arithmetic. `f64` is the working
//! default; the rational types make every identity hold with equality, which
//! is what the exact-regret checks in the solver rely on.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, ToPrimitive, Zero};

/// Field-like number type used for masses, utilities and regrets.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    fn from_int(v: i64) -> Self;

    /// Converts a configuration value. Rational types read the shortest decimal
    /// representation of `v`, so `0.3` becomes exactly `3/10`.
    fn from_real(v: f64) -> Self;

    fn to_real(&self) -> f64;

    /// Slack used by every "numerically zero" comparison. Zero for exact types.
    fn tolerance() -> Self;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }

    fn quarter() -> Self {
        Self::ratio(1, 4)
    }

    fn abs_diff(&self, other: &Self) -> Self {
        if self >= other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn from_int(v: i64) -> Self {
                v as $t
            }
            fn from_real(v: f64) -> Self {
                v as $t
            }
            fn to_real(&self) -> f64 {
                *self as f64
            }
            fn tolerance() -> Self {
                $tol
            }
        }
    };
}

float_scalar!(f64, 1e-12);
float_scalar!(f32, 1e-5);

/// Parses the shortest round-trip decimal form of `v` into numerator and
/// power-of-ten denominator.
fn decimal_parts(v: f64) -> (BigInt, BigInt) {
    assert!(v.is_finite(), "non-finite value {v} has no rational form");
    let text = format!("{v:e}");
    let (mantissa, exponent) = text.split_once('e').expect("exponent form");
    let exponent: i32 = exponent.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let mantissa = mantissa.trim_start_matches('-');
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int_part}{frac_part}").parse().expect("digits");
    let shift = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let (mut num, den) = if shift >= 0 {
        (digits * num_traits::pow(ten, shift as usize), BigInt::from(1))
    } else {
        (digits, num_traits::pow(ten, (-shift) as usize))
    };
    if negative {
        num = -num;
    }
    (num, den)
}

impl Scalar for BigRational {
    fn from_int(v: i64) -> Self {
        Ratio::from_integer(BigInt::from(v))
    }
    fn from_real(v: f64) -> Self {
        let (num, den) = decimal_parts(v);
        Ratio::new(num, den)
    }
    fn to_real(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn tolerance() -> Self {
        Self::zero()
    }
}

macro_rules! ratio_scalar {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            fn from_int(v: i64) -> Self {
                Ratio::from_integer(v as $int)
            }
            fn from_real(v: f64) -> Self {
                let exact = BigRational::from_real(v);
                let num = exact.numer().to_i128().and_then(|n| <$int>::try_from(n).ok());
                let den = exact.denom().to_i128().and_then(|d| <$int>::try_from(d).ok());
                match (num, den) {
                    (Some(n), Some(d)) => Ratio::new(n, d),
                    _ => panic!("{v} does not fit a {}-bit rational", <$int>::BITS),
                }
            }
            fn to_real(&self) -> f64 {
                *self.numer() as f64 / *self.denom() as f64
            }
            fn tolerance() -> Self {
                Self::zero()
            }
        }
    };
}

ratio_scalar!(i64);
ratio_scalar!(i128);

/// Kahan-compensated accumulator. For exact scalars the compensation term
/// stays zero and this is a plain sum.
#[derive(Clone, Debug)]
pub struct CompensatedSum<T> {
    sum: T,
    carry: T,
}

impl<T: Scalar> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self {
            sum: T::zero(),
            carry: T::zero(),
        }
    }
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn add(&mut self, value: T) {
        let y = value - self.carry.clone();
        let t = self.sum.clone() + y.clone();
        self.carry = (t.clone() - self.sum.clone()) - y;
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum.clone()
    }
}

impl<T: Scalar> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of scalars.
pub fn sum<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<CompensatedSum<T>>().total()
}
