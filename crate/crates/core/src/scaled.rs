//! Sign plus natural-log magnitude, for products and determinants whose
//! magnitude leaves the `f64` range.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// `sign * exp(log_mag)`. When `sign == 0` the value is zero and `log_mag`
/// is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledReal {
    sign: i8,
    log_mag: f64,
}

// ln(f64::MAX) and ln(smallest positive subnormal)
const LN_MAX: f64 = 709.782712893384;
const LN_MIN: f64 = -744.4400719213812;

impl ScaledReal {
    pub const ZERO: Self = Self { sign: 0, log_mag: f64::NEG_INFINITY };
    pub const ONE: Self = Self { sign: 1, log_mag: 0.0 };

    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign: sign.signum(), log_mag }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self { sign: if x > 0.0 { 1 } else { -1 }, log_mag: x.abs().ln() }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_mag(&self) -> f64 {
        self.log_mag
    }

    pub fn log10_mag(&self) -> f64 {
        self.log_mag / std::f64::consts::LN_10
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn abs(&self) -> Self {
        Self { sign: self.sign.abs(), log_mag: self.log_mag }
    }

    /// Plain value; saturates to `±inf` or `±0` outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log_mag.exp()
        }
    }

    /// `Some` only when the value is representable without saturating.
    pub fn to_f64_checked(&self) -> Option<f64> {
        if self.sign == 0 {
            Some(0.0)
        } else if self.log_mag < LN_MAX && self.log_mag > LN_MIN {
            Some(self.to_f64())
        } else {
            None
        }
    }

    /// Multiplies by `2^exp`, exact in the log domain up to one rounding.
    pub fn scale_pow2(&self, exp: i64) -> Self {
        if self.sign == 0 {
            *self
        } else {
            Self { sign: self.sign, log_mag: self.log_mag + exp as f64 * std::f64::consts::LN_2 }
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let sign = if n % 2 == 0 { self.sign.abs() } else { self.sign };
        Self::new(sign, self.log_mag * n as f64)
    }

    pub fn recip(&self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero");
        Self { sign: self.sign, log_mag: -self.log_mag }
    }

    /// Signed sum, computed relative to the larger magnitude.
    pub fn add(&self, other: &Self) -> Self {
        if self.sign == 0 {
            return *other;
        }
        if other.sign == 0 {
            return *self;
        }
        let (big, small) = if self.log_mag >= other.log_mag { (self, other) } else { (other, self) };
        let ratio = (small.log_mag - big.log_mag).exp();
        if big.sign == small.sign {
            Self { sign: big.sign, log_mag: big.log_mag + ratio.ln_1p() }
        } else if ratio >= 1.0 {
            Self::ZERO
        } else {
            Self { sign: big.sign, log_mag: big.log_mag + (-ratio).ln_1p() }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&-*other)
    }

    /// Compares magnitudes only.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.sign == 0, other.sign == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.log_mag.partial_cmp(&other.log_mag).unwrap_or(Ordering::Equal),
        }
    }

    /// Product of many terms, summing logs with compensation.
    pub fn product<I: IntoIterator<Item = f64>>(factors: I) -> Self {
        let mut sign = 1i8;
        let mut acc = crate::numeric::CompensatedSum::new();
        for f in factors {
            if f == 0.0 {
                return Self::ZERO;
            }
            if f < 0.0 {
                sign = -sign;
            }
            acc.add(f.abs().ln());
        }
        Self { sign, log_mag: acc.value() }
    }
}

impl Mul for ScaledReal {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign * rhs.sign, self.log_mag + rhs.log_mag)
    }
}

impl Div for ScaledReal {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Neg for ScaledReal {
    type Output = Self;

    fn neg(self) -> Self {
        Self { sign: -self.sign, log_mag: self.log_mag }
    }
}

impl fmt::Display for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_f64_checked() {
            Some(v) => write!(f, "{v}"),
            None => {
                let sign = if self.sign < 0 { "-" } else { "" };
                write!(f, "{sign}exp({})", self.log_mag)
            }
        }
    }
}

impl Serialize for ScaledReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ScaledReal", 3)?;
        st.serialize_field("sign", &self.sign)?;
        let log10 = if self.sign == 0 { None } else { Some(self.log10_mag()) };
        st.serialize_field("log10_magnitude", &log10)?;
        st.serialize_field("value", &self.to_f64_checked())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_handling() {
        assert!(ScaledReal::from_f64(0.0).is_zero());
        assert_eq!(ScaledReal::from_f64(3.0).add(&ScaledReal::from_f64(-3.0)), ScaledReal::ZERO);
        assert_eq!((ScaledReal::ZERO * ScaledReal::from_f64(5.0)).sign(), 0);
    }

    #[test]
    fn huge_values_do_not_overflow() {
        let big = ScaledReal::new(1, 2000.0);
        assert_eq!(big.to_f64_checked(), None);
        assert_eq!(big.to_f64(), f64::INFINITY);
        let back = (big * big) / big;
        assert!((back.log_mag() - 2000.0).abs() < 1e-12);
        let sum = big.add(&big);
        assert!((sum.log_mag() - (2000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn product_of_many_small_factors() {
        let p = ScaledReal::product(std::iter::repeat(1e-10).take(100));
        assert!((p.log10_mag() + 1000.0).abs() < 1e-9);
        let p = ScaledReal::product([2.0, -3.0, 0.5]);
        assert_eq!(p.to_f64_checked().map(|v| (v + 3.0).abs() < 1e-15), Some(true));
    }

    #[test]
    fn serializes_sign_log_value() {
        let v = serde_json::to_value(ScaledReal::from_f64(-100.0)).unwrap();
        assert_eq!(v["sign"], -1);
        assert!((v["log10_magnitude"].as_f64().unwrap() - 2.0).abs() < 1e-15);
        let v = serde_json::to_value(ScaledReal::new(1, 1e4)).unwrap();
        assert!(v["value"].is_null());
    }

    proptest! {
        #[test]
        fn arithmetic_matches_f64(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let (sa, sb) = (ScaledReal::from_f64(a), ScaledReal::from_f64(b));
            let prod = (sa * sb).to_f64();
            prop_assert!((prod - a * b).abs() <= 1e-13 * (a * b).abs() + 1e-300);
            let sum = sa.add(&sb).to_f64();
            prop_assert!((sum - (a + b)).abs() <= 1e-12 * (a.abs() + b.abs()) + 1e-300);
            let back = ScaledReal::from_f64(a).to_f64();
            prop_assert!((back - a).abs() <= 1e-14 * a.abs());
            prop_assert_eq!(back.signum() == a.signum() || a == 0.0, true);
        }
    }
}
