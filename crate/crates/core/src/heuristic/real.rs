//! Fixed-point reals with [`FRAC_BITS`] fractional bits on top of `BigInt`.
//!
//! Enough for ~96 significant decimal digits of the model constants. All
//! operations truncate toward negative infinity, so every rounding error is
//! at most one unit in the last place per operation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const FRAC_BITS: u64 = 320;

/// Size of one unit in the last place, `2^-FRAC_BITS`, as `f64`.
pub fn ulp() -> f64 {
    (-(FRAC_BITS as f64)).exp2()
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Real(BigInt);

impl Real {
    pub fn zero() -> Self {
        Real(BigInt::zero())
    }

    pub fn one() -> Self {
        Real(BigInt::one() << FRAC_BITS)
    }

    pub fn from_int(n: i64) -> Self {
        Real(BigInt::from(n) << FRAC_BITS)
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        Real(n << FRAC_BITS)
    }

    /// `num / den`, floored to the grid.
    pub fn ratio(num: &BigInt, den: &BigInt) -> Self {
        assert!(!den.is_zero(), "division by zero");
        Real((num << FRAC_BITS).div_floor(den))
    }

    pub fn from_rational(q: &BigRational) -> Self {
        Real::ratio(q.numer(), q.denom())
    }

    /// `n^-k` for a positive integer base.
    pub fn recip_pow(n: u64, k: u32) -> Self {
        Real::ratio(&BigInt::one(), &BigInt::from(n).pow(k))
    }

    pub fn div_int(&self, n: i64) -> Self {
        Real(self.0.div_floor(&BigInt::from(n)))
    }

    pub fn mul_int(&self, n: i64) -> Self {
        Real(&self.0 * n)
    }

    pub fn recip(&self) -> Self {
        Real::one() / self.clone()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == Sign::Minus
    }

    pub fn to_f64(&self) -> f64 {
        // keep 64 significant bits before scaling down
        let bits = self.0.bits();
        if bits <= 64 {
            return self.0.to_f64().unwrap_or(0.0) * ulp();
        }
        let shift = bits - 64;
        let top = (&self.0 >> shift).to_f64().unwrap_or(0.0);
        top * ((shift as f64) - FRAC_BITS as f64).exp2()
    }

    /// Decimal expansion rounded to `places` digits after the point.
    pub fn to_decimal(&self, places: usize) -> String {
        let scale = BigInt::from(10u32).pow(places as u32);
        let scaled = &self.0 * &scale;
        let half = BigInt::one() << (FRAC_BITS - 1);
        let rounded: BigInt = (scaled + half) >> FRAC_BITS;
        let neg = rounded.is_negative();
        let digits = rounded.abs().to_string();
        let digits = if digits.len() <= places {
            format!("{}{}", "0".repeat(places + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int, frac) = digits.split_at(digits.len() - places);
        let sign = if neg { "-" } else { "" };
        if places == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// `pi` by Machin's formula.
    pub fn pi() -> Self {
        fn arctan_recip(x: i64) -> Real {
            // sum (-1)^k / ((2k+1) x^(2k+1))
            let x2 = BigInt::from(x * x);
            let mut power = Real::one().div_int(x);
            let mut sum = Real::zero();
            let mut k = 0i64;
            while !power.0.is_zero() {
                let term = power.div_int(2 * k + 1);
                sum = if k % 2 == 0 { sum + term } else { sum - term };
                power = Real(power.0.div_floor(&x2));
                k += 1;
            }
            sum
        }
        (arctan_recip(5).mul_int(4) - arctan_recip(239)).mul_int(4)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_decimal(40))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let places = f.precision().unwrap_or(30);
        f.write_str(&self.to_decimal(places))
    }
}

impl Add for Real {
    type Output = Real;
    fn add(self, rhs: Real) -> Real {
        Real(self.0 + rhs.0)
    }
}

impl Sub for Real {
    type Output = Real;
    fn sub(self, rhs: Real) -> Real {
        Real(self.0 - rhs.0)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Mul for Real {
    type Output = Real;
    fn mul(self, rhs: Real) -> Real {
        Real((self.0 * rhs.0) >> FRAC_BITS)
    }
}

impl<'a> Mul<&'a Real> for &'a Real {
    type Output = Real;
    fn mul(self, rhs: &Real) -> Real {
        Real((&self.0 * &rhs.0) >> FRAC_BITS)
    }
}

impl Div for Real {
    type Output = Real;
    fn div(self, rhs: Real) -> Real {
        assert!(!rhs.0.is_zero(), "division by zero");
        Real((self.0 << FRAC_BITS).div_floor(&rhs.0))
    }
}
