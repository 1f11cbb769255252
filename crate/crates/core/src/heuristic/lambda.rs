//! The arithmetic function `lambda_q = P(h = q) / P(h = 1)` over odd `q`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::arith::{factorize, is_prime};
use crate::error::{Error, Result};

/// One prime-power factor of a [`LambdaValue`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimePowerFactor {
    pub prime: u64,
    pub exponent: u32,
    pub value: BigRational,
}

/// `lambda_q` as an exact rational, with the prime-power factors it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaValue {
    pub q: u64,
    pub value: BigRational,
    pub factor_trace: Vec<PrimePowerFactor>,
}

impl LambdaValue {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(0.0)
    }
}

impl fmt::Display for LambdaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.value))
    }
}

/// `n/d`, or just `n` when the denominator is one.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d == BigInt::from(0) {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Exponent `floor(n/2 + 1)` in the recursion for `lambda_{p^n}`.
///
/// Kept on its own so an alternative exponent can be swapped in without
/// touching anything else.
fn recursion_exponent(n: u32) -> u32 {
    n / 2 + 1
}

/// `lambda_{p^n}`: `1/(p(p-1))` at `n = 1`, then divided by
/// `p^floor(n/2 + 1) - 1` at each further step.
pub fn lambda_prime_power(p: u64, n: u32) -> Result<BigRational> {
    if p == 2 {
        return Err(Error::InvalidInput(
            "lambda is defined for odd primes only; the model covers odd class numbers".into(),
        ));
    }
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("prime-power exponent must be at least 1".into()));
    }
    let big_p = BigInt::from(p);
    let mut value = BigRational::new(BigInt::one(), &big_p * (&big_p - 1));
    for m in 2..=n {
        value /= BigRational::from_integer(big_p.pow(recursion_exponent(m)) - 1);
    }
    Ok(value)
}

/// `lambda_q` for odd `q >= 1`, extended multiplicatively over the
/// factorization of `q`.
pub fn lambda(q: u64) -> Result<LambdaValue> {
    if q == 0 {
        return Err(Error::InvalidInput("q must be a positive odd integer".into()));
    }
    if q.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "q={q} is even; lambda covers odd class numbers only, even ones are compared \
             through the even-structure report (P_n = lambda_q P_(2^r))"
        )));
    }
    let mut value = BigRational::one();
    let mut factor_trace = Vec::new();
    for (prime, exponent) in factorize(q) {
        let v = lambda_prime_power(prime, exponent)?;
        value *= &v;
        factor_trace.push(PrimePowerFactor { prime, exponent, value: v });
    }
    Ok(LambdaValue { q, value, factor_trace })
}

/// `sum_{k=1}^{kmax} lambda_{p^k}`, exact.
pub fn lambda_power_sum(p: u64, kmax: u32) -> Result<BigRational> {
    if kmax == 0 {
        return Err(Error::InvalidInput("kmax must be at least 1".into()));
    }
    let mut term = lambda_prime_power(p, 1)?;
    let mut sum = term.clone();
    let big_p = BigInt::from(p);
    for m in 2..=kmax {
        term /= BigRational::from_integer(big_p.pow(recursion_exponent(m)) - 1);
        sum += &term;
    }
    Ok(sum)
}

/// `sum lambda_q` over odd `q <= qmax`, each term converted from its exact value.
pub fn lambda_mass(qmax: u64) -> Result<f64> {
    // compensated summation; the terms span many orders of magnitude
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    let mut q = 1;
    while q <= qmax {
        let x = lambda(q)?.to_f64();
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
        q += 2;
    }
    Ok(sum + carry)
}
