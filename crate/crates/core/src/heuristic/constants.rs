//! `P(p does not divide h)` and `P_0 = P(h = 1)` as high-precision reals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{is_prime, sieve_primes};
use crate::error::{Error, Result};
use crate::heuristic::real::{ulp, Real, FRAC_BITS};

pub const DEFAULT_PRIME_LIMIT: u64 = 1_000_000;
pub const DEFAULT_ZETA_TERMS: u32 = 256;

/// Terms of the Borwein series for the alternating zeta function. The
/// truncation error is below `3 (3 + sqrt 8)^-n`, about `1e-96` here.
const BORWEIN_TERMS: usize = 125;

/// A truncated product together with a bound on `|truncated - limit|`.
#[derive(Debug, Clone)]
pub struct Bounded {
    pub value: Real,
    pub tail_bound: f64,
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 || !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not an odd prime")));
    }
    Ok(())
}

/// `prod_{k=2}^{terms} (1 - p^-k)`, the conjectural probability that `p`
/// does not divide `h`. The tail bound is `sum_{k > terms} p^-k`.
pub fn prob_nondivisible(p: u64, terms: u32) -> Result<Bounded> {
    check_odd_prime(p)?;
    if terms < 2 {
        return Err(Error::InvalidInput("terms must be at least 2".into()));
    }
    let value = nondivisible_product(p, terms);
    let tail_bound = (p as f64).powi(-(terms as i32)) / (p as f64 - 1.0);
    Ok(Bounded { value, tail_bound })
}

fn nondivisible_product(p: u64, terms: u32) -> Real {
    let x = Real::recip_pow(p, 1);
    let mut power = &x * &x;
    let mut product = Real::one();
    for _ in 2..=terms {
        if power == Real::zero() {
            break;
        }
        product = &product * &(Real::one() - power.clone());
        power = &power * &x;
    }
    product
}

/// The number of factors after which `p^-k` vanishes at working precision.
pub fn full_precision_terms(p: u64) -> u32 {
    (FRAC_BITS as f64 / (p as f64).log2()).ceil() as u32 + 2
}

/// `(1 - prod_{k>=2}(1 - p^-k)) / prod_{k>=2}(1 - p^-k)`, the value the
/// prime-power sums of lambda converge to.
pub fn power_sum_limit(p: u64) -> Result<Real> {
    check_odd_prime(p)?;
    let prod = nondivisible_product(p, full_precision_terms(p));
    Ok((Real::one() - prod.clone()) / prod)
}

/// Weights `(d_n - d_k) / d_n` of the Borwein acceleration, so that
/// `eta(s) ~ sum_k (-1)^k w_k (k+1)^-s`.
fn borwein_weights(n: usize) -> Vec<Real> {
    // d_k = n sum_{i=0}^{k} (n+i-1)! 4^i / ((n-i)! (2i)!)
    let fact: Vec<BigInt> = std::iter::once(BigInt::one())
        .chain((1..=2 * n).scan(BigInt::one(), |acc, i| {
            *acc *= i;
            Some(acc.clone())
        }))
        .collect();
    let mut d = Vec::with_capacity(n + 1);
    let mut sum = BigRational::zero();
    for i in 0..=n {
        let num = &fact[n + i - 1] * BigInt::from(4u32).pow(i as u32);
        let den = &fact[n - i] * &fact[2 * i];
        sum += BigRational::new(num * n, den);
        d.push(sum.clone());
    }
    let dn = d[n].clone();
    (0..n).map(|k| Real::from_rational(&((&dn - &d[k]) / &dn))).collect()
}

/// `(1 - 2^-s) zeta(s) = sum over odd m of m^-s`, for integer `s >= 2`.
fn odd_zeta(s: u32, weights: &[Real]) -> Real {
    if s >= 40 {
        // m^-s drops below the working precision before m = 2^(320/40)
        let mut sum = Real::zero();
        for m in (1u64..).step_by(2) {
            let term = Real::recip_pow(m, s);
            if term == Real::zero() {
                return sum;
            }
            sum = sum + term;
        }
    }
    let mut eta = Real::zero();
    for (k, w) in weights.iter().enumerate() {
        let term = w * &Real::recip_pow(k as u64 + 1, s);
        eta = if k % 2 == 0 { eta + term } else { eta - term };
    }
    // (1 - 2^-s) / (1 - 2^(1-s)) = (2^s - 1) / (2^s - 2)
    let two_s = BigInt::one() << s;
    let factor = Real::ratio(&(&two_s - 1), &(&two_s - 2));
    &eta * &factor
}

/// `zeta(s)` for integer `s >= 2`.
pub fn zeta(s: u32) -> Real {
    let w = borwein_weights(BORWEIN_TERMS);
    let two_s = BigInt::one() << s;
    &odd_zeta(s, &w) * &Real::ratio(&two_s, &(&two_s - 1))
}

/// Two independent evaluations of `P_0`.
#[derive(Debug, Clone)]
pub struct P0Evaluation {
    /// `prod_{k=2}^{zeta_terms} ((1 - 2^-k) zeta(k))^-1`.
    pub zeta_form: Real,
    pub zeta_tail: f64,
    /// `prod_{3 <= p <= prime_limit} prod_{k>=2} (1 - p^-k)`.
    pub direct: Real,
    pub direct_tail: f64,
    pub prime_limit: u64,
    pub zeta_terms: u32,
}

impl P0Evaluation {
    pub fn difference(&self) -> f64 {
        (self.zeta_form.clone() - self.direct.clone()).abs().to_f64()
    }

    pub fn combined_bound(&self) -> f64 {
        self.zeta_tail + self.direct_tail
    }
}

/// `P_0` by the zeta form, cross-checked against the direct double product.
pub fn p0_constant(prime_limit: u64, zeta_terms: u32) -> Result<P0Evaluation> {
    if prime_limit < 3 || zeta_terms < 2 {
        return Err(Error::InvalidInput("need prime_limit >= 3 and zeta_terms >= 2".into()));
    }
    let zeta_form = p0_zeta_form(zeta_terms);
    // log of the omitted factors is below sum_{k > K} 2 * 3^-k = 3^-K,
    // plus one ulp of rounding per operation
    let rounding = 4.0 * (zeta_terms as f64) * (BORWEIN_TERMS as f64) * ulp();
    let zeta_tail = 3f64.powi(-(zeta_terms.min(1000) as i32)) + rounding;

    let direct = p0_direct(prime_limit);
    // primes p > L contribute at most sum_{odd n > L} 1/(n(n-1)) < 1/(2(L-1))
    // to -log, and the product is below one
    let l = prime_limit as f64;
    let t = 1.0 / (2.0 * (l - 1.0)) * (l / (l - 1.0));
    let direct_tail = t + 1e3 * (prime_limit as f64) * ulp();

    let eval = P0Evaluation { zeta_form, zeta_tail, direct, direct_tail, prime_limit, zeta_terms };
    if eval.difference() > eval.combined_bound() {
        return Err(Error::Consistency(format!(
            "P0 evaluations disagree: zeta form {} vs direct product {} (bound {:e})",
            eval.zeta_form.to_decimal(20),
            eval.direct.to_decimal(20),
            eval.combined_bound()
        )));
    }
    Ok(eval)
}

pub fn p0_zeta_form(zeta_terms: u32) -> Real {
    let weights = borwein_weights(BORWEIN_TERMS);
    let mut product = Real::one();
    for k in 2..=zeta_terms {
        let factor = odd_zeta(k, &weights);
        if factor == Real::one() {
            break;
        }
        product = product / factor;
    }
    product
}

pub fn p0_direct(prime_limit: u64) -> Real {
    let mut product = Real::one();
    for p in sieve_primes(prime_limit).into_iter().skip(1) {
        product = &product * &nondivisible_product(p, full_precision_terms(p));
    }
    product
}

/// The model constants: `P_0` and `P(p does not divide h)` for small odd primes.
#[derive(Debug, Clone)]
pub struct HeuristicConstants {
    pub p0: Real,
    pub p0_tail: f64,
    pub per_prime_nondiv: BTreeMap<u64, Real>,
}

impl HeuristicConstants {
    /// Zeta-form `P_0` and the per-prime factors for odd primes `<= list_limit`.
    pub fn new(zeta_terms: u32, list_limit: u64) -> Self {
        let p0 = p0_zeta_form(zeta_terms);
        let p0_tail = 3f64.powi(-(zeta_terms.min(1000) as i32));
        let per_prime_nondiv = sieve_primes(list_limit.max(2))
            .into_iter()
            .skip(1)
            .map(|p| (p, nondivisible_product(p, full_precision_terms(p))))
            .collect();
        HeuristicConstants { p0, p0_tail, per_prime_nondiv }
    }
}
