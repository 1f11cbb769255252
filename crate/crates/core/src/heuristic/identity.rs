//! Both sides of the nested-fraction product identity
//!
//! ```text
//! prod_{k>=1} (1 - p^-k)^-1
//!   = 1 + 1/(p-1) (1 + 1/(p-1) (1 + 1/(p^2-1) (1 + 1/(p^2-1) (1 + 1/(p^3-1) (...)))))
//! ```

use num_bigint::BigInt;

use crate::arith::is_prime;
use crate::error::{Error, Result};
use crate::heuristic::real::Real;

fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 || !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not an odd prime")));
    }
    Ok(())
}

/// Exponent of `p` in the denominator at nesting level `level` (1-based):
/// 1, 1, 2, 2, 3, 3, ...
pub fn nested_exponent(level: u32) -> u32 {
    level.div_ceil(2)
}

/// The nested expression cut after `depth` levels, innermost term 1.
pub fn nested_identity_eval(p: u64, depth: u32) -> Result<Real> {
    check_odd_prime(p)?;
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let big_p = BigInt::from(p);
    let mut value = Real::one();
    for level in (1..=depth).rev() {
        let den = big_p.pow(nested_exponent(level)) - 1;
        value = Real::one() + Real::ratio(&BigInt::from(1), &den) * value;
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductForm {
    /// `prod (1 - p^-k)`
    Direct,
    /// `prod (1 - p^-k)^-1`
    Inverted,
}

/// `prod_{k=kmin}^{kmax} (1 - p^-k)^(+-1)`.
pub fn euler_product_eval(p: u64, kmin: u32, kmax: u32, form: ProductForm) -> Result<Real> {
    check_odd_prime(p)?;
    if kmin == 0 || kmin > kmax {
        return Err(Error::InvalidInput(format!("need 1 <= kmin <= kmax, got {kmin}..{kmax}")));
    }
    let mut product = Real::one();
    for k in kmin..=kmax {
        let factor = Real::one() - Real::recip_pow(p, k);
        product = &product * &factor;
    }
    Ok(match form {
        ProductForm::Direct => product,
        ProductForm::Inverted => product.recip(),
    })
}

/// Both sides of the identity and their difference.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub p: u64,
    pub depth: u32,
    pub kmax: u32,
    pub nested: Real,
    pub product: Real,
}

impl IdentityCheck {
    pub fn difference(&self) -> f64 {
        (self.nested.clone() - self.product.clone()).abs().to_f64()
    }
}

pub fn identity_check(p: u64, depth: u32, kmax: u32) -> Result<IdentityCheck> {
    Ok(IdentityCheck {
        p,
        depth,
        kmax,
        nested: nested_identity_eval(p, depth)?,
        product: euler_product_eval(p, 1, kmax, ProductForm::Inverted)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristic::constants::prob_nondivisible;

    #[test]
    fn exponents() {
        let e: Vec<u32> = (1..=6).map(nested_exponent).collect();
        assert_eq!(e, vec![1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn one_level() {
        for p in [3u64, 5, 7] {
            let v = nested_identity_eval(p, 1).unwrap();
            let expect = Real::from_int(p as i64) / Real::from_int(p as i64 - 1);
            assert_eq!(v.to_decimal(60), expect.to_decimal(60));
        }
    }

    #[test]
    fn deep_nesting_matches_product() {
        let v = nested_identity_eval(3, 40).unwrap();
        assert_eq!(v.to_decimal(12), "1.785312341999");
        for p in [3u64, 5, 7, 11, 13] {
            assert!(identity_check(p, 40, 64).unwrap().difference() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn product_forms() {
        let v = euler_product_eval(5, 1, 1, ProductForm::Direct).unwrap();
        assert_eq!(v.to_decimal(30), "0.800000000000000000000000000000");
        let a = euler_product_eval(3, 2, 64, ProductForm::Direct).unwrap();
        let b = prob_nondivisible(3, 64).unwrap().value;
        assert!((a - b).abs().to_f64() < 1e-80);
        assert!(euler_product_eval(3, 3, 2, ProductForm::Direct).is_err());
    }
}
