//! Continued fraction of `omega = (b + sqrt D) / 2` and the regulator.

use crate::arith::{isqrt, Discriminant};
use crate::error::{Error, Result};

/// One period of the continued fraction of `omega_D`.
///
/// `pq_pairs[i]` is the state `(P, Q)` of the complete quotient
/// `(P + sqrt D) / Q`, starting with the first reduced one. The expansion is
/// purely periodic from there on, so `partial_quotients` has exactly
/// `period_length` entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfPeriod {
    pub discriminant: u64,
    /// `floor(omega)`, the pre-period term.
    pub leading: u64,
    pub partial_quotients: Vec<u64>,
    pub pq_pairs: Vec<(i128, i128)>,
    pub period_length: usize,
}

impl CfPeriod {
    /// Norm of the fundamental unit, `(-1)^period_length`.
    pub fn unit_norm(&self) -> i8 {
        if self.period_length % 2 == 1 {
            -1
        } else {
            1
        }
    }
}

struct Pqa {
    d: i128,
    root: i128,
    p: i128,
    q: i128,
}

impl Pqa {
    fn new(d: u64) -> Result<Self> {
        let root = isqrt(d);
        if root * root == d {
            return Err(Error::InvalidInput(format!("{d} is a perfect square")));
        }
        Ok(Pqa { d: d as i128, root: root as i128, p: (d % 2) as i128, q: 2 })
    }

    /// Emits the partial quotient of the current state and advances.
    fn step(&mut self) -> u64 {
        // q > 0 throughout, so floor((p + sqrt d)/q) = floor((p + isqrt d)/q)
        let a = (self.p + self.root).div_euclid(self.q);
        let p = a * self.q - self.p;
        let q = (self.d - p * p) / self.q;
        debug_assert_eq!((self.d - p * p) % self.q, 0);
        self.p = p;
        self.q = q;
        a as u64
    }
}

/// Continued fraction period of `(b + sqrt D)/2`, `b = D mod 2`.
pub fn cf_expand(d: Discriminant) -> Result<CfPeriod> {
    let mut it = Pqa::new(d.get())?;
    let leading = it.step();
    let start = (it.p, it.q);
    let mut pq_pairs = vec![start];
    let mut partial_quotients = Vec::new();
    loop {
        partial_quotients.push(it.step());
        if (it.p, it.q) == start {
            break;
        }
        pq_pairs.push((it.p, it.q));
    }
    let period_length = partial_quotients.len();
    Ok(CfPeriod { discriminant: d.get(), leading, partial_quotients, pq_pairs, period_length })
}

/// Regulator and continued-fraction data without keeping the period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitData {
    pub regulator: f64,
    pub period_length: usize,
    pub unit_norm: i8,
}

/// `ln` of the fundamental unit, accumulated as the product of the complete
/// quotients over one period. The product is kept as mantissa and binary
/// exponent so the unit's coordinates are never formed.
pub fn unit_data(d: Discriminant) -> Result<UnitData> {
    let mut it = Pqa::new(d.get())?;
    let sqrt_d = (d.get() as f64).sqrt();
    it.step();
    let start = (it.p, it.q);
    let mut mantissa = 1.0f64;
    let mut exponent: i64 = 0;
    let mut period_length = 0usize;
    loop {
        mantissa *= (it.p as f64 + sqrt_d) / it.q as f64;
        let (m, e) = split_exponent(mantissa);
        mantissa = m;
        exponent += e;
        it.step();
        period_length += 1;
        if (it.p, it.q) == start {
            break;
        }
    }
    let regulator = mantissa.ln() + exponent as f64 * std::f64::consts::LN_2;
    let unit_norm = if period_length % 2 == 1 { -1 } else { 1 };
    Ok(UnitData { regulator, period_length, unit_norm })
}

pub fn regulator(d: Discriminant) -> Result<f64> {
    Ok(unit_data(d)?.regulator)
}

/// Splits a positive finite `x` into `(m, e)` with `x = m * 2^e`, `m` in `[1, 2)`.
pub(crate) fn split_exponent(x: f64) -> (f64, i64) {
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1023 << 52));
    (m, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Smallest `(x, y)`, `y >= 1`, with `x^2 - D y^2 = +-4`, by search over y.
    fn minimal_unit(d: u64) -> (u64, u64, i8) {
        for y in 1u64.. {
            let t = d * y * y;
            for (target, norm) in [(t - 4, -1i8), (t + 4, 1)] {
                let x = isqrt(target);
                if x * x == target {
                    return (x, y, norm);
                }
            }
        }
        unreachable!()
    }

    fn disc(d: u64) -> Discriminant {
        Discriminant::new(d).unwrap()
    }

    #[test]
    fn small_expansions() {
        let cf = cf_expand(disc(5)).unwrap();
        assert_eq!((cf.leading, cf.period_length, cf.unit_norm()), (1, 1, -1));
        let cf = cf_expand(disc(8)).unwrap();
        assert_eq!(cf.partial_quotients, vec![2]);
        assert_eq!(cf.unit_norm(), -1);
        let cf = cf_expand(disc(12)).unwrap();
        assert_eq!(cf.partial_quotients, vec![1, 2]);
        assert_eq!(cf.unit_norm(), 1);
    }

    #[test]
    fn regulators_match_pell_search() {
        // (x + y sqrt D)/2 from the brute-force search
        for (d, expect) in [(5u64, 0.481_211_825_059_603_4), (8, 0.881_373_587_019_543), (12, 1.316_957_896_924_816_7)] {
            let (x, y, norm) = minimal_unit(d);
            let brute = ((x as f64 + y as f64 * (d as f64).sqrt()) / 2.0).ln();
            let u = unit_data(disc(d)).unwrap();
            assert!((u.regulator - brute).abs() < 1e-12, "D={d}");
            assert!((u.regulator - expect).abs() < 1e-9, "D={d}");
            assert_eq!(u.unit_norm, norm, "D={d}");
        }
    }

    #[test]
    fn period_invariants_and_norms() {
        for d in 5..3000u64 {
            let Ok(disc) = Discriminant::new(d) else { continue };
            let cf = cf_expand(disc).unwrap();
            for &(p, q) in &cf.pq_pairs {
                assert!(q > 0);
                assert_eq!((d as i128 - p * p) % q, 0, "D={d}");
            }
            let u = unit_data(disc).unwrap();
            assert_eq!(u.period_length, cf.period_length);
            assert!(u.regulator > 0.0);
            // small units are cheap to brute force
            if u.regulator < 14.0 {
                let (x, y, norm) = minimal_unit(d);
                let brute = ((x as f64 + y as f64 * (d as f64).sqrt()) / 2.0).ln();
                assert!((u.regulator - brute).abs() < 1e-9 * brute.max(1.0), "D={d}");
                assert_eq!(u.unit_norm, norm, "D={d}");
            }
        }
    }

    #[test]
    fn exponent_split() {
        for x in [1.0, 1.5, 3.0, 1e-300, 7.5e200] {
            let (m, e) = split_exponent(x);
            assert!((1.0..2.0).contains(&m));
            assert_eq!(m * 2f64.powi(e as i32), x);
        }
    }
}
