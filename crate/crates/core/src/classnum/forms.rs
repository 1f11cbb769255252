//! Class number by counting cycles of reduced indefinite binary quadratic forms.
//!
//! Independent of the analytic route: nothing here touches `L(1, chi)`, the
//! continued fraction module, or floating point. The unit norm is recovered
//! from the forms themselves, by asking whether the principal form and its
//! negative share a cycle.

use std::collections::HashMap;

use crate::arith::{isqrt, Discriminant};
use crate::error::{Error, Result};

pub const DEFAULT_ORACLE_BOUND: u64 = 100_000;

/// `(a, b, c)` standing for `a x^2 + b xy + c y^2`.
pub type Form = (i64, i64, i64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormsCount {
    /// Number of cycles of reduced forms, the narrow class number.
    pub narrow: u64,
    pub unit_norm: i8,
    /// Wide class number.
    pub h: u64,
}

/// All reduced forms of discriminant `D`:
/// `0 < b < sqrt D` and `sqrt D - b < 2|a| < sqrt D + b`.
pub fn reduced_forms(d: u64) -> Vec<Form> {
    let root = isqrt(d) as i64;
    let d = d as i64;
    let mut out = Vec::new();
    let mut b = if d % 2 == 1 { 1 } else { 2 };
    while b <= root {
        // b < sqrt D and D is not a square, so b <= isqrt is enough
        let ac = (b * b - d) / 4;
        for abs_a in 1..=((root + b + 1) / 2) {
            if !lower_ok(d, b, abs_a) || !upper_ok(d, b, abs_a) || ac % abs_a != 0 {
                continue;
            }
            for a in [abs_a, -abs_a] {
                out.push((a, b, ac / a));
            }
        }
        b += 2;
    }
    out.sort_unstable();
    out
}

// sqrt D - b < 2|a|  <=>  D < (2|a| + b)^2
fn lower_ok(d: i64, b: i64, abs_a: i64) -> bool {
    let t = 2 * abs_a + b;
    d < t * t
}

// 2|a| < sqrt D + b  <=>  2|a| - b <= 0 or (2|a| - b)^2 < D
fn upper_ok(d: i64, b: i64, abs_a: i64) -> bool {
    let t = 2 * abs_a - b;
    t <= 0 || t * t < d
}

/// The reduction step `rho(a, b, c) = (c, b', a')` with `b' = -b (mod 2c)`
/// and `sqrt D - 2|c| < b' < sqrt D`.
pub fn rho(d: u64, (_, b, c): Form) -> Form {
    let root = isqrt(d) as i64;
    let two_c = 2 * c.abs();
    // largest b' <= isqrt(D) in the class; it lies above isqrt(D) - 2|c|
    let bp = root - (root + b).rem_euclid(two_c);
    let ap = (bp * bp - d as i64) / (4 * c);
    (c, bp, ap)
}

/// Narrow and wide class number of discriminant `D` by cycle counting.
pub fn count_classes(d: Discriminant, bound: u64) -> Result<FormsCount> {
    let dd = d.get();
    if dd > bound {
        return Err(Error::InvalidInput(format!("D={dd} exceeds the forms oracle bound {bound}")));
    }
    let forms = reduced_forms(dd);
    let index: HashMap<Form, usize> = forms.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut cycle_of = vec![usize::MAX; forms.len()];
    let mut narrow = 0usize;
    for i in 0..forms.len() {
        if cycle_of[i] != usize::MAX {
            continue;
        }
        let mut f = forms[i];
        loop {
            let j = *index.get(&f).ok_or_else(|| {
                Error::Consistency(format!("rho left the reduced forms at D={dd}: {f:?}"))
            })?;
            if cycle_of[j] != usize::MAX {
                break;
            }
            cycle_of[j] = narrow;
            f = rho(dd, f);
        }
        narrow += 1;
    }

    // principal form (1, b, c) with b the largest admissible value below sqrt D
    let root = isqrt(dd) as i64;
    let b = if (root - dd as i64) % 2 == 0 { root } else { root - 1 };
    let c = (b * b - dd as i64) / 4;
    let principal = index[&(1, b, c)];
    let negative = index[&(-1, b, -c)];
    let unit_norm = if cycle_of[principal] == cycle_of[negative] { -1 } else { 1 };

    let narrow = narrow as u64;
    let h = if unit_norm == -1 {
        narrow
    } else {
        if !narrow.is_multiple_of(2) {
            return Err(Error::Consistency(format!(
                "odd cycle count {narrow} with unit norm +1 at D={dd}"
            )));
        }
        narrow / 2
    };
    Ok(FormsCount { narrow, unit_norm, h })
}

pub fn class_number_forms_oracle(d: Discriminant) -> Result<u64> {
    Ok(count_classes(d, DEFAULT_ORACLE_BOUND)?.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn disc(d: u64) -> Discriminant {
        Discriminant::new(d).unwrap()
    }

    fn distinct(forms: &[Form]) -> bool {
        forms.iter().collect::<HashSet<_>>().len() == forms.len()
    }

    /// Reduced forms straight from the definition, with floating point bounds.
    fn reduced_by_definition(d: u64) -> Vec<Form> {
        let s = (d as f64).sqrt();
        let mut out = Vec::new();
        for b in 1..=(s as i64) {
            if (b * b - d as i64) % 4 != 0 {
                continue;
            }
            let ac = (b * b - d as i64) / 4;
            for a in -(d as i64)..=(d as i64) {
                if a == 0 || ac % a != 0 {
                    continue;
                }
                let two_a = 2.0 * (a.abs() as f64);
                if s - (b as f64) < two_a && two_a < s + b as f64 {
                    out.push((a, b, ac / a));
                }
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn enumeration_matches_definition() {
        for d in 5..600u64 {
            if Discriminant::new(d).is_err() {
                continue;
            }
            let forms = reduced_forms(d);
            assert_eq!(forms, reduced_by_definition(d), "D={d}");
            assert!(distinct(&forms));
        }
    }

    #[test]
    fn rho_is_a_permutation() {
        for d in [5u64, 8, 12, 40, 316, 1_001, 2_021] {
            let forms = reduced_forms(d);
            let images: HashSet<Form> = forms.iter().map(|&f| rho(d, f)).collect();
            assert_eq!(images, forms.iter().copied().collect::<HashSet<_>>(), "D={d}");
        }
    }

    #[test]
    fn known_class_numbers() {
        assert_eq!(class_number_forms_oracle(disc(5)).unwrap(), 1);
        assert_eq!(class_number_forms_oracle(disc(40)).unwrap(), 2);
        assert_eq!(class_number_forms_oracle(disc(316)).unwrap(), 3);
        let c = count_classes(disc(12), 100).unwrap();
        assert_eq!((c.narrow, c.unit_norm, c.h), (2, 1, 1));
        // Q(sqrt 229): h = 3, norm -1
        let c = count_classes(disc(229), 1000).unwrap();
        assert_eq!((c.narrow, c.unit_norm, c.h), (3, -1, 3));
    }

    #[test]
    fn bound_enforced() {
        assert!(count_classes(disc(101), 100).is_err());
    }
}
