//! Elementary number theory: segmented sieves, the Kronecker symbol and
//! fundamental discriminants.

use std::fmt;

use crate::error::{Error, Result};

/// Which family of real quadratic fields a radicand belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetTag {
    /// `Q(sqrt p)` for `p` prime.
    PrimeSet,
    /// `Q(sqrt d)` for `d > 1` squarefree.
    SquarefreeSet,
}

impl SetTag {
    pub fn code(self) -> &'static str {
        match self {
            SetTag::PrimeSet => "P",
            SetTag::SquarefreeSet => "A",
        }
    }

    pub fn from_code(s: &str) -> Option<SetTag> {
        match s {
            "P" | "p" => Some(SetTag::PrimeSet),
            "A" | "a" => Some(SetTag::SquarefreeSet),
            _ => None,
        }
    }

    /// Members of the set in `[lo, hi]`, ascending.
    pub fn members(self, lo: u64, hi: u64) -> Vec<u64> {
        match self {
            SetTag::PrimeSet => primes_in_range(lo, hi),
            SetTag::SquarefreeSet => squarefree_in_range(lo, hi),
        }
    }
}

impl fmt::Display for SetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A squarefree `d >= 2`, tagged with the family it was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Radicand {
    d: u64,
    set_tag: SetTag,
}

impl Radicand {
    pub fn new(d: u64, set_tag: SetTag) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("radicand {d} must be at least 2")));
        }
        if !is_squarefree(d) {
            return Err(Error::InvalidInput(format!("radicand {d} is not squarefree")));
        }
        if set_tag == SetTag::PrimeSet && !is_prime(d) {
            return Err(Error::InvalidInput(format!("radicand {d} is not prime")));
        }
        Ok(Radicand { d, set_tag })
    }

    pub fn get(self) -> u64 {
        self.d
    }

    pub fn set_tag(self) -> SetTag {
        self.set_tag
    }
}

/// Fundamental discriminant of a real quadratic field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Discriminant(u64);

impl Discriminant {
    /// Validates that `value` is a positive fundamental discriminant.
    pub fn new(value: u64) -> Result<Self> {
        let ok = match value % 16 {
            _ if value <= 1 => false,
            v if v % 4 == 1 => is_squarefree(value),
            8 | 12 => is_squarefree(value / 4),
            _ => false,
        };
        if ok {
            Ok(Discriminant(value))
        } else {
            Err(Error::InvalidInput(format!(
                "{value} is not a positive fundamental discriminant"
            )))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// The squarefree `d` with `Q(sqrt d)` having this discriminant.
    pub fn radicand(self) -> u64 {
        if self.0.is_multiple_of(4) {
            self.0 / 4
        } else {
            self.0
        }
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `D = d` when `d = 1 (mod 4)`, else `D = 4d`.
pub fn fundamental_discriminant(d: Radicand) -> Discriminant {
    let d = d.get();
    if d % 4 == 1 {
        Discriminant(d)
    } else {
        Discriminant(4 * d)
    }
}

/// Same as [`fundamental_discriminant`] for an unchecked integer.
pub fn discriminant_of(d: u64) -> Result<Discriminant> {
    if d < 2 || !is_squarefree(d) {
        return Err(Error::InvalidInput(format!("radicand {d} is not squarefree >= 2")));
    }
    Ok(if d % 4 == 1 { Discriminant(d) } else { Discriminant(4 * d) })
}

const SEGMENT: u64 = 1 << 16;

/// Primes `<= limit` in ascending order; the i-th prime sits at index `i - 1`.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    primes_in_range(2, limit)
}

/// Squarefree integers in `[2, limit]`.
pub fn sieve_squarefree(limit: u64) -> Vec<u64> {
    squarefree_in_range(2, limit)
}

fn small_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Segmented sieve of Eratosthenes over `[lo, hi]`; memory is one segment
/// plus the base primes up to `sqrt(hi)`.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    let lo = lo.max(2);
    if hi < lo {
        return Vec::new();
    }
    let base = small_primes(isqrt(hi));
    let mut out = Vec::new();
    let mut mark = vec![false; SEGMENT as usize];
    let mut start = lo;
    loop {
        let end = hi.min(start.saturating_add(SEGMENT - 1));
        let len = (end - start + 1) as usize;
        mark[..len].fill(true);
        for &p in &base {
            if p * p > end {
                break;
            }
            let first = (p * p).max(start.div_ceil(p) * p);
            let mut m = first;
            while m <= end {
                mark[(m - start) as usize] = false;
                m += p;
            }
        }
        out.extend((0..len).filter(|&i| mark[i]).map(|i| start + i as u64));
        if end == hi {
            break;
        }
        start = end + 1;
    }
    out
}

/// Squarefree integers in `[max(lo, 2), hi]`, segmented like [`primes_in_range`].
pub fn squarefree_in_range(lo: u64, hi: u64) -> Vec<u64> {
    let lo = lo.max(2);
    if hi < lo {
        return Vec::new();
    }
    let base = small_primes(isqrt(hi));
    let mut out = Vec::new();
    let mut mark = vec![false; SEGMENT as usize];
    let mut start = lo;
    loop {
        let end = hi.min(start.saturating_add(SEGMENT - 1));
        let len = (end - start + 1) as usize;
        mark[..len].fill(true);
        for &p in &base {
            let sq = p * p;
            if sq > end {
                break;
            }
            let mut m = start.div_ceil(sq) * sq;
            while m <= end {
                mark[(m - start) as usize] = false;
                m += sq;
            }
        }
        out.extend((0..len).filter(|&i| mark[i]).map(|i| start + i as u64));
        if end == hi {
            break;
        }
        start = end + 1;
    }
    out
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut f = 3;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 2;
    }
    true
}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut n = n;
    let mut f = 2u64;
    while f * f <= n {
        if n.is_multiple_of(f) {
            n /= f;
            if n.is_multiple_of(f) {
                return false;
            }
        }
        f += if f == 2 { 1 } else { 2 };
    }
    true
}

/// Prime factorization by trial division, as `(prime, exponent)` ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f * f <= n {
        if n.is_multiple_of(f) {
            let mut e = 0;
            while n.is_multiple_of(f) {
                n /= f;
                e += 1;
            }
            out.push((f, e));
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Kronecker symbol `(D/n)` by quadratic reciprocity; no factoring.
pub fn kronecker(d: i64, n: u64) -> i8 {
    let mut a = d as i128;
    let mut b = n as i128;
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let mut k: i8 = 1;
    let mut v = 0;
    while b % 2 == 0 {
        b /= 2;
        v += 1;
    }
    // (a/2) = (-1)^((a^2-1)/8) for odd a
    if v % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
        k = -k;
    }
    // b > 0 here since n >= 1
    loop {
        if a == 0 {
            return if b == 1 { k } else { 0 };
        }
        let mut v = 0;
        while a % 2 == 0 {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 && matches!(b.rem_euclid(8), 3 | 5) {
            k = -k;
        }
        if a < 0 {
            a = -a;
            // (-1/b) for odd b
            if b.rem_euclid(4) == 3 {
                k = -k;
            }
        }
        if a.rem_euclid(4) == 3 && b.rem_euclid(4) == 3 {
            k = -k;
        }
        let r = b.rem_euclid(a);
        b = a;
        a = r;
        if a == 0 {
            return if b == 1 { k } else { 0 };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_primes(limit: u64) -> Vec<u64> {
        (2..=limit)
            .filter(|&n| (2..n).take_while(|f| f * f <= n).all(|f| n % f != 0))
            .collect()
    }

    fn mobius_nonzero(n: u64) -> bool {
        (2..=n).take_while(|f| f * f <= n).all(|f| !n.is_multiple_of(f * f))
    }

    fn residue_symbol(d: i64, p: u64) -> i8 {
        let r = d.rem_euclid(p as i64) as u64;
        if r == 0 {
            0
        } else if (1..p).any(|x| x * x % p == r) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn small_sieves() {
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2), vec![2]);
        assert_eq!(sieve_squarefree(12), vec![2, 3, 5, 6, 7, 10, 11]);
        assert_eq!(sieve_squarefree(2), vec![2]);
    }

    #[test]
    fn prime_count_to_million() {
        // pi(10^6) from the trial-division oracle below, spot-checked at 10^5
        assert_eq!(sieve_primes(100_000), trial_primes(100_000));
        assert_eq!(sieve_primes(1_000_000).len(), 78_498);
    }

    #[test]
    fn squarefree_matches_mobius() {
        let oracle: Vec<u64> = (2..=100_000).filter(|&n| mobius_nonzero(n)).collect();
        assert_eq!(sieve_squarefree(100_000), oracle);
    }

    #[test]
    fn ranges_stitch() {
        let whole = primes_in_range(2, 300_000);
        let mut split = primes_in_range(2, 131_071);
        split.extend(primes_in_range(131_072, 300_000));
        assert_eq!(whole, split);
        let whole = squarefree_in_range(2, 300_000);
        let mut split = squarefree_in_range(0, 65_536);
        split.extend(squarefree_in_range(65_537, 300_000));
        assert_eq!(whole, split);
    }

    #[test]
    fn discriminants() {
        let d = |n| fundamental_discriminant(Radicand::new(n, SetTag::SquarefreeSet).unwrap()).get();
        assert_eq!(d(5), 5);
        assert_eq!(d(3), 12);
        assert_eq!(d(2), 8);
        assert!(Radicand::new(12, SetTag::SquarefreeSet).is_err());
        assert!(Radicand::new(15, SetTag::PrimeSet).is_err());
        assert!(discriminant_of(18).is_err());
        assert!(Discriminant::new(5).is_ok());
        assert!(Discriminant::new(40).is_ok());
        assert!(Discriminant::new(16).is_err());
        assert!(Discriminant::new(20).is_err());
        assert!(Discriminant::new(1).is_err());
        assert_eq!(Discriminant::new(316).unwrap().radicand(), 79);
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(5, 11), 1);
        assert_eq!(kronecker(8, 3), -1);
        assert_eq!(kronecker(12, 1), 1);
        assert_eq!(kronecker(12, 2), 0);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-4, 3), -1);
    }

    #[test]
    fn kronecker_matches_residue_search() {
        let odd_primes: Vec<u64> = trial_primes(200).into_iter().skip(1).collect();
        for d in 1..=500i64 {
            for &p in &odd_primes {
                assert_eq!(kronecker(d, p), residue_symbol(d, p), "D={d} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_multiplicative() {
        for d in -200..=200i64 {
            for m in 1..=100u64 {
                for n in 1..=100u64 {
                    assert_eq!(
                        kronecker(d, m * n),
                        kronecker(d, m) * kronecker(d, n),
                        "D={d} m={m} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn kronecker_periodic_and_zero_iff_common_factor() {
        for d in 2..=300i64 {
            if d % 4 == 2 || d % 4 == 3 {
                continue;
            }
            for n in 1..=600u64 {
                assert_eq!(kronecker(d, n), kronecker(d, n + d as u64), "D={d} n={n}");
                let g = num_integer::gcd(d as u64, n);
                assert_eq!(kronecker(d, n) == 0, g > 1, "D={d} n={n}");
            }
        }
    }
}
