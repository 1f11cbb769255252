//! `L(1, chi_D)` from the finite sine-log formula
//!
//! ```text
//! L(1, chi_D) = -(1/sqrt D) * sum_{a=1}^{D-1} chi_D(a) ln sin(pi a / D)
//! ```
//!
//! The character is even, so only `a < D/2` is summed and doubled. The
//! character values come from a table built out of the prime-discriminant
//! factorization of `D`; the sines from a rotation recurrence re-anchored
//! every [`ANCHOR`] steps and run in [`LANES`] independent stretches; the
//! logs from two running products (one per sign of `chi`) kept as
//! mantissa/exponent pairs.

use std::f64::consts::{LN_2, PI};

use crate::arith::{factorize, kronecker, Discriminant};
use crate::classnum::cf::split_exponent;
use crate::error::{Error, Result};

const ANCHOR: usize = 32;
const LANES: usize = 4;

/// `chi_D(a)` for `a` in `0..=limit`.
pub fn character_table(d: Discriminant, limit: usize) -> Vec<i8> {
    let dd = d.get();
    let radicand = d.radicand();
    let mut chi = vec![1i8; limit + 1];
    chi[0] = 0;

    // 2-adic part: D = 4d with d = 3 (mod 4) -> -4, d = 2m -> +-8
    let two_part: Option<[i8; 8]> = match (dd % 4, radicand % 4) {
        (1, _) => None,
        (_, 3) => Some([0, 1, 0, -1, 0, 1, 0, -1]),
        _ => {
            let m = radicand / 2;
            if m % 4 == 1 {
                Some([0, 1, 0, -1, 0, -1, 0, 1])
            } else {
                Some([0, 1, 0, 1, 0, -1, 0, -1])
            }
        }
    };
    if let Some(t) = two_part {
        apply_periodic(&mut chi, &t);
    }
    for (p, _) in factorize(radicand) {
        if p == 2 {
            continue;
        }
        apply_periodic(&mut chi, &legendre_table(p));
    }
    chi
}

fn apply_periodic(chi: &mut [i8], table: &[i8]) {
    for chunk in chi.chunks_mut(table.len()) {
        for (c, &t) in chunk.iter_mut().zip(table) {
            *c *= t;
        }
    }
}

fn legendre_table(p: u64) -> Vec<i8> {
    let p = p as usize;
    let mut t = vec![-1i8; p];
    t[0] = 0;
    // x^2 mod p by running differences, no divisions
    let mut sq = 0usize;
    for x in 1..=p / 2 {
        sq += 2 * x - 1;
        if sq >= p {
            sq -= p;
        }
        t[sq] = 1;
    }
    t
}

/// `-sum_{1 <= a < D/2} chi(a) ln sin(pi a / D)`, i.e. half of `sqrt(D) L(1, chi)`.
///
/// `truncate` stops the sum early; it exists only to degrade precision on
/// purpose in fault-injection tests.
pub(crate) fn half_log_sine_sum(d: Discriminant, truncate: Option<usize>) -> Result<f64> {
    let dd = d.get();
    check_even_character(d)?;
    let half = ((dd - 1) / 2) as usize;
    let chi = character_table(d, half);
    spot_check(d, &chi)?;
    let upto = truncate.map_or(half, |t| t.min(half));

    // chi vanishes on even a when D is even, so only a = 1 + stride*i is
    // visited
    let stride = if dd.is_multiple_of(2) { 2 } else { 1 };
    let mut terms: Vec<i8> = chi[1..=upto].iter().step_by(stride).copied().collect();

    // LANES contiguous stretches of the terms run side by side; the padding
    // has chi = 0 and contributes nothing
    let lane_len = terms.len().div_ceil(LANES).max(1);
    terms.resize(LANES * lane_len, 0);

    let theta = PI / dd as f64;
    let (ws, wc) = (theta * stride as f64).sin_cos();
    let mut plus = [1.0f64; LANES];
    let mut minus = [1.0f64; LANES];
    let (mut plus_exp, mut minus_exp) = (0i64, 0i64);
    let mut s = [0.0f64; LANES];
    let mut c = [0.0f64; LANES];

    let mut j = 0usize;
    while j < lane_len {
        let steps = ANCHOR.min(lane_len - j);
        for l in 0..LANES {
            let a = 1 + stride * (l * lane_len + j);
            (s[l], c[l]) = (theta * a as f64).sin_cos();
        }
        let block: [&[i8]; LANES] = std::array::from_fn(|l| &terms[l * lane_len + j..][..steps]);
        for k in 0..steps {
            for l in 0..LANES {
                let x = block[l][k];
                plus[l] *= select(x > 0, s[l]);
                minus[l] *= select(x < 0, s[l]);
                let next_s = s[l] * wc + c[l] * ws;
                c[l] = c[l] * wc - s[l] * ws;
                s[l] = next_s;
            }
        }
        for l in 0..LANES {
            let (m, e) = split_exponent(plus[l]);
            plus[l] = m;
            plus_exp += e;
            let (m, e) = split_exponent(minus[l]);
            minus[l] = m;
            minus_exp += e;
        }
        j += steps;
    }
    let plus = plus.iter().product::<f64>();
    let minus = minus.iter().product::<f64>();
    let log_plus = plus.ln() + plus_exp as f64 * LN_2;
    let log_minus = minus.ln() + minus_exp as f64 * LN_2;
    Ok(log_minus - log_plus)
}

/// `if take { s } else { 1.0 }` without a branch; the sign of chi is
/// unpredictable and a mispredicted branch per term dominates the loop.
#[inline(always)]
fn select(take: bool, s: f64) -> f64 {
    let mask = (take as u64).wrapping_neg();
    f64::from_bits((s.to_bits() & mask) | (1.0f64.to_bits() & !mask))
}

/// `L(1, chi_D)` by the finite sine-log sum.
pub fn dirichlet_l1(d: Discriminant) -> Result<f64> {
    let s = half_log_sine_sum(d, None)?;
    Ok(2.0 * s / (d.get() as f64).sqrt())
}

fn check_even_character(d: Discriminant) -> Result<()> {
    let dd = d.get();
    if kronecker(dd as i64, dd - 1) != 1 {
        return Err(Error::Consistency(format!("chi_D(-1) != 1 for D={dd}")));
    }
    Ok(())
}

fn spot_check(d: Discriminant, chi: &[i8]) -> Result<()> {
    let n = chi.len() - 1;
    for a in [1, 2, 3, n / 3, n / 2, n] {
        if a == 0 || a > n {
            continue;
        }
        if chi[a] != kronecker(d.get() as i64, a as u64) {
            return Err(Error::Consistency(format!(
                "character table disagrees with the Kronecker symbol at D={}, a={a}",
                d.get()
            )));
        }
    }
    Ok(())
}
