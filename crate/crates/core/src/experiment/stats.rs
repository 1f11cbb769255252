//! Empirical class-number distributions and their comparison with `lambda_q`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::arith::SetTag;
use crate::classnum::FieldRecord;
use crate::error::{Error, Result};
use crate::heuristic::lambda::{format_rational, lambda};
use crate::store::TableFile;

/// Class-number counts over the first `cutoff_x` records of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    pub set_tag: SetTag,
    pub cutoff_x: u64,
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
}

impl EmpiricalDistribution {
    /// Builds a distribution from explicit counts, e.g. a fixture.
    pub fn from_counts(set_tag: SetTag, counts: BTreeMap<u64, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::InvalidInput("distribution is empty".into()));
        }
        if let Some(&h) = counts.keys().find(|&&h| h == 0) {
            return Err(Error::InvalidInput(format!("class number {h} is not positive")));
        }
        if set_tag == SetTag::PrimeSet {
            if let Some(&h) = counts.keys().find(|&&h| h % 2 == 0) {
                return Err(Error::InvalidInput(format!("even class number {h} in a prime-radicand distribution")));
            }
        }
        Ok(EmpiricalDistribution { set_tag, cutoff_x: total, counts, total })
    }

    pub fn count(&self, h: u64) -> u64 {
        self.counts.get(&h).copied().unwrap_or(0)
    }

    /// `#{i <= x : h_i = h} / x`.
    pub fn p_hat(&self, h: u64) -> f64 {
        self.count(h) as f64 / self.total as f64
    }
}

fn check_cutoff(table: &TableFile, cutoff_x: u64) -> Result<&[FieldRecord]> {
    if cutoff_x == 0 || cutoff_x > table.records.len() as u64 {
        return Err(Error::InvalidInput(format!(
            "cutoff {cutoff_x} outside 1..={} (records in table)",
            table.records.len()
        )));
    }
    Ok(&table.records[..cutoff_x as usize])
}

/// Counts over the first `cutoff_x` records in table order.
pub fn empirical_distribution(table: &TableFile, cutoff_x: u64) -> Result<EmpiricalDistribution> {
    let records = check_cutoff(table, cutoff_x)?;
    let set_tag = table.header.set_tag;
    let mut counts = BTreeMap::new();
    for r in records {
        if set_tag == SetTag::PrimeSet && r.h % 2 == 0 {
            return Err(Error::EvenClassNumber { p: r.d, h: r.h });
        }
        *counts.entry(r.h).or_insert(0) += 1;
    }
    Ok(EmpiricalDistribution { set_tag, cutoff_x, counts, total: cutoff_x })
}

fn series(records: &[FieldRecord], step: u64) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    let mut ones = 0u64;
    for (i, r) in records.iter().enumerate() {
        ones += u64::from(r.h == 1);
        let x = i as u64 + 1;
        if x.is_multiple_of(step) {
            out.push((x, ones as f64 / x as f64));
        }
    }
    out
}

/// `P(h = 1)` estimated at `x = step, 2 step, ...` over the whole table.
pub fn convergence_series(table: &TableFile, step: u64) -> Result<Vec<(u64, f64)>> {
    if step == 0 {
        return Err(Error::InvalidInput("step must be at least 1".into()));
    }
    Ok(series(&table.records, step))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub q: u64,
    pub count: u64,
    /// `P(h = q) / P(h = 1)` as observed.
    pub empirical_ratio: f64,
    pub lambda: BigRational,
    pub abs_dev: f64,
    pub rel_dev: f64,
}

impl ComparisonRow {
    fn new(q: u64, count: u64, count_h1: u64) -> Result<Self> {
        let lambda = lambda(q)?.value;
        let empirical_ratio = count as f64 / count_h1 as f64;
        let (abs_dev, rel_dev) = deviations(empirical_ratio, &lambda);
        Ok(ComparisonRow { q, count, empirical_ratio, lambda, abs_dev, rel_dev })
    }
}

fn deviations(observed: f64, lambda: &BigRational) -> (f64, f64) {
    let l = lambda.to_f64().unwrap_or(0.0);
    let abs_dev = (observed - l).abs();
    (abs_dev, abs_dev / l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub set_tag: SetTag,
    pub cutoff_x: u64,
    pub count_h1: u64,
    pub p1_hat: f64,
    /// One row per observed odd class number, ascending.
    pub rows: Vec<ComparisonRow>,
    pub convergence_series: Vec<(u64, f64)>,
}

/// Observed ratios `P(h = q) / P(h = 1)` against `lambda_q` for every odd
/// observed `q`. The convergence series is left empty; see [`compare_table`].
pub fn compare_report(dist: &EmpiricalDistribution) -> Result<ComparisonReport> {
    let count_h1 = dist.count(1);
    if count_h1 == 0 {
        return Err(Error::InvalidInput("no field with h = 1 below the cutoff; ratios are undefined".into()));
    }
    let rows = dist
        .counts
        .iter()
        .filter(|(&q, _)| q % 2 == 1)
        .map(|(&q, &count)| ComparisonRow::new(q, count, count_h1))
        .collect::<Result<_>>()?;
    Ok(ComparisonReport {
        set_tag: dist.set_tag,
        cutoff_x: dist.cutoff_x,
        count_h1,
        p1_hat: dist.p_hat(1),
        rows,
        convergence_series: Vec::new(),
    })
}

/// [`compare_report`] on the first `cutoff_x` records, with the convergence
/// series of `P(h = 1)` over the same records.
pub fn compare_table(table: &TableFile, cutoff_x: u64, step: u64) -> Result<ComparisonReport> {
    if step == 0 {
        return Err(Error::InvalidInput("step must be at least 1".into()));
    }
    let mut report = compare_report(&empirical_distribution(table, cutoff_x)?)?;
    report.convergence_series = series(check_cutoff(table, cutoff_x)?, step);
    Ok(report)
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "set {}  x = {}  #(h=1) = {}  P(h=1) = {:.6}", self.set_tag, self.cutoff_x, self.count_h1, self.p1_hat)?;
        writeln!(f, "{:>7} {:>9} {:>14} {:>16} {:>12} {:>10}", "q", "count", "P(q)/P(1)", "lambda_q", "abs dev", "rel dev")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>7} {:>9} {:>14.8} {:>16} {:>12.3e} {:>10.4}",
                r.q,
                r.count,
                r.empirical_ratio,
                format_rational(&r.lambda),
                r.abs_dev,
                r.rel_dev
            )?;
        }
        if let Some(&(x, p)) = self.convergence_series.last() {
            writeln!(f, "convergence: {} points, last P(h=1) = {p:.6} at x = {x}", self.convergence_series.len())?;
        }
        Ok(())
    }
}

/// `P_n / P_(2^r)` against `lambda_q` for even `n = 2^r q`, `q > 1` odd.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenRow {
    pub n: u64,
    pub r: u32,
    pub q: u64,
    pub count_n: u64,
    pub count_2r: u64,
    /// `None` when no field has `h = 2^r`.
    pub ratio: Option<f64>,
    pub lambda: BigRational,
    pub abs_dev: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerOfTwoTerm {
    pub k: u32,
    pub count: u64,
    pub p_hat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvenStructureReport {
    pub cutoff_x: u64,
    pub p1_hat: f64,
    pub p2_hat: f64,
    pub p2_exceeds_p1: bool,
    pub rows: Vec<EvenRow>,
    /// `P_(2^k)` for every `k` with a nonzero count.
    pub power_terms: Vec<PowerOfTwoTerm>,
    pub partial_sum: f64,
    pub p0: f64,
}

/// Even-class-number structure over squarefree radicands.
///
/// Rows cover every observed even `n` that is not a power of two, plus the
/// values in `focus` whether observed or not.
pub fn even_structure_report(dist: &EmpiricalDistribution, p0: f64, focus: &[u64]) -> Result<EvenStructureReport> {
    if dist.set_tag != SetTag::SquarefreeSet {
        return Err(Error::InvalidInput("the even-structure report needs a squarefree-radicand table".into()));
    }
    let mut ns: Vec<u64> = dist.counts.keys().copied().filter(|&n| n % 2 == 0).collect();
    for &n in focus {
        if n == 0 || n % 2 == 1 {
            return Err(Error::InvalidInput(format!("focus value {n} is not a positive even number")));
        }
        ns.push(n);
    }
    ns.sort_unstable();
    ns.dedup();

    let mut rows = Vec::new();
    for n in ns {
        let r = n.trailing_zeros();
        let q = n >> r;
        if q == 1 {
            continue;
        }
        let count_n = dist.count(n);
        let count_2r = dist.count(1 << r);
        let lambda = lambda(q)?.value;
        let (ratio, abs_dev) = if count_2r == 0 {
            (None, None)
        } else {
            let ratio = count_n as f64 / count_2r as f64;
            (Some(ratio), Some(deviations(ratio, &lambda).0))
        };
        rows.push(EvenRow { n, r, q, count_n, count_2r, ratio, lambda, abs_dev, flagged: count_2r == 0 });
    }

    let mut power_terms = Vec::new();
    for k in 0..64 {
        let count = dist.count(1 << k);
        if count > 0 {
            power_terms.push(PowerOfTwoTerm { k, count, p_hat: dist.p_hat(1 << k) });
        }
    }
    let partial_sum = power_terms.iter().map(|t| t.p_hat).sum();
    let (p1_hat, p2_hat) = (dist.p_hat(1), dist.p_hat(2));
    Ok(EvenStructureReport {
        cutoff_x: dist.cutoff_x,
        p1_hat,
        p2_hat,
        p2_exceeds_p1: p2_hat > p1_hat,
        rows,
        power_terms,
        partial_sum,
        p0,
    })
}

impl fmt::Display for EvenStructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "squarefree radicands, x = {}", self.cutoff_x)?;
        let order = if self.p2_exceeds_p1 { ">" } else { "<=" };
        writeln!(f, "P_2 = {:.6} {order} P_1 = {:.6}", self.p2_hat, self.p1_hat)?;
        writeln!(f, "{:>7} {:>3} {:>7} {:>9} {:>9} {:>12} {:>16} {:>12}", "n", "r", "q", "#(h=n)", "#(h=2^r)", "P_n/P_2^r", "lambda_q", "abs dev")?;
        for row in &self.rows {
            let ratio = row.ratio.map_or("-".to_string(), |x| format!("{x:.8}"));
            let dev = row.abs_dev.map_or("-".to_string(), |x| format!("{x:.3e}"));
            let flag = if row.flagged { "  (no h = 2^r, skipped)" } else { "" };
            writeln!(
                f,
                "{:>7} {:>3} {:>7} {:>9} {:>9} {:>12} {:>16} {:>12}{flag}",
                row.n,
                row.r,
                row.q,
                row.count_n,
                row.count_2r,
                ratio,
                format_rational(&row.lambda),
                dev
            )?;
        }
        let terms: Vec<String> = self.power_terms.iter().map(|t| format!("P_{}={:.6}", 1u64 << t.k, t.p_hat)).collect();
        writeln!(f, "sum of P_(2^k): {:.6} ({})", self.partial_sum, terms.join(" + "))?;
        writeln!(f, "P_0:            {:.6}", self.p0)
    }
}
