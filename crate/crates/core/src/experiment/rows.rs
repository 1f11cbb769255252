//! Machine-readable rows for reports: one comma-separated record per line,
//! first field naming the record kind. Floats use the shortest text that
//! parses back to the same `f64`; `lambda` values are exact `n/d`.
//!
//! ```text
//! meta,cutoff_x,9592
//! row,3,1024,0.13799...,1/6,0.0286...,0.1720...
//! series,1000,0.794
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::PathBuf;
use std::str::FromStr;

use num_rational::BigRational;

use crate::arith::SetTag;
use crate::error::{Error, Result};
use crate::experiment::stats::{
    ComparisonReport, ComparisonRow, EmpiricalDistribution, EvenRow, EvenStructureReport, PowerOfTwoTerm,
};
use crate::heuristic::lambda::{format_rational, parse_rational, LambdaValue};

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Format { path: PathBuf::from("<rows>"), line, message: message.into() }
}

struct Lines<'a> {
    meta: BTreeMap<&'a str, (usize, &'a str)>,
    records: Vec<(usize, &'a str, Vec<&'a str>)>,
}

fn split(text: &str) -> Result<Lines<'_>> {
    let mut meta = BTreeMap::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields: Vec<&str> = line.split(',').collect();
        let kind = fields.remove(0);
        if kind == "meta" {
            if fields.len() != 2 {
                return Err(bad(n, "meta lines have a key and a value"));
            }
            meta.insert(fields[0], (n, fields[1]));
        } else {
            records.push((n, kind, fields));
        }
    }
    Ok(Lines { meta, records })
}

impl Lines<'_> {
    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let (n, v) = self.meta.get(key).ok_or_else(|| bad(0, format!("missing meta {key}")))?;
        v.parse().map_err(|_| bad(*n, format!("bad value for {key}: {v:?}")))
    }

    fn set_tag(&self) -> Result<SetTag> {
        let (n, v) = self.meta.get("set").ok_or_else(|| bad(0, "missing meta set"))?;
        SetTag::from_code(v).ok_or_else(|| bad(*n, format!("unknown set {v:?}")))
    }
}

fn field<T: FromStr>(n: usize, fields: &[&str], i: usize) -> Result<T> {
    let v = fields.get(i).ok_or_else(|| bad(n, format!("missing field {}", i + 1)))?;
    v.parse().map_err(|_| bad(n, format!("bad field {}: {v:?}", i + 1)))
}

fn rational(n: usize, fields: &[&str], i: usize) -> Result<BigRational> {
    let v = fields.get(i).ok_or_else(|| bad(n, format!("missing field {}", i + 1)))?;
    parse_rational(v).ok_or_else(|| bad(n, format!("bad rational {v:?}")))
}

fn optional(n: usize, fields: &[&str], i: usize) -> Result<Option<f64>> {
    match fields.get(i) {
        Some(&"-") => Ok(None),
        _ => field(n, fields, i).map(Some),
    }
}

fn arity(n: usize, fields: &[&str], want: usize) -> Result<()> {
    if fields.len() != want {
        return Err(bad(n, format!("expected {want} fields, found {}", fields.len())));
    }
    Ok(())
}

fn opt_text(x: Option<f64>) -> String {
    x.map_or("-".to_string(), |x| x.to_string())
}

pub fn distribution_to_rows(d: &EmpiricalDistribution) -> String {
    let mut out = format!("meta,set,{}\nmeta,cutoff_x,{}\nmeta,total,{}\n", d.set_tag, d.cutoff_x, d.total);
    for (h, c) in &d.counts {
        writeln!(out, "count,{h},{c}").unwrap();
    }
    out
}

pub fn distribution_from_rows(text: &str) -> Result<EmpiricalDistribution> {
    let lines = split(text)?;
    let mut counts = BTreeMap::new();
    for (n, kind, f) in &lines.records {
        match *kind {
            "count" => {
                arity(*n, f, 2)?;
                counts.insert(field(*n, f, 0)?, field(*n, f, 1)?);
            }
            _ => return Err(bad(*n, format!("unexpected record {kind:?}"))),
        }
    }
    Ok(EmpiricalDistribution {
        set_tag: lines.set_tag()?,
        cutoff_x: lines.get("cutoff_x")?,
        counts,
        total: lines.get("total")?,
    })
}

fn series_rows(out: &mut String, series: &[(u64, f64)]) {
    for (x, p) in series {
        writeln!(out, "series,{x},{p}").unwrap();
    }
}

pub fn comparison_to_rows(r: &ComparisonReport) -> String {
    let mut out = format!(
        "meta,set,{}\nmeta,cutoff_x,{}\nmeta,count_h1,{}\nmeta,p1_hat,{}\n",
        r.set_tag, r.cutoff_x, r.count_h1, r.p1_hat
    );
    for row in &r.rows {
        writeln!(
            out,
            "row,{},{},{},{},{},{}",
            row.q,
            row.count,
            row.empirical_ratio,
            format_rational(&row.lambda),
            row.abs_dev,
            row.rel_dev
        )
        .unwrap();
    }
    series_rows(&mut out, &r.convergence_series);
    out
}

pub fn comparison_from_rows(text: &str) -> Result<ComparisonReport> {
    let lines = split(text)?;
    let mut rows = Vec::new();
    let mut convergence_series = Vec::new();
    for (n, kind, f) in &lines.records {
        let n = *n;
        match *kind {
            "row" => {
                arity(n, f, 6)?;
                rows.push(ComparisonRow {
                    q: field(n, f, 0)?,
                    count: field(n, f, 1)?,
                    empirical_ratio: field(n, f, 2)?,
                    lambda: rational(n, f, 3)?,
                    abs_dev: field(n, f, 4)?,
                    rel_dev: field(n, f, 5)?,
                });
            }
            "series" => {
                arity(n, f, 2)?;
                convergence_series.push((field(n, f, 0)?, field(n, f, 1)?));
            }
            _ => return Err(bad(n, format!("unexpected record {kind:?}"))),
        }
    }
    Ok(ComparisonReport {
        set_tag: lines.set_tag()?,
        cutoff_x: lines.get("cutoff_x")?,
        count_h1: lines.get("count_h1")?,
        p1_hat: lines.get("p1_hat")?,
        rows,
        convergence_series,
    })
}

pub fn even_to_rows(r: &EvenStructureReport) -> String {
    let mut out = format!(
        "meta,cutoff_x,{}\nmeta,p1_hat,{}\nmeta,p2_hat,{}\nmeta,p2_exceeds_p1,{}\nmeta,partial_sum,{}\nmeta,p0,{}\n",
        r.cutoff_x, r.p1_hat, r.p2_hat, r.p2_exceeds_p1, r.partial_sum, r.p0
    );
    for row in &r.rows {
        writeln!(
            out,
            "even,{},{},{},{},{},{},{},{},{}",
            row.n,
            row.r,
            row.q,
            row.count_n,
            row.count_2r,
            opt_text(row.ratio),
            format_rational(&row.lambda),
            opt_text(row.abs_dev),
            row.flagged
        )
        .unwrap();
    }
    for t in &r.power_terms {
        writeln!(out, "pow2,{},{},{}", t.k, t.count, t.p_hat).unwrap();
    }
    out
}

pub fn even_from_rows(text: &str) -> Result<EvenStructureReport> {
    let lines = split(text)?;
    let mut rows = Vec::new();
    let mut power_terms = Vec::new();
    for (n, kind, f) in &lines.records {
        let n = *n;
        match *kind {
            "even" => {
                arity(n, f, 9)?;
                rows.push(EvenRow {
                    n: field(n, f, 0)?,
                    r: field(n, f, 1)?,
                    q: field(n, f, 2)?,
                    count_n: field(n, f, 3)?,
                    count_2r: field(n, f, 4)?,
                    ratio: optional(n, f, 5)?,
                    lambda: rational(n, f, 6)?,
                    abs_dev: optional(n, f, 7)?,
                    flagged: field(n, f, 8)?,
                });
            }
            "pow2" => {
                arity(n, f, 3)?;
                power_terms.push(PowerOfTwoTerm { k: field(n, f, 0)?, count: field(n, f, 1)?, p_hat: field(n, f, 2)? });
            }
            _ => return Err(bad(n, format!("unexpected record {kind:?}"))),
        }
    }
    Ok(EvenStructureReport {
        cutoff_x: lines.get("cutoff_x")?,
        p1_hat: lines.get("p1_hat")?,
        p2_hat: lines.get("p2_hat")?,
        p2_exceeds_p1: lines.get("p2_exceeds_p1")?,
        rows,
        power_terms,
        partial_sum: lines.get("partial_sum")?,
        p0: lines.get("p0")?,
    })
}

/// `series,x,P(h=1),P_0` triples ready for plotting.
pub fn convergence_to_rows(series: &[(u64, f64)], p0: f64) -> String {
    let mut out = String::new();
    for (x, p) in series {
        writeln!(out, "series,{x},{p},{p0}").unwrap();
    }
    out
}

pub fn convergence_from_rows(text: &str) -> Result<(Vec<(u64, f64)>, Option<f64>)> {
    let lines = split(text)?;
    let mut series = Vec::new();
    let mut p0 = None;
    for (n, kind, f) in &lines.records {
        let n = *n;
        if *kind != "series" {
            return Err(bad(n, format!("unexpected record {kind:?}")));
        }
        arity(n, f, 3)?;
        series.push((field(n, f, 0)?, field(n, f, 1)?));
        p0 = Some(field(n, f, 2)?);
    }
    Ok((series, p0))
}

/// `lambda,q,n/d` per line.
pub fn lambda_to_rows(values: &[LambdaValue]) -> String {
    let mut out = String::new();
    for v in values {
        writeln!(out, "lambda,{},{}", v.q, format_rational(&v.value)).unwrap();
    }
    out
}

pub fn lambda_from_rows(text: &str) -> Result<Vec<(u64, BigRational)>> {
    let lines = split(text)?;
    lines
        .records
        .iter()
        .map(|(n, kind, f)| {
            if *kind != "lambda" {
                return Err(bad(*n, format!("unexpected record {kind:?}")));
            }
            arity(*n, f, 2)?;
            Ok((field(*n, f, 0)?, rational(*n, f, 1)?))
        })
        .collect()
}
