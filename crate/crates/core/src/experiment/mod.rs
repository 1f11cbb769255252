//! Building class-number tables and comparing their statistics with the model.

pub mod rows;
pub mod stats;

use std::path::Path;

use rayon::prelude::*;

use crate::arith::{discriminant_of, fundamental_discriminant, squarefree_in_range, Radicand, SetTag};
use crate::classnum::{analyze, AnalyticParams, AnalyticResult, FieldRecord};
use crate::error::{Error, Result};
use crate::store::{self, TableFile, TableHeader};

pub use stats::{
    compare_report, compare_table, convergence_series, empirical_distribution, even_structure_report,
    ComparisonReport, ComparisonRow, EmpiricalDistribution, EvenRow, EvenStructureReport, PowerOfTwoTerm,
};

/// Value of the `method` header field for tables built here.
pub const METHOD: &str = "sine-log-sum";
pub const DEFAULT_CHUNK_SPAN: u64 = 10_000;

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub workers: usize,
    /// Width of the radicand range committed per chunk.
    pub chunk_span: u64,
    pub params: AnalyticParams,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            chunk_span: DEFAULT_CHUNK_SPAN,
            params: AnalyticParams::default(),
        }
    }
}

/// Reported after each committed chunk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub frontier: u64,
    pub limit: u64,
    pub records: usize,
}

/// Rounding statistics over the fields computed by one run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GuardStats {
    pub fields: u64,
    pub max_distance: f64,
    /// Discriminant at which `max_distance` occurred.
    pub worst_disc: u64,
    pub mean_distance: f64,
}

impl GuardStats {
    fn absorb(&mut self, results: &[AnalyticResult]) {
        let mut sum = self.mean_distance * self.fields as f64;
        for r in results {
            sum += r.distance;
            if r.distance > self.max_distance || self.fields == 0 {
                self.max_distance = r.distance;
                self.worst_disc = r.record.disc;
            }
            self.fields += 1;
        }
        if self.fields > 0 {
            self.mean_distance = sum / self.fields as f64;
        }
    }
}

/// Radicands `lo..=hi` of one chunk and their records.
#[derive(Debug, Clone)]
pub struct Chunk {
    pub lo: u64,
    pub hi: u64,
    pub results: Vec<AnalyticResult>,
}

impl Chunk {
    pub fn records(&self) -> Vec<FieldRecord> {
        self.results.iter().map(|r| r.record).collect()
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidInput("worker count must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
}

fn compute_one(set_tag: SetTag, d: u64, params: &AnalyticParams) -> Result<AnalyticResult> {
    let disc = fundamental_discriminant(Radicand::new(d, set_tag)?);
    let result = analyze(disc, params)?;
    if set_tag == SetTag::PrimeSet && result.record.h % 2 == 0 {
        return Err(Error::EvenClassNumber { p: d, h: result.record.h });
    }
    Ok(result)
}

/// Analyzes every member of `set_tag` in `lo..=hi` on the current thread pool.
/// The first failure in radicand order is the one reported.
pub fn compute_range(set_tag: SetTag, lo: u64, hi: u64, params: &AnalyticParams) -> Result<Vec<AnalyticResult>> {
    let members = set_tag.members(lo, hi);
    // large radicands cost more, so hand them out in small pieces
    let results: Vec<Result<AnalyticResult>> =
        members.par_iter().with_max_len(64).map(|&d| compute_one(set_tag, d, params)).collect();
    results.into_iter().collect()
}

/// Chunk boundaries are multiples of `span`, so the chunking of a table
/// depends only on its limit and not on how the run was split up.
fn chunk_bounds(from: u64, limit: u64, span: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut lo = from;
    while lo <= limit {
        let hi = ((lo - 1) / span + 1).saturating_mul(span).min(limit);
        out.push((lo, hi));
        lo = hi + 1;
    }
    out
}

/// Computes the chunks covering `lo..=hi` without touching any file.
pub fn compute_chunks(set_tag: SetTag, lo: u64, hi: u64, opts: &BuildOptions) -> Result<Vec<Chunk>> {
    check_span(opts)?;
    let pool = pool(opts.workers)?;
    pool.install(|| {
        chunk_bounds(lo.max(2), hi, opts.chunk_span)
            .into_iter()
            .map(|(lo, hi)| Ok(Chunk { lo, hi, results: compute_range(set_tag, lo, hi, &opts.params)? }))
            .collect()
    })
}

fn check_span(opts: &BuildOptions) -> Result<()> {
    if opts.chunk_span == 0 {
        return Err(Error::InvalidInput("chunk span must be at least 1".into()));
    }
    Ok(())
}

/// Appends separately computed chunks to a table in memory, raising its limit
/// to cover them.
pub fn merge_chunks(table: &mut TableFile, chunks: Vec<Chunk>) -> Result<()> {
    if let Some(last) = chunks.last() {
        if last.hi > table.header.limit {
            table.header.limit = last.hi;
            table.reseal();
        }
    }
    for c in chunks {
        let records = c.records();
        table.push_chunk(c.lo, c.hi, records)?;
    }
    Ok(())
}

fn header_for(set_tag: SetTag, limit: u64, opts: &BuildOptions) -> TableHeader {
    TableHeader::new(set_tag, limit, METHOD, opts.params.guard)
}

/// Opens `path` for a resumed run: drops any uncommitted tail, checks that
/// the stored run is compatible and raises the limit if needed.
fn open_checkpoint(path: &Path, set_tag: SetTag, limit: u64, opts: &BuildOptions) -> Result<TableFile> {
    let mut table = store::recover(path)?;
    let want = header_for(set_tag, table.header.limit, opts);
    if table.header != want {
        return Err(Error::CheckpointMismatch(format!(
            "{} was written with `{}`, this run needs `{}`",
            path.display(),
            table.header.to_line(),
            want.to_line()
        )));
    }
    if table.frontier() > limit {
        return Err(Error::CheckpointMismatch(format!(
            "{} already extends to d={}, past the requested limit {limit}",
            path.display(),
            table.frontier()
        )));
    }
    if table.header.limit != limit {
        table.header.limit = limit;
        table.reseal();
        store::write_table(path, &table)?;
    }
    Ok(table)
}

/// Builds (or resumes) the table of `set_tag` up to `limit` at `path`.
///
/// Each chunk is computed in parallel and then appended by this thread
/// alone, so the file is the same whatever the worker count.
pub fn build_table(
    path: &Path,
    set_tag: SetTag,
    limit: u64,
    resume: bool,
    opts: &BuildOptions,
    progress: &mut dyn FnMut(Progress),
) -> Result<(TableFile, GuardStats)> {
    if limit < 2 {
        return Err(Error::InvalidInput(format!("limit must be at least 2, got {limit}")));
    }
    check_span(opts)?;
    let mut table = if resume && path.exists() {
        open_checkpoint(path, set_tag, limit, opts)?
    } else {
        let t = TableFile::new(header_for(set_tag, limit, opts));
        store::write_table(path, &t)?;
        t
    };
    let pool = pool(opts.workers)?;
    let mut guard = GuardStats::default();
    for (lo, hi) in chunk_bounds(table.frontier() + 1, limit, opts.chunk_span) {
        let results = pool.install(|| compute_range(set_tag, lo, hi, &opts.params))?;
        guard.absorb(&results);
        let records = results.iter().map(|r| r.record).collect();
        store::append_chunk(path, &mut table, lo, hi, records)?;
        progress(Progress { frontier: hi, limit, records: table.records.len() });
    }
    Ok((table, guard))
}

/// Rounding distances over every fundamental discriminant `D <= max_disc`.
pub fn guard_statistics(max_disc: u64, params: &AnalyticParams, workers: usize) -> Result<GuardStats> {
    let radicands: Vec<u64> = squarefree_in_range(2, max_disc)
        .into_iter()
        .filter(|&d| if d % 4 == 1 { d <= max_disc } else { d <= max_disc / 4 })
        .collect();
    let pool = pool(workers)?;
    let mut stats = GuardStats::default();
    for block in radicands.chunks(16_384) {
        let results: Vec<Result<AnalyticResult>> = pool.install(|| {
            block.par_iter().with_max_len(64).map(|&d| analyze(discriminant_of(d)?, params)).collect()
        });
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        stats.absorb(&results);
    }
    Ok(stats)
}
