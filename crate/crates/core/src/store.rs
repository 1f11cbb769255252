//! Checkpointable class-number table files.
//!
//! Layout, one item per line:
//!
//! ```text
//! #realquad-table format_version=1 set=P limit=100 method=sine-log-sum guard=0.1
//! 2,8,1,8.8137358701954294e-1,1,-1
//! 3,12,1,1.3169578969248166e0,2,1
//! ...
//! 97,97,1,9.3243830959774048e0,9,-1
//! #chunk seq=0 range=2..100 records=25 checksum=277c5414
//! ```
//!
//! Records are `d,D,h,regulator,period_length,unit_norm`, with the regulator
//! written in 17 significant digits. Each chunk of records is committed by a
//! trailer carrying its radicand range, record count and a CRC-32. The CRC
//! runs over the header line, the trailer's own fields, and for every record
//! the little-endian bytes of `d, D, h, bits(regulator), period_length`
//! followed by `unit_norm` as one byte. Chunk ranges tile `[2, frontier]`
//! without gaps. Lines after the last trailer are an uncommitted tail:
//! readers ignore them and [`recover`] cuts them off.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::arith::SetTag;
use crate::classnum::FieldRecord;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "#realquad-table";
const TRAILER: &str = "#chunk";

#[derive(Debug, Clone, PartialEq)]
pub struct TableHeader {
    pub format_version: u32,
    pub set_tag: SetTag,
    /// Largest radicand the table is meant to reach.
    pub limit: u64,
    pub method: String,
    pub guard: f64,
}

impl TableHeader {
    pub fn new(set_tag: SetTag, limit: u64, method: &str, guard: f64) -> Self {
        TableHeader { format_version: FORMAT_VERSION, set_tag, limit, method: method.to_string(), guard }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{MAGIC} format_version={} set={} limit={} method={} guard={}",
            self.format_version, self.set_tag, self.limit, self.method, self.guard
        )
    }

    fn parse(path: &Path, line: &str) -> Result<Self> {
        let bad = |message: String| Error::Format { path: path.to_path_buf(), line: 1, message };
        let rest = line
            .strip_prefix(MAGIC)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| bad("missing table header".into()))?;
        let mut version = None;
        let mut set_tag = None;
        let mut limit = None;
        let mut method = None;
        let mut guard = None;
        for pair in rest.split(' ') {
            let (k, v) = pair.split_once('=').ok_or_else(|| bad(format!("bad header field {pair:?}")))?;
            match k {
                "format_version" => version = Some(v.to_string()),
                "set" => set_tag = SetTag::from_code(v),
                "limit" => limit = v.parse().ok(),
                "method" => method = Some(v.to_string()),
                "guard" => guard = v.parse().ok(),
                _ => return Err(bad(format!("unknown header field {k:?}"))),
            }
        }
        let version = version.ok_or_else(|| bad("missing format_version".into()))?;
        if version != FORMAT_VERSION.to_string() {
            return Err(Error::UnsupportedVersion {
                path: path.to_path_buf(),
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let header = TableHeader {
            format_version: FORMAT_VERSION,
            set_tag: set_tag.ok_or_else(|| bad("missing or invalid set".into()))?,
            limit: limit.ok_or_else(|| bad("missing or invalid limit".into()))?,
            method: method.ok_or_else(|| bad("missing method".into()))?,
            guard: guard.ok_or_else(|| bad("missing or invalid guard".into()))?,
        };
        if header.to_line() != line {
            return Err(bad("header is not in canonical form".into()));
        }
        Ok(header)
    }
}

/// A committed chunk: the radicands `lo..=hi` and the records covering them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkInfo {
    pub seq: usize,
    pub lo: u64,
    pub hi: u64,
    pub records: usize,
    pub checksum: u32,
}

impl ChunkInfo {
    fn to_line(&self) -> String {
        format!(
            "{TRAILER} seq={} range={}..{} records={} checksum={:08x}",
            self.seq, self.lo, self.hi, self.records, self.checksum
        )
    }

    fn parse(line: &str) -> Option<ChunkInfo> {
        let rest = line.strip_prefix(TRAILER)?.strip_prefix(' ')?;
        let mut it = rest.split(' ');
        let seq = it.next()?.strip_prefix("seq=")?.parse().ok()?;
        let (lo, hi) = it.next()?.strip_prefix("range=")?.split_once("..")?;
        let records = it.next()?.strip_prefix("records=")?.parse().ok()?;
        let checksum_hex = it.next()?.strip_prefix("checksum=")?;
        if it.next().is_some() || checksum_hex.len() != 8 {
            return None;
        }
        let info = ChunkInfo {
            seq,
            lo: lo.parse().ok()?,
            hi: hi.parse().ok()?,
            records,
            checksum: u32::from_str_radix(checksum_hex, 16).ok()?,
        };
        (info.to_line() == line).then_some(info)
    }
}

/// An in-memory table: header, committed chunks and their records.
#[derive(Debug, Clone, PartialEq)]
pub struct TableFile {
    pub header: TableHeader,
    pub chunks: Vec<ChunkInfo>,
    pub records: Vec<FieldRecord>,
}

impl TableFile {
    pub fn new(header: TableHeader) -> Self {
        TableFile { header, chunks: Vec::new(), records: Vec::new() }
    }

    /// Largest radicand covered by committed chunks (1 when empty).
    pub fn frontier(&self) -> u64 {
        self.chunks.last().map_or(1, |c| c.hi)
    }

    pub fn completed_ranges(&self) -> Vec<(u64, u64)> {
        self.chunks.iter().map(|c| (c.lo, c.hi)).collect()
    }

    /// The record lines only, the part that must not depend on chunking.
    pub fn payload(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&record_line(r));
            out.push('\n');
        }
        out
    }

    /// Full file contents.
    pub fn serialize(&self) -> String {
        let mut out = self.header.to_line();
        out.push('\n');
        let mut start = 0;
        for c in &self.chunks {
            for r in &self.records[start..start + c.records] {
                out.push_str(&record_line(r));
                out.push('\n');
            }
            start += c.records;
            out.push_str(&c.to_line());
            out.push('\n');
        }
        out
    }

    /// Adds a chunk in memory after checking it continues the frontier.
    pub fn push_chunk(&mut self, lo: u64, hi: u64, records: Vec<FieldRecord>) -> Result<ChunkInfo> {
        let frontier = self.frontier();
        if lo != frontier + 1 || hi < lo {
            return Err(Error::NonContiguous { start: lo, frontier });
        }
        let mut prev = frontier;
        for r in &records {
            if r.d <= prev || r.d > hi {
                return Err(Error::InvalidInput(format!(
                    "record d={} outside chunk {lo}..{hi} or out of order",
                    r.d
                )));
            }
            prev = r.d;
        }
        let seq = self.chunks.len();
        let checksum = chunk_checksum(&self.header.to_line(), seq, lo, hi, &records);
        let info = ChunkInfo { seq, lo, hi, records: records.len(), checksum };
        self.chunks.push(info.clone());
        self.records.extend(records);
        Ok(info)
    }

    /// Recomputes every trailer checksum, e.g. after a header change.
    pub fn reseal(&mut self) {
        let header = self.header.to_line();
        let mut start = 0;
        for c in &mut self.chunks {
            c.checksum = chunk_checksum(&header, c.seq, c.lo, c.hi, &self.records[start..start + c.records]);
            start += c.records;
        }
    }
}

/// `d,D,h,regulator,period_length,unit_norm`
pub fn record_line(r: &FieldRecord) -> String {
    format!(
        "{},{},{},{},{},{}",
        r.d,
        r.disc,
        r.h,
        format_regulator(r.regulator),
        r.period_length,
        r.unit_norm
    )
}

/// 17 significant digits, enough to recover the exact `f64`.
pub fn format_regulator(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_record(line: &str) -> Option<FieldRecord> {
    let mut it = line.split(',');
    let d = it.next()?.parse().ok()?;
    let disc = it.next()?.parse().ok()?;
    let h = it.next()?.parse().ok()?;
    let reg_text = it.next()?;
    let regulator: f64 = reg_text.parse().ok()?;
    let period_length = it.next()?.parse().ok()?;
    let unit_norm: i8 = it.next()?.parse().ok()?;
    if it.next().is_some() || !matches!(unit_norm, -1 | 1) {
        return None;
    }
    let r = FieldRecord { d, disc, h, regulator, period_length, unit_norm };
    // integers and regulator must be in canonical spelling, so that every
    // byte of the line is covered by the checksum
    (record_line(&r) == line).then_some(r)
}

fn chunk_checksum(header: &str, seq: usize, lo: u64, hi: u64, records: &[FieldRecord]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(header.as_bytes());
    h.update(&(seq as u64).to_le_bytes());
    h.update(&lo.to_le_bytes());
    h.update(&hi.to_le_bytes());
    h.update(&(records.len() as u64).to_le_bytes());
    for r in records {
        h.update(&r.d.to_le_bytes());
        h.update(&r.disc.to_le_bytes());
        h.update(&r.h.to_le_bytes());
        h.update(&r.regulator.to_bits().to_le_bytes());
        h.update(&r.period_length.to_le_bytes());
        h.update(&[r.unit_norm as u8]);
    }
    h.finalize()
}

/// Writes the whole table atomically (temp file in the same directory, then rename).
pub fn write_table(path: &Path, table: &TableFile) -> Result<()> {
    let tmp = temp_path(path);
    {
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(table.serialize().as_bytes()).map_err(|e| Error::io(&tmp, e))?;
        let file = w.into_inner().map_err(|e| Error::io(&tmp, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Appends a chunk to the file on disk and to `table`. The records go out
/// first and the trailer last, so a crash leaves at worst an uncommitted tail.
pub fn append_chunk(path: &Path, table: &mut TableFile, lo: u64, hi: u64, records: Vec<FieldRecord>) -> Result<ChunkInfo> {
    let start = table.records.len();
    let info = table.push_chunk(lo, hi, records)?;
    let mut text = String::new();
    for r in &table.records[start..] {
        text.push_str(&record_line(r));
        text.push('\n');
    }
    text.push_str(&info.to_line());
    text.push('\n');
    let mut file = OpenOptions::new().append(true).open(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    file.sync_data().map_err(|e| Error::io(path, e))?;
    Ok(info)
}

struct Parsed {
    table: TableFile,
    /// Byte offset just past the last committed trailer.
    committed_len: usize,
}

fn parse(path: &Path, text: &str, strict_tail: bool) -> Result<Parsed> {
    let bad = |line: usize, message: String| Error::Format { path: path.to_path_buf(), line, message };
    let Some(header_end) = text.find('\n') else {
        return Err(bad(1, "missing table header".into()));
    };
    let header = TableHeader::parse(path, &text[..header_end])?;
    let header_line = header.to_line();
    let mut table = TableFile::new(header);
    let mut committed_len = header_end + 1;
    let mut pending: Vec<FieldRecord> = Vec::new();
    let mut offset = header_end + 1;
    let mut line_no = 1;

    while offset < text.len() {
        line_no += 1;
        let (line, complete) = match text[offset..].find('\n') {
            Some(i) => (&text[offset..offset + i], true),
            None => (&text[offset..], false),
        };
        let next = offset + line.len() + usize::from(complete);
        if line.starts_with('#') {
            if !complete {
                if strict_tail {
                    return Err(bad(line_no, "trailer line without newline".into()));
                }
                break;
            }
            let info = ChunkInfo::parse(line).ok_or_else(|| bad(line_no, format!("malformed trailer {line:?}")))?;
            let seq = table.chunks.len();
            if info.seq != seq || info.records != pending.len() {
                return Err(bad(line_no, format!("trailer {seq} does not match its records")));
            }
            let expected = chunk_checksum(&header_line, seq, info.lo, info.hi, &pending);
            if expected != info.checksum {
                return Err(Error::ChecksumMismatch { path: path.to_path_buf(), chunk: seq });
            }
            let frontier = table.frontier();
            if info.lo != frontier + 1 || info.hi < info.lo {
                return Err(bad(line_no, format!("chunk {seq} range {}..{} leaves a gap after {frontier}", info.lo, info.hi)));
            }
            let mut prev = frontier;
            for r in &pending {
                if r.d <= prev || r.d > info.hi {
                    return Err(bad(line_no, format!("chunk {seq}: record d={} out of order or range", r.d)));
                }
                prev = r.d;
            }
            table.chunks.push(info);
            table.records.append(&mut pending);
            committed_len = next;
        } else if !complete {
            // partial final record: an interrupted append
            break;
        } else {
            match parse_record(line) {
                Some(r) => pending.push(r),
                None => return Err(bad(line_no, format!("malformed record {line:?}"))),
            }
        }
        offset = next;
    }
    Ok(Parsed { table, committed_len })
}

/// Reads and validates a table. Lines past the last trailer are not part of
/// the result.
pub fn read_table(path: &Path) -> Result<TableFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse(path, &text, true)?.table)
}

/// Cuts the file back to its last committed trailer and returns the table.
pub fn recover(path: &Path) -> Result<TableFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = parse(path, &text, false)?;
    if parsed.committed_len < text.len() {
        let file = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
        file.set_len(parsed.committed_len as u64).map_err(|e| Error::io(path, e))?;
        file.sync_all().map_err(|e| Error::io(path, e))?;
    }
    Ok(parsed.table)
}

/// Validates a table already held in memory as text.
pub fn parse_table(text: &str) -> Result<TableFile> {
    Ok(parse(Path::new("<memory>"), text, true)?.table)
}
