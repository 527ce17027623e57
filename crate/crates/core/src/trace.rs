//! Cache-write traces: file formats and shadow-store replay.
//!
//! JSONL: one object per line, `{"addr":"0x...","data":"<128 hex chars>"}`,
//! payload bytes in block order.
//!
//! Binary: magic `RBTR`, version byte `0x01`, then repeated records of an
//! 8-byte little-endian address followed by the 64-byte payload.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::block::{CacheBlock, BLOCK_BYTES};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"RBTR";
pub const BINARY_VERSION: u8 = 0x01;
pub const BINARY_HEADER_LEN: usize = 5;
pub const BINARY_RECORD_LEN: usize = 8 + BLOCK_BYTES;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    Jsonl,
    Binary,
}

impl TraceFormat {
    /// Guesses the format from a file extension; anything but `.jsonl`/`.json`
    /// is treated as binary.
    pub fn from_path(path: &Path) -> TraceFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => TraceFormat::Jsonl,
            _ => TraceFormat::Binary,
        }
    }
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(TraceFormat::Jsonl),
            "binary" | "bin" => Ok(TraceFormat::Binary),
            other => Err(Error::Config(format!("unknown trace format `{other}`"))),
        }
    }
}

impl fmt::Display for TraceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceFormat::Jsonl => "jsonl",
            TraceFormat::Binary => "binary",
        })
    }
}

/// One block write: a 64-byte aligned address and the new block content.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WriteRecord {
    pub addr: u64,
    pub data: CacheBlock,
}

impl WriteRecord {
    pub fn new(addr: u64, data: CacheBlock) -> Result<Self> {
        if !addr.is_multiple_of(BLOCK_BYTES as u64) {
            return Err(Error::Domain(format!("address {addr:#x} is not 64-byte aligned")));
        }
        Ok(WriteRecord { addr, data })
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    addr: String,
    data: String,
}

fn parse_json_record(line: &str) -> std::result::Result<WriteRecord, String> {
    let rec: JsonRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let digits = rec
        .addr
        .strip_prefix("0x")
        .or_else(|| rec.addr.strip_prefix("0X"))
        .ok_or_else(|| format!("address `{}` lacks 0x prefix", rec.addr))?;
    let addr = u64::from_str_radix(digits, 16).map_err(|e| format!("address `{}`: {e}", rec.addr))?;
    if rec.data.len() != 2 * BLOCK_BYTES {
        return Err(format!(
            "data has {} hex chars, expected {}",
            rec.data.len(),
            2 * BLOCK_BYTES
        ));
    }
    let mut bytes = [0u8; BLOCK_BYTES];
    hex::decode_to_slice(&rec.data, &mut bytes).map_err(|e| format!("data: {e}"))?;
    WriteRecord::new(addr, CacheBlock::from_bytes(&bytes)).map_err(|e| e.to_string())
}

/// Streaming reader over a trace file.
pub enum TraceReader<R> {
    Jsonl {
        lines: io::Lines<R>,
        index: usize,
        path: PathBuf,
    },
    Binary {
        inner: R,
        index: usize,
        path: PathBuf,
    },
}

impl TraceReader<BufReader<File>> {
    pub fn open(path: &Path, format: TraceFormat) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::new(BufReader::new(file), format, path)
    }
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(mut inner: R, format: TraceFormat, path: &Path) -> Result<Self> {
        let path = path.to_path_buf();
        Ok(match format {
            TraceFormat::Jsonl => TraceReader::Jsonl {
                lines: inner.lines(),
                index: 0,
                path,
            },
            TraceFormat::Binary => {
                let mut header = [0u8; BINARY_HEADER_LEN];
                let n = read_full(&mut inner, &mut header).map_err(|e| Error::io(&path, e))?;
                if n < BINARY_HEADER_LEN {
                    return Err(Error::Format(format!("{}: truncated header", path.display())));
                }
                if &header[..4] != BINARY_MAGIC {
                    return Err(Error::Format(format!(
                        "{}: bad magic {:02x?}",
                        path.display(),
                        &header[..4]
                    )));
                }
                if header[4] != BINARY_VERSION {
                    return Err(Error::Format(format!(
                        "{}: unsupported version {:#04x}",
                        path.display(),
                        header[4]
                    )));
                }
                TraceReader::Binary { inner, index: 0, path }
            }
        })
    }
}

/// Fills `buf` until EOF; returns the number of bytes read.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = Result<WriteRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            TraceReader::Jsonl { lines, index, path } => loop {
                let line = match lines.next()? {
                    Ok(l) => l,
                    Err(e) => return Some(Err(Error::io(path.clone(), e))),
                };
                if line.trim().is_empty() {
                    continue;
                }
                let i = *index;
                *index += 1;
                return Some(parse_json_record(line.trim()).map_err(|reason| Error::Parse { index: i, reason }));
            },
            TraceReader::Binary { inner, index, path } => {
                let mut buf = [0u8; BINARY_RECORD_LEN];
                let n = match read_full(inner, &mut buf) {
                    Ok(0) => return None,
                    Ok(n) => n,
                    Err(e) => return Some(Err(Error::io(path.clone(), e))),
                };
                let i = *index;
                *index += 1;
                if n < BINARY_RECORD_LEN {
                    return Some(Err(Error::Parse {
                        index: i,
                        reason: format!("truncated record ({n} of {BINARY_RECORD_LEN} bytes)"),
                    }));
                }
                let addr = u64::from_le_bytes(buf[..8].try_into().unwrap());
                let data = CacheBlock::from_bytes(buf[8..].try_into().unwrap());
                Some(WriteRecord::new(addr, data).map_err(|e| Error::Parse {
                    index: i,
                    reason: e.to_string(),
                }))
            }
        }
    }
}

/// Reads a whole trace into memory.
pub fn load_trace(path: &Path, format: TraceFormat) -> Result<Vec<WriteRecord>> {
    TraceReader::open(path, format)?.collect()
}

pub fn write_trace<'a, I>(path: &Path, format: TraceFormat, records: I) -> Result<()>
where
    I: IntoIterator<Item = &'a WriteRecord>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode_trace(&mut w, format, records).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_trace<'a, W, I>(w: &mut W, format: TraceFormat, records: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a WriteRecord>,
{
    match format {
        TraceFormat::Jsonl => {
            for r in records {
                let rec = JsonRecord {
                    addr: format!("{:#x}", r.addr),
                    data: hex::encode(r.data.to_bytes()),
                };
                serde_json::to_writer(&mut *w, &rec)?;
                w.write_all(b"\n")?;
            }
        }
        TraceFormat::Binary => {
            w.write_all(BINARY_MAGIC)?;
            w.write_all(&[BINARY_VERSION])?;
            for r in records {
                w.write_all(&r.addr.to_le_bytes())?;
                w.write_all(&r.data.to_bytes())?;
            }
        }
    }
    Ok(())
}

/// Last-written content of every address; untouched addresses read as zeros.
#[derive(Clone, Debug, Default)]
pub struct ShadowStore {
    blocks: HashMap<u64, CacheBlock>,
}

impl ShadowStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, addr: u64) -> CacheBlock {
        self.blocks.get(&addr).copied().unwrap_or(CacheBlock::ZERO)
    }

    /// Stores `data` at `addr` and returns the previous content.
    pub fn write(&mut self, addr: u64, data: CacheBlock) -> CacheBlock {
        self.blocks.insert(addr, data).unwrap_or(CacheBlock::ZERO)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// The old and new content of one block write.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockWrite {
    pub addr: u64,
    pub old: CacheBlock,
    pub new: CacheBlock,
}

/// Replays write records against a shadow store, yielding (old, new) pairs.
/// The first `warmup` records update the store without being yielded.
pub struct OldNewPairs<I> {
    records: I,
    store: ShadowStore,
    warmup: u64,
    seen: u64,
}

impl<I> OldNewPairs<I> {
    pub fn into_store(self) -> ShadowStore {
        self.store
    }
}

pub fn old_new_pairs<I>(records: I, store: ShadowStore, warmup: u64) -> OldNewPairs<I::IntoIter>
where
    I: IntoIterator,
{
    OldNewPairs {
        records: records.into_iter(),
        store,
        warmup,
        seen: 0,
    }
}

impl<I> Iterator for OldNewPairs<I>
where
    I: Iterator<Item = Result<WriteRecord>>,
{
    type Item = Result<BlockWrite>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let rec = match self.records.next()? {
                Ok(r) => r,
                Err(e) => return Some(Err(e)),
            };
            let old = self.store.write(rec.addr, rec.data);
            self.seen += 1;
            if self.seen > self.warmup {
                return Some(Ok(BlockWrite {
                    addr: rec.addr,
                    old,
                    new: rec.data,
                }));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(addr: u64, fill: u64) -> WriteRecord {
        WriteRecord::new(addr, CacheBlock::from_words([fill; 8])).unwrap()
    }

    fn pairs(records: &[WriteRecord], warmup: u64) -> Vec<BlockWrite> {
        old_new_pairs(records.iter().copied().map(Ok), ShadowStore::new(), warmup)
            .collect::<Result<_>>()
            .unwrap()
    }

    #[test]
    fn binary_single_record_is_77_bytes() {
        let mut buf = Vec::new();
        encode_trace(&mut buf, TraceFormat::Binary, &[rec(0x40, 3)]).unwrap();
        assert_eq!(buf.len(), 77);
        let got: Vec<_> = TraceReader::new(&buf[..], TraceFormat::Binary, Path::new("mem"))
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(got, vec![rec(0x40, 3)]);
    }

    #[test]
    fn header_only_is_empty() {
        let buf = b"RBTR\x01".to_vec();
        let r = TraceReader::new(&buf[..], TraceFormat::Binary, Path::new("mem")).unwrap();
        assert_eq!(r.count(), 0);
        assert_eq!(
            TraceReader::new(&b""[..], TraceFormat::Jsonl, Path::new("mem"))
                .unwrap()
                .count(),
            0
        );
    }

    #[test]
    fn bad_magic_and_version() {
        let e = TraceReader::new(&b"RBTX\x01"[..], TraceFormat::Binary, Path::new("m"))
            .err()
            .unwrap();
        assert!(matches!(e, Error::Format(_)));
        let e = TraceReader::new(&b"RBTR\x02"[..], TraceFormat::Binary, Path::new("m"))
            .err()
            .unwrap();
        assert!(matches!(e, Error::Format(_)));
        let e = TraceReader::new(&b"RB"[..], TraceFormat::Binary, Path::new("m"))
            .err()
            .unwrap();
        assert!(matches!(e, Error::Format(_)));
    }

    #[test]
    fn truncated_binary_record() {
        let mut buf = Vec::new();
        encode_trace(&mut buf, TraceFormat::Binary, &[rec(0, 1), rec(64, 2)]).unwrap();
        buf.truncate(buf.len() - 10);
        let out: Vec<_> = TraceReader::new(&buf[..], TraceFormat::Binary, Path::new("m"))
            .unwrap()
            .collect();
        assert!(out[0].is_ok());
        assert!(matches!(out[1], Err(Error::Parse { index: 1, .. })));
    }

    #[test]
    fn jsonl_roundtrip_and_errors() {
        let mut buf = Vec::new();
        encode_trace(&mut buf, TraceFormat::Jsonl, &[rec(0x1000, 0xabcd), rec(0x1040, 7)]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"addr\":\"0x1000\",\"data\":\"cdab000000000000"));
        let got: Vec<_> = TraceReader::new(&buf[..], TraceFormat::Jsonl, Path::new("m"))
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(got, vec![rec(0x1000, 0xabcd), rec(0x1040, 7)]);

        let short = format!(
            "{}\n{{\"addr\":\"0x40\",\"data\":\"{}\"}}\n",
            text.lines().next().unwrap(),
            "0".repeat(127)
        );
        let out: Vec<_> = TraceReader::new(short.as_bytes(), TraceFormat::Jsonl, Path::new("m"))
            .unwrap()
            .collect();
        assert!(out[0].is_ok());
        assert!(matches!(&out[1], Err(Error::Parse { index: 1, reason }) if reason.contains("127")));

        let misaligned = format!("{{\"addr\":\"0x41\",\"data\":\"{}\"}}", "0".repeat(128));
        assert!(parse_json_record(&misaligned).is_err());
    }

    #[test]
    fn shadow_store_semantics() {
        let p = pairs(&[rec(0, 5), rec(64, 9), rec(0, 5)], 0);
        assert_eq!(p[0].old, CacheBlock::ZERO);
        assert_eq!(p[1].old, CacheBlock::ZERO);
        assert_eq!(p[2].old, p[2].new);
        let warm = pairs(&[rec(0, 5), rec(64, 9), rec(0, 6)], 2);
        assert_eq!(warm.len(), 1);
        assert_eq!(warm[0].old, CacheBlock::from_words([5; 8]));
    }
}
