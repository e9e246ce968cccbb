//! Fixed-width little-endian tape files.
//!
//! ```text
//! header (64 bytes)
//!   0..8    magic "NMSTAPE1"
//!   8..10   format version (u16)
//!   10..16  zero padding
//!   16..24  record count (u64)
//!   24..32  symbol directory offset (u64, 0 = directory kept alongside)
//!   32..64  scenario hash
//! record (48 bytes)
//!   0..4    symbol id (u32)
//!   4       kind (0 trade, 1 bid, 2 ask)
//!   5       exchange id
//!   6..8    reserved
//!   8..16   price ticks (i64)
//!   16..20  size (u32)
//!   20..24  reserved
//!   24..32  exchange ts (u64)
//!   32..40  sip ts (u64)
//!   40..48  sip seq (u64)
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::registry::{Registry, SymbolDirectory};
use crate::types::{ExchangeId, MsgKind, Price, SymbolId, TapeRecord, Timestamp};

use super::TapeError;

pub const MAGIC: [u8; 8] = *b"NMSTAPE1";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_SIZE: usize = 64;
pub const RECORD_SIZE: usize = 48;

/// Scenario hash used for tapes that did not come from the simulator.
pub const CAPTURE_MARKER: [u8; 32] = *b"capture\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TapeFileHeader {
    pub magic: [u8; 8],
    pub format_version: u16,
    pub record_count: u64,
    pub symbol_directory_offset: u64,
    pub scenario_hash: [u8; 32],
}

impl TapeFileHeader {
    pub fn new(record_count: u64, scenario_hash: [u8; 32]) -> Self {
        TapeFileHeader {
            magic: MAGIC,
            format_version: FORMAT_VERSION,
            record_count,
            symbol_directory_offset: 0,
            scenario_hash,
        }
    }

    pub fn encode(&self) -> [u8; HEADER_SIZE] {
        let mut buf = [0u8; HEADER_SIZE];
        buf[0..8].copy_from_slice(&self.magic);
        buf[8..10].copy_from_slice(&self.format_version.to_le_bytes());
        buf[16..24].copy_from_slice(&self.record_count.to_le_bytes());
        buf[24..32].copy_from_slice(&self.symbol_directory_offset.to_le_bytes());
        buf[32..64].copy_from_slice(&self.scenario_hash);
        buf
    }

    pub fn decode(buf: &[u8]) -> Result<Self, TapeError> {
        if buf.len() < HEADER_SIZE {
            return Err(TapeError::Truncated { expected: HEADER_SIZE as u64, actual: buf.len() as u64 });
        }
        let magic: [u8; 8] = buf[0..8].try_into().unwrap();
        if magic != MAGIC {
            return Err(TapeError::BadMagic(magic));
        }
        let format_version = u16::from_le_bytes(buf[8..10].try_into().unwrap());
        if format_version != FORMAT_VERSION {
            return Err(TapeError::VersionMismatch { found: format_version, expected: FORMAT_VERSION });
        }
        Ok(TapeFileHeader {
            magic,
            format_version,
            record_count: u64::from_le_bytes(buf[16..24].try_into().unwrap()),
            symbol_directory_offset: u64::from_le_bytes(buf[24..32].try_into().unwrap()),
            scenario_hash: buf[32..64].try_into().unwrap(),
        })
    }
}

pub fn encode_record(rec: &TapeRecord, out: &mut [u8; RECORD_SIZE]) {
    *out = [0u8; RECORD_SIZE];
    out[0..4].copy_from_slice(&rec.symbol_id.0.to_le_bytes());
    out[4] = rec.msg_kind as u8;
    out[5] = rec.exchange_id.0;
    out[8..16].copy_from_slice(&rec.price.0.to_le_bytes());
    out[16..20].copy_from_slice(&rec.size.to_le_bytes());
    out[24..32].copy_from_slice(&rec.exchange_ts.0.to_le_bytes());
    out[32..40].copy_from_slice(&rec.sip_ts.0.to_le_bytes());
    out[40..48].copy_from_slice(&rec.sip_seq.to_le_bytes());
}

/// Decodes one record; `index` is used only for error reporting.
pub fn decode_record(buf: &[u8], index: u64) -> Result<TapeRecord, TapeError> {
    let u64_at = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
    let msg_kind = MsgKind::from_u8(buf[4])
        .ok_or_else(|| TapeError::Corrupt { index, reason: format!("invalid message kind {}", buf[4]) })?;
    if buf[6..8] != [0, 0] || buf[20..24] != [0, 0, 0, 0] {
        return Err(TapeError::Corrupt { index, reason: "reserved bytes are not zero".into() });
    }
    Ok(TapeRecord {
        symbol_id: SymbolId(u32::from_le_bytes(buf[0..4].try_into().unwrap())),
        msg_kind,
        exchange_id: ExchangeId(buf[5]),
        price: Price(i64::from_le_bytes(buf[8..16].try_into().unwrap())),
        size: u32::from_le_bytes(buf[16..20].try_into().unwrap()),
        exchange_ts: Timestamp(u64_at(24)),
        sip_ts: Timestamp(u64_at(32)),
        sip_seq: u64_at(40),
    })
}

/// Checks that every SIP's records appear with strictly increasing `sip_seq`.
pub fn check_tape_order(records: &[TapeRecord], directory: &SymbolDirectory) -> Result<(), TapeError> {
    let mut last: [Option<u64>; 3] = [None; 3];
    for (i, rec) in records.iter().enumerate() {
        let sip = directory
            .sip_of(rec.symbol_id)
            .ok_or(TapeError::UnknownSymbol { index: i as u64, symbol_id: rec.symbol_id.0 })?;
        let slot = &mut last[sip.index()];
        if let Some(prev) = *slot {
            if rec.sip_seq <= prev {
                return Err(TapeError::Ordering { index: i as u64, sip, previous: prev, found: rec.sip_seq });
            }
        }
        *slot = Some(rec.sip_seq);
    }
    Ok(())
}

/// Serializes a tape to any writer after validating its ordering.
pub fn write_tape_to<W: Write>(
    mut out: W,
    records: &[TapeRecord],
    directory: &SymbolDirectory,
    scenario_hash: [u8; 32],
) -> Result<u64, TapeError> {
    check_tape_order(records, directory)?;
    let header = TapeFileHeader::new(records.len() as u64, scenario_hash);
    out.write_all(&header.encode())?;
    let mut buf = [0u8; RECORD_SIZE];
    for rec in records {
        encode_record(rec, &mut buf);
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(records.len() as u64)
}

/// Writes `records` to `path`; returns the number of records written.
pub fn write_tape(
    path: impl AsRef<Path>,
    records: &[TapeRecord],
    directory: &SymbolDirectory,
    scenario_hash: [u8; 32],
) -> Result<u64, TapeError> {
    let path = path.as_ref();
    let file = File::create(path)?;
    let written = write_tape_to(BufWriter::with_capacity(1 << 20, file), records, directory, scenario_hash)?;
    let expected = expected_file_size(written);
    let actual = std::fs::metadata(path)?.len();
    if actual != expected {
        return Err(TapeError::SizeMismatch { expected, actual });
    }
    Ok(written)
}

pub const fn expected_file_size(record_count: u64) -> u64 {
    HEADER_SIZE as u64 + RECORD_SIZE as u64 * record_count
}

/// Non-fatal anomaly found while reading a tape.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    NegativeLatency {
        index: u64,
        latency_us: i64,
    },
    /// `sip_ts` went backwards while `sip_seq` advanced.
    SipTsRegression {
        index: u64,
    },
    QuoteFromNonQuotingVenue {
        index: u64,
        exchange_id: u8,
    },
    UnknownExchange {
        index: u64,
        exchange_id: u8,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn negative_latency_count(&self) -> usize {
        self.issues.iter().filter(|i| matches!(i, ValidationIssue::NegativeLatency { .. })).count()
    }
}

/// Semantic checks on a decoded record sequence.
pub fn validate_records(records: &[TapeRecord], registry: &Registry) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut prev: Option<&TapeRecord> = None;
    for (i, rec) in records.iter().enumerate() {
        let index = i as u64;
        if rec.sip_ts < rec.exchange_ts {
            report.issues.push(ValidationIssue::NegativeLatency { index, latency_us: rec.latency_us() });
        }
        if let Some(p) = prev {
            if rec.sip_seq > p.sip_seq && rec.sip_ts < p.sip_ts {
                report.issues.push(ValidationIssue::SipTsRegression { index });
            }
        }
        match registry.get(rec.exchange_id) {
            None => report.issues.push(ValidationIssue::UnknownExchange { index, exchange_id: rec.exchange_id.0 }),
            Some(info) if rec.is_quote() && !info.quotes_allowed => {
                report.issues.push(ValidationIssue::QuoteFromNonQuotingVenue { index, exchange_id: rec.exchange_id.0 });
            }
            Some(_) => {}
        }
        prev = Some(rec);
    }
    report
}

#[derive(Clone, Debug)]
pub struct Tape {
    pub header: TapeFileHeader,
    pub records: Vec<TapeRecord>,
    pub report: ValidationReport,
}

/// Decodes a complete tape image.
pub fn read_tape_bytes(bytes: &[u8]) -> Result<Tape, TapeError> {
    let header = TapeFileHeader::decode(bytes)?;
    let expected = expected_file_size(header.record_count);
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(TapeError::Truncated { expected, actual });
    }
    if actual > expected {
        return Err(TapeError::SizeMismatch { expected, actual });
    }
    let records = bytes[HEADER_SIZE..]
        .chunks_exact(RECORD_SIZE)
        .enumerate()
        .map(|(i, chunk)| decode_record(chunk, i as u64))
        .collect::<Result<Vec<_>, _>>()?;
    let report = validate_records(&records, Registry::global());
    Ok(Tape { header, records, report })
}

pub fn read_tape(path: impl AsRef<Path>) -> Result<Tape, TapeError> {
    let mut file = File::open(path.as_ref())?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    read_tape_bytes(&bytes)
}

/// Reads only the header, leaving records on disk.
pub fn read_header(path: impl AsRef<Path>) -> Result<TapeFileHeader, TapeError> {
    let mut file = File::open(path.as_ref())?;
    let mut buf = [0u8; HEADER_SIZE];
    let mut filled = 0;
    while filled < HEADER_SIZE {
        let n = file.read(&mut buf[filled..])?;
        if n == 0 {
            return Err(TapeError::Truncated { expected: HEADER_SIZE as u64, actual: filled as u64 });
        }
        filled += n;
    }
    TapeFileHeader::decode(&buf)
}
