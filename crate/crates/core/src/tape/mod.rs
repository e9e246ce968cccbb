//! Persistence: binary tapes, CSV interchange and the symbol directory file.

mod binary;
mod directory;
mod interchange;

use thiserror::Error;

use crate::types::SipId;

pub use binary::{
    check_tape_order, decode_record, encode_record, expected_file_size, read_header, read_tape, read_tape_bytes,
    validate_records, write_tape, write_tape_to, Tape, TapeFileHeader, ValidationIssue, ValidationReport,
    CAPTURE_MARKER, FORMAT_VERSION, HEADER_SIZE, MAGIC, RECORD_SIZE,
};
pub use directory::{read_directory, write_directory};
pub use interchange::{export_csv, export_csv_to, import_csv, import_csv_from, ImportError};

#[derive(Debug, Error)]
pub enum TapeError {
    #[error("bad magic {0:?}, not a tape file")]
    BadMagic([u8; 8]),
    #[error("unsupported tape format version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("truncated tape: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("tape size mismatch: expected {expected} bytes, found {actual}")]
    SizeMismatch { expected: u64, actual: u64 },
    #[error("corrupt record {index}: {reason}")]
    Corrupt { index: u64, reason: String },
    #[error("record {index}: sip_seq {found} does not follow {previous} on SIP {sip}")]
    Ordering { index: u64, sip: SipId, previous: u64, found: u64 },
    #[error("record {index}: symbol id {symbol_id} is not in the directory")]
    UnknownSymbol { index: u64, symbol_id: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
