//! Human-readable CSV interchange.
//!
//! Columns: `ticker,kind,exchange_abbrev,price_decimal,size,exchange_ts_us,sip_ts_us`
//! with `kind` one of `T`, `B`, `A`. The format has no sequence column; on
//! import each SIP's records are numbered consecutively from 0 in row order.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::registry::{DirectoryError, Registry, SymbolDirectory};
use crate::types::{MsgKind, Price, TapeRecord, Timestamp};

pub const CSV_HEADER: [&str; 7] =
    ["ticker", "kind", "exchange_abbrev", "price_decimal", "size", "exchange_ts_us", "sip_ts_us"];

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("line {line}: unknown ticker {ticker:?}")]
    UnknownTicker { line: u64, ticker: String },
    #[error("line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("line {line}: timestamp {ts} is outside the session")]
    OutOfSession { line: u64, ts: u64 },
    #[error(transparent)]
    Directory(#[from] DirectoryError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn import_csv(path: impl AsRef<Path>, directory: &SymbolDirectory) -> Result<Vec<TapeRecord>, ImportError> {
    let file = std::fs::File::open(path)?;
    import_csv_from(std::io::BufReader::new(file), directory)
}

pub fn import_csv_from<R: Read>(input: R, directory: &SymbolDirectory) -> Result<Vec<TapeRecord>, ImportError> {
    let registry = Registry::global();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let mut next_seq = [0u64; 3];
    let mut records = Vec::new();
    let mut row = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut row) {
            Ok(true) => {}
            Ok(false) => break,
            Err(err) => {
                let line = err.position().map(|p| p.line()).unwrap_or(0);
                return Err(ImportError::Malformed { line, reason: err.to_string() });
            }
        }
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let malformed = |reason: String| ImportError::Malformed { line, reason };
        if row.len() != CSV_HEADER.len() {
            return Err(malformed(format!("expected {} columns, found {}", CSV_HEADER.len(), row.len())));
        }

        let ticker = &row[0];
        let symbol =
            directory.lookup(ticker).ok_or_else(|| ImportError::UnknownTicker { line, ticker: ticker.to_string() })?;
        let msg_kind = MsgKind::from_code(&row[1]).ok_or_else(|| malformed(format!("bad kind {:?}", &row[1])))?;
        let exchange_id =
            registry.by_code(&row[2]).ok_or_else(|| malformed(format!("unknown exchange {:?}", &row[2])))?;
        let price = Price::from_decimal(&row[3]).map_err(|e| malformed(e.to_string()))?;
        let size: u32 = row[4].parse().map_err(|_| malformed(format!("bad size {:?}", &row[4])))?;
        let stamp = |col: usize| -> Result<Timestamp, ImportError> {
            let ts: u64 = row[col].parse().map_err(|_| malformed(format!("bad timestamp {:?}", &row[col])))?;
            let ts = Timestamp(ts);
            if !ts.in_session() {
                return Err(ImportError::OutOfSession { line, ts: ts.0 });
            }
            Ok(ts)
        };
        let exchange_ts = stamp(5)?;
        let sip_ts = stamp(6)?;

        let seq = &mut next_seq[symbol.sip().index()];
        records.push(TapeRecord {
            symbol_id: symbol.id,
            msg_kind,
            exchange_id,
            price,
            size,
            exchange_ts,
            sip_ts,
            sip_seq: *seq,
        });
        *seq += 1;
    }
    Ok(records)
}

pub fn export_csv(
    path: impl AsRef<Path>,
    records: &[TapeRecord],
    directory: &SymbolDirectory,
) -> Result<(), ImportError> {
    let file = std::fs::File::create(path)?;
    export_csv_to(std::io::BufWriter::new(file), records, directory)
}

pub fn export_csv_to<W: Write>(out: W, records: &[TapeRecord], directory: &SymbolDirectory) -> Result<(), ImportError> {
    let registry = Registry::global();
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for rec in records {
        writer.write_record([
            directory.ticker(rec.symbol_id),
            &rec.msg_kind.code().to_string(),
            registry.abbreviation(rec.exchange_id),
            &rec.price.to_decimal(),
            &rec.size.to_string(),
            &rec.exchange_ts.0.to_string(),
            &rec.sip_ts.0.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
