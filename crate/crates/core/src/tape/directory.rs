//! Symbol directory CSV: `ticker,symbol_id,listing_group,penny_flag`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::registry::{SymbolDirectory, SymbolInfo};
use crate::types::{Listing, SymbolId};

use super::interchange::ImportError;

#[derive(Debug, Serialize, Deserialize)]
struct DirectoryRow {
    ticker: String,
    symbol_id: u32,
    listing_group: Listing,
    penny_flag: bool,
}

pub fn write_directory(path: impl AsRef<Path>, directory: &SymbolDirectory) -> Result<(), ImportError> {
    let mut writer = csv::Writer::from_path(path)?;
    for sym in directory.iter() {
        writer.serialize(DirectoryRow {
            ticker: sym.ticker.clone(),
            symbol_id: sym.id.0,
            listing_group: sym.listing,
            penny_flag: sym.penny_flag,
        })?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_directory(path: impl AsRef<Path>) -> Result<SymbolDirectory, ImportError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut symbols = Vec::new();
    for row in reader.deserialize() {
        let row: DirectoryRow = row?;
        symbols.push(SymbolInfo {
            id: SymbolId(row.symbol_id),
            ticker: row.ticker,
            listing: row.listing_group,
            penny_flag: row.penny_flag,
        });
    }
    Ok(SymbolDirectory::from_symbols(symbols)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directory_round_trip() {
        let mut dir = SymbolDirectory::new();
        dir.insert("AAPL", Listing::Nasdaq, false).unwrap();
        dir.insert("ACU", Listing::NyseArcaMktBatsRegional, false).unwrap();
        dir.insert("OHGI", Listing::Nasdaq, true).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("symbols.csv");
        write_directory(&path, &dir).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("ticker,symbol_id,listing_group,penny_flag\n"));
        assert!(text.contains("ACU,1,NYSE_ARCA_MKT_BATS_REGIONAL,false"));
        assert_eq!(read_directory(&path).unwrap(), dir);
    }
}
