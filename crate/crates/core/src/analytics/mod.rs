//! Measurements over consolidated and ground-truth tapes.
//!
//! Everything here is a pure function of its input records. Per-symbol
//! work is independent and may be run in parallel by the caller.

pub mod descriptive;
pub mod latency;
pub mod oos;
pub mod returns;
pub mod scatter;
pub mod trend;
pub mod windows;

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::types::{SymbolId, TapeRecord};

pub use descriptive::{cumulative, per_second_aggregate, Metric, SeriesGrouping, TimeSeries};
pub use latency::{latency_histogram, latency_stats, record_latency, GroupBy, LatencyStat};
pub use oos::{detect_out_of_sequence, oos_table, OosReport, OosRow};
pub use returns::{returns_compare, ReturnsReport};
pub use scatter::{cross_lock_scatter, spread_histogram, venue_spread_stats, ScatterRow, SpreadBin, VenueSpreadStat};
pub use trend::{fit_trend, spearman, TrendFit};
pub use windows::{latency_window_events, WindowKinds, WindowReport};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("input mixes symbols {} and {}", .first.0, .found.0)]
    MixedSymbols { first: SymbolId, found: SymbolId },
    #[error("record {index} is out of order for this analysis")]
    Unsorted { index: usize },
    #[error("record {index} is not a trade")]
    NotATrade { index: usize },
    #[error("symbol id {} is not in the directory", .0 .0)]
    UnknownSymbol(SymbolId),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("fit is undefined: all x values are equal")]
    DegenerateFit,
    #[error(transparent)]
    Nbbo(#[from] crate::nbbo::NbboError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_single_symbol(records: &[TapeRecord]) -> Result<(), AnalyticsError> {
    if let Some(first) = records.first() {
        if let Some(other) = records.iter().find(|r| r.symbol_id != first.symbol_id) {
            return Err(AnalyticsError::MixedSymbols { first: first.symbol_id, found: other.symbol_id });
        }
    }
    Ok(())
}

/// Records of each symbol, keeping their relative order.
pub fn split_by_symbol<'a, I>(records: I) -> BTreeMap<SymbolId, Vec<TapeRecord>>
where
    I: IntoIterator<Item = &'a TapeRecord>,
{
    let mut out: BTreeMap<SymbolId, Vec<TapeRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.symbol_id).or_default().push(*r);
    }
    out
}

/// Writes `rows` as CSV with a header taken from the field names.
pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
