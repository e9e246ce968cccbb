//! Trades reported out of exchange-time sequence.

use serde::Serialize;

use super::{check_single_symbol, AnalyticsError};
use crate::registry::{Registry, SymbolDirectory};
use crate::types::{Listing, SymbolId, TapeRecord};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OosReport {
    pub symbol_id: Option<SymbolId>,
    pub total_trades: u64,
    /// Negative first differences of exchange time in SIP order.
    pub oos_count: u64,
    /// `oos_count / total_trades`, a fraction in [0, 1].
    pub oos_percent: f64,
    /// Largest backwards step in exchange time, in microseconds.
    pub max_reversal_us: u64,
}

/// Scans single-symbol trades in SIP order `(sip_ts, sip_seq)`.
///
/// Equal exchange timestamps are in sequence; only strictly negative
/// differences count.
pub fn detect_out_of_sequence(trades: &[TapeRecord]) -> Result<OosReport, AnalyticsError> {
    check_single_symbol(trades)?;
    if let Some(index) = trades.iter().position(|r| !r.is_trade()) {
        return Err(AnalyticsError::NotATrade { index });
    }
    if let Some(i) = trades.windows(2).position(|w| (w[1].sip_ts, w[1].sip_seq) <= (w[0].sip_ts, w[0].sip_seq)) {
        return Err(AnalyticsError::Unsorted { index: i + 1 });
    }
    let mut oos = 0u64;
    let mut max_reversal = 0u64;
    for w in trades.windows(2) {
        if w[1].exchange_ts < w[0].exchange_ts {
            oos += 1;
            max_reversal = max_reversal.max(w[0].exchange_ts.0 - w[1].exchange_ts.0);
        }
    }
    let total = trades.len() as u64;
    Ok(OosReport {
        symbol_id: trades.first().map(|r| r.symbol_id),
        total_trades: total,
        oos_count: oos,
        oos_percent: if total == 0 { 0.0 } else { oos as f64 / total as f64 },
        max_reversal_us: max_reversal,
    })
}

/// One row of the per-symbol out-of-sequence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OosRow {
    pub ticker: String,
    pub oos_percent: f64,
    pub total_trades: u64,
    pub listing: Listing,
    pub oos_count: u64,
    pub max_reversal_us: u64,
    /// The same measures with TRF prints removed.
    pub ex_trf_oos_percent: f64,
    pub ex_trf_total_trades: u64,
}

/// Trades of `symbol` in SIP order, optionally without TRF prints.
pub fn symbol_trades(records: &[TapeRecord], symbol: SymbolId, ex_trf: bool) -> Vec<TapeRecord> {
    let registry = Registry::global();
    let mut trades: Vec<TapeRecord> = records
        .iter()
        .filter(|r| r.symbol_id == symbol && r.is_trade() && !(ex_trf && registry.is_trf(r.exchange_id)))
        .copied()
        .collect();
    trades.sort_by_key(|r| (r.sip_ts, r.sip_seq));
    trades
}

/// Table of every directory symbol, sorted by total trades descending and
/// then by ticker. `records` are consolidated records of any SIPs.
pub fn oos_table(records: &[TapeRecord], directory: &SymbolDirectory) -> Result<Vec<OosRow>, AnalyticsError> {
    let by_symbol = super::split_by_symbol(records.iter().filter(|r| r.is_trade()));
    let mut rows = Vec::with_capacity(directory.len());
    for info in directory.iter() {
        let trades = by_symbol.get(&info.id).map(Vec::as_slice).unwrap_or(&[]);
        let all = detect_out_of_sequence(&symbol_trades(trades, info.id, false))?;
        let ex = detect_out_of_sequence(&symbol_trades(trades, info.id, true))?;
        rows.push(OosRow {
            ticker: info.ticker.clone(),
            oos_percent: all.oos_percent,
            total_trades: all.total_trades,
            listing: info.listing,
            oos_count: all.oos_count,
            max_reversal_us: all.max_reversal_us,
            ex_trf_oos_percent: ex.oos_percent,
            ex_trf_total_trades: ex.total_trades,
        });
    }
    rows.sort_by(|a, b| b.total_trades.cmp(&a.total_trades).then_with(|| a.ticker.cmp(&b.ticker)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::venue;
    use crate::types::{MsgKind, Price, Timestamp};

    pub(crate) fn trades_from(exchange_ts: &[u64]) -> Vec<TapeRecord> {
        exchange_ts
            .iter()
            .enumerate()
            .map(|(i, &ex)| TapeRecord {
                symbol_id: SymbolId(0),
                msg_kind: MsgKind::Trade,
                exchange_id: venue::NASD,
                price: Price(100),
                size: 100,
                exchange_ts: Timestamp(ex),
                sip_ts: Timestamp(1000 + i as u64),
                sip_seq: i as u64,
            })
            .collect()
    }

    #[test]
    fn hand_first_differences() {
        let r = detect_out_of_sequence(&trades_from(&[1, 3, 2, 5, 4])).unwrap();
        assert_eq!((r.total_trades, r.oos_count), (5, 2));
        assert!((r.oos_percent - 0.4).abs() < 1e-12);
        assert_eq!(r.max_reversal_us, 1);
    }

    #[test]
    fn short_inputs() {
        let r = detect_out_of_sequence(&trades_from(&[7])).unwrap();
        assert_eq!((r.oos_count, r.oos_percent), (0, 0.0));
        let r = detect_out_of_sequence(&[]).unwrap();
        assert_eq!((r.total_trades, r.oos_percent, r.symbol_id), (0, 0.0, None));
    }

    #[test]
    fn ties_are_in_sequence() {
        let r = detect_out_of_sequence(&trades_from(&[5, 5, 5])).unwrap();
        assert_eq!(r.oos_count, 0);
    }

    #[test]
    fn rejects_unsorted_mixed_and_quotes() {
        let mut t = trades_from(&[1, 2, 3]);
        t.swap(0, 1);
        assert!(matches!(detect_out_of_sequence(&t), Err(AnalyticsError::Unsorted { index: 1 })));
        let mut t = trades_from(&[1, 2, 3]);
        t[2].symbol_id = SymbolId(4);
        assert!(matches!(detect_out_of_sequence(&t), Err(AnalyticsError::MixedSymbols { .. })));
        let mut t = trades_from(&[1, 2, 3]);
        t[1].msg_kind = MsgKind::BidQuote;
        assert!(matches!(detect_out_of_sequence(&t), Err(AnalyticsError::NotATrade { index: 1 })));
    }

    #[test]
    fn table_sorted_by_volume() {
        let mut dir = SymbolDirectory::new();
        dir.insert("LOW", Listing::Nasdaq, false).unwrap();
        dir.insert("HIGH", Listing::Nasdaq, false).unwrap();
        dir.insert("NONE", Listing::Nyse, false).unwrap();
        let mut recs = trades_from(&[1, 3, 2, 5, 4]);
        for r in recs.iter_mut().take(2) {
            r.symbol_id = SymbolId(0);
        }
        for r in recs.iter_mut().skip(2) {
            r.symbol_id = SymbolId(1);
        }
        recs[4].exchange_id = venue::QTRF;
        let rows = oos_table(&recs, &dir).unwrap();
        let names: Vec<_> = rows.iter().map(|r| r.ticker.as_str()).collect();
        assert_eq!(names, ["HIGH", "LOW", "NONE"]);
        // HIGH sees exchange times [2, 5, 4]; without the TRF print, [2, 5]
        assert_eq!((rows[0].total_trades, rows[0].oos_count), (3, 1));
        assert_eq!((rows[0].ex_trf_total_trades, rows[0].ex_trf_oos_percent), (2, 0.0));
        assert_eq!(rows[2].total_trades, 0);
    }
}
