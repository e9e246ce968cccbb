//! NBBO-derived views: crosses and locks per symbol, spread distributions,
//! and each venue's own spread.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_single_symbol, split_by_symbol, AnalyticsError};
use crate::nbbo::{count_states, stream_nbbo, MarketState, NbboRecord, TapeOrdering};
use crate::registry::{Registry, SymbolDirectory};
use crate::types::{ExchangeId, Price, SymbolId, TapeRecord};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScatterRow {
    pub ticker: String,
    pub symbol_id: SymbolId,
    /// Quote messages.
    pub message_count: u64,
    pub cross_count: u64,
    pub lock_count: u64,
    pub mean_trade_price: Option<f64>,
    pub penny_flag: bool,
}

/// One row per directory symbol from its SIP-order NBBO.
pub fn cross_lock_scatter(
    records: &[TapeRecord],
    directory: &SymbolDirectory,
    registry: &Registry,
) -> Result<Vec<ScatterRow>, AnalyticsError> {
    let by_symbol = split_by_symbol(records);
    directory
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|info| {
            let recs = by_symbol.get(&info.id).map(Vec::as_slice).unwrap_or(&[]);
            let nbbo = stream_nbbo(recs, TapeOrdering::SipOrder, registry)?;
            let counts = count_states(&nbbo);
            let (sum, n) =
                recs.iter().filter(|r| r.is_trade()).fold((0.0, 0u64), |(s, n), r| (s + r.price.as_dollars(), n + 1));
            Ok(ScatterRow {
                ticker: info.ticker.clone(),
                symbol_id: info.id,
                message_count: recs.iter().filter(|r| r.is_quote()).count() as u64,
                cross_count: counts.crosses,
                lock_count: counts.locks,
                mean_trade_price: (n > 0).then(|| sum / n as f64),
                penny_flag: info.penny_flag,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadBin {
    pub lo: Price,
    pub hi: Price,
    pub count: u64,
}

/// Histogram of two-sided NBBO spreads with bins `[k*w, (k+1)*w)`.
pub fn spread_histogram(nbbo: &[NbboRecord], bin_width: Price) -> Vec<SpreadBin> {
    let w = bin_width.ticks().max(1);
    let spreads: Vec<i64> = nbbo.iter().filter_map(|r| r.spread).map(|s| s.ticks().div_euclid(w)).collect();
    let (Some(&lo), Some(&hi)) = (spreads.iter().min(), spreads.iter().max()) else {
        return Vec::new();
    };
    let mut bins: Vec<SpreadBin> =
        (lo..=hi).map(|k| SpreadBin { lo: Price(k * w), hi: Price((k + 1) * w), count: 0 }).collect();
    for k in spreads {
        bins[(k - lo) as usize].count += 1;
    }
    bins
}

/// Spread seen on one venue's own book while replaying only its quotes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VenueSpreadStat {
    pub exchange: ExchangeId,
    pub quotes: u64,
    pub two_sided: u64,
    pub min_spread: Option<Price>,
    pub median_spread: Option<Price>,
    pub max_spread: Option<Price>,
    pub crosses: u64,
    pub locks: u64,
}

/// Replays each quoting venue's own book for one symbol.
pub fn venue_spread_stats(
    records: &[TapeRecord],
    ordering: TapeOrdering,
    registry: &Registry,
) -> Result<Vec<VenueSpreadStat>, AnalyticsError> {
    check_single_symbol(records)?;
    let mut out = Vec::new();
    for info in registry.iter().filter(|e| e.quotes_allowed) {
        let own: Vec<TapeRecord> =
            records.iter().filter(|r| r.exchange_id == info.id && r.is_quote()).copied().collect();
        if own.is_empty() {
            continue;
        }
        let nbbo = stream_nbbo(&own, ordering, registry)?;
        let mut spreads: Vec<Price> = nbbo.iter().filter_map(|r| r.spread).collect();
        spreads.sort_unstable();
        let counts = count_states(&nbbo);
        out.push(VenueSpreadStat {
            exchange: info.id,
            quotes: own.len() as u64,
            two_sided: spreads.len() as u64,
            min_spread: spreads.first().copied(),
            median_spread: (!spreads.is_empty()).then(|| spreads[(spreads.len() - 1) / 2]),
            max_spread: spreads.last().copied(),
            crosses: counts.records_in(MarketState::Crossed),
            locks: counts.records_in(MarketState::Locked),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::venue;
    use crate::types::{Listing, MsgKind, Timestamp};

    fn q(kind: MsgKind, v: ExchangeId, price: &str, ex: u64, sip: u64, seq: u64) -> TapeRecord {
        TapeRecord {
            symbol_id: SymbolId(0),
            msg_kind: kind,
            exchange_id: v,
            price: Price::from_decimal(price).unwrap(),
            size: 100,
            exchange_ts: Timestamp(ex),
            sip_ts: Timestamp(sip),
            sip_seq: seq,
        }
    }

    /// Six quotes; NASD's bid lift overtakes ARCA's ask lift at the SIP.
    /// SIP replay: 10.00/-, then 10.00/10.02 three times, 10.04/10.02
    /// (crossed), 10.04/10.05. In exchange order the bid lift lands after
    /// ARCA's ask moves to 10.06, so the market never crosses.
    fn six_quote_tape() -> Vec<TapeRecord> {
        vec![
            q(MsgKind::BidQuote, venue::NASD, "10.00", 0, 10, 0),
            q(MsgKind::AskQuote, venue::ARCA, "10.02", 5, 20, 1),
            q(MsgKind::AskQuote, venue::NASD, "10.05", 30, 40, 2),
            q(MsgKind::BidQuote, venue::ARCA, "9.99", 35, 50, 3),
            q(MsgKind::AskQuote, venue::ARCA, "10.06", 60, 900, 5),
            q(MsgKind::BidQuote, venue::NASD, "10.04", 70, 100, 4),
        ]
    }

    #[test]
    fn engineered_single_cross() {
        let mut dir = SymbolDirectory::new();
        dir.insert("XYZ", Listing::Nasdaq, false).unwrap();
        dir.insert("NOQ", Listing::Nyse, true).unwrap();
        let rows = cross_lock_scatter(&six_quote_tape(), &dir, &Registry::standard()).unwrap();
        assert_eq!((rows[0].message_count, rows[0].cross_count, rows[0].lock_count), (6, 1, 0));
        assert_eq!(rows[0].mean_trade_price, None);
        assert_eq!((rows[1].message_count, rows[1].cross_count, rows[1].penny_flag), (0, 0, true));
    }

    #[test]
    fn venues_never_cross_their_own_book() {
        let stats = venue_spread_stats(&six_quote_tape(), TapeOrdering::SipOrder, &Registry::standard()).unwrap();
        assert_eq!(stats.len(), 2);
        assert!(stats.iter().all(|s| s.crosses == 0 && s.locks == 0));
        let nasd = stats.iter().find(|s| s.exchange == venue::NASD).unwrap();
        assert_eq!(nasd.min_spread, Some(Price::from_decimal("0.01").unwrap()));
        let exch = stream_nbbo(&six_quote_tape(), TapeOrdering::ExchangeOrder, &Registry::standard()).unwrap();
        assert_eq!(count_states(&exch).crosses, 0);
    }

    #[test]
    fn spread_bins() {
        let reg = Registry::standard();
        let nbbo = stream_nbbo(&six_quote_tape(), TapeOrdering::SipOrder, &reg).unwrap();
        let bins = spread_histogram(&nbbo, Price::from_decimal("0.01").unwrap());
        let v: Vec<_> = bins.iter().map(|b| (b.lo.to_decimal(), b.count)).collect();
        assert_eq!(
            v,
            [("-0.02".to_string(), 1), ("-0.01".into(), 0), ("0.00".into(), 0), ("0.01".into(), 1), ("0.02".into(), 3)]
        );
    }
}
