//! How many other reports land while a message is in flight to the SIP.

use serde::Serialize;

use super::{check_single_symbol, AnalyticsError};
use crate::types::TapeRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKinds {
    Trades,
    Quotes,
    Both,
}

impl WindowKinds {
    pub fn admits(self, r: &TapeRecord) -> bool {
        match self {
            WindowKinds::Trades => r.is_trade(),
            WindowKinds::Quotes => r.is_quote(),
            WindowKinds::Both => true,
        }
    }
}

/// Power-of-two bin: `[lo, hi)`; the first bin holds exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CountBin {
    pub lo: u64,
    pub hi: u64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowReport {
    pub kinds: WindowKinds,
    pub messages: u64,
    /// Events in each message's window, in input order.
    #[serde(skip)]
    pub counts: Vec<u64>,
    pub histogram: Vec<CountBin>,
    pub median: u64,
    pub p90: u64,
    pub max: u64,
    /// Lower edge of the most populated histogram bin.
    pub modal_bin_lo: u64,
}

fn bin_of(count: u64) -> usize {
    if count == 0 {
        0
    } else {
        64 - count.leading_zeros() as usize
    }
}

pub fn count_histogram(counts: &[u64]) -> Vec<CountBin> {
    let top = counts.iter().map(|&c| bin_of(c)).max().map_or(0, |b| b + 1);
    let mut bins: Vec<CountBin> = (0..top)
        .map(|b| match b {
            0 => CountBin { lo: 0, hi: 1, count: 0 },
            _ => CountBin { lo: 1 << (b - 1), hi: 1 << b, count: 0 },
        })
        .collect();
    for &c in counts {
        bins[bin_of(c)].count += 1;
    }
    bins
}

/// For each message `m` of the requested kinds, the number of other such
/// records whose `sip_ts` lies in `[exchange_ts(m), sip_ts(m))`.
///
/// The input is one symbol's records sorted by `sip_ts`.
pub fn latency_window_events(records: &[TapeRecord], kinds: WindowKinds) -> Result<WindowReport, AnalyticsError> {
    check_single_symbol(records)?;
    if let Some(i) = records.windows(2).position(|w| w[1].sip_ts < w[0].sip_ts) {
        return Err(AnalyticsError::Unsorted { index: i + 1 });
    }
    let selected: Vec<&TapeRecord> = records.iter().filter(|r| kinds.admits(r)).collect();
    let arrivals: Vec<u64> = selected.iter().map(|r| r.sip_ts.0).collect();
    let counts: Vec<u64> = selected
        .iter()
        .map(|m| {
            // half-open, so a message never counts itself
            let lo = arrivals.partition_point(|&s| s < m.exchange_ts.0);
            let hi = arrivals.partition_point(|&s| s < m.sip_ts.0);
            hi.saturating_sub(lo) as u64
        })
        .collect();
    let histogram = count_histogram(&counts);
    let mut sorted = counts.clone();
    sorted.sort_unstable();
    let pick = |p: f64| sorted.get((p * (sorted.len().max(1) - 1) as f64) as usize).copied().unwrap_or(0);
    let modal_bin_lo = histogram.iter().max_by_key(|b| (b.count, std::cmp::Reverse(b.lo))).map_or(0, |b| b.lo);
    Ok(WindowReport {
        kinds,
        messages: counts.len() as u64,
        median: pick(0.5),
        p90: pick(0.9),
        max: sorted.last().copied().unwrap_or(0),
        modal_bin_lo,
        counts,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::venue;
    use crate::types::{MsgKind, Price, SymbolId, Timestamp};

    fn rec(kind: MsgKind, ex: u64, sip: u64) -> TapeRecord {
        TapeRecord {
            symbol_id: SymbolId(0),
            msg_kind: kind,
            exchange_id: venue::NASD,
            price: Price(1),
            size: 1,
            exchange_ts: Timestamp(ex),
            sip_ts: Timestamp(sip),
            sip_seq: 0,
        }
    }

    #[test]
    fn zero_latency_windows_are_empty() {
        let recs: Vec<_> = (0..10).map(|i| rec(MsgKind::Trade, i, i)).collect();
        let r = latency_window_events(&recs, WindowKinds::Both).unwrap();
        assert!(r.counts.iter().all(|&c| c == 0));
        assert_eq!(r.histogram, [CountBin { lo: 0, hi: 1, count: 10 }]);
    }

    #[test]
    fn hand_built_window() {
        // m is sent at 100 and reported at 900; two others report inside
        let recs = [rec(MsgKind::Trade, 150, 300), rec(MsgKind::BidQuote, 200, 899), rec(MsgKind::Trade, 100, 900)];
        let r = latency_window_events(&recs, WindowKinds::Both).unwrap();
        assert_eq!(r.counts[2], 2);
        let r = latency_window_events(&recs, WindowKinds::Trades).unwrap();
        assert_eq!(r.counts, [0, 1]);
    }

    #[test]
    fn window_excludes_report_instant() {
        let recs = [rec(MsgKind::Trade, 0, 50), rec(MsgKind::Trade, 40, 50)];
        let r = latency_window_events(&recs, WindowKinds::Both).unwrap();
        assert_eq!(r.counts, [0, 0]);
    }

    #[test]
    fn log_bins() {
        let h = count_histogram(&[0, 1, 2, 3, 4, 7, 8]);
        let v: Vec<_> = h.iter().map(|b| (b.lo, b.hi, b.count)).collect();
        assert_eq!(v, [(0, 1, 1), (1, 2, 1), (2, 4, 2), (4, 8, 2), (8, 16, 1)]);
    }

    #[test]
    fn unsorted_rejected() {
        let recs = [rec(MsgKind::Trade, 0, 50), rec(MsgKind::Trade, 0, 40)];
        assert!(matches!(latency_window_events(&recs, WindowKinds::Both), Err(AnalyticsError::Unsorted { index: 1 })));
    }
}
