//! Per-second activity series.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::AnalyticsError;
use crate::registry::SymbolDirectory;
use crate::types::{TapeRecord, Timestamp, TICKS_PER_DOLLAR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TradeCount,
    /// Shares traded.
    TradeVolume,
    /// Sum of price times size over trades, in dollars.
    DollarVolume,
    /// Every record, trades and quotes.
    MessageCount,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesGrouping {
    None,
    Exchange,
    Sip,
}

/// One value per second of the session for each group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    pub metric: Metric,
    pub first_second: u64,
    /// Group label ("all", a venue abbreviation, or a SIP letter) → values.
    pub groups: BTreeMap<String, Vec<f64>>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.groups.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total(&self, group: &str) -> f64 {
        self.groups.get(group).map_or(0.0, |v| v.iter().sum())
    }

    /// Running sums of every group.
    pub fn cumulative(&self) -> TimeSeries {
        TimeSeries {
            metric: self.metric,
            first_second: self.first_second,
            groups: self.groups.iter().map(|(k, v)| (k.clone(), cumulative(v))).collect(),
        }
    }

    /// `second,<group>...` with one row per second.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["second".to_string()];
        header.extend(self.groups.keys().cloned());
        w.write_record(&header)?;
        let cols: Vec<&Vec<f64>> = self.groups.values().collect();
        for i in 0..self.len() {
            let mut row = vec![(self.first_second + i as u64).to_string()];
            row.extend(cols.iter().map(|c| c[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn cumulative(series: &[f64]) -> Vec<f64> {
    series
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Buckets records by the second of their SIP report over `[start, end)`.
/// Reports past the window land in its last second so totals are conserved;
/// reports before it are skipped.
pub fn per_second_aggregate<'a, I>(
    records: I,
    metric: Metric,
    grouping: SeriesGrouping,
    directory: &SymbolDirectory,
    window: (Timestamp, Timestamp),
) -> Result<TimeSeries, AnalyticsError>
where
    I: IntoIterator<Item = &'a TapeRecord>,
{
    let first = window.0.second();
    let seconds = (window.1 .0.div_ceil(Timestamp::MICROS_PER_SECOND)).saturating_sub(first).max(1) as usize;
    // dollar volume accumulates exactly in ticks
    let mut groups: BTreeMap<String, Vec<i128>> = BTreeMap::new();
    if grouping == SeriesGrouping::None {
        groups.insert("all".into(), vec![0; seconds]);
    }
    for r in records {
        let value: i128 = match metric {
            Metric::MessageCount => 1,
            _ if !r.is_trade() => continue,
            Metric::TradeCount => 1,
            Metric::TradeVolume => r.size as i128,
            Metric::DollarVolume => r.price.ticks() as i128 * r.size as i128,
        };
        let Some(offset) = r.sip_ts.second().checked_sub(first) else { continue };
        let slot = (offset as usize).min(seconds - 1);
        let label = match grouping {
            SeriesGrouping::None => "all".to_string(),
            SeriesGrouping::Exchange => r.exchange_id.to_string(),
            SeriesGrouping::Sip => {
                directory.sip_of(r.symbol_id).ok_or(AnalyticsError::UnknownSymbol(r.symbol_id))?.to_string()
            }
        };
        groups.entry(label).or_insert_with(|| vec![0; seconds])[slot] += value;
    }
    let scale = if metric == Metric::DollarVolume { TICKS_PER_DOLLAR as f64 } else { 1.0 };
    let groups = groups.into_iter().map(|(k, v)| (k, v.into_iter().map(|x| x as f64 / scale).collect())).collect();
    Ok(TimeSeries { metric, first_second: first, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::venue;
    use crate::types::{Listing, MsgKind, Price, SymbolId};

    fn dir() -> SymbolDirectory {
        let mut d = SymbolDirectory::new();
        d.insert("AAPL", Listing::Nasdaq, false).unwrap();
        d
    }

    fn trade(price: &str, size: u32, sip_ts: u64) -> TapeRecord {
        TapeRecord {
            symbol_id: SymbolId(0),
            msg_kind: MsgKind::Trade,
            exchange_id: venue::NASD,
            price: Price::from_decimal(price).unwrap(),
            size,
            exchange_ts: Timestamp(sip_ts),
            sip_ts: Timestamp(sip_ts),
            sip_seq: 0,
        }
    }

    const SESSION: (Timestamp, Timestamp) = (Timestamp(0), Timestamp::SESSION_END);

    #[test]
    fn empty_tape_is_all_zero() {
        let s = per_second_aggregate(&[], Metric::TradeCount, SeriesGrouping::None, &dir(), SESSION).unwrap();
        assert_eq!(s.len(), 57_600);
        assert!(s.groups["all"].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dollar_volume_in_open_second() {
        let t0 = Timestamp::REGULAR_OPEN.0;
        let recs = [trade("116.00", 100, t0 + 10), trade("116.01", 200, t0 + 999_999)];
        let s = per_second_aggregate(&recs, Metric::DollarVolume, SeriesGrouping::None, &dir(), SESSION).unwrap();
        assert_eq!(s.groups["all"][19_800], 34_802.0);
        assert_eq!(s.total("all"), 34_802.0);
    }

    #[test]
    fn late_reports_kept_in_last_second() {
        let recs = [trade("1.00", 1, Timestamp::SESSION_END.0 + 300)];
        let s = per_second_aggregate(&recs, Metric::TradeCount, SeriesGrouping::Sip, &dir(), SESSION).unwrap();
        assert_eq!(s.groups["C"][57_599], 1.0);
    }

    #[test]
    fn cumulative_sums() {
        assert_eq!(cumulative(&[0.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
        assert_eq!(cumulative(&[1.0, 2.0, 3.0]), [1.0, 3.0, 6.0]);
    }

    #[test]
    fn csv_layout() {
        let recs = [trade("1.00", 1, 1_500_000)];
        let s = per_second_aggregate(
            &recs,
            Metric::TradeCount,
            SeriesGrouping::Exchange,
            &dir(),
            (Timestamp(0), Timestamp(3_000_000)),
        )
        .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "second,NASD\n0,0\n1,1\n2,0\n");
    }
}
