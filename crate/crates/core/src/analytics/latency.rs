//! SIP reporting latency per record and per group.

use std::collections::BTreeMap;

use serde::Serialize;

use super::AnalyticsError;
use crate::registry::SymbolDirectory;
use crate::types::{ExchangeId, SipId, TapeRecord};

/// `sip_ts - exchange_ts`; negative for captured data with clock skew.
pub fn record_latency(record: &TapeRecord) -> i64 {
    record.latency_us()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Sip,
    Exchange,
    SipExchange,
}

/// Box-plot summary of one group. Quantiles use the lower order statistic
/// at `floor(p * (n - 1))`; whiskers reach the most extreme observation
/// within 1.5 IQR of the quartiles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatencyStat {
    pub sip: Option<SipId>,
    pub exchange: Option<ExchangeId>,
    pub count: u64,
    pub median_us: i64,
    pub mean_us: f64,
    /// Population standard deviation.
    pub std_us: f64,
    pub min_us: i64,
    pub max_us: i64,
    pub q1_us: i64,
    pub q3_us: i64,
    pub whisker_lo: i64,
    pub whisker_hi: i64,
    pub outlier_count: u64,
}

fn lower_quantile(sorted: &[i64], p: f64) -> i64 {
    sorted[(p * (sorted.len() - 1) as f64).floor() as usize]
}

/// Summary of a non-empty sample; sorts `values` in place.
pub fn summarize(values: &mut [i64], sip: Option<SipId>, exchange: Option<ExchangeId>) -> Option<LatencyStat> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
    let q1 = lower_quantile(values, 0.25);
    let q3 = lower_quantile(values, 0.75);
    let iqr = (q3 - q1) as f64;
    let lo_fence = q1 as f64 - 1.5 * iqr;
    let hi_fence = q3 as f64 + 1.5 * iqr;
    let inside = |v: &&i64| (**v as f64) >= lo_fence && (**v as f64) <= hi_fence;
    let whisker_lo = *values.iter().find(inside).unwrap_or(&q1);
    let whisker_hi = *values.iter().rev().find(inside).unwrap_or(&q3);
    let outliers = values.iter().filter(|v| !inside(v)).count() as u64;
    Some(LatencyStat {
        sip,
        exchange,
        count: values.len() as u64,
        median_us: lower_quantile(values, 0.5),
        mean_us: mean,
        std_us: var.sqrt(),
        min_us: values[0],
        max_us: values[values.len() - 1],
        q1_us: q1,
        q3_us: q3,
        whisker_lo,
        whisker_hi,
        outlier_count: outliers,
    })
}

/// Latency summaries per group, ordered by (sip, exchange). Groups without
/// records are omitted; the directory supplies each symbol's SIP.
pub fn latency_stats<'a, I>(
    records: I,
    group_by: GroupBy,
    directory: &SymbolDirectory,
) -> Result<Vec<LatencyStat>, AnalyticsError>
where
    I: IntoIterator<Item = &'a TapeRecord>,
{
    let mut groups: BTreeMap<(Option<SipId>, Option<ExchangeId>), Vec<i64>> = BTreeMap::new();
    for r in records {
        let sip = directory.sip_of(r.symbol_id).ok_or(AnalyticsError::UnknownSymbol(r.symbol_id))?;
        let key = match group_by {
            GroupBy::Sip => (Some(sip), None),
            GroupBy::Exchange => (None, Some(r.exchange_id)),
            GroupBy::SipExchange => (Some(sip), Some(r.exchange_id)),
        };
        groups.entry(key).or_default().push(r.latency_us());
    }
    Ok(groups.into_iter().filter_map(|((sip, ex), mut v)| summarize(&mut v, sip, ex)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LatencyBin {
    pub lo_us: i64,
    pub hi_us: i64,
    pub count: u64,
}

/// Fixed-width histogram covering min..=max of `latencies`.
pub fn latency_histogram(latencies: &[i64], bin_us: i64) -> Vec<LatencyBin> {
    let bin_us = bin_us.max(1);
    let (Some(&min), Some(&max)) = (latencies.iter().min(), latencies.iter().max()) else {
        return Vec::new();
    };
    let first = min.div_euclid(bin_us);
    let last = max.div_euclid(bin_us);
    let mut bins: Vec<LatencyBin> =
        (first..=last).map(|b| LatencyBin { lo_us: b * bin_us, hi_us: (b + 1) * bin_us, count: 0 }).collect();
    for &l in latencies {
        bins[(l.div_euclid(bin_us) - first) as usize].count += 1;
    }
    bins
}
