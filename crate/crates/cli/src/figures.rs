//! Row types shared by `analyze` and `report`.

use std::collections::BTreeMap;

use anyhow::Result;
use serde::Serialize;
use tapelab::analytics::{latency_histogram, write_csv};
use tapelab::nbbo::{MarketState, NbboRecord};
use tapelab::{ExchangeId, Price, TapeRecord};

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    if rows.is_empty() {
        // serde-driven headers need a row; keep the file non-empty
        buf.push(b'\n');
    }
    Ok(buf)
}

/// One trade in SIP order with its offset from exchange time.
#[derive(Debug, Serialize)]
pub struct TradeDelayRow {
    pub sip_seq: u64,
    pub sip_ts_us: u64,
    pub exchange_ts_us: u64,
    pub exchange: ExchangeId,
    pub price: Price,
    pub sip_minus_exchange_us: i64,
    pub out_of_sequence: bool,
}

/// `trades` must already be in SIP order.
pub fn trade_delay_rows(trades: &[TapeRecord]) -> Vec<TradeDelayRow> {
    trades
        .iter()
        .enumerate()
        .map(|(i, r)| TradeDelayRow {
            sip_seq: r.sip_seq,
            sip_ts_us: r.sip_ts.0,
            exchange_ts_us: r.exchange_ts.0,
            exchange: r.exchange_id,
            price: r.price,
            sip_minus_exchange_us: r.latency_us(),
            out_of_sequence: i > 0 && r.exchange_ts < trades[i - 1].exchange_ts,
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ExchangeLatencyBin {
    pub exchange: ExchangeId,
    pub lo_us: i64,
    pub hi_us: i64,
    pub count: u64,
}

/// Latency histogram per exchange, dropping latencies above `max_us`.
pub fn latency_histogram_by_exchange<'a, I>(records: I, bin_us: i64, max_us: i64) -> Vec<ExchangeLatencyBin>
where
    I: IntoIterator<Item = &'a TapeRecord>,
{
    let mut by_ex: BTreeMap<ExchangeId, Vec<i64>> = BTreeMap::new();
    for r in records {
        let l = r.latency_us();
        if l <= max_us {
            by_ex.entry(r.exchange_id).or_default().push(l);
        }
    }
    by_ex
        .into_iter()
        .flat_map(|(exchange, lat)| {
            latency_histogram(&lat, bin_us).into_iter().map(move |b| ExchangeLatencyBin {
                exchange,
                lo_us: b.lo_us,
                hi_us: b.hi_us,
                count: b.count,
            })
        })
        .collect()
}

/// The NBBO as of the end of each second that saw a quote.
#[derive(Debug, Serialize)]
pub struct NbboSecondRow {
    pub second: u64,
    pub bid: Option<Price>,
    pub ask: Option<Price>,
    pub spread: Option<Price>,
    pub state: &'static str,
    pub updates: u64,
    pub crossed_updates: u64,
    pub locked_updates: u64,
}

pub fn nbbo_per_second(nbbo: &[NbboRecord]) -> Vec<NbboSecondRow> {
    let mut rows: Vec<NbboSecondRow> = Vec::new();
    for rec in nbbo {
        let second = rec.ts.0 / 1_000_000;
        if rows.last().is_none_or(|r| r.second != second) {
            rows.push(NbboSecondRow {
                second,
                bid: None,
                ask: None,
                spread: None,
                state: "",
                updates: 0,
                crossed_updates: 0,
                locked_updates: 0,
            });
        }
        let row = rows.last_mut().expect("pushed above");
        row.bid = rec.best_bid.map(|q| q.price);
        row.ask = rec.best_ask.map(|q| q.price);
        row.spread = rec.spread;
        row.state = rec.state.as_str();
        row.updates += 1;
        row.crossed_updates += u64::from(rec.state == MarketState::Crossed);
        row.locked_updates += u64::from(rec.state == MarketState::Locked);
    }
    rows
}

/// Last trade price in each second that saw a trade, by SIP time.
#[derive(Debug, Serialize)]
pub struct PriceSecondRow {
    pub second: u64,
    pub last_price: Price,
    pub trades: u64,
}

pub fn price_per_second(trades: &[TapeRecord]) -> Vec<PriceSecondRow> {
    let mut rows: Vec<PriceSecondRow> = Vec::new();
    for r in trades {
        let second = r.sip_ts.0 / 1_000_000;
        match rows.last_mut() {
            Some(row) if row.second == second => {
                row.last_price = r.price;
                row.trades += 1;
            }
            _ => rows.push(PriceSecondRow { second, last_price: r.price, trades: 1 }),
        }
    }
    rows
}
