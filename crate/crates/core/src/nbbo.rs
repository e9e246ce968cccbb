//! Per-venue top of book and the consolidated best bid and offer.
//!
//! [`NbboEngine`] keeps the national best on each side incrementally and only
//! rescans venues when the venue that held the best price backs away.
//! [`compute_nbbo`] is the full scan over every venue.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::registry::Registry;
use crate::types::{ExchangeId, MsgKind, Price, SymbolId, TapeRecord, Timestamp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Quote {
    pub price: Price,
    pub size: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NbboError {
    #[error("record is a {0:?}, not a quote")]
    NotAQuote(MsgKind),
    #[error("exchange {0} does not publish quotes")]
    QuotesNotAllowed(ExchangeId),
    #[error("exchange id {} is not in the registry", .0 .0)]
    UnknownExchange(ExchangeId),
    #[error("tape mixes symbols {first:?} and {found:?}")]
    MixedSymbols { first: SymbolId, found: SymbolId },
}

/// Best bid and offer at every quoting venue for one symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopOfBookState {
    bids: Vec<Option<Quote>>,
    asks: Vec<Option<Quote>>,
    quotes_allowed: Vec<bool>,
}

impl TopOfBookState {
    pub fn new(registry: &Registry) -> Self {
        let n = registry.len();
        TopOfBookState {
            bids: vec![None; n],
            asks: vec![None; n],
            quotes_allowed: registry.iter().map(|e| e.quotes_allowed).collect(),
        }
    }

    pub fn bid(&self, venue: ExchangeId) -> Option<Quote> {
        self.bids.get(venue.index()).copied().flatten()
    }

    pub fn ask(&self, venue: ExchangeId) -> Option<Quote> {
        self.asks.get(venue.index()).copied().flatten()
    }

    pub fn venue_count(&self) -> usize {
        self.bids.len()
    }

    /// Replaces one side at one venue and returns the previous value.
    fn replace(&mut self, record: &TapeRecord) -> Result<(Option<Quote>, Option<Quote>), NbboError> {
        let venue = record.exchange_id;
        let allowed = *self.quotes_allowed.get(venue.index()).ok_or(NbboError::UnknownExchange(venue))?;
        let side = match record.msg_kind {
            MsgKind::BidQuote => &mut self.bids,
            MsgKind::AskQuote => &mut self.asks,
            MsgKind::Trade => return Err(NbboError::NotAQuote(MsgKind::Trade)),
        };
        if !allowed {
            return Err(NbboError::QuotesNotAllowed(venue));
        }
        let new = (record.size > 0).then_some(Quote { price: record.price, size: record.size });
        let old = std::mem::replace(&mut side[venue.index()], new);
        Ok((old, new))
    }
}

/// Applies one quote; a size of zero clears that side at the venue.
pub fn apply_quote(state: &mut TopOfBookState, record: &TapeRecord) -> Result<(), NbboError> {
    state.replace(record).map(|_| ())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BestQuote {
    pub price: Price,
    /// Sum of displayed size across every venue at `price`.
    pub size: u64,
    /// Lowest venue id among those at `price`.
    pub setter: ExchangeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MarketState {
    Normal,
    Locked,
    Crossed,
    OneSided,
    Empty,
}

impl MarketState {
    pub const ALL: [MarketState; 5] =
        [MarketState::Normal, MarketState::Locked, MarketState::Crossed, MarketState::OneSided, MarketState::Empty];

    pub fn as_str(self) -> &'static str {
        match self {
            MarketState::Normal => "normal",
            MarketState::Locked => "locked",
            MarketState::Crossed => "crossed",
            MarketState::OneSided => "one_sided",
            MarketState::Empty => "empty",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct NbboRecord {
    pub ts: Timestamp,
    pub best_bid: Option<BestQuote>,
    pub best_ask: Option<BestQuote>,
    /// Ask minus bid, present only when both sides are.
    pub spread: Option<Price>,
    pub state: MarketState,
}

impl NbboRecord {
    pub fn new(ts: Timestamp, best_bid: Option<BestQuote>, best_ask: Option<BestQuote>) -> Self {
        let (spread, state) = match (best_bid, best_ask) {
            (Some(b), Some(a)) => {
                let spread = a.price - b.price;
                let state = match spread.ticks() {
                    s if s < 0 => MarketState::Crossed,
                    0 => MarketState::Locked,
                    _ => MarketState::Normal,
                };
                (Some(spread), state)
            }
            (None, None) => (None, MarketState::Empty),
            _ => (None, MarketState::OneSided),
        };
        NbboRecord { ts, best_bid, best_ask, spread, state }
    }
}

fn scan_side(levels: &[Option<Quote>], better: fn(Price, Price) -> bool) -> Option<BestQuote> {
    let mut best: Option<BestQuote> = None;
    for (i, level) in levels.iter().enumerate() {
        let Some(q) = level else { continue };
        match &mut best {
            Some(b) if q.price == b.price => b.size += u64::from(q.size),
            Some(b) if !better(q.price, b.price) => {}
            _ => best = Some(BestQuote { price: q.price, size: u64::from(q.size), setter: ExchangeId(i as u8) }),
        }
    }
    best
}

fn bid_better(a: Price, b: Price) -> bool {
    a > b
}

fn ask_better(a: Price, b: Price) -> bool {
    a < b
}

/// Full recomputation of the NBBO over every venue.
pub fn compute_nbbo(state: &TopOfBookState, ts: Timestamp) -> NbboRecord {
    NbboRecord::new(ts, scan_side(&state.bids, bid_better), scan_side(&state.asks, ask_better))
}

/// Streaming NBBO maintained incrementally per quote.
#[derive(Clone, Debug)]
pub struct NbboEngine {
    book: TopOfBookState,
    best_bid: Option<BestQuote>,
    best_ask: Option<BestQuote>,
}

impl NbboEngine {
    pub fn new(registry: &Registry) -> Self {
        NbboEngine { book: TopOfBookState::new(registry), best_bid: None, best_ask: None }
    }

    pub fn book(&self) -> &TopOfBookState {
        &self.book
    }

    pub fn current(&self, ts: Timestamp) -> NbboRecord {
        NbboRecord::new(ts, self.best_bid, self.best_ask)
    }

    /// Applies a quote and returns the NBBO that results, stamped `ts`.
    pub fn apply(&mut self, record: &TapeRecord, ts: Timestamp) -> Result<NbboRecord, NbboError> {
        let (old, new) = self.book.replace(record)?;
        let venue = record.exchange_id;
        match record.msg_kind {
            MsgKind::BidQuote => update_best(&self.book.bids, &mut self.best_bid, venue, old, new, bid_better),
            _ => update_best(&self.book.asks, &mut self.best_ask, venue, old, new, ask_better),
        }
        Ok(self.current(ts))
    }
}

fn update_best(
    levels: &[Option<Quote>],
    best: &mut Option<BestQuote>,
    venue: ExchangeId,
    old: Option<Quote>,
    new: Option<Quote>,
    better: fn(Price, Price) -> bool,
) {
    let Some(b) = best else {
        // no venue was quoting this side, so `new` is the only level
        *best = new.map(|q| BestQuote { price: q.price, size: u64::from(q.size), setter: venue });
        return;
    };
    let old_at_best = old.is_some_and(|o| o.price == b.price);
    match new {
        Some(q) if better(q.price, b.price) => {
            *b = BestQuote { price: q.price, size: u64::from(q.size), setter: venue };
        }
        Some(q) if q.price == b.price => {
            if old_at_best {
                b.size = b.size - u64::from(old.unwrap().size) + u64::from(q.size);
            } else {
                b.size += u64::from(q.size);
            }
            b.setter = b.setter.min(venue);
        }
        _ if old_at_best => *best = scan_side(levels, better),
        _ => {}
    }
}

/// Order in which a tape is replayed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TapeOrdering {
    /// By `sip_ts`, ties by `sip_seq`.
    SipOrder,
    /// By `exchange_ts`, ties by `(exchange_id, sip_seq)`.
    ExchangeOrder,
}

impl TapeOrdering {
    pub fn key(self, rec: &TapeRecord) -> Timestamp {
        match self {
            TapeOrdering::SipOrder => rec.sip_ts,
            TapeOrdering::ExchangeOrder => rec.exchange_ts,
        }
    }
}

/// Indices of `tape` in replay order.
pub fn replay_order(tape: &[TapeRecord], ordering: TapeOrdering) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..tape.len()).collect();
    match ordering {
        TapeOrdering::SipOrder => idx.sort_by_key(|&i| (tape[i].sip_ts, tape[i].sip_seq)),
        TapeOrdering::ExchangeOrder => {
            idx.sort_by_key(|&i| (tape[i].exchange_ts, tape[i].exchange_id, tape[i].sip_seq))
        }
    }
    idx
}

pub fn check_single_symbol(tape: &[TapeRecord]) -> Result<(), NbboError> {
    if let Some(first) = tape.first() {
        if let Some(other) = tape.iter().find(|r| r.symbol_id != first.symbol_id) {
            return Err(NbboError::MixedSymbols { first: first.symbol_id, found: other.symbol_id });
        }
    }
    Ok(())
}

/// One NBBO per quote in `tape`, replayed in the chosen order. Trades are skipped.
pub fn stream_nbbo(
    tape: &[TapeRecord],
    ordering: TapeOrdering,
    registry: &Registry,
) -> Result<Vec<NbboRecord>, NbboError> {
    check_single_symbol(tape)?;
    let mut engine = NbboEngine::new(registry);
    let mut out = Vec::with_capacity(tape.len());
    for i in replay_order(tape, ordering) {
        let rec = &tape[i];
        if rec.is_quote() {
            out.push(engine.apply(rec, ordering.key(rec))?);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StateDurations {
    pub normal_us: u64,
    pub locked_us: u64,
    pub crossed_us: u64,
    pub one_sided_us: u64,
    pub empty_us: u64,
}

impl StateDurations {
    fn add(&mut self, state: MarketState, us: u64) {
        let slot = match state {
            MarketState::Normal => &mut self.normal_us,
            MarketState::Locked => &mut self.locked_us,
            MarketState::Crossed => &mut self.crossed_us,
            MarketState::OneSided => &mut self.one_sided_us,
            MarketState::Empty => &mut self.empty_us,
        };
        *slot += us;
    }

    pub fn get(&self, state: MarketState) -> u64 {
        match state {
            MarketState::Normal => self.normal_us,
            MarketState::Locked => self.locked_us,
            MarketState::Crossed => self.crossed_us,
            MarketState::OneSided => self.one_sided_us,
            MarketState::Empty => self.empty_us,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StateCounts {
    /// Entries into the crossed state; a run of crossed records counts once.
    pub crosses: u64,
    pub locks: u64,
    /// Number of records observed in each state.
    pub records: [u64; 5],
    pub time_in_state: StateDurations,
}

impl StateCounts {
    pub fn records_in(&self, state: MarketState) -> u64 {
        self.records[state.index()]
    }
}

/// Counts entries into crossed and locked states and time spent per state.
///
/// The first record counts as an entry into its state. Each record's
/// duration runs to the next record's timestamp; the last one has none.
pub fn count_states(nbbo: &[NbboRecord]) -> StateCounts {
    let mut counts = StateCounts::default();
    let mut prev: Option<MarketState> = None;
    for (i, rec) in nbbo.iter().enumerate() {
        if prev != Some(rec.state) {
            match rec.state {
                MarketState::Crossed => counts.crosses += 1,
                MarketState::Locked => counts.locks += 1,
                _ => {}
            }
        }
        counts.records[rec.state.index()] += 1;
        if let Some(next) = nbbo.get(i + 1) {
            counts.time_in_state.add(rec.state, next.ts.0.saturating_sub(rec.ts.0));
        }
        prev = Some(rec.state);
    }
    counts
}

/// Writes `ts_us,bid,bid_size,ask,ask_size,spread,state` rows.
pub fn write_nbbo_csv<W: Write>(out: W, nbbo: &[NbboRecord]) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["ts_us", "bid", "bid_size", "ask", "ask_size", "spread", "state"])?;
    let price = |q: Option<BestQuote>| q.map(|q| q.price.to_decimal()).unwrap_or_default();
    let size = |q: Option<BestQuote>| q.map(|q| q.size.to_string()).unwrap_or_default();
    for rec in nbbo {
        writer.write_record([
            rec.ts.0.to_string(),
            price(rec.best_bid),
            size(rec.best_bid),
            price(rec.best_ask),
            size(rec.best_ask),
            rec.spread.map(|s| s.to_decimal()).unwrap_or_default(),
            rec.state.as_str().to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::venue;

    fn quote(kind: MsgKind, venue: ExchangeId, price: &str, size: u32, ex: u64, sip: u64, seq: u64) -> TapeRecord {
        TapeRecord {
            symbol_id: SymbolId(0),
            msg_kind: kind,
            exchange_id: venue,
            price: Price::from_decimal(price).unwrap(),
            size,
            exchange_ts: Timestamp(ex),
            sip_ts: Timestamp(sip),
            sip_seq: seq,
        }
    }

    fn bid(venue: ExchangeId, price: &str, size: u32) -> TapeRecord {
        quote(MsgKind::BidQuote, venue, price, size, 0, 0, 0)
    }

    fn ask(venue: ExchangeId, price: &str, size: u32) -> TapeRecord {
        quote(MsgKind::AskQuote, venue, price, size, 0, 0, 0)
    }

    fn p(s: &str) -> Price {
        Price::from_decimal(s).unwrap()
    }

    #[test]
    fn apply_quote_replaces_side() {
        let reg = Registry::standard();
        let mut book = TopOfBookState::new(&reg);
        apply_quote(&mut book, &bid(venue::NASD, "116.00", 200)).unwrap();
        assert_eq!(book.bid(venue::NASD), Some(Quote { price: p("116.00"), size: 200 }));
        assert_eq!(book.ask(venue::NASD), None);
        apply_quote(&mut book, &bid(venue::NASD, "116.01", 100)).unwrap();
        assert_eq!(book.bid(venue::NASD), Some(Quote { price: p("116.01"), size: 100 }));
        apply_quote(&mut book, &bid(venue::NASD, "116.01", 0)).unwrap();
        assert_eq!(book.bid(venue::NASD), None);
    }

    #[test]
    fn trf_quotes_and_trades_rejected() {
        let reg = Registry::standard();
        let mut book = TopOfBookState::new(&reg);
        assert_eq!(
            apply_quote(&mut book, &bid(venue::NTRF, "1.00", 100)),
            Err(NbboError::QuotesNotAllowed(venue::NTRF))
        );
        let mut trade = bid(venue::NASD, "1.00", 100);
        trade.msg_kind = MsgKind::Trade;
        assert_eq!(apply_quote(&mut book, &trade), Err(NbboError::NotAQuote(MsgKind::Trade)));
        assert_eq!(
            apply_quote(&mut book, &bid(ExchangeId(40), "1.00", 100)),
            Err(NbboError::UnknownExchange(ExchangeId(40)))
        );
    }

    #[test]
    fn nbbo_normal_crossed_locked() {
        let reg = Registry::standard();
        let mut book = TopOfBookState::new(&reg);
        for r in [
            bid(venue::NASD, "116.00", 100),
            bid(venue::ARCA, "116.01", 100),
            ask(venue::NASD, "116.03", 100),
            ask(venue::ARCA, "116.02", 100),
        ] {
            apply_quote(&mut book, &r).unwrap();
        }
        let n = compute_nbbo(&book, Timestamp(5));
        assert_eq!(n.best_bid.unwrap().price, p("116.01"));
        assert_eq!(n.best_ask.unwrap().price, p("116.02"));
        assert_eq!(n.spread, Some(p("0.01")));
        assert_eq!(n.state, MarketState::Normal);

        let mut book = TopOfBookState::new(&reg);
        apply_quote(&mut book, &bid(venue::NASD, "116.02", 100)).unwrap();
        apply_quote(&mut book, &ask(venue::ARCA, "116.00", 100)).unwrap();
        let n = compute_nbbo(&book, Timestamp(0));
        assert_eq!(n.spread, Some(p("-0.02")));
        assert_eq!(n.state, MarketState::Crossed);

        let mut book = TopOfBookState::new(&reg);
        apply_quote(&mut book, &bid(venue::NASD, "50.00", 100)).unwrap();
        apply_quote(&mut book, &ask(venue::ARCA, "50.00", 100)).unwrap();
        let n = compute_nbbo(&book, Timestamp(0));
        assert_eq!(n.spread, Some(Price::ZERO));
        assert_eq!(n.state, MarketState::Locked);
    }

    #[test]
    fn aggregate_size_and_setter_tie_break() {
        let reg = Registry::standard();
        let mut book = TopOfBookState::new(&reg);
        apply_quote(&mut book, &bid(venue::ARCA, "10.00", 300)).unwrap();
        apply_quote(&mut book, &bid(venue::EDGX, "10.00", 200)).unwrap();
        apply_quote(&mut book, &bid(venue::NASD, "9.99", 900)).unwrap();
        let n = compute_nbbo(&book, Timestamp(0));
        let b = n.best_bid.unwrap();
        assert_eq!((b.price, b.size, b.setter), (p("10.00"), 500, venue::EDGX));
        assert_eq!(n.state, MarketState::OneSided);
        assert_eq!(compute_nbbo(&TopOfBookState::new(&reg), Timestamp(0)).state, MarketState::Empty);
    }

    #[test]
    fn engine_rescans_when_best_backs_away() {
        let reg = Registry::standard();
        let mut engine = NbboEngine::new(&reg);
        engine.apply(&bid(venue::NASD, "10.02", 100), Timestamp(0)).unwrap();
        engine.apply(&bid(venue::ARCA, "10.01", 100), Timestamp(0)).unwrap();
        let n = engine.apply(&bid(venue::NASD, "10.00", 100), Timestamp(0)).unwrap();
        assert_eq!(n.best_bid.unwrap().price, p("10.01"));
        assert_eq!(n.best_bid.unwrap().setter, venue::ARCA);
        let n = engine.apply(&bid(venue::ARCA, "0", 0), Timestamp(0)).unwrap();
        assert_eq!(n.best_bid.unwrap().price, p("10.00"));
        assert_eq!(n, compute_nbbo(engine.book(), Timestamp(0)));
    }

    #[test]
    fn empty_tape_streams_nothing() {
        let reg = Registry::standard();
        assert!(stream_nbbo(&[], TapeOrdering::SipOrder, &reg).unwrap().is_empty());
    }

    #[test]
    fn mixed_symbols_rejected() {
        let reg = Registry::standard();
        let mut other = bid(venue::NASD, "1.00", 1);
        other.symbol_id = SymbolId(3);
        let err = stream_nbbo(&[bid(venue::NASD, "1.00", 1), other], TapeOrdering::SipOrder, &reg).unwrap_err();
        assert_eq!(err, NbboError::MixedSymbols { first: SymbolId(0), found: SymbolId(3) });
    }

    /// Four quotes; ARCA's ask lift is delayed so the SIP applies NASD's bid
    /// lift first. Manual replay:
    ///   exchange order: bid N 10.00, ask A 10.02, ask A 10.05 (t=100), bid N 10.03 (t=110)
    ///     → normal, normal, normal (10.00/10.05), normal (10.03/10.05)
    ///   SIP order: ask A 10.05 arrives at 600, bid N 10.03 at 200
    ///     → normal, normal, crossed (10.03/10.02), normal (10.03/10.05)
    #[test]
    fn reordering_creates_a_cross() {
        let reg = Registry::standard();
        let tape = [
            quote(MsgKind::BidQuote, venue::NASD, "10.00", 100, 10, 20, 0),
            quote(MsgKind::AskQuote, venue::ARCA, "10.02", 100, 30, 40, 1),
            quote(MsgKind::AskQuote, venue::ARCA, "10.05", 100, 100, 600, 3),
            quote(MsgKind::BidQuote, venue::NASD, "10.03", 100, 110, 200, 2),
        ];
        let states = |o| stream_nbbo(&tape, o, &reg).unwrap().iter().map(|r| r.state).collect::<Vec<_>>();
        use MarketState::*;
        assert_eq!(states(TapeOrdering::ExchangeOrder), [OneSided, Normal, Normal, Normal]);
        assert_eq!(states(TapeOrdering::SipOrder), [OneSided, Normal, Crossed, Normal]);
    }

    #[test]
    fn constant_latency_orders_coincide() {
        let reg = Registry::standard();
        let tape: Vec<_> = (0..20u64)
            .map(|i| {
                let kind = if i % 2 == 0 { MsgKind::BidQuote } else { MsgKind::AskQuote };
                let px = format!("{}.{:02}", 10 + i / 4, (i * 7) % 100);
                let v = if i % 3 == 0 { venue::NASD } else { venue::ARCA };
                let mut q = quote(kind, v, &px, 100, i * 10, i * 10 + 450, i);
                if kind == MsgKind::AskQuote {
                    q.price = Price(q.price.0 + 10_000);
                }
                q
            })
            .collect();
        let sip = stream_nbbo(&tape, TapeOrdering::SipOrder, &reg).unwrap();
        let exch = stream_nbbo(&tape, TapeOrdering::ExchangeOrder, &reg).unwrap();
        let strip = |v: Vec<NbboRecord>| v.into_iter().map(|r| (r.best_bid, r.best_ask, r.state)).collect::<Vec<_>>();
        assert_eq!(strip(sip), strip(exch));
    }

    fn states(seq: &[MarketState]) -> Vec<NbboRecord> {
        seq.iter()
            .enumerate()
            .map(|(i, s)| NbboRecord {
                ts: Timestamp(i as u64 * 10),
                best_bid: None,
                best_ask: None,
                spread: None,
                state: *s,
            })
            .collect()
    }

    #[test]
    fn count_state_transitions() {
        use MarketState::*;
        let c = count_states(&states(&[Normal, Normal, Normal]));
        assert_eq!((c.crosses, c.locks), (0, 0));
        let c = count_states(&states(&[Normal, Crossed, Crossed, Normal, Crossed]));
        assert_eq!((c.crosses, c.locks), (2, 0));
        assert_eq!(c.time_in_state.crossed_us, 20);
        assert_eq!(c.time_in_state.normal_us, 20);
        assert_eq!(c.records_in(Crossed), 3);
        let c = count_states(&states(&[Normal, Locked, Normal, Locked, Normal]));
        assert_eq!((c.crosses, c.locks), (0, 2));
    }

    #[test]
    fn nbbo_csv_columns() {
        let reg = Registry::standard();
        let mut engine = NbboEngine::new(&reg);
        let a = engine.apply(&bid(venue::NASD, "116.00", 200), Timestamp(5)).unwrap();
        let b = engine.apply(&ask(venue::ARCA, "115.98", 100), Timestamp(9)).unwrap();
        let mut buf = Vec::new();
        write_nbbo_csv(&mut buf, &[a, b]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "ts_us,bid,bid_size,ask,ask_size,spread,state\n5,116.00,200,,,,one_sided\n9,116.00,200,115.98,100,-0.02,crossed\n"
        );
    }
}
