//! Ground-truth event generation.
//!
//! Trades arrive in sweeps: sweep start times follow an inhomogeneous
//! Poisson process (thinning against the intraday shape) and each sweep
//! carries a geometric number of trades fired microseconds apart. Every trade
//! is preceded by a binomial number of quote updates at its venue.
//!
//! A quote that would lock or cross another venue's opposite side first
//! pushes that side away (the other venue re-posts), so neither any single
//! venue nor the exchange-time NBBO is ever locked or crossed.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Exp1, Geometric};
use rayon::prelude::*;

use super::config::{SessionWindow, SimConfig, SizeDistribution, SymbolActivityProfile};
use super::rng::{stream, Purpose};
use super::SimError;
use crate::registry::Registry;
use crate::types::{ExchangeId, MsgKind, Price, SymbolId, TapeRecord, Timestamp};

/// All events of a scenario in exchange-time order. Each record carries
/// `sip_ts == exchange_ts` and its event id in `sip_seq`.
pub fn generate_events(config: &SimConfig) -> Result<Vec<TapeRecord>, SimError> {
    config.validate()?;
    let per_symbol: Vec<Vec<TapeRecord>> = config
        .symbols
        .par_iter()
        .enumerate()
        .map(|(i, profile)| generate_symbol(SymbolId(i as u32), profile, config.session_window, config.seed))
        .collect();
    let mut events: Vec<TapeRecord> = per_symbol.into_iter().flatten().collect();
    // per-symbol timestamps are strictly increasing, so the key is unique
    events.par_sort_unstable_by_key(|r| (r.exchange_ts, r.symbol_id));
    for (i, r) in events.iter_mut().enumerate() {
        r.sip_seq = i as u64;
    }
    Ok(events)
}

struct Clock {
    last: Option<u64>,
    anchor: Option<u64>,
    end: u64,
    gap_mean: f64,
}

impl Clock {
    /// The next message starts a sweep at `anchor` (or just after the previous one).
    fn begin(&mut self, anchor: u64) {
        self.anchor = Some(anchor);
    }

    /// Timestamp of the next message, `None` once the session is over.
    fn next(&mut self, rng: &mut ChaCha8Rng) -> Option<u64> {
        let t = match self.anchor.take() {
            Some(a) => self.last.map_or(a, |l| a.max(l + 1)),
            None => {
                let jitter: f64 = rng.sample(Exp1);
                self.last.map_or(0, |l| l + 1) + (jitter * self.gap_mean) as u64
            }
        };
        (t < self.end).then(|| {
            self.last = Some(t);
            t
        })
    }
}

#[derive(Clone, Copy, Default)]
struct VenueBook {
    bid: Option<i64>,
    ask: Option<i64>,
}

impl VenueBook {
    fn mid(&self) -> Option<i64> {
        Some((self.bid? + self.ask?).div_euclid(2))
    }
}

struct SymbolSim<'a> {
    id: SymbolId,
    profile: &'a SymbolActivityProfile,
    books: Vec<VenueBook>,
    quoting: Vec<ExchangeId>,
    out: Vec<TapeRecord>,
    mid: i64,
    lo: i64,
    hi: i64,
    dir: i64,
}

impl SymbolSim<'_> {
    fn push(&mut self, kind: MsgKind, venue: ExchangeId, price: i64, size: u32, ts: u64) {
        self.out.push(TapeRecord {
            symbol_id: self.id,
            msg_kind: kind,
            exchange_id: venue,
            price: Price(price),
            size,
            exchange_ts: Timestamp(ts),
            sip_ts: Timestamp(ts),
            sip_seq: 0,
        });
    }

    fn step_mid(&mut self) {
        let step = self.profile.walk_step_ticks;
        let mut next = self.mid + self.dir * step;
        if next > self.hi || next < self.lo {
            self.dir = -self.dir;
            next = self.mid + self.dir * step;
        }
        self.mid = next.clamp(self.lo, self.hi);
    }

    /// Posts a bid (or ask) at `venue`, first moving any opposite side at
    /// any venue that it would lock or cross. Returns messages emitted, or
    /// `None` when the session ends first.
    fn post(
        &mut self,
        venue: ExchangeId,
        bid_side: bool,
        price: i64,
        clock: &mut Clock,
        rng: &mut ChaCha8Rng,
        sizes: &mut Sizer,
    ) -> Option<u32> {
        let h = self.profile.half_spread_ticks;
        let mut emitted = 0;
        for i in 0..self.quoting.len() {
            let w = self.quoting[i];
            let book = self.books[w.index()];
            if bid_side {
                if book.ask.is_some_and(|a| a <= price) {
                    let new_ask = (self.mid + h).max(price + 1);
                    let ts = clock.next(rng)?;
                    self.books[w.index()].ask = Some(new_ask);
                    self.push(MsgKind::AskQuote, w, new_ask, sizes.draw(), ts);
                    emitted += 1;
                }
            } else if book.bid.is_some_and(|b| b >= price) {
                let new_bid = (self.mid - h).min(price - 1);
                let ts = clock.next(rng)?;
                if new_bid >= 1 {
                    self.books[w.index()].bid = Some(new_bid);
                    self.push(MsgKind::BidQuote, w, new_bid, sizes.draw(), ts);
                } else {
                    self.books[w.index()].bid = None;
                    self.push(MsgKind::BidQuote, w, 0, 0, ts);
                }
                emitted += 1;
            }
        }
        let ts = clock.next(rng)?;
        let slot = &mut self.books[venue.index()];
        if bid_side {
            if price >= 1 {
                slot.bid = Some(price);
                self.push(MsgKind::BidQuote, venue, price, sizes.draw(), ts);
            } else {
                slot.bid = None;
                self.push(MsgKind::BidQuote, venue, 0, 0, ts);
            }
        } else {
            slot.ask = Some(price);
            self.push(MsgKind::AskQuote, venue, price, sizes.draw(), ts);
        }
        Some(emitted + 1)
    }
}

struct Sizer {
    rng: ChaCha8Rng,
    lots: Geometric,
    lot: u32,
}

impl Sizer {
    fn new(dist: SizeDistribution, rng: ChaCha8Rng) -> Self {
        Sizer { rng, lots: Geometric::new(1.0 / dist.mean_lots).expect("validated mean_lots"), lot: dist.lot }
    }

    fn draw(&mut self) -> u32 {
        let extra = self.lots.sample(&mut self.rng).min(10_000) as u32;
        self.lot.saturating_mul(1 + extra)
    }
}

fn generate_symbol(id: SymbolId, p: &SymbolActivityProfile, window: SessionWindow, seed: u64) -> Vec<TapeRecord> {
    let owner = id.0 as u64;
    let mut arrivals = stream(seed, owner, Purpose::Arrivals);
    let mut venues_rng = stream(seed, owner, Purpose::Venues);
    let mut quotes_rng = stream(seed, owner, Purpose::Quotes);
    let mut prices_rng = stream(seed, owner, Purpose::Prices);
    let mut sizes = Sizer::new(p.size_distribution, stream(seed, owner, Purpose::Sizes));

    let registry = Registry::global();
    let (venue_list, weights): (Vec<ExchangeId>, Vec<f64>) = p.venue_weights.iter().map(|(v, w)| (*v, *w)).unzip();
    let venue_pick = WeightedIndex::new(&weights).expect("validated weights");
    let trf = registry.trf_for(p.listing);

    let quote_trials = (2.0 * p.quote_trade_ratio).ceil().max(1.0) as u64;
    let quote_count = Binomial::new(quote_trials, p.quote_trade_ratio / quote_trials as f64).expect("ratio > 0");
    let burst_len = Geometric::new(1.0 / p.burst_mean_trades).expect("validated burst mean");

    let price0 = p.price0.ticks();
    let step = p.walk_step_ticks;
    let range = (price0 / 20).max(20 * step);
    let lo = (price0 - range).max(1);
    let hi = price0 + range;

    let expected = p.expected_trades(window.start, window.end);
    let mut sim = SymbolSim {
        id,
        profile: p,
        books: vec![VenueBook::default(); registry.len()],
        quoting: venue_list.clone(),
        out: Vec::with_capacity((expected * (1.0 + p.quote_trade_ratio) * 1.05) as usize + 16),
        mid: price0,
        lo,
        hi,
        dir: 1,
    };
    let mut clock = Clock { last: None, anchor: None, end: window.end.0, gap_mean: p.burst_event_gap_us };

    let shape_max = p.intraday_shape.max();
    let anchor_rate_per_us = p.trade_rate_per_s * shape_max / p.burst_mean_trades / 1e6;
    if anchor_rate_per_us <= 0.0 {
        return Vec::new();
    }

    let mut t = window.start.0 as f64;
    'anchors: loop {
        let wait: f64 = arrivals.sample(Exp1);
        t += wait / anchor_rate_per_us;
        if t >= window.end.0 as f64 {
            break;
        }
        let anchor = t as u64;
        if arrivals.random::<f64>() * shape_max >= p.intraday_shape.at(Timestamp(anchor)) {
            continue;
        }
        let trades = 1 + burst_len.sample(&mut arrivals);
        sim.dir = if prices_rng.random::<bool>() { 1 } else { -1 };
        clock.begin(anchor);
        for _ in 0..trades {
            let venue = venue_list[venue_pick.sample(&mut venues_rng)];
            if prices_rng.random::<f64>() < p.move_probability {
                sim.step_mid();
            }
            let mut budget = quote_count.sample(&mut quotes_rng) as i64;
            while budget > 0 {
                let bid_side = quotes_rng.random::<bool>();
                let widen = if quotes_rng.random::<bool>() { step.max(1) } else { 0 };
                let price = if bid_side {
                    sim.mid - p.half_spread_ticks - widen
                } else {
                    sim.mid + p.half_spread_ticks + widen
                };
                match sim.post(venue, bid_side, price, &mut clock, &mut quotes_rng, &mut sizes) {
                    Some(n) => budget -= n as i64,
                    None => break 'anchors,
                }
            }
            let Some(ts) = clock.next(&mut quotes_rng) else { break 'anchors };
            let noise = prices_rng.random_range(-1..=1);
            let price = (sim.books[venue.index()].mid().unwrap_or(sim.mid) + noise).max(1);
            let reporter = if venues_rng.random::<f64>() < p.trf_fraction { trf } else { venue };
            let size = sizes.draw();
            sim.push(MsgKind::Trade, reporter, price, size, ts);
        }
    }
    sim.out
}
