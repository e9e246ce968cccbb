//! Fixtures shared by the benchmarks in `benches/`.

use std::collections::BTreeMap;

use tapelab::registry::venue;
use tapelab::sim::{IntradayShape, LatencyModel, SessionWindow, SimConfig, SymbolActivityProfile};
use tapelab::{Listing, Price, Timestamp};

/// One busy Nasdaq symbol trading at `rate` trades per second for `secs`.
pub fn busy_symbol(rate: f64, secs: u64) -> SimConfig {
    let mut p = SymbolActivityProfile::new("BUSY", Listing::Nasdaq, rate, Price(1_160_000), venue::NASD);
    p.intraday_shape = IntradayShape::constant(1.0);
    p.burst_mean_trades = 20.0;
    p.venue_weights = BTreeMap::from([
        (venue::NASD, 0.35),
        (venue::ARCA, 0.2),
        (venue::BATS, 0.15),
        (venue::EDGX, 0.15),
        (venue::NYSE, 0.1),
        (venue::CHX, 0.05),
    ]);
    SimConfig {
        scenario_name: "bench".into(),
        seed: 1,
        session_window: SessionWindow { start: Timestamp::from_secs(36_000), end: Timestamp::from_secs(36_000 + secs) },
        latency: LatencyModel::default(),
        symbols: vec![p],
    }
}
