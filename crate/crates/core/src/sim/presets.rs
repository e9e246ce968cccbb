//! Built-in scenarios.

use std::collections::BTreeMap;

use super::config::{IntradayShape, SessionWindow, SimConfig, SymbolActivityProfile};
use super::latency::LatencyModel;
use super::SimError;
use crate::registry::venue;
use crate::types::{ExchangeId, Listing, Price};

pub const PRESET_NAMES: [&str; 2] = ["typical_day", "stress_open"];

/// Open-burst multiplier of `stress_open` relative to `typical_day`.
pub const STRESS_OPEN_FACTOR: f64 = 10.0;
/// Latency median multiplier of `stress_open`.
pub const STRESS_LATENCY_FACTOR: f64 = 4.0;

/// One day of fourteen symbols whose expected trade counts span from a
/// single trade to roughly half a million.
const TYPICAL_DAY: [(&str, Listing, f64, &str, i64, i64); 14] = [
    // ticker, listing, expected trades, price, walk step, half spread (ticks)
    ("AAPL", Listing::Nasdaq, 482_578.0, "116.00", 100, 100),
    ("BAC", Listing::Nyse, 97_303.0, "16.50", 100, 100),
    ("XOM", Listing::Nyse, 86_834.0, "87.00", 100, 100),
    ("GOOG", Listing::Nasdaq, 69_085.0, "760.00", 100, 200),
    ("DNR", Listing::Nyse, 51_185.0, "3.50", 100, 100),
    ("IBM", Listing::Nyse, 29_960.0, "155.00", 100, 100),
    ("SHAK", Listing::Nyse, 16_349.0, "36.00", 100, 100),
    ("KLIC", Listing::Nasdaq, 3_304.0, "13.50", 100, 100),
    ("GBX", Listing::Nyse, 2_804.0, "28.00", 100, 100),
    ("WBMD", Listing::Nasdaq, 2_428.0, "50.00", 100, 100),
    ("EYES", Listing::Nasdaq, 1_653.0, "6.50", 100, 100),
    ("BRKA", Listing::Nyse, 304.0, "215000.00", 10_000, 50_000),
    ("OHGI", Listing::Nasdaq, 286.0, "0.85", 10, 50),
    ("ACU", Listing::NyseArcaMktBatsRegional, 1.0, "21.00", 100, 100),
];

const HEAVIEST: f64 = 482_578.0;
/// Mean sweep length of the heaviest symbol.
pub const MAX_BURST_MEAN: f64 = 40.0;

fn venue_weights() -> BTreeMap<ExchangeId, f64> {
    BTreeMap::from([
        (venue::NASD, 0.22),
        (venue::BATS, 0.11),
        (venue::BATY, 0.08),
        (venue::EDGA, 0.08),
        (venue::EDGX, 0.13),
        (venue::CHX, 0.01),
        (venue::NQBS, 0.05),
        (venue::NQPH, 0.03),
        (venue::NYSE, 0.09),
        (venue::ARCA, 0.17),
        (venue::AMEX, 0.03),
    ])
}

/// Mean sweep length for a symbol expected to print `trades` times: single
/// trades below ~300 a day, growing quadratically in log volume to
/// [`MAX_BURST_MEAN`] for the heaviest name.
pub fn burst_mean_for(trades: f64) -> f64 {
    let x = ((trades.max(1.0).log10() - 2.5) / (HEAVIEST.log10() - 2.5)).clamp(0.0, 1.0);
    1.0 + (MAX_BURST_MEAN - 1.0) * x * x
}

fn typical_day(seed: u64) -> SimConfig {
    let window = SessionWindow::default();
    let shape = IntradayShape::default();
    let symbols = TYPICAL_DAY
        .iter()
        .map(|&(ticker, listing, trades, price, step, half)| {
            let rate = trades / shape.integral(window.start, window.end);
            let mut p =
                SymbolActivityProfile::new(ticker, listing, rate, Price::from_decimal(price).unwrap(), venue::NASD);
            p.walk_step_ticks = step;
            p.half_spread_ticks = half;
            p.burst_mean_trades = burst_mean_for(trades);
            p.intraday_shape = shape;
            p.venue_weights = venue_weights();
            p
        })
        .collect();
    SimConfig {
        scenario_name: "typical_day".into(),
        seed,
        session_window: window,
        latency: LatencyModel::default(),
        symbols,
    }
}

pub fn scenario_preset(name: &str, seed: u64) -> Result<SimConfig, SimError> {
    match name {
        "typical_day" => Ok(typical_day(seed)),
        "stress_open" => {
            let mut c = typical_day(seed);
            c.scenario_name = "stress_open".into();
            for s in &mut c.symbols {
                s.intraday_shape.open_burst *= STRESS_OPEN_FACTOR;
            }
            c.latency.scale_medians(STRESS_LATENCY_FACTOR);
            Ok(c)
        }
        other => Err(SimError::UnknownPreset(other.to_string())),
    }
}

impl SimConfig {
    /// Expected trades per symbol over the configured window.
    pub fn expected_trades(&self) -> Vec<f64> {
        let SessionWindow { start, end } = self.session_window;
        self.symbols.iter().map(|s| s.expected_trades(start, end)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::is_penny;

    #[test]
    fn typical_day_spans_five_orders_of_magnitude() {
        let c = scenario_preset("typical_day", 1).unwrap();
        c.validate().unwrap();
        assert_eq!(c.symbols.len(), 14);
        let expected = c.expected_trades();
        let max = expected.iter().cloned().fold(0.0, f64::max);
        let min = expected.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min >= 1e5, "{max} / {min}");
        assert!((expected[0] - 482_578.0).abs() < 1e-6);
        assert_eq!(c.symbols.iter().filter(|s| is_penny(s.price0)).count(), 1);
    }

    #[test]
    fn stress_open_multipliers() {
        let t = scenario_preset("typical_day", 1).unwrap();
        let s = scenario_preset("stress_open", 1).unwrap();
        for (a, b) in t.symbols.iter().zip(&s.symbols) {
            assert_eq!(b.intraday_shape.open_burst, a.intraday_shape.open_burst * 10.0);
            assert_eq!(b.intraday_shape.midday, a.intraday_shape.midday);
        }
        let sip = crate::types::SipId::C;
        assert_eq!(s.latency.link(venue::NASD, sip).median_us, 4.0 * t.latency.link(venue::NASD, sip).median_us);
        assert_eq!(s.latency.link(venue::CHX, sip).median_us, 4.0 * t.latency.link(venue::CHX, sip).median_us);
    }

    #[test]
    fn unknown_preset() {
        assert_eq!(scenario_preset("weird", 1).unwrap_err(), SimError::UnknownPreset("weird".into()));
    }

    #[test]
    fn burst_means() {
        assert_eq!(burst_mean_for(1.0), 1.0);
        assert_eq!(burst_mean_for(300.0), 1.0);
        assert!((burst_mean_for(HEAVIEST) - MAX_BURST_MEAN).abs() < 1e-12);
        assert!(burst_mean_for(50_000.0) > burst_mean_for(5_000.0));
    }
}
