//! Scenario description: symbols, their activity profiles, and latency.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::latency::LatencyModel;
use super::SimError;
use crate::registry::{is_penny, Registry, SymbolDirectory};
use crate::types::{ExchangeId, Listing, Price, Timestamp};

/// Intensity multiplier for each part of the session.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntradayShape {
    pub pre_market: f64,
    pub open_burst: f64,
    pub midday: f64,
    pub close_burst: f64,
    pub after_hours: f64,
}

impl IntradayShape {
    pub const OPEN_BURST_START_S: u64 = 19_800;
    pub const MIDDAY_START_S: u64 = 21_600;
    pub const CLOSE_BURST_START_S: u64 = 41_400;
    pub const AFTER_HOURS_START_S: u64 = 43_200;

    pub const fn constant(level: f64) -> Self {
        IntradayShape { pre_market: level, open_burst: level, midday: level, close_burst: level, after_hours: level }
    }

    pub fn at(&self, ts: Timestamp) -> f64 {
        match ts.second() {
            s if s < Self::OPEN_BURST_START_S => self.pre_market,
            s if s < Self::MIDDAY_START_S => self.open_burst,
            s if s < Self::CLOSE_BURST_START_S => self.midday,
            s if s < Self::AFTER_HOURS_START_S => self.close_burst,
            _ => self.after_hours,
        }
    }

    pub fn max(&self) -> f64 {
        self.values().into_iter().fold(0.0, f64::max)
    }

    fn values(&self) -> [f64; 5] {
        [self.pre_market, self.open_burst, self.midday, self.close_burst, self.after_hours]
    }

    /// Integral of the multiplier over `[start, end)`, in seconds.
    pub fn integral(&self, start: Timestamp, end: Timestamp) -> f64 {
        let bounds = [
            0,
            Self::OPEN_BURST_START_S,
            Self::MIDDAY_START_S,
            Self::CLOSE_BURST_START_S,
            Self::AFTER_HOURS_START_S,
            u64::MAX / 1_000_000,
        ];
        let values = self.values();
        let mut total = 0.0;
        for i in 0..5 {
            let lo = (bounds[i] * 1_000_000).max(start.0);
            let hi = (bounds[i + 1] * 1_000_000).min(end.0);
            if hi > lo {
                total += values[i] * (hi - lo) as f64 / 1e6;
            }
        }
        total
    }
}

impl Default for IntradayShape {
    fn default() -> Self {
        IntradayShape { pre_market: 0.03, open_burst: 4.0, midday: 1.0, close_burst: 4.0, after_hours: 0.05 }
    }
}

/// Share count per message: `lot * (1 + Geometric)` lots with mean `mean_lots`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeDistribution {
    pub lot: u32,
    pub mean_lots: f64,
}

impl Default for SizeDistribution {
    fn default() -> Self {
        SizeDistribution { lot: 100, mean_lots: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolActivityProfile {
    pub ticker: String,
    pub listing: Listing,
    /// Base trade intensity, scaled by `intraday_shape`.
    pub trade_rate_per_s: f64,
    pub price0: Price,
    pub walk_step_ticks: i64,
    pub half_spread_ticks: i64,
    #[serde(default = "default_quote_trade_ratio")]
    pub quote_trade_ratio: f64,
    /// Fraction of trades printed through the listing's TRF instead of the venue.
    #[serde(default = "default_trf_fraction")]
    pub trf_fraction: f64,
    /// Mean number of trades per arrival; trades come in sweeps of
    /// geometrically distributed length rather than one at a time.
    #[serde(default = "one")]
    pub burst_mean_trades: f64,
    /// Mean of the exponential part of the gap between messages in a burst.
    #[serde(default = "default_gap")]
    pub burst_event_gap_us: f64,
    /// Chance that a trade moves the midpoint one step in the sweep's direction.
    #[serde(default = "default_move_probability")]
    pub move_probability: f64,
    #[serde(default)]
    pub size_distribution: SizeDistribution,
    #[serde(default)]
    pub intraday_shape: IntradayShape,
    pub venue_weights: BTreeMap<ExchangeId, f64>,
}

fn default_quote_trade_ratio() -> f64 {
    10.0
}

fn default_trf_fraction() -> f64 {
    0.15
}

fn one() -> f64 {
    1.0
}

fn default_gap() -> f64 {
    0.5
}

fn default_move_probability() -> f64 {
    0.5
}

impl SymbolActivityProfile {
    /// Profile with default knobs and every weight on one venue.
    pub fn new(ticker: &str, listing: Listing, trade_rate_per_s: f64, price0: Price, venue: ExchangeId) -> Self {
        SymbolActivityProfile {
            ticker: ticker.to_string(),
            listing,
            trade_rate_per_s,
            price0,
            walk_step_ticks: 100,
            half_spread_ticks: 100,
            quote_trade_ratio: default_quote_trade_ratio(),
            trf_fraction: default_trf_fraction(),
            burst_mean_trades: 1.0,
            burst_event_gap_us: default_gap(),
            move_probability: default_move_probability(),
            size_distribution: SizeDistribution::default(),
            intraday_shape: IntradayShape::default(),
            venue_weights: BTreeMap::from([(venue, 1.0)]),
        }
    }

    /// Expected trade count over `[start, end)`.
    pub fn expected_trades(&self, start: Timestamp, end: Timestamp) -> f64 {
        self.trade_rate_per_s * self.intraday_shape.integral(start, end)
    }

    fn validate(&self, index: usize) -> Result<(), SimError> {
        let field = |name: &str| format!("symbols[{index}].{name}");
        let bad = |name: &str, reason: &str| Err(SimError::InvalidConfig { field: field(name), reason: reason.into() });
        let registry = Registry::global();
        if self.ticker.trim().is_empty() {
            return bad("ticker", "must not be empty");
        }
        if !(self.trade_rate_per_s.is_finite() && self.trade_rate_per_s >= 0.0) {
            return bad("trade_rate_per_s", "must be finite and >= 0");
        }
        if !(self.quote_trade_ratio.is_finite() && self.quote_trade_ratio > 0.0) {
            return bad("quote_trade_ratio", "must be > 0");
        }
        if !(0.0..=1.0).contains(&self.trf_fraction) {
            return bad("trf_fraction", "must be in [0, 1]");
        }
        if !(self.burst_mean_trades.is_finite() && self.burst_mean_trades >= 1.0) {
            return bad("burst_mean_trades", "must be >= 1");
        }
        if !(self.burst_event_gap_us.is_finite() && self.burst_event_gap_us >= 0.0) {
            return bad("burst_event_gap_us", "must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.move_probability) {
            return bad("move_probability", "must be in [0, 1]");
        }
        if self.price0.ticks() < 1 {
            return bad("price0", "must be at least one tick");
        }
        if self.walk_step_ticks < 0 || self.half_spread_ticks < 1 {
            return bad("walk_step_ticks", "step must be >= 0 and half spread >= 1 tick");
        }
        let sd = self.size_distribution;
        if sd.lot == 0 || !(sd.mean_lots.is_finite() && sd.mean_lots >= 1.0) {
            return bad("size_distribution", "lot must be > 0 and mean_lots >= 1");
        }
        let shape = self.intraday_shape.values();
        if shape.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("intraday_shape", "multipliers must be finite and >= 0");
        }
        if self.venue_weights.is_empty() {
            return bad("venue_weights", "must name at least one venue");
        }
        for (venue, w) in &self.venue_weights {
            if !registry.quotes_allowed(*venue) {
                return bad("venue_weights", &format!("{venue} does not quote and cannot host trades"));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return bad("venue_weights", "weights must be finite and >= 0");
            }
        }
        let sum: f64 = self.venue_weights.values().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return bad("venue_weights", &format!("weights sum to {sum}, not 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionWindow {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Default for SessionWindow {
    fn default() -> Self {
        SessionWindow { start: Timestamp(0), end: Timestamp::SESSION_END }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scenario_name: String,
    pub seed: u64,
    #[serde(default)]
    pub session_window: SessionWindow,
    #[serde(default)]
    pub latency: LatencyModel,
    pub symbols: Vec<SymbolActivityProfile>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.symbols.is_empty() {
            return Err(SimError::EmptySymbols);
        }
        let SessionWindow { start, end } = self.session_window;
        if end <= start {
            return Err(SimError::ZeroLengthSession { start, end });
        }
        if end > Timestamp::SESSION_END {
            return Err(SimError::InvalidConfig {
                field: "session_window.end".into(),
                reason: format!("must not exceed {}", Timestamp::SESSION_END.0),
            });
        }
        self.latency.validate().map_err(|reason| SimError::InvalidConfig { field: "latency".into(), reason })?;
        for (i, s) in self.symbols.iter().enumerate() {
            s.validate(i)?;
        }
        self.directory()?;
        Ok(())
    }

    /// Symbol ids follow the order of `symbols`.
    pub fn directory(&self) -> Result<SymbolDirectory, SimError> {
        let mut dir = SymbolDirectory::new();
        for (i, s) in self.symbols.iter().enumerate() {
            dir.insert(&s.ticker, s.listing, is_penny(s.price0)).map_err(|e| SimError::InvalidConfig {
                field: format!("symbols[{i}].ticker"),
                reason: e.to_string(),
            })?;
        }
        Ok(dir)
    }

    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let config: SimConfig = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the canonical JSON form; stored in every tape header.
    pub fn scenario_hash(&self) -> [u8; 32] {
        let canonical = serde_json::to_vec(self).expect("config serializes to JSON");
        Sha256::digest(&canonical).into()
    }
}
