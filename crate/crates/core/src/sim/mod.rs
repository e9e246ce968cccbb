//! Deterministic market simulator: per-venue activity, link latency and SIP
//! consolidation.

pub mod config;
pub mod consolidate;
pub mod generate;
pub mod latency;
pub mod presets;
pub mod rng;

use thiserror::Error;

use crate::types::{ExchangeId, SymbolId, Timestamp};

pub use config::{IntradayShape, SessionWindow, SimConfig, SizeDistribution, SymbolActivityProfile};
pub use consolidate::{consolidate, simulate, Consolidated, SimOutput, SipTape};
pub use generate::generate_events;
pub use latency::{LatencyModel, LinkDist, LinkOverride, LinkSampler};
pub use presets::{scenario_preset, PRESET_NAMES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("`symbols` must list at least one symbol profile")]
    EmptySymbols,
    #[error("session window [{}, {}) is empty", .start.0, .end.0)]
    ZeroLengthSession { start: Timestamp, end: Timestamp },
    #[error("invalid `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("event {event} references unknown symbol id {}", .symbol.0)]
    UnknownSymbol { event: usize, symbol: SymbolId },
    #[error("event {event} references unknown exchange id {}", .exchange.0)]
    UnknownVenue { event: usize, exchange: ExchangeId },
    #[error("event {event} is earlier than its predecessor; input must be in exchange-time order")]
    NotTimeOrdered { event: usize },
}
