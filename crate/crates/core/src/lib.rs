//! Consolidated-tape simulation and SIP accuracy analytics.
//!
//! The crate models the path a quote or trade takes from an exchange to one
//! of the three securities information processors, and measures what that
//! path does to the consolidated view of the market: latency, crossed and
//! locked NBBOs, and trades reported out of exchange-time order.

pub mod analytics;
pub mod nbbo;
pub mod registry;
pub mod sim;
pub mod tape;
pub mod types;

pub use registry::{ExchangeInfo, Registry, SymbolDirectory, SymbolInfo};
pub use types::{
    price_from_decimal, price_to_decimal, route_to_sip, ExchangeId, Listing, MsgKind, Price, SipId, SymbolId,
    TapeRecord, Timestamp,
};
