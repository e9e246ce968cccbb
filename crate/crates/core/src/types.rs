//! Core value types: prices, timestamps, identifiers and the tape record.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of price ticks per dollar.
pub const TICKS_PER_DOLLAR: i64 = 10_000;

/// Price in ten-thousandths of a dollar.
///
/// `Price(1_160_000)` is $116.00. Signed so that spreads (ask − bid) can be
/// represented with the same type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Price(pub i64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PriceParseError {
    #[error("malformed price {0:?}")]
    Malformed(String),
    #[error("price {0:?} has more than 4 fractional digits")]
    TooPrecise(String),
    #[error("price {0:?} is out of range")]
    Overflow(String),
}

impl Price {
    pub const ZERO: Price = Price(0);
    /// One tick, $0.0001.
    pub const TICK: Price = Price(1);

    pub const fn from_ticks(ticks: i64) -> Self {
        Price(ticks)
    }

    pub const fn ticks(self) -> i64 {
        self.0
    }

    pub fn as_dollars(self) -> f64 {
        self.0 as f64 / TICKS_PER_DOLLAR as f64
    }

    /// Parses a decimal dollar amount with at most four fractional digits.
    pub fn from_decimal(text: &str) -> Result<Self, PriceParseError> {
        let malformed = || PriceParseError::Malformed(text.to_string());
        let overflow = || PriceParseError::Overflow(text.to_string());

        let trimmed = text.trim();
        let (negative, body) = match trimmed.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, trimmed.strip_prefix('+').unwrap_or(trimmed)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(malformed());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        if frac_part.len() > 4 {
            return Err(PriceParseError::TooPrecise(text.to_string()));
        }

        let mut ticks: i64 = 0;
        for b in int_part.bytes() {
            ticks = ticks.checked_mul(10).and_then(|t| t.checked_add(i64::from(b - b'0'))).ok_or_else(overflow)?;
        }
        ticks = ticks.checked_mul(TICKS_PER_DOLLAR).ok_or_else(overflow)?;
        let mut frac: i64 = 0;
        for b in frac_part.bytes() {
            frac = frac * 10 + i64::from(b - b'0');
        }
        for _ in frac_part.len()..4 {
            frac *= 10;
        }
        ticks = ticks.checked_add(frac).ok_or_else(overflow)?;
        Ok(Price(if negative { -ticks } else { ticks }))
    }

    /// Canonical decimal rendering: at least two fractional digits, trailing
    /// zeros beyond the cents trimmed (`116.00`, `116.015`, `0.0001`).
    pub fn to_decimal(self) -> String {
        let abs = self.0.unsigned_abs();
        let whole = abs / TICKS_PER_DOLLAR as u64;
        let frac = abs % TICKS_PER_DOLLAR as u64;
        let mut digits = format!("{frac:04}");
        while digits.len() > 2 && digits.ends_with('0') {
            digits.pop();
        }
        let sign = if self.0 < 0 { "-" } else { "" };
        format!("{sign}{whole}.{digits}")
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl FromStr for Price {
    type Err = PriceParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Price::from_decimal(s)
    }
}

impl std::ops::Sub for Price {
    type Output = Price;
    fn sub(self, rhs: Price) -> Price {
        Price(self.0 - rhs.0)
    }
}

impl Serialize for Price {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_decimal())
    }
}

impl<'de> Deserialize<'de> for Price {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Price::from_decimal(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses a decimal string into ticks.
pub fn price_from_decimal(text: &str) -> Result<Price, PriceParseError> {
    Price::from_decimal(text)
}

pub fn price_to_decimal(price: Price) -> String {
    price.to_decimal()
}

/// Microseconds since the session epoch (04:00 local).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub const MICROS_PER_SECOND: u64 = 1_000_000;
    /// 20:00, end of the extended session.
    pub const SESSION_END: Timestamp = Timestamp(57_600 * Self::MICROS_PER_SECOND);
    /// 09:30, regular-hours open.
    pub const REGULAR_OPEN: Timestamp = Timestamp(19_800 * Self::MICROS_PER_SECOND);
    /// 16:00, regular-hours close.
    pub const REGULAR_CLOSE: Timestamp = Timestamp(43_200 * Self::MICROS_PER_SECOND);

    pub const fn from_secs(secs: u64) -> Self {
        Timestamp(secs * Self::MICROS_PER_SECOND)
    }

    pub const fn micros(self) -> u64 {
        self.0
    }

    /// Whole seconds since the session epoch.
    pub const fn second(self) -> u64 {
        self.0 / Self::MICROS_PER_SECOND
    }

    pub fn in_session(self) -> bool {
        self < Self::SESSION_END
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}us", self.0)
    }
}

/// Index into the exchange registry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExchangeId(pub u8);

impl ExchangeId {
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense symbol identifier assigned by the symbol directory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

impl SymbolId {
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

/// One of the three consolidators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SipId {
    A,
    B,
    C,
}

impl SipId {
    pub const ALL: [SipId; 3] = [SipId::A, SipId::B, SipId::C];

    pub const fn index(self) -> usize {
        match self {
            SipId::A => 0,
            SipId::B => 1,
            SipId::C => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SipId::A => "A",
            SipId::B => "B",
            SipId::C => "C",
        }
    }
}

impl fmt::Display for SipId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SipId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(SipId::A),
            "B" => Ok(SipId::B),
            "C" => Ok(SipId::C),
            other => Err(format!("unknown SIP {other:?}")),
        }
    }
}

/// Listing group of a security, which decides its consolidator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Listing {
    #[serde(rename = "NYSE")]
    Nyse,
    /// NYSE ARCA, NYSE MKT, BATS and the regional exchanges.
    #[serde(rename = "NYSE_ARCA_MKT_BATS_REGIONAL")]
    NyseArcaMktBatsRegional,
    #[serde(rename = "NASDAQ")]
    Nasdaq,
}

impl Listing {
    pub const ALL: [Listing; 3] = [Listing::Nyse, Listing::NyseArcaMktBatsRegional, Listing::Nasdaq];

    pub fn as_str(self) -> &'static str {
        match self {
            Listing::Nyse => "NYSE",
            Listing::NyseArcaMktBatsRegional => "NYSE_ARCA_MKT_BATS_REGIONAL",
            Listing::Nasdaq => "NASDAQ",
        }
    }
}

impl fmt::Display for Listing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Listing {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "NYSE" => Ok(Listing::Nyse),
            "NYSE_ARCA_MKT_BATS_REGIONAL" | "ARCA" | "NYSEMKT" | "BATS" => Ok(Listing::NyseArcaMktBatsRegional),
            "NASDAQ" => Ok(Listing::Nasdaq),
            other => Err(format!("unknown listing group {other:?}")),
        }
    }
}

/// Maps a listing group to the SIP that consolidates it.
pub fn route_to_sip(listing: Listing) -> SipId {
    match listing {
        Listing::Nyse => SipId::A,
        Listing::NyseArcaMktBatsRegional => SipId::B,
        Listing::Nasdaq => SipId::C,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum MsgKind {
    Trade = 0,
    BidQuote = 1,
    AskQuote = 2,
}

impl MsgKind {
    pub fn from_u8(value: u8) -> Option<Self> {
        match value {
            0 => Some(MsgKind::Trade),
            1 => Some(MsgKind::BidQuote),
            2 => Some(MsgKind::AskQuote),
            _ => None,
        }
    }

    pub fn is_quote(self) -> bool {
        !matches!(self, MsgKind::Trade)
    }

    /// Single-letter code used in the CSV interchange.
    pub fn code(self) -> char {
        match self {
            MsgKind::Trade => 'T',
            MsgKind::BidQuote => 'B',
            MsgKind::AskQuote => 'A',
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "T" => Some(MsgKind::Trade),
            "B" => Some(MsgKind::BidQuote),
            "A" => Some(MsgKind::AskQuote),
            _ => None,
        }
    }
}

/// A single trade print or one-sided quote update with both timestamps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TapeRecord {
    pub symbol_id: SymbolId,
    pub msg_kind: MsgKind,
    pub exchange_id: ExchangeId,
    pub price: Price,
    pub size: u32,
    /// Send time at the venue.
    pub exchange_ts: Timestamp,
    /// Report time at the SIP.
    pub sip_ts: Timestamp,
    pub sip_seq: u64,
}

impl TapeRecord {
    /// SIP timestamp minus exchange timestamp, signed.
    pub fn latency_us(&self) -> i64 {
        self.sip_ts.0 as i64 - self.exchange_ts.0 as i64
    }

    pub fn is_trade(&self) -> bool {
        self.msg_kind == MsgKind::Trade
    }

    pub fn is_quote(&self) -> bool {
        self.msg_kind.is_quote()
    }
}
